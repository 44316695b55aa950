//! Command-line interface for the flagqec toolkit.
//!
//! Subcommands: `verify` builds and checks a lookup table, `simulate` runs
//! Monte Carlo storage experiments, `pseudothreshold` estimates crossings
//! from a result CSV, `footprint` evaluates the memory-cost formulas.
//! Exit codes: 0 on success, 2 on a distinguishability failure, 1 on any
//! other error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use flagqec::harness::{self, to_csv, FootprintCounts, FootprintMode};
use flagqec::{build_hex_color_code, CnotOrdering, CssCode, ExperimentConfig};

#[derive(Parser)]
#[command(name = "flagqec", version, about = "Flag FTQEC lookup-table decoding toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the fault check matrix and lookup cache, report its metrics,
    /// and verify distinguishability at t = (d-1)/2.
    Verify(VerifyArgs),
    /// Run a Monte Carlo storage experiment and emit CSV results.
    Simulate(SimulateArgs),
    /// Estimate pseudothresholds from a simulate CSV.
    Pseudothreshold(PseudothresholdArgs),
    /// Evaluate the lookup-table memory-footprint formulas.
    Footprint(FootprintArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Hexagonal color-code distance (3, 5, 7, 9, ...).
    #[arg(long, conflicts_with = "code")]
    distance: Option<usize>,
    /// External code file: first line n, then one generator support per
    /// line (0-based qubit indices).
    #[arg(long, requires = "code_distance")]
    code: Option<PathBuf>,
    /// Declared distance of the external code file.
    #[arg(long = "code-distance")]
    code_distance: Option<usize>,
    /// Optional CNOT ordering file: one line per generator, data qubits in
    /// coupling order. Defaults to ascending order.
    #[arg(long)]
    ordering: Option<PathBuf>,
    /// Write the fault check matrix as text (provenance header plus 0/1
    /// rows) to this path.
    #[arg(long)]
    dump_hf: Option<PathBuf>,
    /// Confirm large builds: distance 9 needs roughly 2.3 GB and half a
    /// minute, larger members more.
    #[arg(long)]
    allow_large: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// Flat key=value config file; CLI flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated list of distances.
    #[arg(long)]
    distances: Option<String>,
    /// Time decoder: shor, one_tailed, two_tailed.
    #[arg(long)]
    decoder: Option<String>,
    /// Measurement strategy: joint, xz, zx.
    #[arg(long)]
    strategy: Option<String>,
    /// Enable the Meet-in-the-Middle search.
    #[arg(long)]
    mim: bool,
    /// MIM search radius (defaults to t).
    #[arg(long)]
    rho: Option<usize>,
    /// Comma-separated physical error rates.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Idling noise strength for the sequential schedule.
    #[arg(long)]
    p_idle: Option<f64>,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PseudothresholdArgs {
    /// CSV produced by `simulate`.
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args)]
struct FootprintArgs {
    #[arg(long)]
    distance: usize,
    /// Accounting mode: stab, stab_cro, css, css_cro, css_cro_so.
    #[arg(long)]
    mode: String,
    /// Mixed-syndrome count T_XZ for the generic-stabilizer modes.
    #[arg(long, default_value_t = 1)]
    t_xz: u128,
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

/// Thread-pool size from FLAGQEC_THREADS (defaults to all cores).
fn init_threads() {
    if let Ok(value) = std::env::var("FLAGQEC_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if harness::configure_threads(threads).is_err() {
                eprintln!("warning: thread pool already configured");
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Verify(args) => verify(args),
        Command::Simulate(args) => simulate(args),
        Command::Pseudothreshold(args) => pseudothreshold(args),
        Command::Footprint(args) => footprint(args),
    }
}

fn verify(args: VerifyArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let code: CssCode = if let Some(path) = args.code {
        let d = args.code_distance.expect("clap enforces code-distance");
        CssCode::from_text(&std::fs::read_to_string(path)?, d)?
    } else {
        let d = args.distance.ok_or("either --distance or --code is required")?;
        if d >= 9 && !args.allow_large {
            return Err(format!(
                "distance {d} builds tens of millions of cache entries; pass --allow-large to confirm"
            )
            .into());
        }
        build_hex_color_code(d)?.0
    };
    let ordering = match args.ordering {
        Some(path) => CnotOrdering::parse(&code, &std::fs::read_to_string(path)?)?,
        None => CnotOrdering::ascending(&code),
    };
    if let Some(path) = &args.dump_hf {
        let hf = flagqec::build_fault_check_matrix(&code, &ordering);
        std::fs::write(path, hf.dump_text())?;
    }
    let (report, _) = harness::verify_code(&code, &ordering);
    print!("{}", report.render());
    Ok(if report.distinguishable {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn simulate(args: SimulateArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::from_text(&std::fs::read_to_string(path)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = &args.distances {
        config.set("distances", v)?;
    }
    if let Some(v) = &args.decoder {
        config.set("decoder", v)?;
    }
    if let Some(v) = &args.strategy {
        config.set("strategy", v)?;
    }
    if args.mim {
        config.set("mim", "true")?;
    }
    if let Some(v) = args.rho {
        config.set("rho", &v.to_string())?;
    }
    if let Some(v) = &args.p {
        config.set("p", v)?;
    }
    if let Some(v) = args.shots {
        config.set("shots", &v.to_string())?;
    }
    if let Some(v) = args.seed {
        config.set("seed", &v.to_string())?;
    }
    if let Some(v) = args.p_idle {
        config.set("p_idle", &v.to_string())?;
    }
    if let Some(v) = &args.output {
        config.output = Some(v.clone());
    }
    let points = harness::run_experiment(&config)?;
    let csv = to_csv(&config, &points);
    match &config.output {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn pseudothreshold(args: PseudothresholdArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(&args.input)?;
    let groups = harness::parse_csv_groups(&text)?;
    for group in groups {
        match harness::estimate_pseudothreshold(&group.points) {
            Ok(estimate) => println!(
                "{}: p_th = {:.4e} +- {:.1e}",
                group.label, estimate.p_th, estimate.uncertainty
            ),
            Err(err) => println!("{}: no estimate ({err})", group.label),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn footprint(args: FootprintArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let mode = FootprintMode::parse(&args.mode)
        .ok_or_else(|| format!("unknown footprint mode {:?}", args.mode))?;
    let (code, _) = build_hex_color_code(args.distance)?;
    let ordering = CnotOrdering::ascending(&code);
    let (report, table) = harness::verify_code(&code, &ordering);
    let Some(table) = table else {
        eprint!("{}", report.render());
        return Ok(ExitCode::from(2));
    };
    let counts = FootprintCounts::from_table(&table, args.t_xz);
    let bits = harness::footprint_bits(&code, counts, mode);
    println!(
        "n={} T_X={} T_Z={} T_XZ={} mode={:?}: {} bits ({} bytes)",
        code.n(),
        counts.t_x,
        counts.t_z,
        counts.t_xz,
        mode,
        bits,
        bits.div_ceil(8),
    );
    if mode == FootprintMode::CssCroSo {
        println!(
            "ratio bound M_so/M_stab <= 1/(8-4R): {}",
            harness::footprint_ratio_bound_holds(&code, counts)
        );
    }
    Ok(ExitCode::SUCCESS)
}
