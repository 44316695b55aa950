//! Experiment orchestration: configuration, Monte Carlo sampling with
//! Wilson intervals, pseudothreshold estimation, lookup-table verification,
//! and the memory-footprint formulas.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Duration;

use rayon::prelude::*;
use thiserror::Error;

use crate::codes::{build_hex_color_code, CodeError, CssCode};
use crate::faultcode::{build_fault_check_matrix, CnotOrdering};
use crate::lookup::{
    build_cache, memory_metrics, BuildError, DistinguishabilityReport, LookupTable,
};
use crate::sim::{DecoderConfig, DecoderKind, NoiseParams, Protocol, Strategy};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("config error: {0}")]
    Config(String),
    #[error("no crossing of p_L = 2p/3 within the given points")]
    NoCrossing,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// One Monte Carlo experiment: a grid of physical error rates for a set of
/// distances under one decoder configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub distances: Vec<usize>,
    pub decoder: DecoderKind,
    pub strategy: Strategy,
    pub mim: bool,
    /// MIM search radius; `None` means the default rho = t.
    pub rho: Option<usize>,
    pub ps: Vec<f64>,
    pub shots: u64,
    pub seed: u64,
    pub p_idle: f64,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            distances: vec![3],
            decoder: DecoderKind::Shor,
            strategy: Strategy::Joint,
            mim: false,
            rho: None,
            ps: vec![1e-3],
            shots: 10_000,
            seed: 2024,
            p_idle: 0.0,
            output: None,
        }
    }
}

impl ExperimentConfig {
    /// Parse the flat `key=value` config format; `#` starts a comment.
    pub fn from_text(text: &str) -> Result<Self, HarnessError> {
        let mut config = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                HarnessError::Config(format!("line {}: expected key=value", lineno + 1))
            })?;
            config.set(key.trim(), value.trim())?;
        }
        Ok(config)
    }

    /// Set one option by key; every key is also a CLI flag.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), HarnessError> {
        let bad = |what: &str| HarnessError::Config(format!("invalid {what}: {value:?}"));
        match key {
            "distances" | "distance" => {
                self.distances = value
                    .split(',')
                    .map(|tok| tok.trim().parse::<usize>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad("distance list"))?;
            }
            "decoder" => {
                self.decoder = match value {
                    "shor" => DecoderKind::Shor,
                    "one_tailed" | "one-tailed" => DecoderKind::OneTailed,
                    "two_tailed" | "two-tailed" => DecoderKind::TwoTailed,
                    _ => return Err(bad("decoder")),
                };
            }
            "strategy" => {
                self.strategy = match value {
                    "joint" => Strategy::Joint,
                    "xz" => Strategy::Xz,
                    "zx" => Strategy::Zx,
                    _ => return Err(bad("strategy")),
                };
            }
            "mim" => {
                self.mim = match value {
                    "true" | "1" | "on" => true,
                    "false" | "0" | "off" => false,
                    _ => return Err(bad("mim flag")),
                };
            }
            "rho" => {
                self.rho = if value.is_empty() {
                    None
                } else {
                    Some(value.parse().map_err(|_| bad("rho"))?)
                };
            }
            "p" => {
                self.ps = value
                    .split(',')
                    .map(|tok| tok.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad("p list"))?;
            }
            "shots" => self.shots = value.parse().map_err(|_| bad("shots"))?,
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "p_idle" => self.p_idle = value.parse().map_err(|_| bad("p_idle"))?,
            "output" => self.output = Some(PathBuf::from(value)),
            _ => return Err(HarnessError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.shots == 0 {
            return Err(HarnessError::Config("shots must be >= 1".into()));
        }
        if self.ps.iter().any(|&p| !(0.0..1.0).contains(&p)) {
            return Err(HarnessError::Config("p values must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// One grid point's estimate with its 95% Wilson interval.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultPoint {
    pub distance: usize,
    pub p: f64,
    pub shots: u64,
    pub failures: u64,
    pub p_l: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub avg_rounds: f64,
}

const Z95: f64 = 1.959963984540054;

/// 95% Wilson score interval for a binomial proportion.
pub fn wilson_interval(failures: u64, shots: u64) -> (f64, f64) {
    assert!(shots > 0);
    let n = shots as f64;
    let p_hat = failures as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p_hat + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // at the extremes the exact bound is the estimate itself
    let low = if failures == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if failures == shots { 1.0 } else { (center + half).min(1.0) };
    (low, high)
}

fn resolved_decoder(config: &ExperimentConfig, t: usize) -> DecoderConfig {
    DecoderConfig {
        kind: config.decoder,
        strategy: config.strategy,
        mim: config.mim,
        rho: if config.mim {
            config.rho.unwrap_or(t).min(t).max(1)
        } else {
            0
        },
    }
}

/// Run the full experiment grid. Builds each distance's code, fault check
/// matrix, and lookup table once; shots are sharded across threads with
/// integer accumulators so the output is independent of scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultPoint>, HarnessError> {
    config.validate()?;
    let mut points = Vec::new();
    for &d in &config.distances {
        let (code, _) = build_hex_color_code(d)?;
        let ordering = CnotOrdering::ascending(&code);
        let hf = build_fault_check_matrix(&code, &ordering);
        let table = build_cache(&hf, code.t())?;
        let decoder = resolved_decoder(config, code.t());
        for &p in &config.ps {
            let noise = NoiseParams::new(p, config.p_idle);
            let protocol = Protocol::new(&code, &hf, &table, &ordering, decoder, noise, config.seed)
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            let (failures, half_rounds) = (0..config.shots)
                .into_par_iter()
                .map(|shot| {
                    let outcome = protocol.run_shot(shot);
                    (
                        u64::from(outcome.logical_x_error),
                        u64::from(outcome.half_rounds),
                    )
                })
                .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
            let (ci_low, ci_high) = wilson_interval(failures, config.shots);
            points.push(ResultPoint {
                distance: d,
                p,
                shots: config.shots,
                failures,
                p_l: failures as f64 / config.shots as f64,
                ci_low,
                ci_high,
                avg_rounds: half_rounds as f64 / (2.0 * config.shots as f64),
            });
        }
    }
    Ok(points)
}

/// Install a global thread pool of the given size. Errors if a pool was
/// already built (rayon allows exactly one global configuration).
pub fn configure_threads(threads: usize) -> Result<(), HarnessError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| HarnessError::Config(e.to_string()))
}

pub const CSV_HEADER: &str =
    "distance,decoder,strategy,mim,p,shots,failures,p_l,ci_low,ci_high,avg_rounds";

/// Render results as CSV; bytes are reproducible for a fixed config and
/// seed.
pub fn to_csv(config: &ExperimentConfig, points: &[ResultPoint]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for point in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            point.distance,
            config.decoder.name(),
            config.strategy.name(),
            config.mim,
            point.p,
            point.shots,
            point.failures,
            point.p_l,
            point.ci_low,
            point.ci_high,
            point.avg_rounds,
        );
    }
    out
}

/// One configuration's rows parsed back from a results CSV.
#[derive(Debug, Clone)]
pub struct CsvGroup {
    pub label: String,
    pub points: Vec<ResultPoint>,
}

/// Parse a `simulate` CSV and group rows by (distance, decoder, strategy,
/// mim) for pseudothreshold estimation.
pub fn parse_csv_groups(text: &str) -> Result<Vec<CsvGroup>, HarnessError> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    if header.trim() != CSV_HEADER {
        return Err(HarnessError::Config(format!(
            "unexpected CSV header {header:?}"
        )));
    }
    let mut groups: Vec<CsvGroup> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            return Err(HarnessError::Config(format!(
                "line {}: expected 11 fields",
                lineno + 2
            )));
        }
        let parse_err = |what: &str| {
            HarnessError::Config(format!("line {}: invalid {what}", lineno + 2))
        };
        let point = ResultPoint {
            distance: fields[0].parse().map_err(|_| parse_err("distance"))?,
            p: fields[4].parse().map_err(|_| parse_err("p"))?,
            shots: fields[5].parse().map_err(|_| parse_err("shots"))?,
            failures: fields[6].parse().map_err(|_| parse_err("failures"))?,
            p_l: fields[7].parse().map_err(|_| parse_err("p_l"))?,
            ci_low: fields[8].parse().map_err(|_| parse_err("ci_low"))?,
            ci_high: fields[9].parse().map_err(|_| parse_err("ci_high"))?,
            avg_rounds: fields[10].parse().map_err(|_| parse_err("avg_rounds"))?,
        };
        let label = format!(
            "d={} {} {} mim={}",
            fields[0], fields[1], fields[2], fields[3]
        );
        match groups.iter_mut().find(|g| g.label == label) {
            Some(group) => group.points.push(point),
            None => groups.push(CsvGroup {
                label,
                points: vec![point],
            }),
        }
    }
    Ok(groups)
}

/// Pseudothreshold estimate: the crossing of `p_L(p)` with `2p/3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudothresholdEstimate {
    pub p_th: f64,
    pub uncertainty: f64,
}

fn crossing(points: &[(f64, f64)]) -> Option<f64> {
    let margin = |&(p, p_l): &(f64, f64)| p_l - 2.0 * p / 3.0;
    for pair in points.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let (ma, mb) = (margin(&a), margin(&b));
        if ma == 0.0 {
            return Some(a.0);
        }
        if ma < 0.0 && mb >= 0.0 || ma > 0.0 && mb <= 0.0 {
            if a.1 <= 0.0 || b.1 <= 0.0 {
                // cannot interpolate logs through zero; fall back to linear
                let t = ma / (ma - mb);
                return Some(a.0 + t * (b.0 - a.0));
            }
            // log-log interpolation: solve a + b log p = log(2/3) + log p
            let (x1, y1) = (a.0.ln(), a.1.ln());
            let (x2, y2) = (b.0.ln(), b.1.ln());
            let slope = (y2 - y1) / (x2 - x1);
            let intercept = y1 - slope * x1;
            let target = (2.0f64 / 3.0).ln();
            let x = (intercept - target) / (1.0 - slope);
            return Some(x.exp());
        }
    }
    None
}

/// Estimate the pseudothreshold from bracketing grid points by log-log
/// interpolation; the uncertainty is propagated from the Wilson interval
/// endpoints.
pub fn estimate_pseudothreshold(
    points: &[ResultPoint],
) -> Result<PseudothresholdEstimate, HarnessError> {
    let mut sorted: Vec<&ResultPoint> = points.iter().collect();
    sorted.sort_by(|a, b| a.p.total_cmp(&b.p));
    let central: Vec<(f64, f64)> = sorted.iter().map(|pt| (pt.p, pt.p_l)).collect();
    let p_th = crossing(&central).ok_or(HarnessError::NoCrossing)?;
    let high: Vec<(f64, f64)> = sorted.iter().map(|pt| (pt.p, pt.ci_high)).collect();
    let low: Vec<(f64, f64)> = sorted.iter().map(|pt| (pt.p, pt.ci_low)).collect();
    // a uniformly higher p_L curve crosses 2p/3 earlier
    let p_minus = crossing(&high).unwrap_or(sorted.first().map(|pt| pt.p).unwrap_or(p_th));
    let p_plus = crossing(&low).unwrap_or(sorted.last().map(|pt| pt.p).unwrap_or(p_th));
    Ok(PseudothresholdEstimate {
        p_th,
        uncertainty: (p_plus - p_minus).abs() / 2.0,
    })
}

/// Report from the `verify` command: lookup-table metrics plus the
/// distinguishability verdict.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub n: usize,
    pub d: usize,
    pub t: usize,
    pub columns: usize,
    pub unique_columns: usize,
    pub fault_combinations: u64,
    pub cache_size: usize,
    pub build_time: Duration,
    pub distinguishable: bool,
    pub t_eff: usize,
    pub report: Option<DistinguishabilityReport>,
}

impl VerifyReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "code: n={} d={} t={}", self.n, self.d, self.t);
        let _ = writeln!(out, "columns of H_f:      {}", self.columns);
        let _ = writeln!(out, "unique columns:      {}", self.unique_columns);
        let _ = writeln!(out, "fault combinations:  {}", self.fault_combinations);
        let _ = writeln!(out, "cache size:          {}", self.cache_size);
        let _ = writeln!(out, "build time:          {:.3?}", self.build_time);
        let _ = writeln!(
            out,
            "distinguishable:     {} (t_eff = {})",
            self.distinguishable, self.t_eff
        );
        if let Some(report) = &self.report {
            if let Some(witness) = &report.witness {
                let fmt = |origins: &[crate::faultcode::FaultOrigin]| {
                    if origins.is_empty() {
                        "(no faults)".to_string()
                    } else {
                        origins
                            .iter()
                            .map(|o| o.to_string())
                            .collect::<Vec<_>>()
                            .join(" ")
                    }
                };
                let _ = writeln!(out, "conflict witness A:  {}", fmt(&witness.combo_a));
                let _ = writeln!(out, "conflict witness B:  {}", fmt(&witness.combo_b));
            }
        }
        out
    }
}

/// Build the fault check matrix and cache for a code, reporting metrics and
/// the distinguishability verdict at radius `t`.
pub fn verify_code(code: &CssCode, ordering: &CnotOrdering) -> (VerifyReport, Option<LookupTable>) {
    let hf = build_fault_check_matrix(code, ordering);
    match build_cache(&hf, code.t()) {
        Ok(table) => {
            let metrics = memory_metrics(&table, &hf);
            let report = VerifyReport {
                n: code.n(),
                d: code.d(),
                t: code.t(),
                columns: metrics.columns,
                unique_columns: metrics.unique_columns,
                fault_combinations: metrics.fault_combinations,
                cache_size: metrics.cache_size,
                build_time: metrics.build_time,
                distinguishable: true,
                t_eff: code.t(),
                report: None,
            };
            (report, Some(table))
        }
        Err(BuildError::Indistinguishable { report, .. }) => {
            let t_eff = report.t_eff;
            let verify = VerifyReport {
                n: code.n(),
                d: code.d(),
                t: code.t(),
                columns: hf.columns(),
                unique_columns: hf.unique().count(),
                fault_combinations: 0,
                cache_size: 0,
                build_time: Duration::ZERO,
                distinguishable: false,
                t_eff,
                report: Some(*report),
            };
            (verify, None)
        }
        Err(other) => panic!("lookup build failed: {other}"),
    }
}

/// `verify` for a hexagonal color code distance with the default ordering.
pub fn verify_distance(d: usize) -> Result<VerifyReport, HarnessError> {
    let (code, _) = build_hex_color_code(d)?;
    let ordering = CnotOrdering::ascending(&code);
    Ok(verify_code(&code, &ordering).0)
}

/// Which memory-footprint accounting to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FootprintMode {
    /// Generic stabilizer table: `T_stab (4n - 2k)`.
    Stab,
    /// Generic stabilizer table with CRO compression: `T_stab * 2n`.
    StabCro,
    /// Two CSS tables with full recovery operators.
    Css,
    /// Two CSS tables with logical classes.
    CssCro,
    /// Single self-orthogonal table with logical classes: `n (T + 1)`.
    CssCroSo,
}

impl FootprintMode {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "stab" => FootprintMode::Stab,
            "stab_cro" => FootprintMode::StabCro,
            "css" => FootprintMode::Css,
            "css_cro" => FootprintMode::CssCro,
            "css_cro_so" => FootprintMode::CssCroSo,
            _ => return None,
        })
    }
}

/// Entry counts feeding the footprint formulas. For a self-orthogonal code
/// the table-derived counts are `T_X = T_Z = entries - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FootprintCounts {
    pub t_x: u128,
    pub t_z: u128,
    /// Number of mixed-type syndromes of the generic-stabilizer view; at
    /// least 1 for any nontrivial encoding.
    pub t_xz: u128,
}

impl FootprintCounts {
    pub fn from_table(table: &LookupTable, t_xz: u128) -> Self {
        let t = table.len() as u128 - 1;
        Self {
            t_x: t,
            t_z: t,
            t_xz,
        }
    }

    pub fn t_stab(&self) -> u128 {
        self.t_x + self.t_z + 1 + self.t_xz
    }
}

/// Evaluate one footprint formula in exact bit counts.
pub fn footprint_bits(code: &CssCode, counts: FootprintCounts, mode: FootprintMode) -> u128 {
    let n = code.n() as u128;
    let k = code.k() as u128;
    let r = code.generators() as u128;
    match mode {
        FootprintMode::Stab => counts.t_stab() * (4 * n - 2 * k),
        FootprintMode::StabCro => counts.t_stab() * 2 * n,
        FootprintMode::Css => (counts.t_x + 1) * (2 * r + n) + (counts.t_z + 1) * (2 * r + n),
        FootprintMode::CssCro => (counts.t_x + 1) * (2 * r + k) + (counts.t_z + 1) * (2 * r + k),
        FootprintMode::CssCroSo => {
            assert_eq!(counts.t_x, counts.t_z, "self-orthogonal mode needs T_X = T_Z");
            n * (counts.t_x + 1)
        }
    }
}

/// The self-orthogonal-over-stabilizer bound `M_so / M_stab <= 1 / (8-4R)`,
/// checked in exact integer arithmetic.
pub fn footprint_ratio_bound_holds(code: &CssCode, counts: FootprintCounts) -> bool {
    let so = footprint_bits(code, counts, FootprintMode::CssCroSo);
    let stab = footprint_bits(code, counts, FootprintMode::Stab);
    let n = code.n() as u128;
    let k = code.k() as u128;
    // so / stab <= n / (8n - 4k)  <=>  so (8n - 4k) <= stab n
    so * (8 * n - 4 * k) <= stab * n
}
