//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them on success).
//!
//! The default set finishes in a few minutes on a laptop. The `d9_`-prefixed
//! tests need roughly 2.3 GB of memory and the better part of an hour; they
//! are ignored by default and run with `cargo test --release -p flagqec
//! --test acceptance -- --ignored`.

use std::sync::OnceLock;

use flagqec::harness::{
    estimate_pseudothreshold, footprint_bits, footprint_ratio_bound_holds, run_experiment,
    verify_distance, ExperimentConfig, FootprintCounts, FootprintMode, ResultPoint,
};
use flagqec::sim::exhaustive_single_fault_check;
use flagqec::timedec::{one_tailed_round_cap, shor_round_cap, two_tailed_round_cap};
use flagqec::*;

struct Fixture {
    code: CssCode,
    hf: FaultCheckMatrix,
    table: LookupTable,
    ordering: CnotOrdering,
}

fn fixture(d: usize) -> &'static Fixture {
    static SLOTS: [OnceLock<Fixture>; 4] = [
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
    ];
    let idx = match d {
        3 => 0,
        5 => 1,
        7 => 2,
        9 => 3,
        _ => panic!("unsupported distance {d}"),
    };
    SLOTS[idx].get_or_init(|| {
        let (code, _) = build_hex_color_code(d).unwrap();
        let ordering = CnotOrdering::ascending(&code);
        let hf = build_fault_check_matrix(&code, &ordering);
        let table = build_cache(&hf, code.t()).unwrap();
        Fixture {
            code,
            hf,
            table,
            ordering,
        }
    })
}

fn config(kind: DecoderKind, strategy: Strategy, mim: bool, t: usize) -> DecoderConfig {
    DecoderConfig {
        kind,
        strategy,
        mim,
        rho: if mim { t } else { 0 },
    }
}

fn protocol<'a>(fx: &'a Fixture, decoder: DecoderConfig, p: f64, seed: u64) -> Protocol<'a> {
    Protocol::new(
        &fx.code,
        &fx.hf,
        &fx.table,
        &fx.ordering,
        decoder,
        NoiseParams::gate_only(p),
        seed,
    )
    .unwrap()
}

fn monte_carlo(fx: &Fixture, decoder: DecoderConfig, p: f64, shots: u64, seed: u64) -> ResultPoint {
    let protocol = protocol(fx, decoder, p, seed);
    let mut failures = 0u64;
    let mut half_rounds = 0u64;
    for shot in 0..shots {
        let outcome = protocol.run_shot(shot);
        failures += u64::from(outcome.logical_x_error);
        half_rounds += u64::from(outcome.half_rounds);
    }
    let (ci_low, ci_high) = flagqec::harness::wilson_interval(failures, shots);
    ResultPoint {
        distance: fx.code.d(),
        p,
        shots,
        failures,
        p_l: failures as f64 / shots as f64,
        ci_low,
        ci_high,
        avg_rounds: half_rounds as f64 / (2.0 * shots as f64),
    }
}

#[test]
fn criterion_01_lookup_metrics_exact() {
    let expected = [
        (3usize, 28usize, 20usize, 20u64, 20usize),
        (5, 88, 62, 1953, 1587),
        (7, 181, 128, 349_632, 262_500),
    ];
    for (d, columns, unique, combinations, cache) in expected {
        let report = verify_distance(d).unwrap();
        assert_eq!(report.columns, columns, "d={d} columns");
        assert_eq!(report.unique_columns, unique, "d={d} unique");
        assert_eq!(report.fault_combinations, combinations, "d={d} combinations");
        assert_eq!(report.cache_size, cache, "d={d} cache");
        assert!(
            report.build_time.as_secs_f64() < 120.0,
            "d={d} build exceeded two minutes"
        );
    }
    println!("criterion 1 (lookup metrics d<=7): PASS — 28/20/20/20, 88/62/1953/1587, 181/128/349632/262500");
}

#[test]
fn criterion_02_distance_preservation() {
    // distinguishability at t for the default ordering
    for d in [3usize, 5, 7] {
        let report = verify_distance(d).unwrap();
        assert!(report.distinguishable, "d={d} not distinguishable");
        assert!(report.t_eff >= (d - 1) / 2);
    }
    // exhaustive single-fault sweeps at p = 0, all decoder configurations
    let all_configs = |t: usize| {
        vec![
            config(DecoderKind::Shor, Strategy::Joint, false, t),
            config(DecoderKind::Shor, Strategy::Joint, true, t),
            config(DecoderKind::OneTailed, Strategy::Joint, false, t),
            config(DecoderKind::OneTailed, Strategy::Joint, true, t),
            config(DecoderKind::TwoTailed, Strategy::Joint, true, t),
            config(DecoderKind::TwoTailed, Strategy::Xz, true, t),
            config(DecoderKind::TwoTailed, Strategy::Zx, true, t),
        ]
    };
    let mut total_cases = 0usize;
    for d in [3usize, 5, 7] {
        let fx = fixture(d);
        let configs = if d == 7 {
            vec![
                config(DecoderKind::Shor, Strategy::Joint, false, fx.code.t()),
                config(DecoderKind::TwoTailed, Strategy::Zx, true, fx.code.t()),
                config(DecoderKind::TwoTailed, Strategy::Joint, true, fx.code.t()),
            ]
        } else {
            all_configs(fx.code.t())
        };
        for decoder in configs {
            let p = protocol(fx, decoder, 0.0, 0);
            match exhaustive_single_fault_check(&p) {
                Ok(cases) => total_cases += cases,
                Err(inj) => panic!("d={d} {decoder:?}: logical error from {inj:?}"),
            }
        }
    }
    // all fault pairs over unique columns at d=5 decode without residual
    let fx = fixture(5);
    let unique = fx.hf.unique();
    let mut pairs = 0;
    for i in 0..unique.count() {
        for j in i + 1..unique.count() {
            let sigma = FullSyndrome::unpack(
                unique.keys[i] ^ unique.keys[j],
                fx.code.generators(),
            );
            let class = unique.classes[i] ^ unique.classes[j];
            let recovery = decode(&fx.table, &fx.code, &sigma);
            assert_eq!(fx.code.syndrome(&recovery), *sigma.s());
            assert_eq!(
                fx.code.logical_class(&recovery),
                class,
                "pair ({i},{j}) leaves a logical residual"
            );
            pairs += 1;
        }
    }
    println!(
        "criterion 2 (distance preservation): PASS — {total_cases} single-fault cases (d=3,5,7), {pairs} d=5 unique-column pairs"
    );
}

#[test]
fn criterion_03_steane_worked_examples() {
    let h = BitMatrix::from_binary_rows(&["0001111", "0110011", "1010101"]);
    let h_inv = BitMatrix::from_binary_rows(&["001", "010", "000", "100", "000", "000", "000"]);
    assert_eq!(h.mul(&h_inv), BitMatrix::identity(3));
    // the lowest-pivot right inverse reproduces the reference choice
    assert_eq!(h.right_inverse().unwrap(), h_inv);

    let code =
        CssCode::from_generators(7, &[vec![3, 4, 5, 6], vec![1, 2, 5, 6], vec![0, 2, 4, 6]], 3)
            .unwrap();
    let e = BitVec::from_bits("0110000".chars().map(|c| c == '1'));
    let s = code.syndrome(&e);
    assert_eq!(s, BitVec::from_bits("001".chars().map(|c| c == '1')));
    assert_eq!(
        code.canonical_recovery(&s),
        BitVec::from_bits("1000000".chars().map(|c| c == '1'))
    );
    assert!(code.logical_class(&e));

    let hf = build_fault_check_matrix(&code, &CnotOrdering::ascending(&code));
    let data_classes: Vec<u8> = (0..7)
        .map(|q| u8::from(hf.column(q).1))
        .collect();
    assert_eq!(data_classes, vec![0, 0, 1, 0, 1, 1, 0]);

    // P_i for the coupling order [4,6,5,7] equals the reference 10x6 block
    let ordering = CnotOrdering::from_lists(
        &code,
        vec![vec![3, 5, 4, 6], vec![1, 2, 5, 6], vec![0, 2, 4, 6]],
    )
    .unwrap();
    let p = build_propagator(&code, &ordering);
    let reference = BitMatrix::from_binary_rows(&[
        "000000", "000000", "000000", "100000", "000100", "001000", "000001", "010010",
        "000000", "000000",
    ]);
    for row in 0..10 {
        for col in 0..6 {
            assert_eq!(p.get(row, col), reference.get(row, col), "P_i ({row},{col})");
        }
    }
    println!("criterion 3 (Steane worked examples): PASS — H*Hinv=I, syndrome/CRO/class, logical row, printed P_i");
}

#[test]
fn criterion_04_time_decoder_bounds() {
    use flagqec::timedec::{
        one_tailed_decision, shor_decision, two_tailed_decision, DifferenceVector,
    };
    // exhaustive worst cases for t = 1..3 over fault-consistent streams
    // (mirrors the unit oracle; asserted here as the acceptance gate)
    let pairs_plus_singles = |bits: &[bool]| {
        let mut total = 0;
        let mut run = 0;
        for &b in bits {
            if b {
                run += 1;
            } else {
                total += run / 2 + run % 2;
                run = 0;
            }
        }
        total + run / 2 + run % 2
    };
    for t in 1..=3usize {
        let len = (shor_round_cap(t).max(one_tailed_round_cap(t)) + 1).min(20);
        let mut worst = [0usize; 3];
        for pattern in 0u32..(1 << len) {
            let bits: Vec<bool> = (0..len).map(|i| pattern >> i & 1 == 1).collect();
            if pairs_plus_singles(&bits) > t {
                continue;
            }
            let flags = vec![0usize; len + 1];
            // first-stop rounds per decoder under online evaluation
            let first_stop = |decide: &dyn Fn(&DifferenceVector, &[usize]) -> bool| {
                (1..=len + 1)
                    .find(|&m| {
                        let delta = DifferenceVector::from_bits(bits[..m - 1].to_vec());
                        decide(&delta, &flags[..m])
                    })
                    .expect("cap must stop the stream")
            };
            let ms = first_stop(&|d, _| shor_decision(d, t).is_some());
            let m1 = first_stop(&|d, f| one_tailed_decision(d, f, t).is_some());
            let m2 = first_stop(&|d, f| two_tailed_decision(d, f, t).is_some());
            worst[0] = worst[0].max(ms);
            worst[1] = worst[1].max(m1);
            worst[2] = worst[2].max(m2);
        }
        assert!(worst[0] <= shor_round_cap(t), "shor t={t}");
        assert!(worst[1] <= one_tailed_round_cap(t), "one-tailed t={t}");
        assert!(worst[2] <= two_tailed_round_cap(t), "two-tailed t={t}");
        assert_eq!(worst[0], shor_round_cap(t), "shor bound tight t={t}");
        if t >= 2 {
            assert_eq!(worst[1], one_tailed_round_cap(t), "one-tailed tight t={t}");
        }
        assert_eq!(worst[2], two_tailed_round_cap(t), "two-tailed tight t={t}");
    }
    // randomized adversarial streams for t = 4 stay within the caps
    let mut state = 0xD1B5_4A32_D192_ED03u64;
    let next = |s: &mut u64| {
        *s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        *s >> 33
    };
    for _ in 0..2000 {
        let t = 4usize;
        let len = 30;
        let bits: Vec<bool> = (0..len).map(|_| next(&mut state) & 1 == 1).collect();
        let flags: Vec<usize> = (0..=len).map(|_| (next(&mut state) % 3) as usize).collect();
        for (cap, stopper) in [
            (shor_round_cap(t), 0usize),
            (one_tailed_round_cap(t), 1),
            (two_tailed_round_cap(t), 2),
        ] {
            use flagqec::timedec::StopDecision;
            let decide = |delta: &DifferenceVector, fl: &[usize]| -> Option<StopDecision> {
                match stopper {
                    0 => shor_decision(delta, t),
                    1 => one_tailed_decision(delta, fl, t),
                    _ => two_tailed_decision(delta, fl, t),
                }
            };
            let m = (1..=len + 1)
                .find(|&m| {
                    let delta = DifferenceVector::from_bits(bits[..m - 1].to_vec());
                    decide(&delta, &flags[..m]).is_some()
                })
                .expect("cap totalizes");
            assert!(m <= cap);
        }
    }
    // the maximal non-stopping pattern for t = 3: no stop through 9 bits,
    // stop on the appended zero
    let pattern = "001001011";
    for k in 1..=pattern.len() {
        let delta = DifferenceVector::from_bits(
            pattern[..k].chars().map(|c| c == '1').collect(),
        );
        let flags = vec![0usize; delta.rounds()];
        assert!(one_tailed_decision(&delta, &flags, 3).is_none(), "prefix {k}");
    }
    let extended = DifferenceVector::from_bits(
        format!("{pattern}0").chars().map(|c| c == '1').collect(),
    );
    assert!(one_tailed_decision(&extended, &vec![0; extended.rounds()], 3).is_some());
    println!("criterion 4 (time-decoder bounds): PASS — caps (t+1)^2 / t(t+3)/2+2 / (t+3)^2/4-1 verified, maximal pattern exact");
}

#[test]
fn criterion_05_average_rounds() {
    // p = 0 floor: exactly t+1 rounds for every decoder
    for d in [3usize, 5, 7] {
        let fx = fixture(d);
        let t = fx.code.t();
        for decoder in [
            config(DecoderKind::Shor, Strategy::Joint, false, t),
            config(DecoderKind::OneTailed, Strategy::Joint, false, t),
            config(DecoderKind::TwoTailed, Strategy::Joint, false, t),
            config(DecoderKind::TwoTailed, Strategy::Zx, false, t),
        ] {
            let point = monte_carlo(fx, decoder, 0.0, 32, 51);
            assert_eq!(point.avg_rounds, (t + 1) as f64, "d={d} {decoder:?}");
            assert_eq!(point.failures, 0);
        }
    }
    // p = 0.3 asymptotes with 1e4 shots
    let shots = 10_000;
    let mut lines = Vec::new();
    for d in [3usize, 5] {
        let fx = fixture(d);
        let t = fx.code.t();
        let shor = monte_carlo(fx, config(DecoderKind::Shor, Strategy::Joint, false, t), 0.3, shots, 52);
        let expected = ((t + 1) * (t + 1)) as f64;
        assert!(
            (shor.avg_rounds - expected).abs() <= 0.2,
            "d={d} shor rounds {} vs {expected}",
            shor.avg_rounds
        );
        for kind in [DecoderKind::OneTailed, DecoderKind::TwoTailed] {
            let point = monte_carlo(fx, config(kind, Strategy::Joint, false, t), 0.3, shots, 52);
            let expected = (2 * t + 1) as f64;
            assert!(
                (point.avg_rounds - expected).abs() <= 0.2,
                "d={d} {kind:?} rounds {} vs {expected}",
                point.avg_rounds
            );
        }
        let zx = monte_carlo(fx, config(DecoderKind::TwoTailed, Strategy::Zx, false, t), 0.3, shots, 52);
        let expected = (t + 1) as f64;
        assert!(
            (zx.avg_rounds - expected).abs() <= 0.2,
            "d={d} separated rounds {} vs {expected}",
            zx.avg_rounds
        );
        lines.push(format!(
            "d={d}: shor {:.2}, adaptive {:.2}, separated {:.2}",
            shor.avg_rounds,
            monte_carlo(fx, config(DecoderKind::TwoTailed, Strategy::Joint, false, t), 0.3, shots, 52).avg_rounds,
            zx.avg_rounds
        ));
    }
    println!(
        "criterion 5 (average-round asymptotes): PASS — {}",
        lines.join("; ")
    );
}

#[test]
fn criterion_06_pseudothreshold_desk_scale() {
    // d=3, 1e6 shots per point on a 6-point grid: the baseline decoder
    // (Shor, no MIM) against the best configuration (two-tailed ZX + MIM)
    let fx = fixture(3);
    let grid = [3e-4, 4.5e-4, 6.75e-4, 1.0125e-3, 1.51875e-3, 2.278125e-3];
    let shots = 1_000_000;
    let run = |decoder: DecoderConfig, seed: u64| -> Vec<ResultPoint> {
        grid.iter()
            .map(|&p| monte_carlo(fx, decoder, p, shots, seed))
            .collect()
    };
    let shor = run(config(DecoderKind::Shor, Strategy::Joint, false, 1), 61);
    let best = run(config(DecoderKind::TwoTailed, Strategy::Zx, true, 1), 61);
    let shor_th = estimate_pseudothreshold(&shor).unwrap();
    let best_th = estimate_pseudothreshold(&best).unwrap();
    assert!(
        best_th.p_th > shor_th.p_th,
        "ordering violated: {} vs {}",
        best_th.p_th,
        shor_th.p_th
    );
    let ratio = best_th.p_th / shor_th.p_th;
    assert!(ratio > 1.3, "ratio {ratio} below 1.3");
    println!(
        "criterion 6 desk scale (d=3 pseudothresholds): PASS — shor {:.3e}, two-tailed ZX+MIM {:.3e}, ratio {:.2}",
        shor_th.p_th, best_th.p_th, ratio
    );
}

#[test]
fn criterion_07_distance_preservation_slope() {
    // log-log slope over the three lowest points must sit in [t+0.5, t+1.5]
    let cases = [(3usize, [4e-4, 6e-4, 9e-4]), (5, [6e-4, 9e-4, 1.35e-3])];
    let shots = 1_000_000;
    let mut lines = Vec::new();
    for (d, grid) in cases {
        let fx = fixture(d);
        let t = fx.code.t() as f64;
        let decoder = config(DecoderKind::Shor, Strategy::Joint, false, fx.code.t());
        let points: Vec<ResultPoint> = grid
            .iter()
            .map(|&p| monte_carlo(fx, decoder, p, shots, 71))
            .collect();
        for point in &points {
            assert!(point.failures > 0, "d={d} p={} had no failures", point.p);
        }
        // least-squares slope in log-log coordinates
        let xs: Vec<f64> = points.iter().map(|pt| pt.p.ln()).collect();
        let ys: Vec<f64> = points.iter().map(|pt| pt.p_l.ln()).collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let slope = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - mx) * (y - my))
            .sum::<f64>()
            / xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
        assert!(
            slope >= t + 0.5 && slope <= t + 1.5,
            "d={d} slope {slope} outside [{}, {}]",
            t + 0.5,
            t + 1.5
        );
        lines.push(format!("d={d}: slope {slope:.2}"));
    }
    println!(
        "criterion 7 (distance-preservation slope): PASS — {}",
        lines.join(", ")
    );
}

#[test]
fn criterion_08_mim_effects() {
    // d=3: MIM on/off statistically indistinguishable under a two-proportion
    // z-test at alpha = 0.01 with matched seeds
    let fx = fixture(3);
    let shots = 1_000_000;
    let p = 2e-3;
    let off = monte_carlo(fx, config(DecoderKind::TwoTailed, Strategy::Joint, false, 1), p, shots, 81);
    let on = monte_carlo(fx, config(DecoderKind::TwoTailed, Strategy::Joint, true, 1), p, shots, 81);
    let pool = (off.failures + on.failures) as f64 / (2 * shots) as f64;
    let se = (2.0 * pool * (1.0 - pool) / shots as f64).sqrt();
    let z = (off.p_l - on.p_l) / se;
    assert!(
        z.abs() < 2.5758,
        "d=3 MIM effect unexpectedly significant: z = {z:.2} ({} vs {})",
        off.failures,
        on.failures
    );
    // d=5: MIM strictly reduces p_L at p = 1e-3 with 1e6 shots
    let fx5 = fixture(5);
    let off5 = monte_carlo(fx5, config(DecoderKind::Shor, Strategy::Joint, false, 2), 1e-3, shots, 82);
    let on5 = monte_carlo(fx5, config(DecoderKind::Shor, Strategy::Joint, true, 2), 1e-3, shots, 82);
    assert!(
        on5.failures < off5.failures,
        "d=5 MIM did not reduce failures: {} vs {}",
        on5.failures,
        off5.failures
    );
    let pool5 = (off5.failures + on5.failures) as f64 / (2 * shots) as f64;
    let se5 = (2.0 * pool5 * (1.0 - pool5) / shots as f64).sqrt();
    let z5 = (off5.p_l - on5.p_l) / se5;
    assert!(z5 > 2.5758, "d=5 MIM reduction not significant: z = {z5:.2}");
    println!(
        "criterion 8 (MIM effects): PASS — d=3 z = {z:.2} (indistinguishable), d=5 {} -> {} failures (z = {z5:.1})",
        off5.failures, on5.failures
    );
}

#[test]
fn criterion_09_flag_processing_hadamard() {
    // Two FTQEC routines with a transversal logical Hadamard between them:
    // threading the transformed remaining flags corrects every single
    // injected fault; omitting the transform must fail somewhere.
    let fx = fixture(3);
    let decoder = config(DecoderKind::TwoTailed, Strategy::Joint, false, 1);
    let p = protocol(fx, decoder, 0.0, 0);
    let sites = p.enumerate_sites();
    let run_case = |injection: Injection, transform: bool| -> (bool, bool) {
        let mut frame = PauliFrame::new(fx.code.n());
        let initial = FlagState::zeros(fx.code.generators());
        let routine1 = p.run_routine(&mut frame, &initial, 0, Some(injection));
        // noiseless transversal logical Hadamard
        frame.swap_xz();
        let mut threaded = routine1.remaining.clone();
        if transform {
            transform_flags(LogicalClifford::Hadamard, std::slice::from_mut(&mut threaded));
        }
        let routine2 = p.run_routine(&mut frame, &threaded, 1, None);
        p.ideal_ec(&mut frame, &routine2.remaining);
        (
            fx.code.logical_class(&frame.x),
            fx.code.logical_class(&frame.z),
        )
    };
    let mut cases = 0;
    let mut control_failures = 0;
    for (site, kind) in sites.iter().enumerate() {
        for variant in 0..kind.variants() {
            let injection = Injection {
                site: site as u64,
                variant,
            };
            let (x_err, z_err) = run_case(injection, true);
            assert!(
                !x_err && !z_err,
                "transformed threading failed at {injection:?}"
            );
            let (cx, cz) = run_case(injection, false);
            control_failures += usize::from(cx || cz);
            cases += 1;
        }
    }
    assert!(
        control_failures > 0,
        "omitting the flag transform never failed; the check has no power"
    );
    println!(
        "criterion 9 (flag processing): PASS — {cases} injections clean with transform, {control_failures} control failures without"
    );
}

#[test]
fn criterion_10_footprint_formulas() {
    let fx = fixture(3);
    // Steane with the perfect-CSS counts: T = 7, M_CSS,CRO,SO = n(T+1) = 56
    let counts = FootprintCounts {
        t_x: 7,
        t_z: 7,
        t_xz: 49,
    };
    assert_eq!(footprint_bits(&fx.code, counts, FootprintMode::CssCroSo), 56);
    assert_eq!(
        footprint_bits(&fx.code, counts, FootprintMode::Stab),
        counts.t_stab() * 26
    );
    assert_eq!(
        footprint_bits(&fx.code, counts, FootprintMode::StabCro),
        counts.t_stab() * 14
    );
    // M_CSS - M_CSS,CRO = (n - k)(2 + T_X + T_Z)
    let css = footprint_bits(&fx.code, counts, FootprintMode::Css);
    let css_cro = footprint_bits(&fx.code, counts, FootprintMode::CssCro);
    assert_eq!(css - css_cro, 6 * 16);
    // ratio bound <= 1/(8 - 4R), exact integers, for hypothetical and
    // table-derived counts
    assert!(footprint_ratio_bound_holds(&fx.code, counts));
    for d in [3usize, 5, 7] {
        let fx = fixture(d);
        let table_counts = FootprintCounts::from_table(&fx.table, 1);
        assert!(footprint_ratio_bound_holds(&fx.code, table_counts));
        assert_eq!(
            footprint_bits(&fx.code, table_counts, FootprintMode::CssCroSo),
            fx.code.n() as u128 * fx.table.len() as u128
        );
    }
    println!("criterion 10 (footprint formulas): PASS — n(T+1) = 56 for Steane T=7, ratio bound exact");
}

#[test]
fn reproducibility_csv_bytes() {
    // identical config and seed give identical CSV bytes
    let mut config = ExperimentConfig::default();
    config.set("p", "0.002,0.004").unwrap();
    config.set("shots", "2000").unwrap();
    config.set("decoder", "two_tailed").unwrap();
    config.set("mim", "true").unwrap();
    let a = flagqec::harness::to_csv(&config, &run_experiment(&config).unwrap());
    let b = flagqec::harness::to_csv(&config, &run_experiment(&config).unwrap());
    assert_eq!(a, b);
    println!("reproducibility: PASS — identical CSV bytes across runs");
}

// ---------------------------------------------------------------------
// long suite: d = 9 (about 2.3 GB of memory; run with -- --ignored)
// ---------------------------------------------------------------------

#[test]
#[ignore = "d=9 long suite: ~25 s build, 2.3 GB"]
fn d9_criterion_01_lookup_metrics() {
    let started = std::time::Instant::now();
    let report = verify_distance(9).unwrap();
    assert_eq!(report.columns, 307);
    assert_eq!(report.unique_columns, 218);
    assert_eq!(report.fault_combinations, 93_263_997);
    assert_eq!(report.cache_size, 67_166_572);
    assert!(report.distinguishable);
    assert!(
        started.elapsed().as_secs() < 600,
        "d=9 verification exceeded ten minutes"
    );
    println!(
        "criterion 1 (d=9 lookup metrics): PASS — 307/218/93263997/67166572 in {:.1?}",
        report.build_time
    );
}

#[test]
#[ignore = "d=9 long suite"]
fn d9_criterion_02_single_fault_sweeps() {
    let fx = fixture(9);
    let t = fx.code.t();
    let mut total = 0;
    for decoder in [
        config(DecoderKind::Shor, Strategy::Joint, false, t),
        config(DecoderKind::TwoTailed, Strategy::Zx, true, t),
    ] {
        let p = protocol(fx, decoder, 0.0, 0);
        match exhaustive_single_fault_check(&p) {
            Ok(cases) => total += cases,
            Err(inj) => panic!("d=9 {decoder:?}: logical error from {inj:?}"),
        }
    }
    println!("criterion 2 (d=9 single-fault sweeps): PASS — {total} cases clean");
}

#[test]
#[ignore = "d=9 long suite: reduced-shot reproduction of the pseudothreshold table, roughly an hour"]
fn d9_criterion_06_pseudothreshold_table() {
    let fx = fixture(9);
    let t = fx.code.t();
    // (label, decoder, reference crossing, grid, shots per point)
    let suites: Vec<(&str, DecoderConfig, f64, Vec<f64>, u64)> = vec![
        (
            "shor",
            config(DecoderKind::Shor, Strategy::Joint, false, t),
            1.34e-4,
            vec![7e-5, 1.05e-4, 1.6e-4, 2.4e-4, 3.6e-4],
            400_000,
        ),
        (
            "shor+mim",
            config(DecoderKind::Shor, Strategy::Joint, true, t),
            2.79e-4,
            vec![1.4e-4, 2.1e-4, 3.15e-4, 4.7e-4],
            150_000,
        ),
        (
            "one-tailed+mim",
            config(DecoderKind::OneTailed, Strategy::Joint, true, t),
            3.91e-4,
            vec![2e-4, 3e-4, 4.5e-4, 6.8e-4],
            150_000,
        ),
        (
            "two-tailed+mim",
            config(DecoderKind::TwoTailed, Strategy::Joint, true, t),
            6.30e-4,
            vec![3.1e-4, 4.7e-4, 7e-4, 1.05e-3],
            150_000,
        ),
        (
            "two-tailed-zx+mim",
            config(DecoderKind::TwoTailed, Strategy::Zx, true, t),
            1.43e-3,
            vec![6.7e-4, 1.0e-3, 1.45e-3, 2.0e-3],
            100_000,
        ),
    ];
    let mut estimates = Vec::new();
    for (label, decoder, reference, grid, shots) in &suites {
        let points: Vec<ResultPoint> = grid
            .iter()
            .map(|&p| monte_carlo(fx, *decoder, p, *shots, 91))
            .collect();
        let estimate = estimate_pseudothreshold(&points)
            .unwrap_or_else(|e| panic!("{label}: {e}"));
        let rel = (estimate.p_th - reference) / reference;
        println!(
            "  {label}: p_th = {:.3e} (reference {reference:.2e}, {:+.0}%)",
            estimate.p_th,
            rel * 100.0
        );
        assert!(
            rel.abs() <= 0.35,
            "{label}: {:.3e} deviates {:.0}% from {reference:.2e}",
            estimate.p_th,
            rel * 100.0
        );
        estimates.push(estimate.p_th);
    }
    // strict quality ordering: zx > two-tailed > one-tailed > shor+mim > shor
    for i in 0..estimates.len() - 1 {
        assert!(
            estimates[i] < estimates[i + 1],
            "ordering violated between {} and {}",
            suites[i].0,
            suites[i + 1].0
        );
    }
    println!("criterion 6 (d=9 pseudothreshold table): PASS — ordering and ±35% reproduction hold");
}
