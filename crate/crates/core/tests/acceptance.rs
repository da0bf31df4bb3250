//! End-to-end acceptance criteria. Each test prints one `ACn PASS|FAIL` line
//! with the measured quantities before asserting.

use std::fs;
use std::path::Path;

use mixnum::experiment::{
    cmd_ber_sweep, cmd_export_matrix, cmd_papr, papr_samples, simulate_point_stats, Measured,
};
use mixnum::ini::{w_block_closed_form, w_block_oracle, w_matrix_oracle};
use mixnum::metrics::evm_db;
use mixnum::ofdm::{build_frame, demod_active, demod_high, demod_low, idft_with_cp};
use mixnum::{
    theoretical_ber, ChannelModel, EdgeTransceiver, ExperimentSpec, IniModel, MixedConfig,
    QamOrder, RngStream, Purpose, Session, Stream, SymbolGrid, residual_ini,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

fn report(id: &str, passed: bool, detail: &str) {
    println!("{id} {}: {detail}", if passed { "PASS" } else { "FAIL" });
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn configs() -> Vec<MixedConfig> {
    vec![
        MixedConfig::nr_reference(),
        MixedConfig::new(0, 1, 64, 6, 20, 10).unwrap(),
        MixedConfig::new(0, 2, 64, 8, 24, 6).unwrap(),
        MixedConfig::new(0, 2, 256, 16, 96, 24).unwrap(),
    ]
}

#[test]
fn ac1_closed_form_matches_oracle() {
    let mut worst = 0.0f64;
    for cfg in configs() {
        for q in 0..cfg.q_ratio() {
            for (v, i) in [(Stream::High(q), Stream::Low), (Stream::Low, Stream::High(q))] {
                let a = w_block_closed_form(v, i, &cfg).unwrap();
                let b = w_block_oracle(v, i, &cfg).unwrap();
                worst = worst.max(a.max_abs_diff(&b));
            }
        }
    }
    let ok = worst <= 1e-9;
    report("AC1", ok, &format!("max |closed form - oracle| = {worst:.3e} over 4 configs (limit 1e-9)"));
    assert!(ok);
}

/// 1-norm condition number of the reference coupling matrix.
const REFERENCE_CONDITION: f64 = 39.110528;

#[test]
fn ac2_block_structure() {
    let cfg = MixedConfig::nr_reference();
    let model = IniModel::assemble(&cfg).unwrap();
    let oracle = w_matrix_oracle(&cfg).unwrap();
    let mut worst = 0.0f64;
    for w in [model.matrix(), &oracle] {
        for v in Stream::all(&cfg) {
            for i in Stream::all(&cfg) {
                if v != i && (v.is_low() || i.is_low()) {
                    continue;
                }
                let block = w.view((v.offset(&cfg), i.offset(&cfg)), (v.width(&cfg), i.width(&cfg)));
                let target = if v == i {
                    DMatrix::identity(v.width(&cfg), i.width(&cfg))
                } else {
                    DMatrix::zeros(v.width(&cfg), i.width(&cfg))
                };
                worst = worst.max((block - target).iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
    }
    let shape = model.matrix().shape();
    let cond = model.condition();
    let ok = worst <= 1e-12 && shape == (192, 192) && (cond / REFERENCE_CONDITION - 1.0).abs() < 1e-6;
    report(
        "AC2",
        ok,
        &format!(
            "W is {}x{}, max structural deviation {worst:.3e} (limit 1e-12), condition {cond:.6} (pinned {REFERENCE_CONDITION})",
            shape.0, shape.1
        ),
    );
    assert!(ok);
}

#[test]
fn ac3_total_ini_removal() {
    let cfg = MixedConfig::nr_reference();
    let model = IniModel::assemble(&cfg).unwrap();
    let (mut pre, mut evm, mut plain) = (0.0f64, f64::NEG_INFINITY, 0.0f64);
    for order in [QamOrder::QAM64, QamOrder::QAM256] {
        for frame in 0..1000 {
            let mut rng = RngStream::new(2024, u64::from(order.order()), frame, Purpose::Bits);
            let (x, _) = SymbolGrid::random_qam(&cfg, order, &mut rng);
            let xs = x.stacked();
            let r = residual_ini(&x, &cfg, Some(&model)).unwrap();
            pre = pre.max(r.iter().map(|z| z.norm()).fold(0.0, f64::max));
            let rx: Vec<Complex64> = xs.iter().zip(&r).map(|(a, b)| a + b).collect();
            evm = evm.max(evm_db(&rx, &xs).unwrap());
            let measured = residual_ini(&x, &cfg, None).unwrap();
            let predicted: Vec<Complex64> =
                model.apply(&xs).unwrap().iter().zip(&xs).map(|(a, b)| a - b).collect();
            plain = plain.max(max_diff(&measured, &predicted));
        }
    }
    let ok = pre <= 1e-9 && evm <= -180.0 && plain <= 1e-10;
    report(
        "AC3",
        ok,
        &format!(
            "2000 frames: pre-equalized max error {pre:.3e} (1e-9), EVM {evm:.1} dB (-180), \
             plain residual vs (W-I)X {plain:.3e} (1e-10)"
        ),
    );
    assert!(ok);
}

/// 40 dB error-floor factors (plain BER / theory) for 256-QAM, [low, high].
const FLOOR_FACTOR_256: [f64; 2] = [176.7, 55.3];

#[test]
fn ac4_ber_reproduction() {
    let mut failures = Vec::new();
    let mut robust_worst = 0.0f64;
    let mut binom_worst = 0.0f64;
    let mut floors = Vec::new();
    for qam in [64u32, 256] {
        let spec = ExperimentSpec {
            qam_order: qam,
            min_bits: 1_000_000,
            max_bit_errors: 200,
            bit_budget: 10_000_000,
            seed: 7,
            ..ExperimentSpec::nr_reference()
        };
        let session = Session::new(spec, None).unwrap();
        let chain = EdgeTransceiver::new(session.config());
        for measured in [Measured::Low, Measured::High] {
            let label = measured.label(session.config());
            for (i, &db) in session.spec().ebn0_db.iter().enumerate() {
                let s = simulate_point_stats(&session, &chain, true, measured, i, db).unwrap();
                let theory = theoretical_ber(session.order(), db, ChannelModel::RayleighBlock);
                let sigma = s.point.binomial_sigma(theory);
                let z_binom = (s.point.ber() - theory) / sigma;
                let z_cluster = (s.point.ber() - theory) / s.cluster_sigma();
                binom_worst = binom_worst.max(z_binom.abs());
                robust_worst = robust_worst.max(z_cluster.abs());
                println!(
                    "  {qam:>3}-QAM {label} {db:>4.1} dB: ber {:.4e} theory {theory:.4e} bits {:>8} errors {:>6} \
                     z_binomial {z_binom:+7.2} z_cluster {z_cluster:+6.2}",
                    s.point.ber(),
                    s.point.bits,
                    s.point.errors
                );
                if z_binom.abs() > 3.0 {
                    failures.push(format!("{qam}-QAM {label} {db} dB"));
                }
            }
            let last = session.spec().ebn0_db.len() - 1;
            let db = session.spec().ebn0_db[last];
            let plain = simulate_point_stats(&session, &chain, false, measured, last, db).unwrap();
            let theory = theoretical_ber(session.order(), db, ChannelModel::RayleighBlock);
            let factor = plain.point.ber() / theory;
            println!("  {qam:>3}-QAM {label} no pre-equalization at {db} dB: ber {:.4e}, {factor:.1}x theory", plain.point.ber());
            if plain.point.ber() - 3.0 * plain.cluster_sigma() <= theory {
                failures.push(format!("{qam}-QAM {label}: no error floor"));
            }
            if qam == 256 {
                floors.push(factor);
            }
        }
    }
    for (measured, pinned) in floors.iter().zip(FLOOR_FACTOR_256) {
        if (measured / pinned - 1.0).abs() > 0.1 {
            failures.push(format!("floor factor {measured:.2} drifted from pinned {pinned:.2}"));
        }
    }
    let ok = failures.is_empty();
    report(
        "AC4",
        ok,
        &format!(
            "max |z| binomial {binom_worst:.2} (limit 3), max |z| cluster-robust {robust_worst:.2}; \
             256-QAM floor factors {floors:.1?}; failing: {failures:?}"
        ),
    );
    assert!(ok);
}

/// Paired PAPR difference at CCDF 1e-2 (pre-equalized minus plain), seed 1.
const PAPR_DELTA_DB: f64 = 0.238;

#[test]
fn ac5_papr_neutrality() {
    let session = Session::new(ExperimentSpec::nr_reference(), None).unwrap();
    let samples = papr_samples(&session, 10_000).unwrap();
    let (pre, plain) = samples.levels_at(1e-2).unwrap();
    let delta = pre - plain;
    let ok = delta.abs() <= 0.3 && (delta - PAPR_DELTA_DB).abs() <= 0.05;
    report(
        "AC5",
        ok,
        &format!("10^4 paired frames: PAPR at 1e-2 pre-equalized {pre:.3} dB, plain {plain:.3} dB, delta {delta:+.3} dB (limit 0.3, pinned {PAPR_DELTA_DB:+.3})"),
    );
    assert!(ok);
}

fn symbol() -> impl Strategy<Value = Complex64> {
    (-1.5f64..1.5, -1.5f64..1.5).prop_map(|(a, b)| Complex64::new(a, b))
}

fn grid(cfg: &MixedConfig) -> impl Strategy<Value = SymbolGrid> {
    let cfg = *cfg;
    prop::collection::vec(symbol(), cfg.stacked_len())
        .prop_map(move |v| SymbolGrid::from_stacked(&v, &cfg).unwrap())
}

/// Random valid frame structures: N, Q, prefix and edge widths.
fn any_config() -> impl Strategy<Value = MixedConfig> {
    (4u32..9, 1u32..3, 0usize..5, 0usize..100).prop_filter_map("invalid config", |(log_n, dmu, cp_units, edge)| {
        let n = 1usize << log_n;
        let q = 1usize << dmu;
        let m = n / q;
        if m < 4 {
            return None;
        }
        let n_cp = (cp_units * q).min(m - q);
        let k = 1 + edge % (m / 2);
        let p = (q * k).min(n / 2);
        MixedConfig::new(0, dmu, n, n_cp, p, k).ok()
    })
}

#[test]
fn ac6_chain_properties() {
    let cases = 1000;
    let cfg = MixedConfig::nr_reference();
    let model = IniModel::assemble(&cfg).unwrap();
    let mut results = Vec::new();
    let mut run = |name: &str, outcome: Result<(), String>| {
        let ok = outcome.is_ok();
        if let Err(e) = &outcome {
            println!("  property {name} failed: {e}");
        }
        results.push((name.to_string(), ok));
    };
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });

    let linear = (grid(&cfg), grid(&cfg), symbol(), symbol());
    let outcome = runner
        .run(&linear, |(x, y, a, b)| {
            let combo: Vec<Complex64> =
                x.stacked().iter().zip(y.stacked()).map(|(u, v)| a * u + b * v).collect();
            let combo = SymbolGrid::from_stacked(&combo, &cfg).unwrap();
            let lhs = demod_active(&build_frame(&combo, &cfg, None).unwrap(), &cfg).unwrap();
            let dx = demod_active(&build_frame(&x, &cfg, None).unwrap(), &cfg).unwrap();
            let dy = demod_active(&build_frame(&y, &cfg, None).unwrap(), &cfg).unwrap();
            let rhs: Vec<Complex64> = dx.iter().zip(&dy).map(|(u, v)| a * u + b * v).collect();
            prop_assert!(max_diff(&lhs, &rhs) <= 1e-9);
            Ok(())
        })
        .map_err(|e| e.to_string());
    run("linearity", outcome);

    let locality = (grid(&cfg), 0usize..2, prop::collection::vec(symbol(), 274));
    let outcome = runner.run(&locality, |(x, q, noise)| {
        let frame = build_frame(&x, &cfg, None).unwrap();
        let start = cfg.high_window_start(q);
        let mut outside = frame.clone();
        for (n, s) in outside.samples.iter_mut().enumerate() {
            if n < start || n >= start + cfg.m_fft() {
                *s += noise[n];
            }
        }
        prop_assert_eq!(demod_high(&frame, q, &cfg).unwrap(), demod_high(&outside, q, &cfg).unwrap());
        let mut outside = frame.clone();
        for (s, e) in outside.samples.iter_mut().zip(&noise).take(cfg.n_cp()) {
            *s += e;
        }
        prop_assert_eq!(demod_low(&frame, &cfg).unwrap(), demod_low(&outside, &cfg).unwrap());
        Ok(())
    });
    run("window locality", outcome.map_err(|e| e.to_string()));

    let outcome = runner.run(&grid(&cfg), |x| {
        let frame = build_frame(&x, &cfg, Some(&model)).unwrap();
        let rx = demod_active(&frame, &cfg).unwrap();
        prop_assert!(max_diff(&rx, &x.stacked()) <= 1e-9);
        Ok(())
    });
    run("round trip", outcome.map_err(|e| e.to_string()));

    let cp_case = (prop::sample::select(vec![16usize, 64, 128, 256]), 0usize..16)
        .prop_flat_map(|(size, cp)| (prop::collection::vec(symbol(), size), Just(cp)));
    let outcome = runner.run(&cp_case, |(bins, cp)| {
        let size = bins.len();
        let y = idft_with_cp(&bins, cp).unwrap();
        prop_assert_eq!(y.len(), size + cp);
        for i in 0..cp {
            prop_assert_eq!(y[i], y[i + size]);
        }
        Ok(())
    });
    run("CP replication", outcome.map_err(|e| e.to_string()));

    let outcome = runner.run(&any_config(), |c| {
        prop_assert_eq!(c.q_ratio() * (c.m_fft() + c.m_cp()), c.n_fft() + c.n_cp());
        let frame = build_frame(&SymbolGrid::zeros(&c), &c, None).unwrap();
        prop_assert_eq!(frame.len(), c.frame_len());
        Ok(())
    });
    run("frame length", outcome.map_err(|e| e.to_string()));

    let ok = results.iter().all(|(_, ok)| *ok);
    let names: Vec<String> = results
        .iter()
        .map(|(n, ok)| format!("{n}={}", if *ok { "ok" } else { "FAIL" }))
        .collect();
    report("AC6", ok, &format!("{cases} cases each: {}", names.join(", ")));
    assert!(ok);
}

fn run_all(dir: &Path, threads: usize) {
    let spec = ExperimentSpec {
        ebn0_db: vec![0.0, 20.0, 40.0],
        min_bits: 20_000,
        bit_budget: 50_000,
        papr_frames: 1000,
        seed: 99,
        ..ExperimentSpec::nr_reference()
    };
    let session = Session::new(spec, Some(threads)).unwrap();
    cmd_ber_sweep(&session, &[true, false], dir).unwrap();
    cmd_papr(&session, dir).unwrap();
    cmd_export_matrix(&session, dir).unwrap();
}

#[test]
fn ac7_determinism() {
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    run_all(dirs[0].path(), 1);
    run_all(dirs[1].path(), 1);
    run_all(dirs[2].path(), 4);
    let mut names: Vec<_> = fs::read_dir(dirs[0].path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    let mut mismatched = Vec::new();
    for name in &names {
        let a = fs::read(dirs[0].path().join(name)).unwrap();
        for d in &dirs[1..] {
            if fs::read(d.path().join(name)).unwrap() != a {
                mismatched.push(name.to_string_lossy().into_owned());
            }
        }
    }
    let ok = mismatched.is_empty() && names.len() >= 8;
    report(
        "AC7",
        ok,
        &format!("{} files compared across two single-thread runs and one 4-thread run; mismatched: {mismatched:?}", names.len()),
    );
    assert!(ok);
}
