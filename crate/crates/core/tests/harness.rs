use colorcode::graph::FlagScheme;
use colorcode::harness::*;
use colorcode::pauli::Basis;
use colorcode::sim::NoiseKind;
use proptest::prelude::*;

fn strip_time(rows: &[ResultRow]) -> Vec<ResultRow> {
    rows.iter().map(|r| ResultRow { wall_time_s: 0.0, ..r.clone() }).collect()
}

#[test]
fn wilson_matches_closed_forms() {
    let z2 = 1.959_963_984_540_054_f64.powi(2);
    let (lo, hi) = wilson(0, 10);
    assert!(lo.abs() < 1e-12);
    assert!((hi - z2 / (10.0 + z2)).abs() < 1e-12);
    let (lo, hi) = wilson(10, 10);
    assert!((lo - 10.0 / (10.0 + z2)).abs() < 1e-12);
    assert!((hi - 1.0).abs() < 1e-12);
    let (lo, hi) = wilson(5, 10);
    assert!((lo + hi - 1.0).abs() < 1e-12);
    assert!((lo - 0.236_593).abs() < 1e-5);
}

proptest! {
    #[test]
    fn wilson_contains_the_estimate(n in 1u64..100_000, frac in 0.0f64..=1.0) {
        let k = ((n as f64) * frac) as u64;
        let (lo, hi) = wilson(k, n);
        let phat = k as f64 / n as f64;
        prop_assert!(lo <= phat + 1e-12 && phat <= hi + 1e-12);
        prop_assert!(0.0 <= lo && hi <= 1.0);
    }

    #[test]
    fn csv_round_trips(k in 0u64..1000, extra in 0u64..1000, d in 1usize..20, pk in 1u32..500) {
        let n = k + extra + 1;
        let (lo, hi) = wilson(k, n);
        let row = ResultRow {
            d: 2 * d + 1, p: pk as f64 / 1000.0, basis: Basis::Z, trials: n, failures: k,
            hard_failures: k / 3, rate: k as f64 / n as f64, ci_low: lo, ci_high: hi, wall_time_s: 0.0,
        };
        let back = from_csv(&to_csv(std::slice::from_ref(&row))).unwrap();
        prop_assert_eq!(back.len(), 1);
        prop_assert_eq!(back[0].d, row.d);
        prop_assert_eq!(back[0].p, row.p);
        prop_assert_eq!(back[0].failures, row.failures);
        prop_assert!((back[0].rate - row.rate).abs() <= 1e-8 * row.rate.max(1e-300));
    }
}

#[test]
fn threshold_of_synthetic_curves_is_exact() {
    let pth = 0.1;
    let mut rows = Vec::new();
    for d in [5usize, 7, 9, 11] {
        for i in 0..11 {
            let p = 0.08 + 0.004 * i as f64;
            let rate = 0.3 * (p / pth).powf((d as f64 + 1.0) / 2.0);
            rows.push(ResultRow {
                d, p, basis: Basis::X, trials: 1_000_000, failures: (rate * 1e6) as u64, hard_failures: 0,
                rate, ci_low: rate, ci_high: rate, wall_time_s: 0.0,
            });
        }
    }
    let est = estimate_threshold(&rows, Basis::X).unwrap();
    assert_eq!(est.crossings.len(), 6);
    assert!((est.estimate - pth).abs() < 1e-9, "{est:?}");
    assert!(est.spread < 1e-9);
    assert_eq!(estimate_threshold(&rows, Basis::Z), Err(ThresholdError::TooFewPoints));
}

#[test]
fn curves_without_sign_change_have_no_crossing() {
    let mut rows = Vec::new();
    for d in [5usize, 7] {
        for p in [0.01, 0.02, 0.03] {
            let rate = p / d as f64;
            rows.push(ResultRow {
                d, p, basis: Basis::X, trials: 100, failures: 1, hard_failures: 0,
                rate, ci_low: 0.0, ci_high: 1.0, wall_time_s: 0.0,
            });
        }
    }
    assert_eq!(estimate_threshold(&rows, Basis::X), Err(ThresholdError::NoCrossing));
}

#[test]
fn results_do_not_depend_on_worker_count() {
    for noise in [NoiseKind::CodeCapacity, NoiseKind::CircuitLevel] {
        let base = ExperimentConfig {
            distances: vec![3, 5],
            rates: if noise == NoiseKind::CodeCapacity { vec![0.08, 0.12] } else { vec![0.004] },
            trials: 300,
            noise,
            seed: 42,
            ..Default::default()
        };
        let one = run_montecarlo(&ExperimentConfig { workers: 1, ..base.clone() }).unwrap();
        let three = run_montecarlo(&ExperimentConfig { workers: 3, ..base.clone() }).unwrap();
        assert_eq!(strip_time(&one.rows), strip_time(&three.rows));
        assert_eq!(one.graph_hashes, three.graph_hashes);
        assert!(one.rows.iter().any(|r| r.failures > 0));
        let other = run_montecarlo(&ExperimentConfig { workers: 1, seed: 43, ..base }).unwrap();
        assert_ne!(strip_time(&one.rows), strip_time(&other.rows));
    }
}

#[test]
fn noiseless_runs_never_fail() {
    for noise in [NoiseKind::CodeCapacity, NoiseKind::CircuitLevel] {
        let config = ExperimentConfig { distances: vec![3], rates: vec![0.0], trials: 50, noise, ..Default::default() };
        let c = run_montecarlo(&config).unwrap();
        assert!(c.rows.iter().all(|r| r.failures == 0 && r.hard_failures == 0));
    }
}

#[test]
fn config_json_round_trips_and_validates() {
    let c = ExperimentConfig {
        distances: vec![3, 7],
        rates: vec![0.001, 0.002],
        noise: NoiseKind::CircuitLevel,
        flag_scheme: FlagScheme::Direct,
        rounds: Some(4),
        ..Default::default()
    };
    let text = serde_json::to_string(&c).unwrap();
    let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, c);
    let partial: ExperimentConfig = serde_json::from_str(r#"{"distances":[5],"noise":"circuit"}"#).unwrap();
    assert_eq!(partial.noise, NoiseKind::CircuitLevel);
    assert_eq!(partial.rounds_for(5), 6);
    assert!(partial.validate().is_ok());
    for bad in [
        ExperimentConfig { distances: vec![4], ..Default::default() },
        ExperimentConfig { rates: vec![1.5], ..Default::default() },
        ExperimentConfig { trials: 0, ..Default::default() },
        ExperimentConfig { rounds: Some(0), ..Default::default() },
    ] {
        assert!(bad.validate().is_err());
    }
}

#[test]
fn campaign_files_carry_a_content_hash() {
    let dir = std::env::temp_dir().join(format!("colorcode-harness-{}", std::process::id()));
    let config = ExperimentConfig { distances: vec![3], rates: vec![0.1], trials: 100, ..Default::default() };
    let c = run_montecarlo(&config).unwrap();
    write_campaign(&dir, &config, &c).unwrap();
    let csv = std::fs::read_to_string(dir.join("results.csv")).unwrap();
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    use sha2::Digest;
    assert_eq!(manifest["csv_sha256"].as_str().unwrap(), hex::encode(sha2::Sha256::digest(csv.as_bytes())));
    assert_eq!(from_csv(&csv).unwrap().len(), 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn sampled_check_reports_its_sample_count() {
    let dual = colorcode::lattice::dual_lattice(5).unwrap();
    let r = sampled_distance_check(&dual, 2, 2000, 7, colorcode::decoder::Variant::Adapted);
    assert_eq!(r.checked, 2000);
    assert!(r.passed());
}
