use colorcode::circuit::build_round_schedule;
use colorcode::decoder::*;
use colorcode::graph::{enumerate_round_faults, FlagScheme};
use colorcode::harness::{exhaustive_distance_check, naive_witnesses, ExperimentConfig, Setup, SupportOracle};
use colorcode::lattice::*;
use colorcode::pauli::Basis;
use colorcode::sim::{run_history_with_faults, NoiseKind};
use proptest::prelude::*;

#[test]
fn component_colors() {
    use Color::*;
    assert_eq!(component_color(Red, Red), Green);
    assert_eq!(component_color(Red, Green), Blue);
    assert_eq!(component_color(Blue, Red), Green);
}

#[test]
fn lift_of_one_triangle_is_that_triangle() {
    let dual = dual_lattice(7).unwrap();
    for q in 0..dual.num_qubits() {
        let mut beta = vec![false; dual.edges.len()];
        let t = dual.triangles[q];
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            if let Some(e) = dual.edge_id(t[a], t[b]) {
                beta[e] = true;
            }
        }
        for &v in &t {
            if dual.is_boundary(v) {
                continue;
            }
            let tau = lift(&dual, v, &beta).unwrap();
            assert_eq!(tau, vec![q], "qubit {q} vertex {v}");
        }
    }
}

#[test]
fn lift_rejects_odd_local_boundary() {
    let dual = dual_lattice(5).unwrap();
    let v = (0..dual.num_faces()).find(|&f| dual.lattice.faces[f].weight() == 6).unwrap();
    let mut beta = vec![false; dual.edges.len()];
    beta[dual.incident[v][0]] = true;
    assert_eq!(lift(&dual, v, &beta), None);
}

#[test]
fn every_single_qubit_error_is_corrected() {
    for d in [3, 5, 7, 9] {
        let dual = dual_lattice(d).unwrap();
        let report = exhaustive_distance_check(&dual, 1, Variant::Adapted);
        assert!(report.passed(), "d={d}: {:?}", report.counterexamples.first());
        assert_eq!(report.checked, 3 * dual.num_qubits() as u64);
    }
}

#[test]
fn weight_two_errors_are_corrected_at_five_and_seven() {
    for d in [5, 7] {
        let dual = dual_lattice(d).unwrap();
        let report = exhaustive_distance_check(&dual, 2, Variant::Adapted);
        assert!(report.passed(), "d={d}: {:?}", report.counterexamples.first());
    }
}

#[test]
fn weight_three_failure_exists_at_seven() {
    let dual = dual_lattice(7).unwrap();
    let report = exhaustive_distance_check(&dual, 3, Variant::Adapted);
    assert!(report.failures > 0);
    let mut oracle = SupportOracle::new(&dual, Variant::Adapted);
    assert!(oracle.fails_pauli(&report.counterexamples[0]));
}

#[test]
fn naive_variant_fails_where_adapted_succeeds() {
    let dual = dual_lattice(7).unwrap();
    let w = naive_witnesses(&dual, 3, Basis::Z, 1);
    assert_eq!(w.len(), 1);
    let mut naive = SupportOracle::new(&dual, Variant::Naive);
    let mut adapted = SupportOracle::new(&dual, Variant::Adapted);
    assert!(naive.fails(Basis::Z, &w[0]));
    assert!(!adapted.fails(Basis::Z, &w[0]));
}

#[test]
fn trace_lists_components_touching_red_boundary() {
    let dual = dual_lattice(7).unwrap();
    let dec = RestrictionDecoder::two_dimensional(&dual, Basis::X);
    let w = dec.uniform_weights::<f64>();
    let q = dual.stars[dual.boundary_vertex(Color::Red)][2];
    let syn = dual.syndrome_of_support(&[q]);
    let (corr, trace) = dec.decode(&dual, &dec.highlighted_2d(&syn), &w, Variant::Adapted).unwrap();
    assert_eq!(corr, vec![q]);
    assert!(trace.components.iter().all(|c| c.ends.contains(&Color::Red)));
    assert!(serde_json::to_string(&trace).is_ok());
}

fn single_fault_failures(scheme: FlagScheme) -> Vec<(colorcode::circuit::FaultLocation, Basis)> {
    let config = ExperimentConfig { noise: NoiseKind::CircuitLevel, flag_scheme: scheme, ..Default::default() };
    let setup = Setup::new(5, &config).unwrap();
    let schedule = setup.schedule.as_ref().unwrap();
    let faults = enumerate_round_faults(schedule, setup.direct.as_ref());
    let mut failures = Vec::new();
    for round in 1..setup.rounds {
        for f in &faults {
            let mut loc = f.fault;
            loc.round = round;
            let (history, residual) = run_history_with_faults(schedule, setup.rounds, &[loc], &[], setup.direct.as_ref());
            let weights = setup.weights(1e-3, &history.flags);
            for stack in Basis::BOTH {
                let c = setup.decode_history(stack, &history, &weights[stack.index()]).expect("decodes");
                let t = stack.other();
                let r = residual.mul(&c);
                let r = r.part(t);
                if setup.dual.lattice.logical_support.iter().filter(|&&q| r[q]).count() % 2 == 1 {
                    failures.push((loc, stack));
                }
            }
        }
    }
    failures
}

#[test]
fn circuit_single_faults_never_cause_logical_errors() {
    for scheme in [FlagScheme::Renorm, FlagScheme::Direct] {
        let failures = single_fault_failures(scheme);
        assert!(failures.is_empty(), "{scheme:?}: {} failures, first {:?}", failures.len(), failures.first());
    }
}

#[test]
fn schedule_is_shared_with_setup() {
    let dual = dual_lattice(5).unwrap();
    let s = build_round_schedule(&dual.lattice).unwrap();
    let config = ExperimentConfig { noise: NoiseKind::CircuitLevel, ..Default::default() };
    let setup = Setup::new(5, &config).unwrap();
    assert_eq!(setup.schedule.unwrap().circuit.gates.len(), s.circuit.gates.len());
    assert_eq!(setup.rounds, 6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn corrections_reproduce_the_syndrome(support in proptest::collection::btree_set(0usize..37, 0..12), stack in 0usize..2) {
        let dual = dual_lattice(7).unwrap();
        let dec = RestrictionDecoder::two_dimensional(&dual, Basis::BOTH[stack]);
        let w = dec.uniform_weights::<f64>();
        let qubits: Vec<usize> = support.into_iter().collect();
        let syn = dual.syndrome_of_support(&qubits);
        for variant in [Variant::Adapted, Variant::Naive] {
            let c = decode_2d(&dual, &dec, &w, &syn, variant);
            prop_assert!(c.is_ok());
        }
    }

    #[test]
    fn decoding_is_deterministic(support in proptest::collection::btree_set(0usize..19, 0..8)) {
        let dual = dual_lattice(5).unwrap();
        let dec = RestrictionDecoder::two_dimensional(&dual, Basis::Z);
        let w = dec.uniform_weights::<f64>();
        let qubits: Vec<usize> = support.into_iter().collect();
        let syn = dual.syndrome_of_support(&qubits);
        let a = decode_2d(&dual, &dec, &w, &syn, Variant::Adapted).unwrap();
        let b = decode_2d(&dual, &dec, &w, &syn, Variant::Adapted).unwrap();
        prop_assert_eq!(a, b);
    }
}
