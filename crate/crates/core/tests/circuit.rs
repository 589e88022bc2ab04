use colorcode::circuit::*;
use colorcode::lattice::{build_lattice, layout_qubit_count, ColorLattice};
use colorcode::pauli::{Basis, PauliMask};
use std::collections::BTreeSet;

fn hexagon(l: &ColorLattice) -> usize {
    l.faces.iter().position(|f| f.weight() == 6).unwrap()
}

/// Labels (1-based) of a mask's support of the given type.
fn labels_of(m: &PauliMask, basis: Basis, labels: &[usize]) -> BTreeSet<usize> {
    m.support(basis).iter().map(|q| labels.iter().position(|x| x == q).unwrap() + 1).collect()
}

fn set(v: &[usize]) -> BTreeSet<usize> {
    v.iter().copied().collect()
}

#[test]
fn weight_six_flag_table_rows() {
    let l = build_lattice(7).unwrap();
    let t = solve_timings(&l).unwrap();
    let f = hexagon(&l);
    for basis in Basis::BOTH {
        let c = build_stabilizer_circuit(&l, &t, f, basis).unwrap();
        let table = flag_error_table(&c, &l.faces[f].qubits);
        let rows: Vec<(u8, Vec<BTreeSet<usize>>)> = table
            .iter()
            .map(|(&p, v)| (p, v.iter().map(|m| labels_of(m, basis, &t[f].labels)).collect()))
            .collect();
        let expect: Vec<(u8, Vec<BTreeSet<usize>>)> = vec![
            (0b001, vec![set(&[]), set(&[1]), set(&[1, 2])]),
            (0b010, vec![set(&[]), set(&[4]), set(&[3, 4])]),
            (0b100, vec![set(&[]), set(&[6]), set(&[5, 6])]),
            (0b101, vec![set(&[3, 4])]),
            (0b110, vec![set(&[])]),
            (0b111, vec![set(&[])]),
        ];
        assert_eq!(rows, expect, "{basis}");
    }
}

#[test]
fn direct_corrections_follow_flag_patterns() {
    let l = build_lattice(7).unwrap();
    let t = solve_timings(&l).unwrap();
    let f = hexagon(&l);
    let c = build_stabilizer_circuit(&l, &t, f, Basis::Z).unwrap();
    let direct = direct_flag_table(&c, &l.faces[f].qubits);
    let get = |p: u8| labels_of(&direct[&p], Basis::Z, &t[f].labels);
    assert_eq!(get(0b001), set(&[1]));
    assert_eq!(get(0b010), set(&[4]));
    assert_eq!(get(0b100), set(&[6]));
    assert_eq!(get(0b101), set(&[3, 4]));
    assert_eq!(get(0b111), set(&[]));
}

#[test]
fn direct_correction_leaves_single_fault_residual_of_weight_one() {
    let l = build_lattice(7).unwrap();
    let t = solve_timings(&l).unwrap();
    for (f, face) in l.faces.iter().enumerate().filter(|(_, face)| face.weight() == 6) {
        for basis in Basis::BOTH {
            let c = build_stabilizer_circuit(&l, &t, f, basis).unwrap();
            let direct = direct_flag_table(&c, &face.qubits);
            for (loc, e) in single_fault_effects(&c) {
                let fix = direct.get(&e.flags).cloned().unwrap_or_else(|| PauliMask::identity(c.num_data));
                let r = e.residual.mul(&fix);
                assert!(reduced_weight(&r, &face.qubits) <= 1, "face {f} {basis} {loc:?}");
            }
        }
    }
}

#[test]
fn flag_properties_hold_on_every_face() {
    for d in [5, 7] {
        let l = build_lattice(d).unwrap();
        let t = solve_timings(&l).unwrap();
        for (f, face) in l.faces.iter().enumerate() {
            for basis in Basis::BOTH {
                let c = build_stabilizer_circuit(&l, &t, f, basis).unwrap();
                let flags = if face.weight() == 6 { 2 } else { 1 };
                assert!(verify_flag_property(&c, &face.qubits, flags).is_ok(), "d={d} face {f} {basis}");
                assert!(max_residual_weight(&c, &face.qubits, 1) <= 2);
            }
        }
    }
}

#[test]
fn two_faults_in_a_hexagon_leave_weight_at_most_three() {
    let l = build_lattice(7).unwrap();
    let t = solve_timings(&l).unwrap();
    let f = hexagon(&l);
    let q = &l.faces[f].qubits;
    for basis in Basis::BOTH {
        let c = build_stabilizer_circuit(&l, &t, f, basis).unwrap();
        let singles = single_fault_effects(&c);
        let mut worst = 0;
        for i in 0..singles.len() {
            for j in i + 1..singles.len() {
                if singles[i].0.gate != singles[j].0.gate {
                    let r = singles[i].1.residual.mul(&singles[j].1.residual).project(basis);
                    worst = worst.max(reduced_weight(&r, q));
                }
            }
        }
        assert_eq!(worst, 3, "{basis}");
    }
}

#[test]
fn flag_only_on_last_flag_leaves_no_data_error() {
    let l = build_lattice(5).unwrap();
    let t = solve_timings(&l).unwrap();
    let f = hexagon(&l);
    let c = build_stabilizer_circuit(&l, &t, f, Basis::Z).unwrap();
    for (_, e) in single_fault_effects(&c) {
        if e.flags == 0b111 {
            assert_eq!(reduced_weight(&e.residual, &l.faces[f].qubits), 0);
        }
    }
}

#[test]
fn x_circuit_mirrors_z_circuit() {
    let l = build_lattice(5).unwrap();
    let t = solve_timings(&l).unwrap();
    for f in 0..l.num_faces() {
        let z = build_stabilizer_circuit(&l, &t, f, Basis::Z).unwrap();
        let x = build_stabilizer_circuit(&l, &t, f, Basis::X).unwrap();
        let mirror = |g: &Gate| {
            let (kind, qubits) = match g.kind {
                GateKind::Cnot => (GateKind::Cnot, [g.qubits[1], g.qubits[0]]),
                GateKind::PrepZ => (GateKind::PrepX, g.qubits),
                GateKind::PrepX => (GateKind::PrepZ, g.qubits),
                GateKind::MeasZ => (GateKind::MeasX, g.qubits),
                GateKind::MeasX => (GateKind::MeasZ, g.qubits),
                GateKind::Idle => (GateKind::Idle, g.qubits),
            };
            format!("{} {kind:?} {qubits:?}", g.step)
        };
        let key = |g: &Gate| format!("{} {:?} {:?}", g.step, g.kind, g.qubits);
        let a: BTreeSet<String> = z.gates.iter().map(mirror).collect();
        let b: BTreeSet<String> = x.gates.iter().map(key).collect();
        assert_eq!(a, b, "face {f}");
    }
}

#[test]
fn schedule_sizes_and_disjointness() {
    for (d, total) in [(5, 49), (7, 100)] {
        assert_eq!(layout_qubit_count(d), total);
        let l = build_lattice(d).unwrap();
        let s = build_round_schedule(&l).unwrap();
        let aux: usize = l.faces.iter().map(|f| if f.weight() == 6 { 4 } else { 2 }).sum();
        assert_eq!(s.num_qubits(), l.num_qubits() + aux);
        assert_eq!(s.circuit.steps, 16);
        s.circuit.check_disjoint().unwrap();
        for (f, face) in l.faces.iter().enumerate() {
            let expect = if face.weight() == 6 { 3 } else { 1 };
            assert_eq!(s.aux[f].flags.len(), expect);
        }
    }
}
