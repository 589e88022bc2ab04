use colorcode::lattice::*;
use colorcode::pauli::{Basis, Pauli1, PauliMask};
use proptest::prelude::*;

#[test]
fn qubit_and_face_counts() {
    for (d, n) in [(3, 7), (5, 19), (7, 37), (9, 61), (13, 127)] {
        let l = build_lattice(d).unwrap();
        assert_eq!(l.num_qubits(), n);
        assert_eq!(l.num_qubits(), (3 * d * d + 1) / 4);
        assert_eq!(l.num_faces(), (n - 1) / 2);
        assert_eq!(l.logical_support.len() % 2, 1);
    }
}

#[test]
fn stabilizers_commute_and_logicals_anticommute() {
    let l = build_lattice(7).unwrap();
    for a in 0..l.num_faces() {
        for b in 0..l.num_faces() {
            assert!(l.stabilizer(a, Basis::X).commutes_with(&l.stabilizer(b, Basis::Z)));
        }
        assert!(l.logical(Basis::X).commutes_with(&l.stabilizer(a, Basis::Z)));
        assert!(l.logical(Basis::Z).commutes_with(&l.stabilizer(a, Basis::X)));
    }
    assert!(!l.logical(Basis::X).commutes_with(&l.logical(Basis::Z)));
}

#[test]
fn face_weights_and_colors() {
    let l = build_lattice(9).unwrap();
    let per_qubit = l.faces_of_qubit();
    for f in &l.faces {
        assert!(f.weight() == 4 || f.weight() == 6);
        assert_eq!(f.weight() == 4, f.boundary.is_some());
    }
    for faces in &per_qubit {
        assert!((1..=3).contains(&faces.len()));
        let mut colors: Vec<Color> = faces.iter().map(|&f| l.faces[f].color).collect();
        colors.sort();
        colors.dedup();
        assert_eq!(colors.len(), faces.len());
    }
}

#[test]
fn dual_triangles_have_one_corner_per_color() {
    let dual = dual_lattice(7).unwrap();
    for (q, tri) in dual.triangles.iter().enumerate() {
        for c in Color::ALL {
            assert_eq!(dual.color(tri[c.index()]), c, "qubit {q}");
        }
    }
    for (e, &(u, v)) in dual.edges.iter().enumerate() {
        assert_ne!(dual.color(u), dual.color(v));
        assert!((1..=2).contains(&dual.edge_triangles[e].len()));
    }
    for f in 0..dual.num_faces() {
        assert_eq!(dual.stars[f].len(), dual.lattice.faces[f].weight());
    }
    for c in Color::ALL {
        assert_eq!(dual.stars[dual.boundary_vertex(c)].len(), 7);
    }
}

#[test]
fn restricted_lattices_keep_two_colors() {
    let dual = dual_lattice(5).unwrap();
    for pair in ColorPair::ALL {
        let r = dual.restrict(pair);
        assert!(r.vertices.iter().all(|&v| pair.contains(dual.color(v))));
        for &e in &r.edges {
            let (u, v) = dual.edges[e];
            assert!(pair.contains(dual.color(u)) && pair.contains(dual.color(v)));
        }
    }
}

#[test]
fn single_qubit_syndrome_is_its_bulk_corners() {
    let dual = dual_lattice(7).unwrap();
    for q in 0..dual.num_qubits() {
        let mut corners: Vec<usize> = dual.triangles[q].iter().copied().filter(|&v| !dual.is_boundary(v)).collect();
        corners.sort_unstable();
        assert_eq!(dual.syndrome_of_support(&[q]), corners);
    }
}

fn arb_error(n: usize) -> impl Strategy<Value = Vec<u8>> {
    proptest::collection::vec(0u8..4, n)
}

fn mask(codes: &[u8]) -> PauliMask {
    let mut m = PauliMask::identity(codes.len());
    for (q, &c) in codes.iter().enumerate() {
        m.set(q, Pauli1 { x: c & 1 == 1, z: c & 2 == 2 });
    }
    m
}

proptest! {
    #[test]
    fn stabilizers_do_not_change_syndrome_or_class(codes in arb_error(37), face in 0usize..18, b in 0usize..2) {
        let dual = dual_lattice(7).unwrap();
        let e = mask(&codes);
        let s = dual.lattice.stabilizer(face, Basis::BOTH[b]);
        let e2 = e.mul(&s);
        for t in Basis::BOTH {
            prop_assert_eq!(dual.syndrome_of(&e, t), dual.syndrome_of(&e2, t));
        }
        if dual.syndrome_of(&e, Basis::X).is_empty() && dual.syndrome_of(&e, Basis::Z).is_empty() {
            prop_assert_eq!(dual.logical_class(&e), dual.logical_class(&e2));
        }
    }

    #[test]
    fn syndrome_is_linear(a in arb_error(19), b in arb_error(19)) {
        let dual = dual_lattice(5).unwrap();
        let (ma, mb) = (mask(&a), mask(&b));
        for t in Basis::BOTH {
            let sa = dual.syndrome_of(&ma, t);
            let sb = dual.syndrome_of(&mb, t);
            let mut x: Vec<usize> = sa.iter().filter(|v| !sb.contains(v)).chain(sb.iter().filter(|v| !sa.contains(v))).copied().collect();
            x.sort_unstable();
            prop_assert_eq!(dual.syndrome_of(&ma.mul(&mb), t), x);
        }
    }
}
