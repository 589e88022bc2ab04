//! Flagged syndrome-extraction circuits, the full-round schedule, and exact Pauli
//! propagation of faults.
//!
//! A round is an X half (steps 0..8) followed by a Z half (steps 8..16). In each
//! half a step holds preparations, one layer of CNOTs, or measurements; CNOT layers
//! are steps 1..=6 of the half.
//!
//! Weight-6 faces use one syndrome ancilla and three flags `f1, f2, f3`; weight-4
//! faces use one ancilla and one flag. For a Z stabilizer the ancilla starts in
//! `|0>` and the flags in `|+>`; data parity is collected as `CNOT(data -> flag)`
//! and transferred with `CNOT(flag -> ancilla)`. The X circuit reverses every CNOT
//! and swaps the preparation and measurement bases.

use crate::lattice::{Color, ColorLattice, Face};
use crate::pauli::{Basis, Pauli1, PauliMask};
use num_rational::Ratio;
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

/// Steps in one half round.
pub const HALF_STEPS: usize = 8;
/// Steps in a full X + Z round.
pub const ROUND_STEPS: usize = 2 * HALF_STEPS;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("face {face} has unsupported weight {weight}")]
    UnsupportedWeight { face: usize, weight: usize },
    #[error("weight-4 face {0} has no boundary tag")]
    MissingBoundaryTag(usize),
    #[error("qubit {qubit} used twice at step {step}")]
    Conflict { qubit: usize, step: usize },
    #[error("no conflict-free schedule found for distance {0}")]
    NoSchedule(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum QubitRole {
    Data,
    Ancilla,
    Flag,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum GateKind {
    PrepZ,
    PrepX,
    Cnot,
    MeasZ,
    MeasX,
    Idle,
}

impl GateKind {
    pub fn arity(self) -> usize {
        if self == GateKind::Cnot {
            2
        } else {
            1
        }
    }

    pub fn is_measurement(self) -> bool {
        matches!(self, GateKind::MeasZ | GateKind::MeasX)
    }
}

/// A gate at one timestep. For CNOT, `qubits = [control, target]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: [usize; 2],
    pub step: usize,
}

impl Gate {
    fn one(kind: GateKind, q: usize, step: usize) -> Gate {
        Gate {
            kind,
            qubits: [q, usize::MAX],
            step,
        }
    }

    fn cnot(control: usize, target: usize, step: usize) -> Gate {
        Gate {
            kind: GateKind::Cnot,
            qubits: [control, target],
            step,
        }
    }

    pub fn operands(&self) -> &[usize] {
        &self.qubits[..self.kind.arity()]
    }
}

/// What a measurement outcome reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Readout {
    Syndrome,
    /// Flag index: 0 = f1, 1 = f2, 2 = f3.
    Flag(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MeasurementRecord {
    pub gate: usize,
    pub face: usize,
    pub basis: Basis,
    pub readout: Readout,
}

/// Timestep-ordered gate list with qubit roles and measurement bookkeeping.
#[derive(Clone, Debug, Serialize)]
pub struct Circuit {
    pub gates: Vec<Gate>,
    pub roles: Vec<QubitRole>,
    pub num_data: usize,
    pub steps: usize,
    pub measurements: Vec<MeasurementRecord>,
    /// Owning face and basis for single-stabilizer circuits.
    pub face: Option<usize>,
    pub basis: Option<Basis>,
}

impl Circuit {
    pub fn num_qubits(&self) -> usize {
        self.roles.len()
    }

    /// Every step uses each qubit at most once.
    pub fn check_disjoint(&self) -> Result<(), CircuitError> {
        let mut used = vec![usize::MAX; self.num_qubits()];
        for g in &self.gates {
            for &q in g.operands() {
                if used[q] == g.step {
                    return Err(CircuitError::Conflict { qubit: q, step: g.step });
                }
                used[q] = g.step;
            }
        }
        Ok(())
    }

    /// Per-timestep listing for audits.
    pub fn listing(&self) -> String {
        let mut out = String::new();
        let mut step = usize::MAX;
        for g in &self.gates {
            if g.kind == GateKind::Idle {
                continue;
            }
            if g.step != step {
                step = g.step;
                out.push_str(&format!("\nstep {step}:"));
            }
            match g.kind {
                GateKind::Cnot => out.push_str(&format!(" CNOT({},{})", g.qubits[0], g.qubits[1])),
                k => out.push_str(&format!(" {:?}({})", k, g.qubits[0])),
            }
        }
        out.push('\n');
        out
    }
}

/// Data-qubit timing of one face, shared by its X and Z circuits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FaceTiming {
    /// `(data qubit, partner, layer)`: partner `None` is the ancilla, `Some(j)` flag `j`.
    pub data: Vec<(usize, Option<usize>, usize)>,
    /// `(flag, layer)` of the flag-ancilla couplings.
    pub couplings: Vec<(usize, usize)>,
    pub num_flags: usize,
    /// Face qubits in label order 1..=w.
    pub labels: Vec<usize>,
    /// Offset `s` for weight-4 faces.
    pub offset: Option<usize>,
}

impl FaceTiming {
    /// Timing of a weight-6 face from the ordered time pairs of its three flags.
    /// `pairs[j] = (first, second)` are the data qubits touched by flag `j` at its two layers.
    fn hexagon(pairs: [(usize, usize); 3]) -> FaceTiming {
        // f1 at layers 2,3; f2 at 4,5; f3 at 3,4. Ancilla order f1 f3 f2 f1 f3 f2.
        let layers = [(2, 3), (4, 5), (3, 4)];
        let mut data = Vec::new();
        for j in 0..3 {
            data.push((pairs[j].0, Some(j), layers[j].0));
            data.push((pairs[j].1, Some(j), layers[j].1));
        }
        FaceTiming {
            data,
            couplings: vec![(0, 1), (2, 2), (1, 3), (0, 4), (2, 5), (1, 6)],
            num_flags: 3,
            labels: vec![
                pairs[0].1, pairs[0].0, pairs[1].0, pairs[1].1, pairs[2].0, pairs[2].1,
            ],
            offset: None,
        }
    }

    /// Timing of a weight-4 face: ancilla pair `(a, b)` and flag pair `(c, e)` at layers s+2, s+3.
    fn square(s: usize, anc: (usize, usize), flag: (usize, usize)) -> FaceTiming {
        FaceTiming {
            data: vec![
                (anc.0, None, s + 2),
                (anc.1, None, s + 3),
                (flag.0, Some(0), s + 2),
                (flag.1, Some(0), s + 3),
            ],
            couplings: vec![(0, s + 1), (0, s + 4)],
            num_flags: 1,
            labels: vec![anc.1, anc.0, flag.1, flag.0],
            offset: Some(s),
        }
    }
}

/// Ring positions `(k, k+1)` of the qubit pairs sharing an edge with the face's
/// neighbour of the next-but-one color. These are the pairs a hook error can hit.
pub fn face_pairs(face: &Face) -> Vec<(usize, usize)> {
    let r = face.coord.0;
    let ring = crate::lattice::RING;
    let mut start = None;
    for k in 0..6 {
        let dr = ring[k].0 + ring[(k + 1) % 6].0;
        if Color::from_index((r + dr).rem_euclid(3) as usize) == face.color.shift(2) {
            start = Some(k % 2);
            break;
        }
    }
    let s = start.expect("face has a neighbour of every other color");
    (0..3)
        .filter_map(|j| {
            let k = s + 2 * j;
            match (face.ring[k % 6], face.ring[(k + 1) % 6]) {
                (Some(a), Some(b)) => Some((a, b)),
                _ => None,
            }
        })
        .collect()
}

/// Per-color timing rule for weight-6 faces: `perm[j]` picks the flag for pair `j`
/// (0 = f1, 1 = f3, 2 = f2) and bit `j` of `swap` reverses the pair's order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct HexRule {
    pub perm: [usize; 3],
    pub swap: u8,
}

/// Bulk rule found by exhaustive search over all uniform rules; compatible with
/// a backtracked boundary schedule at every distance checked.
pub const PREFERRED_RULES: [HexRule; 3] = [
    HexRule { perm: [0, 1, 2], swap: 1 },
    HexRule { perm: [0, 2, 1], swap: 6 },
    HexRule { perm: [0, 1, 2], swap: 0 },
];

const ROLE_FLAG: [usize; 3] = [0, 2, 1];

fn hex_timing(face: &Face, rule: HexRule) -> FaceTiming {
    let pairs = face_pairs(face);
    let mut by_flag = [(0, 0); 3];
    for (j, &(a, b)) in pairs.iter().enumerate() {
        let flag = ROLE_FLAG[rule.perm[j]];
        by_flag[flag] = if rule.swap >> j & 1 == 1 { (b, a) } else { (a, b) };
    }
    FaceTiming::hexagon(by_flag)
}

fn square_options(face: &Face) -> Vec<FaceTiming> {
    let pairs = face_pairs(face);
    assert_eq!(pairs.len(), 2, "weight-4 face must have two hook pairs");
    let mut out = Vec::new();
    for s in 0..3 {
        for bits in 0..4u8 {
            let orient = |j: usize| {
                let (a, b) = pairs[j];
                if bits >> j & 1 == 1 {
                    (b, a)
                } else {
                    (a, b)
                }
            };
            out.push(FaceTiming::square(s, orient(0), orient(1)));
        }
    }
    out
}

fn all_rules() -> Vec<HexRule> {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = Vec::new();
    for perm in perms {
        for swap in 0..8 {
            out.push(HexRule { perm, swap });
        }
    }
    out
}

/// Assigns data-qubit layers to every face without conflicts.
pub fn solve_timings(lattice: &ColorLattice) -> Result<Vec<FaceTiming>, CircuitError> {
    if let Some(t) = try_rules(lattice, &PREFERRED_RULES) {
        return Ok(t);
    }
    let rules = all_rules();
    for &a in &rules {
        for &b in &rules {
            for &c in &rules {
                if let Some(t) = try_rules(lattice, &[a, b, c]) {
                    return Ok(t);
                }
            }
        }
    }
    Err(CircuitError::NoSchedule(lattice.distance))
}

fn try_rules(lattice: &ColorLattice, rules: &[HexRule; 3]) -> Option<Vec<FaceTiming>> {
    let n = lattice.num_qubits();
    let mut busy = vec![0u8; n];
    let mut timings: Vec<Option<FaceTiming>> = vec![None; lattice.num_faces()];
    for (f, face) in lattice.faces.iter().enumerate() {
        if face.weight() != 6 {
            continue;
        }
        let t = hex_timing(face, rules[face.color.index()]);
        for &(q, _, layer) in &t.data {
            if busy[q] >> layer & 1 == 1 {
                return None;
            }
            busy[q] |= 1 << layer;
        }
        timings[f] = Some(t);
    }
    let squares: Vec<usize> = (0..lattice.num_faces())
        .filter(|&f| lattice.faces[f].weight() == 4)
        .collect();
    let options: Vec<Vec<FaceTiming>> =
        squares.iter().map(|&f| square_options(&lattice.faces[f])).collect();
    let mut choice = vec![0usize; squares.len()];
    if !backtrack(0, &options, &mut busy, &mut choice) {
        return None;
    }
    for (i, &f) in squares.iter().enumerate() {
        timings[f] = Some(options[i][choice[i]].clone());
    }
    Some(timings.into_iter().map(|t| t.expect("every face timed")).collect())
}

fn backtrack(i: usize, options: &[Vec<FaceTiming>], busy: &mut [u8], choice: &mut [usize]) -> bool {
    if i == options.len() {
        return true;
    }
    for (k, t) in options[i].iter().enumerate() {
        if t.data.iter().all(|&(q, _, l)| busy[q] >> l & 1 == 0) {
            for &(q, _, l) in &t.data {
                busy[q] |= 1 << l;
            }
            choice[i] = k;
            if backtrack(i + 1, options, busy, choice) {
                return true;
            }
            for &(q, _, l) in &t.data {
                busy[q] &= !(1 << l);
            }
        }
    }
    false
}

/// Auxiliary qubits of one face: ancilla then flags.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuxQubits {
    pub ancilla: usize,
    pub flags: Vec<usize>,
}

/// Gates of one stabilizer circuit at half-round offset `base`.
fn emit_face(timing: &FaceTiming, aux: &AuxQubits, basis: Basis, base: usize, out: &mut Vec<Gate>) {
    let z = basis == Basis::Z;
    let ordered = |a: usize, b: usize, step: usize| {
        if z {
            Gate::cnot(a, b, step)
        } else {
            Gate::cnot(b, a, step)
        }
    };
    let (anc_prep, anc_meas, flag_prep, flag_meas) = if z {
        (GateKind::PrepZ, GateKind::MeasZ, GateKind::PrepX, GateKind::MeasX)
    } else {
        (GateKind::PrepX, GateKind::MeasX, GateKind::PrepZ, GateKind::MeasZ)
    };
    for &(q, partner, layer) in &timing.data {
        let t = match partner {
            None => aux.ancilla,
            Some(j) => aux.flags[j],
        };
        out.push(ordered(q, t, base + layer));
    }
    for &(j, layer) in &timing.couplings {
        out.push(ordered(aux.flags[j], aux.ancilla, base + layer));
    }
    let window = |qubit_layers: Vec<usize>| {
        let lo = *qubit_layers.iter().min().unwrap();
        let hi = *qubit_layers.iter().max().unwrap();
        (lo - 1, hi + 1)
    };
    let anc_layers: Vec<usize> = timing
        .couplings
        .iter()
        .map(|&(_, l)| l)
        .chain(timing.data.iter().filter(|d| d.1.is_none()).map(|d| d.2))
        .collect();
    let (p, m) = window(anc_layers);
    out.push(Gate::one(anc_prep, aux.ancilla, base + p));
    out.push(Gate::one(anc_meas, aux.ancilla, base + m));
    for (j, &fq) in aux.flags.iter().enumerate() {
        let layers: Vec<usize> = timing
            .couplings
            .iter()
            .filter(|c| c.0 == j)
            .map(|c| c.1)
            .chain(timing.data.iter().filter(|d| d.1 == Some(j)).map(|d| d.2))
            .collect();
        let (p, m) = window(layers);
        out.push(Gate::one(flag_prep, fq, base + p));
        out.push(Gate::one(flag_meas, fq, base + m));
    }
}

/// Orders gates by step, inserts idles, and records measurements.
fn finalize(
    mut gates: Vec<Gate>,
    roles: Vec<QubitRole>,
    num_data: usize,
    steps: usize,
    owner: impl Fn(usize) -> (usize, Readout),
    face: Option<usize>,
    basis: Option<Basis>,
    idle_data: &[usize],
) -> Circuit {
    let nq = roles.len();
    let mut used = vec![vec![false; nq]; steps];
    for g in &gates {
        for &q in g.operands() {
            used[g.step][q] = true;
        }
    }
    let mut windows: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nq];
    let mut open = vec![usize::MAX; nq];
    let mut sorted = gates.clone();
    sorted.sort_by_key(|g| g.step);
    for g in &sorted {
        match g.kind {
            GateKind::PrepX | GateKind::PrepZ => open[g.qubits[0]] = g.step,
            GateKind::MeasX | GateKind::MeasZ => {
                let q = g.qubits[0];
                windows[q].push((open[q], g.step));
            }
            _ => {}
        }
    }
    for (step, row) in used.iter().enumerate() {
        for q in 0..nq {
            if row[q] {
                continue;
            }
            let active = if q < num_data {
                idle_data.contains(&q)
            } else {
                windows[q].iter().any(|&(a, b)| a < step && step < b)
            };
            if active {
                gates.push(Gate::one(GateKind::Idle, q, step));
            }
        }
    }
    let rank = |k: GateKind| match k {
        GateKind::PrepZ | GateKind::PrepX => 0,
        GateKind::Cnot => 1,
        GateKind::MeasZ | GateKind::MeasX => 2,
        GateKind::Idle => 3,
    };
    gates.sort_by_key(|g| (g.step, rank(g.kind), g.qubits[0]));
    let mut measurements = Vec::new();
    for (i, g) in gates.iter().enumerate() {
        if g.kind.is_measurement() {
            let (face, readout) = owner(g.qubits[0]);
            let meas_basis = if g.kind == GateKind::MeasZ { Basis::Z } else { Basis::X };
            // The half is identified by the stabilizer type, which is the ancilla's
            // measurement basis and the opposite of a flag's.
            let half = match readout {
                Readout::Syndrome => meas_basis,
                Readout::Flag(_) => meas_basis.other(),
            };
            measurements.push(MeasurementRecord {
                gate: i,
                face,
                basis: half,
                readout,
            });
        }
    }
    Circuit {
        gates,
        roles,
        num_data,
        steps,
        measurements,
        face,
        basis,
    }
}

/// Standalone circuit measuring one face's stabilizer of type `basis`.
///
/// Qubits are the lattice data qubits followed by the face's ancilla and flags.
/// Data idles are placed on the face's own qubits whenever this circuit does not
/// touch them.
pub fn build_stabilizer_circuit(
    lattice: &ColorLattice,
    timings: &[FaceTiming],
    face: usize,
    basis: Basis,
) -> Result<Circuit, CircuitError> {
    let f = &lattice.faces[face];
    match f.weight() {
        6 => {}
        4 if f.boundary.is_none() => return Err(CircuitError::MissingBoundaryTag(face)),
        4 => {}
        w => return Err(CircuitError::UnsupportedWeight { face, weight: w }),
    }
    let n = lattice.num_qubits();
    let timing = &timings[face];
    let aux = AuxQubits {
        ancilla: n,
        flags: (0..timing.num_flags).map(|j| n + 1 + j).collect(),
    };
    let mut roles = vec![QubitRole::Data; n];
    roles.push(QubitRole::Ancilla);
    roles.extend(std::iter::repeat_n(QubitRole::Flag, timing.num_flags));
    let mut gates = Vec::new();
    emit_face(timing, &aux, basis, 0, &mut gates);
    let circuit = finalize(
        gates,
        roles,
        n,
        HALF_STEPS,
        |q| {
            if q == n {
                (face, Readout::Syndrome)
            } else {
                (face, Readout::Flag(q - n - 1))
            }
        },
        Some(face),
        Some(basis),
        &f.qubits,
    );
    circuit.check_disjoint()?;
    Ok(circuit)
}

/// Full X-then-Z round over all faces.
#[derive(Clone, Debug, Serialize)]
pub struct RoundSchedule {
    pub circuit: Circuit,
    pub timings: Vec<FaceTiming>,
    pub aux: Vec<AuxQubits>,
    /// Measurement record index of each face's syndrome outcome, per basis.
    pub syndrome_record: [Vec<usize>; 2],
    /// Measurement record indices of each face's flags, per basis.
    pub flag_records: [Vec<Vec<usize>>; 2],
}

impl RoundSchedule {
    pub fn num_faces(&self) -> usize {
        self.aux.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.circuit.num_qubits()
    }
}

/// Builds the full round schedule: X half at steps 0..8, Z half at 8..16.
pub fn build_round_schedule(lattice: &ColorLattice) -> Result<RoundSchedule, CircuitError> {
    let timings = solve_timings(lattice)?;
    let n = lattice.num_qubits();
    let mut roles = vec![QubitRole::Data; n];
    let mut aux = Vec::new();
    let mut owner_of = vec![(usize::MAX, Readout::Syndrome); n];
    for (f, t) in timings.iter().enumerate() {
        let ancilla = roles.len();
        roles.push(QubitRole::Ancilla);
        owner_of.push((f, Readout::Syndrome));
        let mut flags = Vec::new();
        for j in 0..t.num_flags {
            flags.push(roles.len());
            roles.push(QubitRole::Flag);
            owner_of.push((f, Readout::Flag(j)));
        }
        aux.push(AuxQubits { ancilla, flags });
    }
    let mut gates = Vec::new();
    for (half, basis) in [Basis::X, Basis::Z].into_iter().enumerate() {
        for (f, t) in timings.iter().enumerate() {
            emit_face(t, &aux[f], basis, half * HALF_STEPS, &mut gates);
        }
    }
    let all_data: Vec<usize> = (0..n).collect();
    let circuit = finalize(
        gates,
        roles,
        n,
        ROUND_STEPS,
        |q| owner_of[q],
        None,
        None,
        &all_data,
    );
    circuit.check_disjoint()?;
    let nf = lattice.num_faces();
    let mut syndrome_record = [vec![usize::MAX; nf], vec![usize::MAX; nf]];
    let mut flag_records: [Vec<Vec<usize>>; 2] = [
        timings.iter().map(|t| vec![usize::MAX; t.num_flags]).collect(),
        timings.iter().map(|t| vec![usize::MAX; t.num_flags]).collect(),
    ];
    for (i, m) in circuit.measurements.iter().enumerate() {
        match m.readout {
            Readout::Syndrome => syndrome_record[m.basis.index()][m.face] = i,
            Readout::Flag(j) => flag_records[m.basis.index()][m.face][j] = i,
        }
    }
    Ok(RoundSchedule {
        circuit,
        timings,
        aux,
        syndrome_record,
        flag_records,
    })
}

/// Pauli payload of a fault.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Payload {
    /// Pauli applied after a one-qubit location (idle or preparation).
    One(Pauli1),
    /// Paulis applied to control and target after a CNOT.
    Two(Pauli1, Pauli1),
    /// Measurement outcome flip.
    Flip,
}

/// A single fault: a gate, its payload, and the round it occurs in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FaultLocation {
    pub gate: usize,
    pub payload: Payload,
    pub round: usize,
}

/// Every single fault of the circuit with its probability as a multiple of `p`.
pub fn fault_locations(circuit: &Circuit) -> Vec<(FaultLocation, Ratio<i64>)> {
    let mut out = Vec::new();
    for (i, g) in circuit.gates.iter().enumerate() {
        let at = |payload| FaultLocation { gate: i, payload, round: 0 };
        match g.kind {
            GateKind::Cnot => {
                for a in 0..4 {
                    for b in 0..4 {
                        if a == 0 && b == 0 {
                            continue;
                        }
                        out.push((
                            at(Payload::Two(pauli_code(a), pauli_code(b))),
                            Ratio::new(1, 15),
                        ));
                    }
                }
            }
            GateKind::Idle => {
                for p in Pauli1::NONTRIVIAL {
                    out.push((at(Payload::One(p)), Ratio::new(1, 3)));
                }
            }
            GateKind::PrepZ => out.push((at(Payload::One(Pauli1::X)), Ratio::new(2, 3))),
            GateKind::PrepX => out.push((at(Payload::One(Pauli1::Z)), Ratio::new(2, 3))),
            GateKind::MeasZ | GateKind::MeasX => out.push((at(Payload::Flip), Ratio::new(2, 3))),
        }
    }
    out
}

/// Pauli from a two-bit code: bit 0 is X, bit 1 is Z.
pub fn pauli_code(k: usize) -> Pauli1 {
    Pauli1 {
        x: k & 1 == 1,
        z: k & 2 == 2,
    }
}

/// Result of propagating faults through a circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Propagation {
    /// Data-qubit error at the end of the circuit.
    pub residual: PauliMask,
    /// Flipped measurement outcomes, by record index.
    pub flips: Vec<bool>,
}

/// Pauli-frame state over all qubits of a circuit.
#[derive(Clone, Debug)]
pub struct Frame {
    pub x: Vec<bool>,
    pub z: Vec<bool>,
}

impl Frame {
    pub fn new(n: usize) -> Frame {
        Frame {
            x: vec![false; n],
            z: vec![false; n],
        }
    }

    pub fn apply(&mut self, q: usize, p: Pauli1) {
        self.x[q] ^= p.x;
        self.z[q] ^= p.z;
    }

    /// Ideal action of a gate; returns the outcome flip for measurements.
    pub fn gate(&mut self, g: &Gate) -> bool {
        let q = g.qubits[0];
        match g.kind {
            GateKind::Cnot => {
                let t = g.qubits[1];
                self.x[t] ^= self.x[q];
                self.z[q] ^= self.z[t];
                false
            }
            GateKind::PrepZ | GateKind::PrepX => {
                self.x[q] = false;
                self.z[q] = false;
                false
            }
            GateKind::MeasZ => self.x[q],
            GateKind::MeasX => self.z[q],
            GateKind::Idle => false,
        }
    }

    pub fn data_mask(&self, num_data: usize) -> PauliMask {
        let mut m = PauliMask::identity(num_data);
        for q in 0..num_data {
            m.set(q, Pauli1 { x: self.x[q], z: self.z[q] });
        }
        m
    }
}

/// Exact propagation of a fault set through one pass of the circuit, starting from
/// an error-free frame.
pub fn propagate(circuit: &Circuit, faults: &[FaultLocation]) -> Propagation {
    let mut frame = Frame::new(circuit.num_qubits());
    let mut by_gate: BTreeMap<usize, Vec<Payload>> = BTreeMap::new();
    for f in faults {
        by_gate.entry(f.gate).or_default().push(f.payload);
    }
    let mut flips = Vec::with_capacity(circuit.measurements.len());
    for (i, g) in circuit.gates.iter().enumerate() {
        let mut flip = frame.gate(g);
        if let Some(payloads) = by_gate.get(&i) {
            for p in payloads {
                match *p {
                    Payload::One(a) => frame.apply(g.qubits[0], a),
                    Payload::Two(a, b) => {
                        frame.apply(g.qubits[0], a);
                        frame.apply(g.qubits[1], b);
                    }
                    Payload::Flip => flip ^= true,
                }
            }
        }
        if g.kind.is_measurement() {
            flips.push(flip);
        }
    }
    Propagation {
        residual: frame.data_mask(circuit.num_data),
        flips,
    }
}

/// Effect of faults on a single-stabilizer circuit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FaultEffect {
    pub residual: PauliMask,
    pub syndrome_flip: bool,
    /// Bit `j` set when flag `j` fired (f1 = bit 0, f2 = bit 1, f3 = bit 2).
    pub flags: u8,
}

impl FaultEffect {
    fn xor(&self, other: &FaultEffect) -> FaultEffect {
        FaultEffect {
            residual: self.residual.mul(&other.residual),
            syndrome_flip: self.syndrome_flip ^ other.syndrome_flip,
            flags: self.flags ^ other.flags,
        }
    }
}

/// Propagates faults through a single-stabilizer circuit.
pub fn propagate_faults(circuit: &Circuit, faults: &[FaultLocation]) -> FaultEffect {
    let p = propagate(circuit, faults);
    let mut effect = FaultEffect {
        residual: p.residual,
        syndrome_flip: false,
        flags: 0,
    };
    for (m, &flip) in circuit.measurements.iter().zip(&p.flips) {
        if !flip {
            continue;
        }
        match m.readout {
            Readout::Syndrome => effect.syndrome_flip ^= true,
            Readout::Flag(j) => effect.flags ^= 1 << j,
        }
    }
    effect
}

/// Every single fault of a stabilizer circuit with its effect.
pub fn single_fault_effects(circuit: &Circuit) -> Vec<(FaultLocation, FaultEffect)> {
    fault_locations(circuit)
        .into_iter()
        .map(|(loc, _)| (loc, propagate_faults(circuit, &[loc])))
        .collect()
}

/// Weight of `e` minimised over the face's stabilizer group.
pub fn reduced_weight(e: &PauliMask, face_qubits: &[usize]) -> usize {
    let n = e.len();
    let sx = PauliMask::from_support(n, Basis::X, face_qubits);
    let sz = PauliMask::from_support(n, Basis::Z, face_qubits);
    let sy = sx.mul(&sz);
    [e.weight(), e.mul(&sx).weight(), e.mul(&sz).weight(), e.mul(&sy).weight()]
        .into_iter()
        .min()
        .unwrap()
}

/// Canonical representative of `e` modulo the face stabilizer of one type:
/// fewest qubits, then smallest support.
pub fn canonical(e: &PauliMask, face_qubits: &[usize], basis: Basis) -> PauliMask {
    let alt = e.mul(&PauliMask::from_support(e.len(), basis, face_qubits));
    let key = |m: &PauliMask| (m.weight(), m.full_support());
    if key(&alt) < key(e) {
        alt
    } else {
        e.clone()
    }
}

/// A fault set violating the flag property.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlagCounterexample {
    pub faults: Vec<FaultLocation>,
    pub residual: PauliMask,
    pub reduced_weight: usize,
}

/// Checks that any `v <= t` faults leaving a data error of reduced weight above `v`
/// raise at least one flag.
pub fn verify_flag_property(
    circuit: &Circuit,
    face_qubits: &[usize],
    t: usize,
) -> Result<(), FlagCounterexample> {
    assert!((1..=2).contains(&t), "flag property checked for t in 1..=2");
    let singles = single_fault_effects(circuit);
    for (loc, e) in &singles {
        let w = reduced_weight(&e.residual, face_qubits);
        if e.flags == 0 && w > 1 {
            return Err(FlagCounterexample {
                faults: vec![*loc],
                residual: e.residual.clone(),
                reduced_weight: w,
            });
        }
    }
    if t == 2 {
        for i in 0..singles.len() {
            for j in i + 1..singles.len() {
                if singles[i].0.gate == singles[j].0.gate {
                    continue;
                }
                let e = singles[i].1.xor(&singles[j].1);
                if e.flags != 0 {
                    continue;
                }
                let w = reduced_weight(&e.residual, face_qubits);
                if w > 2 {
                    return Err(FlagCounterexample {
                        faults: vec![singles[i].0, singles[j].0],
                        residual: e.residual,
                        reduced_weight: w,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Largest reduced residual weight over all fault sets of size `k` in 1..=2.
pub fn max_residual_weight(circuit: &Circuit, face_qubits: &[usize], k: usize) -> usize {
    let singles = single_fault_effects(circuit);
    let mut best = 0;
    for (_, e) in &singles {
        best = best.max(reduced_weight(&e.residual, face_qubits));
    }
    if k >= 2 {
        for i in 0..singles.len() {
            for j in i + 1..singles.len() {
                if singles[i].0.gate == singles[j].0.gate {
                    continue;
                }
                let r = singles[i].1.residual.mul(&singles[j].1.residual);
                best = best.max(reduced_weight(&r, face_qubits));
            }
        }
    }
    best
}

/// Flag pattern to the distinct data errors of the circuit's type that single
/// faults can leave, each in canonical form.
pub fn flag_error_table(circuit: &Circuit, face_qubits: &[usize]) -> BTreeMap<u8, Vec<PauliMask>> {
    let basis = circuit.basis.expect("stabilizer circuit has a basis");
    let mut table: BTreeMap<u8, Vec<PauliMask>> = BTreeMap::new();
    for (_, e) in single_fault_effects(circuit) {
        if e.flags == 0 {
            continue;
        }
        let r = canonical(&e.residual.project(basis), face_qubits, basis);
        let entry = table.entry(e.flags).or_default();
        if !entry.contains(&r) {
            entry.push(r);
        }
    }
    for v in table.values_mut() {
        v.sort_by_key(|m| (m.weight(), m.full_support()));
    }
    table
}

/// Immediate correction for each flag pattern: the candidate minimising the worst
/// remaining weight over the pattern's possible errors, preferring lighter ones.
pub fn direct_flag_table(circuit: &Circuit, face_qubits: &[usize]) -> BTreeMap<u8, PauliMask> {
    let basis = circuit.basis.expect("stabilizer circuit has a basis");
    let table = flag_error_table(circuit, face_qubits);
    let n = circuit.num_data;
    let mut out = BTreeMap::new();
    for (&pattern, cands) in &table {
        let mut options = vec![PauliMask::identity(n)];
        options.extend(cands.iter().cloned());
        let score = |c: &PauliMask| {
            let worst = cands
                .iter()
                .map(|k| reduced_weight(&k.mul(c), face_qubits))
                .max()
                .unwrap_or(0);
            (worst, c.weight(), c.full_support())
        };
        let best = options.into_iter().min_by_key(|c| score(c)).unwrap();
        out.insert(pattern, best.project(basis));
    }
    out
}

/// Direct-flag corrections for every face and stabilizer type.
#[derive(Clone, Debug)]
pub struct DirectFlagTables {
    /// `tables[basis][face]` maps a flag pattern to the qubits to correct.
    pub tables: [Vec<BTreeMap<u8, Vec<usize>>>; 2],
}

impl DirectFlagTables {
    pub fn build(lattice: &ColorLattice, timings: &[FaceTiming]) -> Result<Self, CircuitError> {
        let mut tables = [Vec::new(), Vec::new()];
        for basis in Basis::BOTH {
            for f in 0..lattice.num_faces() {
                let c = build_stabilizer_circuit(lattice, timings, f, basis)?;
                let t = direct_flag_table(&c, &lattice.faces[f].qubits);
                tables[basis.index()].push(
                    t.into_iter()
                        .map(|(p, m)| (p, m.support(basis)))
                        .filter(|(_, s)| !s.is_empty())
                        .collect(),
                );
            }
        }
        Ok(Self { tables })
    }

    /// Qubits to correct, with Pauli type `basis`, for a flag pattern.
    pub fn correction(&self, face: usize, basis: Basis, pattern: u8) -> &[usize] {
        self.tables[basis.index()][face]
            .get(&pattern)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_lattice;

    #[test]
    fn schedules_exist_for_small_distances() {
        for d in [3, 5, 7, 9] {
            let l = build_lattice(d).unwrap();
            let s = build_round_schedule(&l).unwrap();
            assert!(s.circuit.gates.iter().all(|g| g.step < ROUND_STEPS));
        }
    }

    #[test]
    fn empty_fault_set_is_identity() {
        let l = build_lattice(5).unwrap();
        let t = solve_timings(&l).unwrap();
        let c = build_stabilizer_circuit(&l, &t, 0, Basis::Z).unwrap();
        let e = propagate_faults(&c, &[]);
        assert!(e.residual.is_identity());
        assert!(!e.syndrome_flip);
        assert_eq!(e.flags, 0);
    }
}
