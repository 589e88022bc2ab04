//! Noise sampling and Pauli-frame execution of repeated syndrome extraction.

use crate::circuit::{
    pauli_code, DirectFlagTables, FaultLocation, Frame, GateKind, Payload, Readout, RoundSchedule,
    HALF_STEPS,
};
use crate::lattice::DualLattice;
use crate::pauli::{Basis, Pauli1, PauliMask};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NoiseKind {
    #[serde(rename = "capacity")]
    CodeCapacity,
    #[serde(rename = "circuit")]
    CircuitLevel,
}

impl std::str::FromStr for NoiseKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "capacity" => Ok(Self::CodeCapacity),
            "circuit" => Ok(Self::CircuitLevel),
            _ => Err(format!("unknown noise model {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p: f64,
    pub kind: NoiseKind,
}

impl NoiseModel {
    pub fn code_capacity(p: f64) -> Self {
        Self { p, kind: NoiseKind::CodeCapacity }
    }

    pub fn circuit_level(p: f64) -> Self {
        Self { p, kind: NoiseKind::CircuitLevel }
    }

    /// Fault probability of a location of the given gate kind.
    pub fn location_probability(&self, kind: GateKind) -> f64 {
        match kind {
            GateKind::Cnot | GateKind::Idle => self.p,
            _ => 2.0 * self.p / 3.0,
        }
    }
}

/// Independent X, Y or Z on each qubit with probability `p / 3` each.
pub fn sample_code_capacity<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> PauliMask {
    let mut m = PauliMask::identity(n);
    for q in 0..n {
        let u: f64 = rng.gen();
        if u < p {
            let k = ((u / p) * 3.0) as usize;
            m.set(q, Pauli1::NONTRIVIAL[k.min(2)]);
        }
    }
    m
}

/// Flag pattern raised by one stabilizer circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FlagEvent {
    pub face: usize,
    /// Stabilizer type of the flagged circuit.
    pub basis: Basis,
    pub pattern: u8,
}

/// Syndrome outcomes `sigma_t` for `t = 0..=T` and flag events per round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyndromeHistory {
    pub rounds: usize,
    /// `outcomes[basis][t][face]`; round 0 is the ideal reference.
    pub outcomes: [Vec<Vec<bool>>; 2],
    /// `flags[t]` for `t = 0..=T`; round 0 is always empty.
    pub flags: Vec<Vec<FlagEvent>>,
}

impl SyndromeHistory {
    pub fn new(rounds: usize, faces: usize) -> Self {
        Self {
            rounds,
            outcomes: [vec![vec![false; faces]; rounds + 1], vec![vec![false; faces]; rounds + 1]],
            flags: vec![Vec::new(); rounds + 1],
        }
    }

    /// Number of flagged circuits in round `t`.
    pub fn flagged_count(&self, t: usize) -> usize {
        self.flags[t].len()
    }
}

/// Options for a memory-experiment history.
#[derive(Clone, Copy, Debug)]
pub struct HistoryOptions<'a> {
    pub rounds: usize,
    /// Round `T` is run without faults.
    pub noiseless_last: bool,
    /// Apply direct-flag corrections at the end of each half round.
    pub direct: Option<&'a DirectFlagTables>,
}

impl<'a> HistoryOptions<'a> {
    pub fn memory(rounds: usize) -> Self {
        Self { rounds, noiseless_last: true, direct: None }
    }
}

/// Pre-sorted fault locations of one round for fast sampling.
struct LocationClasses {
    main: Vec<usize>,
    spam: Vec<usize>,
}

impl LocationClasses {
    fn new(schedule: &RoundSchedule) -> Self {
        let mut main = Vec::new();
        let mut spam = Vec::new();
        for (i, g) in schedule.circuit.gates.iter().enumerate() {
            match g.kind {
                GateKind::Cnot | GateKind::Idle => main.push(i),
                _ => spam.push(i),
            }
        }
        Self { main, spam }
    }
}

fn geometric_positions<R: Rng + ?Sized>(len: usize, q: f64, rng: &mut R, out: &mut Vec<usize>) {
    if q <= 0.0 || len == 0 {
        return;
    }
    if q >= 1.0 {
        out.extend(0..len);
        return;
    }
    let log1q = (1.0 - q).ln();
    let mut i: usize = 0;
    loop {
        let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
        let skip = (u.ln() / log1q).floor();
        if skip >= (len - i) as f64 {
            return;
        }
        i += skip as usize;
        out.push(i);
        i += 1;
        if i >= len {
            return;
        }
    }
}

/// Samples the faults of one round.
pub fn sample_round_faults<R: Rng + ?Sized>(
    schedule: &RoundSchedule,
    noise: &NoiseModel,
    round: usize,
    rng: &mut R,
) -> Vec<FaultLocation> {
    let classes = LocationClasses::new(schedule);
    sample_with(&classes, schedule, noise, round, rng)
}

fn sample_with<R: Rng + ?Sized>(
    classes: &LocationClasses,
    schedule: &RoundSchedule,
    noise: &NoiseModel,
    round: usize,
    rng: &mut R,
) -> Vec<FaultLocation> {
    let mut pos = Vec::new();
    let mut faults = Vec::new();
    geometric_positions(classes.main.len(), noise.p, rng, &mut pos);
    for &k in &pos {
        let gate = classes.main[k];
        let payload = match schedule.circuit.gates[gate].kind {
            GateKind::Cnot => {
                let c = rng.gen_range(1..16);
                Payload::Two(pauli_code(c & 3), pauli_code(c >> 2))
            }
            _ => Payload::One(Pauli1::NONTRIVIAL[rng.gen_range(0..3)]),
        };
        faults.push(FaultLocation { gate, payload, round });
    }
    pos.clear();
    geometric_positions(classes.spam.len(), 2.0 * noise.p / 3.0, rng, &mut pos);
    for &k in &pos {
        let gate = classes.spam[k];
        let payload = match schedule.circuit.gates[gate].kind {
            GateKind::PrepZ => Payload::One(Pauli1::X),
            GateKind::PrepX => Payload::One(Pauli1::Z),
            _ => Payload::Flip,
        };
        faults.push(FaultLocation { gate, payload, round });
    }
    faults.sort_by_key(|f| f.gate);
    faults
}

/// Runs one round on `frame` with the given faults (sorted by gate), writing outcomes
/// for round `t` into the history.
pub fn run_round(
    schedule: &RoundSchedule,
    frame: &mut Frame,
    faults: &[FaultLocation],
    t: usize,
    history: &mut SyndromeHistory,
    direct: Option<&DirectFlagTables>,
) {
    let circuit = &schedule.circuit;
    let mut next = 0;
    let mut record = 0;
    let mut flags: Vec<FlagEvent> = Vec::new();
    let mut half_done = false;
    for (i, g) in circuit.gates.iter().enumerate() {
        if !half_done && g.step >= HALF_STEPS {
            finish_half(frame, &flags, Basis::X, direct);
            half_done = true;
        }
        let mut flip = if g.kind == GateKind::Idle { false } else { frame.gate(g) };
        while next < faults.len() && faults[next].gate == i {
            match faults[next].payload {
                Payload::One(a) => frame.apply(g.qubits[0], a),
                Payload::Two(a, b) => {
                    frame.apply(g.qubits[0], a);
                    frame.apply(g.qubits[1], b);
                }
                Payload::Flip => flip ^= true,
            }
            next += 1;
        }
        if g.kind.is_measurement() {
            let m = &circuit.measurements[record];
            record += 1;
            match m.readout {
                Readout::Syndrome => history.outcomes[m.basis.index()][t][m.face] = flip,
                Readout::Flag(j) => {
                    if flip {
                        match flags.iter_mut().find(|e| e.face == m.face && e.basis == m.basis) {
                            Some(e) => e.pattern |= 1 << j,
                            None => flags.push(FlagEvent { face: m.face, basis: m.basis, pattern: 1 << j }),
                        }
                    }
                }
            }
        }
    }
    finish_half(frame, &flags, Basis::Z, direct);
    flags.sort_by_key(|e| (e.basis, e.face));
    history.flags[t] = flags;
}

fn finish_half(frame: &mut Frame, flags: &[FlagEvent], basis: Basis, direct: Option<&DirectFlagTables>) {
    let Some(tables) = direct else { return };
    for e in flags.iter().filter(|e| e.basis == basis) {
        for &q in tables.correction(e.face, basis, e.pattern) {
            frame.apply(q, Pauli1::of(basis));
        }
    }
}

/// Samples a full memory-experiment history and the final data error.
pub fn run_history<R: Rng + ?Sized>(
    schedule: &RoundSchedule,
    noise: &NoiseModel,
    options: &HistoryOptions,
    rng: &mut R,
) -> (SyndromeHistory, PauliMask) {
    let classes = LocationClasses::new(schedule);
    let mut history = SyndromeHistory::new(options.rounds, schedule.num_faces());
    let mut frame = Frame::new(schedule.num_qubits());
    for t in 1..=options.rounds {
        let noisy = !(options.noiseless_last && t == options.rounds);
        let faults = if noisy && noise.p > 0.0 {
            sample_with(&classes, schedule, noise, t, rng)
        } else {
            Vec::new()
        };
        run_round(schedule, &mut frame, &faults, t, &mut history, options.direct);
    }
    let residual = frame.data_mask(schedule.circuit.num_data);
    (history, residual)
}

/// Runs a history with an explicit fault set; `round` of each fault is 1-based.
/// `data_errors[t]` is applied to the data just before round `t`.
pub fn run_history_with_faults(
    schedule: &RoundSchedule,
    rounds: usize,
    faults: &[FaultLocation],
    data_errors: &[(usize, PauliMask)],
    direct: Option<&DirectFlagTables>,
) -> (SyndromeHistory, PauliMask) {
    let mut history = SyndromeHistory::new(rounds, schedule.num_faces());
    let mut frame = Frame::new(schedule.num_qubits());
    for t in 1..=rounds {
        for (r, e) in data_errors {
            if *r == t {
                for q in 0..e.len() {
                    frame.apply(q, e.get(q));
                }
            }
        }
        let mut round_faults: Vec<FaultLocation> =
            faults.iter().filter(|f| f.round == t).copied().collect();
        round_faults.sort_by_key(|f| f.gate);
        run_round(schedule, &mut frame, &round_faults, t, &mut history, direct);
    }
    let residual = frame.data_mask(schedule.circuit.num_data);
    (history, residual)
}

/// Perfect-measurement syndrome of a code-capacity error in the given error type.
pub fn perfect_syndrome(dual: &DualLattice, error: &PauliMask, error_type: Basis) -> Vec<usize> {
    dual.syndrome_of(error, error_type)
}
