//! Monte Carlo experiments, exhaustive distance checks, threshold estimation and
//! result persistence.

use crate::circuit::{build_round_schedule, CircuitError, DirectFlagTables, RoundSchedule};
use crate::decoder::{decode_2d, decode_2d_traced, DecodeError, DecodeTrace, RestrictionDecoder, Variant};
use crate::graph::{enumerate_round_faults, FlagScheme, GraphSet, WeightParams};
use crate::lattice::{dual_lattice, DualLattice, LatticeError};
use crate::pauli::{Basis, Pauli1, PauliMask};
use crate::sim::{run_history, sample_code_capacity, HistoryOptions, NoiseKind, NoiseModel, SyndromeHistory};
use crate::Real;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Parameters of a Monte Carlo campaign.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub distances: Vec<usize>,
    pub rates: Vec<f64>,
    pub trials: u64,
    pub noise: NoiseKind,
    pub decoder: Variant,
    pub flag_scheme: FlagScheme,
    pub alpha: f64,
    /// Rounds per history; `None` means `d + 1`.
    pub rounds: Option<usize>,
    /// The last round is run without faults.
    pub noiseless_last: bool,
    pub seed: u64,
    /// Worker threads; 0 uses all available cores.
    pub workers: usize,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            distances: vec![5, 7, 9],
            rates: vec![0.1],
            trials: 10_000,
            noise: NoiseKind::CodeCapacity,
            decoder: Variant::Adapted,
            flag_scheme: FlagScheme::Renorm,
            alpha: 1.0,
            rounds: None,
            noiseless_last: true,
            seed: 1,
            workers: 0,
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.distances.is_empty() || self.rates.is_empty() {
            return bad("distances and rates must be nonempty");
        }
        if self.rates.iter().any(|&p| !(0.0..1.0).contains(&p)) {
            return bad("rates must lie in [0, 1)");
        }
        if self.distances.iter().any(|&d| d < 3 || d % 2 == 0) {
            return bad("distances must be odd and at least 3");
        }
        if self.rounds == Some(0) {
            return bad("rounds must be at least 1");
        }
        Ok(())
    }

    pub fn rounds_for(&self, d: usize) -> usize {
        self.rounds.unwrap_or(d + 1)
    }
}

/// Aggregated result of one `(d, p, basis)` point. `basis` is the logical error type.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub d: usize,
    pub p: f64,
    pub basis: Basis,
    pub trials: u64,
    /// Logical failures, including hard failures.
    pub failures: u64,
    /// Trials where decoding errored or the correction had the wrong syndrome.
    pub hard_failures: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub wall_time_s: f64,
}

/// Wilson score interval at 95% confidence.
pub fn wilson(failures: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let phat = failures as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (phat + z * z / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Outcome of one trial, indexed by logical error type.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrialOutcome {
    pub failed: [bool; 2],
    pub hard: [bool; 2],
}

/// Odd overlap of `qubits` xor `base` with the logical support.
fn flips_logical(dual: &DualLattice, base: &PauliMask, error_type: Basis, correction: &PauliMask) -> bool {
    let e = base.part(error_type);
    let c = correction.part(error_type);
    dual.lattice.logical_support.iter().filter(|&&q| e[q] ^ c[q]).count() % 2 == 1
}

/// Per-distance decoding setup shared by all trials.
pub struct Setup {
    pub distance: usize,
    pub dual: DualLattice,
    pub noise: NoiseKind,
    pub variant: Variant,
    pub scheme: FlagScheme,
    pub alpha: f64,
    pub rounds: usize,
    pub noiseless_last: bool,
    pub schedule: Option<RoundSchedule>,
    pub direct: Option<DirectFlagTables>,
    /// Decoders indexed by stack.
    pub decoders: [RestrictionDecoder; 2],
}

impl Setup {
    pub fn new(d: usize, config: &ExperimentConfig) -> Result<Self, HarnessError> {
        let dual = dual_lattice(d)?;
        let (schedule, direct, decoders) = match config.noise {
            NoiseKind::CodeCapacity => {
                let decoders = Basis::BOTH.map(|s| RestrictionDecoder::two_dimensional(&dual, s));
                (None, None, decoders)
            }
            NoiseKind::CircuitLevel => {
                let schedule = build_round_schedule(&dual.lattice)?;
                let direct = match config.flag_scheme {
                    FlagScheme::Direct => Some(DirectFlagTables::build(&dual.lattice, &schedule.timings)?),
                    _ => None,
                };
                let faults = enumerate_round_faults(&schedule, direct.as_ref());
                let set = GraphSet::from_faults(&dual, &faults, config.flag_scheme);
                let rounds = config.rounds_for(d);
                let decoders =
                    Basis::BOTH.map(|s| RestrictionDecoder::new(&dual, set.graphs[s.index()].clone(), rounds));
                (Some(schedule), direct, decoders)
            }
        };
        Ok(Self {
            distance: d,
            dual,
            noise: config.noise,
            variant: config.decoder,
            scheme: config.flag_scheme,
            alpha: config.alpha,
            rounds: config.rounds_for(d),
            noiseless_last: config.noiseless_last,
            schedule,
            direct,
            decoders,
        })
    }

    fn params(&self, p: f64) -> WeightParams {
        WeightParams { p, alpha: self.alpha, scheme: self.scheme, noiseless_last: self.noiseless_last }
    }

    /// Weights of every decoder for a given rate and flag record.
    pub fn weights(&self, p: f64, flags: &[Vec<crate::sim::FlagEvent>]) -> [[Vec<Real>; 3]; 2] {
        match self.noise {
            NoiseKind::CodeCapacity => Basis::BOTH.map(|s| self.decoders[s.index()].uniform_weights()),
            NoiseKind::CircuitLevel => {
                let params = self.params(p);
                Basis::BOTH.map(|s| {
                    let dec = &self.decoders[s.index()];
                    [0, 1, 2].map(|i| dec.spacetime[i].weights(&dec.graphs[i], &params, flags))
                })
            }
        }
    }

    /// Content hash of the decoding graphs and their edge polynomials.
    pub fn graph_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("d={} noise={:?} scheme={:?} rounds={}", self.distance, self.noise, self.scheme, self.rounds));
        for dec in &self.decoders {
            for g in &dec.graphs {
                h.update(serde_json::to_vec(&g.polynomials()).expect("serializable"));
            }
        }
        hex::encode(h.finalize())
    }

    /// Decodes one stack of a circuit-level history.
    pub fn decode_history(
        &self,
        stack: Basis,
        history: &SyndromeHistory,
        weights: &[Vec<Real>; 3],
    ) -> Result<PauliMask, DecodeError> {
        self.decode_history_traced(stack, history, weights).map(|(c, _)| c)
    }

    /// [`Setup::decode_history`] together with the decoder trace.
    pub fn decode_history_traced(
        &self,
        stack: Basis,
        history: &SyndromeHistory,
        weights: &[Vec<Real>; 3],
    ) -> Result<(PauliMask, DecodeTrace), DecodeError> {
        let dec = &self.decoders[stack.index()];
        let highlighted = [0, 1, 2].map(|i| dec.spacetime[i].highlighted(&dec.graphs[i], history));
        let (qubits, trace) = dec.decode(&self.dual, &highlighted, weights, self.variant)?;
        let last = &history.outcomes[stack.index()][history.rounds];
        let expected: Vec<usize> = (0..last.len()).filter(|&f| last[f]).collect();
        if self.dual.syndrome_of_support(&qubits) != expected {
            return Err(DecodeError::Syndrome);
        }
        Ok((PauliMask::from_support(self.dual.num_qubits(), stack.other(), &qubits), trace))
    }

    /// Runs one trial with the given base weights (used when no flag fires).
    pub fn trial<R: Rng + ?Sized>(&self, p: f64, base: &[[Vec<Real>; 3]; 2], rng: &mut R) -> TrialOutcome {
        self.run_trial(p, base, rng, None)
    }

    /// Runs one trial and records what each stack's decoder did.
    pub fn traced_trial<R: Rng + ?Sized>(&self, p: f64, base: &[[Vec<Real>; 3]; 2], rng: &mut R) -> TrialTrace {
        let mut stacks = Vec::new();
        let outcome = self.run_trial(p, base, rng, Some(&mut stacks));
        TrialTrace { failed: outcome.failed, hard: outcome.hard, stacks }
    }

    fn run_trial<R: Rng + ?Sized>(
        &self,
        p: f64,
        base: &[[Vec<Real>; 3]; 2],
        rng: &mut R,
        mut traces: Option<&mut Vec<StackTrace>>,
    ) -> TrialOutcome {
        let mut out = TrialOutcome::default();
        let mut record = |stack: Basis, error: &PauliMask, result: Result<(PauliMask, DecodeTrace), DecodeError>| {
            let t = stack.other();
            let (correction, trace, error_msg) = match result {
                Ok((c, trace)) => {
                    out.failed[t.index()] = flips_logical(&self.dual, error, t, &c);
                    (c.support(t), Some(trace), None)
                }
                Err(e) => {
                    out.failed[t.index()] = true;
                    out.hard[t.index()] = true;
                    (Vec::new(), None, Some(e.to_string()))
                }
            };
            if let Some(traces) = traces.as_deref_mut() {
                traces.push(StackTrace { stack, error: error.support(t), correction, trace, error_msg });
            }
        };
        match self.noise {
            NoiseKind::CodeCapacity => {
                let error = sample_code_capacity(self.dual.num_qubits(), p, rng);
                for stack in Basis::BOTH {
                    let syn = self.dual.syndrome_of(&error, stack.other());
                    let dec = &self.decoders[stack.index()];
                    record(stack, &error, decode_2d_traced(&self.dual, dec, &base[stack.index()], &syn, self.variant));
                }
            }
            NoiseKind::CircuitLevel => {
                let schedule = self.schedule.as_ref().expect("circuit setup");
                let options = HistoryOptions {
                    rounds: self.rounds,
                    noiseless_last: self.noiseless_last,
                    direct: self.direct.as_ref(),
                };
                let (history, residual) = run_history(schedule, &NoiseModel::circuit_level(p), &options, rng);
                let flagged = self.scheme == FlagScheme::Renorm && history.flags.iter().any(|f| !f.is_empty());
                let own;
                let weights = if flagged {
                    own = self.weights(p, &history.flags);
                    &own
                } else {
                    base
                };
                for stack in Basis::BOTH {
                    record(stack, &residual, self.decode_history_traced(stack, &history, &weights[stack.index()]));
                }
            }
        }
        out
    }
}

/// Decoder record of one stack in a traced trial. Supports are of the type the stack
/// corrects.
#[derive(Clone, Debug, Serialize)]
pub struct StackTrace {
    pub stack: Basis,
    pub error: Vec<usize>,
    pub correction: Vec<usize>,
    pub trace: Option<DecodeTrace>,
    pub error_msg: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialTrace {
    pub failed: [bool; 2],
    pub hard: [bool; 2],
    pub stacks: Vec<StackTrace>,
}

/// Traces of the first `count` trials at `(d, p)`, using the same generators as
/// [`run_point`].
pub fn trace_point(setup: &Setup, p: f64, count: u64, seed: u64) -> Vec<TrialTrace> {
    let base = setup.weights(p, &[]);
    (0..count)
        .map(|trial| setup.traced_trial(p, &base, &mut trial_rng(seed, setup.distance, p, trial)))
        .collect()
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Generator of trial `trial` at point `(d, p)`, independent of scheduling.
pub fn trial_rng(seed: u64, d: usize, p: f64, trial: u64) -> ChaCha8Rng {
    let key = splitmix(splitmix(seed ^ splitmix(d as u64)) ^ p.to_bits());
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(trial);
    rng
}

/// Runs `trials` trials at rate `p` and returns `(failures, hard failures)` per type.
pub fn run_point(setup: &Setup, p: f64, trials: u64, seed: u64) -> ([u64; 2], [u64; 2]) {
    let base = setup.weights(p, &[]);
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, setup.distance, p, trial);
            setup.trial(p, &base, &mut rng)
        })
        .fold(
            || ([0u64; 2], [0u64; 2]),
            |(mut f, mut h), o| {
                for i in 0..2 {
                    f[i] += o.failed[i] as u64;
                    h[i] += o.hard[i] as u64;
                }
                (f, h)
            },
        )
        .reduce(|| ([0; 2], [0; 2]), |a, b| ([a.0[0] + b.0[0], a.0[1] + b.0[1]], [a.1[0] + b.1[0], a.1[1] + b.1[1]]))
}

fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool");
    pool.install(f)
}

/// Result table together with the graph hash of each distance.
#[derive(Clone, Debug, Serialize)]
pub struct Campaign {
    pub rows: Vec<ResultRow>,
    pub graph_hashes: Vec<(usize, String)>,
}

/// Runs every `(d, p)` point of the configuration.
pub fn run_montecarlo(config: &ExperimentConfig) -> Result<Campaign, HarnessError> {
    config.validate()?;
    with_pool(config.workers, || {
        let mut rows = Vec::new();
        let mut graph_hashes = Vec::new();
        for &d in &config.distances {
            let setup = Setup::new(d, config)?;
            graph_hashes.push((d, setup.graph_hash()));
            for &p in &config.rates {
                let start = Instant::now();
                let (fails, hard) = run_point(&setup, p, config.trials, config.seed);
                let wall = start.elapsed().as_secs_f64();
                for basis in Basis::BOTH {
                    let k = fails[basis.index()];
                    let (lo, hi) = wilson(k, config.trials);
                    rows.push(ResultRow {
                        d,
                        p,
                        basis,
                        trials: config.trials,
                        failures: k,
                        hard_failures: hard[basis.index()],
                        rate: k as f64 / config.trials as f64,
                        ci_low: lo,
                        ci_high: hi,
                        wall_time_s: wall,
                    });
                }
            }
        }
        Ok(Campaign { rows, graph_hashes })
    })
}

/// Fixed CSV header of result tables.
pub const CSV_HEADER: &str = "d,p,basis,trials,failures,hard_failures,rate,ci_low,ci_high";

/// Deterministic CSV rendering (wall time is kept in the manifest only).
pub fn to_csv(rows: &[ResultRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{:.9e},{:.9e},{:.9e}\n",
            r.d, r.p, r.basis, r.trials, r.failures, r.hard_failures, r.rate, r.ci_low, r.ci_high
        ));
    }
    s
}

/// Parses a table written by [`to_csv`].
pub fn from_csv(text: &str) -> Result<Vec<ResultRow>, HarnessError> {
    let bad = |line: &str| HarnessError::Config(format!("malformed result line {line:?}"));
    let mut rows = Vec::new();
    for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(bad(line));
        }
        let num = |i: usize| f[i].parse::<f64>().map_err(|_| bad(line));
        let int = |i: usize| f[i].parse::<u64>().map_err(|_| bad(line));
        rows.push(ResultRow {
            d: int(0)? as usize,
            p: num(1)?,
            basis: match f[2] {
                "X" => Basis::X,
                "Z" => Basis::Z,
                _ => return Err(bad(line)),
            },
            trials: int(3)?,
            failures: int(4)?,
            hard_failures: int(5)?,
            rate: num(6)?,
            ci_low: num(7)?,
            ci_high: num(8)?,
            wall_time_s: 0.0,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest<'a> {
    pub config: &'a ExperimentConfig,
    pub seed: u64,
    pub graph_hashes: &'a [(usize, String)],
    pub csv_sha256: String,
    pub wall_time_s: Vec<(usize, f64, f64)>,
}

/// Writes `results.csv` and `manifest.json` into `dir`.
pub fn write_campaign(dir: &Path, config: &ExperimentConfig, campaign: &Campaign) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir)?;
    let csv = to_csv(&campaign.rows);
    std::fs::write(dir.join("results.csv"), &csv)?;
    let manifest = Manifest {
        config,
        seed: config.seed,
        graph_hashes: &campaign.graph_hashes,
        csv_sha256: hex::encode(Sha256::digest(csv.as_bytes())),
        wall_time_s: campaign
            .rows
            .iter()
            .filter(|r| r.basis == Basis::X)
            .map(|r| (r.d, r.p, r.wall_time_s))
            .collect(),
    };
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Crossing {
    pub d1: usize,
    pub d2: usize,
    pub p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdEstimate {
    pub estimate: f64,
    /// Largest distance of a pairwise crossing from the median.
    pub spread: f64,
    pub crossings: Vec<Crossing>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ThresholdError {
    #[error("need at least two distances and three rates")]
    TooFewPoints,
    #[error("no crossing in range")]
    NoCrossing,
}

/// Crossing of the log-rate curves of one logical error type. For each pair of
/// distances the difference of log rates is fitted linearly in `ln p` over the
/// common points and its root is kept when the data brackets a sign change.
pub fn estimate_threshold(rows: &[ResultRow], basis: Basis) -> Result<ThresholdEstimate, ThresholdError> {
    let mut curves: std::collections::BTreeMap<usize, Vec<(f64, f64)>> = Default::default();
    for r in rows.iter().filter(|r| r.basis == basis && r.failures > 0) {
        curves.entry(r.d).or_default().push((r.p, r.rate.ln()));
    }
    let ds: Vec<usize> = curves.keys().copied().collect();
    if ds.len() < 2 || curves.values().all(|c| c.len() < 3) {
        return Err(ThresholdError::TooFewPoints);
    }
    let mut crossings = Vec::new();
    for (i, &d1) in ds.iter().enumerate() {
        for &d2 in &ds[i + 1..] {
            let b: HashMap<u64, f64> = curves[&d2].iter().map(|&(p, y)| (p.to_bits(), y)).collect();
            let pts: Vec<(f64, f64)> = curves[&d1]
                .iter()
                .filter_map(|&(p, y)| b.get(&p.to_bits()).map(|&y2| (p.ln(), y2 - y)))
                .collect();
            if pts.len() < 3 {
                continue;
            }
            let neg = pts.iter().any(|&(_, y)| y < 0.0);
            let pos = pts.iter().any(|&(_, y)| y > 0.0);
            if !(neg && pos) {
                continue;
            }
            let n = pts.len() as f64;
            let mx = pts.iter().map(|q| q.0).sum::<f64>() / n;
            let my = pts.iter().map(|q| q.1).sum::<f64>() / n;
            let sxy: f64 = pts.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|q| (q.0 - mx).powi(2)).sum();
            if sxx == 0.0 || sxy == 0.0 {
                continue;
            }
            let slope = sxy / sxx;
            let root = mx - my / slope;
            let (lo, hi) = pts.iter().fold((f64::MAX, f64::MIN), |a, q| (a.0.min(q.0), a.1.max(q.0)));
            if (lo..=hi).contains(&root) {
                crossings.push(Crossing { d1, d2, p: root.exp() });
            }
        }
    }
    if crossings.is_empty() {
        return Err(ThresholdError::NoCrossing);
    }
    let mut ps: Vec<f64> = crossings.iter().map(|c| c.p).collect();
    ps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = ps.len();
    let estimate = if m % 2 == 1 { ps[m / 2] } else { 0.5 * (ps[m / 2 - 1] + ps[m / 2]) };
    let spread = ps.iter().map(|p| (p - estimate).abs()).fold(0.0, f64::max);
    Ok(ThresholdEstimate { estimate, spread, crossings })
}

/// Data error given as `(qubit, Pauli)` pairs.
pub type SparseError = Vec<(usize, Pauli1)>;

#[derive(Clone, Debug, Default, Serialize)]
pub struct DistanceReport {
    pub distance: usize,
    pub weight: usize,
    pub checked: u64,
    pub failures: u64,
    pub counterexamples: Vec<SparseError>,
}

impl DistanceReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Perfect-measurement decoder of single-type supports with memoized outcomes.
pub struct SupportOracle<'a> {
    dual: &'a DualLattice,
    variant: Variant,
    decoders: [RestrictionDecoder; 2],
    weights: [[Vec<Real>; 3]; 2],
    cache: [HashMap<Vec<usize>, bool>; 2],
}

impl<'a> SupportOracle<'a> {
    pub fn new(dual: &'a DualLattice, variant: Variant) -> Self {
        let decoders = Basis::BOTH.map(|s| RestrictionDecoder::two_dimensional(dual, s));
        let weights = [0, 1].map(|i| decoders[i].uniform_weights());
        Self { dual, variant, decoders, weights, cache: [HashMap::new(), HashMap::new()] }
    }

    /// True when an `error_type` error on the sorted `support` is decoded to a logical.
    pub fn fails(&mut self, error_type: Basis, support: &[usize]) -> bool {
        if support.is_empty() {
            return false;
        }
        if let Some(&v) = self.cache[error_type.index()].get(support) {
            return v;
        }
        let stack = error_type.other();
        let syn = self.dual.syndrome_of_support(support);
        let dec = &self.decoders[stack.index()];
        let e = PauliMask::from_support(self.dual.num_qubits(), error_type, support);
        let v = match decode_2d(self.dual, dec, &self.weights[stack.index()], &syn, self.variant) {
            Ok(c) => flips_logical(self.dual, &e, error_type, &c),
            Err(_) => true,
        };
        self.cache[error_type.index()].insert(support.to_vec(), v);
        v
    }

    /// True when the full Pauli error causes a logical failure of either type.
    pub fn fails_pauli(&mut self, error: &[(usize, Pauli1)]) -> bool {
        Basis::BOTH.into_iter().any(|t| {
            let mut s: Vec<usize> = error.iter().filter(|(_, p)| p.has(t)).map(|&(q, _)| q).collect();
            s.sort_unstable();
            self.fails(t, &s)
        })
    }
}

fn pauli_digits(mut k: usize, w: usize) -> Vec<Pauli1> {
    (0..w)
        .map(|_| {
            let p = Pauli1::NONTRIVIAL[k % 3];
            k /= 3;
            p
        })
        .collect()
}

const MAX_COUNTEREXAMPLES: usize = 64;

/// Decodes every Pauli error of exactly `weight` under perfect measurement.
pub fn exhaustive_distance_check(dual: &DualLattice, weight: usize, variant: Variant) -> DistanceReport {
    let n = dual.num_qubits();
    let mut oracle = SupportOracle::new(dual, variant);
    let mut report = DistanceReport { distance: dual.lattice.distance, weight, ..Default::default() };
    let mut combo: Vec<usize> = (0..weight).collect();
    if weight > n {
        return report;
    }
    loop {
        for k in 0..3usize.pow(weight as u32) {
            let error: SparseError = combo.iter().copied().zip(pauli_digits(k, weight)).collect();
            report.checked += 1;
            if oracle.fails_pauli(&error) {
                report.failures += 1;
                if report.counterexamples.len() < MAX_COUNTEREXAMPLES {
                    report.counterexamples.push(error);
                }
            }
        }
        let Some(i) = (0..weight).rev().find(|&i| combo[i] < n - weight + i) else { break };
        combo[i] += 1;
        for j in i + 1..weight {
            combo[j] = combo[j - 1] + 1;
        }
    }
    report
}

/// Decodes `samples` uniformly drawn Pauli errors of exactly `weight`.
pub fn sampled_distance_check(
    dual: &DualLattice,
    weight: usize,
    samples: u64,
    seed: u64,
    variant: Variant,
) -> DistanceReport {
    let n = dual.num_qubits();
    let mut oracle = SupportOracle::new(dual, variant);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = DistanceReport { distance: dual.lattice.distance, weight, ..Default::default() };
    for _ in 0..samples {
        let mut qubits = sample(&mut rng, n, weight).into_vec();
        qubits.sort_unstable();
        let error: SparseError =
            qubits.into_iter().map(|q| (q, Pauli1::NONTRIVIAL[rng.gen_range(0..3)])).collect();
        report.checked += 1;
        if oracle.fails_pauli(&error) {
            report.failures += 1;
            if report.counterexamples.len() < MAX_COUNTEREXAMPLES {
                report.counterexamples.push(error);
            }
        }
    }
    report
}

/// Errors of `weight` that the naive variant fails on while the adapted one succeeds.
pub fn naive_witnesses(dual: &DualLattice, weight: usize, error_type: Basis, limit: usize) -> Vec<Vec<usize>> {
    let n = dual.num_qubits();
    let mut naive = SupportOracle::new(dual, Variant::Naive);
    let mut adapted = SupportOracle::new(dual, Variant::Adapted);
    let mut out = Vec::new();
    let mut combo: Vec<usize> = (0..weight).collect();
    loop {
        if naive.fails(error_type, &combo) && !adapted.fails(error_type, &combo) {
            out.push(combo.clone());
            if out.len() >= limit {
                break;
            }
        }
        let Some(i) = (0..weight).rev().find(|&i| combo[i] < n - weight + i) else { break };
        combo[i] += 1;
        for j in i + 1..weight {
            combo[j] = combo[j - 1] + 1;
        }
    }
    out
}
