//! Matching graphs per color pair, space-time graphs, and edge weights derived by
//! enumerating every single fault of one syndrome-extraction round.

use crate::circuit::{fault_locations, DirectFlagTables, FaultLocation, Frame, RoundSchedule};
use crate::lattice::{ColorPair, DualLattice};
use crate::matching::PathGraph;
use crate::pauli::{Basis, PauliMask};
use crate::sim::{run_round, FlagEvent, SyndromeHistory};
use crate::{Rational, Weight};
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// Weight given to modeled edges whose probability vanishes.
pub const LARGE_WEIGHT: f64 = 50.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Lattice,
    Flag,
    Vertical,
    Diagonal,
}

/// How flag outcomes are used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlagScheme {
    /// Flag edges and renormalized weights.
    Renorm,
    /// Immediate corrections from flag patterns.
    Direct,
    /// Flags ignored.
    Off,
}

impl std::str::FromStr for FlagScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "renorm" => Ok(FlagScheme::Renorm),
            "direct" => Ok(FlagScheme::Direct),
            "off" => Ok(FlagScheme::Off),
            _ => Err(format!("unknown flag scheme {s:?}")),
        }
    }
}

/// Probability of an edge as per-location multiples of `p`. Faults at one location are
/// mutually exclusive; distinct locations are independent.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgeProbability {
    pub terms: Vec<(usize, Rational)>,
}

impl Serialize for EdgeProbability {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("EdgeProbability", 2)?;
        st.serialize_field("leading", &self.leading().to_string())?;
        st.serialize_field("locations", &self.terms.len())?;
        st.end()
    }
}

impl EdgeProbability {
    pub fn add(&mut self, location: usize, coefficient: Rational) {
        match self.terms.iter_mut().find(|(l, _)| *l == location) {
            Some((_, c)) => *c += coefficient,
            None => self.terms.push((location, coefficient)),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the linear term.
    pub fn leading(&self) -> Rational {
        self.terms.iter().fold(Rational::zero(), |a, (_, c)| a + c)
    }

    pub fn polynomial(&self) -> EdgeWeightPolynomial {
        EdgeWeightPolynomial { coefficient: self.leading(), order: 1 }
    }

    /// Probability that an odd number of locations fire.
    pub fn evaluate(&self, p: f64) -> f64 {
        let mut prod = 1.0;
        for (_, c) in &self.terms {
            prod *= 1.0 - 2.0 * c.to_f64().unwrap() * p;
        }
        (1.0 - prod) / 2.0
    }

    /// Exact version of [`EdgeProbability::evaluate`].
    pub fn evaluate_exact(&self, p: Rational) -> Rational {
        let one = Rational::from_integer(1);
        let two = Rational::from_integer(2);
        let mut prod = one;
        for (_, c) in &self.terms {
            prod *= one - two * c * p;
        }
        (one - prod) / two
    }
}

/// Leading-order form `c * p^k` of an edge probability.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeWeightPolynomial {
    #[serde(serialize_with = "ser_ratio")]
    pub coefficient: Rational,
    pub order: u32,
}

fn ser_ratio<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// Edge inside one layer.
#[derive(Clone, Debug, Serialize)]
pub struct SpatialEdge {
    pub u: usize,
    pub v: usize,
    pub kind: EdgeKind,
    /// Dual edges this edge projects to.
    pub projection: Vec<usize>,
    /// Contributions from the later round (index 0) and the earlier round (index 1).
    pub probability: [EdgeProbability; 2],
}

/// Edge between consecutive layers; `lower` lies in the earlier layer.
#[derive(Clone, Debug, Serialize)]
pub struct CrossEdge {
    pub lower: usize,
    pub upper: usize,
    pub kind: EdgeKind,
    pub projection: Option<usize>,
    pub probability: EdgeProbability,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum EdgeRef {
    Spatial(usize),
    Cross(usize),
}

/// Contribution of a flagged fault to an edge, used to replace renormalized weights.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OverrideTerm {
    pub edge: EdgeRef,
    /// Layer offset from the fault's round.
    pub delta: usize,
    pub location: usize,
    #[serde(serialize_with = "ser_ratio")]
    pub coefficient: Rational,
}

/// A single fault of one round and its effect.
#[derive(Clone, Debug)]
pub struct EnumeratedFault {
    pub fault: FaultLocation,
    pub coefficient: Rational,
    /// Flipped syndrome outcomes per stabilizer type.
    pub flips: [Vec<usize>; 2],
    pub flags: Vec<FlagEvent>,
    pub residual: PauliMask,
}

/// Runs every single fault of one round through the schedule.
pub fn enumerate_round_faults(
    schedule: &RoundSchedule,
    direct: Option<&DirectFlagTables>,
) -> Vec<EnumeratedFault> {
    let nf = schedule.num_faces();
    let mut out = Vec::new();
    for (mut fault, coefficient) in fault_locations(&schedule.circuit) {
        fault.round = 1;
        let mut history = SyndromeHistory::new(1, nf);
        let mut frame = Frame::new(schedule.num_qubits());
        run_round(schedule, &mut frame, &[fault], 1, &mut history, direct);
        let flips = [
            (0..nf).filter(|&f| history.outcomes[0][1][f]).collect(),
            (0..nf).filter(|&f| history.outcomes[1][1][f]).collect(),
        ];
        out.push(EnumeratedFault {
            fault,
            coefficient,
            flips,
            flags: history.flags[1].clone(),
            residual: frame.data_mask(schedule.circuit.num_data),
        });
    }
    out
}

/// Detection events of a fault in one restricted graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Events {
    /// Events in the fault's own round.
    pub now: Vec<usize>,
    /// Events in the following round.
    pub next: Vec<usize>,
}

fn symmetric_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = a.iter().filter(|x| !b.contains(x)).copied().collect();
    out.extend(b.iter().filter(|x| !a.contains(x)));
    out.sort_unstable();
    out
}

/// Matching graph for one stabilizer type and color pair: spatial edges (lattice and
/// flag) and cross-layer edges (vertical and diagonal).
#[derive(Clone, Debug, Serialize)]
pub struct MatchingGraph {
    pub pair: ColorPair,
    /// Stabilizer type whose outcomes are matched.
    pub stack: Basis,
    /// Dual vertices of the pair; local index is the position.
    pub vertices: Vec<usize>,
    #[serde(skip)]
    pub local: Vec<usize>,
    pub spatial: Vec<SpatialEdge>,
    pub cross: Vec<CrossEdge>,
    #[serde(skip)]
    spatial_index: HashMap<(usize, usize), usize>,
    #[serde(skip)]
    cross_index: HashMap<(usize, usize), usize>,
    /// Edge contributions keyed by the single flag event raised.
    #[serde(skip)]
    pub overrides: BTreeMap<(usize, Basis, u8), Vec<OverrideTerm>>,
    /// Faults whose events fit no edge.
    pub unmodeled: Vec<usize>,
    #[serde(serialize_with = "ser_ratio")]
    pub unmodeled_weight: Rational,
}

impl MatchingGraph {
    /// Graph with one lattice edge per restricted-lattice edge.
    pub fn lattice(dual: &DualLattice, pair: ColorPair, stack: Basis) -> Self {
        let r = dual.restrict(pair);
        let mut local = vec![usize::MAX; dual.num_vertices()];
        for (i, &v) in r.vertices.iter().enumerate() {
            local[v] = i;
        }
        let mut g = MatchingGraph {
            pair,
            stack,
            vertices: r.vertices.clone(),
            local,
            spatial: Vec::new(),
            cross: Vec::new(),
            spatial_index: HashMap::new(),
            cross_index: HashMap::new(),
            overrides: BTreeMap::new(),
            unmodeled: Vec::new(),
            unmodeled_weight: Rational::zero(),
        };
        for &e in &r.edges {
            let (u, v) = dual.edges[e];
            g.spatial_index.insert((u, v), g.spatial.len());
            g.spatial.push(SpatialEdge {
                u,
                v,
                kind: EdgeKind::Lattice,
                projection: vec![e],
                probability: Default::default(),
            });
        }
        g
    }

    /// Graph whose flag, vertical and diagonal edges and all probabilities come from
    /// the enumerated faults.
    pub fn from_faults(
        dual: &DualLattice,
        pair: ColorPair,
        stack: Basis,
        faults: &[EnumeratedFault],
        scheme: FlagScheme,
    ) -> Self {
        let mut g = Self::lattice(dual, pair, stack);
        for (i, f) in faults.iter().enumerate() {
            let events = g.events(dual, f);
            if events.now.is_empty() && events.next.is_empty() {
                continue;
            }
            let flagged = !f.flags.is_empty() && scheme != FlagScheme::Off;
            match g.classify(dual, &events, &f.residual, flagged) {
                Some(contribs) => {
                    for &(edge, delta) in &contribs {
                        g.probability_mut(edge, delta).add(f.fault.gate, f.coefficient);
                    }
                    if scheme == FlagScheme::Renorm && f.flags.len() == 1 {
                        let e = f.flags[0];
                        let terms = g.overrides.entry((e.face, e.basis, e.pattern)).or_default();
                        for (edge, delta) in contribs {
                            match terms
                                .iter_mut()
                                .find(|t| t.edge == edge && t.delta == delta && t.location == f.fault.gate)
                            {
                                Some(t) => t.coefficient += f.coefficient,
                                None => terms.push(OverrideTerm {
                                    edge,
                                    delta,
                                    location: f.fault.gate,
                                    coefficient: f.coefficient,
                                }),
                            }
                        }
                    }
                }
                None => {
                    g.unmodeled.push(i);
                    g.unmodeled_weight += f.coefficient;
                }
            }
        }
        g
    }

    /// Events of a fault restricted to this graph's colors.
    pub fn events(&self, dual: &DualLattice, f: &EnumeratedFault) -> Events {
        let flips = &f.flips[self.stack.index()];
        let later = dual.syndrome_of(&f.residual, self.stack.other());
        let next = symmetric_difference(flips, &later);
        let keep = |v: &usize| self.pair.contains(dual.color(*v));
        Events {
            now: flips.iter().copied().filter(keep).collect(),
            next: next.into_iter().filter(keep).collect(),
        }
    }

    fn probability_mut(&mut self, edge: EdgeRef, delta: usize) -> &mut EdgeProbability {
        match edge {
            EdgeRef::Spatial(i) => &mut self.spatial[i].probability[delta],
            EdgeRef::Cross(i) => &mut self.cross[i].probability,
        }
    }

    pub fn spatial_edge(&self, u: usize, v: usize) -> Option<usize> {
        self.spatial_index.get(&(u.min(v), u.max(v))).copied()
    }

    pub fn cross_edge(&self, lower: usize, upper: usize) -> Option<usize> {
        self.cross_index.get(&(lower, upper)).copied()
    }

    fn lattice_edge(&self, u: usize, v: usize) -> Option<usize> {
        self.spatial_edge(u, v).filter(|&i| self.spatial[i].kind == EdgeKind::Lattice)
    }

    fn neighbors(&self, dual: &DualLattice, v: usize) -> Vec<usize> {
        dual.incident[v]
            .iter()
            .map(|&e| {
                let (a, b) = dual.edges[e];
                if a == v {
                    b
                } else {
                    a
                }
            })
            .filter(|&w| self.pair.contains(dual.color(w)))
            .collect()
    }

    /// Flag edge between same-colored vertices at distance two, created on demand.
    fn flag_edge(&mut self, dual: &DualLattice, u: usize, v: usize, residual: &PauliMask) -> Option<usize> {
        if let Some(i) = self.spatial_edge(u, v) {
            return (self.spatial[i].kind == EdgeKind::Flag).then_some(i);
        }
        if dual.color(u) != dual.color(v) {
            return None;
        }
        let nu = self.neighbors(dual, u);
        let nv = self.neighbors(dual, v);
        let common: Vec<usize> = nu.into_iter().filter(|w| nv.contains(w)).collect();
        if common.is_empty() {
            return None;
        }
        let support = residual.support(self.stack.other());
        let score = |m: usize| support.iter().filter(|&&q| dual.triangles[q].contains(&m)).count();
        let mid = *common.iter().max_by_key(|&&m| (score(m), std::cmp::Reverse(m))).unwrap();
        let (a, b) = (u.min(v), u.max(v));
        let projection = vec![dual.edge_id(a, mid).unwrap(), dual.edge_id(mid, b).unwrap()];
        self.spatial_index.insert((a, b), self.spatial.len());
        self.spatial.push(SpatialEdge {
            u: a,
            v: b,
            kind: EdgeKind::Flag,
            projection,
            probability: Default::default(),
        });
        Some(self.spatial.len() - 1)
    }

    fn spatial_pair(&mut self, dual: &DualLattice, u: usize, v: usize, residual: &PauliMask, flagged: bool) -> Option<usize> {
        if let Some(i) = self.lattice_edge(u, v) {
            return Some(i);
        }
        if flagged {
            self.flag_edge(dual, u, v, residual)
        } else {
            None
        }
    }

    /// Boundary edge for a single event at `u`, chosen by the residual's parity along
    /// each boundary of the pair. Flagged faults may use a flag edge to the boundary.
    fn boundary_edge(&mut self, dual: &DualLattice, u: usize, residual: &PauliMask, flagged: bool) -> Option<usize> {
        let lattice = &dual.lattice;
        let part = residual.part(self.stack.other());
        let mut candidates = Vec::new();
        for c in self.pair.colors() {
            let b = dual.boundary_vertex(c);
            if let Some(i) = self.lattice_edge(u, b) {
                let side = lattice.side_colors.iter().position(|&s| s == c).unwrap();
                let odd = (0..lattice.num_qubits())
                    .filter(|&q| lattice.qubit_sides[q] & (1 << side) != 0 && part[q])
                    .count()
                    % 2
                    == 1;
                candidates.push((odd, i));
            }
        }
        if let Some(&(_, i)) = candidates.iter().find(|(odd, _)| *odd) {
            return Some(i);
        }
        if flagged {
            let b = dual.boundary_vertex(dual.color(u));
            if self.pair.contains(dual.color(u)) {
                if let Some(i) = self.flag_edge(dual, u, b, residual) {
                    return Some(i);
                }
            }
        }
        candidates.first().map(|&(_, i)| i)
    }

    fn cross_edge_or_insert(&mut self, dual: &DualLattice, lower: usize, upper: usize) -> Option<usize> {
        if let Some(i) = self.cross_edge(lower, upper) {
            return Some(i);
        }
        let (kind, projection) = if lower == upper {
            (EdgeKind::Vertical, None)
        } else {
            let e = dual.edge_id(lower, upper)?;
            if !self.pair.contains(dual.color(lower)) || !self.pair.contains(dual.color(upper)) {
                return None;
            }
            (EdgeKind::Diagonal, Some(e))
        };
        self.cross_index.insert((lower, upper), self.cross.len());
        self.cross.push(CrossEdge {
            lower,
            upper,
            kind,
            projection,
            probability: EdgeProbability::default(),
        });
        Some(self.cross.len() - 1)
    }

    /// Edges explaining a fault's events, with layer offsets; `None` if unmodeled.
    fn classify(
        &mut self,
        dual: &DualLattice,
        ev: &Events,
        residual: &PauliMask,
        flagged: bool,
    ) -> Option<Vec<(EdgeRef, usize)>> {
        let single = |s: &mut Self, layer: &[usize], delta: usize| -> Option<Vec<(EdgeRef, usize)>> {
            match layer.len() {
                1 => s.boundary_edge(dual, layer[0], residual, flagged).map(|i| vec![(EdgeRef::Spatial(i), delta)]),
                2 => s
                    .spatial_pair(dual, layer[0], layer[1], residual, flagged)
                    .map(|i| vec![(EdgeRef::Spatial(i), delta)]),
                _ => None,
            }
        };
        match (ev.now.len(), ev.next.len()) {
            (_, 0) => single(self, &ev.now, 0),
            (0, _) => single(self, &ev.next, 1),
            (1, 1) => self
                .cross_edge_or_insert(dual, ev.now[0], ev.next[0])
                .map(|i| vec![(EdgeRef::Cross(i), 0)]),
            _ => None,
        }
    }

    /// Leading-order polynomial of every edge with nonzero probability.
    pub fn polynomials(&self) -> Vec<EdgeReport> {
        let mut out = Vec::new();
        for e in &self.spatial {
            for (delta, prob) in e.probability.iter().enumerate() {
                if !prob.is_empty() {
                    out.push(EdgeReport {
                        stack: self.stack,
                        pair: self.pair,
                        kind: e.kind,
                        u: e.u,
                        v: e.v,
                        delta,
                        polynomial: prob.polynomial(),
                        locations: prob.terms.len(),
                    });
                }
            }
        }
        for e in &self.cross {
            out.push(EdgeReport {
                stack: self.stack,
                pair: self.pair,
                kind: e.kind,
                u: e.lower,
                v: e.upper,
                delta: 0,
                polynomial: e.probability.polynomial(),
                locations: e.probability.terms.len(),
            });
        }
        out
    }
}

/// One row of the edge-weight report.
#[derive(Clone, Debug, Serialize)]
pub struct EdgeReport {
    pub stack: Basis,
    pub pair: ColorPair,
    pub kind: EdgeKind,
    pub u: usize,
    pub v: usize,
    pub delta: usize,
    pub polynomial: EdgeWeightPolynomial,
    pub locations: usize,
}

/// Edge of a space-time graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeInstance {
    pub a: usize,
    pub b: usize,
    pub edge: EdgeRef,
    /// Layer of a spatial edge, or the lower layer of a cross edge.
    pub layer: usize,
}

/// Layered graph `G_C x {0..T-1}`; node `t * nv + i` is local vertex `i` in layer `t`.
#[derive(Clone, Debug)]
pub struct SpaceTimeGraph {
    pub layers: usize,
    pub nv: usize,
    pub instances: Vec<EdgeInstance>,
    adjacency: Vec<Vec<(usize, usize)>>,
    sinks: Vec<bool>,
    pair_index: HashMap<(usize, usize), usize>,
}

impl SpaceTimeGraph {
    pub fn new(dual: &DualLattice, g: &MatchingGraph, layers: usize) -> Self {
        let nv = g.vertices.len();
        let n = nv * layers;
        let mut adjacency = vec![Vec::new(); n];
        let mut sinks = vec![false; n];
        for t in 0..layers {
            for (i, &v) in g.vertices.iter().enumerate() {
                sinks[t * nv + i] = dual.is_boundary(v);
            }
        }
        let mut instances = Vec::new();
        for t in 0..layers {
            for (i, e) in g.spatial.iter().enumerate() {
                instances.push(EdgeInstance {
                    a: t * nv + g.local[e.u],
                    b: t * nv + g.local[e.v],
                    edge: EdgeRef::Spatial(i),
                    layer: t,
                });
            }
        }
        for t in 0..layers.saturating_sub(1) {
            for (i, e) in g.cross.iter().enumerate() {
                instances.push(EdgeInstance {
                    a: t * nv + g.local[e.lower],
                    b: (t + 1) * nv + g.local[e.upper],
                    edge: EdgeRef::Cross(i),
                    layer: t,
                });
            }
        }
        let mut pair_index = HashMap::new();
        for (k, inst) in instances.iter().enumerate() {
            adjacency[inst.a].push((inst.b, k));
            adjacency[inst.b].push((inst.a, k));
            pair_index.insert((inst.a.min(inst.b), inst.a.max(inst.b)), k);
        }
        Self { layers, nv, instances, adjacency, sinks, pair_index }
    }

    pub fn num_nodes(&self) -> usize {
        self.nv * self.layers
    }

    pub fn node(&self, layer: usize, local: usize) -> usize {
        layer * self.nv + local
    }

    /// `(layer, local)` of a node.
    pub fn split(&self, node: usize) -> (usize, usize) {
        (node / self.nv, node % self.nv)
    }

    pub fn is_sink(&self, node: usize) -> bool {
        self.sinks[node]
    }

    pub fn instance_between(&self, a: usize, b: usize) -> Option<usize> {
        self.pair_index.get(&(a.min(b), a.max(b))).copied()
    }

    /// Dual edges a node path projects to (flattening, then flag projection), as a
    /// multiset.
    pub fn project_path(&self, g: &MatchingGraph, path: &[usize]) -> Vec<usize> {
        let mut out = Vec::new();
        for w in path.windows(2) {
            let k = self.instance_between(w[0], w[1]).expect("path follows graph edges");
            match self.instances[k].edge {
                EdgeRef::Spatial(i) => out.extend(&g.spatial[i].projection),
                EdgeRef::Cross(i) => out.extend(g.cross[i].projection),
            }
        }
        out
    }

    /// Uniform weights: 1 on lattice edges, infinite on flag edges.
    pub fn uniform_weights<W: Weight>(&self, g: &MatchingGraph) -> Vec<W> {
        self.instances
            .iter()
            .map(|inst| match inst.edge {
                EdgeRef::Spatial(i) if g.spatial[i].kind == EdgeKind::Lattice => W::one(),
                EdgeRef::Spatial(_) => W::infinity(),
                EdgeRef::Cross(_) => W::one(),
            })
            .collect()
    }

    /// Weights `-ln P` for a history. `flags[r]` are the flag events of round `r`
    /// (1-based); rounds without entries in `noisy` contribute nothing.
    pub fn weights<W: Weight>(&self, g: &MatchingGraph, params: &WeightParams, flags: &[Vec<FlagEvent>]) -> Vec<W> {
        let t_max = self.layers;
        let noisy = |r: usize| r >= 1 && r <= t_max && !(params.noiseless_last && r == t_max);
        let renorm = params.scheme == FlagScheme::Renorm;
        let scale: Vec<f64> = (0..=t_max)
            .map(|r| {
                let m = if renorm { flags.get(r).map_or(0, |f| f.len()) } else { 0 };
                if noisy(r) {
                    params.p.powf(params.alpha * m as f64)
                } else {
                    0.0
                }
            })
            .collect();
        // Per instance: the component from the upper round and, for spatial edges, the
        // component from the lower round.
        let mut parts: Vec<[f64; 2]> = self
            .instances
            .iter()
            .map(|inst| match inst.edge {
                EdgeRef::Spatial(i) => {
                    let e = &g.spatial[i];
                    [
                        e.probability[0].evaluate(params.p) * scale[inst.layer + 1],
                        e.probability[1].evaluate(params.p) * scale[inst.layer],
                    ]
                }
                EdgeRef::Cross(i) => [g.cross[i].probability.evaluate(params.p) * scale[inst.layer + 1], 0.0],
            })
            .collect();
        if renorm {
            let mut replaced: HashMap<(usize, usize), EdgeProbability> = HashMap::new();
            for (r, events) in flags.iter().enumerate() {
                if !noisy(r) {
                    continue;
                }
                for e in events {
                    let Some(terms) = g.overrides.get(&(e.face, e.basis, e.pattern)) else { continue };
                    for t in terms {
                        let (layer, endpoints) = match t.edge {
                            EdgeRef::Spatial(i) => {
                                let s = &g.spatial[i];
                                (r - 1 + t.delta, (g.local[s.u], g.local[s.v], 0))
                            }
                            EdgeRef::Cross(i) => {
                                let c = &g.cross[i];
                                (r - 1, (g.local[c.lower], g.local[c.upper], 1))
                            }
                        };
                        if layer + endpoints.2 >= self.layers {
                            continue;
                        }
                        let a = self.node(layer, endpoints.0);
                        let b = self.node(layer + endpoints.2, endpoints.1);
                        if let Some(k) = self.instance_between(a, b) {
                            replaced.entry((k, t.delta)).or_default().add(t.location, t.coefficient);
                        }
                    }
                }
            }
            for ((k, part), prob) in replaced {
                parts[k][part] = prob.evaluate(params.p);
            }
        }
        let probs = parts.into_iter().map(|[a, b]| a + b - 2.0 * a * b);
        self.instances
            .iter()
            .zip(probs)
            .map(|(inst, p)| {
                let is_flag = matches!(inst.edge, EdgeRef::Spatial(i) if g.spatial[i].kind == EdgeKind::Flag);
                if p > 0.0 {
                    W::from(-p.min(0.5).ln()).unwrap()
                } else if is_flag {
                    W::infinity()
                } else {
                    W::from(LARGE_WEIGHT).unwrap()
                }
            })
            .collect()
    }

    /// Highlighted nodes `(sigma_{t-1} xor sigma_t) x {t}` restricted to this graph.
    pub fn highlighted(&self, g: &MatchingGraph, history: &SyndromeHistory) -> Vec<usize> {
        let out = &history.outcomes[g.stack.index()];
        let mut nodes = Vec::new();
        for t in 1..=self.layers.min(history.rounds) {
            for (i, &v) in g.vertices.iter().enumerate() {
                if v < out[t].len() && out[t - 1][v] != out[t][v] {
                    nodes.push(self.node(t - 1, i));
                }
            }
        }
        nodes
    }

    pub fn view<'a, W: Weight>(&'a self, weights: &'a [W]) -> WeightedGraph<'a, W> {
        WeightedGraph { graph: self, weights }
    }
}

/// Parameters of the weight computation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightParams {
    pub p: f64,
    pub alpha: f64,
    pub scheme: FlagScheme,
    pub noiseless_last: bool,
}

/// Space-time graph with a weight per edge instance.
#[derive(Clone, Copy, Debug)]
pub struct WeightedGraph<'a, W> {
    pub graph: &'a SpaceTimeGraph,
    pub weights: &'a [W],
}

impl<'a, W: Weight> PathGraph<W> for WeightedGraph<'a, W> {
    fn num_nodes(&self) -> usize {
        self.graph.num_nodes()
    }

    fn is_sink(&self, v: usize) -> bool {
        self.graph.sinks[v]
    }

    fn for_each_neighbor<F: FnMut(usize, W)>(&self, v: usize, mut f: F) {
        for &(u, k) in &self.graph.adjacency[v] {
            let w = self.weights[k];
            if w.is_finite() {
                f(u, w);
            }
        }
    }
}

/// The six matching graphs of a schedule, indexed by stack then pair.
#[derive(Clone, Debug, Serialize)]
pub struct GraphSet {
    pub graphs: [[MatchingGraph; 3]; 2],
}

impl GraphSet {
    pub fn lattice(dual: &DualLattice) -> Self {
        let mk = |s: Basis| ColorPair::ALL.map(|c| MatchingGraph::lattice(dual, c, s));
        Self { graphs: [mk(Basis::X), mk(Basis::Z)] }
    }

    pub fn from_faults(dual: &DualLattice, faults: &[EnumeratedFault], scheme: FlagScheme) -> Self {
        let mk = |s: Basis| ColorPair::ALL.map(|c| MatchingGraph::from_faults(dual, c, s, faults, scheme));
        Self { graphs: [mk(Basis::X), mk(Basis::Z)] }
    }

    pub fn get(&self, stack: Basis, pair: ColorPair) -> &MatchingGraph {
        &self.graphs[stack.index()][pair.index()]
    }
}

/// True when the vertex is a weight-6 face away from every boundary.
pub fn is_bulk_vertex(dual: &DualLattice, v: usize) -> bool {
    !dual.is_boundary(v) && dual.lattice.faces[v].weight() == 6 && dual.lattice.faces[v].boundary.is_none()
}
