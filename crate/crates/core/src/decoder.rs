//! The Restriction Decoder adapted to the triangular color code: pairing in three
//! restricted graphs, boundary components, and local lifting to qubit corrections.

use crate::circuit::DirectFlagTables;
use crate::graph::{MatchingGraph, SpaceTimeGraph};
use crate::lattice::{Color, ColorPair, DualLattice};
use crate::matching::{mwpm, MatchingError, Partner};
use crate::pauli::{Basis, PauliMask};
use crate::Weight;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Components connected to `v_R` are handled separately.
    Adapted,
    /// Pairs only in RG and RB and lifts at every red vertex including `v_R`.
    Naive,
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "adapted" => Ok(Variant::Adapted),
            "naive" => Ok(Variant::Naive),
            _ => Err(format!("unknown decoder variant {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error(transparent)]
    Matching(#[from] MatchingError),
    #[error("no local lift exists at vertex {0}")]
    Lift(usize),
    #[error("correction syndrome differs from the decoded syndrome")]
    Syndrome,
}

/// Endpoint of a pairing link.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Endpoint {
    /// Highlighted vertex `(layer, dual vertex)`.
    Vertex(usize, usize),
    Boundary(Color),
}

/// One matched pair of a restricted pairing with its projected dual edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Link {
    pub pair: ColorPair,
    pub a: Endpoint,
    pub b: Endpoint,
    /// Dual edges of the flattened and flag-projected path, as a multiset.
    pub edges: Vec<usize>,
}

/// Chain of links between two boundary vertices with at least one red endpoint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Component {
    pub links: Vec<usize>,
    pub ends: [Color; 2],
    pub color: Color,
}

/// Everything the decoder computed for one stack.
#[derive(Clone, Debug, Default, Serialize)]
pub struct DecodeTrace {
    pub links: Vec<Link>,
    pub components: Vec<Component>,
    /// `(vertex, qubits)` of each nonempty lift.
    pub lifts: Vec<(usize, Vec<usize>)>,
}

/// Assigned color of a component with the given boundary endpoints.
pub fn component_color(a: Color, b: Color) -> Color {
    match (a, b) {
        (Color::Red, Color::Red) => Color::Green,
        _ => Color::ALL.into_iter().find(|&c| c != a && c != b).unwrap(),
    }
}

/// Finds the chains ending at a red boundary vertex. Every highlighted vertex has
/// exactly one link in each of its two restricted pairings.
pub fn find_components(links: &[Link]) -> Vec<Component> {
    let mut at: BTreeMap<Endpoint, Vec<usize>> = BTreeMap::new();
    for (i, l) in links.iter().enumerate() {
        for e in [l.a, l.b] {
            if matches!(e, Endpoint::Vertex(..)) {
                at.entry(e).or_default().push(i);
            }
        }
    }
    let mut used = vec![false; links.len()];
    let mut out = Vec::new();
    for start in 0..links.len() {
        if used[start] {
            continue;
        }
        let l = &links[start];
        let (first_end, mut cur) = match (l.a, l.b) {
            (Endpoint::Boundary(c), v) | (v, Endpoint::Boundary(c)) => (c, v),
            _ => continue,
        };
        used[start] = true;
        let mut chain = vec![start];
        let last_end = loop {
            let Endpoint::Vertex(..) = cur else {
                let Endpoint::Boundary(c) = cur else { unreachable!() };
                break c;
            };
            let next = at[&cur].iter().copied().find(|&j| !used[j]);
            let Some(j) = next else {
                break first_end;
            };
            used[j] = true;
            chain.push(j);
            let lj = &links[j];
            cur = if lj.a == cur { lj.b } else { lj.a };
        };
        if first_end == Color::Red || last_end == Color::Red {
            out.push(Component {
                links: chain,
                ends: [first_end, last_end],
                color: component_color(first_end, last_end),
            });
        }
    }
    out
}

/// Smallest subset of `star(v)`, ties broken by the smallest qubit-sorted bitmask,
/// whose boundary restricted to `v` equals the odd edges in `beta`.
pub fn lift(dual: &DualLattice, v: usize, beta: &[bool]) -> Option<Vec<usize>> {
    let star = &dual.stars[v];
    let n = star.len();
    assert!(n <= 64, "star too large");
    let edges = &dual.incident[v];
    let mut rows: Vec<(u64, bool)> = edges
        .iter()
        .filter(|&&e| !(dual.is_boundary(dual.edges[e].0) && dual.is_boundary(dual.edges[e].1)))
        .map(|&e| {
            let mut mask = 0u64;
            for (i, &q) in star.iter().enumerate() {
                if dual.edge_triangles[e].contains(&q) {
                    mask |= 1 << i;
                }
            }
            (mask, beta[e])
        })
        .collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0;
    for col in (0..n).rev() {
        let Some(k) = (r..rows.len()).find(|&k| rows[k].0 >> col & 1 == 1) else { continue };
        rows.swap(r, k);
        for k in 0..rows.len() {
            if k != r && rows[k].0 >> col & 1 == 1 {
                rows[k].0 ^= rows[r].0;
                rows[k].1 ^= rows[r].1;
            }
        }
        pivots.push((col, r));
        r += 1;
    }
    if rows[r..].iter().any(|row| row.1) {
        return None;
    }
    let is_pivot = |c: usize| pivots.iter().any(|&(pc, _)| pc == c);
    let free: Vec<usize> = (0..n).filter(|&c| !is_pivot(c)).collect();
    let solve = |assign: u64| -> u64 {
        let mut x = assign;
        for &(col, row) in &pivots {
            let (mask, rhs) = rows[row];
            let others = (mask & !(1 << col)) & x;
            if rhs ^ (others.count_ones() % 2 == 1) {
                x |= 1 << col;
            }
        }
        x
    };
    assert!(free.len() <= 16, "lift null space too large");
    let mut best = u64::MAX;
    let key = |x: u64| (x.count_ones(), x);
    for combo in 0u64..(1 << free.len()) {
        let mut assign = 0u64;
        for (i, &c) in free.iter().enumerate() {
            if combo >> i & 1 == 1 {
                assign |= 1 << c;
            }
        }
        let x = solve(assign);
        if best == u64::MAX || key(x) < key(best) {
            best = x;
        }
    }
    Some((0..n).filter(|&i| best >> i & 1 == 1).map(|i| star[i]).collect())
}

/// Restriction decoder for one stack over three restricted graphs.
#[derive(Clone, Debug)]
pub struct RestrictionDecoder {
    pub stack: Basis,
    pub graphs: [MatchingGraph; 3],
    pub spacetime: [SpaceTimeGraph; 3],
}

impl RestrictionDecoder {
    /// Perfect-measurement decoder on the restricted lattices.
    pub fn two_dimensional(dual: &DualLattice, stack: Basis) -> Self {
        let graphs = ColorPair::ALL.map(|c| MatchingGraph::lattice(dual, c, stack));
        Self::new(dual, graphs, 1)
    }

    pub fn new(dual: &DualLattice, graphs: [MatchingGraph; 3], layers: usize) -> Self {
        let spacetime = [0, 1, 2].map(|i| SpaceTimeGraph::new(dual, &graphs[i], layers));
        Self { stack: graphs[0].stack, graphs, spacetime }
    }

    /// Highlighted nodes of each pair for a perfect syndrome (single layer).
    pub fn highlighted_2d(&self, syndrome: &[usize]) -> [Vec<usize>; 3] {
        [0, 1, 2].map(|i| {
            let g = &self.graphs[i];
            syndrome
                .iter()
                .filter(|&&v| g.local[v] != usize::MAX)
                .map(|&v| self.spacetime[i].node(0, g.local[v]))
                .collect()
        })
    }

    /// Uniform weights for the 2D decoder.
    pub fn uniform_weights<W: Weight>(&self) -> [Vec<W>; 3] {
        [0, 1, 2].map(|i| self.spacetime[i].uniform_weights(&self.graphs[i]))
    }

    fn endpoint(&self, i: usize, node: usize, dual: &DualLattice) -> Endpoint {
        let (layer, local) = self.spacetime[i].split(node);
        let v = self.graphs[i].vertices[local];
        if dual.is_boundary(v) {
            Endpoint::Boundary(dual.color(v))
        } else {
            Endpoint::Vertex(layer, v)
        }
    }

    /// Pairs highlighted nodes in the given pairs and returns the links.
    pub fn pair<W: Weight>(
        &self,
        dual: &DualLattice,
        highlighted: &[Vec<usize>; 3],
        weights: &[Vec<W>; 3],
        pairs: &[usize],
    ) -> Result<Vec<Link>, DecodeError> {
        let mut links = Vec::new();
        for &i in pairs {
            let st = &self.spacetime[i];
            let pairing = mwpm(&st.view(&weights[i]), &highlighted[i])?;
            for m in pairing.pairs {
                let b = match m.to {
                    Partner::Vertex(v) | Partner::Boundary(v) => v,
                };
                links.push(Link {
                    pair: self.graphs[i].pair,
                    a: self.endpoint(i, m.from, dual),
                    b: self.endpoint(i, b, dual),
                    edges: st.project_path(&self.graphs[i], &m.path),
                });
            }
        }
        Ok(links)
    }

    /// Decodes highlighted nodes into the qubits of a correction.
    pub fn decode<W: Weight>(
        &self,
        dual: &DualLattice,
        highlighted: &[Vec<usize>; 3],
        weights: &[Vec<W>; 3],
        variant: Variant,
    ) -> Result<(Vec<usize>, DecodeTrace), DecodeError> {
        let pairs: &[usize] = match variant {
            Variant::Adapted => &[0, 1, 2],
            Variant::Naive => &[0, 1],
        };
        let links = self.pair(dual, highlighted, weights, pairs)?;
        let components = match variant {
            Variant::Adapted => find_components(&links),
            Variant::Naive => Vec::new(),
        };
        let mut in_component = vec![false; links.len()];
        for c in &components {
            for &l in &c.links {
                in_component[l] = true;
            }
        }
        let ne = dual.edges.len();
        let mut rho = vec![false; ne];
        for (l, link) in links.iter().enumerate() {
            if !in_component[l] && link.pair != ColorPair::GB {
                for &e in &link.edges {
                    rho[e] ^= true;
                }
            }
        }
        let mut trace = DecodeTrace { links: Vec::new(), components: Vec::new(), lifts: Vec::new() };
        let mut correction = vec![false; dual.num_qubits()];
        let mut apply_lifts = |set: &[bool], color: Color, trace: &mut DecodeTrace| -> Result<(), DecodeError> {
            let mut touched: Vec<usize> = Vec::new();
            for (e, &on) in set.iter().enumerate() {
                if on {
                    let (u, v) = dual.edges[e];
                    for w in [u, v] {
                        if dual.color(w) == color && !touched.contains(&w) {
                            touched.push(w);
                        }
                    }
                }
            }
            touched.sort_unstable();
            for v in touched {
                let tau = lift(dual, v, set).ok_or(DecodeError::Lift(v))?;
                for &q in &tau {
                    correction[q] ^= true;
                }
                if !tau.is_empty() {
                    trace.lifts.push((v, tau));
                }
            }
            Ok(())
        };
        apply_lifts(&rho, Color::Red, &mut trace)?;
        for c in &components {
            let mut gamma = vec![false; ne];
            for &l in &c.links {
                for &e in &links[l].edges {
                    gamma[e] ^= true;
                }
            }
            apply_lifts(&gamma, c.color, &mut trace)?;
        }
        trace.links = links;
        trace.components = components;
        Ok(((0..correction.len()).filter(|&q| correction[q]).collect(), trace))
    }
}

/// Decodes a perfect syndrome and checks that the correction reproduces it.
pub fn decode_2d<W: Weight>(
    dual: &DualLattice,
    decoder: &RestrictionDecoder,
    weights: &[Vec<W>; 3],
    syndrome: &[usize],
    variant: Variant,
) -> Result<PauliMask, DecodeError> {
    decode_2d_traced(dual, decoder, weights, syndrome, variant).map(|(c, _)| c)
}

/// [`decode_2d`] together with the decoder trace.
pub fn decode_2d_traced<W: Weight>(
    dual: &DualLattice,
    decoder: &RestrictionDecoder,
    weights: &[Vec<W>; 3],
    syndrome: &[usize],
    variant: Variant,
) -> Result<(PauliMask, DecodeTrace), DecodeError> {
    let highlighted = decoder.highlighted_2d(syndrome);
    let (qubits, trace) = decoder.decode(dual, &highlighted, weights, variant)?;
    let mut sorted = syndrome.to_vec();
    sorted.sort_unstable();
    if dual.syndrome_of_support(&qubits) != sorted {
        return Err(DecodeError::Syndrome);
    }
    Ok((PauliMask::from_support(dual.num_qubits(), decoder.stack.other(), &qubits), trace))
}

/// Immediate correction for a flag pattern of one stabilizer circuit.
pub fn direct_flag_correct(tables: &DirectFlagTables, n: usize, face: usize, basis: Basis, pattern: u8) -> PauliMask {
    PauliMask::from_support(n, basis, tables.correction(face, basis, pattern))
}
