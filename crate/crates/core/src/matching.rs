//! Minimum-weight perfect matching of highlighted vertices with boundary attachment.

use crate::blossom::max_weight_matching;
use crate::Weight;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Scale used to convert real path lengths to integer matching weights.
pub const INTEGER_SCALE: f64 = 1e6;

/// Undirected graph with nonnegative edge weights. Sink vertices are never expanded.
pub trait PathGraph<W: Weight> {
    fn num_nodes(&self) -> usize;

    fn is_sink(&self, v: usize) -> bool;

    /// Calls `f(neighbor, weight)` for every finite-weight edge at `v`.
    fn for_each_neighbor<F: FnMut(usize, W)>(&self, v: usize, f: F);
}

/// Adjacency-list graph for tests and small instances.
#[derive(Clone, Debug)]
pub struct AdjacencyGraph<W> {
    pub adjacency: Vec<Vec<(usize, W)>>,
    pub sinks: Vec<bool>,
}

impl<W: Weight> AdjacencyGraph<W> {
    pub fn new(n: usize) -> Self {
        Self { adjacency: vec![Vec::new(); n], sinks: vec![false; n] }
    }

    pub fn add_edge(&mut self, u: usize, v: usize, w: W) {
        self.adjacency[u].push((v, w));
        self.adjacency[v].push((u, w));
    }
}

impl<W: Weight> PathGraph<W> for AdjacencyGraph<W> {
    fn num_nodes(&self) -> usize {
        self.adjacency.len()
    }

    fn is_sink(&self, v: usize) -> bool {
        self.sinks[v]
    }

    fn for_each_neighbor<F: FnMut(usize, W)>(&self, v: usize, mut f: F) {
        for &(u, w) in &self.adjacency[v] {
            if w.is_finite() {
                f(u, w);
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem<W> {
    dist: W,
    node: usize,
}

impl<W: Weight> Eq for HeapItem<W> {}

impl<W: Weight> Ord for HeapItem<W> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .partial_cmp(&self.dist)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl<W: Weight> PartialOrd for HeapItem<W> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths. Unreached nodes have infinite distance.
#[derive(Clone, Debug)]
pub struct ShortestPaths<W> {
    pub source: usize,
    pub dist: Vec<W>,
    pub pred: Vec<usize>,
}

impl<W: Weight> ShortestPaths<W> {
    pub fn distance(&self, v: usize) -> W {
        self.dist[v]
    }

    pub fn reached(&self, v: usize) -> bool {
        self.dist[v].is_finite()
    }

    /// Node sequence from the source to `v`.
    pub fn path_to(&self, v: usize) -> Vec<usize> {
        assert!(self.reached(v), "node {v} unreachable");
        let mut path = vec![v];
        let mut cur = v;
        while cur != self.source {
            cur = self.pred[cur];
            path.push(cur);
        }
        path.reverse();
        path
    }
}

/// Dijkstra from `source`, stopping once every node in `targets` and at least one sink
/// (when `want_sink`) is settled.
pub fn shortest_paths_until<W: Weight, G: PathGraph<W>>(
    graph: &G,
    source: usize,
    targets: &[usize],
    want_sink: bool,
) -> ShortestPaths<W> {
    let n = graph.num_nodes();
    let mut dist = vec![W::infinity(); n];
    let mut pred = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut is_target = vec![false; n];
    for &t in targets {
        is_target[t] = true;
    }
    let mut remaining = targets.iter().filter(|&&t| t != source).count();
    let mut sink_found = !want_sink;
    let mut heap = BinaryHeap::new();
    dist[source] = W::zero();
    heap.push(HeapItem { dist: W::zero(), node: source });
    while let Some(HeapItem { dist: d, node: v }) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        if v != source && is_target[v] {
            remaining -= 1;
        }
        if graph.is_sink(v) && v != source {
            sink_found = true;
        }
        if remaining == 0 && sink_found {
            break;
        }
        if graph.is_sink(v) && v != source {
            continue;
        }
        graph.for_each_neighbor(v, |u, w| {
            let nd = d + w;
            if nd < dist[u] || (nd == dist[u] && v < pred[u] && !done[u]) {
                dist[u] = nd;
                pred[u] = v;
                heap.push(HeapItem { dist: nd, node: u });
            }
        });
    }
    ShortestPaths { source, dist, pred }
}

/// Full single-source shortest paths.
pub fn shortest_paths<W: Weight, G: PathGraph<W>>(graph: &G, source: usize) -> ShortestPaths<W> {
    let all: Vec<usize> = (0..graph.num_nodes()).collect();
    shortest_paths_until(graph, source, &all, false)
}

/// Partner of a highlighted vertex in a pairing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Partner {
    Vertex(usize),
    /// Matched to the given sink node.
    Boundary(usize),
}

/// One matched pair with its realizing path (node sequence from `from`).
#[derive(Clone, Debug, PartialEq)]
pub struct MatchedPair<W> {
    pub from: usize,
    pub to: Partner,
    pub weight: W,
    pub path: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Pairing<W> {
    pub pairs: Vec<MatchedPair<W>>,
    pub total: W,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MatchingError {
    #[error("highlighted vertex {0} cannot reach any other vertex or boundary")]
    Unreachable(usize),
}

fn to_int<W: Weight>(w: W) -> i64 {
    (w.to_f64().unwrap() * INTEGER_SCALE).round() as i64
}

/// Distance from every node to its nearest sink, with the next hop towards it.
struct BoundaryTree<W> {
    dist: Vec<W>,
    next: Vec<usize>,
}

fn boundary_tree<W: Weight, G: PathGraph<W>>(graph: &G) -> BoundaryTree<W> {
    let n = graph.num_nodes();
    let mut dist = vec![W::infinity(); n];
    let mut next = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for v in 0..n {
        if graph.is_sink(v) {
            dist[v] = W::zero();
            heap.push(HeapItem { dist: W::zero(), node: v });
        }
    }
    while let Some(HeapItem { dist: d, node: v }) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        graph.for_each_neighbor(v, |u, w| {
            if graph.is_sink(u) {
                return;
            }
            let nd = d + w;
            if nd < dist[u] || (nd == dist[u] && v < next[u] && !done[u]) {
                dist[u] = nd;
                next[u] = v;
                heap.push(HeapItem { dist: nd, node: u });
            }
        });
    }
    BoundaryTree { dist, next }
}

/// Reusable Dijkstra state that is reset only where it was touched.
struct Scratch<W> {
    dist: Vec<W>,
    done: Vec<bool>,
    touched: Vec<usize>,
    heap: BinaryHeap<HeapItem<W>>,
}

impl<W: Weight> Scratch<W> {
    fn new(n: usize) -> Self {
        Self { dist: vec![W::infinity(); n], done: vec![false; n], touched: Vec::new(), heap: BinaryHeap::new() }
    }

    fn reset(&mut self) {
        for &v in &self.touched {
            self.dist[v] = W::infinity();
            self.done[v] = false;
        }
        self.touched.clear();
        self.heap.clear();
    }
}

/// Dijkstra from `source` that settles nodes up to `radius`, writing predecessors into
/// `pred` and calling `on_settle` for each settled node.
fn bounded_search<W: Weight, G: PathGraph<W>>(
    graph: &G,
    source: usize,
    radius: W,
    scratch: &mut Scratch<W>,
    pred: &mut [u32],
    mut on_settle: impl FnMut(usize, W) -> bool,
) {
    scratch.reset();
    scratch.dist[source] = W::zero();
    scratch.touched.push(source);
    scratch.heap.push(HeapItem { dist: W::zero(), node: source });
    while let Some(HeapItem { dist: d, node: v }) = scratch.heap.pop() {
        if scratch.done[v] {
            continue;
        }
        if d > radius {
            break;
        }
        scratch.done[v] = true;
        if v != source && !on_settle(v, d) {
            break;
        }
        if v != source && graph.is_sink(v) {
            continue;
        }
        graph.for_each_neighbor(v, |u, w| {
            let nd = d + w;
            let cur = scratch.dist[u];
            if nd < cur || (nd == cur && (v as u32) < pred[u] && !scratch.done[u]) {
                if !cur.is_finite() {
                    scratch.touched.push(u);
                }
                scratch.dist[u] = nd;
                pred[u] = v as u32;
                scratch.heap.push(HeapItem { dist: nd, node: u });
            }
        });
    }
}

fn trace_back(pred: &[u32], source: usize, v: usize) -> Vec<usize> {
    let mut path = vec![v];
    let mut cur = v;
    while cur != source {
        cur = pred[cur] as usize;
        path.push(cur);
    }
    path.reverse();
    path
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Minimum-weight perfect matching of `highlighted` (distinct, non-sink nodes), where
/// each vertex may instead be matched to its nearest sink.
pub fn mwpm<W: Weight, G: PathGraph<W>>(
    graph: &G,
    highlighted: &[usize],
) -> Result<Pairing<W>, MatchingError> {
    let k = highlighted.len();
    if k == 0 {
        return Ok(Pairing { pairs: Vec::new(), total: W::zero() });
    }
    let n = graph.num_nodes();
    let bt = boundary_tree(graph);
    let bd: Vec<W> = highlighted.iter().map(|&h| bt.dist[h]).collect();
    let max_bd = bd.iter().copied().filter(|d| d.is_finite()).fold(W::zero(), W::max);
    let mut index = vec![usize::MAX; n];
    for (i, &h) in highlighted.iter().enumerate() {
        index[h] = i;
    }
    let mut scratch = Scratch::new(n);
    let mut preds = vec![u32::MAX; k * n];
    let mut edges: Vec<(usize, usize, W)> = Vec::new();
    for i in 0..k {
        let radius = if bd[i].is_finite() { bd[i] + max_bd } else { W::infinity() };
        let mut remaining = k - 1;
        let pred = &mut preds[i * n..(i + 1) * n];
        bounded_search(graph, highlighted[i], radius, &mut scratch, pred, |v, d| {
            let j = index[v];
            if j != usize::MAX {
                remaining -= 1;
                if j > i && (!bd[i].is_finite() || !bd[j].is_finite() || d < bd[i] + bd[j]) {
                    edges.push((i, j, d));
                }
            }
            remaining > 0
        });
    }
    let mut parent: Vec<usize> = (0..k).collect();
    for &(i, j, _) in &edges {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for i in 0..k {
        let r = find(&mut parent, i);
        members[r].push(i);
    }
    let mut comp_edges: Vec<Vec<(usize, usize, W)>> = vec![Vec::new(); k];
    for &e in &edges {
        comp_edges[find(&mut parent, e.0)].push(e);
    }
    let mut mate: Vec<Option<Partner>> = vec![None; k];
    for root in 0..k {
        let m = &members[root];
        if m.is_empty() {
            continue;
        }
        if m.len() == 1 {
            let i = m[0];
            if !bd[i].is_finite() {
                return Err(MatchingError::Unreachable(highlighted[i]));
            }
            mate[i] = Some(Partner::Boundary(usize::MAX));
            continue;
        }
        let size = m.len();
        let pos = |i: usize| m.binary_search(&i).expect("member of component");
        let mut es: Vec<(usize, usize, W)> = Vec::new();
        for &(i, j, d) in &comp_edges[root] {
            es.push((pos(i), pos(j), d));
        }
        let with_boundary: Vec<usize> = (0..size).filter(|&a| bd[m[a]].is_finite()).collect();
        for &a in &with_boundary {
            es.push((a, size + a, bd[m[a]]));
        }
        for (x, &a) in with_boundary.iter().enumerate() {
            for &b in &with_boundary[x + 1..] {
                es.push((size + a, size + b, W::zero()));
            }
        }
        let max_w = es.iter().map(|e| to_int(e.2)).max().unwrap_or(0);
        let big = max_w + 1;
        let int_edges: Vec<(usize, usize, i64)> = es.iter().map(|&(a, b, w)| (a, b, big - to_int(w))).collect();
        let result = max_weight_matching(2 * size, &int_edges, true);
        for a in 0..size {
            mate[m[a]] = match result[a] {
                Some(b) if b < size => Some(Partner::Vertex(m[b])),
                Some(_) => Some(Partner::Boundary(usize::MAX)),
                None => return Err(MatchingError::Unreachable(highlighted[m[a]])),
            };
        }
    }
    let mut pairs = Vec::new();
    let mut total = W::zero();
    for i in 0..k {
        match mate[i].expect("every vertex is matched") {
            Partner::Vertex(j) => {
                if i < j {
                    let pred = &preds[i * n..(i + 1) * n];
                    let path = trace_back(pred, highlighted[i], highlighted[j]);
                    let w = path_length(graph, &path);
                    total = total + w;
                    pairs.push(MatchedPair { from: highlighted[i], to: Partner::Vertex(highlighted[j]), weight: w, path });
                }
            }
            Partner::Boundary(_) => {
                let mut path = vec![highlighted[i]];
                let mut cur = highlighted[i];
                while !graph.is_sink(cur) {
                    cur = bt.next[cur];
                    path.push(cur);
                }
                total = total + bd[i];
                pairs.push(MatchedPair { from: highlighted[i], to: Partner::Boundary(cur), weight: bd[i], path });
            }
        }
    }
    Ok(Pairing { pairs, total })
}

/// Sum of edge weights along a node path, using the lightest parallel edge.
fn path_length<W: Weight, G: PathGraph<W>>(graph: &G, path: &[usize]) -> W {
    let mut total = W::zero();
    for win in path.windows(2) {
        let mut best = W::infinity();
        graph.for_each_neighbor(win[0], |u, w| {
            if u == win[1] && w < best {
                best = w;
            }
        });
        total = total + best;
    }
    total
}

/// Exhaustive minimum over all pairings, for small instances. Distances are supplied as
/// a symmetric matrix `dist[i][j]` and boundary distances `boundary[i]`.
pub fn brute_force_min<W: Weight>(dist: &[Vec<W>], boundary: &[W]) -> W {
    fn rec<W: Weight>(dist: &[Vec<W>], boundary: &[W], used: &mut Vec<bool>) -> W {
        let Some(i) = used.iter().position(|u| !u) else {
            return W::zero();
        };
        used[i] = true;
        let mut best = boundary[i] + rec(dist, boundary, used);
        for j in i + 1..used.len() {
            if !used[j] {
                used[j] = true;
                let c = dist[i][j] + rec(dist, boundary, used);
                if c < best {
                    best = c;
                }
                used[j] = false;
            }
        }
        used[i] = false;
        best
    }
    let mut used = vec![false; boundary.len()];
    rec(dist, boundary, &mut used)
}
