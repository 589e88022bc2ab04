//! Triangular 6.6.6 color code lattice, its dual, and restricted lattices.
//!
//! Sites live on a triangular grid `(r, c)` with `0 <= c <= r < rows`. Sites with
//! `(r + c) % 3 == 1` are stabilizer faces, all others are data qubits. The three
//! sides of the triangle are `c == 0`, `r == c` and `r == rows - 1`.

use crate::pauli::{Basis, PauliMask};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

/// Neighbour offsets around a site, in cyclic order.
pub const RING: [(i32, i32); 6] = [(0, 1), (1, 1), (1, 0), (0, -1), (-1, -1), (-1, 0)];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("distance must be odd and at least 3, got {0}")]
    InvalidDistance(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    Red,
    Green,
    Blue,
}

impl Color {
    pub const ALL: [Color; 3] = [Color::Red, Color::Green, Color::Blue];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Color {
        Color::ALL[i % 3]
    }

    /// The color `k` steps further along R -> G -> B -> R.
    pub fn shift(self, k: usize) -> Color {
        Color::from_index(self.index() + k)
    }

    pub fn letter(self) -> char {
        ['R', 'G', 'B'][self.index()]
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// One of the three restricted lattices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ColorPair {
    RG,
    RB,
    GB,
}

impl ColorPair {
    pub const ALL: [ColorPair; 3] = [ColorPair::RG, ColorPair::RB, ColorPair::GB];

    pub fn colors(self) -> [Color; 2] {
        match self {
            ColorPair::RG => [Color::Red, Color::Green],
            ColorPair::RB => [Color::Red, Color::Blue],
            ColorPair::GB => [Color::Green, Color::Blue],
        }
    }

    pub fn contains(self, c: Color) -> bool {
        self.colors().contains(&c)
    }

    pub fn missing(self) -> Color {
        match self {
            ColorPair::RG => Color::Blue,
            ColorPair::RB => Color::Green,
            ColorPair::GB => Color::Red,
        }
    }

    pub fn from_colors(a: Color, b: Color) -> Option<ColorPair> {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        match (a, b) {
            (Color::Red, Color::Green) => Some(ColorPair::RG),
            (Color::Red, Color::Blue) => Some(ColorPair::RB),
            (Color::Green, Color::Blue) => Some(ColorPair::GB),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ColorPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b] = self.colors();
        write!(f, "{}{}", a, b)
    }
}

impl std::str::FromStr for ColorPair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "RG" | "GR" => Ok(ColorPair::RG),
            "RB" | "BR" => Ok(ColorPair::RB),
            "GB" | "BG" => Ok(ColorPair::GB),
            _ => Err(format!("invalid color pair {s:?}")),
        }
    }
}

/// A stabilizer face of the primal lattice.
#[derive(Clone, Debug, Serialize)]
pub struct Face {
    pub color: Color,
    pub coord: (i32, i32),
    /// Qubit at each of the six ring positions, `None` outside the triangle.
    pub ring: [Option<usize>; 6],
    /// Qubits in ring order.
    pub qubits: Vec<usize>,
    /// Side index for weight-4 faces.
    pub boundary: Option<usize>,
}

impl Face {
    pub fn weight(&self) -> usize {
        self.qubits.len()
    }
}

/// Primal lattice of the distance-`d` triangular color code.
#[derive(Clone, Debug)]
pub struct ColorLattice {
    pub distance: usize,
    pub rows: i32,
    pub qubit_coords: Vec<(i32, i32)>,
    pub faces: Vec<Face>,
    /// Color of the boundary along each side.
    pub side_colors: [Color; 3],
    /// Bit `k` set when the qubit lies on side `k`.
    pub qubit_sides: Vec<u8>,
    /// Primal edges as qubit pairs.
    pub edges: Vec<(usize, usize)>,
    /// Qubits supporting both logical representatives.
    pub logical_support: Vec<usize>,
    site_index: HashMap<(i32, i32), usize>,
}

impl ColorLattice {
    pub fn num_qubits(&self) -> usize {
        self.qubit_coords.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn qubit_at(&self, r: i32, c: i32) -> Option<usize> {
        self.site_index.get(&(r, c)).copied()
    }

    /// Faces containing each qubit.
    pub fn faces_of_qubit(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_qubits()];
        for (f, face) in self.faces.iter().enumerate() {
            for &q in &face.qubits {
                out[q].push(f);
            }
        }
        out
    }

    /// Stabilizer of one type supported on a face.
    pub fn stabilizer(&self, face: usize, basis: Basis) -> PauliMask {
        PauliMask::from_support(self.num_qubits(), basis, &self.faces[face].qubits)
    }

    pub fn logical(&self, basis: Basis) -> PauliMask {
        PauliMask::from_support(self.num_qubits(), basis, &self.logical_support)
    }
}

/// Total data, ancilla and flag qubit count of the planar layout, `(3d-1)^2 / 4`.
pub fn layout_qubit_count(d: usize) -> usize {
    (3 * d - 1) * (3 * d - 1) / 4
}

fn on_sides(r: i32, c: i32, rows: i32) -> u8 {
    let mut m = 0;
    if c == 0 {
        m |= 1;
    }
    if r == c {
        m |= 2;
    }
    if r == rows - 1 {
        m |= 4;
    }
    m
}

/// Builds the distance-`d` lattice.
pub fn build_lattice(d: usize) -> Result<ColorLattice, LatticeError> {
    if d < 3 || d % 2 == 0 {
        return Err(LatticeError::InvalidDistance(d));
    }
    let rows = (3 * (d - 1) / 2 + 1) as i32;
    let inside = |r: i32, c: i32| 0 <= c && c <= r && r < rows;
    let mut qubit_coords = Vec::new();
    let mut site_index = HashMap::new();
    for r in 0..rows {
        for c in 0..=r {
            if (r + c) % 3 != 1 {
                site_index.insert((r, c), qubit_coords.len());
                qubit_coords.push((r, c));
            }
        }
    }
    let qubit_sides: Vec<u8> = qubit_coords.iter().map(|&(r, c)| on_sides(r, c, rows)).collect();

    let mut faces = Vec::new();
    for r in 0..rows {
        for c in 0..=r {
            if (r + c) % 3 != 1 {
                continue;
            }
            let mut ring = [None; 6];
            for (k, (dr, dc)) in RING.iter().enumerate() {
                let (rr, cc) = (r + dr, c + dc);
                if inside(rr, cc) {
                    ring[k] = Some(site_index[&(rr, cc)]);
                }
            }
            let qubits: Vec<usize> = ring.iter().flatten().copied().collect();
            let boundary = if qubits.len() == 6 {
                None
            } else {
                let mut ends = 0u8;
                let mut first = true;
                for k in 0..6 {
                    let (a, b) = (ring[k], ring[(k + 1) % 6]);
                    if a.is_some() != b.is_some() {
                        let q = a.or(b).unwrap();
                        ends = if first { qubit_sides[q] } else { ends & qubit_sides[q] };
                        first = false;
                    }
                }
                assert_eq!(ends.count_ones(), 1, "face ({r},{c}) has ambiguous boundary side");
                Some(ends.trailing_zeros() as usize)
            };
            faces.push(Face {
                color: Color::from_index(r as usize),
                coord: (r, c),
                ring,
                qubits,
                boundary,
            });
        }
    }

    let mut side_colors = [Color::Red; 3];
    for (k, side_color) in side_colors.iter_mut().enumerate() {
        let mut present = [false; 3];
        for face in &faces {
            if face.qubits.iter().any(|&q| qubit_sides[q] & (1 << k) != 0) {
                present[face.color.index()] = true;
            }
        }
        let absent: Vec<usize> = (0..3).filter(|&i| !present[i]).collect();
        assert_eq!(absent.len(), 1, "side {k} must miss exactly one color");
        *side_color = Color::from_index(absent[0]);
    }

    let mut edge_set = std::collections::BTreeSet::new();
    for face in &faces {
        let q = &face.qubits;
        for i in 0..q.len() {
            let (a, b) = (q[i], q[(i + 1) % q.len()]);
            edge_set.insert((a.min(b), a.max(b)));
        }
    }
    let logical_support = (0..qubit_coords.len())
        .filter(|&q| qubit_sides[q] & 1 != 0)
        .collect();

    Ok(ColorLattice {
        distance: d,
        rows,
        qubit_coords,
        faces,
        side_colors,
        qubit_sides,
        edges: edge_set.into_iter().collect(),
        logical_support,
        site_index,
    })
}

/// Logical class of a Pauli mask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LogicalClass {
    Trivial,
    LogicalX,
    LogicalZ,
    LogicalY,
    NotInNormalizer,
}

impl LogicalClass {
    /// True when the operator has a logical component of the given type.
    pub fn flips(self, basis: Basis) -> bool {
        matches!(
            (self, basis),
            (LogicalClass::LogicalX, Basis::X)
                | (LogicalClass::LogicalZ, Basis::Z)
                | (LogicalClass::LogicalY, _)
        )
    }
}

/// Dual lattice: vertices are faces plus three boundary vertices, triangles are qubits.
#[derive(Clone, Debug)]
pub struct DualLattice {
    pub lattice: ColorLattice,
    /// Color of every dual vertex; faces first, then `v_R`, `v_G`, `v_B`.
    pub vertex_colors: Vec<Color>,
    /// Corners of each qubit's triangle, indexed by color.
    pub triangles: Vec<[usize; 3]>,
    /// Edges as sorted vertex pairs, in increasing order.
    pub edges: Vec<(usize, usize)>,
    edge_index: HashMap<(usize, usize), usize>,
    /// Qubits whose triangle contains each vertex, increasing.
    pub stars: Vec<Vec<usize>>,
    /// Edge ids incident to each vertex.
    pub incident: Vec<Vec<usize>>,
    /// Qubits whose triangle contains each edge.
    pub edge_triangles: Vec<Vec<usize>>,
}

impl DualLattice {
    pub fn num_faces(&self) -> usize {
        self.lattice.num_faces()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_colors.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.lattice.num_qubits()
    }

    pub fn boundary_vertex(&self, c: Color) -> usize {
        self.num_faces() + c.index()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        v >= self.num_faces()
    }

    pub fn color(&self, v: usize) -> Color {
        self.vertex_colors[v]
    }

    pub fn edge_id(&self, u: usize, v: usize) -> Option<usize> {
        self.edge_index.get(&(u.min(v), u.max(v))).copied()
    }

    /// Non-boundary vertices with odd overlap with the error's `error_type` part.
    pub fn syndrome_of(&self, error: &PauliMask, error_type: Basis) -> Vec<usize> {
        let part = error.part(error_type);
        self.lattice
            .faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.qubits.iter().filter(|&&q| part[q]).count() % 2 == 1)
            .map(|(i, _)| i)
            .collect()
    }

    /// Syndrome of an explicit qubit set.
    pub fn syndrome_of_support(&self, qubits: &[usize]) -> Vec<usize> {
        let mut parity = vec![false; self.num_faces()];
        for &q in qubits {
            for &v in &self.triangles[q] {
                if v < parity.len() {
                    parity[v] ^= true;
                }
            }
        }
        (0..parity.len()).filter(|&v| parity[v]).collect()
    }

    pub fn logical_class(&self, mask: &PauliMask) -> LogicalClass {
        if !self.syndrome_of(mask, Basis::X).is_empty() || !self.syndrome_of(mask, Basis::Z).is_empty()
        {
            return LogicalClass::NotInNormalizer;
        }
        let odd = |basis: Basis| {
            let part = mask.part(basis);
            self.lattice.logical_support.iter().filter(|&&q| part[q]).count() % 2 == 1
        };
        match (odd(Basis::X), odd(Basis::Z)) {
            (false, false) => LogicalClass::Trivial,
            (true, false) => LogicalClass::LogicalX,
            (false, true) => LogicalClass::LogicalZ,
            (true, true) => LogicalClass::LogicalY,
        }
    }

    pub fn restrict(&self, pair: ColorPair) -> RestrictedLattice {
        let vertices: Vec<usize> = (0..self.num_vertices())
            .filter(|&v| pair.contains(self.vertex_colors[v]))
            .collect();
        let edges = (0..self.edges.len())
            .filter(|&e| {
                let (u, v) = self.edges[e];
                pair.contains(self.vertex_colors[u]) && pair.contains(self.vertex_colors[v])
            })
            .collect();
        RestrictedLattice { pair, vertices, edges }
    }
}

/// Dual vertices and edges of two colors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RestrictedLattice {
    pub pair: ColorPair,
    pub vertices: Vec<usize>,
    /// Dual edge ids.
    pub edges: Vec<usize>,
}

pub fn build_dual(lattice: ColorLattice) -> DualLattice {
    let nf = lattice.num_faces();
    let mut vertex_colors: Vec<Color> = lattice.faces.iter().map(|f| f.color).collect();
    vertex_colors.extend(Color::ALL);
    let faces_of = lattice.faces_of_qubit();
    let mut triangles = Vec::with_capacity(lattice.num_qubits());
    for q in 0..lattice.num_qubits() {
        let mut tri = [usize::MAX; 3];
        let mut place = |v: usize, c: Color| {
            assert_eq!(tri[c.index()], usize::MAX, "qubit {q} has two corners of color {c}");
            tri[c.index()] = v;
        };
        for &f in &faces_of[q] {
            place(f, lattice.faces[f].color);
        }
        for k in 0..3 {
            if lattice.qubit_sides[q] & (1 << k) != 0 {
                let c = lattice.side_colors[k];
                place(nf + c.index(), c);
            }
        }
        assert!(tri.iter().all(|&v| v != usize::MAX), "qubit {q} triangle incomplete");
        triangles.push(tri);
    }
    let mut edge_set = std::collections::BTreeSet::new();
    for tri in &triangles {
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let (u, v) = (tri[i].min(tri[j]), tri[i].max(tri[j]));
            if u >= nf && v >= nf {
                continue;
            }
            edge_set.insert((u, v));
        }
    }
    let edges: Vec<(usize, usize)> = edge_set.into_iter().collect();
    let edge_index: HashMap<(usize, usize), usize> =
        edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let nv = vertex_colors.len();
    let mut stars = vec![Vec::new(); nv];
    for (q, tri) in triangles.iter().enumerate() {
        for &v in tri {
            stars[v].push(q);
        }
    }
    let mut incident = vec![Vec::new(); nv];
    for (e, &(u, v)) in edges.iter().enumerate() {
        incident[u].push(e);
        incident[v].push(e);
    }
    let mut edge_triangles = vec![Vec::new(); edges.len()];
    for (q, tri) in triangles.iter().enumerate() {
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            if let Some(&e) = edge_index.get(&(tri[i].min(tri[j]), tri[i].max(tri[j]))) {
                edge_triangles[e].push(q);
            }
        }
    }
    DualLattice {
        lattice,
        vertex_colors,
        triangles,
        edges,
        edge_index,
        stars,
        incident,
        edge_triangles,
    }
}

/// Convenience constructor for the dual lattice at distance `d`.
pub fn dual_lattice(d: usize) -> Result<DualLattice, LatticeError> {
    Ok(build_dual(build_lattice(d)?))
}

/// JSON view of the lattice for inspection.
#[derive(Serialize)]
pub struct LatticeDump {
    pub distance: usize,
    pub qubits: Vec<QubitDump>,
    pub faces: Vec<FaceDump>,
    pub boundaries: Vec<BoundaryDump>,
    pub dual_edges: Vec<(usize, usize)>,
}

#[derive(Serialize)]
pub struct QubitDump {
    pub id: usize,
    pub row: i32,
    pub col: i32,
    pub triangle: [usize; 3],
}

#[derive(Serialize)]
pub struct FaceDump {
    pub id: usize,
    pub color: Color,
    pub row: i32,
    pub col: i32,
    pub qubits: Vec<usize>,
    pub boundary_side: Option<usize>,
}

#[derive(Serialize)]
pub struct BoundaryDump {
    pub side: usize,
    pub color: Color,
    pub vertex: usize,
    pub qubits: Vec<usize>,
}

impl DualLattice {
    pub fn dump(&self) -> LatticeDump {
        let l = &self.lattice;
        LatticeDump {
            distance: l.distance,
            qubits: (0..l.num_qubits())
                .map(|q| QubitDump {
                    id: q,
                    row: l.qubit_coords[q].0,
                    col: l.qubit_coords[q].1,
                    triangle: self.triangles[q],
                })
                .collect(),
            faces: l
                .faces
                .iter()
                .enumerate()
                .map(|(i, f)| FaceDump {
                    id: i,
                    color: f.color,
                    row: f.coord.0,
                    col: f.coord.1,
                    qubits: f.qubits.clone(),
                    boundary_side: f.boundary,
                })
                .collect(),
            boundaries: (0..3)
                .map(|k| BoundaryDump {
                    side: k,
                    color: l.side_colors[k],
                    vertex: self.boundary_vertex(l.side_colors[k]),
                    qubits: (0..l.num_qubits()).filter(|&q| l.qubit_sides[q] & (1 << k) != 0).collect(),
                })
                .collect(),
            dual_edges: self.edges.clone(),
        }
    }
}
