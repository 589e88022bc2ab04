//! Pauli operators on the data qubits, stored as separate X and Z bit-sets.

use bitvec::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Stabilizer or error type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
}

impl Basis {
    pub const BOTH: [Basis; 2] = [Basis::X, Basis::Z];

    pub fn other(self) -> Basis {
        match self {
            Basis::X => Basis::Z,
            Basis::Z => Basis::X,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Basis::X => 0,
            Basis::Z => 1,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::X => "X",
            Basis::Z => "Z",
        })
    }
}

/// Single-qubit Pauli as an (x, z) bit pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Pauli1 {
    pub x: bool,
    pub z: bool,
}

impl Pauli1 {
    pub const I: Pauli1 = Pauli1 { x: false, z: false };
    pub const X: Pauli1 = Pauli1 { x: true, z: false };
    pub const Z: Pauli1 = Pauli1 { x: false, z: true };
    pub const Y: Pauli1 = Pauli1 { x: true, z: true };
    /// The three nontrivial Paulis in the order X, Y, Z.
    pub const NONTRIVIAL: [Pauli1; 3] = [Pauli1::X, Pauli1::Y, Pauli1::Z];

    pub fn of(basis: Basis) -> Pauli1 {
        match basis {
            Basis::X => Pauli1::X,
            Basis::Z => Pauli1::Z,
        }
    }

    pub fn is_identity(self) -> bool {
        !self.x && !self.z
    }

    pub fn has(self, basis: Basis) -> bool {
        match basis {
            Basis::X => self.x,
            Basis::Z => self.z,
        }
    }

    pub fn symbol(self) -> char {
        match (self.x, self.z) {
            (false, false) => 'I',
            (true, false) => 'X',
            (false, true) => 'Z',
            (true, true) => 'Y',
        }
    }
}

/// Pauli operator on `n` data qubits, up to phase.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliMask {
    x: BitVec<u64, Lsb0>,
    z: BitVec<u64, Lsb0>,
}

impl PauliMask {
    pub fn identity(n: usize) -> Self {
        Self {
            x: bitvec![u64, Lsb0; 0; n],
            z: bitvec![u64, Lsb0; 0; n],
        }
    }

    /// Mask with the given Pauli type on every listed qubit.
    pub fn from_support(n: usize, basis: Basis, qubits: &[usize]) -> Self {
        let mut m = Self::identity(n);
        for &q in qubits {
            m.toggle(q, Pauli1::of(basis));
        }
        m
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn get(&self, q: usize) -> Pauli1 {
        Pauli1 {
            x: self.x[q],
            z: self.z[q],
        }
    }

    pub fn set(&mut self, q: usize, p: Pauli1) {
        self.x.set(q, p.x);
        self.z.set(q, p.z);
    }

    /// Multiplies qubit `q` by `p`.
    pub fn toggle(&mut self, q: usize, p: Pauli1) {
        if p.x {
            let v = self.x[q];
            self.x.set(q, !v);
        }
        if p.z {
            let v = self.z[q];
            self.z.set(q, !v);
        }
    }

    pub fn part(&self, basis: Basis) -> &BitSlice<u64, Lsb0> {
        match basis {
            Basis::X => &self.x,
            Basis::Z => &self.z,
        }
    }

    pub fn part_mut(&mut self, basis: Basis) -> &mut BitSlice<u64, Lsb0> {
        match basis {
            Basis::X => &mut self.x,
            Basis::Z => &mut self.z,
        }
    }

    /// Qubits carrying a nontrivial component of the given type.
    pub fn support(&self, basis: Basis) -> Vec<usize> {
        self.part(basis).iter_ones().collect()
    }

    /// Qubits carrying any nontrivial Pauli.
    pub fn full_support(&self) -> Vec<usize> {
        let mut any = self.x.clone();
        any |= &self.z;
        any.iter_ones().collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x.not_any() && self.z.not_any()
    }

    /// Number of qubits acted on nontrivially.
    pub fn weight(&self) -> usize {
        let mut any = self.x.clone();
        any |= &self.z;
        any.count_ones()
    }

    pub fn weight_of(&self, basis: Basis) -> usize {
        self.part(basis).count_ones()
    }

    /// Mask keeping only the component of one type.
    pub fn project(&self, basis: Basis) -> PauliMask {
        let mut out = PauliMask::identity(self.len());
        out.part_mut(basis).copy_from_bitslice(self.part(basis));
        out
    }

    /// Product of two Paulis up to phase.
    pub fn mul_assign(&mut self, other: &PauliMask) {
        assert_eq!(self.len(), other.len(), "mask length mismatch");
        self.x ^= &other.x;
        self.z ^= &other.z;
    }

    pub fn mul(&self, other: &PauliMask) -> PauliMask {
        let mut out = self.clone();
        out.mul_assign(other);
        out
    }

    /// True when the two operators commute.
    pub fn commutes_with(&self, other: &PauliMask) -> bool {
        let a = (self.x.clone() & &other.z).count_ones();
        let b = (self.z.clone() & &other.x).count_ones();
        (a + b) % 2 == 0
    }
}

impl fmt::Debug for PauliMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliMask(")?;
        let mut first = true;
        for q in 0..self.len() {
            let p = self.get(q);
            if !p.is_identity() {
                if !first {
                    write!(f, " ")?;
                }
                write!(f, "{}{}", p.symbol(), q)?;
                first = false;
            }
        }
        if first {
            write!(f, "I")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn y_sets_both_parts() {
        let mut m = PauliMask::identity(4);
        m.toggle(2, Pauli1::Y);
        assert!(m.part(Basis::X)[2] && m.part(Basis::Z)[2]);
        assert_eq!(m.weight(), 1);
        m.toggle(2, Pauli1::X);
        assert_eq!(m.get(2), Pauli1::Z);
    }

    #[test]
    fn overlap_parity_decides_commutation() {
        let a = PauliMask::from_support(5, Basis::X, &[0, 1]);
        let b = PauliMask::from_support(5, Basis::Z, &[1, 2]);
        let c = PauliMask::from_support(5, Basis::Z, &[0, 1]);
        assert!(!a.commutes_with(&b));
        assert!(a.commutes_with(&c));
    }
}
