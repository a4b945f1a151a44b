//! Single-qubit Pauli labels and multi-qubit Pauli strings.
//!
//! A [`PauliString`] stores one label per qubit, qubit 0 first. Internally it
//! also keeps the symplectic masks (`x_mask`, `z_mask`) used by the
//! statevector kernels: for a computational basis index `i`,
//!
//! ```text
//! P |i> = i^{#Y} * (-1)^{popcount(i & z_mask)} |i ^ x_mask>
//! ```
//!
//! which follows from writing each `Y` as `i X Z`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Dense 2x2 matrix in row-major order.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }
}

/// A tensor product of single-qubit Paulis over a fixed register.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    ops: Vec<Pauli>,
    x_mask: usize,
    z_mask: usize,
}

impl PauliString {
    pub fn new(ops: Vec<Pauli>) -> Self {
        let mut x_mask = 0;
        let mut z_mask = 0;
        for (q, op) in ops.iter().enumerate() {
            match op {
                Pauli::I => {}
                Pauli::X => x_mask |= 1 << q,
                Pauli::Y => {
                    x_mask |= 1 << q;
                    z_mask |= 1 << q;
                }
                Pauli::Z => z_mask |= 1 << q,
            }
        }
        Self {
            ops,
            x_mask,
            z_mask,
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::new(vec![Pauli::I; n_qubits])
    }

    /// A string with a single non-identity factor.
    pub fn single(n_qubits: usize, qubit: usize, op: Pauli) -> Self {
        let mut ops = vec![Pauli::I; n_qubits];
        ops[qubit] = op;
        Self::new(ops)
    }

    pub fn n_qubits(&self) -> usize {
        self.ops.len()
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.ops
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        self.ops[qubit]
    }

    pub fn x_mask(&self) -> usize {
        self.x_mask
    }

    pub fn z_mask(&self) -> usize {
        self.z_mask
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    pub fn is_diagonal(&self) -> bool {
        self.x_mask == 0
    }

    /// Qubits carrying a non-identity factor, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.ops
            .iter()
            .enumerate()
            .filter(|(_, op)| **op != Pauli::I)
            .map(|(q, _)| q)
            .collect()
    }

    pub fn weight(&self) -> usize {
        (self.x_mask | self.z_mask).count_ones() as usize
    }

    pub fn y_count(&self) -> u32 {
        (self.x_mask & self.z_mask).count_ones()
    }

    /// `i^{#Y}`, the constant prefactor of the symplectic form.
    pub fn y_phase(&self) -> Complex64 {
        match self.y_count() % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// Image of basis state `index`: returns `(target, phase)` with
    /// `P|index> = phase |target>`.
    #[inline]
    pub fn apply_to_basis(&self, index: usize) -> (usize, Complex64) {
        let sign = if (index & self.z_mask).count_ones() % 2 == 1 {
            -1.0
        } else {
            1.0
        };
        (index ^ self.x_mask, self.y_phase() * sign)
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let a = (self.x_mask & other.z_mask).count_ones();
        let b = (self.z_mask & other.x_mask).count_ones();
        (a + b) % 2 == 0
    }

    pub fn label(&self) -> String {
        self.ops.iter().map(|p| p.as_char()).collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(label: &str) -> Result<Self> {
        let ops = label
            .chars()
            .enumerate()
            .map(|(position, found)| {
                Pauli::from_char(found).ok_or_else(|| Error::InvalidPauliLabel {
                    label: label.to_string(),
                    position,
                    found,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if ops.is_empty() {
            return Err(Error::Format("empty Pauli label".into()));
        }
        Ok(PauliString::new(ops))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masks_follow_labels() {
        let p: PauliString = "XYZI".parse().unwrap();
        assert_eq!(p.x_mask(), 0b0011);
        assert_eq!(p.z_mask(), 0b0110);
        assert_eq!(p.support(), vec![0, 1, 2]);
        assert_eq!(p.weight(), 3);
        assert_eq!(p.label(), "XYZI");
    }

    #[test]
    fn rejects_bad_character() {
        let err = "ZA".parse::<PauliString>().unwrap_err();
        assert!(matches!(err, Error::InvalidPauliLabel { position: 1, found: 'A', .. }));
    }

    #[test]
    fn basis_action_matches_single_qubit_matrices() {
        for op in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z] {
            let p = PauliString::new(vec![op]);
            let m = op.matrix();
            for col in 0..2 {
                let (row, phase) = p.apply_to_basis(col);
                assert_eq!(m[row][col], phase, "{op:?} column {col}");
            }
        }
    }

    #[test]
    fn commutation() {
        let xx: PauliString = "XX".parse().unwrap();
        let zz: PauliString = "ZZ".parse().unwrap();
        let zi: PauliString = "ZI".parse().unwrap();
        assert!(xx.commutes_with(&zz));
        assert!(!xx.commutes_with(&zi));
    }
}
