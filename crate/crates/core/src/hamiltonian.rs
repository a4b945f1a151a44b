//! Weighted Pauli sums and their on-disk format.
//!
//! The file format is a JSON document:
//!
//! ```json
//! {"n_qubits": 2, "terms": [["ZI", 0.5], ["XX", -0.25]]}
//! ```
//!
//! Labels carry one character per qubit with qubit 0 leftmost. Duplicate
//! labels are merged additively, keeping the position of the first
//! occurrence.

use std::collections::HashMap;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliString;

#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub string: PauliString,
}

/// `H = sum_i h_i P_i` with real coefficients (in Hartree for chemistry inputs).
#[derive(Debug, Clone, PartialEq)]
pub struct PauliHamiltonian {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
}

#[derive(Serialize, Deserialize)]
struct HamiltonianDoc {
    n_qubits: usize,
    terms: Vec<(String, f64)>,
}

impl PauliHamiltonian {
    /// Builds a Hamiltonian from `(coefficient, string)` pairs, merging duplicates.
    pub fn new(n_qubits: usize, terms: impl IntoIterator<Item = (f64, PauliString)>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::param("n_qubits", "must be positive"));
        }
        let mut merged: Vec<PauliTerm> = Vec::new();
        let mut index: HashMap<PauliString, usize> = HashMap::new();
        for (coefficient, string) in terms {
            if string.n_qubits() != n_qubits {
                return Err(Error::QubitCountMismatch {
                    expected: n_qubits,
                    found: string.n_qubits(),
                });
            }
            if !coefficient.is_finite() {
                return Err(Error::NonFiniteCoefficient {
                    label: string.label(),
                });
            }
            match index.get(&string) {
                Some(&i) => merged[i].coefficient += coefficient,
                None => {
                    index.insert(string.clone(), merged.len());
                    merged.push(PauliTerm {
                        coefficient,
                        string,
                    });
                }
            }
        }
        Ok(Self {
            n_qubits,
            terms: merged,
        })
    }

    pub fn from_labels(n_qubits: usize, terms: &[(&str, f64)]) -> Result<Self> {
        let parsed = terms
            .iter()
            .map(|(label, c)| Ok((*c, label.parse::<PauliString>()?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n_qubits, parsed)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    /// Multiplies every coefficient by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .map(|t| PauliTerm {
                    coefficient: t.coefficient * factor,
                    string: t.string.clone(),
                })
                .collect(),
        }
    }

    /// Coefficient of the all-identity term, zero when absent.
    pub fn identity_coefficient(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.string.is_identity())
            .map(|t| t.coefficient)
            .sum()
    }

    /// Dense matrix in the computational basis (bit `q` of the index is qubit `q`).
    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let dim = self.dim();
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for term in &self.terms {
            for col in 0..dim {
                let (row, phase) = term.string.apply_to_basis(col);
                m[(row, col)] += phase * term.coefficient;
            }
        }
        m
    }

    /// `H |psi>` without forming the matrix.
    pub fn apply(&self, amplitudes: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); amplitudes.len()];
        for term in &self.terms {
            for (col, a) in amplitudes.iter().enumerate() {
                let (row, phase) = term.string.apply_to_basis(col);
                out[row] += phase * term.coefficient * a;
            }
        }
        out
    }

    /// Parses the JSON document format.
    pub fn parse(text: &str) -> Result<Self> {
        let doc: HamiltonianDoc = serde_json::from_str(text)?;
        let terms = doc
            .terms
            .into_iter()
            .map(|(label, c)| Ok((c, label.parse::<PauliString>()?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(doc.n_qubits, terms)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let doc = HamiltonianDoc {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .map(|t| (t.string.label(), t.coefficient))
                .collect(),
        };
        serde_json::to_string(&doc).expect("hamiltonian serializes")
    }
}
