//! Exact spectral data from dense diagonalization.
//!
//! This is both a building block (spectral norm for the normalization
//! factor, exact expectation values for the ideal backends) and the ground
//! truth used throughout the tests.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::PauliHamiltonian;
use crate::sim::Statevector;

/// Largest register handled by dense diagonalization.
pub const MAX_DENSE_QUBITS: usize = 12;

/// Eigenvalues below this separation are treated as one degenerate level.
const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SpectralData {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the eigenvector of `eigenvalues[i]`.
    pub eigenvectors: DMatrix<Complex64>,
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// `max_i |lambda_i|`.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues
            .iter()
            .fold(0.0f64, |m, &l| m.max(l.abs()))
    }

    /// Difference between the ground level and the next distinct level.
    pub fn gap(&self) -> Option<f64> {
        let e0 = self.eigenvalues[0];
        self.eigenvalues
            .iter()
            .find(|&&l| l - e0 > DEGENERACY_TOL)
            .map(|l| l - e0)
    }

    /// Number of eigenvectors spanning the ground level.
    pub fn ground_degeneracy(&self) -> usize {
        let e0 = self.eigenvalues[0];
        self.eigenvalues
            .iter()
            .take_while(|&&l| l - e0 <= DEGENERACY_TOL)
            .count()
    }

    pub fn eigenvector(&self, i: usize) -> Statevector {
        Statevector::from_amplitudes(self.eigenvectors.column(i).iter().copied().collect())
            .expect("eigenvector length is a power of two")
    }

    /// `<lambda_i|psi>` for every eigenvector.
    pub fn amplitudes_of(&self, state: &Statevector) -> Result<Vec<Complex64>> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: state.dim(),
            });
        }
        let psi = state.amplitudes();
        Ok((0..self.dim())
            .map(|i| {
                self.eigenvectors
                    .column(i)
                    .iter()
                    .zip(psi)
                    .map(|(v, a)| v.conj() * a)
                    .sum()
            })
            .collect())
    }

    /// `V diag(f(lambda)) V^dagger |psi>`.
    pub fn apply_function(
        &self,
        state: &Statevector,
        f: impl Fn(f64) -> Complex64,
    ) -> Result<Statevector> {
        let coeffs = self.amplitudes_of(state)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (i, c) in coeffs.iter().enumerate() {
            let w = c * f(self.eigenvalues[i]);
            for (o, v) in out.iter_mut().zip(self.eigenvectors.column(i).iter()) {
                *o += w * v;
            }
        }
        Statevector::from_amplitudes(out)
    }

    /// `exp(-i H t) |psi>` evaluated in the eigenbasis.
    pub fn evolve(&self, state: &Statevector, t: f64) -> Result<Statevector> {
        self.apply_function(state, |l| Complex64::from_polar(1.0, -l * t))
    }
}

/// Dense Hermitian diagonalization, eigenvalues ascending.
pub fn eigensystem(h: &PauliHamiltonian) -> Result<SpectralData> {
    if h.n_qubits() > MAX_DENSE_QUBITS {
        return Err(Error::DimensionTooLarge {
            n_qubits: h.n_qubits(),
            max: MAX_DENSE_QUBITS,
        });
    }
    let eig = h.to_matrix().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let dim = h.dim();
    let eigenvectors = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(SpectralData {
        eigenvalues,
        eigenvectors,
    })
}

/// `p_i = |<lambda_i|psi>|^2`.
pub fn overlaps(state: &Statevector, spec: &SpectralData) -> Result<Vec<f64>> {
    Ok(spec
        .amplitudes_of(state)?
        .into_iter()
        .map(|c| c.norm_sqr())
        .collect())
}

/// Overlap with the whole ground level (all eigenvectors degenerate with `lambda_0`).
pub fn ground_overlap(state: &Statevector, spec: &SpectralData) -> Result<f64> {
    let p = overlaps(state, spec)?;
    Ok(p[..spec.ground_degeneracy()].iter().sum())
}

/// `tau = pi / (4 ||H||_2)`, which maps the spectrum into `[-pi/4, pi/4]`.
pub fn default_tau(spec: &SpectralData) -> Result<f64> {
    let norm = spec.spectral_norm();
    if norm == 0.0 {
        return Err(Error::ZeroHamiltonian);
    }
    Ok(FRAC_PI_4 / norm)
}

/// Finds `theta` in `[0, pi/2]` with ground overlap of
/// `cos(theta)|a> + sin(theta)|b>` equal to `target_p0`.
///
/// The first crossing from `theta = 0` is returned.
pub fn calibrate_theta(
    spec: &SpectralData,
    basis_a: usize,
    basis_b: usize,
    target_p0: f64,
) -> Result<f64> {
    let dim = spec.dim();
    for idx in [basis_a, basis_b] {
        if idx >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: idx + 1,
            });
        }
    }
    let deg = spec.ground_degeneracy();
    // Ground-level components of the two basis states.
    let ca: Vec<Complex64> = (0..deg).map(|i| spec.eigenvectors[(basis_a, i)].conj()).collect();
    let cb: Vec<Complex64> = (0..deg).map(|i| spec.eigenvectors[(basis_b, i)].conj()).collect();
    let p0 = |theta: f64| -> f64 {
        let (s, c) = theta.sin_cos();
        ca.iter()
            .zip(&cb)
            .map(|(a, b)| (a * c + b * s).norm_sqr())
            .sum()
    };
    let f = |theta: f64| p0(theta) - target_p0;

    const SCAN: usize = 4096;
    let (mut lo_val, mut hi_val) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut prev_theta = 0.0;
    let mut prev = f(0.0);
    if prev.abs() < 1e-14 {
        return Ok(0.0);
    }
    for k in 1..=SCAN {
        let theta = FRAC_PI_2 * k as f64 / SCAN as f64;
        let cur = f(theta);
        lo_val = lo_val.min(cur + target_p0);
        hi_val = hi_val.max(cur + target_p0);
        if cur.abs() < 1e-14 {
            return Ok(theta);
        }
        if prev.signum() != cur.signum() {
            let (mut a, mut b) = (prev_theta, theta);
            let fa_sign = prev.signum();
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if f(m).signum() == fa_sign {
                    a = m;
                } else {
                    b = m;
                }
                if b - a < 1e-15 {
                    break;
                }
            }
            return Ok(0.5 * (a + b));
        }
        prev = cur;
        prev_theta = theta;
    }
    Err(Error::TargetUnreachable {
        target: target_p0,
        min: lo_val.min(p0(0.0)),
        max: hi_val.max(p0(0.0)),
    })
}

/// Parses a ket label such as `"0011"`; the rightmost character is qubit 0.
pub fn parse_ket(label: &str) -> Result<usize> {
    let label = label.trim().trim_start_matches('|').trim_end_matches('>');
    if label.is_empty() || label.len() > usize::BITS as usize {
        return Err(Error::Format(format!("bad ket label {label:?}")));
    }
    usize::from_str_radix(label, 2).map_err(|_| Error::Format(format!("bad ket label {label:?}")))
}
