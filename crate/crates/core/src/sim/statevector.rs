use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::PauliString;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense amplitude vector of length `2^n`. Bit `q` of an index is qubit `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// The computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[index] = ONE;
        Self { n_qubits, amps }
    }

    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    /// Wraps raw amplitudes; the length must be a power of two. Not normalized.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::Format(format!(
                "amplitude vector length {len} is not a power of two"
            )));
        }
        Ok(Self {
            n_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    /// `cos(theta)|a> + sin(theta)|b>`.
    pub fn two_level(n_qubits: usize, a: usize, b: usize, theta: f64) -> Self {
        let mut s = Self::basis(n_qubits, a);
        s.amps[a] = Complex64::new(theta.cos(), 0.0);
        s.amps[b] += Complex64::new(theta.sin(), 0.0);
        s
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Statevector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|psi> (x) |anc>` with the new qubits placed above the existing ones.
    pub fn tensor_with_zero(&self, extra: usize) -> Statevector {
        let mut amps = vec![ZERO; self.dim() << extra];
        amps[..self.dim()].copy_from_slice(&self.amps);
        Statevector {
            n_qubits: self.n_qubits + extra,
            amps,
        }
    }

    /// Probability that `qubit` reads 0.
    pub fn prob_zero(&self, qubit: usize) -> f64 {
        let bit = 1 << qubit;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    pub fn expectation(&self, p: &PauliString) -> f64 {
        let mut acc = ZERO;
        for (i, a) in self.amps.iter().enumerate() {
            let (j, phase) = p.apply_to_basis(i);
            acc += self.amps[j].conj() * phase * a;
        }
        acc.re
    }

    #[inline]
    pub fn h(&mut self, q: usize) {
        let bit = 1 << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let a = self.amps[i];
                let b = self.amps[i | bit];
                self.amps[i] = (a + b) * FRAC_1_SQRT_2;
                self.amps[i | bit] = (a - b) * FRAC_1_SQRT_2;
            }
        }
    }

    #[inline]
    pub fn x(&mut self, q: usize) {
        let bit = 1 << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                self.amps.swap(i, i | bit);
            }
        }
    }

    #[inline]
    pub fn y(&mut self, q: usize) {
        let bit = 1 << q;
        let i_unit = Complex64::new(0.0, 1.0);
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let a = self.amps[i];
                let b = self.amps[i | bit];
                self.amps[i] = -i_unit * b;
                self.amps[i | bit] = i_unit * a;
            }
        }
    }

    #[inline]
    pub fn z(&mut self, q: usize) {
        let bit = 1 << q;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & bit != 0 {
                *a = -*a;
            }
        }
    }

    /// `Rz(theta) = exp(-i theta Z / 2)`.
    #[inline]
    pub fn rz(&mut self, q: usize, theta: f64) {
        let bit = 1 << q;
        let lo = Complex64::from_polar(1.0, -theta / 2.0);
        let hi = lo.conj();
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= if i & bit == 0 { lo } else { hi };
        }
    }

    #[inline]
    pub fn cnot(&mut self, control: usize, target: usize) {
        let c = 1 << control;
        let t = 1 << target;
        for i in 0..self.amps.len() {
            if i & c != 0 && i & t == 0 {
                self.amps.swap(i, i | t);
            }
        }
    }

    /// `|psi> <- P |psi>`.
    pub fn apply_pauli(&mut self, p: &PauliString) {
        let mut out = vec![ZERO; self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let (j, phase) = p.apply_to_basis(i);
            out[j] = phase * a;
        }
        self.amps = out;
    }

    /// `exp(-i theta P / 2)`, optionally controlled on `control` being |1>.
    ///
    /// `p` must act on the full register; its factor on `control` is ignored
    /// only if it is the identity, which callers guarantee.
    pub fn pauli_rotation(&mut self, p: &PauliString, theta: f64, control: Option<usize>) {
        let (s, c) = (theta / 2.0).sin_cos();
        let cmask = control.map_or(0, |q| 1 << q);
        if p.is_identity() {
            // Global phase unless controlled.
            if cmask != 0 {
                let ph = Complex64::from_polar(1.0, -theta / 2.0);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & cmask != 0 {
                        *a *= ph;
                    }
                }
            }
            return;
        }
        let minus_i_sin = Complex64::new(0.0, -s);
        let x = p.x_mask();
        if x == 0 {
            let lo = Complex64::new(c, -s);
            let hi = Complex64::new(c, s);
            for (i, a) in self.amps.iter_mut().enumerate() {
                if i & cmask != cmask {
                    continue;
                }
                let (_, phase) = p.apply_to_basis(i);
                *a *= if phase.re > 0.0 { lo } else { hi };
            }
            return;
        }
        let pivot = 1usize << x.trailing_zeros();
        for i in 0..self.amps.len() {
            if i & pivot != 0 || i & cmask != cmask {
                continue;
            }
            let j = i ^ x;
            let (_, phase_i) = p.apply_to_basis(i); // P|i> = phase_i |j>
            let (_, phase_j) = p.apply_to_basis(j); // P|j> = phase_j |i>
            let ai = self.amps[i];
            let aj = self.amps[j];
            self.amps[i] = ai * c + minus_i_sin * phase_j * aj;
            self.amps[j] = aj * c + minus_i_sin * phase_i * ai;
        }
    }

    /// Multiplies every amplitude by `e^{i phi}`.
    pub fn global_phase(&mut self, phi: f64) {
        let ph = Complex64::from_polar(1.0, phi);
        self.amps.iter_mut().for_each(|a| *a *= ph);
    }
}
