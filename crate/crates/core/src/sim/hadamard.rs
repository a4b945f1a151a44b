//! One-ancilla Hadamard test for `<psi| exp(-iHt) |psi>`.
//!
//! Circuit on `n + 1` qubits, ancilla on qubit `n`:
//! `H(anc)`, optional `Sdg(anc)` for the imaginary part, controlled
//! evolution, `H(anc)`, measure the ancilla. Outcome `0` is reported as
//! `+1`, so `E[shot] = Re<U>` (or `Im<U>` for the `Sdg` variant).

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::PauliHamiltonian;
use crate::sim::circuit::{Circuit, Gate};
use crate::sim::noise::NoiseModel;
use crate::sim::trotter::{trotter_expectation, trotter_ir};
use crate::sim::Statevector;
use crate::spectral::{overlaps, SpectralData};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Real,
    Imaginary,
}

/// How the controlled evolution is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "steps")]
pub enum Evolution {
    /// Exact `exp(-iHt)`; no circuit, so no gate noise.
    Exact,
    /// First-order Trotter product with this many steps.
    Trotter(usize),
}

/// `sum_i p_i exp(-i lambda_i t)`, precomputed from the eigensystem.
#[derive(Debug, Clone)]
pub struct SpectralExpectation {
    eigenvalues: Vec<f64>,
    weights: Vec<f64>,
}

impl SpectralExpectation {
    pub fn new(spec: &SpectralData, psi: &Statevector) -> Result<Self> {
        let p = overlaps(psi, spec)?;
        let (eigenvalues, weights) = spec
            .eigenvalues
            .iter()
            .zip(&p)
            .filter(|(_, w)| **w > 0.0)
            .map(|(l, w)| (*l, *w))
            .unzip();
        Ok(Self {
            eigenvalues,
            weights,
        })
    }

    pub fn at(&self, t: f64) -> Complex64 {
        self.eigenvalues
            .iter()
            .zip(&self.weights)
            .map(|(l, w)| Complex64::from_polar(*w, -l * t))
            .sum()
    }
}

/// `<psi| exp(-iHt) |psi> = sum_i p_i exp(-i lambda_i t)`.
pub fn exact_evolution_expectation(spec: &SpectralData, psi: &Statevector, t: f64) -> Result<Complex64> {
    Ok(SpectralExpectation::new(spec, psi)?.at(t))
}

/// Builds the transpiled Hadamard-test circuit with a Trotterized controlled evolution.
pub fn hadamard_test_circuit(h: &PauliHamiltonian, t: f64, part: Part, steps: usize) -> Result<Circuit> {
    let anc = h.n_qubits();
    let mut c = Circuit::new(anc + 1);
    c.push(Gate::H(anc))?;
    if part == Part::Imaginary {
        c.push(Gate::Sdg(anc))?;
    }
    c.extend(&trotter_ir(h, t, steps, Some(anc))?)?;
    c.push(Gate::H(anc))?;
    Ok(c.transpile())
}

/// A Hadamard test at a fixed `(t, part)`, ready to produce shots.
#[derive(Debug, Clone)]
pub struct PreparedTest {
    /// Noiseless probability of outcome `+1`.
    pub p_plus: f64,
    circuit: Option<Circuit>,
    rz_count: usize,
}

impl PreparedTest {
    pub fn rz_count(&self) -> usize {
        self.rz_count
    }

    pub fn circuit(&self) -> Option<&Circuit> {
        self.circuit.as_ref()
    }
}

/// Shot generator for one `(H, psi)` pair.
///
/// Noiseless outcome probabilities come from the eigensystem (exact
/// evolution) or from the Trotter product applied to `psi`. Noisy shots
/// first decide whether any `Rz` failed; only then is the gate-level circuit
/// simulated with the sampled error pattern.
#[derive(Debug, Clone)]
pub struct HadamardTest<'a> {
    h: &'a PauliHamiltonian,
    psi: &'a Statevector,
    evolution: Evolution,
    noise: Option<NoiseModel>,
    spectral: Option<SpectralExpectation>,
    input: Statevector,
}

impl<'a> HadamardTest<'a> {
    pub fn new(
        h: &'a PauliHamiltonian,
        psi: &'a Statevector,
        spec: Option<&SpectralData>,
        evolution: Evolution,
        noise: Option<NoiseModel>,
    ) -> Result<Self> {
        if psi.n_qubits() != h.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: h.dim(),
                found: psi.dim(),
            });
        }
        let noise = noise.filter(|n| n.p_phys > 0.0);
        let spectral = match evolution {
            Evolution::Exact => {
                if noise.is_some() {
                    return Err(Error::param(
                        "noise",
                        "gate noise needs a circuit; use Trotter evolution",
                    ));
                }
                let spec = spec.ok_or_else(|| Error::param("spectral", "exact evolution needs the eigensystem"))?;
                Some(SpectralExpectation::new(spec, psi)?)
            }
            Evolution::Trotter(r) => {
                if r == 0 {
                    return Err(Error::param("trotter_steps", "must be at least 1"));
                }
                None
            }
        };
        Ok(Self {
            h,
            psi,
            evolution,
            noise,
            spectral,
            input: psi.tensor_with_zero(1),
        })
    }

    pub fn noise(&self) -> Option<&NoiseModel> {
        self.noise.as_ref()
    }

    /// Noiseless `<psi| U(t) |psi>` for the configured evolution.
    pub fn expectation(&self, t: f64) -> Result<Complex64> {
        match self.evolution {
            Evolution::Exact => Ok(self.spectral.as_ref().expect("exact evolution").at(t)),
            Evolution::Trotter(r) => trotter_expectation(self.h, self.psi, t, r),
        }
    }

    pub fn prepare(&self, t: f64, part: Part) -> Result<PreparedTest> {
        let u = self.expectation(t)?;
        let mean = match part {
            Part::Real => u.re,
            Part::Imaginary => u.im,
        };
        let p_plus = (0.5 * (1.0 + mean)).clamp(0.0, 1.0);
        let (circuit, rz_count) = match (self.evolution, self.noise) {
            (Evolution::Trotter(r), Some(_)) => {
                let c = hadamard_test_circuit(self.h, t, part, r)?;
                let n = c.rz_count();
                (Some(c), n)
            }
            _ => (None, 0),
        };
        Ok(PreparedTest {
            p_plus,
            circuit,
            rz_count,
        })
    }

    pub fn shot<R: Rng + ?Sized>(&self, test: &PreparedTest, rng: &mut R) -> Result<i8> {
        let p_plus = match (&self.noise, &test.circuit) {
            (Some(noise), Some(circuit)) => {
                let survive = noise.survival(test.rz_count);
                if rng.random::<f64>() < survive {
                    test.p_plus
                } else {
                    let sites = noise.sample_sites_nonempty(test.rz_count, rng);
                    let mut state = self.input.clone();
                    circuit.apply_with_errors(&mut state, &sites)?;
                    state.prob_zero(self.h.n_qubits())
                }
            }
            _ => test.p_plus,
        };
        Ok(if rng.random::<f64>() < p_plus { 1 } else { -1 })
    }
}

/// Runs a single Hadamard-test shot, building everything from scratch.
pub fn hadamard_test_shot<R: Rng + ?Sized>(
    h: &PauliHamiltonian,
    spec: Option<&SpectralData>,
    psi: &Statevector,
    t: f64,
    part: Part,
    evolution: Evolution,
    noise: Option<NoiseModel>,
    rng: &mut R,
) -> Result<i8> {
    let test = HadamardTest::new(h, psi, spec, evolution, noise)?;
    let prepared = test.prepare(t, part)?;
    test.shot(&prepared, rng)
}
