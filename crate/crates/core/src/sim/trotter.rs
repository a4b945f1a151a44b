//! First-order Trotter product `[prod_i exp(-i h_i t P_i / r)]^r`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::PauliHamiltonian;
use crate::pauli::{Pauli, PauliString};
use crate::sim::circuit::{Circuit, Gate};
use crate::sim::Statevector;
use crate::spectral::SpectralData;

fn pad(p: &PauliString, n: usize) -> PauliString {
    let mut ops = p.ops().to_vec();
    ops.resize(n, Pauli::I);
    PauliString::new(ops)
}

fn check_steps(r: usize) -> Result<()> {
    if r == 0 {
        return Err(Error::param("trotter_steps", "must be at least 1"));
    }
    Ok(())
}

/// Pre-transpilation circuit of `r` Trotter steps.
///
/// With `control = Some(c)` the register has `c + 1` qubits and `c` must lie
/// above the system qubits; every rotation (including the identity term,
/// which becomes a relative phase) is controlled on `c`.
pub fn trotter_ir(h: &PauliHamiltonian, t: f64, r: usize, control: Option<usize>) -> Result<Circuit> {
    check_steps(r)?;
    let n = h.n_qubits();
    let width = match control {
        Some(c) if c < n => {
            return Err(Error::param(
                "control_qubit",
                format!("{c} overlaps the {n} system qubits"),
            ))
        }
        Some(c) => c + 1,
        None => n,
    };
    let mut circuit = Circuit::new(width);
    let rotations: Vec<(PauliString, f64)> = h
        .terms()
        .iter()
        .filter(|term| control.is_some() || !term.string.is_identity())
        .map(|term| (pad(&term.string, width), 2.0 * term.coefficient * t / r as f64))
        .collect();
    for _ in 0..r {
        for (pauli, angle) in &rotations {
            circuit.push(Gate::PauliRotation {
                pauli: pauli.clone(),
                angle: *angle,
                control,
            })?;
        }
    }
    Ok(circuit)
}

/// Trotter circuit lowered to `{H, CNOT, Rz}`.
pub fn trotter_evolution_circuit(
    h: &PauliHamiltonian,
    t: f64,
    r: usize,
    control: Option<usize>,
) -> Result<Circuit> {
    Ok(trotter_ir(h, t, r, control)?.transpile())
}

/// Applies the Trotter product directly to a system state, including the
/// identity-term phase.
pub fn trotter_evolve(h: &PauliHamiltonian, psi: &Statevector, t: f64, r: usize) -> Result<Statevector> {
    check_steps(r)?;
    if psi.n_qubits() != h.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: psi.dim(),
        });
    }
    let mut state = psi.clone();
    let dt = t / r as f64;
    let phase = -h.identity_coefficient() * t;
    let steps: Vec<(&PauliString, f64)> = h
        .terms()
        .iter()
        .filter(|term| !term.string.is_identity())
        .map(|term| (&term.string, 2.0 * term.coefficient * dt))
        .collect();
    for _ in 0..r {
        for (p, angle) in &steps {
            state.pauli_rotation(p, *angle, None);
        }
    }
    state.global_phase(phase);
    Ok(state)
}

/// `<psi| U_r(t) |psi>` for the Trotterized evolution.
pub fn trotter_expectation(h: &PauliHamiltonian, psi: &Statevector, t: f64, r: usize) -> Result<Complex64> {
    Ok(psi.inner(&trotter_evolve(h, psi, t, r)?))
}

/// `|<psi(t)_exact | psi(t)_trotter>|^2`.
pub fn trotter_state_fidelity(
    h: &PauliHamiltonian,
    spec: &SpectralData,
    psi: &Statevector,
    t: f64,
    r: usize,
) -> Result<f64> {
    let exact = spec.evolve(psi, t)?;
    let trotter = trotter_evolve(h, psi, t, r)?;
    Ok(exact.inner(&trotter).norm_sqr())
}
