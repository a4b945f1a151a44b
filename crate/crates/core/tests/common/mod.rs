//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's own matrix or eigen code.
#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use phasebench::spectral::{calibrate_theta, eigensystem, ground_overlap, parse_ket, SpectralData};
use phasebench::sim::Statevector;
use phasebench::PauliHamiltonian;

pub const H2_FILE: &str = "h2_sto3g_1.0A.ham";
pub const ANSATZ_FILE: &str = "h2_1ucj.ansatz";

pub fn data(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(file)
}

pub fn h2() -> PauliHamiltonian {
    PauliHamiltonian::load(data(H2_FILE)).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn pauli_2x2(ch: char) -> DMatrix<Complex64> {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match ch {
        'I' => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        'X' => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        'Y' => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        'Z' => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => panic!("bad label {ch}"),
    }
}

/// Kronecker product of the label's factors. Label character `q` acts on
/// qubit `q`, which is bit `q` of the basis index, so the leftmost Kronecker
/// factor is the last character.
pub fn kron_label(label: &str) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(1, 1, c(1.0, 0.0));
    for ch in label.chars().rev() {
        m = m.kronecker(&pauli_2x2(ch));
    }
    m
}

pub fn kron_matrix(terms: &[(String, f64)]) -> DMatrix<Complex64> {
    let dim = 1usize << terms[0].0.len();
    let mut m = DMatrix::from_element(dim, dim, c(0.0, 0.0));
    for (label, coef) in terms {
        m += kron_label(label) * c(*coef, 0.0);
    }
    m
}

pub fn labels_of(h: &PauliHamiltonian) -> Vec<(String, f64)> {
    h.terms()
        .iter()
        .map(|t| (t.string.to_string(), t.coefficient))
        .collect()
}

/// `exp(-i H t)` by the Pade matrix exponential.
pub fn expm(h: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    (h * c(0.0, -t)).exp()
}

pub fn apply(m: &DMatrix<Complex64>, v: &[Complex64]) -> Vec<Complex64> {
    let x = nalgebra::DVector::from_column_slice(v);
    (m * x).iter().copied().collect()
}

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Eigenvalues of a real symmetric matrix through the real solver.
pub fn real_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    assert!(m.iter().all(|z| z.im.abs() < 1e-14), "matrix is not real");
    let r = m.map(|z| z.re);
    let mut ev: Vec<f64> = r.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn random_label<R: Rng>(rng: &mut R, n: usize) -> String {
    (0..n).map(|_| ['I', 'X', 'Y', 'Z'][rng.random_range(0..4)]).collect()
}

pub fn random_terms<R: Rng>(rng: &mut R, n: usize, count: usize) -> Vec<(String, f64)> {
    (0..count)
        .map(|_| (random_label(rng, n), rng.random_range(-1.0..1.0)))
        .collect()
}

pub fn hamiltonian(n: usize, terms: &[(String, f64)]) -> PauliHamiltonian {
    let refs: Vec<(&str, f64)> = terms.iter().map(|(l, c)| (l.as_str(), *c)).collect();
    PauliHamiltonian::from_labels(n, &refs).unwrap()
}

pub fn random_state<R: Rng>(rng: &mut R, n: usize) -> Statevector {
    let amps: Vec<Complex64> = (0..1usize << n)
        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    Statevector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

/// H2 with the benchmark input state `cos t |0011> + sin t |0110>` at `p0 = 0.77`.
pub struct H2Setup {
    pub h: PauliHamiltonian,
    pub spec: SpectralData,
    pub psi: Statevector,
    pub tau: f64,
    pub p0: f64,
}

pub fn h2_setup() -> H2Setup {
    let h = h2();
    let spec = eigensystem(&h).unwrap();
    let (a, b) = (parse_ket("0011").unwrap(), parse_ket("0110").unwrap());
    let theta = calibrate_theta(&spec, a, b, 0.77).unwrap();
    let psi = Statevector::two_level(4, a, b, theta);
    let tau = phasebench::spectral::default_tau(&spec).unwrap();
    let p0 = ground_overlap(&psi, &spec).unwrap();
    H2Setup { h, spec, psi, tau, p0 }
}

/// `sum_i p_i F(x - lambda_i tau)` for a continuous filter.
pub fn convolved(spec: &SpectralData, psi: &Statevector, tau: f64, x: f64, f: impl Fn(f64) -> f64) -> f64 {
    let p = phasebench::spectral::overlaps(psi, spec).unwrap();
    spec.eigenvalues
        .iter()
        .zip(&p)
        .map(|(l, w)| w * f(x - l * tau))
        .sum()
}

pub fn gaussian(x: f64, sigma: f64) -> f64 {
    (-x * x / (2.0 * sigma * sigma)).exp() / ((2.0 * std::f64::consts::PI).sqrt() * sigma)
}
