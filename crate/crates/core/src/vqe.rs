//! Shot-based VQE baseline: ansatz files, term-wise energy sampling and a
//! finite-difference BFGS loop with full shot accounting.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::PauliHamiltonian;
use crate::pauli::{Pauli, PauliString};
use crate::sim::{Circuit, Gate, NoiseModel, Statevector};
use crate::spectral::parse_ket;

/// `exp(-i scale theta_param P / 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub pauli: PauliString,
    pub param: usize,
    pub scale: f64,
}

/// Reference bitstring followed by parameterized Pauli rotations.
#[derive(Debug, Clone, PartialEq)]
pub struct Ansatz {
    pub name: String,
    pub n_qubits: usize,
    pub n_params: usize,
    /// Ket label, qubit 0 rightmost.
    pub reference: String,
    pub initial_params: Vec<f64>,
    pub generators: Vec<Generator>,
}

#[derive(Serialize, Deserialize)]
struct AnsatzDoc {
    #[serde(default)]
    name: String,
    n_qubits: usize,
    n_params: usize,
    reference: String,
    #[serde(default)]
    initial_params: Option<Vec<f64>>,
    generators: Vec<(String, usize, f64)>,
}

impl Ansatz {
    pub fn new(
        name: impl Into<String>,
        reference: &str,
        n_params: usize,
        generators: Vec<Generator>,
        initial_params: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n_qubits = reference.len();
        let a = Self {
            name: name.into(),
            n_qubits,
            n_params,
            reference: reference.to_string(),
            initial_params: initial_params.unwrap_or_else(|| vec![0.0; n_params]),
            generators,
        };
        a.validate()?;
        Ok(a)
    }

    fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.reference.len() != self.n_qubits {
            return Err(Error::QubitCountMismatch {
                expected: self.n_qubits,
                found: self.reference.len(),
            });
        }
        parse_ket(&self.reference)?;
        for g in &self.generators {
            if g.pauli.n_qubits() != self.n_qubits {
                return Err(Error::QubitCountMismatch {
                    expected: self.n_qubits,
                    found: g.pauli.n_qubits(),
                });
            }
            if g.param >= self.n_params {
                return Err(Error::param(
                    "generators",
                    format!("parameter index {} out of range for {} parameters", g.param, self.n_params),
                ));
            }
            if !g.scale.is_finite() {
                return Err(Error::param("generators", "scale is not finite"));
            }
        }
        if self.initial_params.len() != self.n_params {
            return Err(Error::param(
                "initial_params",
                format!("expected {} values, found {}", self.n_params, self.initial_params.len()),
            ));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc: AnsatzDoc = serde_json::from_str(text)?;
        let generators = doc
            .generators
            .into_iter()
            .map(|(label, param, scale)| {
                Ok(Generator {
                    pauli: label.parse()?,
                    param,
                    scale,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if doc.reference.len() != doc.n_qubits {
            return Err(Error::QubitCountMismatch {
                expected: doc.n_qubits,
                found: doc.reference.len(),
            });
        }
        Self::new(doc.name, &doc.reference, doc.n_params, generators, doc.initial_params)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = AnsatzDoc {
            name: self.name.clone(),
            n_qubits: self.n_qubits,
            n_params: self.n_params,
            reference: self.reference.clone(),
            initial_params: Some(self.initial_params.clone()),
            generators: self
                .generators
                .iter()
                .map(|g| (g.pauli.label(), g.param, g.scale))
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params {
            return Err(Error::param(
                "params",
                format!("expected {} values, found {}", self.n_params, params.len()),
            ));
        }
        Ok(())
    }

    pub fn state(&self, params: &[f64]) -> Result<Statevector> {
        self.check_params(params)?;
        let mut s = Statevector::basis(self.n_qubits, parse_ket(&self.reference)?);
        for g in &self.generators {
            s.pauli_rotation(&g.pauli, g.scale * params[g.param], None);
        }
        Ok(s)
    }

    /// Transpiled circuit acting on `|0...0>`.
    pub fn circuit(&self, params: &[f64]) -> Result<Circuit> {
        self.check_params(params)?;
        let mut c = Circuit::new(self.n_qubits);
        let bits = parse_ket(&self.reference)?;
        for q in 0..self.n_qubits {
            if bits >> q & 1 == 1 {
                c.push(Gate::X(q))?;
            }
        }
        for g in &self.generators {
            c.push(Gate::PauliRotation {
                pauli: g.pauli.clone(),
                angle: g.scale * params[g.param],
                control: None,
            })?;
        }
        Ok(c.transpile())
    }

    pub fn rz_count(&self) -> usize {
        self.circuit(&self.initial_params).map(|c| c.rz_count()).unwrap_or(0)
    }
}

/// Appends the rotation that maps `P` to a `Z` string on its support.
fn measurement_circuit(base: &Circuit, p: &PauliString) -> Result<(Circuit, PauliString)> {
    let mut c = base.clone();
    let mut z = Vec::with_capacity(p.n_qubits());
    for (q, op) in p.ops().iter().enumerate() {
        match op {
            Pauli::X => c.push(Gate::H(q))?,
            Pauli::Y => {
                c.push(Gate::Rz {
                    qubit: q,
                    angle: -std::f64::consts::FRAC_PI_2,
                })?;
                c.push(Gate::H(q))?;
            }
            _ => {}
        }
        z.push(if *op == Pauli::I { Pauli::I } else { Pauli::Z });
    }
    Ok((c, PauliString::new(z)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub energy: f64,
    pub shots: u64,
}

fn binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 {
        return 0;
    }
    Binomial::new(n, p.clamp(0.0, 1.0)).expect("probability clamped").sample(rng)
}

/// Term-wise energy estimate. `shots_per_term = None` gives the exact
/// expectation. With noise, shots in which some `Rz` failed are simulated
/// at gate level with the sampled error pattern.
pub fn estimate_energy<R: Rng + ?Sized>(
    h: &PauliHamiltonian,
    ansatz: &Ansatz,
    params: &[f64],
    shots_per_term: Option<u64>,
    noise: Option<&NoiseModel>,
    rng: &mut R,
) -> Result<EnergyEstimate> {
    if h.n_qubits() != ansatz.n_qubits {
        return Err(Error::QubitCountMismatch {
            expected: h.n_qubits(),
            found: ansatz.n_qubits,
        });
    }
    let state = ansatz.state(params)?;
    let shots = match shots_per_term {
        None => {
            let energy = h.terms().iter().map(|t| t.coefficient * state.expectation(&t.string)).sum();
            return Ok(EnergyEstimate { energy, shots: 0 });
        }
        Some(0) => return Err(Error::param("shots_per_term", "must be at least 1")),
        Some(n) => n,
    };
    let noise = noise.filter(|n| n.p_phys > 0.0);
    let base = match noise {
        Some(_) => Some(ansatz.circuit(params)?),
        None => None,
    };
    let mut energy = h.identity_coefficient();
    let mut used = 0;
    for term in h.terms().iter().filter(|t| !t.string.is_identity()) {
        let p_plus = 0.5 * (1.0 + state.expectation(&term.string));
        let plus = match (noise, &base) {
            (Some(nm), Some(base)) => {
                let (circuit, zs) = measurement_circuit(base, &term.string)?;
                let n_rz = circuit.rz_count();
                let clean = binomial(shots, nm.survival(n_rz), rng);
                let mut plus = binomial(clean, p_plus, rng);
                for _ in clean..shots {
                    let sites = nm.sample_sites_nonempty(n_rz, rng);
                    let mut s = Statevector::zero(ansatz.n_qubits);
                    circuit.apply_with_errors(&mut s, &sites)?;
                    if rng.random::<f64>() < 0.5 * (1.0 + s.expectation(&zs)) {
                        plus += 1;
                    }
                }
                plus
            }
            _ => binomial(shots, p_plus, rng),
        };
        energy += term.coefficient * (2.0 * plus as f64 / shots as f64 - 1.0);
        used += shots;
    }
    Ok(EnergyEstimate { energy, shots: used })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// `None` runs on exact expectations.
    pub shots_per_term: Option<u64>,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    /// Finite-difference step is `fd_scale * shots_per_term^(-1/4)`.
    pub fd_scale: f64,
    /// Share of the budget kept for the final energy evaluation.
    pub final_fraction: f64,
    /// Largest parameter update per iteration.
    pub max_step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            shots_per_term: Some(1000),
            max_iterations: 100,
            gradient_tolerance: 1e-6,
            fd_scale: 1.0,
            final_fraction: 0.25,
            max_step: 0.5,
        }
    }
}

impl OptimizerConfig {
    pub fn exact() -> Self {
        Self {
            shots_per_term: None,
            ..Self::default()
        }
    }

    fn fd_step(&self) -> f64 {
        match self.shots_per_term {
            None => 1e-5,
            Some(n) => self.fd_scale * (n as f64).powf(-0.25),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeEvaluation {
    pub iteration: usize,
    pub params: Vec<f64>,
    pub energy: f64,
    pub cumulative_shots: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeRunLedger {
    pub evaluations: Vec<VqeEvaluation>,
    pub total_shots: u64,
    pub final_params: Vec<f64>,
    pub final_energy: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Serialize)]
struct LedgerRow {
    iteration: usize,
    energy: f64,
    cumulative_shots: u64,
}

impl VqeRunLedger {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for e in &self.evaluations {
            wr.serialize(LedgerRow {
                iteration: e.iteration,
                energy: e.energy,
                cumulative_shots: e.cumulative_shots,
            })?;
        }
        wr.flush()?;
        Ok(())
    }
}

struct Evaluator<'a, R: Rng + ?Sized> {
    h: &'a PauliHamiltonian,
    ansatz: &'a Ansatz,
    noise: Option<&'a NoiseModel>,
    shots_per_term: Option<u64>,
    cost: u64,
    budget: Option<u64>,
    ledger: Vec<VqeEvaluation>,
    used: u64,
    iteration: usize,
    rng: &'a mut R,
}

impl<R: Rng + ?Sized> Evaluator<'_, R> {
    fn can_afford(&self, evaluations: u64) -> bool {
        match self.budget {
            None => true,
            Some(b) => self.used + evaluations * self.cost <= b,
        }
    }

    fn eval(&mut self, params: &[f64]) -> Result<f64> {
        let e = estimate_energy(self.h, self.ansatz, params, self.shots_per_term, self.noise, self.rng)?;
        self.used += e.shots;
        self.ledger.push(VqeEvaluation {
            iteration: self.iteration,
            params: params.to_vec(),
            energy: e.energy,
            cumulative_shots: self.used,
        });
        Ok(e.energy)
    }

    fn gradient(&mut self, x: &[f64], step: f64) -> Result<Vec<f64>> {
        let mut g = vec![0.0; x.len()];
        for i in 0..x.len() {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += step;
            xm[i] -= step;
            g[i] = (self.eval(&xp)? - self.eval(&xm)?) / (2.0 * step);
        }
        Ok(g)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// BFGS on finite-difference gradients with a capped step and no line
/// search, since noisy energy comparisons stall it. Stops on the gradient
/// tolerance, `max_iterations`, or when the shot budget no longer covers an
/// iteration; the reserved share of the budget then goes into one final
/// evaluation.
pub fn optimize<R: Rng + ?Sized>(
    h: &PauliHamiltonian,
    ansatz: &Ansatz,
    initial_params: &[f64],
    total_shot_budget: Option<u64>,
    config: &OptimizerConfig,
    noise: Option<&NoiseModel>,
    rng: &mut R,
) -> Result<VqeRunLedger> {
    ansatz.check_params(initial_params)?;
    let n_terms = h.terms().iter().filter(|t| !t.string.is_identity()).count() as u64;
    let cost = config.shots_per_term.map_or(0, |s| s * n_terms);
    let budget = match config.shots_per_term {
        None => None,
        Some(_) => {
            let b = total_shot_budget.ok_or_else(|| Error::param("total_shot_budget", "required in shot mode"))?;
            if b < cost.max(1) {
                return Err(Error::BudgetTooSmall { budget: b, needed: cost });
            }
            Some(b)
        }
    };
    if !(0.0..1.0).contains(&config.final_fraction) {
        return Err(Error::param("final_fraction", "must lie in [0, 1)"));
    }
    let reserve = budget.map_or(0, |b| (b as f64 * config.final_fraction) as u64);
    let mut ev = Evaluator {
        h,
        ansatz,
        noise,
        shots_per_term: config.shots_per_term,
        cost,
        budget: budget.map(|b| b - reserve),
        ledger: Vec::new(),
        used: 0,
        iteration: 0,
        rng,
    };
    let n = initial_params.len();
    let step = config.fd_step();
    let mut x = initial_params.to_vec();
    let mut hinv = identity(n);
    let mut converged = false;
    let mut f = f64::NAN;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    while ev.iteration < config.max_iterations && ev.can_afford(2 * n as u64 + 1) {
        ev.iteration += 1;
        f = ev.eval(&x)?;
        let grad = ev.gradient(&x, step)?;
        if dot(&grad, &grad).sqrt() < config.gradient_tolerance {
            converged = true;
            break;
        }
        if let Some((s, g_old)) = prev.take() {
            let y: Vec<f64> = grad.iter().zip(&g_old).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            if sy > 1e-12 {
                hinv = bfgs_update(&hinv, &s, &y, sy);
            }
        }
        let mut dir: Vec<f64> = (0..n).map(|i| -dot(&hinv[i], &grad)).collect();
        if dot(&dir, &grad) >= 0.0 {
            hinv = identity(n);
            dir = grad.iter().map(|v| -v).collect();
        }
        let norm = dot(&dir, &dir).sqrt();
        if norm > config.max_step {
            dir.iter_mut().for_each(|d| *d *= config.max_step / norm);
        }
        x.iter_mut().zip(&dir).for_each(|(a, d)| *a += d);
        prev = Some((dir, grad));
    }
    if f.is_nan() && ev.can_afford(1) {
        f = ev.eval(&x)?;
    }
    let final_energy = match config.shots_per_term {
        None => estimate_energy(h, ansatz, &x, None, noise, ev.rng)?.energy,
        Some(_) => {
            let left = budget.unwrap_or(0).saturating_sub(ev.used);
            let per_term = if n_terms == 0 { 0 } else { left / n_terms };
            if per_term == 0 {
                f
            } else {
                ev.iteration += 1;
                ev.shots_per_term = Some(per_term);
                ev.budget = budget;
                ev.eval(&x)?
            }
        }
    };
    Ok(VqeRunLedger {
        total_shots: ev.used,
        iterations: ev.iteration,
        evaluations: ev.ledger,
        final_params: x,
        final_energy,
        converged,
    })
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

fn bfgs_update(hinv: &[Vec<f64>], s: &[f64], y: &[f64], sy: f64) -> Vec<Vec<f64>> {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| dot(&hinv[i], y)).collect();
    let yhy = dot(y, &hy);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    hinv[i][j] - rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j]
                })
                .collect()
        })
        .collect()
}
