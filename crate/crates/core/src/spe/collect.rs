//! Signal collection: draw modes from `P(n)`, estimate `<exp(-i k tau H)>`.

use std::collections::HashMap;

use num_complex::Complex64;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::PauliHamiltonian;
use crate::rng::{run_rng, sample_rng};
use crate::sim::{Evolution, HadamardTest, NoiseModel, Part, PreparedTest, SpectralExpectation, Statevector};
use crate::spe::filter::FourierSampler;
use crate::spe::signal::{ModeEntry, ModeTally, ShotRecord};
use crate::spectral::SpectralData;

/// How expectation values are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Backend {
    /// Every mode weighted by `N_sample * P(n)` with the exact expectation;
    /// no sampling noise at all.
    Exact,
    /// Multinomial mode counts `N_n` with exact expectations.
    Ideal,
    /// Two Hadamard-test shots per sample.
    Shots {
        evolution: Evolution,
        #[serde(default)]
        noise: Option<NoiseModel>,
    },
}

/// Noisy circuits are cached per mode up to this many entries.
const CIRCUIT_CACHE_LIMIT: usize = 2048;

#[derive(Debug, Clone)]
pub struct Collection {
    pub tally: ModeTally,
    /// Per-sample records (shots backend with `keep_records`).
    pub records: Option<Vec<ShotRecord>>,
    /// Hadamard-test circuits executed (0 for exact and ideal backends).
    pub circuits_run: u64,
    /// `Rz` count of the noisy circuits, when gate-level noise was simulated.
    pub rz_per_circuit: Option<usize>,
}

impl Collection {
    pub fn evolution_times(&self, tau: f64) -> (f64, f64) {
        self.tally.evolution_times(tau)
    }
}

#[derive(Debug, Clone)]
pub struct CollectRequest<'a> {
    pub h: &'a PauliHamiltonian,
    pub psi: &'a Statevector,
    pub spectral: Option<&'a SpectralData>,
    pub sampler: &'a FourierSampler,
    pub tau: f64,
    pub n_sample: u64,
    pub backend: Backend,
    pub seed: u64,
    pub keep_records: bool,
}

/// Collects the SPE signal as a per-mode tally.
pub fn collect_signal(req: &CollectRequest<'_>) -> Result<Collection> {
    if req.n_sample == 0 {
        return Err(Error::param("n_sample", "must be at least 1"));
    }
    if !(req.tau > 0.0 && req.tau.is_finite()) {
        return Err(Error::param("tau", format!("{} is not positive", req.tau)));
    }
    match req.backend {
        Backend::Exact | Backend::Ideal => collect_expectations(req),
        Backend::Shots { evolution, noise } => collect_shots(req, evolution, noise),
    }
}

fn collect_expectations(req: &CollectRequest<'_>) -> Result<Collection> {
    let spec = req
        .spectral
        .ok_or_else(|| Error::param("spectral", "exact expectations need the eigensystem"))?;
    let expect = SpectralExpectation::new(spec, req.psi)?;
    let s = req.sampler;
    let n_total = req.n_sample as f64;
    let counts: Vec<f64> = match req.backend {
        Backend::Exact => s.probabilities().iter().map(|p| p * n_total).collect(),
        _ => multinomial(req.n_sample, s.probabilities(), req.seed)?,
    };
    let modes = counts
        .iter()
        .enumerate()
        .filter(|(_, c)| **c > 0.0)
        .map(|(n, c)| {
            let k = s.k_values()[n];
            let u = expect.at(k * req.tau) * *c;
            ModeEntry {
                k,
                phi: s.phases()[n],
                count: *c,
                sum_re: u.re,
                sum_im: u.im,
            }
        })
        .collect();
    Ok(Collection {
        tally: ModeTally {
            total_weight: s.total_weight(),
            n_sample: n_total,
            modes,
        },
        records: None,
        circuits_run: 0,
        rz_per_circuit: None,
    })
}

/// Multinomial counts through a chain of conditional binomials.
fn multinomial(n: u64, probabilities: &[f64], seed: u64) -> Result<Vec<f64>> {
    let mut rng = run_rng(seed);
    let mut left = n;
    let mut mass = 1.0;
    let mut out = vec![0.0; probabilities.len()];
    let last = probabilities.iter().rposition(|p| *p > 0.0).unwrap_or(0);
    for (i, p) in probabilities.iter().enumerate() {
        if left == 0 {
            break;
        }
        if *p <= 0.0 {
            continue;
        }
        let c = if i == last || *p >= mass {
            left
        } else {
            let q = (p / mass).clamp(0.0, 1.0);
            Binomial::new(left, q)
                .map_err(|e| Error::param("multinomial", e.to_string()))?
                .sample(&mut rng)
        };
        out[i] = c as f64;
        left -= c;
        mass -= p;
    }
    Ok(out)
}

struct ModeTests {
    real: PreparedTest,
    imag: PreparedTest,
}

fn collect_shots(req: &CollectRequest<'_>, evolution: Evolution, noise: Option<NoiseModel>) -> Result<Collection> {
    let test = HadamardTest::new(req.h, req.psi, req.spectral, evolution, noise)?;
    let noisy = test.noise().is_some();
    let s = req.sampler;
    let mut cache: HashMap<usize, ModeTests> = HashMap::new();
    let mut tally: HashMap<usize, ModeEntry> = HashMap::new();
    let mut records = req.keep_records.then(|| Vec::with_capacity(req.n_sample.min(1 << 24) as usize));
    let mut rz_per_circuit = None;
    let prepare = |n: usize| -> Result<ModeTests> {
        let t = s.k_values()[n] * req.tau;
        Ok(ModeTests {
            real: test.prepare(t, Part::Real)?,
            imag: test.prepare(t, Part::Imaginary)?,
        })
    };
    for m in 0..req.n_sample {
        let mut rng = sample_rng(req.seed, m);
        let n = s.sample(&mut rng);
        let mut fresh = None;
        if !cache.contains_key(&n) {
            let t = prepare(n)?;
            if noisy {
                rz_per_circuit = Some(t.real.rz_count().max(t.imag.rz_count()));
            }
            if !noisy || cache.len() < CIRCUIT_CACHE_LIMIT {
                cache.insert(n, t);
            } else {
                fresh = Some(t);
            }
        }
        let tests = match &fresh {
            Some(t) => t,
            None => &cache[&n],
        };
        let x = test.shot(&tests.real, &mut rng)?;
        let y = test.shot(&tests.imag, &mut rng)?;
        let k = s.k_values()[n];
        let phi = s.phases()[n];
        let e = tally.entry(n).or_insert(ModeEntry {
            k,
            phi,
            count: 0.0,
            sum_re: 0.0,
            sum_im: 0.0,
        });
        e.count += 1.0;
        e.sum_re += x as f64;
        e.sum_im += y as f64;
        if let Some(r) = records.as_mut() {
            r.push(ShotRecord {
                sample_index: m,
                k,
                phi,
                t: k * req.tau,
                x,
                y,
            });
        }
    }
    let mut modes: Vec<(usize, ModeEntry)> = tally.into_iter().collect();
    modes.sort_by_key(|(n, _)| *n);
    Ok(Collection {
        tally: ModeTally {
            total_weight: s.total_weight(),
            n_sample: req.n_sample as f64,
            modes: modes.into_iter().map(|(_, e)| e).collect(),
        },
        records,
        circuits_run: 2 * req.n_sample,
        rz_per_circuit,
    })
}

/// Exact `Z(x)` straight from the spectrum: `sum_n c_n e^{i k_n x} <U(k_n tau)>`.
pub fn exact_signal_value(sampler: &FourierSampler, expect: &SpectralExpectation, tau: f64, x: f64) -> Complex64 {
    sampler
        .k_values()
        .iter()
        .zip(sampler.coefficients())
        .filter(|(_, c)| c.norm_sqr() > 0.0)
        .map(|(k, c)| c * Complex64::from_polar(1.0, k * x) * expect.at(k * tau))
        .sum()
}
