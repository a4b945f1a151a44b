//! Filters, their discretized Fourier coefficients and the mode distribution.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The convolution filter `F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FilterSpec {
    /// Square wave equal to 1 on `(0, pi)` and 0 on `(-pi, 0)`, truncated to
    /// the integer modes `|j| <= d`.
    PeriodicStep { d: usize },
    /// Normalized Gaussian of width `sigma`, with its spectrum sampled on
    /// `n_modes` points of `[-t_cut, t_cut)`. `derivative` selects `F'`.
    Gaussian {
        sigma: f64,
        t_cut: f64,
        n_modes: usize,
        #[serde(default)]
        derivative: bool,
    },
}

impl FilterSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FilterSpec::PeriodicStep { d } => {
                if d == 0 {
                    return Err(Error::param("d", "must be at least 1"));
                }
            }
            FilterSpec::Gaussian {
                sigma,
                t_cut,
                n_modes,
                ..
            } => {
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::param("sigma", format!("{sigma} is not positive")));
                }
                if !(t_cut > 0.0 && t_cut.is_finite()) {
                    return Err(Error::param("t_cut", format!("{t_cut} is not positive")));
                }
                if n_modes < 2 {
                    return Err(Error::param("n_modes", "need at least 2 modes"));
                }
            }
        }
        Ok(())
    }

    pub fn n_modes(&self) -> usize {
        match *self {
            FilterSpec::PeriodicStep { d } => 2 * d + 1,
            FilterSpec::Gaussian { n_modes, .. } => n_modes,
        }
    }

    /// The continuous filter `F(x)` this spec approximates.
    pub fn evaluate(&self, x: f64) -> f64 {
        match *self {
            FilterSpec::PeriodicStep { .. } => {
                let r = x.rem_euclid(2.0 * PI);
                if r == 0.0 || r == PI {
                    0.5
                } else if r < PI {
                    1.0
                } else {
                    0.0
                }
            }
            FilterSpec::Gaussian {
                sigma, derivative, ..
            } => {
                let g = (-x * x / (2.0 * sigma * sigma)).exp() / ((2.0 * PI).sqrt() * sigma);
                if derivative {
                    -x / (sigma * sigma) * g
                } else {
                    g
                }
            }
        }
    }
}

/// Weighted Fourier coefficients `c_n` with `F(x) ~ sum_n c_n e^{i k_n x}`,
/// rewritten as `c_n = F_total * P(n) * e^{i phi_n}`.
#[derive(Debug, Clone)]
pub struct FourierSampler {
    spec: FilterSpec,
    k_values: Vec<f64>,
    coefficients: Vec<Complex64>,
    total_weight: f64,
    probabilities: Vec<f64>,
    phases: Vec<f64>,
    index: WeightedIndex<f64>,
}

/// Builds the sampler for a filter.
pub fn fourier_coefficients(spec: FilterSpec) -> Result<FourierSampler> {
    spec.validate()?;
    let (k_values, coefficients): (Vec<f64>, Vec<Complex64>) = match spec {
        FilterSpec::PeriodicStep { d } => {
            let d = d as i64;
            (-d..=d)
                .map(|j| {
                    let c = if j == 0 {
                        Complex64::new(0.5, 0.0)
                    } else if j % 2 != 0 {
                        // 1 / (i pi j)
                        Complex64::new(0.0, -1.0 / (PI * j as f64))
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                    (j as f64, c)
                })
                .unzip()
        }
        FilterSpec::Gaussian {
            sigma,
            t_cut,
            n_modes,
            derivative,
        } => {
            let dk = 2.0 * t_cut / n_modes as f64;
            (0..n_modes)
                .map(|n| {
                    let k = -t_cut + n as f64 * dk;
                    let g = dk / (2.0 * PI) * (-0.5 * sigma * sigma * k * k).exp();
                    let c = if derivative {
                        Complex64::new(0.0, k * g)
                    } else {
                        Complex64::new(g, 0.0)
                    };
                    (k, c)
                })
                .unzip()
        }
    };
    let total_weight: f64 = coefficients.iter().map(|c| c.norm()).sum();
    if !(total_weight > 0.0 && total_weight.is_finite()) {
        return Err(Error::param("filter", "all Fourier coefficients vanish"));
    }
    let probabilities: Vec<f64> = coefficients.iter().map(|c| c.norm() / total_weight).collect();
    let phases = coefficients
        .iter()
        .map(|c| if c.norm() > 0.0 { c.arg() } else { 0.0 })
        .collect();
    let index = WeightedIndex::new(&probabilities).map_err(|e| Error::param("filter", e.to_string()))?;
    Ok(FourierSampler {
        spec,
        k_values,
        coefficients,
        total_weight,
        probabilities,
        phases,
        index,
    })
}

impl FourierSampler {
    pub fn spec(&self) -> &FilterSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.k_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k_values.is_empty()
    }

    pub fn k_values(&self) -> &[f64] {
        &self.k_values
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// `F_total = sum_n |c_n|`.
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Largest `|k_n|` with nonzero probability.
    pub fn k_max(&self) -> f64 {
        self.k_values
            .iter()
            .zip(&self.probabilities)
            .filter(|(_, p)| **p > 0.0)
            .map(|(k, _)| k.abs())
            .fold(0.0, f64::max)
    }

    /// Draws a mode index from `P(n)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.index.sample(rng)
    }

    /// The truncated series `sum_n c_n e^{i k_n x}`.
    pub fn series(&self, x: f64) -> Complex64 {
        self.k_values
            .iter()
            .zip(&self.coefficients)
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(k, c)| c * Complex64::from_polar(1.0, k * x))
            .sum()
    }

    /// `(F * rho)(x) ~ sum_i p_i series(x - x_i)` for point masses `(x_i, p_i)`.
    pub fn convolve(&self, x: f64, masses: &[(f64, f64)]) -> Complex64 {
        masses.iter().map(|(xi, p)| *p * self.series(x - xi)).sum()
    }
}
