//! Parameter schedules: Gaussian filter `(sigma, T, M, N_sample)` and the
//! LT22 sample count.
//!
//! All quantities live in the dimensionless `x = E * tau` domain, so `epsilon`
//! and `delta_gap` passed here are already multiplied by `tau`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spe::filter::{fourier_coefficients, FilterSpec};

/// Fourier modes used to discretize the Gaussian spectrum.
pub const GAUSSIAN_MODES: usize = 1000;

/// Lower bound on the number of fit grid points.
pub const MIN_GRID_POINTS: usize = 1000;

/// Default failure probability in the Gaussian sample count.
pub const DEFAULT_DELTA_FAIL: f64 = 0.1;

/// How the spectral cutoff `T` relates to `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cutoff {
    /// `T = sigma^-1 sqrt(2 ln(8 / (pi eps~^2 eta)))`, for the `e^{ikx}`
    /// convention used by the signal. Truncation error is then below `eps~`.
    #[default]
    Angular,
    /// The same expression with an extra `1/pi` prefactor.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSchedule {
    pub epsilon: f64,
    pub eta: f64,
    pub delta_gap: f64,
    pub delta_fail: f64,
    pub n_modes: usize,
    pub cutoff: Cutoff,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParameters {
    pub sigma: f64,
    pub t_cut: f64,
    pub n_modes: usize,
    /// Number of grid points `M` used by post-processing.
    pub grid_points: usize,
    pub n_sample: u64,
    /// `F_total` of the (non-derivative) filter.
    pub total_weight: f64,
}

impl GaussianParameters {
    pub fn filter(&self, derivative: bool) -> FilterSpec {
        FilterSpec::Gaussian {
            sigma: self.sigma,
            t_cut: self.t_cut,
            n_modes: self.n_modes,
            derivative,
        }
    }
}

fn checked_ln(what: &'static str, value: f64) -> Result<f64> {
    if !(value > 1.0) || !value.is_finite() {
        return Err(Error::LogArgument { what, value });
    }
    Ok(value.ln())
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::param(name, format!("{v} is not a positive number")));
    }
    Ok(())
}

impl GaussianSchedule {
    pub fn new(epsilon: f64, eta: f64, delta_gap: f64) -> Self {
        Self {
            epsilon,
            eta,
            delta_gap,
            delta_fail: DEFAULT_DELTA_FAIL,
            n_modes: GAUSSIAN_MODES,
            cutoff: Cutoff::Angular,
        }
    }

    pub fn sigma(&self) -> Result<f64> {
        let (d, e, eta) = (self.delta_gap, self.epsilon, self.eta);
        let l = checked_ln("sigma: 9 Delta / (epsilon eta)", 9.0 * d / (e * eta))?;
        Ok((0.9 * d / (2.0 * l).sqrt()).min(0.2 * d))
    }

    pub fn compute(&self) -> Result<GaussianParameters> {
        positive("epsilon", self.epsilon)?;
        positive("delta_gap", self.delta_gap)?;
        positive("eta", self.eta)?;
        if self.eta > 1.0 {
            return Err(Error::param("eta", format!("{} exceeds 1", self.eta)));
        }
        if !(self.delta_fail > 0.0 && self.delta_fail < 1.0) {
            return Err(Error::param("delta_fail", format!("{} is not in (0, 1)", self.delta_fail)));
        }
        let sigma = self.sigma()?;
        let eps_tilde = 0.1 * self.epsilon * self.eta / ((2.0 * PI).sqrt() * sigma.powi(3));
        let l = checked_ln(
            "T: 8 / (pi eps~^2 eta)",
            8.0 / (PI * eps_tilde * eps_tilde * self.eta),
        )?;
        let mut t_cut = (2.0 * l).sqrt() / sigma;
        if self.cutoff == Cutoff::Literal {
            t_cut /= PI;
        }
        let grid_points = ((sigma / self.epsilon).ceil() as usize + 1).max(MIN_GRID_POINTS);
        let filter = FilterSpec::Gaussian {
            sigma,
            t_cut,
            n_modes: self.n_modes,
            derivative: false,
        };
        let total_weight = fourier_coefficients(filter)?.total_weight();
        let l = checked_ln("N_sample: 4 M / delta", 4.0 * grid_points as f64 / self.delta_fail)?;
        let n = (total_weight * total_weight * l / (self.epsilon * self.epsilon)).ceil();
        if n >= u64::MAX as f64 {
            return Err(Error::param("epsilon", "sample count overflows"));
        }
        Ok(GaussianParameters {
            sigma,
            t_cut,
            n_modes: self.n_modes,
            grid_points,
            n_sample: n as u64,
            total_weight,
        })
    }
}

/// Gaussian schedule with the default mode count, cutoff and `delta_fail`.
pub fn gaussian_parameters(
    epsilon: f64,
    eta: f64,
    delta_gap: f64,
    delta_fail: f64,
) -> Result<GaussianParameters> {
    GaussianSchedule {
        delta_fail,
        ..GaussianSchedule::new(epsilon, eta, delta_gap)
    }
    .compute()
}

/// Reference point for the LT22 constant: the largest `d` of the sweep with
/// `vartheta = 1e-12`, `eta = 0.5 p0` (`p0 = 0.77`) and `1 / (epsilon tau) = 1e6`
/// needs about `1e4` samples.
pub const LT22_REFERENCE: Lt22Inputs = Lt22Inputs {
    d: 1_000_000,
    eta: 0.385,
    vartheta: 1e-12,
    inv_eps_tau: 1e6,
    n_sample: 10_000,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lt22Inputs {
    pub d: usize,
    pub eta: f64,
    pub vartheta: f64,
    pub inv_eps_tau: f64,
    pub n_sample: u64,
}

fn lt22_shape(d: usize, eta: f64, vartheta: f64, inv_eps_tau: f64) -> f64 {
    let log_d = (d as f64).ln();
    let loglog = if inv_eps_tau > 1.0 {
        inv_eps_tau.ln().ln().max(0.0)
    } else {
        0.0
    };
    log_d * log_d * (loglog + (1.0 / vartheta).ln()) / (eta * eta)
}

/// The constant `C` that makes [`lt22_sample_count`] hit [`LT22_REFERENCE`].
pub fn lt22_constant() -> f64 {
    let r = LT22_REFERENCE;
    r.n_sample as f64 / lt22_shape(r.d, r.eta, r.vartheta, r.inv_eps_tau)
}

/// `ceil(C eta^-2 ln^2 d (ln ln (1/(eps tau)) + ln (1/vartheta)))`, at least 1.
pub fn lt22_sample_count(d: usize, eta: f64, vartheta: f64, epsilon: f64, tau: f64) -> Result<u64> {
    lt22_sample_count_with(lt22_constant(), d, eta, vartheta, epsilon, tau)
}

pub fn lt22_sample_count_with(
    c: f64,
    d: usize,
    eta: f64,
    vartheta: f64,
    epsilon: f64,
    tau: f64,
) -> Result<u64> {
    positive("eta", eta)?;
    positive("epsilon", epsilon)?;
    positive("tau", tau)?;
    positive("lt22_constant", c)?;
    if !(vartheta > 0.0 && vartheta < 1.0) {
        return Err(Error::param("vartheta", format!("{vartheta} is not in (0, 1)")));
    }
    if d == 0 {
        return Err(Error::param("d", "must be at least 1"));
    }
    let n = (c * lt22_shape(d, eta, vartheta, 1.0 / (epsilon * tau))).ceil();
    Ok((n as u64).max(1))
}
