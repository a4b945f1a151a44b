//! Ground-state energy extraction from a signal: LT22 bisection, Gaussian
//! zero search and Gaussian fitting. Everything works in `x = E * tau`;
//! energies are returned as `x / tau`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spe::signal::{ModeTally, Signal};

/// Something that yields `Z(x)` values; repeated calls may resample.
pub trait SignalOracle {
    fn sample(&mut self, x: f64) -> Result<Complex64>;
}

impl<F: FnMut(f64) -> Result<Complex64>> SignalOracle for F {
    fn sample(&mut self, x: f64) -> Result<Complex64> {
        self(x)
    }
}

impl SignalOracle for &ModeTally {
    fn sample(&mut self, x: f64) -> Result<Complex64> {
        Ok(self.evaluate(x))
    }
}

/// Majority vote over `n_batch` draws of `Re Z(x_m) > 3 eta / 4`.
pub fn lt22_certify<O: SignalOracle + ?Sized>(oracle: &mut O, x_m: f64, eta: f64, n_batch: usize) -> Result<bool> {
    if n_batch == 0 || n_batch % 2 == 0 {
        return Err(Error::param("n_batch", format!("{n_batch} must be odd")));
    }
    let threshold = 0.75 * eta;
    let mut above = 0;
    for _ in 0..n_batch {
        if oracle.sample(x_m)?.re > threshold {
            above += 1;
        }
    }
    Ok(2 * above > n_batch)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vote {
    pub x: f64,
    pub above: bool,
}

/// Bisection trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lt22SearchState {
    pub left: f64,
    pub right: f64,
    pub eta: f64,
    pub history: Vec<Vote>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lt22Outcome {
    pub x_estimate: f64,
    pub energy: f64,
    pub iterations: usize,
    pub state: Lt22SearchState,
}

/// Default LT22 bracket: the normalized window `[-pi/4, pi/4]` widened by `margin`.
pub fn default_bracket(margin: f64) -> (f64, f64) {
    (-PI / 4.0 - margin, PI / 4.0 + margin)
}

/// Locates the first jump of a step signal by bisection. A vote above the
/// threshold moves `R` to the midpoint, otherwise `L` moves up. A signal
/// that never clears the threshold therefore ends at the right edge.
pub fn lt22_search<O: SignalOracle + ?Sized>(
    oracle: &mut O,
    bracket: (f64, f64),
    eta: f64,
    tolerance: f64,
    n_batch: usize,
    tau: f64,
) -> Result<Lt22Outcome> {
    let (l0, r0) = bracket;
    if !(l0 < r0) || !l0.is_finite() || !r0.is_finite() {
        return Err(Error::InvalidBracket { lo: l0, hi: r0 });
    }
    if !(tolerance > 0.0) {
        return Err(Error::param("tolerance", format!("{tolerance} is not positive")));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::param("eta", format!("{eta} is not in (0, 1)")));
    }
    let mut state = Lt22SearchState {
        left: l0,
        right: r0,
        eta,
        history: Vec::new(),
    };
    while state.right - state.left > tolerance {
        let mid = 0.5 * (state.left + state.right);
        if mid <= state.left || mid >= state.right {
            break;
        }
        let above = lt22_certify(oracle, mid, eta, n_batch)?;
        state.history.push(Vote { x: mid, above });
        if above {
            state.right = mid;
        } else {
            state.left = mid;
        }
    }
    let x_estimate = 0.5 * (state.left + state.right);
    Ok(Lt22Outcome {
        x_estimate,
        energy: x_estimate / tau,
        iterations: state.history.len(),
        state,
    })
}

/// Upper bound on the LT22 iteration count.
pub fn lt22_max_iterations(bracket: (f64, f64), tolerance: f64) -> usize {
    ((bracket.1 - bracket.0) / tolerance).log2().ceil().max(0.0) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroSearchResult {
    pub x_root: f64,
    pub energy: f64,
}

/// Root of `Re Z'(x)` in `[x_rough - sigma/4, x_rough + sigma/4]`: the grid
/// is scanned for a `+ -> -` sign change (a peak), which is then bisected.
pub fn gaussian_zero_search<F: FnMut(f64) -> f64>(
    mut derivative: F,
    x_rough: f64,
    sigma: f64,
    tau: f64,
    grid_points: usize,
) -> Result<ZeroSearchResult> {
    if !(sigma > 0.0) {
        return Err(Error::param("sigma", format!("{sigma} is not positive")));
    }
    let lo = x_rough - sigma / 4.0;
    let hi = x_rough + sigma / 4.0;
    let m = grid_points.max(3);
    let xs: Vec<f64> = (0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|x| derivative(*x)).collect();
    let mut best: Option<(f64, f64)> = None;
    for i in 0..m - 1 {
        let (a, b) = (ys[i], ys[i + 1]);
        if a == 0.0 && b < 0.0 || a > 0.0 && b <= 0.0 {
            let cand = (xs[i], xs[i + 1]);
            let dist = |c: (f64, f64)| (0.5 * (c.0 + c.1) - x_rough).abs();
            if best.is_none_or(|bst| dist(cand) < dist(bst)) {
                best = Some(cand);
            }
        }
    }
    let (mut a, mut b) = best.ok_or(Error::NoSignChange { lo, hi })?;
    if derivative(b) == 0.0 {
        return Ok(ZeroSearchResult {
            x_root: b,
            energy: b / tau,
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let v = derivative(mid);
        if v > 0.0 {
            a = mid;
        } else if v < 0.0 {
            b = mid;
        } else {
            a = mid;
            b = mid;
            break;
        }
    }
    let x_root = 0.5 * (a + b);
    Ok(ZeroSearchResult {
        x_root,
        energy: x_root / tau,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFitResult {
    /// Recovered overlap.
    pub p_star: f64,
    /// Recovered ground energy.
    pub lambda_star: f64,
    pub x_star: f64,
    /// `L(P*, Lambda*) = (1/M) sum_i |Re Z_i - model_i|^2`.
    pub residual: f64,
    pub iterations: usize,
}

/// Default `n_sigma` so that the fit window `x_rough +- n_sigma sigma / 4` spans `+- delta`.
pub fn default_n_sigma(delta: f64, sigma: f64) -> f64 {
    4.0 * delta / sigma
}

/// The `M`-point fit window around `x_rough`.
pub fn fit_window(x_rough: f64, sigma: f64, n_sigma: f64, m: usize) -> Vec<f64> {
    let half = n_sigma * sigma / 4.0;
    crate::spe::signal::linear_grid(x_rough - half, x_rough + half, m.max(2))
}

struct FitProblem<'a> {
    xs: &'a [f64],
    zs: &'a [f64],
    sigma: f64,
}

impl FitProblem<'_> {
    fn norm(&self) -> f64 {
        1.0 / ((2.0 * PI).sqrt() * self.sigma)
    }

    /// `(A, B, A', B')` with `A = sum g z`, `B = sum g^2`, derivatives in `mu`.
    fn moments(&self, mu: f64) -> (f64, f64, f64, f64) {
        let s2 = self.sigma * self.sigma;
        let c = self.norm();
        let (mut a, mut b, mut da, mut db) = (0.0, 0.0, 0.0, 0.0);
        for (x, z) in self.xs.iter().zip(self.zs) {
            let u = x - mu;
            let g = c * (-u * u / (2.0 * s2)).exp();
            let dg = g * u / s2;
            a += g * z;
            b += g * g;
            da += dg * z;
            db += 2.0 * g * dg;
        }
        (a, b, da, db)
    }

    fn best_p(&self, mu: f64) -> f64 {
        let (a, b, _, _) = self.moments(mu);
        if b > 0.0 {
            a / b
        } else {
            0.0
        }
    }

    fn cost(&self, mu: f64) -> f64 {
        let p = self.best_p(mu);
        let c = self.norm();
        let s2 = self.sigma * self.sigma;
        let sum: f64 = self
            .xs
            .iter()
            .zip(self.zs)
            .map(|(x, z)| {
                let u = x - mu;
                let r = z - p * c * (-u * u / (2.0 * s2)).exp();
                r * r
            })
            .sum();
        sum / self.xs.len() as f64
    }

    /// Sign of `d/dmu (A^2/B)`, whose zero is a stationary point of the cost.
    fn stationarity(&self, mu: f64) -> f64 {
        let (a, b, da, db) = self.moments(mu);
        a * (2.0 * da * b - a * db)
    }
}

const SCAN_POINTS: usize = 2000;

/// Least-squares fit of `P / (sqrt(2 pi) sigma) exp(-(x - Lambda tau)^2 / 2 sigma^2)`
/// to `Re Z` over the signal's grid.
///
/// `P` is solved in closed form for every centre, so the search is one
/// dimensional: a scan over the grid points (thinned to at most 2000) picks
/// the best centre, and the stationarity condition is then bisected between
/// its neighbours.
pub fn gaussian_fit(signal: &Signal, sigma: f64) -> Result<GaussianFitResult> {
    if !(sigma > 0.0) {
        return Err(Error::param("sigma", format!("{sigma} is not positive")));
    }
    if signal.len() < 3 {
        return Err(Error::param("signal", "need at least 3 grid points to fit"));
    }
    let zs = signal.real_parts();
    let prob = FitProblem {
        xs: &signal.x_grid,
        zs: &zs,
        sigma,
    };
    let xs = &signal.x_grid;
    // Candidate centres: every grid point, thinned to at most SCAN_POINTS.
    let stride = xs.len().div_ceil(SCAN_POINTS).max(1);
    let last = xs.len() - 1;
    let mut candidates: Vec<usize> = (0..=last).step_by(stride).chain(std::iter::once(last)).collect();
    candidates.dedup();
    let (best, _) = candidates
        .iter()
        .enumerate()
        .map(|(j, i)| (j, prob.cost(xs[*i])))
        .fold((0, f64::INFINITY), |acc, (j, c)| if c < acc.1 { (j, c) } else { acc });
    let fail = |iterations: usize, mu: f64| Error::FitNotConverged {
        iterations,
        best_p: prob.best_p(mu),
        best_lambda: mu / signal.tau,
    };
    let centre = xs[candidates[best]];
    if best == 0 || candidates[best] == last {
        return Err(fail(0, centre));
    }
    let (mut a, mut b) = (xs[candidates[best - 1]], xs[candidates[best + 1]]);
    let (fa, fb) = (prob.stationarity(a), prob.stationarity(b));
    if !(fa > 0.0 && fb < 0.0) {
        return Err(fail(0, centre));
    }
    let mut iterations = 0;
    while iterations < 200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        iterations += 1;
        let f = prob.stationarity(mid);
        if f > 0.0 {
            a = mid;
        } else if f < 0.0 {
            b = mid;
        } else {
            a = mid;
            b = mid;
        }
    }
    let mu = 0.5 * (a + b);
    Ok(GaussianFitResult {
        p_star: prob.best_p(mu),
        lambda_star: mu / signal.tau,
        x_star: mu,
        residual: prob.cost(mu),
        iterations,
    })
}

/// Any serializable post-processing result as pretty JSON.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(x: f64, mu: f64, sigma: f64) -> f64 {
        (-(x - mu).powi(2) / (2.0 * sigma * sigma)).exp() / ((2.0 * PI).sqrt() * sigma)
    }

    #[test]
    fn certify_thresholds() {
        let eta = 0.4;
        let mut above = |_x: f64| Ok(Complex64::new(eta, 0.0));
        assert!(lt22_certify(&mut above, 0.0, eta, 1).unwrap());
        let mut below = |_x: f64| Ok(Complex64::new(eta / 2.0, 0.0));
        assert!(!lt22_certify(&mut below, 0.0, eta, 3).unwrap());
        assert!(lt22_certify(&mut below, 0.0, eta, 2).is_err());
    }

    #[test]
    fn bisection_on_ideal_step() {
        let jump = -0.3137;
        let mut step = |x: f64| Ok(Complex64::new(if x >= jump { 0.8 } else { 0.0 }, 0.0));
        let out = lt22_search(&mut step, (-1.0, 1.0), 0.8, 1e-6, 1, 2.0).unwrap();
        assert!((out.x_estimate - jump).abs() <= 1e-6);
        assert!((out.energy - jump / 2.0).abs() <= 1e-6);
        assert!(out.iterations <= lt22_max_iterations((-1.0, 1.0), 1e-6));
    }

    #[test]
    fn invalid_bracket() {
        let mut step = |_x: f64| Ok(Complex64::new(0.0, 0.0));
        assert!(matches!(
            lt22_search(&mut step, (1.0, 1.0), 0.5, 1e-3, 1, 1.0),
            Err(Error::InvalidBracket { .. })
        ));
    }

    #[test]
    fn zero_search_on_single_peak() {
        let (mu, s) = (0.123, 0.05);
        let d = |x: f64| -(x - mu) / (s * s) * gaussian(x, mu, s);
        let r = gaussian_zero_search(d, mu + 0.01, s, 1.0, 101).unwrap();
        assert!((r.x_root - mu).abs() < 1e-12);
    }

    #[test]
    fn zero_search_without_peak_fails() {
        let (mu, s) = (0.0, 0.05);
        let d = |x: f64| -(x - mu) / (s * s) * gaussian(x, mu, s);
        assert!(matches!(gaussian_zero_search(d, 0.5, s, 1.0, 101), Err(Error::NoSignChange { .. })));
    }

    #[test]
    fn exact_fit_recovers_parameters() {
        let (p, mu, s, tau) = (0.77, -0.41, 0.06, 0.7);
        let xs = fit_window(mu + 0.01, s, 8.0, 400);
        let z = xs.iter().map(|x| Complex64::new(p * gaussian(*x, mu, s), 0.0)).collect();
        let sig = Signal {
            x_grid: xs,
            z_values: z,
            tau,
            meta: None,
        };
        let fit = gaussian_fit(&sig, s).unwrap();
        assert!((fit.p_star - p).abs() < 1e-8);
        assert!((fit.lambda_star - mu / tau).abs() < 1e-8);
        assert!(fit.residual < 1e-20);
    }
}
