mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use phasebench::postprocess::{
    default_bracket, fit_window, gaussian_fit, gaussian_zero_search, lt22_certify,
    lt22_max_iterations, lt22_search,
};
use phasebench::sim::Evolution;
use phasebench::spe::{
    collect_signal, fourier_coefficients, Backend, CollectRequest, FilterSpec, GaussianSchedule, ModeEntry, ModeTally,
    Signal, GAUSSIAN_MODES,
};
use phasebench::Error;

use common::*;

fn constant(v: f64) -> impl FnMut(f64) -> phasebench::Result<Complex64> {
    move |_| Ok(Complex64::new(v, 0.0))
}

fn step(jump: f64, height: f64) -> impl FnMut(f64) -> phasebench::Result<Complex64> {
    move |x| Ok(Complex64::new(if x >= jump { height } else { 0.0 }, 0.0))
}

fn model(x: f64, p: f64, mu: f64, sigma: f64) -> f64 {
    p * gaussian(x - mu, sigma)
}

fn signal_from(xs: Vec<f64>, f: impl Fn(f64) -> f64, tau: f64) -> Signal {
    let z_values = xs.iter().map(|x| Complex64::new(f(*x), 0.0)).collect();
    Signal {
        x_grid: xs,
        z_values,
        tau,
        meta: None,
    }
}

#[test]
fn certify_examples() {
    let eta = 0.4;
    assert!(lt22_certify(&mut constant(eta), 0.0, eta, 5).unwrap());
    assert!(!lt22_certify(&mut constant(eta / 2.0), 0.0, eta, 5).unwrap());
    assert!(lt22_certify(&mut constant(eta), 0.0, eta, 2).is_err());
    assert!(lt22_certify(&mut constant(eta), 0.0, eta, 0).is_err());

    let s = h2_setup();
    let sampler = fourier_coefficients(FilterSpec::PeriodicStep { d: 1000 }).unwrap();
    let c = collect_signal(&CollectRequest {
        h: &s.h,
        psi: &s.psi,
        spectral: Some(&s.spec),
        sampler: &sampler,
        tau: s.tau,
        n_sample: 1,
        backend: Backend::Exact,
        seed: 0,
        keep_records: false,
    })
    .unwrap();
    let x0 = s.spec.ground_energy() * s.tau;
    let eta = 0.5 * s.p0;
    assert!(!lt22_certify(&mut &c.tally, x0 - 0.1, eta, 1).unwrap());
    assert!(lt22_certify(&mut &c.tally, x0 + 0.1, eta, 1).unwrap());
}

#[test]
fn bisection_on_ideal_step() {
    let jump = -0.3141;
    let tau = 0.7;
    let bracket = default_bracket(0.05);
    let tol = 1e-6;
    let out = lt22_search(&mut step(jump, 0.77), bracket, 0.77, tol, 1, tau).unwrap();
    assert!((out.x_estimate - jump).abs() <= tol);
    assert!((out.energy - jump / tau).abs() <= tol / tau);
    assert!(out.iterations <= lt22_max_iterations(bracket, tol));

    // Bracket width halves at every vote and the jump stays inside.
    let (mut l, mut r) = bracket;
    for v in &out.state.history {
        let w = r - l;
        if v.above {
            r = v.x;
        } else {
            l = v.x;
        }
        assert!(((r - l) - w / 2.0).abs() < 1e-12);
        assert!(l < jump + 1e-15 && jump <= r);
    }
    assert_eq!((l, r), (out.state.left, out.state.right));
}

#[test]
fn bisection_rejects_bad_brackets() {
    let e = lt22_search(&mut step(0.0, 1.0), (0.5, 0.5), 0.5, 1e-3, 1, 1.0).unwrap_err();
    assert!(matches!(e, Error::InvalidBracket { .. }));
    assert!(lt22_search(&mut step(0.0, 1.0), (1.0, -1.0), 0.5, 1e-3, 1, 1.0).is_err());
}

#[test]
fn signal_below_threshold_ends_at_right_edge() {
    let bracket = (-1.0, 1.0);
    let out = lt22_search(&mut constant(0.1), bracket, 0.5, 1e-4, 1, 1.0).unwrap();
    assert!(out.state.history.iter().all(|v| !v.above));
    assert!(bracket.1 - out.x_estimate <= 1e-4);
}

#[test]
fn zero_search_single_peak() {
    let (sigma, tau) = (0.05, 0.7);
    let x_star = -0.4123;
    let d = |x: f64| -(x - x_star) * gaussian(x - x_star, sigma) / (sigma * sigma);
    let r = gaussian_zero_search(d, x_star + sigma / 8.0, sigma, tau, 101).unwrap();
    assert!((r.x_root - x_star).abs() < 1e-12, "{}", r.x_root);
    assert!((r.energy - r.x_root / tau).abs() < 1e-15);
}

#[test]
fn zero_search_two_peaks() {
    let (sigma, tau, m) = (0.05, 0.7, 201);
    let x_star = -0.4123;
    let x_far = x_star + 5.0 * sigma;
    let dg = |x: f64, mu: f64| -(x - mu) * gaussian(x - mu, sigma) / (sigma * sigma);
    let d = |x: f64| 0.77 * dg(x, x_star) + 0.2 * dg(x, x_far);
    let x_rough = x_star - sigma / 6.0;
    let spacing = (sigma / 2.0) / (m - 1) as f64;
    let r = gaussian_zero_search(d, x_rough, sigma, tau, m).unwrap();
    assert!((r.x_root - x_star).abs() <= spacing, "{}", r.x_root - x_star);
}

#[test]
fn zero_search_without_peak_errors() {
    let sigma = 0.05;
    let d = |x: f64| -x * gaussian(x, sigma) / (sigma * sigma);
    let e = gaussian_zero_search(d, 0.5, sigma, 1.0, 101).unwrap_err();
    assert!(matches!(e, Error::NoSignChange { .. }), "{e:?}");
}

#[test]
fn fit_recovers_exact_gaussian() {
    let s = h2_setup();
    let sigma = 0.06;
    let mu = s.spec.ground_energy() * s.tau;
    let xs = fit_window(mu + sigma / 7.0, sigma, 4.0, 1000);
    let sig = signal_from(xs, |x| model(x, 0.77, mu, sigma), s.tau);
    let f = gaussian_fit(&sig, sigma).unwrap();
    assert!((f.p_star - 0.77).abs() < 1e-8);
    assert!((f.lambda_star - s.spec.ground_energy()).abs() < 1e-8);
    assert!(f.residual < 1e-20);
}

#[test]
fn fit_without_interior_minimum_errors() {
    let sigma = 0.05;
    let xs = fit_window(0.0, sigma, 4.0, 200);
    let sig = signal_from(xs, |x| model(x, 0.5, 1.0, sigma), 1.0);
    assert!(matches!(gaussian_fit(&sig, sigma), Err(Error::FitNotConverged { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fit_is_shift_covariant(
        mu in -0.5f64..0.5,
        shift in -0.3f64..0.3,
        a in 0.0f64..0.3,
        off in -0.01f64..0.01,
        tau in 0.2f64..1.5,
    ) {
        let sigma = 0.05;
        // Main peak plus a contaminating one, so the residual is not zero.
        let f = |x: f64| model(x, 0.7, mu + off, sigma) + model(x, a, mu + 0.15, sigma);
        let xs = fit_window(mu, sigma, 4.0, 400);
        let base = gaussian_fit(&signal_from(xs.clone(), f, tau), sigma).unwrap();
        let moved_xs: Vec<f64> = xs.iter().map(|x| x + shift).collect();
        let moved = gaussian_fit(&signal_from(moved_xs, |x| f(x - shift), tau), sigma).unwrap();
        prop_assert!((moved.lambda_star - base.lambda_star - shift / tau).abs() < 1e-7);
        prop_assert!((moved.p_star - base.p_star).abs() < 1e-7);
        prop_assert!((moved.residual - base.residual).abs() <= 1e-7 * base.residual.max(1e-12));
    }

    #[test]
    fn fit_is_linear_in_overlap(mu in -0.5f64..0.5, c in 0.05f64..5.0, a in 0.0f64..0.3) {
        let sigma = 0.05;
        let f = |x: f64| model(x, 0.7, mu, sigma) + model(x, a, mu + 0.15, sigma);
        let xs = fit_window(mu, sigma, 4.0, 400);
        let base = gaussian_fit(&signal_from(xs.clone(), f, 1.0), sigma).unwrap();
        let scaled = gaussian_fit(&signal_from(xs, |x| c * f(x), 1.0), sigma).unwrap();
        prop_assert!((scaled.p_star - c * base.p_star).abs() < 1e-7 * c);
        prop_assert!((scaled.lambda_star - base.lambda_star).abs() < 1e-7);
    }
}

/// Exact per-mode Hadamard expectations, then multinomial mode counts and
/// binomial shot outcomes drawn here. Equivalent in distribution to running
/// `n` noiseless shot circuits.
fn sampled_tally(exact: &ModeTally, n: u64, rng: &mut ChaCha8Rng) -> ModeTally {
    let mut left = n;
    let mut mass = 1.0;
    let mut modes = Vec::new();
    for m in &exact.modes {
        let p = (m.count / mass).clamp(0.0, 1.0);
        let count = if left == 0 { 0 } else { Binomial::new(left, p).unwrap().sample(rng) };
        left -= count;
        mass -= m.count;
        if count == 0 {
            continue;
        }
        let shots = |mean: f64, rng: &mut ChaCha8Rng| {
            let up = Binomial::new(count, ((1.0 + mean) / 2.0).clamp(0.0, 1.0)).unwrap().sample(rng);
            2.0 * up as f64 - count as f64
        };
        let sum_re = shots(m.sum_re / m.count, rng);
        let sum_im = shots(m.sum_im / m.count, rng);
        modes.push(ModeEntry {
            k: m.k,
            phi: m.phi,
            count: count as f64,
            sum_re,
            sum_im,
        });
    }
    assert_eq!(left, 0);
    ModeTally {
        total_weight: exact.total_weight,
        n_sample: n as f64,
        modes,
    }
}

#[test]
fn shot_fit_meets_tolerance_over_seeds() {
    let s = h2_setup();
    let eps = 1e-3;
    let gap = s.spec.gap().unwrap() * s.tau;
    let delta = gap.powf(0.8);
    let p = GaussianSchedule::new(eps * s.tau, 0.7 * s.p0, delta).compute().unwrap();
    assert_eq!(p.n_modes, GAUSSIAN_MODES);
    let sampler = fourier_coefficients(p.filter(false)).unwrap();
    let exact = collect_signal(&CollectRequest {
        h: &s.h,
        psi: &s.psi,
        spectral: Some(&s.spec),
        sampler: &sampler,
        tau: s.tau,
        n_sample: 1,
        backend: Backend::Exact,
        seed: 0,
        keep_records: false,
    })
    .unwrap()
    .tally;
    let x0 = s.spec.ground_energy() * s.tau;
    // Half-window of one sigma. Wider windows reach the excited peak at
    // 3.8 sigma and bias the centre by about 1.3e-3 Ha on their own.
    let xs = fit_window(x0 + p.sigma / 8.0, p.sigma, 4.0, p.grid_points);
    let mut hits = 0;
    let mut errs = Vec::new();
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tally = sampled_tally(&exact, p.n_sample, &mut rng);
        let sig = Signal::from_tally(&tally, s.tau, xs.clone()).unwrap();
        let err = gaussian_fit(&sig, p.sigma)
            .map(|f| (f.lambda_star - s.spec.ground_energy()).abs())
            .unwrap_or(f64::INFINITY);
        errs.push(err);
        if err <= eps {
            hits += 1;
        }
    }
    assert!(hits >= 18, "{hits}/20 within {eps}: {errs:?}");
}

#[test]
fn lt22_shot_runs_reach_centi_hartree() {
    let s = h2_setup();
    let d = 1000;
    let sampler = fourier_coefficients(FilterSpec::PeriodicStep { d }).unwrap();
    for seed in 0..10 {
        let c = collect_signal(&CollectRequest {
            h: &s.h,
            psi: &s.psi,
            spectral: Some(&s.spec),
            sampler: &sampler,
            tau: s.tau,
            n_sample: 10_000,
            backend: Backend::Shots {
                evolution: Evolution::Exact,
                noise: None,
            },
            seed,
            keep_records: false,
        })
        .unwrap();
        let out = lt22_search(&mut &c.tally, default_bracket(0.1), 0.5 * s.p0, 1.0 / d as f64, 1, s.tau).unwrap();
        let err = (out.energy - s.spec.ground_energy()).abs();
        assert!(err < 1e-2, "seed {seed}: {err}");
    }
}
