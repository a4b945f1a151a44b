mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use phasebench::postprocess::{default_bracket, lt22_search};
use phasebench::sim::{Evolution, NoiseModel, Statevector};
use phasebench::spe::{
    collect_signal, evaluate_signal, fourier_coefficients, gaussian_parameters, linear_grid, lt22_sample_count,
    Backend, CollectRequest, FilterSpec, GaussianSchedule, ModeTally, ShotRecord, Signal, MIN_GRID_POINTS,
};
use phasebench::spectral::eigensystem;
use phasebench::PauliHamiltonian;

use common::*;

fn request<'a>(
    s: &'a H2Setup,
    psi: &'a Statevector,
    sampler: &'a phasebench::spe::FourierSampler,
    n: u64,
    backend: Backend,
    seed: u64,
) -> CollectRequest<'a> {
    CollectRequest {
        h: &s.h,
        psi,
        spectral: Some(&s.spec),
        sampler,
        tau: s.tau,
        n_sample: n,
        backend,
        seed,
        keep_records: true,
    }
}

#[test]
fn step_d1_coefficients() {
    let s = fourier_coefficients(FilterSpec::PeriodicStep { d: 1 }).unwrap();
    assert_eq!(s.k_values(), &[-1.0, 0.0, 1.0]);
    let want = [
        Complex64::new(0.0, -PI).inv(),
        Complex64::new(0.5, 0.0),
        Complex64::new(0.0, PI).inv(),
    ];
    for (c, w) in s.coefficients().iter().zip(want) {
        assert!((c - w).norm() < 1e-15);
    }
}

#[test]
fn step_has_2d_plus_1_integer_modes() {
    for d in [1, 7, 100] {
        let s = fourier_coefficients(FilterSpec::PeriodicStep { d }).unwrap();
        assert_eq!(s.len(), 2 * d + 1);
        assert!(s.k_values().iter().all(|k| k.fract() == 0.0 && k.abs() <= d as f64));
    }
}

#[test]
fn gaussian_series_reconstructs_density() {
    // Delta = 0.5 puts sigma on its 0.2 Delta cap, i.e. sigma = 0.1. The
    // cutoff leaves a tail of about 5e-6 of the mass.
    let p = GaussianSchedule::new(2.5e-4, 0.9, 0.5).compute().unwrap();
    assert_eq!(p.sigma, 0.1);
    let s = fourier_coefficients(p.filter(false)).unwrap();
    for x in [0.0, 0.05, -0.13, 0.3] {
        let v = s.series(x);
        assert!((v.re - gaussian(x, 0.1)).abs() < 1e-4, "x={x}: {v}");
        assert!(v.im.abs() < 1e-4);
    }
}

#[test]
fn derivative_filter_has_no_zero_mode() {
    let s = fourier_coefficients(FilterSpec::Gaussian {
        sigma: 0.1,
        t_cut: 40.0,
        n_modes: 1000,
        derivative: true,
    })
    .unwrap();
    let i0 = s.k_values().iter().position(|k| *k == 0.0).unwrap();
    assert_eq!(s.coefficients()[i0], Complex64::new(0.0, 0.0));
    assert_eq!(s.probabilities()[i0], 0.0);
}

#[test]
fn gaussian_parameter_examples() {
    let p = gaussian_parameters(1e-2, 0.5, 1.0, 0.1).unwrap();
    let raw = 0.9 / (2.0 * 1800f64.ln()).sqrt();
    assert_eq!(p.sigma, raw.min(0.2));
    assert_eq!(p.sigma, 0.2);
    // ceil(sigma / eps) + 1 = 21 < 1000.
    assert_eq!(p.grid_points, MIN_GRID_POINTS);
    assert_eq!(MIN_GRID_POINTS, 1000);

    let mut eps = 1e-2;
    let mut last = p.n_sample;
    for _ in 0..6 {
        eps /= 2.0;
        let n = gaussian_parameters(eps, 0.5, 1.0, 0.1).unwrap().n_sample;
        assert!(n >= 4 * last, "eps={eps}: {n} < 4 * {last}");
        last = n;
    }
}

#[test]
fn lt22_sample_count_examples() {
    let d = 1_000_000;
    let tau = 1.0 / 20.0;
    let eps = 1.0 / (d as f64 * tau);
    let n = lt22_sample_count(d, 0.5 * 0.77, 1e-12, eps, tau).unwrap();
    assert!((9_900..=10_100).contains(&n), "{n}");

    let a = lt22_sample_count(10_000, 0.2, 1e-12, 1e-3, 0.5).unwrap() as f64;
    let b = lt22_sample_count(10_000, 0.4, 1e-12, 1e-3, 0.5).unwrap() as f64;
    assert!((a / b - 4.0).abs() < 4.0 * 2.0 / b, "{a} / {b}");

    assert_eq!(lt22_sample_count(1, 0.4, 1e-12, 1e-3, 0.5).unwrap(), 1);
}

/// Chi-square statistic of `n` draws against the sampler's distribution,
/// over the modes with nonzero probability.
fn chi_square(s: &phasebench::spe::FourierSampler, n: usize, seed: u64) -> (f64, usize) {
    let mut counts = vec![0usize; s.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n {
        counts[s.sample(&mut rng)] += 1;
    }
    let mut stat = 0.0;
    let mut cells = 0;
    for (c, p) in counts.iter().zip(s.probabilities()) {
        if *p > 0.0 {
            let e = p * n as f64;
            stat += (*c as f64 - e).powi(2) / e;
            cells += 1;
        } else {
            assert_eq!(*c, 0);
        }
    }
    (stat, cells - 1)
}

#[test]
fn mode_distribution_is_normalized_and_sampled_faithfully() {
    // Upper 1% points of chi-square with 6 and 15 degrees of freedom.
    let step = fourier_coefficients(FilterSpec::PeriodicStep { d: 5 }).unwrap();
    let gauss = fourier_coefficients(FilterSpec::Gaussian {
        sigma: 0.3,
        t_cut: 8.0,
        n_modes: 16,
        derivative: false,
    })
    .unwrap();
    for (s, crit, dof) in [(&step, 16.812, 6), (&gauss, 30.578, 15)] {
        assert!((s.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(s.probabilities().iter().all(|p| *p >= 0.0));
        for n in 0..s.len() {
            let rebuilt = Complex64::from_polar(s.total_weight() * s.probabilities()[n], s.phases()[n]);
            assert!((rebuilt - s.coefficients()[n]).norm() < 1e-15);
        }
        let (stat, k) = chi_square(s, 1_000_000, 21);
        assert_eq!(k, dof);
        assert!(stat < crit, "chi2 {stat} >= {crit}");
    }
}

#[test]
fn one_sample_runs_two_circuits() {
    let s = h2_setup();
    let sampler = fourier_coefficients(FilterSpec::PeriodicStep { d: 10 }).unwrap();
    let c = collect_signal(&request(
        &s,
        &s.psi,
        &sampler,
        1,
        Backend::Shots {
            evolution: Evolution::Trotter(5),
            noise: None,
        },
        0,
    ))
    .unwrap();
    assert_eq!(c.circuits_run, 2);
    assert_eq!(c.records.unwrap().len(), 1);
}

#[test]
fn gaussian_peak_of_single_eigenstate() {
    let s = h2_setup();
    let g = s.spec.eigenvector(0);
    let x0 = s.spec.ground_energy() * s.tau;
    let p = GaussianSchedule::new(1e-5, 0.7, 0.3).compute().unwrap();
    let sampler = fourier_coefficients(p.filter(false)).unwrap();
    let c = collect_signal(&request(&s, &g, &sampler, 1, Backend::Exact, 0)).unwrap();
    let peak = c.tally.evaluate(x0).re;
    let want = 1.0 / ((2.0 * PI).sqrt() * p.sigma);
    assert!((peak - want).abs() < 1e-4, "{peak} vs {want}");

    let grid = linear_grid(x0 - p.sigma, x0 + p.sigma, 401);
    let h = grid[1] - grid[0];
    let sig = Signal::from_tally(&c.tally, s.tau, grid).unwrap();
    let (i, _) = sig
        .real_parts()
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |b, (i, v)| if *v > b.1 { (i, *v) } else { b });
    assert!((sig.x_grid[i] - x0).abs() <= h);
}

#[test]
fn exact_step_signal_jumps_by_p0() {
    let s = h2_setup();
    let x0 = s.spec.ground_energy() * s.tau;
    let sampler = fourier_coefficients(FilterSpec::PeriodicStep { d: 2000 }).unwrap();
    let c = collect_signal(&request(&s, &s.psi, &sampler, 10_000, Backend::Exact, 0)).unwrap();
    let below = c.tally.evaluate(x0 - 0.05).re;
    let above = c.tally.evaluate(x0 + 0.05).re;
    assert!(below.abs() < 0.02, "{below}");
    assert!((above - s.p0).abs() < 0.02, "{above}");
}

/// Largest deviation from the ideal unit step at distance at least `gap` from
/// the jump, and largest local decrease across the neighbourhood.
fn step_ripple(d: usize, gap: f64) -> (f64, f64) {
    let h = PauliHamiltonian::from_labels(1, &[("Z", 1.0)]).unwrap();
    let spec = eigensystem(&h).unwrap();
    let g = spec.eigenvector(0);
    let tau = 0.5;
    let x0 = -tau;
    let sampler = fourier_coefficients(FilterSpec::PeriodicStep { d }).unwrap();
    let c = collect_signal(&CollectRequest {
        h: &h,
        psi: &g,
        spectral: Some(&spec),
        sampler: &sampler,
        tau,
        n_sample: 1,
        backend: Backend::Exact,
        seed: 0,
        keep_records: false,
    })
    .unwrap();
    let grid = linear_grid(x0 - 0.4, x0 + 0.4, 4001);
    let z: Vec<f64> = grid.iter().map(|x| c.tally.evaluate(*x).re).collect();
    let mut far = 0.0f64;
    for (x, v) in grid.iter().zip(&z) {
        if (x - x0).abs() >= gap {
            let ideal = if *x > x0 { 1.0 } else { 0.0 };
            far = far.max((v - ideal).abs());
        }
    }
    let mut drop = 0.0f64;
    let mut run_max = f64::MIN;
    for v in &z {
        run_max = run_max.max(*v);
        drop = drop.max(run_max - v);
    }
    (far, drop)
}

#[test]
fn step_signal_ripple_does_not_grow_with_d() {
    let (far_ref, drop_ref) = step_ripple(10_000, 0.05);
    // Overshoot plus undershoot of a unit jump is about 18%.
    assert!(drop_ref < 0.2, "{drop_ref}");
    for d in [20_000, 40_000] {
        let (far, drop) = step_ripple(d, 0.05);
        assert!(far <= far_ref * (1.0 + 1e-9), "d={d}: {far} > {far_ref}");
        assert!(drop <= drop_ref + 1e-3, "d={d}: {drop} > {drop_ref}");
    }
}

#[test]
fn constant_records_give_constant_signal() {
    let sampler = fourier_coefficients(FilterSpec::PeriodicStep { d: 3 }).unwrap();
    let i0 = sampler.k_values().iter().position(|k| *k == 0.0).unwrap();
    let recs: Vec<ShotRecord> = (0..50)
        .map(|i| ShotRecord {
            sample_index: i,
            k: 0.0,
            phi: sampler.phases()[i0],
            t: 0.0,
            x: 1,
            y: 0,
        })
        .collect();
    let grid = linear_grid(-1.0, 1.0, 9);
    let sig = evaluate_signal(&recs, &sampler, 0.3, &grid).unwrap();
    let want = Complex64::from_polar(sampler.total_weight(), sampler.phases()[i0]);
    assert!(sig.z_values.iter().all(|z| (z - want).norm() < 1e-12));
}

fn random_records(rng: &mut ChaCha8Rng, n: usize, sampler: &phasebench::spe::FourierSampler) -> Vec<ShotRecord> {
    (0..n)
        .map(|i| {
            let m = sampler.sample(rng);
            ShotRecord {
                sample_index: i as u64,
                k: sampler.k_values()[m],
                phi: sampler.phases()[m],
                t: sampler.k_values()[m] * 0.3,
                x: if rng.random::<bool>() { 1 } else { -1 },
                y: if rng.random::<bool>() { 1 } else { -1 },
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn evaluation_is_linear_in_record_sets(seed in any::<u64>(), na in 1usize..200, nb in 1usize..200, x in -1.0f64..1.0) {
        let sampler = fourier_coefficients(FilterSpec::PeriodicStep { d: 9 }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_records(&mut rng, na, &sampler);
        let b = random_records(&mut rng, nb, &sampler);
        let union: Vec<ShotRecord> = a.iter().chain(&b).copied().collect();
        let w = sampler.total_weight();
        let za = ModeTally::from_records(&a, w).unwrap().evaluate(x);
        let zb = ModeTally::from_records(&b, w).unwrap().evaluate(x);
        let zu = ModeTally::from_records(&union, w).unwrap().evaluate(x);
        let avg = (za * na as f64 + zb * nb as f64) / (na + nb) as f64;
        prop_assert!((zu - avg).norm() < 1e-10);
        let merged = ModeTally::from_records(&a, w).unwrap().merge(&ModeTally::from_records(&b, w).unwrap()).unwrap();
        prop_assert!((merged.evaluate(x) - zu).norm() < 1e-10);
    }
}

#[test]
fn shot_signal_mean_matches_exact_signal() {
    let s = h2_setup();
    let sampler = fourier_coefficients(FilterSpec::PeriodicStep { d: 200 }).unwrap();
    let n = 10_000;
    let shots = collect_signal(&request(
        &s,
        &s.psi,
        &sampler,
        n,
        Backend::Shots {
            evolution: Evolution::Exact,
            noise: None,
        },
        5,
    ))
    .unwrap();
    let exact = collect_signal(&request(&s, &s.psi, &sampler, n, Backend::Exact, 0)).unwrap();
    let records = shots.records.unwrap();
    let w = sampler.total_weight();
    for x in linear_grid(-0.7, 0.7, 20) {
        // Per-sample contributions give the standard error directly.
        let vals: Vec<f64> = records
            .iter()
            .map(|r| (Complex64::from_polar(w, r.phi + r.k * x) * Complex64::new(r.x as f64, r.y as f64)).re)
            .collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((shots.tally.evaluate(x).re - mean).abs() < 1e-9);
        let want = exact.tally.evaluate(x).re;
        assert!((mean - want).abs() <= 3.0 * se, "x={x}: {mean} vs {want} +- {se}");
    }
}

#[test]
fn noisy_signal_still_locates_the_ground_state() {
    let s = h2_setup();
    let d = 100;
    let sampler = fourier_coefficients(FilterSpec::PeriodicStep { d }).unwrap();
    let c = collect_signal(&CollectRequest {
        keep_records: false,
        ..request(
            &s,
            &s.psi,
            &sampler,
            4_000,
            Backend::Shots {
                evolution: Evolution::Trotter(50),
                noise: Some(NoiseModel::z_flip(1e-4).unwrap()),
            },
            8,
        )
    })
    .unwrap();
    let out = lt22_search(&mut &c.tally, default_bracket(0.1), 0.5 * s.p0, 1.0 / d as f64, 1, s.tau).unwrap();
    assert!((out.energy - s.spec.ground_energy()).abs() < 2.0 / (d as f64 * s.tau), "{}", out.energy);
}
