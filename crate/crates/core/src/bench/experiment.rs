//! Seeded runs over a config's parameter grid, with per-row artifacts.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench::config::{Algorithm, BackendKind, DeltaRule, ExperimentConfig};
use crate::bench::artifacts::{
    postprocess_run, GaussianSettings, Lt22Settings, RunMeta, META_FILE, RECORDS_FILE, RESULT_FILE, SIGNAL_FILE,
    TALLY_FILE,
};
use crate::bench::report::emit_report;
use crate::error::{Error, Result};
use crate::hamiltonian::PauliHamiltonian;
use crate::postprocess::{default_bracket, default_n_sigma, lt22_search, to_json};
use crate::resource::{circuit_fidelity, execution_time, fidelity_from_count, TimingTable};
use crate::rng::run_rng;
use crate::sim::{hadamard_test_circuit, Evolution, NoiseModel, Part, Statevector};
use crate::spe::{
    collect_signal, fourier_coefficients, lt22_constant, lt22_sample_count_with, record_times, write_records_csv,
    Backend, CollectRequest, Collection, FilterSpec, GaussianSchedule, Signal, GAUSSIAN_MODES,
};
use crate::spectral::{calibrate_theta, default_tau, eigensystem, ground_overlap, parse_ket, SpectralData};
use crate::vqe::{optimize, Ansatz};

/// Mixed into the seed of the rough-estimate run so it never shares streams
/// with the main signal.
const ROUGH_SEED_MASK: u64 = 0x5DEE_CE66_D1CE_5EED;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    Failed,
}

/// One `(algorithm, parameter point, p_phys, seed)` result. Energies in Hartree,
/// times in inverse Hartree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub algorithm: Algorithm,
    pub parameter: String,
    pub value: f64,
    pub p_phys: f64,
    pub seed: u64,
    pub status: RowStatus,
    pub energy: Option<f64>,
    pub exact_energy: Option<f64>,
    pub abs_error: Option<f64>,
    pub n_sample: Option<u64>,
    pub n_shots: Option<u64>,
    pub t_max: Option<f64>,
    pub t_total: Option<f64>,
    pub rz_count: Option<usize>,
    pub fidelity: Option<f64>,
    pub est_seconds: Option<f64>,
    pub p_star: Option<f64>,
    pub artifacts: Option<String>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Default)]
struct Outcome {
    energy: f64,
    n_sample: Option<u64>,
    n_shots: u64,
    t_max: Option<f64>,
    t_total: Option<f64>,
    rz_count: Option<usize>,
    fidelity: Option<f64>,
    est_seconds: Option<f64>,
    p_star: Option<f64>,
}

/// Inputs shared by every row of an experiment.
pub struct Context {
    pub h: PauliHamiltonian,
    pub spectral: SpectralData,
    pub psi: Statevector,
    pub tau: f64,
    pub p0: f64,
    pub timing: TimingTable,
    pub ansatz: Option<Ansatz>,
}

impl Context {
    pub fn build(cfg: &ExperimentConfig) -> Result<Self> {
        let h = PauliHamiltonian::load(&cfg.hamiltonian)?;
        let spectral = eigensystem(&h)?;
        let n = h.n_qubits();
        let st = &cfg.state;
        let a = parse_ket(&st.basis_a)?;
        if st.basis_a.len() != n {
            return Err(Error::QubitCountMismatch {
                expected: n,
                found: st.basis_a.len(),
            });
        }
        let psi = match &st.basis_b {
            None => Statevector::basis(n, a),
            Some(b) => {
                let b = parse_ket(b)?;
                let theta = match (st.theta, st.target_p0) {
                    (Some(t), _) => t,
                    (None, Some(p)) => calibrate_theta(&spectral, a, b, p)?,
                    (None, None) => 0.0,
                };
                Statevector::two_level(n, a, b, theta)
            }
        };
        let tau = match cfg.tau {
            Some(t) => t,
            None => default_tau(&spectral)?,
        };
        let p0 = ground_overlap(&psi, &spectral)?;
        let timing = match &cfg.timing {
            Some(p) => TimingTable::load(p)?,
            None => TimingTable::default(),
        };
        let ansatz = match cfg.algorithm {
            Algorithm::Vqe => Some(Ansatz::load(&cfg.vqe.ansatz)?),
            _ => None,
        };
        Ok(Self {
            h,
            spectral,
            psi,
            tau,
            p0,
            timing,
            ansatz,
        })
    }

    /// Gap parameter in normalized units.
    pub fn delta(&self, rule: DeltaRule) -> Result<f64> {
        let gap = self.spectral.gap().ok_or_else(|| Error::param("gap", "spectrum has a single level"))?;
        Ok(match rule {
            DeltaRule::Power => (gap * self.tau).powf(0.8),
            DeltaRule::Gap => gap * self.tau,
            DeltaRule::Hartree(v) => v * self.tau,
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct Job {
    value: f64,
    p_phys: f64,
    seed: u64,
}

fn parameter_name(a: Algorithm) -> &'static str {
    match a {
        Algorithm::Lt22 => "d",
        Algorithm::GaussianFilter | Algorithm::GaussianFit => "epsilon",
        Algorithm::Vqe => "shot_budget",
    }
}

fn jobs(cfg: &ExperimentConfig) -> Vec<Job> {
    let values: Vec<f64> = match cfg.algorithm {
        Algorithm::Lt22 => cfg.spe.d.iter().map(|d| *d as f64).collect(),
        Algorithm::GaussianFilter | Algorithm::GaussianFit => cfg.spe.epsilon.clone(),
        Algorithm::Vqe => cfg.vqe.shot_budget.iter().map(|b| *b as f64).collect(),
    };
    let mut out = Vec::new();
    for &value in &values {
        for &p_phys in &cfg.p_phys {
            for &seed in &cfg.seeds {
                out.push(Job { value, p_phys, seed });
            }
        }
    }
    out
}

/// Directory holding every artifact of the experiment.
pub fn experiment_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.output_dir().join(&cfg.name)
}

fn row_dir_name(cfg: &ExperimentConfig, job: &Job) -> String {
    format!(
        "{}_{}-{:e}_p{:e}_s{}",
        cfg.algorithm.name(),
        parameter_name(cfg.algorithm),
        job.value,
        job.p_phys,
        job.seed
    )
}

/// Runs every `(point, p_phys, seed)` of the config. Row failures are
/// recorded in the row; `results.csv`, `summary.txt` and the resolved
/// `config.toml` are written to the experiment directory either way.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let ctx = Context::build(cfg)?;
    let dir = experiment_dir(cfg);
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("config.toml"), cfg.to_toml()?)?;
    let rows: Vec<ResultRow> = jobs(cfg)
        .par_iter()
        .map(|job| run_row(cfg, &ctx, &dir, job))
        .collect();
    let report = emit_report(&rows)?;
    fs::write(dir.join("results.csv"), &report.csv)?;
    fs::write(dir.join("summary.txt"), &report.summary)?;
    Ok(rows)
}

fn run_row(cfg: &ExperimentConfig, ctx: &Context, dir: &Path, job: &Job) -> ResultRow {
    let name = row_dir_name(cfg, job);
    let row_dir = dir.join(&name);
    let exact = ctx.spectral.ground_energy();
    let result = fs::create_dir_all(&row_dir).map_err(Error::from).and_then(|_| match cfg.algorithm {
        Algorithm::Lt22 => lt22_row(cfg, ctx, &row_dir, job),
        Algorithm::GaussianFilter | Algorithm::GaussianFit => gaussian_row(cfg, ctx, &row_dir, job),
        Algorithm::Vqe => vqe_row(cfg, ctx, &row_dir, job),
    });
    let mut row = ResultRow {
        experiment: cfg.name.clone(),
        algorithm: cfg.algorithm,
        parameter: parameter_name(cfg.algorithm).into(),
        value: job.value,
        p_phys: job.p_phys,
        seed: job.seed,
        status: RowStatus::Ok,
        energy: None,
        exact_energy: Some(exact),
        abs_error: None,
        n_sample: None,
        n_shots: None,
        t_max: None,
        t_total: None,
        rz_count: None,
        fidelity: None,
        est_seconds: None,
        p_star: None,
        artifacts: Some(name),
        failure: None,
    };
    match result {
        Ok(o) => {
            row.energy = Some(o.energy);
            row.abs_error = Some((o.energy - exact).abs());
            row.n_sample = o.n_sample;
            row.n_shots = Some(o.n_shots);
            row.t_max = o.t_max;
            row.t_total = o.t_total;
            row.rz_count = o.rz_count;
            row.fidelity = o.fidelity;
            row.est_seconds = o.est_seconds;
            row.p_star = o.p_star;
        }
        Err(e) => {
            row.status = RowStatus::Failed;
            row.failure = Some(e.to_string());
        }
    }
    row
}

fn backend(cfg: &ExperimentConfig, p_phys: f64) -> Result<Backend> {
    Ok(match cfg.spe.backend {
        BackendKind::Exact => Backend::Exact,
        BackendKind::Ideal => Backend::Ideal,
        BackendKind::Shots => Backend::Shots {
            evolution: cfg.spe.trotter_steps.map_or(Evolution::Exact, Evolution::Trotter),
            noise: if p_phys > 0.0 {
                Some(NoiseModel::z_flip(p_phys)?)
            } else {
                None
            },
        },
    })
}

fn collect(
    cfg: &ExperimentConfig,
    ctx: &Context,
    filter: FilterSpec,
    n_sample: u64,
    p_phys: f64,
    seed: u64,
) -> Result<(crate::spe::FourierSampler, Collection)> {
    let sampler = fourier_coefficients(filter)?;
    let c = collect_signal(&CollectRequest {
        h: &ctx.h,
        psi: &ctx.psi,
        spectral: Some(&ctx.spectral),
        sampler: &sampler,
        tau: ctx.tau,
        n_sample,
        backend: backend(cfg, p_phys)?,
        seed,
        keep_records: cfg.spe.keep_records,
    })?;
    Ok((sampler, c))
}

fn lt22_eta(cfg: &ExperimentConfig, p0: f64) -> f64 {
    match cfg.algorithm {
        Algorithm::Lt22 => cfg.eta(p0),
        _ => cfg.spe.eta.unwrap_or(0.5 * p0),
    }
}

struct Lt22Run {
    x_estimate: f64,
    n_sample: u64,
    collection: Collection,
    sampler: crate::spe::FourierSampler,
    trace: crate::postprocess::Lt22Outcome,
}

fn run_lt22(cfg: &ExperimentConfig, ctx: &Context, d: usize, n_sample: Option<u64>, p: f64, seed: u64) -> Result<Lt22Run> {
    let eta = lt22_eta(cfg, ctx.p0);
    let eps_x = 1.0 / d as f64;
    let n = match n_sample {
        Some(n) => n,
        None => lt22_sample_count_with(
            cfg.spe.lt22_constant.unwrap_or_else(lt22_constant),
            d,
            eta,
            cfg.spe.vartheta,
            eps_x / ctx.tau,
            ctx.tau,
        )?,
    };
    let (sampler, collection) = collect(cfg, ctx, FilterSpec::PeriodicStep { d }, n, p, seed)?;
    let trace = lt22_search(
        &mut &collection.tally,
        default_bracket(cfg.spe.bracket_margin),
        eta,
        eps_x,
        cfg.spe.n_batch,
        ctx.tau,
    )?;
    Ok(Lt22Run {
        x_estimate: trace.x_estimate,
        n_sample: n,
        collection,
        sampler,
        trace,
    })
}

fn persist_collection(dir: &Path, c: &Collection) -> Result<()> {
    c.tally.write_csv(BufWriter::new(File::create(dir.join(TALLY_FILE))?))?;
    if let Some(r) = &c.records {
        write_records_csv(r, BufWriter::new(File::create(dir.join(RECORDS_FILE))?))?;
    }
    Ok(())
}

fn persist_signal(dir: &Path, file: &str, signal: &Signal) -> Result<()> {
    signal.write_csv(BufWriter::new(File::create(dir.join(file))?))?;
    Ok(())
}

/// Evolution times, shot count and circuit-level resources of a collection.
fn spe_resources(cfg: &ExperimentConfig, ctx: &Context, c: &Collection, n_sample: u64, p: f64) -> Result<Outcome> {
    let (t_max, t_total) = match &c.records {
        Some(r) => record_times(r),
        None => c.evolution_times(ctx.tau),
    };
    let n_shots = if c.circuits_run > 0 { c.circuits_run } else { 2 * n_sample };
    let mut o = Outcome {
        n_sample: Some(n_sample),
        n_shots,
        t_max: Some(t_max),
        t_total: Some(t_total),
        ..Outcome::default()
    };
    if let Some(r) = cfg.spe.trotter_steps {
        let circuit = hadamard_test_circuit(&ctx.h, t_max, Part::Real, r)?;
        let rz = circuit.rz_count();
        o.rz_count = Some(rz);
        o.fidelity = Some(fidelity_from_count(rz, p));
        o.est_seconds = Some(execution_time(&circuit, &ctx.timing)? * n_shots as f64);
    }
    Ok(o)
}

fn finish_spe(
    cfg: &ExperimentConfig,
    ctx: &Context,
    dir: &Path,
    meta: &RunMeta,
    c: &Collection,
) -> Result<Outcome> {
    persist_collection(dir, c)?;
    meta.save(dir.join(META_FILE))?;
    let (signal, result) = postprocess_run(meta, &c.tally)?;
    persist_signal(dir, SIGNAL_FILE, &signal)?;
    fs::write(dir.join(RESULT_FILE), to_json(&result)?)?;
    let mut o = spe_resources(cfg, ctx, c, meta.n_sample, meta.p_phys)?;
    o.energy = result.energy();
    o.p_star = result.p_star();
    Ok(o)
}

fn lt22_row(cfg: &ExperimentConfig, ctx: &Context, dir: &Path, job: &Job) -> Result<Outcome> {
    let d = job.value as usize;
    let run = run_lt22(cfg, ctx, d, cfg.spe.n_sample, job.p_phys, job.seed)?;
    let meta = RunMeta {
        algorithm: Algorithm::Lt22,
        filter: *run.sampler.spec(),
        total_weight: run.sampler.total_weight(),
        n_sample: run.n_sample,
        tau: ctx.tau,
        eta: lt22_eta(cfg, ctx.p0),
        p_phys: job.p_phys,
        seed: job.seed,
        exact_energy: ctx.spectral.ground_energy(),
        lt22: Some(Lt22Settings {
            bracket: default_bracket(cfg.spe.bracket_margin),
            tolerance: 1.0 / d as f64,
            n_batch: cfg.spe.n_batch,
            dump_points: cfg.spe.dump_points,
        }),
        gaussian: None,
    };
    finish_spe(cfg, ctx, dir, &meta, &run.collection)
}

fn gaussian_row(cfg: &ExperimentConfig, ctx: &Context, dir: &Path, job: &Job) -> Result<Outcome> {
    let eps_x = job.value * ctx.tau;
    let eta = cfg.eta(ctx.p0);
    let delta = ctx.delta(cfg.spe.delta)?;
    let mut params = GaussianSchedule {
        epsilon: eps_x,
        eta,
        delta_gap: delta,
        delta_fail: cfg.spe.delta_fail,
        n_modes: GAUSSIAN_MODES,
        cutoff: cfg.spe.cutoff,
    }
    .compute()?;
    if let Some(t) = cfg.spe.max_time {
        params.t_cut = params.t_cut.min(t / ctx.tau);
    }
    let n = cfg.spe.n_sample.unwrap_or(params.n_sample);
    let (x_rough, rough_from_lt22) = match cfg.spe.e_rough {
        Some(e) => (e * ctx.tau, false),
        None => {
            let rough = run_lt22(
                cfg,
                ctx,
                cfg.spe.rough_d,
                Some(cfg.spe.rough_n_sample),
                job.p_phys,
                job.seed ^ ROUGH_SEED_MASK,
            )?;
            fs::write(dir.join("rough_search.json"), to_json(&rough.trace)?)?;
            (rough.x_estimate, true)
        }
    };
    let derivative = cfg.algorithm == Algorithm::GaussianFilter;
    let n_sigma = match (derivative, cfg.spe.n_sigma) {
        (true, _) => None,
        (false, Some(n)) => Some(n),
        (false, None) => Some(default_n_sigma(ctx.delta(cfg.spe.window)?, params.sigma)),
    };
    let (sampler, c) = collect(cfg, ctx, params.filter(derivative), n, job.p_phys, job.seed)?;
    let meta = RunMeta {
        algorithm: cfg.algorithm,
        filter: *sampler.spec(),
        total_weight: sampler.total_weight(),
        n_sample: n,
        tau: ctx.tau,
        eta,
        p_phys: job.p_phys,
        seed: job.seed,
        exact_energy: ctx.spectral.ground_energy(),
        lt22: None,
        gaussian: Some(GaussianSettings {
            sigma: params.sigma,
            t_cut: params.t_cut,
            grid_points: params.grid_points,
            delta,
            x_rough,
            rough_from_lt22,
            n_sigma,
        }),
    };
    finish_spe(cfg, ctx, dir, &meta, &c)
}

fn vqe_row(cfg: &ExperimentConfig, ctx: &Context, dir: &Path, job: &Job) -> Result<Outcome> {
    let ansatz = ctx.ansatz.as_ref().ok_or_else(|| Error::param("ansatz", "not loaded"))?;
    let init = cfg.vqe.initial_params.clone().unwrap_or_else(|| ansatz.initial_params.clone());
    let noise = if job.p_phys > 0.0 {
        Some(NoiseModel::z_flip(job.p_phys)?)
    } else {
        None
    };
    let opt = cfg.vqe.optimizer();
    let budget = opt.shots_per_term.map(|_| job.value as u64);
    let mut rng = run_rng(job.seed);
    let ledger = optimize(&ctx.h, ansatz, &init, budget, &opt, noise.as_ref(), &mut rng)?;
    ledger.write_csv(BufWriter::new(File::create(dir.join("ledger.csv"))?))?;
    fs::write(dir.join("ledger.json"), to_json(&ledger)?)?;
    let circuit = ansatz.circuit(&ledger.final_params)?;
    Ok(Outcome {
        energy: ledger.final_energy,
        n_sample: None,
        n_shots: ledger.total_shots,
        t_max: None,
        t_total: None,
        rz_count: Some(circuit.rz_count()),
        fidelity: Some(circuit_fidelity(&circuit, job.p_phys)?),
        est_seconds: Some(execution_time(&circuit, &ctx.timing)? * ledger.total_shots as f64),
        p_star: None,
    })
}
