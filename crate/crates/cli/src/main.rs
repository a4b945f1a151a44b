use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand};

use phasebench::bench::artifacts::RunArtifacts;
use phasebench::bench::config::{D_SWEEP, EPSILON_SWEEP};
use phasebench::bench::{
    emit_report, experiment_dir, postprocess_run, run_experiment, Algorithm, BackendKind, ExperimentConfig, ResultRow,
    RowStatus, OUTPUT_ENV,
};
use phasebench::resource::{circuit_fidelity, execution_time, TimingTable};
use phasebench::sim::{hadamard_test_circuit, Part};
use phasebench::spe::{linear_grid, record_times, Signal};
use phasebench::vqe::Ansatz;
use phasebench::PauliHamiltonian;

const DEFAULT_HAMILTONIAN: &str = "data/h2_sto3g_1.0A.ham";

#[derive(Parser)]
#[command(name = "phasebench", version, about = "Statistical phase estimation and VQE benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Statistical phase estimation runs.
    #[command(subcommand)]
    Spe(SpeCommand),
    /// Shot-based VQE baseline.
    #[command(subcommand)]
    Vqe(VqeCommand),
    /// Signals of persisted runs.
    #[command(subcommand)]
    Signal(SignalCommand),
    /// Circuit-level resource accounting.
    #[command(subcommand)]
    Resource(ResourceCommand),
    /// Re-runs the post-processing of a persisted run without new shots.
    Fit(FitArgs),
}

#[derive(Subcommand)]
enum SpeCommand {
    /// Runs the given parameter points.
    Run(SpeArgs),
    /// Runs the default d or epsilon grid unless one is given.
    Sweep(SpeArgs),
}

#[derive(Subcommand)]
enum VqeCommand {
    Run(VqeArgs),
}

#[derive(Subcommand)]
enum SignalCommand {
    /// Writes `x, re_z, im_z` of a persisted run.
    Dump(DumpArgs),
}

#[derive(Subcommand)]
enum ResourceCommand {
    /// Rz count, fidelity and time of one circuit, or the times of a run.
    Estimate(ResourceArgs),
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML); flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    hamiltonian: Option<PathBuf>,
    /// Number of seeds, run as 0..N.
    #[arg(long)]
    seeds: Option<u64>,
    /// Physical error rates, comma separated.
    #[arg(long, value_delimiter = ',')]
    pphys: Option<Vec<f64>>,
    /// Output root; defaults to $PHASEBENCH_OUT.
    #[arg(long, env = OUTPUT_ENV)]
    out: Option<PathBuf>,
    #[arg(long)]
    name: Option<String>,
    /// Normalization factor replacing pi / (4 ||H||).
    #[arg(long)]
    tau: Option<f64>,
}

#[derive(Args)]
struct SpeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    algo: Option<Algorithm>,
    /// LT22 parameters, comma separated.
    #[arg(long, value_delimiter = ',')]
    d: Option<Vec<usize>>,
    /// Target precisions in Hartree: a comma list or a decade range like `1e-2..1e-6`.
    #[arg(long)]
    eps: Option<String>,
    /// Fixed sample count instead of the schedule.
    #[arg(long)]
    nsample: Option<u64>,
    #[arg(long, value_parser = parse_backend)]
    backend: Option<BackendKind>,
    /// Trotter steps for the shots backend; 0 means exact evolution.
    #[arg(long)]
    trotter: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    /// Fit half-window in units of sigma / 4.
    #[arg(long)]
    nsigma: Option<f64>,
}

#[derive(Args)]
struct VqeArgs {
    #[command(flatten)]
    common: Common,
    /// Total shot budgets, comma separated.
    #[arg(long, value_delimiter = ',')]
    budget: Option<Vec<u64>>,
    #[arg(long)]
    shots_per_term: Option<u64>,
    #[arg(long)]
    ansatz: Option<PathBuf>,
}

#[derive(Args)]
struct DumpArgs {
    /// Row directory holding meta.json and tally.csv.
    #[arg(long)]
    run: PathBuf,
    /// `lo:hi:m` in normalized units; defaults to the run's own grid.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Dump the x-derivative of the signal.
    #[arg(long)]
    derivative: bool,
    /// Output file; stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ResourceArgs {
    #[arg(long, default_value = DEFAULT_HAMILTONIAN)]
    hamiltonian: PathBuf,
    /// Evolution time of the Hadamard test, in inverse Hartree.
    #[arg(long, default_value_t = 1.0)]
    time: f64,
    #[arg(long, default_value_t = 50)]
    trotter: usize,
    /// Account an ansatz circuit instead of the Hadamard test.
    #[arg(long)]
    ansatz: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "1e-3,1e-4,1e-5")]
    pphys: Vec<f64>,
    #[arg(long)]
    timing: Option<PathBuf>,
    /// Report T_max and T_total recomputed from a run's records.csv.
    #[arg(long)]
    run: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    run: PathBuf,
    /// Replaces the stored fit half-window.
    #[arg(long)]
    nsigma: Option<f64>,
}

fn parse_backend(s: &str) -> std::result::Result<BackendKind, String> {
    match s {
        "exact" => Ok(BackendKind::Exact),
        "ideal" => Ok(BackendKind::Ideal),
        "shots" => Ok(BackendKind::Shots),
        _ => Err(format!("unknown backend {s:?}; expected exact, ideal or shots")),
    }
}

/// `1e-2..1e-6` expands to every decade between the ends; otherwise a comma list.
fn parse_eps(s: &str) -> Result<Vec<f64>> {
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (f64, f64) = (a.trim().parse()?, b.trim().parse()?);
        if !(a > 0.0 && b > 0.0) {
            bail!("epsilon range {s:?} must be positive");
        }
        let (la, lb) = (a.log10().round() as i32, b.log10().round() as i32);
        let step = if lb >= la { 1 } else { -1 };
        let mut out = Vec::new();
        let mut e = la;
        loop {
            out.push(10f64.powi(e));
            if e == lb {
                break;
            }
            e += step;
        }
        return Ok(out);
    }
    s.split(',').map(|v| Ok(v.trim().parse::<f64>()?)).collect()
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        bail!("grid {s:?} is not lo:hi:m");
    }
    Ok(linear_grid(parts[0].parse()?, parts[1].parse()?, parts[2].parse()?))
}

fn base_config(common: &Common, algo: Option<Algorithm>) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => ExperimentConfig::new(DEFAULT_HAMILTONIAN, algo.unwrap_or(Algorithm::Lt22)),
    };
    if let Some(a) = algo {
        cfg.algorithm = a;
    }
    if let Some(h) = &common.hamiltonian {
        cfg.hamiltonian = h.clone();
    }
    if let Some(n) = common.seeds {
        cfg.seeds = (0..n).collect();
    }
    if let Some(p) = &common.pphys {
        cfg.p_phys = p.clone();
    }
    if let Some(o) = &common.out {
        cfg.output_dir = Some(o.clone());
    }
    if let Some(n) = &common.name {
        cfg.name = n.clone();
    }
    if common.tau.is_some() {
        cfg.tau = common.tau;
    }
    Ok(cfg)
}

fn spe_config(args: &SpeArgs, sweep: bool) -> Result<ExperimentConfig> {
    let mut cfg = base_config(&args.common, args.algo)?;
    if cfg.algorithm == Algorithm::Vqe {
        bail!("use `vqe run` for the vqe algorithm");
    }
    if sweep {
        cfg.spe.d = D_SWEEP.to_vec();
        cfg.spe.epsilon = EPSILON_SWEEP.to_vec();
    }
    if let Some(d) = &args.d {
        cfg.spe.d = d.clone();
    }
    if let Some(e) = &args.eps {
        cfg.spe.epsilon = parse_eps(e)?;
    }
    if args.nsample.is_some() {
        cfg.spe.n_sample = args.nsample;
    }
    if let Some(b) = args.backend {
        cfg.spe.backend = b;
    }
    if let Some(r) = args.trotter {
        cfg.spe.trotter_steps = (r > 0).then_some(r);
    }
    if args.eta.is_some() {
        cfg.spe.eta = args.eta;
    }
    if args.nsigma.is_some() {
        cfg.spe.n_sigma = args.nsigma;
    }
    if args.common.name.is_none() && args.common.config.is_none() {
        cfg.name = format!("{}-{}", if sweep { "sweep" } else { "run" }, cfg.algorithm.name());
    }
    Ok(cfg)
}

fn vqe_config(args: &VqeArgs) -> Result<ExperimentConfig> {
    let mut cfg = base_config(&args.common, Some(Algorithm::Vqe))?;
    if let Some(b) = &args.budget {
        cfg.vqe.shot_budget = b.clone();
    }
    if args.shots_per_term.is_some() {
        cfg.vqe.shots_per_term = args.shots_per_term;
    }
    if let Some(a) = &args.ansatz {
        cfg.vqe.ansatz = a.clone();
    }
    if args.common.name.is_none() && args.common.config.is_none() {
        cfg.name = "run-vqe".into();
    }
    Ok(cfg)
}

fn run(cfg: &ExperimentConfig) -> Result<bool> {
    let rows: Vec<ResultRow> = run_experiment(cfg)?;
    let report = emit_report(&rows)?;
    print!("{}", report.csv);
    eprint!("{}", report.summary);
    eprintln!("artifacts in {}", experiment_dir(cfg).display());
    for r in rows.iter().filter(|r| r.status == RowStatus::Failed) {
        eprintln!(
            "row {} failed: {}",
            r.artifacts.as_deref().unwrap_or("?"),
            r.failure.as_deref().unwrap_or("unknown")
        );
    }
    Ok(rows.iter().all(|r| r.status == RowStatus::Ok))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn dump(args: &DumpArgs) -> Result<()> {
    let run = RunArtifacts::load(&args.run)?;
    let grid = match &args.grid {
        Some(g) => parse_grid(g)?,
        None => run.meta.signal_grid()?,
    };
    let mut signal = Signal::from_tally(&run.tally, run.meta.tau, grid)?;
    if args.derivative {
        signal.z_values = signal.x_grid.iter().map(|x| run.tally.evaluate_derivative(*x)).collect();
    }
    let mut w = output(args.out.as_deref())?;
    signal.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn fit(args: &FitArgs) -> Result<()> {
    let mut run = RunArtifacts::load(&args.run)?;
    if let Some(n) = args.nsigma {
        match run.meta.gaussian.as_mut() {
            Some(g) if run.meta.algorithm == Algorithm::GaussianFit => g.n_sigma = Some(n),
            _ => bail!("--nsigma only applies to gaussian_fit runs"),
        }
    }
    let (_, result) = postprocess_run(&run.meta, &run.tally)?;
    let energy = result.energy();
    println!("{}", serde_json::to_string_pretty(&result)?);
    println!("energy = {energy:.10} Ha");
    println!("|dE| = {:.3e} Ha", (energy - run.meta.exact_energy).abs());
    if let Some(p) = result.p_star() {
        println!("p_star = {p:.6}");
    }
    Ok(())
}

fn resource(args: &ResourceArgs) -> Result<()> {
    if let Some(dir) = &args.run {
        let run = RunArtifacts::load(dir)?;
        let Some(records) = &run.records else {
            bail!("{} has no records.csv", dir.display());
        };
        let (t_max, t_total) = record_times(records);
        println!("shots = {}", 2 * records.len());
        println!("T_max = {t_max}");
        println!("T_total = {t_total}");
        return Ok(());
    }
    let timing = match &args.timing {
        Some(p) => TimingTable::load(p)?,
        None => TimingTable::default(),
    };
    let circuit = match &args.ansatz {
        Some(p) => {
            let a = Ansatz::load(p)?;
            a.circuit(&a.initial_params)?
        }
        None => {
            let h = PauliHamiltonian::load(&args.hamiltonian)?;
            hadamard_test_circuit(&h, args.time, Part::Real, args.trotter)?
        }
    };
    let counts = circuit.gate_counts();
    println!("qubits = {}", circuit.n_qubits());
    println!("rz = {} cnot = {} h = {}", counts.rz, counts.cnot, counts.h);
    println!("seconds per shot = {:.6e} (model estimate)", execution_time(&circuit, &timing)?);
    for p in &args.pphys {
        println!("p_phys = {p:e}: fidelity = {:.6}", circuit_fidelity(&circuit, *p)?);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Spe(SpeCommand::Run(a)) => spe_config(a, false).and_then(|c| run(&c)),
        Command::Spe(SpeCommand::Sweep(a)) => spe_config(a, true).and_then(|c| run(&c)),
        Command::Vqe(VqeCommand::Run(a)) => vqe_config(a).and_then(|c| run(&c)),
        Command::Signal(SignalCommand::Dump(a)) => dump(a).map(|_| true),
        Command::Resource(ResourceCommand::Estimate(a)) => resource(a).map(|_| true),
        Command::Fit(a) => fit(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
