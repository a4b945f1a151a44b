//! Experiment configuration (TOML).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spe::{Cutoff, DEFAULT_DELTA_FAIL};
use crate::spectral::parse_ket;

/// Environment variable naming the default output directory.
pub const OUTPUT_ENV: &str = "PHASEBENCH_OUT";
pub const DEFAULT_OUTPUT_DIR: &str = "phasebench-out";

/// Default LT22 `d` grid.
pub const D_SWEEP: [usize; 9] = [50, 100, 500, 1_000, 5_000, 10_000, 50_000, 100_000, 1_000_000];
/// Default epsilon grid in Hartree.
pub const EPSILON_SWEEP: [f64; 5] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Lt22,
    GaussianFilter,
    GaussianFit,
    Vqe,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Lt22 => "lt22",
            Algorithm::GaussianFilter => "gaussian_filter",
            Algorithm::GaussianFit => "gaussian_fit",
            Algorithm::Vqe => "vqe",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lt22" => Ok(Algorithm::Lt22),
            "gaussian_filter" => Ok(Algorithm::GaussianFilter),
            "gaussian_fit" => Ok(Algorithm::GaussianFit),
            "vqe" => Ok(Algorithm::Vqe),
            other => Err(Error::Config {
                field: "algorithm".into(),
                reason: format!("unknown algorithm {other:?}"),
            }),
        }
    }
}

/// `cos(theta)|a> + sin(theta)|b>`, with `theta` given or calibrated to a
/// target ground overlap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub basis_a: String,
    #[serde(default)]
    pub basis_b: Option<String>,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub target_p0: Option<f64>,
}

impl Default for StateSpec {
    fn default() -> Self {
        Self {
            basis_a: "0011".into(),
            basis_b: Some("0110".into()),
            theta: None,
            target_p0: Some(0.77),
        }
    }
}

/// Gap parameter of the Gaussian schedule, in normalized units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "value")]
pub enum DeltaRule {
    /// `(gap tau)^(4/5)`.
    #[default]
    Power,
    /// `gap tau`.
    Gap,
    /// A fixed gap in Hartree, multiplied by `tau`.
    Hartree(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    #[default]
    Exact,
    Ideal,
    Shots,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpeConfig {
    /// LT22 step-filter parameters to scan.
    pub d: Vec<usize>,
    /// Target precisions in Hartree for the Gaussian schemes.
    pub epsilon: Vec<f64>,
    /// Absolute threshold parameter; overrides `eta_factor`.
    pub eta: Option<f64>,
    /// `eta = eta_factor * p0`; defaults to 0.5 for LT22 and 0.7 otherwise.
    pub eta_factor: Option<f64>,
    pub delta: DeltaRule,
    pub delta_fail: f64,
    /// Fit half-window in units of `sigma / 4`; overrides `window`.
    pub n_sigma: Option<f64>,
    /// Fit half-window `n_sigma sigma / 4`, as a gap rule.
    pub window: DeltaRule,
    /// Fixed sample count, replacing the schedule.
    pub n_sample: Option<u64>,
    /// LT22 sample-count constant; defaults to the calibrated value.
    pub lt22_constant: Option<f64>,
    pub vartheta: f64,
    pub n_batch: usize,
    pub cutoff: Cutoff,
    /// Hard cap on the Gaussian filter's evolution time `|k| tau`.
    pub max_time: Option<f64>,
    /// Extra room around `[-pi/4, pi/4]` for the LT22 bracket.
    pub bracket_margin: f64,
    pub backend: BackendKind,
    /// Trotter steps per circuit; `None` uses exact evolution.
    pub trotter_steps: Option<usize>,
    /// Rough estimate in Hartree; otherwise an LT22 run with `rough_d`, `rough_n_sample`.
    pub e_rough: Option<f64>,
    pub rough_d: usize,
    pub rough_n_sample: u64,
    /// Grid size of the persisted LT22 signal.
    pub dump_points: usize,
    pub keep_records: bool,
}

impl Default for SpeConfig {
    fn default() -> Self {
        Self {
            d: vec![1000],
            epsilon: vec![1e-3],
            eta: None,
            eta_factor: None,
            delta: DeltaRule::Power,
            delta_fail: DEFAULT_DELTA_FAIL,
            n_sigma: None,
            window: DeltaRule::Power,
            n_sample: None,
            lt22_constant: None,
            vartheta: 1e-12,
            n_batch: 1,
            cutoff: Cutoff::Angular,
            max_time: None,
            bracket_margin: 0.1,
            backend: BackendKind::Exact,
            trotter_steps: Some(50),
            e_rough: None,
            rough_d: 100,
            rough_n_sample: 10_000,
            dump_points: 2001,
            keep_records: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VqeConfig {
    pub ansatz: PathBuf,
    /// Total shot budgets to scan.
    pub shot_budget: Vec<u64>,
    /// `None` optimizes on exact expectations.
    pub shots_per_term: Option<u64>,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub fd_scale: f64,
    pub final_fraction: f64,
    pub max_step: f64,
    /// Starting point; defaults to the ansatz file's.
    pub initial_params: Option<Vec<f64>>,
}

impl Default for VqeConfig {
    fn default() -> Self {
        let o = crate::vqe::OptimizerConfig::default();
        Self {
            ansatz: PathBuf::from("data/h2_1ucj.ansatz"),
            shot_budget: vec![10_000_000],
            shots_per_term: o.shots_per_term,
            max_iterations: 1000,
            gradient_tolerance: o.gradient_tolerance,
            fd_scale: o.fd_scale,
            final_fraction: o.final_fraction,
            max_step: o.max_step,
            initial_params: None,
        }
    }
}

impl VqeConfig {
    pub fn optimizer(&self) -> crate::vqe::OptimizerConfig {
        crate::vqe::OptimizerConfig {
            shots_per_term: self.shots_per_term,
            max_iterations: self.max_iterations,
            gradient_tolerance: self.gradient_tolerance,
            fd_scale: self.fd_scale,
            final_fraction: self.final_fraction,
            max_step: self.max_step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub hamiltonian: PathBuf,
    pub algorithm: Algorithm,
    #[serde(default)]
    pub state: StateSpec,
    /// Overrides `pi / (4 ||H||)`.
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_p_phys")]
    pub p_phys: Vec<f64>,
    /// Falls back to `$PHASEBENCH_OUT`, then `phasebench-out`.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Instruction timing table; the built-in estimate otherwise.
    #[serde(default)]
    pub timing: Option<PathBuf>,
    #[serde(default)]
    pub spe: SpeConfig,
    #[serde(default)]
    pub vqe: VqeConfig,
}

fn default_name() -> String {
    "experiment".into()
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_p_phys() -> Vec<f64> {
    vec![0.0]
}

fn bad(field: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        reason: reason.into(),
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(field, format!("{v} is not a positive number")))
    }
}

impl ExperimentConfig {
    pub fn new(hamiltonian: impl Into<PathBuf>, algorithm: Algorithm) -> Self {
        Self {
            name: default_name(),
            hamiltonian: hamiltonian.into(),
            algorithm,
            state: StateSpec::default(),
            tau: None,
            seeds: default_seeds(),
            p_phys: default_p_phys(),
            output_dir: None,
            timing: None,
            spe: SpeConfig::default(),
            vqe: VqeConfig::default(),
        }
    }

    /// Parses and validates; relative paths are kept as written.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config file; relative paths resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Self::parse(&std::fs::read_to_string(path)?)?;
        if let Some(base) = path.parent() {
            let fix = |p: &mut PathBuf| {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            };
            fix(&mut cfg.hamiltonian);
            fix(&mut cfg.vqe.ansatz);
            if let Some(p) = cfg.output_dir.as_mut() {
                fix(p);
            }
            if let Some(p) = cfg.timing.as_mut() {
                fix(p);
            }
        }
        Ok(cfg)
    }

    /// The config with every default filled in.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }

    /// The `eta` used for a given ground overlap.
    pub fn eta(&self, p0: f64) -> f64 {
        self.spe.eta.unwrap_or_else(|| {
            let f = self.spe.eta_factor.unwrap_or(match self.algorithm {
                Algorithm::Lt22 => 0.5,
                _ => 0.7,
            });
            f * p0
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(bad("seeds", "at least one seed is required"));
        }
        if self.p_phys.is_empty() {
            return Err(bad("p_phys", "at least one rate is required"));
        }
        for p in &self.p_phys {
            if !(*p >= 0.0 && p.is_finite()) {
                return Err(bad("p_phys", format!("{p} is not a non-negative rate")));
            }
        }
        if let Some(t) = self.tau {
            positive("tau", t)?;
        }
        let st = &self.state;
        parse_ket(&st.basis_a).map_err(|e| bad("state.basis_a", e.to_string()))?;
        if let Some(b) = &st.basis_b {
            parse_ket(b).map_err(|e| bad("state.basis_b", e.to_string()))?;
            if b.len() != st.basis_a.len() {
                return Err(bad("state.basis_b", "length differs from basis_a"));
            }
            if st.theta.is_some() == st.target_p0.is_some() {
                return Err(bad("state", "give exactly one of theta and target_p0"));
            }
        }
        if let Some(p) = st.target_p0 {
            if !(p > 0.0 && p <= 1.0) {
                return Err(bad("state.target_p0", format!("{p} is not in (0, 1]")));
            }
        }
        let s = &self.spe;
        if let Some(eta) = s.eta {
            if !(eta > 0.0 && eta < 1.0) {
                return Err(bad("spe.eta", format!("{eta} is not in (0, 1)")));
            }
        }
        if let Some(f) = s.eta_factor {
            if !(f > 0.0 && f < 1.0) {
                return Err(bad("spe.eta_factor", format!("{f} is not in (0, 1)")));
            }
        }
        if let DeltaRule::Hartree(v) = s.delta {
            positive("spe.delta", v)?;
        }
        if let Some(t) = s.max_time {
            positive("spe.max_time", t)?;
        }
        if let DeltaRule::Hartree(v) = s.window {
            positive("spe.window", v)?;
        }
        if !(s.delta_fail > 0.0 && s.delta_fail < 1.0) {
            return Err(bad("spe.delta_fail", format!("{} is not in (0, 1)", s.delta_fail)));
        }
        if let Some(n) = s.n_sigma {
            positive("spe.n_sigma", n)?;
        }
        if s.n_sample == Some(0) {
            return Err(bad("spe.n_sample", "must be at least 1"));
        }
        if let Some(c) = s.lt22_constant {
            positive("spe.lt22_constant", c)?;
        }
        if !(s.vartheta > 0.0 && s.vartheta < 1.0) {
            return Err(bad("spe.vartheta", format!("{} is not in (0, 1)", s.vartheta)));
        }
        if s.n_batch == 0 || s.n_batch % 2 == 0 {
            return Err(bad("spe.n_batch", "must be odd"));
        }
        if !(s.bracket_margin >= 0.0 && s.bracket_margin < 1.0) {
            return Err(bad("spe.bracket_margin", "must lie in [0, 1)"));
        }
        if s.trotter_steps == Some(0) {
            return Err(bad("spe.trotter_steps", "must be at least 1"));
        }
        if s.rough_d == 0 || s.rough_n_sample == 0 {
            return Err(bad("spe.rough_d", "rough run needs d >= 1 and rough_n_sample >= 1"));
        }
        if s.dump_points < 2 {
            return Err(bad("spe.dump_points", "need at least 2 points"));
        }
        let needs_shots = self.p_phys.iter().any(|p| *p > 0.0) && self.algorithm != Algorithm::Vqe;
        if needs_shots && (s.backend != BackendKind::Shots || s.trotter_steps.is_none()) {
            return Err(bad(
                "p_phys",
                "noise needs the shots backend with Trotter circuits",
            ));
        }
        match self.algorithm {
            Algorithm::Lt22 => {
                if s.d.is_empty() || s.d.contains(&0) {
                    return Err(bad("spe.d", "need at least one d >= 1"));
                }
            }
            Algorithm::GaussianFilter | Algorithm::GaussianFit => {
                if s.epsilon.is_empty() {
                    return Err(bad("spe.epsilon", "need at least one epsilon"));
                }
                for e in &s.epsilon {
                    positive("spe.epsilon", *e)?;
                }
            }
            Algorithm::Vqe => {
                let v = &self.vqe;
                if v.shot_budget.is_empty() {
                    return Err(bad("vqe.shot_budget", "need at least one budget"));
                }
                if v.shots_per_term == Some(0) {
                    return Err(bad("vqe.shots_per_term", "must be at least 1"));
                }
                if !(0.0..1.0).contains(&v.final_fraction) {
                    return Err(bad("vqe.final_fraction", "must lie in [0, 1)"));
                }
                positive("vqe.fd_scale", v.fd_scale)?;
                positive("vqe.max_step", v.max_step)?;
                positive("vqe.gradient_tolerance", v.gradient_tolerance)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = ExperimentConfig::parse("hamiltonian = \"h.ham\"\nalgorithm = \"lt22\"\n").unwrap();
        assert_eq!(c.seeds, vec![0]);
        assert_eq!(c.spe.d, vec![1000]);
        let again = ExperimentConfig::parse(&c.to_toml().unwrap()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn eta_at_least_one_names_field() {
        let err = ExperimentConfig::parse(
            "hamiltonian = \"h.ham\"\nalgorithm = \"gaussian_fit\"\n[spe]\neta = 1.0\n",
        )
        .unwrap_err();
        match err {
            Error::Config { field, .. } => assert_eq!(field, "spe.eta"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_field_rejected() {
        assert!(ExperimentConfig::parse("hamiltonian = \"h\"\nalgorithm = \"vqe\"\nbogus = 1\n").is_err());
    }

    #[test]
    fn noise_requires_shots() {
        let mut c = ExperimentConfig::new("h", Algorithm::Lt22);
        c.p_phys = vec![1e-4];
        assert!(c.validate().is_err());
        c.spe.backend = BackendKind::Shots;
        c.validate().unwrap();
    }
}
