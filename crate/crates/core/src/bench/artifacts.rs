//! Per-run artifacts and the post-processing step shared by live runs and
//! offline re-analysis.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bench::config::Algorithm;
use crate::error::{Error, Result};
use crate::postprocess::{
    fit_window, gaussian_fit, gaussian_zero_search, lt22_search, GaussianFitResult, Lt22Outcome, ZeroSearchResult,
};
use crate::spe::{linear_grid, read_records_csv, FilterSpec, ModeTally, ShotRecord, Signal};

pub const META_FILE: &str = "meta.json";
pub const TALLY_FILE: &str = "tally.csv";
pub const RECORDS_FILE: &str = "records.csv";
pub const SIGNAL_FILE: &str = "signal.csv";
pub const RESULT_FILE: &str = "result.json";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lt22Settings {
    pub bracket: (f64, f64),
    pub tolerance: f64,
    pub n_batch: usize,
    /// Points of the persisted signal across the bracket.
    pub dump_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSettings {
    pub sigma: f64,
    pub t_cut: f64,
    pub grid_points: usize,
    /// Gap parameter of the schedule, normalized units.
    pub delta: f64,
    pub x_rough: f64,
    pub rough_from_lt22: bool,
    /// Fit half-window in units of `sigma / 4`; unused by the zero search.
    pub n_sigma: Option<f64>,
}

/// Everything needed to rebuild the signal and redo the post-processing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub algorithm: Algorithm,
    pub filter: FilterSpec,
    pub total_weight: f64,
    pub n_sample: u64,
    pub tau: f64,
    pub eta: f64,
    pub p_phys: f64,
    pub seed: u64,
    pub exact_energy: f64,
    #[serde(default)]
    pub lt22: Option<Lt22Settings>,
    #[serde(default)]
    pub gaussian: Option<GaussianSettings>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PostResult {
    Lt22(Lt22Outcome),
    Zero(ZeroSearchResult),
    Fit(GaussianFitResult),
}

impl PostResult {
    pub fn energy(&self) -> f64 {
        match self {
            PostResult::Lt22(o) => o.energy,
            PostResult::Zero(z) => z.energy,
            PostResult::Fit(f) => f.lambda_star,
        }
    }

    pub fn p_star(&self) -> Option<f64> {
        match self {
            PostResult::Fit(f) => Some(f.p_star),
            _ => None,
        }
    }
}

fn missing(what: &str) -> Error {
    Error::Format(format!("run metadata has no {what} settings"))
}

impl RunMeta {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        serde_json::to_writer_pretty(BufWriter::new(File::create(path)?), self)?;
        Ok(())
    }

    /// The grid the run's signal is evaluated on.
    pub fn signal_grid(&self) -> Result<Vec<f64>> {
        match self.algorithm {
            Algorithm::Lt22 => {
                let s = self.lt22.ok_or_else(|| missing("lt22"))?;
                Ok(linear_grid(s.bracket.0, s.bracket.1, s.dump_points))
            }
            Algorithm::GaussianFilter => {
                let g = self.gaussian.ok_or_else(|| missing("gaussian"))?;
                Ok(linear_grid(g.x_rough - g.sigma / 4.0, g.x_rough + g.sigma / 4.0, g.grid_points))
            }
            Algorithm::GaussianFit => {
                let g = self.gaussian.ok_or_else(|| missing("gaussian"))?;
                let n_sigma = g.n_sigma.ok_or_else(|| missing("n_sigma"))?;
                Ok(fit_window(g.x_rough, g.sigma, n_sigma, g.grid_points))
            }
            Algorithm::Vqe => Err(Error::param("algorithm", "vqe runs have no signal")),
        }
    }
}

/// Signal on the run's grid plus the energy estimate from it.
pub fn postprocess_run(meta: &RunMeta, tally: &ModeTally) -> Result<(Signal, PostResult)> {
    let signal = Signal::from_tally(tally, meta.tau, meta.signal_grid()?)?;
    let result = match meta.algorithm {
        Algorithm::Lt22 => {
            let s = meta.lt22.ok_or_else(|| missing("lt22"))?;
            PostResult::Lt22(lt22_search(&mut &*tally, s.bracket, meta.eta, s.tolerance, s.n_batch, meta.tau)?)
        }
        Algorithm::GaussianFilter => {
            let g = meta.gaussian.ok_or_else(|| missing("gaussian"))?;
            PostResult::Zero(gaussian_zero_search(
                |x| tally.evaluate(x).re,
                g.x_rough,
                g.sigma,
                meta.tau,
                g.grid_points,
            )?)
        }
        Algorithm::GaussianFit => {
            let g = meta.gaussian.ok_or_else(|| missing("gaussian"))?;
            PostResult::Fit(gaussian_fit(&signal, g.sigma)?)
        }
        Algorithm::Vqe => return Err(Error::param("algorithm", "vqe runs have no signal")),
    };
    Ok((signal, result))
}

/// A persisted run directory.
pub struct RunArtifacts {
    pub meta: RunMeta,
    pub tally: ModeTally,
    pub records: Option<Vec<ShotRecord>>,
}

impl RunArtifacts {
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let meta = RunMeta::load(dir.join(META_FILE))?;
        let tally = ModeTally::read_csv(
            BufReader::new(File::open(dir.join(TALLY_FILE))?),
            meta.total_weight,
            meta.n_sample as f64,
        )?;
        let rp = dir.join(RECORDS_FILE);
        let records = if rp.exists() {
            Some(read_records_csv(BufReader::new(File::open(rp)?))?)
        } else {
            None
        };
        Ok(Self { meta, tally, records })
    }
}
