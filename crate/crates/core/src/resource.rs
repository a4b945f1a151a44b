//! Evolution-time indicators, circuit fidelity and execution-time estimates.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::noise::logical_error_rate;
use crate::sim::{Circuit, Gate};

/// `(max |t_i|, sum |t_i|)`; `(0, 0)` for an empty list.
pub fn accumulate(times: &[f64]) -> (f64, f64) {
    times.iter().fold((0.0, 0.0), |(mx, tot), t| (f64::max(mx, t.abs()), tot + t.abs()))
}

/// `(1 - P_L)^{n_rz}`.
pub fn fidelity_from_count(n_rz: usize, p_phys: f64) -> f64 {
    let q = logical_error_rate(p_phys);
    if q >= 1.0 {
        return if n_rz == 0 { 1.0 } else { 0.0 };
    }
    (n_rz as f64 * (-q).ln_1p()).exp()
}

fn check_transpiled(circuit: &Circuit) -> Result<()> {
    match circuit.gates().iter().find(|g| !g.is_native()) {
        Some(g) => Err(Error::UntranspiledGate(format!("{g:?}"))),
        None => Ok(()),
    }
}

/// Logical fidelity of a transpiled circuit; Cliffords are error-free.
pub fn circuit_fidelity(circuit: &Circuit, p_phys: f64) -> Result<f64> {
    check_transpiled(circuit)?;
    Ok(fidelity_from_count(circuit.rz_count(), p_phys))
}

/// `N_Rz` implied by a fidelity: `ln f / ln(1 - P_L)`.
pub fn implied_rz_count(fidelity: f64, p_phys: f64) -> f64 {
    fidelity.ln() / (-logical_error_rate(p_phys)).ln_1p()
}

/// `(ln f_1 / ln f_2, ln f_2 / ln f_3)` for three fidelities at decreasing rates.
/// For rates a decade apart both ratios are close to 10 when `ln f` is linear in `p`.
pub fn log_fidelity_ratios(fidelities: [f64; 3]) -> (f64, f64) {
    let l = fidelities.map(f64::ln);
    (l[0] / l[1], l[1] / l[2])
}

/// Instruction times in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingTable {
    #[serde(default)]
    pub code_distance: Option<u32>,
    #[serde(default)]
    pub note: Option<String>,
    pub seconds: BTreeMap<String, f64>,
}

impl Default for TimingTable {
    /// Model estimate for distance 9 with a 1 us code cycle.
    fn default() -> Self {
        let seconds = [("cnot", 18e-6), ("h", 27e-6), ("rz", 20e-6)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        Self {
            code_distance: Some(9),
            note: Some("model estimate".into()),
            seconds,
        }
    }
}

impl TimingTable {
    pub fn parse(text: &str) -> Result<Self> {
        let t: TimingTable = toml::from_str(text)?;
        t.validate()?;
        Ok(t)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        for (k, v) in &self.seconds {
            if !(*v > 0.0 && v.is_finite()) {
                return Err(Error::Config {
                    field: format!("seconds.{k}"),
                    reason: format!("{v} is not a positive time"),
                });
            }
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Result<f64> {
        self.seconds.get(key).copied().ok_or_else(|| Error::MissingTiming(key.into()))
    }
}

/// Sum of instruction times of a transpiled circuit.
pub fn execution_time(circuit: &Circuit, timing: &TimingTable) -> Result<f64> {
    check_transpiled(circuit)?;
    let mut total = 0.0;
    for g in circuit.gates() {
        total += match g {
            Gate::H(_) => timing.get("h")?,
            Gate::Cnot { .. } => timing.get("cnot")?,
            Gate::Rz { .. } => timing.get("rz")?,
            other => return Err(Error::UntranspiledGate(format!("{other:?}"))),
        };
    }
    Ok(total)
}

/// Per-run accounting.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResourceLedger {
    pub t_max: f64,
    pub t_total: f64,
    /// Circuit executions (shots).
    pub n_shots: u64,
    pub rz_count: Option<usize>,
    pub circuit_fidelity: Option<f64>,
    pub est_execution_seconds: Option<f64>,
}

impl ResourceLedger {
    pub fn from_times(times: &[f64]) -> Self {
        let (t_max, t_total) = accumulate(times);
        Self {
            t_max,
            t_total,
            n_shots: times.len() as u64,
            ..Self::default()
        }
    }

    /// Adds fidelity and wall time for `n_shots` runs of `circuit`.
    pub fn with_circuit(mut self, circuit: &Circuit, p_phys: f64, timing: &TimingTable) -> Result<Self> {
        self.rz_count = Some(circuit.rz_count());
        self.circuit_fidelity = Some(circuit_fidelity(circuit, p_phys)?);
        self.est_execution_seconds = Some(execution_time(circuit, timing)? * self.n_shots as f64);
        Ok(self)
    }
}
