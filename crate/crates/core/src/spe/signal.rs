//! Shot records, per-mode tallies and the reconstructed signal `Z(x)`.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::NoiseModel;
use crate::spe::filter::{FilterSpec, FourierSampler};

/// One SPE sample: a mode draw plus the two Hadamard-test outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub sample_index: u64,
    pub k: f64,
    pub phi: f64,
    pub t: f64,
    #[serde(rename = "X")]
    pub x: i8,
    #[serde(rename = "Y")]
    pub y: i8,
}

/// Contribution of one Fourier mode: `count` samples whose outcomes sum to `sum`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeEntry {
    pub k: f64,
    pub phi: f64,
    /// Number of samples drawn for this mode (a real weight in exact mode).
    pub count: f64,
    pub sum_re: f64,
    pub sum_im: f64,
}

/// Records folded by mode. Evaluates `Z(x) = F_total / N * sum_n e^{i phi_n}
/// e^{i k_n x} S_n` in time proportional to the number of distinct modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeTally {
    pub total_weight: f64,
    pub n_sample: f64,
    pub modes: Vec<ModeEntry>,
}

impl ModeTally {
    pub fn from_records(records: &[ShotRecord], total_weight: f64) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyRecords);
        }
        let mut by_mode: BTreeMap<(u64, u64), ModeEntry> = BTreeMap::new();
        for r in records {
            let e = by_mode.entry((r.k.to_bits(), r.phi.to_bits())).or_insert(ModeEntry {
                k: r.k,
                phi: r.phi,
                count: 0.0,
                sum_re: 0.0,
                sum_im: 0.0,
            });
            e.count += 1.0;
            e.sum_re += r.x as f64;
            e.sum_im += r.y as f64;
        }
        Ok(Self {
            total_weight,
            n_sample: records.len() as f64,
            modes: by_mode.into_values().collect(),
        })
    }

    pub fn evaluate(&self, x: f64) -> Complex64 {
        self.fold(x, |_| Complex64::new(1.0, 0.0))
    }

    /// `dZ/dx`, from the same samples.
    pub fn evaluate_derivative(&self, x: f64) -> Complex64 {
        self.fold(x, |k| Complex64::new(0.0, k))
    }

    fn fold(&self, x: f64, factor: impl Fn(f64) -> Complex64) -> Complex64 {
        let s: Complex64 = self
            .modes
            .iter()
            .map(|m| factor(m.k) * Complex64::from_polar(1.0, m.phi + m.k * x) * Complex64::new(m.sum_re, m.sum_im))
            .sum();
        s * (self.total_weight / self.n_sample)
    }

    /// Combines two tallies as if their samples had been collected together.
    pub fn merge(&self, other: &ModeTally) -> Result<ModeTally> {
        if (self.total_weight - other.total_weight).abs() > 1e-12 * self.total_weight.abs() {
            return Err(Error::param("tally", "cannot merge tallies of different filters"));
        }
        let mut by_mode: BTreeMap<(u64, u64), ModeEntry> = BTreeMap::new();
        for m in self.modes.iter().chain(&other.modes) {
            let e = by_mode.entry((m.k.to_bits(), m.phi.to_bits())).or_insert(ModeEntry {
                count: 0.0,
                sum_re: 0.0,
                sum_im: 0.0,
                ..*m
            });
            e.count += m.count;
            e.sum_re += m.sum_re;
            e.sum_im += m.sum_im;
        }
        Ok(ModeTally {
            total_weight: self.total_weight,
            n_sample: self.n_sample + other.n_sample,
            modes: by_mode.into_values().collect(),
        })
    }

    /// `(max_m |t_m|, sum_m 2 |t_m|)`: each sample runs two circuits.
    pub fn evolution_times(&self, tau: f64) -> (f64, f64) {
        let mut t_max: f64 = 0.0;
        let mut t_total = 0.0;
        for m in &self.modes {
            if m.count > 0.0 {
                let t = (m.k * tau).abs();
                t_max = t_max.max(t);
                t_total += 2.0 * m.count * t;
            }
        }
        (t_max, t_total)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for m in &self.modes {
            wr.serialize(m)?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads a tally written by [`ModeTally::write_csv`]; the filter weight
    /// and sample count are not part of the file.
    pub fn read_csv<R: Read>(r: R, total_weight: f64, n_sample: f64) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let modes = rd.deserialize().collect::<std::result::Result<Vec<ModeEntry>, _>>()?;
        if modes.is_empty() {
            return Err(Error::EmptyRecords);
        }
        Ok(Self {
            total_weight,
            n_sample,
            modes,
        })
    }
}

/// Run metadata carried with a signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalMeta {
    pub filter: FilterSpec,
    pub n_sample: u64,
    pub noise: Option<NoiseModel>,
    pub seed: u64,
}

/// `Z(x)` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    pub x_grid: Vec<f64>,
    pub z_values: Vec<Complex64>,
    pub tau: f64,
    pub meta: Option<SignalMeta>,
}

#[derive(Serialize, Deserialize)]
struct SignalRow {
    x: f64,
    re_z: f64,
    im_z: f64,
}

fn check_grid(x_grid: &[f64]) -> Result<()> {
    if x_grid.is_empty() {
        return Err(Error::param("x_grid", "grid is empty"));
    }
    if x_grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::param("x_grid", "grid contains non-finite points"));
    }
    if x_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("x_grid", "grid is not strictly increasing"));
    }
    Ok(())
}

/// Evenly spaced grid with `m` points on `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    if m == 1 {
        return vec![0.5 * (lo + hi)];
    }
    let step = (hi - lo) / (m - 1) as f64;
    (0..m).map(|i| lo + step * i as f64).collect()
}

impl Signal {
    pub fn from_tally(tally: &ModeTally, tau: f64, x_grid: Vec<f64>) -> Result<Self> {
        check_grid(&x_grid)?;
        let z_values = x_grid.iter().map(|x| tally.evaluate(*x)).collect();
        Ok(Self {
            x_grid,
            z_values,
            tau,
            meta: None,
        })
    }

    pub fn with_meta(mut self, meta: SignalMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn len(&self) -> usize {
        self.x_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_grid.is_empty()
    }

    /// Grid converted to energies `x / tau`.
    pub fn energies(&self) -> Vec<f64> {
        self.x_grid.iter().map(|x| x / self.tau).collect()
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.z_values.iter().map(|z| z.re).collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for (x, z) in self.x_grid.iter().zip(&self.z_values) {
            wr.serialize(SignalRow {
                x: *x,
                re_z: z.re,
                im_z: z.im,
            })?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, tau: f64) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut x_grid = Vec::new();
        let mut z_values = Vec::new();
        for row in rd.deserialize() {
            let row: SignalRow = row?;
            x_grid.push(row.x);
            z_values.push(Complex64::new(row.re_z, row.im_z));
        }
        check_grid(&x_grid)?;
        Ok(Self {
            x_grid,
            z_values,
            tau,
            meta: None,
        })
    }
}

/// Evaluates `Z(x)` from raw shot records; no new shots are needed to
/// change the grid.
pub fn evaluate_signal(
    records: &[ShotRecord],
    sampler: &FourierSampler,
    tau: f64,
    x_grid: &[f64],
) -> Result<Signal> {
    let tally = ModeTally::from_records(records, sampler.total_weight())?;
    Signal::from_tally(&tally, tau, x_grid.to_vec())
}

pub fn write_records_csv<W: Write>(records: &[ShotRecord], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_records_csv<R: Read>(r: R) -> Result<Vec<ShotRecord>> {
    let mut rd = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for row in rd.deserialize() {
        let rec: ShotRecord = row?;
        if !matches!(rec.x, -1 | 1) || !matches!(rec.y, -1 | 1) {
            return Err(Error::Format(format!(
                "sample {}: outcomes must be +1 or -1",
                rec.sample_index
            )));
        }
        out.push(rec);
    }
    Ok(out)
}

/// `(max |t|, sum 2 |t|)` over raw records, in record order.
pub fn record_times(records: &[ShotRecord]) -> (f64, f64) {
    records
        .iter()
        .fold((0.0, 0.0), |(mx, tot), r| (f64::max(mx, r.t.abs()), tot + 2.0 * r.t.abs()))
}
