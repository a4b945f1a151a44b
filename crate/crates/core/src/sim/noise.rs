//! Logical error model for analog `Rz` rotations.
//!
//! Clifford gates are error-free. Each `Rz` fails with probability
//! `P_L = 1 - (1 - 2 p_phys / 15)^2`: the post-selected ancilla has logical
//! error rate `2 p_phys / 15` and a rotation takes two attempts on average.

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::Pauli;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseChannel {
    /// Phase flip on the rotated qubit.
    #[default]
    ZFlip,
    /// Uniformly random X, Y or Z on the rotated qubit.
    Depolarizing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p_phys: f64,
    #[serde(default)]
    pub channel: NoiseChannel,
}

/// An error inserted right after the `rz_ordinal`-th `Rz` of a circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ErrorSite {
    pub rz_ordinal: usize,
    pub pauli: Pauli,
}

/// `P_L = 1 - (1 - 2p/15)^2`, evaluated without the small-`p` approximation.
pub fn logical_error_rate(p_phys: f64) -> f64 {
    let keep = 1.0 - 2.0 * p_phys / 15.0;
    1.0 - keep * keep
}

/// The physical rate giving `P_L = 1`, i.e. `p = 7.5`.
pub const P_PHYS_CERTAIN_FAILURE: f64 = 7.5;

impl NoiseModel {
    pub fn new(p_phys: f64, channel: NoiseChannel) -> Result<Self> {
        if !(0.0..=P_PHYS_CERTAIN_FAILURE).contains(&p_phys) {
            return Err(Error::param(
                "p_phys",
                format!("{p_phys} gives a logical error rate outside [0, 1]"),
            ));
        }
        Ok(Self { p_phys, channel })
    }

    pub fn z_flip(p_phys: f64) -> Result<Self> {
        Self::new(p_phys, NoiseChannel::ZFlip)
    }

    pub fn logical_error_rate(&self) -> f64 {
        logical_error_rate(self.p_phys)
    }

    /// Probability that none of `n_rz` rotations fails.
    pub fn survival(&self, n_rz: usize) -> f64 {
        let q = self.logical_error_rate();
        if q >= 1.0 {
            return if n_rz == 0 { 1.0 } else { 0.0 };
        }
        (n_rz as f64 * (-q).ln_1p()).exp()
    }

    fn draw_pauli<R: Rng + ?Sized>(&self, rng: &mut R) -> Pauli {
        match self.channel {
            NoiseChannel::ZFlip => Pauli::Z,
            NoiseChannel::Depolarizing => match rng.random_range(0..3) {
                0 => Pauli::X,
                1 => Pauli::Y,
                _ => Pauli::Z,
            },
        }
    }

    /// Independent failures over `n_rz` rotations, using geometric skips.
    pub fn sample_sites<R: Rng + ?Sized>(&self, n_rz: usize, rng: &mut R) -> Vec<ErrorSite> {
        let mut out = Vec::new();
        self.fill_from(0, n_rz, rng, &mut out);
        out
    }

    /// Same distribution as [`sample_sites`](Self::sample_sites) conditioned
    /// on at least one failure. Returns an empty list only if `n_rz == 0` or
    /// the rate is zero.
    pub fn sample_sites_nonempty<R: Rng + ?Sized>(
        &self,
        n_rz: usize,
        rng: &mut R,
    ) -> Vec<ErrorSite> {
        let q = self.logical_error_rate();
        if n_rz == 0 || q <= 0.0 {
            return Vec::new();
        }
        let first = if q >= 1.0 {
            0
        } else {
            // Inverse CDF of the first failure position, truncated to [0, n_rz).
            let log_keep = (-q).ln_1p();
            let any = -(n_rz as f64 * log_keep).exp_m1();
            let u: f64 = rng.random();
            let j = ((-u * any).ln_1p() / log_keep).ceil() - 1.0;
            (j.max(0.0) as usize).min(n_rz - 1)
        };
        let mut out = vec![ErrorSite {
            rz_ordinal: first,
            pauli: self.draw_pauli(rng),
        }];
        self.fill_from(first + 1, n_rz, rng, &mut out);
        out
    }

    fn fill_from<R: Rng + ?Sized>(
        &self,
        start: usize,
        n_rz: usize,
        rng: &mut R,
        out: &mut Vec<ErrorSite>,
    ) {
        let q = self.logical_error_rate();
        if q <= 0.0 {
            return;
        }
        if q >= 1.0 {
            for i in start..n_rz {
                out.push(ErrorSite {
                    rz_ordinal: i,
                    pauli: self.draw_pauli(rng),
                });
            }
            return;
        }
        let geo = Geometric::new(q).expect("rate in (0, 1)");
        let mut pos = start as u64;
        loop {
            pos = pos.saturating_add(geo.sample(rng));
            if pos >= n_rz as u64 {
                break;
            }
            out.push(ErrorSite {
                rz_ordinal: pos as usize,
                pauli: self.draw_pauli(rng),
            });
            pos += 1;
        }
    }
}
