//! Variance across dimensions for families of random channels.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::closed_form::variance;
use crate::channels::{depolarizing, random_cptp, KrausChannel};
use crate::error::{Error, Result};

/// Channels drawn at each dimension of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SweepFamily {
    RandomCptp { rank: usize },
    Depolarizing { p: f64 },
}

impl SweepFamily {
    fn draw(&self, d: usize, seed: u64) -> Result<KrausChannel> {
        match *self {
            SweepFamily::RandomCptp { rank } => random_cptp(d, rank, seed),
            SweepFamily::Depolarizing { p } => depolarizing(d, p),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub d: usize,
    pub mean_var: f64,
    pub max_var: f64,
    pub d_times_max_var: f64,
    /// Variance of the identity channel at this dimension.
    pub control_var: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub family: SweepFamily,
    pub trials: usize,
    pub seed: u64,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// `d·max_var` at the smallest swept dimension.
    pub fn baseline(&self) -> Option<f64> {
        self.rows
            .iter()
            .min_by_key(|r| r.d)
            .map(|r| r.d_times_max_var)
    }

    /// True when no row's `d·max_var` exceeds `factor` times the baseline.
    pub fn trend_ok(&self, factor: f64) -> bool {
        let Some(base) = self.baseline() else {
            return true;
        };
        self.rows
            .iter()
            .all(|r| r.d_times_max_var <= factor * base + 1e-12)
    }
}

/// Seed of trial `t` at dimension `d`, decorrelated with a SplitMix64 finalizer.
pub fn trial_seed(seed: u64, d: usize, trial: usize) -> u64 {
    let mut z = seed
        .wrapping_add((d as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add((trial as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// For each `d`, draws `trials` channels from `family` and tabulates their variances.
pub fn sweep(dims: &[usize], family: SweepFamily, trials: usize, seed: u64) -> Result<SweepTable> {
    if trials == 0 {
        return Err(Error::ParameterOutOfRange {
            name: "trials",
            value: 0.0,
        });
    }
    let mut rows = Vec::with_capacity(dims.len());
    for &d in dims {
        let vars: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|t| variance(&family.draw(d, trial_seed(seed, d, t))?))
            .collect::<Result<_>>()?;
        let mean_var = vars.iter().sum::<f64>() / trials as f64;
        let max_var = vars.iter().copied().fold(0.0, f64::max);
        rows.push(SweepRow {
            d,
            mean_var,
            max_var,
            d_times_max_var: d as f64 * max_var,
            control_var: variance(&KrausChannel::identity(d)?)?,
        });
    }
    Ok(SweepTable {
        family,
        trials,
        seed,
        rows,
    })
}

/// Random CPTP sweep of the given Choi rank.
pub fn scaling_sweep(dims: &[usize], rank: usize, trials: usize, seed: u64) -> Result<SweepTable> {
    sweep(dims, SweepFamily::RandomCptp { rank }, trials, seed)
}
