//! Monte Carlo estimates of fidelity moments from Haar-random pure states.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{complex_normal, KrausChannel};
use crate::error::{Error, Result};
use crate::moments::{gate_fidelity, MomentReport};
use crate::tensor::{norm_sqr, C64};

/// Comparisons fail when `|z|` reaches this many standard errors.
pub const DEFAULT_Z_GATE: f64 = 5.0;
/// Standard errors at or below this are treated as zero, and the comparison
/// falls back to an absolute tolerance.
pub const ZERO_STDERR: f64 = 1e-12;
pub const ABSOLUTE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleConfig {
    n_samples: usize,
    seed: u64,
    shards: usize,
}

impl SampleConfig {
    pub fn new(n_samples: usize, seed: u64) -> Result<Self> {
        Self::with_shards(n_samples, seed, 1)
    }

    pub fn with_shards(n_samples: usize, seed: u64, shards: usize) -> Result<Self> {
        if n_samples < 2 {
            return Err(Error::InvalidConfig("n_samples must be at least 2"));
        }
        if shards == 0 {
            return Err(Error::InvalidConfig("shards must be at least 1"));
        }
        if shards > n_samples {
            return Err(Error::InvalidConfig("shards must not exceed n_samples"));
        }
        Ok(Self {
            n_samples,
            seed,
            shards,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn shards(&self) -> usize {
        self.shards
    }

    fn shard_len(&self, shard: usize) -> usize {
        self.n_samples / self.shards + usize::from(shard < self.n_samples % self.shards)
    }
}

/// Fubini-Study random pure state: `d` standard complex normals, normalized.
pub fn haar_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..d).map(|_| complex_normal(rng)).collect();
        let norm = norm_sqr(&v).sqrt();
        if norm > 0.0 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Generator for shard `shard`: the seeded ChaCha stream with id `shard + 1`.
/// Stream 0 is what the channel generators use, so a channel and its
/// sampler can share a seed without sharing random numbers.
pub fn shard_rng(seed: u64, shard: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard as u64 + 1);
    rng
}

/// Per-state fidelities, concatenated in shard order.
pub fn sample_fidelities(channel: &KrausChannel, cfg: &SampleConfig) -> Result<Vec<f64>> {
    let d = channel.dim();
    let shards: Vec<Vec<f64>> = (0..cfg.shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = shard_rng(cfg.seed, s);
            (0..cfg.shard_len(s))
                .map(|_| {
                    gate_fidelity(channel, &haar_state(d, &mut rng)).map(|f| f.clamp(0.0, 1.0))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(shards.concat())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub standard_error: f64,
}

/// Sample mean of `values` with standard error `s/√N`.
pub fn mean_with_error(values: &[f64]) -> Estimate {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|x| (x - mean).powi(2)).sum();
    Estimate {
        mean,
        standard_error: (ss / (n - 1.0)).sqrt() / n.sqrt(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub order: usize,
    pub estimate: f64,
    pub standard_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMoments {
    pub n_samples: usize,
    pub seed: u64,
    pub shards: usize,
    /// `E[F^m]` for `m = 1..=m_max`.
    pub moments: Vec<MomentEstimate>,
    /// Unbiased sample variance of `F`.
    pub variance: f64,
    /// Delta-method standard error `√((m₄ − m₂²)/N)` from central sample moments.
    pub variance_standard_error: f64,
}

impl EmpiricalMoments {
    pub fn moment(&self, order: usize) -> Option<&MomentEstimate> {
        self.moments.iter().find(|m| m.order == order)
    }
}

pub fn estimate_moments(
    channel: &KrausChannel,
    m_max: usize,
    cfg: &SampleConfig,
) -> Result<EmpiricalMoments> {
    if m_max == 0 {
        return Err(Error::ParameterOutOfRange {
            name: "m_max",
            value: 0.0,
        });
    }
    let fs = sample_fidelities(channel, cfg)?;
    Ok(summarize(&fs, m_max, cfg))
}

fn summarize(fs: &[f64], m_max: usize, cfg: &SampleConfig) -> EmpiricalMoments {
    let n = fs.len() as f64;
    let moments = (1..=m_max)
        .map(|m| {
            let powers: Vec<f64> = fs.iter().map(|f| f.powi(m as i32)).collect();
            let e = mean_with_error(&powers);
            MomentEstimate {
                order: m,
                estimate: e.mean,
                standard_error: e.standard_error,
            }
        })
        .collect();
    let mean = fs.iter().sum::<f64>() / n;
    let m2 = fs.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / n;
    let m4 = fs.iter().map(|f| (f - mean).powi(4)).sum::<f64>() / n;
    EmpiricalMoments {
        n_samples: fs.len(),
        seed: cfg.seed,
        shards: cfg.shards,
        moments,
        variance: m2 * n / (n - 1.0),
        variance_standard_error: ((m4 - m2 * m2).max(0.0) / n).sqrt(),
    }
}

/// Sample mean of `g(F)`; used for statistics beyond raw moments.
pub fn estimate_statistic(
    channel: &KrausChannel,
    cfg: &SampleConfig,
    g: impl Fn(f64) -> f64,
) -> Result<Estimate> {
    let values: Vec<f64> = sample_fidelities(channel, cfg)?
        .into_iter()
        .map(g)
        .collect();
    Ok(mean_with_error(&values))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub quantity: String,
    pub analytic: f64,
    pub empirical: f64,
    pub standard_error: f64,
    /// `(analytic − empirical)/stderr`; absent when the standard error is zero.
    pub z: Option<f64>,
    pub pass: bool,
}

impl Comparison {
    pub fn new(
        quantity: impl Into<String>,
        analytic: f64,
        empirical: f64,
        standard_error: f64,
        gate: f64,
    ) -> Self {
        let diff = analytic - empirical;
        let (z, pass) = if standard_error <= ZERO_STDERR {
            (None, diff.abs() <= ABSOLUTE_TOL)
        } else {
            let z = diff / standard_error;
            (Some(z), z.abs() < gate)
        };
        Self {
            quantity: quantity.into(),
            analytic,
            empirical,
            standard_error,
            z,
            pass,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub gate: f64,
    pub rows: Vec<Comparison>,
    pub all_pass: bool,
}

pub fn compare(analytic: &MomentReport, empirical: &EmpiricalMoments) -> ComparisonTable {
    compare_with_gate(analytic, empirical, DEFAULT_Z_GATE)
}

/// z-scores for `E[F]`, `E[F²]`, the variance, and any higher raw moment
/// present in both inputs.
pub fn compare_with_gate(
    analytic: &MomentReport,
    empirical: &EmpiricalMoments,
    gate: f64,
) -> ComparisonTable {
    let mut rows = Vec::new();
    let mut push_moment = |name: String, order: usize, value: f64| {
        if let Some(e) = empirical.moment(order) {
            rows.push(Comparison::new(
                name,
                value,
                e.estimate,
                e.standard_error,
                gate,
            ));
        }
    };
    push_moment("E[F]".into(), 1, analytic.avg);
    push_moment("E[F^2]".into(), 2, analytic.second_moment);
    for h in analytic.higher_moments.iter().filter(|h| h.order > 2) {
        push_moment(format!("E[F^{}]", h.order), h.order, h.raw);
    }
    if empirical.moment(2).is_some() {
        rows.push(Comparison::new(
            "Var(F)",
            analytic.variance,
            empirical.variance,
            empirical.variance_standard_error,
            gate,
        ));
    }
    let all_pass = rows.iter().all(|r| r.pass);
    ComparisonTable {
        gate,
        rows,
        all_pass,
    }
}
