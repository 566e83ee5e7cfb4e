//! One-call analysis of a channel: closed forms, cross-checks and anomaly flags.

use serde::{Deserialize, Serialize};

use super::closed_form::second_moment_direct;
use super::invariants::ChiInvariants;
use super::kraus_sum::{central_from_raw, moment_complex, DEFAULT_MOMENT_BUDGET};
use crate::channels::KrausChannel;
use crate::error::{Error, Result};

/// Disagreement between variance paths that raises a flag.
pub const PATH_TOL: f64 = 1e-8;
/// Imaginary residue above which a flag is raised.
pub const IMAGINARY_TOL: f64 = 1e-9;
/// Disagreement between the Kraus and closed-form paths for `m ≤ 2` that raises a flag.
pub const KRAUS_PATH_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceMethod {
    /// Subtraction path only; the cross-check disagreed.
    General,
    /// Single-qubit closed form.
    QubitClosedForm,
    /// Subtraction path, confirmed by every available cross-check.
    CrossChecked,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEntry {
    pub order: usize,
    pub raw: f64,
    pub central: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub dim: usize,
    pub avg: f64,
    pub second_moment: f64,
    pub variance: f64,
    pub variance_method: VarianceMethod,
    /// `E[F²] − F̄²` before clamping.
    pub variance_subtraction: f64,
    pub variance_rational: f64,
    pub variance_path_difference: f64,
    /// Single-qubit closed form, present when `dim == 2`.
    pub variance_qubit: Option<f64>,
    /// Direct basis summation of `E[F²]`, present when requested.
    pub second_moment_direct: Option<f64>,
    /// Kraus-path moments for orders `1..=max_moment` when `max_moment > 2`.
    pub higher_moments: Vec<MomentEntry>,
    pub flags: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalysisOptions {
    pub max_moment: usize,
    pub budget: u128,
    /// Also evaluate `E[F²]` by direct basis summation (`d ≤ 4`).
    pub direct_sum: bool,
    /// Report the single-qubit closed form as the variance when `dim == 2`.
    pub prefer_qubit_form: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            max_moment: 2,
            budget: DEFAULT_MOMENT_BUDGET,
            direct_sum: false,
            prefer_qubit_form: false,
        }
    }
}

pub fn analyze(channel: &KrausChannel, opts: &AnalysisOptions) -> Result<MomentReport> {
    let inv = ChiInvariants::from_channel(channel)?;
    let mut flags = Vec::new();
    if inv.max_imaginary > IMAGINARY_TOL {
        flags.push(format!(
            "imaginary residue {:.3e} in invariants",
            inv.max_imaginary
        ));
    }

    let avg = inv.average_fidelity();
    let second = inv.second_moment();
    let var = inv.variance()?;
    if var.clamped {
        flags.push(format!("negative variance {:.3e} clamped to 0", var.raw));
    }
    let mut agreed = var.path_difference() <= PATH_TOL;
    if !agreed {
        flags.push(format!(
            "variance paths disagree by {:.3e}",
            var.path_difference()
        ));
    }

    let variance_qubit = if inv.dim == 2 {
        let q = inv.variance_qubit()?;
        if (q - var.raw).abs() > PATH_TOL {
            agreed = false;
            flags.push(format!(
                "qubit closed form differs by {:.3e}",
                (q - var.raw).abs()
            ));
        }
        Some(q)
    } else {
        None
    };

    let second_moment_direct = if opts.direct_sum {
        let direct = second_moment_direct(channel)?;
        if (direct - second).abs() > PATH_TOL {
            agreed = false;
            flags.push(format!(
                "direct sum differs by {:.3e}",
                (direct - second).abs()
            ));
        }
        Some(direct)
    } else {
        None
    };

    let mut higher_moments = Vec::new();
    if opts.max_moment > 2 {
        let mut raw = Vec::with_capacity(opts.max_moment);
        for m in 1..=opts.max_moment {
            let z = moment_complex(channel, m, opts.budget)?;
            if z.im.abs() > IMAGINARY_TOL {
                flags.push(format!(
                    "imaginary residue {:.3e} in moment {m}",
                    z.im.abs()
                ));
            }
            raw.push(z.re);
            higher_moments.push(MomentEntry {
                order: m,
                raw: z.re,
                central: central_from_raw(&raw),
            });
        }
        for (m, closed) in [(1, avg), (2, second)] {
            let diff = (raw[m - 1] - closed).abs();
            if diff > KRAUS_PATH_TOL {
                flags.push(format!("Kraus-path moment {m} differs by {diff:.3e}"));
            }
        }
    } else if opts.max_moment == 0 {
        return Err(Error::ParameterOutOfRange {
            name: "max_moment",
            value: 0.0,
        });
    }

    let (variance, variance_method) = match variance_qubit {
        Some(q) if opts.prefer_qubit_form => (q.max(0.0), VarianceMethod::QubitClosedForm),
        _ if agreed => (var.value, VarianceMethod::CrossChecked),
        _ => (var.value, VarianceMethod::General),
    };

    Ok(MomentReport {
        dim: inv.dim,
        avg,
        second_moment: second,
        variance,
        variance_method,
        variance_subtraction: var.raw,
        variance_rational: var.rational,
        variance_path_difference: var.path_difference(),
        variance_qubit,
        second_moment_direct,
        higher_moments,
        flags,
    })
}
