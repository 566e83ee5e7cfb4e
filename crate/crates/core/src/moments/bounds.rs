//! Coefficient form of the variance and the magnitude bounds behind its `O(1/d)` decay.
//!
//! `Var(F) = (r d⁴ + s d³ + u d² + v d + w) / (d (d+1)² (d+2) (d+3))`, where
//! each coefficient is built from quantities with dimension-independent or
//! `d²`-scaled bounds.

use serde::{Deserialize, Serialize};

use super::invariants::ChiInvariants;
use crate::channels::KrausChannel;
use crate::error::Result;

/// A bound counts as violated only when its slack is below `-BOUND_TOL`.
pub const BOUND_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceCoefficients {
    pub r: f64,
    pub s: f64,
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    /// Distance to the nearer end of `[lower, upper]`; negative when outside.
    pub slack: f64,
    pub holds: bool,
}

impl BoundCheck {
    fn interval(name: &str, value: f64, lower: f64, upper: f64) -> Self {
        let slack = (value - lower).min(upper - value);
        Self {
            name: name.to_owned(),
            value,
            lower,
            upper,
            slack,
            holds: slack >= -BOUND_TOL,
        }
    }

    fn magnitude(name: &str, value: f64, limit: f64) -> Self {
        Self::interval(name, value, -limit, limit)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub dim: usize,
    pub coefficients: VarianceCoefficients,
    /// Variance evaluated from the coefficients.
    pub variance: f64,
    /// `Σ_l tr[(χ_l0 + χ_0l) P_l Λ(I)]`
    pub mixed_sum: f64,
    /// `Σ_lm χ_lm tr(P_l Λ(P_m))`
    pub swap_sum: f64,
    /// `tr[Λ(I)²]`
    pub output_purity: f64,
    pub checks: Vec<BoundCheck>,
    pub all_hold: bool,
}

impl ChiInvariants {
    pub fn variance_coefficients(&self) -> VarianceCoefficients {
        let x00 = self.overlap;
        let y = self.basis_mixed_sum();
        let z = self.basis_swap_sum();
        let w = self.output_purity();
        let crossed = self.crossed_00;
        VarianceCoefficients {
            r: -4.0 * x00 * x00 + crossed + 2.0 * self.chi_sq_00,
            s: -6.0 * x00 * x00 + crossed + self.transpose_overlap - 4.0 * x00
                + self.purity
                + 2.0 * self.chi_sq_00,
            u: -8.0 * x00 + self.transpose_overlap + self.purity + 2.0 * y - 1.0,
            v: 2.0 * z + 2.0 * y + w - 3.0,
            w: 2.0 * z + w,
        }
    }

    pub fn variance_from_coefficients(&self) -> f64 {
        let d = self.dim as f64;
        let c = self.variance_coefficients();
        let num = [c.r, c.s, c.u, c.v, c.w]
            .iter()
            .fold(0.0, |acc, x| acc * d + x);
        num / (d * (d + 1.0).powi(2) * (d + 2.0) * (d + 3.0))
    }
}

pub fn bound_report(channel: &KrausChannel) -> Result<BoundReport> {
    Ok(bound_report_from(&ChiInvariants::from_channel(channel)?))
}

pub fn bound_report_from(inv: &ChiInvariants) -> BoundReport {
    let d2 = (inv.dim * inv.dim) as f64;
    let checks = vec![
        BoundCheck::interval("chi00", inv.overlap, 0.0, 1.0),
        BoundCheck::magnitude("tr_chi_chiT", inv.transpose_overlap, 1.0),
        BoundCheck::magnitude("chi_chiT_00", inv.chi_chit_00_abs, 1.0),
        BoundCheck::magnitude("chiT_chi_00", inv.chit_chi_00_abs, 1.0),
        BoundCheck::interval("tr_chi_sq", inv.purity, 0.0, 1.0),
        BoundCheck::interval("tr_output_sq", inv.output_purity(), 0.0, d2),
        BoundCheck::magnitude("mixed_sum", inv.basis_mixed_sum(), 2.0 * d2),
        BoundCheck::magnitude("swap_sum", inv.basis_swap_sum(), d2),
    ];
    let all_hold = checks.iter().all(|c| c.holds);
    BoundReport {
        dim: inv.dim,
        coefficients: inv.variance_coefficients(),
        variance: inv.variance_from_coefficients(),
        mixed_sum: inv.basis_mixed_sum(),
        swap_sum: inv.basis_swap_sum(),
        output_purity: inv.output_purity(),
        checks,
        all_hold,
    }
}
