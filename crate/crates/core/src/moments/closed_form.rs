//! Closed forms for the first two moments of the gate fidelity.

use serde::{Deserialize, Serialize};

use super::invariants::ChiInvariants;
use super::permutation::{permutations, trace_product};
use crate::channels::{chi_gell_mann, KrausChannel};
use crate::error::{Error, Result};
use crate::tensor::{inner, norm_sqr, ComplexMatrix, C64, ZERO};

/// Tolerance on `‖ψ‖² − 1` accepted by [`gate_fidelity`].
pub const STATE_NORM_TOL: f64 = 1e-8;
/// Raw variances down to `-NEGATIVE_VARIANCE_TOL` are treated as rounding and clamped.
pub const NEGATIVE_VARIANCE_TOL: f64 = 1e-9;
/// Largest dimension accepted by [`second_moment_direct`].
pub const DIRECT_SUM_MAX_DIM: usize = 4;

/// `F(ψ) = <ψ|Λ(|ψ><ψ|)|ψ> = Σ_i |<ψ|K_i|ψ>|²`
pub fn gate_fidelity(channel: &KrausChannel, psi: &[C64]) -> Result<f64> {
    let d = channel.dim();
    if psi.len() != d {
        return Err(Error::DimensionMismatch {
            left: d,
            right: psi.len(),
        });
    }
    let norm_sq = norm_sqr(psi);
    if (norm_sq - 1.0).abs() > STATE_NORM_TOL {
        return Err(Error::NotNormalized { norm_sq });
    }
    let mut f = 0.0;
    for k in channel.kraus() {
        f += inner(psi, &k.matvec(psi)?).norm_sqr();
    }
    Ok(f)
}

/// `F̄ = (d·tr(χχ₀) + 1)/(d + 1)`
pub fn average_fidelity(channel: &KrausChannel) -> Result<f64> {
    Ok(ChiInvariants::from_channel(channel)?.average_fidelity())
}

/// `E[F²]` from the χ invariants.
pub fn second_moment(channel: &KrausChannel) -> Result<f64> {
    Ok(ChiInvariants::from_channel(channel)?.second_moment())
}

/// `E[F²] − F̄²`, clamped at zero within [`NEGATIVE_VARIANCE_TOL`].
pub fn variance(channel: &KrausChannel) -> Result<f64> {
    Ok(ChiInvariants::from_channel(channel)?.variance()?.value)
}

/// Single-qubit closed form for the variance.
pub fn variance_qubit(channel: &KrausChannel) -> Result<f64> {
    ChiInvariants::from_channel(channel)?.variance_qubit()
}

/// Numerator coefficients of `E[F²] = (a₃d⁴ + b₃d³ + c₃d² + d₃d) / (d(d+1)(d+2)(d+3))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondMomentCoefficients {
    pub a3: f64,
    pub b3: f64,
    pub c3: f64,
    pub d3: f64,
}

/// Variance split into the subtraction path and its rational cross-check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    /// Reported value: `raw`, clamped to zero when slightly negative.
    pub value: f64,
    /// `E[F²] − F̄²` before clamping.
    pub raw: f64,
    /// Same quantity from the expanded rational form.
    pub rational: f64,
    pub clamped: bool,
}

impl VarianceEstimate {
    pub fn path_difference(&self) -> f64 {
        (self.raw - self.rational).abs()
    }
}

impl ChiInvariants {
    pub fn average_fidelity(&self) -> f64 {
        let d = self.dim as f64;
        (d * self.overlap + 1.0) / (d + 1.0)
    }

    pub fn second_moment_coefficients(&self) -> SecondMomentCoefficients {
        let ov = self.overlap;
        SecondMomentCoefficients {
            a3: ov * ov + 2.0 * self.swap_term,
            b3: 2.0 * self.chi_sq_00 + self.crossed_00 + 2.0 * ov + 2.0 * self.mixed_reduced,
            c3: 4.0 * ov + self.transpose_overlap + self.purity + 1.0 + self.reduced_purity,
            d3: 3.0,
        }
    }

    pub fn second_moment(&self) -> f64 {
        let d = self.dim as f64;
        let c = self.second_moment_coefficients();
        let num = ((c.a3 * d + c.b3) * d + c.c3) * d + c.d3;
        num / ((d + 1.0) * (d + 2.0) * (d + 3.0))
    }

    /// `(a₄d⁵ + b₄d⁴ + c₄d³ + d₄d² + e₄d + f₄) / ((d+1)³(d+2)(d+3))`, with the
    /// numerator obtained by expanding `E[F²] − F̄²` over the common denominator.
    pub fn variance_rational(&self) -> f64 {
        let d = self.dim as f64;
        let SecondMomentCoefficients { a3, b3, c3, d3 } = self.second_moment_coefficients();
        let a = self.overlap * self.overlap;
        let b = 2.0 * self.overlap;
        let coeffs = [
            a3 - a,
            b3 + 2.0 * a3 - b - 6.0 * a,
            a3 + 2.0 * b3 + c3 - 11.0 * a - 6.0 * b - 1.0,
            b3 + 2.0 * c3 + d3 - 6.0 * a - 11.0 * b - 6.0,
            c3 + 2.0 * d3 - 11.0 - 6.0 * b,
            d3 - 6.0,
        ];
        let num = coeffs.iter().fold(0.0, |acc, c| acc * d + c);
        num / ((d + 1.0).powi(3) * (d + 2.0) * (d + 3.0))
    }

    pub fn variance(&self) -> Result<VarianceEstimate> {
        let avg = self.average_fidelity();
        let raw = self.second_moment() - avg * avg;
        if raw < -NEGATIVE_VARIANCE_TOL {
            return Err(Error::NegativeVariance(raw));
        }
        let clamped = raw < 0.0;
        Ok(VarianceEstimate {
            value: raw.max(0.0),
            raw,
            rational: self.variance_rational(),
            clamped,
        })
    }

    pub fn variance_qubit(&self) -> Result<f64> {
        if self.dim != 2 {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: 2,
            });
        }
        let ov = self.overlap;
        Ok(-11.0 / 180.0 + 4.0 / 45.0 * ov - 38.0 / 45.0 * ov * ov
            + 4.0 / 15.0 * self.chi_sq_00
            + self.purity / 10.0
            + self.crossed_00 / 5.0
            + (self.transpose_overlap + self.reduced_purity) / 30.0)
    }
}

/// `E[F²]` by direct summation over Gell-Mann index quadruples:
/// `Σ χ_lm χ_nr Σ_{σ∈S₄} tr[(P_l⊗P_m⊗P_n⊗P_r) P_σ] / (d(d+1)(d+2)(d+3))`.
///
/// Costs `O(d⁸)` trace products, so it is limited to `d ≤` [`DIRECT_SUM_MAX_DIM`].
pub fn second_moment_direct(channel: &KrausChannel) -> Result<f64> {
    let d = channel.dim();
    if d > DIRECT_SUM_MAX_DIM {
        return Err(Error::ParameterOutOfRange {
            name: "dim",
            value: d as f64,
        });
    }
    let chi = chi_gell_mann(channel)?;
    let basis = chi.basis().elements();
    let n = basis.len();
    let perms: Vec<_> = permutations(4)?.collect();
    let mut ops: [ComplexMatrix; 4] = std::array::from_fn(|_| ComplexMatrix::zeros(d, d));
    let mut total = ZERO;
    for l in 0..n {
        for m in 0..n {
            let clm = chi.entry(l, m);
            if clm == ZERO {
                continue;
            }
            for p in 0..n {
                for r in 0..n {
                    let cpr = chi.entry(p, r);
                    if cpr == ZERO {
                        continue;
                    }
                    for (slot, idx) in [l, m, p, r].into_iter().enumerate() {
                        ops[slot].clone_from(&basis[idx]);
                    }
                    let mut s = ZERO;
                    for sigma in &perms {
                        s += trace_product(&ops, sigma)?;
                    }
                    total += clm * cpr * s;
                }
            }
        }
    }
    let df = d as f64;
    Ok(total.re / (df * (df + 1.0) * (df + 2.0) * (df + 3.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{dephasing, depolarizing, random_cptp, unitary_channel};
    use crate::tensor::ONE;

    #[test]
    fn gate_fidelity_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = [C64::new(h, 0.0), C64::new(h, 0.0)];
        let f = gate_fidelity(&dephasing(0.3).unwrap(), &plus).unwrap();
        assert!((f - 0.7).abs() < 1e-14);
        let x = unitary_channel(&crate::channels::pauli_x()).unwrap();
        assert!(gate_fidelity(&x, &[ONE, ZERO]).unwrap().abs() < 1e-15);
        assert!(matches!(
            gate_fidelity(&x, &[ONE, ONE]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            gate_fidelity(&x, &[ONE]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn fixture_values() {
        let deph = dephasing(0.5).unwrap();
        assert!((average_fidelity(&deph).unwrap() - 2.0 / 3.0).abs() < 1e-14);
        assert!((second_moment(&deph).unwrap() - (4.0 / 9.0 + 1.0 / 45.0)).abs() < 1e-14);
        assert!((variance(&deph).unwrap() - 1.0 / 45.0).abs() < 1e-14);
        assert!((variance_qubit(&deph).unwrap() - 1.0 / 45.0).abs() < 1e-14);
        for p in [0.1, 0.5, 0.9] {
            let dep = depolarizing(2, p).unwrap();
            assert!((second_moment(&dep).unwrap() - (1.0 - p / 2.0).powi(2)).abs() < 1e-14);
        }
        let four = random_cptp(4, 2, 1).unwrap();
        assert!(matches!(
            variance_qubit(&four),
            Err(Error::DimensionMismatch { left: 4, right: 2 })
        ));
    }

    #[test]
    fn rational_form_equals_subtraction() {
        for d in 2..=5 {
            for seed in 0..5 {
                let inv = ChiInvariants::from_channel(
                    &random_cptp(d, 1 + seed as usize % 3, seed).unwrap(),
                )
                .unwrap();
                let v = inv.variance().unwrap();
                assert!(v.path_difference() < 1e-12, "d={d} seed={seed}");
            }
        }
    }

    #[test]
    fn direct_sum_matches_invariant_form() {
        for d in 2..=3 {
            for seed in 0..3 {
                let ch = random_cptp(d, 2, 100 + seed).unwrap();
                let direct = second_moment_direct(&ch).unwrap();
                assert!((direct - second_moment(&ch).unwrap()).abs() < 1e-10);
            }
        }
        let ch = random_cptp(5, 1, 0).unwrap();
        assert!(second_moment_direct(&ch).is_err());
    }
}
