//! Unitary invariants of the process matrix that enter the closed-form moments.
//!
//! Everything is computed from the Jamiolkowski state `ρ_J`, which equals χ in
//! the matrix-unit basis, so no basis expansion is needed. Products that would
//! cost `O(d⁶)` are avoided: each quantity is a matrix-vector product, a trace
//! of a product, or a product with the sparse operators `χ₀` and `χ₀ᵀ¹`.

use serde::{Deserialize, Serialize};

use crate::bases::{chi0, max_entangled};
use crate::channels::{jamiolkowski_state, KrausChannel};
use crate::error::Result;
use crate::tensor::{
    hs_inner, inner, partial_trace, trace_of_product, BipartiteOperator, ComplexMatrix, Subsystem,
    C64,
};

/// `χ♯ = S χᵀ S`, the transpose of χ taken in a Hermitian operator basis,
/// written in the matrix-unit (Jamiolkowski) picture.
///
/// Entry-wise, `χ♯[(i,j),(k,l)] = χ[(l,k),(j,i)]`. It differs from the plain
/// transpose whenever χ has a non-real Hermitian-basis representation.
pub fn hermitian_transpose(chi: &BipartiteOperator) -> BipartiteOperator {
    let d = chi.local_dim();
    let n = d * d;
    let m = ComplexMatrix::from_fn(n, n, |r, c| {
        let (i, j, k, l) = (r / d, r % d, c / d, c % d);
        chi.get(l, k, j, i)
    });
    BipartiteOperator::new(d, m).expect("same shape as input")
}

/// The scalar invariants of χ used by the second-moment and variance formulas.
///
/// `χ₀ = |Ψ><Ψ|`; entries written `(·)₀₀` are `<Ψ|·|Ψ>`, and `χ♯` is the
/// Hermitian-basis transpose from [`hermitian_transpose`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiInvariants {
    pub dim: usize,
    /// `tr(χχ₀) = χ₀₀`
    pub overlap: f64,
    /// `tr(χ²)`
    pub purity: f64,
    /// `tr(χχ♯)`
    pub transpose_overlap: f64,
    /// `(χ²)₀₀`
    pub chi_sq_00: f64,
    /// `(χχ♯)₀₀ + (χ♯χ)₀₀`; the two terms are complex conjugates.
    pub crossed_00: f64,
    /// `|(χχ♯)₀₀|`
    pub chi_chit_00_abs: f64,
    /// `|(χ♯χ)₀₀|`
    pub chit_chi_00_abs: f64,
    /// `tr[(tr₂χ)²]`
    pub reduced_purity: f64,
    /// `tr[tr₂(χχ₀ + χ₀χ) tr₂χ]`
    pub mixed_reduced: f64,
    /// `tr[(χ₀ᵀ¹χ)† (χ₀ᵀ¹χ)ᵀ¹]`
    pub swap_term: f64,
    /// Largest imaginary part discarded from the quantities above.
    pub max_imaginary: f64,
}

impl ChiInvariants {
    pub fn from_channel(channel: &KrausChannel) -> Result<Self> {
        Self::from_jamiolkowski(&jamiolkowski_state(channel))
    }

    pub fn from_jamiolkowski(rho: &BipartiteOperator) -> Result<Self> {
        let d = rho.local_dim();
        let chi = rho.matrix();
        let psi = max_entangled(d)?;
        let sharp = hermitian_transpose(rho);

        let chi_psi = chi.matvec(&psi)?;
        let chid_psi = chi.dagger().matvec(&psi)?;
        let sharp_psi = sharp.matrix().matvec(&psi)?;
        let sharpd_psi = sharp.matrix().dagger().matvec(&psi)?;

        let reduced = partial_trace(rho, Subsystem::Second);

        let c0 = chi0(d)?;
        let anti = rho
            .compose(&c0)?
            .matrix()
            .try_add(c0.compose(rho)?.matrix())?;
        let anti_reduced = partial_trace(&BipartiteOperator::new(d, anti)?, Subsystem::Second);

        let s_over_d = c0.partial_transpose(Subsystem::First);
        let m = s_over_d.compose(rho)?;
        let m_t1 = m.partial_transpose(Subsystem::First);

        let chi_chit_00 = inner(&chid_psi, &sharp_psi);
        let chit_chi_00 = inner(&sharpd_psi, &chi_psi);
        let raw = [
            inner(&psi, &chi_psi),
            trace_of_product(chi, chi)?,
            trace_of_product(chi, sharp.matrix())?,
            inner(&chid_psi, &chi_psi),
            chi_chit_00 + chit_chi_00,
            trace_of_product(&reduced, &reduced)?,
            trace_of_product(&anti_reduced, &reduced)?,
            hs_inner(m.matrix(), m_t1.matrix())?,
        ];
        let max_imaginary = raw.iter().map(|z: &C64| z.im.abs()).fold(0.0, f64::max);
        let [overlap, purity, transpose_overlap, chi_sq_00, crossed_00, reduced_purity, mixed_reduced, swap_term] =
            raw.map(|z| z.re);
        Ok(Self {
            dim: d,
            overlap,
            purity,
            transpose_overlap,
            chi_sq_00,
            crossed_00,
            chi_chit_00_abs: chi_chit_00.norm(),
            chit_chi_00_abs: chit_chi_00.norm(),
            reduced_purity,
            mixed_reduced,
            swap_term,
            max_imaginary,
        })
    }

    /// `Σ_lm χ_lm tr(P_l Λ(P_m)) = d⁴ · swap_term`
    pub fn basis_swap_sum(&self) -> f64 {
        (self.dim as f64).powi(4) * self.swap_term
    }

    /// `Σ_l tr[(χ_l0 + χ_0l) P_l Λ(I)] = d² · mixed_reduced`
    pub fn basis_mixed_sum(&self) -> f64 {
        (self.dim as f64).powi(2) * self.mixed_reduced
    }

    /// `tr[Λ(I)²] = d² · reduced_purity`
    pub fn output_purity(&self) -> f64 {
        (self.dim as f64).powi(2) * self.reduced_purity
    }
}
