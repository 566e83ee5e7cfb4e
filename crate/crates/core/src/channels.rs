//! Channel representations (Kraus, χ-matrix, Jamiolkowski state) and conversions.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bases::{bell_vector, hermitian_basis, unvectorize, vectorize, OperatorBasis};
use crate::error::{Error, Result};
use crate::tensor::{
    eig_hermitian, is_psd, partial_trace, BipartiteOperator, ComplexMatrix, Subsystem, C64,
    DEFAULT_PSD_TOL, ZERO,
};

/// Trace-preservation tolerance for [`KrausChannel::new`].
pub const TP_TOL: f64 = 1e-9;
pub const UNITARY_TOL: f64 = 1e-9;
/// Relative eigenvalue cutoff below which χ eigenpairs do not produce Kraus operators.
pub const RANK_CUTOFF: f64 = 1e-12;

/// A channel on `d×d` matrices in operator-sum form.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    dim: usize,
    kraus: Vec<ComplexMatrix>,
}

impl KrausChannel {
    /// Checked constructor: square operators of equal size, `Σ K†K = I` to [`TP_TOL`].
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let ch = Self::from_operators(kraus)?;
        let residual = ch.tp_residual();
        if residual > TP_TOL {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(ch)
    }

    /// Shape-checked only. Use this for operator lists that still need
    /// [`validate_cptp`], e.g. channels read from files.
    pub fn from_operators(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or(Error::EmptyKraus)?;
        let dim = first.ensure_square()?;
        for k in &kraus {
            if k.shape() != (dim, dim) {
                return Err(Error::ShapeMismatch {
                    expected: (dim, dim),
                    found: k.shape(),
                });
            }
        }
        Ok(Self { dim, kraus })
    }

    pub fn identity(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::DimensionTooSmall(d));
        }
        Ok(Self {
            dim: d,
            kraus: vec![ComplexMatrix::identity(d)],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn rank(&self) -> usize {
        self.kraus.len()
    }

    /// `‖Σ K†K − I‖_F`
    pub fn tp_residual(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            sum.add_scaled_in_place(&(&k.dagger() * k), C64::new(1.0, 0.0));
        }
        (&sum - &ComplexMatrix::identity(self.dim)).frobenius_norm()
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &KrausChannel) -> Result<KrausChannel> {
        if self.dim != next.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: next.dim,
            });
        }
        let kraus = next
            .kraus
            .iter()
            .flat_map(|b| self.kraus.iter().map(move |a| b * a))
            .collect();
        Ok(KrausChannel {
            dim: self.dim,
            kraus,
        })
    }
}

/// Process matrix `χ` in a supernormalized Hermitian basis: `E(ρ) = Σ χ_lm P_l ρ P_m`.
#[derive(Clone, Debug)]
pub struct ChiMatrix {
    basis: Arc<OperatorBasis>,
    matrix: ComplexMatrix,
}

impl ChiMatrix {
    pub fn new(basis: Arc<OperatorBasis>, matrix: ComplexMatrix) -> Result<Self> {
        let n = basis.len();
        if matrix.shape() != (n, n) {
            return Err(Error::ShapeMismatch {
                expected: (n, n),
                found: matrix.shape(),
            });
        }
        Ok(Self { basis, matrix })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn basis(&self) -> &OperatorBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn entry(&self, l: usize, m: usize) -> C64 {
        self.matrix[(l, m)]
    }

    /// `Σ χ_lm P_l ρ P_m`
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.dim();
        if rho.shape() != (d, d) {
            return Err(Error::ShapeMismatch {
                expected: (d, d),
                found: rho.shape(),
            });
        }
        let ps = self.basis.elements();
        let left: Vec<ComplexMatrix> = ps.iter().map(|p| p * rho).collect();
        let mut out = ComplexMatrix::zeros(d, d);
        for (l, lp) in left.iter().enumerate() {
            for (m, p) in ps.iter().enumerate() {
                let c = self.matrix[(l, m)];
                if c != ZERO {
                    out.add_scaled_in_place(&(lp * p), c);
                }
            }
        }
        Ok(out)
    }
}

fn unitarity_residual(u: &ComplexMatrix) -> Result<f64> {
    let n = u.ensure_square()?;
    Ok((&u.dagger() * u).max_abs_diff(&ComplexMatrix::identity(n)))
}

fn ensure_unitary(u: &ComplexMatrix) -> Result<()> {
    let residual = unitarity_residual(u)?;
    if residual > UNITARY_TOL {
        return Err(Error::NotUnitary { residual });
    }
    Ok(())
}

/// `ρ ↦ UρU†`
pub fn unitary_channel(u: &ComplexMatrix) -> Result<KrausChannel> {
    ensure_unitary(u)?;
    if u.rows() < 2 {
        return Err(Error::DimensionTooSmall(u.rows()));
    }
    KrausChannel::from_operators(vec![u.clone()])
}

/// `Λ = U† ∘ E`, the part of `E` that deviates from the ideal gate `U`.
pub fn deviation_channel(e: &KrausChannel, u: &ComplexMatrix) -> Result<KrausChannel> {
    ensure_unitary(u)?;
    if u.rows() != e.dim {
        return Err(Error::DimensionMismatch {
            left: e.dim,
            right: u.rows(),
        });
    }
    let ud = u.dagger();
    KrausChannel::from_operators(e.kraus.iter().map(|k| &ud * k).collect())
}

/// `V† ∘ Λ ∘ V`: Kraus operators `V† K V`.
pub fn unitary_conjugate(c: &KrausChannel, v: &ComplexMatrix) -> Result<KrausChannel> {
    ensure_unitary(v)?;
    if v.rows() != c.dim {
        return Err(Error::DimensionMismatch {
            left: c.dim,
            right: v.rows(),
        });
    }
    let vd = v.dagger();
    KrausChannel::from_operators(c.kraus.iter().map(|k| &(&vd * k) * v).collect())
}

/// `Σ K ρ K†`
pub fn apply(c: &KrausChannel, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if rho.shape() != (c.dim, c.dim) {
        return Err(Error::ShapeMismatch {
            expected: (c.dim, c.dim),
            found: rho.shape(),
        });
    }
    let mut out = ComplexMatrix::zeros(c.dim, c.dim);
    for k in &c.kraus {
        out.add_scaled_in_place(&(&(k * rho) * &k.dagger()), C64::new(1.0, 0.0));
    }
    Ok(out)
}

/// Expands each Kraus operator in the basis, `c_il = tr(P_l† K_i)/d`, and
/// forms `χ_lm = Σ_i c_il conj(c_im)`.
pub fn kraus_to_chi(c: &KrausChannel, basis: Arc<OperatorBasis>) -> Result<ChiMatrix> {
    if basis.dim() != c.dim {
        return Err(Error::DimensionMismatch {
            left: c.dim,
            right: basis.dim(),
        });
    }
    let n = basis.len();
    let coeffs: Vec<Vec<C64>> = c
        .kraus
        .iter()
        .map(|k| basis.expand(k))
        .collect::<Result<_>>()?;
    let matrix = ComplexMatrix::from_fn(n, n, |l, m| {
        coeffs.iter().map(|ci| ci[l] * ci[m].conj()).sum()
    });
    ChiMatrix::new(basis, matrix)
}

/// Convenience: χ in the cached Gell-Mann basis of the channel's dimension.
pub fn chi_gell_mann(c: &KrausChannel) -> Result<ChiMatrix> {
    kraus_to_chi(c, hermitian_basis(c.dim)?)
}

/// Diagonalizes χ and keeps eigenpairs above the relative [`RANK_CUTOFF`].
///
/// Returns the canonical (mutually orthogonal) Kraus set; trace preservation
/// is not asserted here, so partially specified maps can still be validated.
pub fn chi_to_kraus(chi: &ChiMatrix) -> Result<KrausChannel> {
    let psd = is_psd(&chi.matrix, DEFAULT_PSD_TOL)?;
    if !psd.is_psd {
        return Err(Error::NotPositive {
            min_eig: psd.min_eig,
        });
    }
    let eig = eig_hermitian(&chi.matrix)?;
    let max = eig.values.first().copied().unwrap_or(0.0);
    if max <= 0.0 {
        return Err(Error::EmptyKraus);
    }
    let kraus = eig
        .values
        .iter()
        .enumerate()
        .take_while(|(_, &lam)| lam > RANK_CUTOFF * max)
        .map(|(k, &lam)| chi.basis.combine(&eig.vector(k)).scale_real(lam.sqrt()))
        .collect();
    KrausChannel::from_operators(kraus)
}

/// `ρ_J = (E ⊗ I)|Ψ><Ψ| = (1/d) Σ_i vec(K_i) vec(K_i)†`.
pub fn jamiolkowski_state(c: &KrausChannel) -> BipartiteOperator {
    let d = c.dim;
    let n = d * d;
    let mut rho = ComplexMatrix::zeros(n, n);
    let inv_d = C64::new(1.0 / d as f64, 0.0);
    for k in &c.kraus {
        let v = vectorize(k);
        rho.add_scaled_in_place(&ComplexMatrix::outer(&v, &v), inv_d);
    }
    BipartiteOperator::new(d, rho).expect("Jamiolkowski state has side d²")
}

/// `χ_jk = <ψ_j|ρ_J|ψ_k>` for the Bell vectors of `basis`.
pub fn chi_from_jamiolkowski(
    rho: &BipartiteOperator,
    basis: Arc<OperatorBasis>,
) -> Result<ChiMatrix> {
    if basis.dim() != rho.local_dim() {
        return Err(Error::DimensionMismatch {
            left: rho.local_dim(),
            right: basis.dim(),
        });
    }
    let n = basis.len();
    let vs: Vec<Vec<C64>> = (0..n)
        .map(|k| bell_vector(&basis, k))
        .collect::<Result<_>>()?;
    let rv: Vec<Vec<C64>> = vs
        .iter()
        .map(|v| rho.matrix().matvec(v))
        .collect::<Result<_>>()?;
    let matrix = ComplexMatrix::from_fn(n, n, |j, k| crate::tensor::inner(&vs[j], &rv[k]));
    ChiMatrix::new(basis, matrix)
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CptpReport {
    pub tp_residual: f64,
    pub min_choi_eig: f64,
    pub verdict: bool,
}

/// Trace-preservation residual plus the smallest Jamiolkowski eigenvalue.
pub fn validate_cptp(c: &KrausChannel, tol: f64) -> Result<CptpReport> {
    let tp_residual = c.tp_residual();
    let eig = eig_hermitian(jamiolkowski_state(c).matrix())?;
    let min_choi_eig = eig.values.last().copied().unwrap_or(0.0);
    Ok(CptpReport {
        tp_residual,
        min_choi_eig,
        verdict: tp_residual <= tol && min_choi_eig >= -tol,
    })
}

fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange { name, value })
    }
}

fn nonzero_weighted(ops: Vec<(f64, ComplexMatrix)>) -> Result<KrausChannel> {
    KrausChannel::from_operators(
        ops.into_iter()
            .filter(|(w, _)| *w > 0.0)
            .map(|(w, k)| k.scale_real(w.sqrt()))
            .collect(),
    )
}

/// `ρ ↦ (1−p)ρ + p tr(ρ) I/d`, via `Σ_a P_a ρ P_a = d tr(ρ) I` over the Gell-Mann basis.
pub fn depolarizing(d: usize, p: f64) -> Result<KrausChannel> {
    check_probability("p", p)?;
    let basis = hermitian_basis(d)?;
    let d2 = (d * d) as f64;
    let mut ops = vec![(1.0 - p + p / d2, ComplexMatrix::identity(d))];
    ops.extend(basis.elements()[1..].iter().map(|pa| (p / d2, pa.clone())));
    nonzero_weighted(ops)
}

/// Qubit phase flip: `{√(1−p) I, √p Z}`.
pub fn dephasing(p: f64) -> Result<KrausChannel> {
    check_probability("p", p)?;
    let z = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])?;
    nonzero_weighted(vec![(1.0 - p, ComplexMatrix::identity(2)), (p, z)])
}

pub fn amplitude_damping(gamma: f64) -> Result<KrausChannel> {
    check_probability("gamma", gamma)?;
    let k0 = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, (1.0 - gamma).sqrt()])?;
    let k1 = ComplexMatrix::from_real(2, 2, &[0.0, gamma.sqrt(), 0.0, 0.0])?;
    if gamma == 0.0 {
        return KrausChannel::from_operators(vec![k0]);
    }
    KrausChannel::from_operators(vec![k0, k1])
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).expect("2x2")
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).expect("2x2")
}

pub fn hadamard() -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_real(2, 2, &[h, h, h, -h]).expect("2x2")
}

pub(crate) fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random unitary: Gram-Schmidt on a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = (0..d)
        .map(|_| (0..d).map(|_| complex_normal(rng)).collect())
        .collect();
    for k in 0..d {
        for j in 0..k {
            let proj = crate::tensor::inner(&cols[j], &cols[k]);
            let (done, rest) = cols.split_at_mut(k);
            for (x, q) in rest[0].iter_mut().zip(&done[j]) {
                *x -= q * proj;
            }
        }
        let norm = crate::tensor::norm_sqr(&cols[k]).sqrt();
        for x in cols[k].iter_mut() {
            *x /= norm;
        }
    }
    ComplexMatrix::from_fn(d, d, |i, k| cols[k][i])
}

/// Seeded random CPTP map with Choi rank `rank`.
///
/// Draws a `d² × rank` complex Gaussian `G`, so `W = GG†` has rank `rank`,
/// and rescales the ancilla factor with `Q^{-1/2}`, `Q = d·tr₁(W)`, so the
/// resulting Jamiolkowski state has `tr₁ρ_J = I/d`. The Kraus operators are
/// the orthogonalized columns of the rescaled factor, i.e. the same canonical
/// set `chi_to_kraus` produces from that state.
pub fn random_cptp(d: usize, rank: usize, seed: u64) -> Result<KrausChannel> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    let max = d * d;
    if rank == 0 || rank > max {
        return Err(Error::RankOutOfRange { rank, max });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = d * d;
    let g = ComplexMatrix::from_fn(n, rank, |_, _| complex_normal(&mut rng));

    // tr₁(GG†)[j, l] = Σ_i Σ_k G[(i,j),k] conj(G[(i,l),k])
    let reduced = ComplexMatrix::from_fn(d, d, |j, l| {
        let mut acc = ZERO;
        for i in 0..d {
            for k in 0..rank {
                acc += g[(i * d + j, k)] * g[(i * d + l, k)].conj();
            }
        }
        acc * d as f64
    });
    let q_eig = eig_hermitian(&reduced)?;
    let q_max = q_eig.values[0];
    let mut inv_sqrt = ComplexMatrix::zeros(d, d);
    for (k, lam) in q_eig.values.iter().enumerate() {
        let floored = lam.max(1e-12 * q_max);
        let v = q_eig.vector(k);
        inv_sqrt.add_scaled_in_place(
            &ComplexMatrix::outer(&v, &v),
            C64::new(floored.powf(-0.5), 0.0),
        );
    }

    // G' = (I ⊗ Q^{-1/2}) G
    let gp = ComplexMatrix::from_fn(n, rank, |r, k| {
        let (i, j) = (r / d, r % d);
        (0..d).map(|b| inv_sqrt[(j, b)] * g[(i * d + b, k)]).sum()
    });

    let gram = &gp.dagger() * &gp;
    let eig = eig_hermitian(&gram)?;
    let top = eig.values[0];
    let sqrt_d = (d as f64).sqrt();
    let kraus = eig
        .values
        .iter()
        .enumerate()
        .take_while(|(_, &mu)| mu > RANK_CUTOFF * top)
        .map(|(k, _)| {
            let u = eig.vector(k);
            let col: Vec<C64> = (0..n)
                .map(|r| (0..rank).map(|c| gp[(r, c)] * u[c]).sum::<C64>() * sqrt_d)
                .collect();
            unvectorize(d, &col)
        })
        .collect();
    KrausChannel::new(kraus)
}

/// `tr₂ ρ_J = Λ(I/d)`; exposed for checks that compare both sides.
pub fn output_of_maximally_mixed(c: &KrausChannel) -> ComplexMatrix {
    partial_trace(&jamiolkowski_state(c), Subsystem::Second)
}
