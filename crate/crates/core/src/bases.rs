//! Supernormalized Hermitian operator bases and the Bell-type vectors built from them.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};
use crate::tensor::{BipartiteOperator, ComplexMatrix, C64, ZERO};

/// Operator basis `{P_a}` of `L(H)` with `tr(P_a† P_b) = d δ_ab`.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    d: usize,
    elements: Vec<ComplexMatrix>,
}

impl OperatorBasis {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn element(&self, a: usize) -> Result<&ComplexMatrix> {
        self.elements.get(a).ok_or(Error::IndexOutOfRange {
            index: a,
            len: self.elements.len(),
        })
    }

    /// Coefficients `c_a = tr(P_a† A) / d`, so that `A = Σ c_a P_a`.
    pub fn expand(&self, a: &ComplexMatrix) -> Result<Vec<C64>> {
        if a.shape() != (self.d, self.d) {
            return Err(Error::ShapeMismatch {
                expected: (self.d, self.d),
                found: a.shape(),
            });
        }
        let inv_d = 1.0 / self.d as f64;
        self.elements
            .iter()
            .map(|p| crate::tensor::hs_inner(p, a).map(|z| z * inv_d))
            .collect()
    }

    /// `Σ c_a P_a`
    pub fn combine(&self, coeffs: &[C64]) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.d, self.d);
        for (p, c) in self.elements.iter().zip(coeffs) {
            if *c != ZERO {
                out.add_scaled_in_place(p, *c);
            }
        }
        out
    }
}

fn basis_cache() -> &'static RwLock<HashMap<usize, Arc<OperatorBasis>>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<OperatorBasis>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Generalized Gell-Mann basis rescaled to `tr(P_a P_b) = d δ_ab`.
///
/// Order: identity, symmetric off-diagonal pairs `(j,k)` with `j < k` in
/// lexicographic order, antisymmetric pairs in the same order, then the
/// diagonal generators. For `d = 2` this is `{I, X, Y, Z}`.
///
/// Bases are cached per dimension.
pub fn hermitian_basis(d: usize) -> Result<Arc<OperatorBasis>> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    if let Some(b) = basis_cache().read().expect("basis cache poisoned").get(&d) {
        return Ok(Arc::clone(b));
    }
    let built = Arc::new(build_gell_mann(d));
    let mut cache = basis_cache().write().expect("basis cache poisoned");
    Ok(Arc::clone(cache.entry(d).or_insert(built)))
}

fn build_gell_mann(d: usize) -> OperatorBasis {
    let scale = (d as f64 / 2.0).sqrt();
    let mut elements = Vec::with_capacity(d * d);
    elements.push(ComplexMatrix::identity(d));

    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|j| ((j + 1)..d).map(move |k| (j, k)))
        .collect();
    for &(j, k) in &pairs {
        let mut m = ComplexMatrix::zeros(d, d);
        m[(j, k)] = C64::new(scale, 0.0);
        m[(k, j)] = C64::new(scale, 0.0);
        elements.push(m);
    }
    for &(j, k) in &pairs {
        let mut m = ComplexMatrix::zeros(d, d);
        m[(j, k)] = C64::new(0.0, -scale);
        m[(k, j)] = C64::new(0.0, scale);
        elements.push(m);
    }
    for l in 1..d {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt() * scale;
        let mut m = ComplexMatrix::zeros(d, d);
        for j in 0..l {
            m[(j, j)] = C64::new(norm, 0.0);
        }
        m[(l, l)] = C64::new(-(l as f64) * norm, 0.0);
        elements.push(m);
    }
    OperatorBasis { d, elements }
}

/// Matrix units `√d·E_ia` in row-major order. Not Hermitian, but
/// `tr(P_a† P_b) = d δ_ab`; χ in this basis is the Jamiolkowski state itself.
pub fn matrix_unit_basis(d: usize) -> Result<Arc<OperatorBasis>> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    let scale = C64::new((d as f64).sqrt(), 0.0);
    let elements = (0..d * d)
        .map(|r| {
            let mut m = ComplexMatrix::zeros(d, d);
            m[(r / d, r % d)] = scale;
            m
        })
        .collect();
    Ok(Arc::new(OperatorBasis { d, elements }))
}

/// `|Ψ> = d^{-1/2} Σ_a |a>⊗|a>`
pub fn max_entangled(d: usize) -> Result<Vec<C64>> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut v = vec![ZERO; d * d];
    for a in 0..d {
        v[a * d + a] = amp;
    }
    Ok(v)
}

/// `χ₀ = |Ψ><Ψ|`, the χ-matrix of the identity channel.
pub fn chi0(d: usize) -> Result<BipartiteOperator> {
    let psi = max_entangled(d)?;
    BipartiteOperator::new(d, ComplexMatrix::outer(&psi, &psi))
}

/// `|ψ_k> = (P_k ⊗ I)|Ψ>`; entry `(i, a)` is `P_k[i, a] / √d`.
pub fn bell_vector(basis: &OperatorBasis, k: usize) -> Result<Vec<C64>> {
    let p = basis.element(k)?;
    let inv = 1.0 / (basis.d as f64).sqrt();
    Ok(p.as_slice().iter().map(|z| z * inv).collect())
}

/// Row-major vectorization `vec(A)[i·d + a] = A[i, a]`, so that
/// `(A ⊗ I)|Ψ> = vec(A) / √d`.
pub fn vectorize(a: &ComplexMatrix) -> Vec<C64> {
    a.as_slice().to_vec()
}

pub fn unvectorize(d: usize, v: &[C64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |i, a| v[i * d + a])
}
