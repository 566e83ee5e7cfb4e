//! Arbitrary moments `E[F^m]` through symmetric-group sums over Kraus tuples.
//!
//! `F = Σ_i <ψ|K_i|ψ><ψ|K_i†|ψ>`, so `F^m` is a sum over Kraus index tuples of
//! products of `2m` expectation values, and
//! `E[|ψ><ψ|^{⊗2m}] = Σ_{σ∈S₂ₘ} P_σ / ((2m)! · dim Sym^{2m})`.

use rayon::prelude::*;

use super::permutation::{permutations, trace_product, Permutation};
use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::tensor::{ComplexMatrix, C64, ZERO};

/// Default cap on `(2m)! · r^m`, the number of trace products in [`moment`].
pub const DEFAULT_MOMENT_BUDGET: u128 = 5_000_000;

/// `binom(k + d − 1, d − 1)`, the dimension of the symmetric subspace of `(C^d)^{⊗k}`.
pub fn sym_dim(k: usize, d: usize) -> Result<u64> {
    if d == 0 {
        return Err(Error::ParameterOutOfRange {
            name: "d",
            value: 0.0,
        });
    }
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        acc = acc
            .checked_mul(d as u128 - 1 + i)
            .ok_or(Error::Overflow("sym_dim"))?
            / i;
    }
    u64::try_from(acc).map_err(|_| Error::Overflow("sym_dim"))
}

/// `(2m)! · r^m`, or `None` on overflow.
pub fn moment_terms(m: usize, rank: usize) -> Option<u128> {
    let mut terms: u128 = 1;
    for i in 1..=(2 * m) as u128 {
        terms = terms.checked_mul(i)?;
    }
    for _ in 0..m {
        terms = terms.checked_mul(rank as u128)?;
    }
    Some(terms)
}

fn check_order(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::ParameterOutOfRange {
            name: "m",
            value: 0.0,
        });
    }
    Ok(())
}

fn check_budget(m: usize, rank: usize, budget: u128) -> Result<()> {
    match moment_terms(m, rank) {
        Some(terms) if terms <= budget => Ok(()),
        Some(terms) => Err(Error::BudgetExceeded { terms, budget }),
        None => Err(Error::BudgetExceeded {
            terms: u128::MAX,
            budget,
        }),
    }
}

/// `E[F^m]` with the imaginary part kept, for diagnostics.
///
/// Tuples are summed in parallel; partial results are collected in tuple
/// order and reduced sequentially, so the value does not depend on scheduling.
pub fn moment_complex(channel: &KrausChannel, m: usize, budget: u128) -> Result<C64> {
    check_order(m)?;
    let r = channel.rank();
    check_budget(m, r, budget)?;
    let perms: Vec<Permutation> = permutations(2 * m)?.collect();
    let kraus = channel.kraus();
    let daggers: Vec<ComplexMatrix> = kraus.iter().map(ComplexMatrix::dagger).collect();
    let tuples = r.pow(m as u32);

    let terms: Vec<C64> = (0..tuples)
        .into_par_iter()
        .map(|t| {
            let mut ops = Vec::with_capacity(2 * m);
            let mut rest = t;
            for _ in 0..m {
                let i = rest % r;
                rest /= r;
                ops.push(kraus[i].clone());
                ops.push(daggers[i].clone());
            }
            perms
                .iter()
                .map(|sigma| trace_product(&ops, sigma).expect("arity and shapes fixed above"))
                .fold(ZERO, |acc, z| acc + z)
        })
        .collect();
    let total: C64 = terms.iter().sum();

    let norm = perms.len() as f64 * sym_dim(2 * m, channel.dim())? as f64;
    Ok(total / norm)
}

/// `E[F^m]` under the given term budget; the imaginary residue is dropped.
pub fn moment_with_budget(channel: &KrausChannel, m: usize, budget: u128) -> Result<f64> {
    Ok(moment_complex(channel, m, budget)?.re)
}

pub fn moment(channel: &KrausChannel, m: usize) -> Result<f64> {
    moment_with_budget(channel, m, DEFAULT_MOMENT_BUDGET)
}

/// `E[(F − F̄)^m]` from raw moments `μ_1..μ_m` by binomial expansion.
pub fn central_moment_with_budget(channel: &KrausChannel, m: usize, budget: u128) -> Result<f64> {
    check_order(m)?;
    check_budget(m, channel.rank(), budget)?;
    let raw: Vec<f64> = (1..=m)
        .map(|k| moment_with_budget(channel, k, budget))
        .collect::<Result<_>>()?;
    Ok(central_from_raw(&raw))
}

pub fn central_moment(channel: &KrausChannel, m: usize) -> Result<f64> {
    central_moment_with_budget(channel, m, DEFAULT_MOMENT_BUDGET)
}

/// `raw[k-1] = μ_k`; returns `Σ_k binom(m,k) μ_k (−μ_1)^{m−k}` for `m = raw.len()`.
pub(crate) fn central_from_raw(raw: &[f64]) -> f64 {
    let m = raw.len();
    let mu1 = raw[0];
    let mut binom = 1.0;
    let mut total = 0.0;
    for k in 0..=m {
        let mu_k = if k == 0 { 1.0 } else { raw[k - 1] };
        total += binom * mu_k * (-mu1).powi((m - k) as i32);
        binom = binom * (m - k) as f64 / (k + 1) as f64;
    }
    total
}
