//! Symmetric-group enumeration and the cycle trace rule.
//!
//! Convention: the permutation operator acts as
//! `P_σ |i_1 … i_k> = |i_σ(1) … i_σ(k)>`, so that for a cycle `(a_1 … a_r)`
//! with `σ(a_1) = a_2, …` the trace rule reads
//! `tr[(A_1 ⊗ … ⊗ A_k) P_σ] = Π_cycles tr(A_{a_1} A_{a_2} ⋯ A_{a_r})`.

use std::fmt;

use crate::error::{Error, Result};
use crate::tensor::{ComplexMatrix, C64, ONE};

/// Largest `k` that [`permutations`] will enumerate (`10! ≈ 3.6·10⁶`).
pub const MAX_PERMUTATION_ARITY: usize = 10;

/// A bijection on `{0, …, k−1}` together with its disjoint cycles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    mapping: Vec<usize>,
    cycles: Vec<Vec<usize>>,
}

impl Permutation {
    pub fn identity(k: usize) -> Self {
        Self::from_valid_mapping((0..k).collect())
    }

    /// `mapping[i] = σ(i)`, zero-based.
    pub fn from_mapping(mapping: Vec<usize>) -> Result<Self> {
        let k = mapping.len();
        let mut seen = vec![false; k];
        for &x in &mapping {
            if x >= k || seen[x] {
                return Err(Error::InvalidPermutation);
            }
            seen[x] = true;
        }
        Ok(Self::from_valid_mapping(mapping))
    }

    /// Builds σ on `k` points from zero-based cycles; unlisted points are fixed.
    pub fn from_cycles(k: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut mapping: Vec<usize> = (0..k).collect();
        let mut used = vec![false; k];
        for cycle in cycles {
            for (pos, &a) in cycle.iter().enumerate() {
                if a >= k || used[a] {
                    return Err(Error::InvalidPermutation);
                }
                used[a] = true;
                mapping[a] = cycle[(pos + 1) % cycle.len()];
            }
        }
        Ok(Self::from_valid_mapping(mapping))
    }

    fn from_valid_mapping(mapping: Vec<usize>) -> Self {
        let k = mapping.len();
        let mut seen = vec![false; k];
        let mut cycles = Vec::new();
        for start in 0..k {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cycle.push(x);
                x = mapping[x];
            }
            cycles.push(cycle);
        }
        Self { mapping, cycles }
    }

    pub fn k(&self) -> usize {
        self.mapping.len()
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn image(&self, i: usize) -> usize {
        self.mapping[i]
    }

    /// Disjoint cycles, each starting at its smallest element, ordered by that element.
    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    /// Cycle lengths in descending order.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.cycles.iter().map(Vec::len).collect();
        t.sort_unstable_by(|a, b| b.cmp(a));
        t
    }
}

/// One-based cycle notation, fixed points included: `(1 2)(3)`.
impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cycles.is_empty() {
            return write!(f, "()");
        }
        for cycle in &self.cycles {
            let labels: Vec<String> = cycle.iter().map(|a| (a + 1).to_string()).collect();
            write!(f, "({})", labels.join(" "))?;
        }
        Ok(())
    }
}

/// Lexicographic enumeration of `S_k`.
#[derive(Debug, Clone)]
pub struct Permutations {
    next: Option<Vec<usize>>,
}

impl Iterator for Permutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if next_lexicographic(&mut succ) {
            self.next = Some(succ);
        }
        Some(Permutation::from_valid_mapping(current))
    }
}

fn next_lexicographic(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| v[i] < v[i + 1]) else {
        return false;
    };
    let j = (i + 1..n)
        .rev()
        .find(|&j| v[j] > v[i])
        .expect("pivot has a successor");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// All `k!` permutations of `k` points, `k ≤` [`MAX_PERMUTATION_ARITY`].
pub fn permutations(k: usize) -> Result<Permutations> {
    if k > MAX_PERMUTATION_ARITY {
        return Err(Error::PermutationGuard(k));
    }
    Ok(Permutations {
        next: Some((0..k).collect()),
    })
}

/// `Π_cycles tr(A_{a_1} ⋯ A_{a_r})`, i.e. `tr[(A_1 ⊗ … ⊗ A_k) P_σ]`.
pub fn trace_product(ops: &[ComplexMatrix], sigma: &Permutation) -> Result<C64> {
    if ops.len() != sigma.k() {
        return Err(Error::ArityMismatch {
            ops: ops.len(),
            k: sigma.k(),
        });
    }
    if let Some(first) = ops.first() {
        first.ensure_square()?;
        if let Some(bad) = ops.iter().find(|a| a.shape() != first.shape()) {
            return Err(Error::ShapeMismatch {
                expected: first.shape(),
                found: bad.shape(),
            });
        }
    }
    let mut acc = ONE;
    for cycle in sigma.cycles() {
        acc *= cycle_trace(ops, cycle);
    }
    Ok(acc)
}

pub(crate) fn cycle_trace(ops: &[ComplexMatrix], cycle: &[usize]) -> C64 {
    match cycle {
        [a] => ops[*a].trace(),
        [a, b] => crate::tensor::trace_of_product(&ops[*a], &ops[*b]).expect("square operands"),
        [a, rest @ ..] => {
            let (last, middle) = rest.split_last().expect("cycle of length ≥ 3");
            let mut prod = ops[*a].clone();
            for x in middle {
                prod = &prod * &ops[*x];
            }
            crate::tensor::trace_of_product(&prod, &ops[*last]).expect("square operands")
        }
        [] => ONE,
    }
}
