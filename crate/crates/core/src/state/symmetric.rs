//! Permutation operators on `T^n(V)` with `dim V = 2`, symmetrizer and alternator.
//!
//! A basis tensor `e_{b_1} ⊗ ... ⊗ e_{b_n}` has index `sum_i b_i 2^i`
//! (first factor fastest). `P_sigma` sends it to `e_{b_{sigma^-1(1)}} ⊗ ...`,
//! which makes `P_sigma P_tau = P_{sigma tau}`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest `n` accepted by [`symmetrizer`] and [`alternator`].
pub const MAX_TENSOR_FACTORS: usize = 8;

/// Permutation of `{0, ..., n-1}` stored as images `sigma(i)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidArgument(format!("{images:?} is not a permutation")));
            }
        }
        Ok(Self(images))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Self(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (i, &s) in self.0.iter().enumerate() {
            inv[s] = i;
        }
        Self(inv)
    }

    /// `+1` for even, `-1` for odd permutations.
    pub fn sign(&self) -> i32 {
        let mut seen = vec![false; self.len()];
        let mut transpositions = 0;
        for start in 0..self.len() {
            let mut i = start;
            let mut len = 0;
            while !seen[i] {
                seen[i] = true;
                i = self.0[i];
                len += 1;
            }
            transpositions += len.max(1) - 1;
        }
        if transpositions % 2 == 0 { 1 } else { -1 }
    }

    /// All `n!` permutations in lexicographic order.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut cur: Vec<usize> = (0..n).collect();
        let mut out = vec![Self(cur.clone())];
        while let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) {
            let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).expect("successor exists");
            cur.swap(i - 1, j);
            cur[i..].reverse();
            out.push(Self(cur.clone()));
        }
        out
    }

    /// Index of the basis tensor that `P_sigma` maps basis index `k` to.
    fn act(&self, k: usize) -> usize {
        let inv = self.inverse();
        (0..self.len()).map(|i| ((k >> inv.0[i]) & 1) << i).sum()
    }
}

/// `P_sigma` with its `2^n x 2^n` 0/1 matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PermutationOperator {
    pub sigma: Permutation,
    pub matrix: DMatrix<f64>,
}

pub fn permutation_operator(sigma: &Permutation) -> Result<PermutationOperator> {
    let n = sigma.len();
    if n > 16 {
        return Err(Error::TooLarge { n, max: 16 });
    }
    let dim = 1 << n;
    let mut m = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        m[(sigma.act(k), k)] = 1.0;
    }
    Ok(PermutationOperator { sigma: sigma.clone(), matrix: m })
}

fn averaged(n: usize, signed: bool) -> Result<DMatrix<f64>> {
    if n == 0 || n > MAX_TENSOR_FACTORS {
        return Err(Error::TooLarge { n, max: MAX_TENSOR_FACTORS });
    }
    let dim = 1 << n;
    let perms = Permutation::all(n);
    let scale = 1.0 / perms.len() as f64;
    let mut m = DMatrix::zeros(dim, dim);
    for p in &perms {
        let w = if signed { f64::from(p.sign()) * scale } else { scale };
        for k in 0..dim {
            m[(p.act(k), k)] += w;
        }
    }
    Ok(m)
}

/// `S_n = (1/n!) sum_sigma P_sigma`.
pub fn symmetrizer(n: usize) -> Result<DMatrix<f64>> {
    averaged(n, false)
}

/// `A_n = (1/n!) sum_sigma sgn(sigma) P_sigma`.
pub fn alternator(n: usize) -> Result<DMatrix<f64>> {
    averaged(n, true)
}

/// Number of singular values above `tol`.
pub fn numerical_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    m.clone().svd(false, false).singular_values.iter().filter(|&&s| s > tol).count()
}

/// Basis indices of `T^n(V)` grouped by the number `p` of second-basis factors.
pub fn labels_by_twos(n: usize) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); n + 1];
    for k in 0..1usize << n {
        groups[k.count_ones() as usize].push(k);
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_factor_action() {
        // |12> is e_0 ⊗ e_1, index 2; |21> is index 1.
        let s = symmetrizer(2).unwrap();
        let a = alternator(2).unwrap();
        assert_eq!(s.column(2).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.5, 0.5, 0.0]);
        assert_eq!(a.column(2).iter().copied().collect::<Vec<_>>(), vec![0.0, -0.5, 0.5, 0.0]);
    }

    #[test]
    fn signs_and_counts() {
        assert_eq!(Permutation::all(4).len(), 24);
        assert_eq!(Permutation::all(4).iter().filter(|p| p.sign() == 1).count(), 12);
        assert_eq!(Permutation::new(vec![1, 0, 2]).unwrap().sign(), -1);
        assert_eq!(Permutation::new(vec![1, 2, 0]).unwrap().sign(), 1);
        assert!(Permutation::new(vec![0, 0]).is_err());
    }

    #[test]
    fn operator_is_permutation_matrix() {
        let p = permutation_operator(&Permutation::new(vec![2, 0, 1]).unwrap()).unwrap();
        for j in 0..8 {
            assert_eq!(p.matrix.column(j).iter().filter(|&&x| x == 1.0).count(), 1);
            assert_eq!(p.matrix.column(j).sum(), 1.0);
        }
    }

    #[test]
    fn ranks() {
        assert_eq!(numerical_rank(&alternator(2).unwrap(), 1e-9), 1);
        assert_eq!(numerical_rank(&alternator(3).unwrap(), 1e-9), 0);
        assert_eq!(numerical_rank(&symmetrizer(3).unwrap(), 1e-9), 4);
        assert!(symmetrizer(9).is_err());
        assert!(alternator(0).is_err());
    }

    #[test]
    fn binomial_groups() {
        let g = labels_by_twos(5);
        assert_eq!(g.iter().map(Vec::len).collect::<Vec<_>>(), vec![1, 5, 10, 10, 5, 1]);
        assert_abs_diff_eq!(g.iter().map(Vec::len).sum::<usize>() as f64, 32.0);
    }
}
