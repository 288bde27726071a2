//! Execution policy for data-parallel loops.
//!
//! With the `parallel` feature, [`Exec::Parallel`] fans work out over rayon's
//! global pool. Without it, both policies run sequentially. Results are
//! returned in index order either way, and reductions go through
//! [`pairwise_sum`] so the outcome does not depend on the policy.

use std::ops::Add;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// `(0..n).map(f)` collected in index order.
    pub fn map_indexed<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            _ => (0..n).map(f).collect(),
        }
    }
}

/// Sums `items` by recursive halving. The tree shape depends only on the
/// length, so a fixed input order always gives bit-identical results.
pub fn pairwise_sum<T>(items: &[T]) -> Option<T>
where
    T: Clone,
    for<'a> &'a T: Add<&'a T, Output = T>,
{
    match items.len() {
        0 => None,
        1 => Some(items[0].clone()),
        n => {
            let (l, r) = items.split_at(n / 2);
            let l = pairwise_sum(l).expect("non-empty");
            let r = pairwise_sum(r).expect("non-empty");
            Some(&l + &r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::CMatrix;

    #[test]
    fn policies_agree() {
        let f = |i: usize| (i as f64).sqrt();
        assert_eq!(Exec::Sequential.map_indexed(1000, f), Exec::Parallel.map_indexed(1000, f));
    }

    #[test]
    fn pairwise_matches_naive_on_exact_values() {
        let items: Vec<CMatrix> = (0..7).map(|i| CMatrix::identity(2, 2) * crate::C64::new(i as f64, 0.0)).collect();
        let s = pairwise_sum(&items).unwrap();
        assert_eq!(s[(0, 0)].re, 21.0);
        assert!(pairwise_sum::<CMatrix>(&[]).is_none());
    }
}
