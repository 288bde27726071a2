use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use super::{max_abs_diff, random, PureState};
use crate::error::{Error, Result};
use crate::serial::matrix_columns;
use crate::{rng, tol, CMatrix, CVector, C64};

/// Kind of basis produced by [`BasisSet::build`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    Standard,
    /// Column `k` has entries `exp(2 pi i j k / d) / sqrt(d)`.
    Fourier,
    HaarRandom { seed: u64 },
}

/// A labeled orthonormal basis, stored as the columns of a `d x d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    labels: Vec<String>,
    columns: CMatrix,
}

impl BasisSet {
    /// Validates orthonormality and label uniqueness.
    pub fn new(labels: Vec<String>, columns: CMatrix) -> Result<Self> {
        let dim = columns.nrows();
        if dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if columns.ncols() != dim {
            return Err(Error::Shape(format!(
                "basis matrix is {}x{}, expected square",
                dim,
                columns.ncols()
            )));
        }
        if labels.len() != dim {
            return Err(Error::Shape(format!(
                "{} labels for a basis of dimension {dim}",
                labels.len()
            )));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::Shape(format!("duplicate basis label `{l}`")));
            }
        }
        let basis = BasisSet { labels, columns };
        let defect = basis.gram_defect();
        if defect > tol::LIN {
            return Err(Error::Shape(format!(
                "basis columns are not orthonormal (Gram defect {defect:e})"
            )));
        }
        Ok(basis)
    }

    /// Basis with labels `"0", "1", ...`.
    pub fn from_columns(columns: CMatrix) -> Result<Self> {
        let labels = (0..columns.ncols()).map(|i| i.to_string()).collect();
        Self::new(labels, columns)
    }

    pub fn build(kind: BasisKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(dim));
        }
        let columns = match kind {
            BasisKind::Standard => CMatrix::identity(dim, dim),
            BasisKind::Fourier => {
                let norm = 1.0 / (dim as f64).sqrt();
                CMatrix::from_fn(dim, dim, |j, k| {
                    // reduce j*k mod d first so large dims keep full precision
                    let t = 2.0 * PI * ((j * k) % dim) as f64 / dim as f64;
                    C64::from_polar(norm, t)
                })
            }
            BasisKind::HaarRandom { seed } => {
                random::haar_unitary(dim, &mut rng::seeded(seed))
            }
        };
        Self::from_columns(columns)
    }

    pub fn standard(dim: usize) -> Result<Self> {
        Self::build(BasisKind::Standard, dim)
    }

    pub fn fourier(dim: usize) -> Result<Self> {
        Self::build(BasisKind::Fourier, dim)
    }

    pub fn haar_random(dim: usize, seed: u64) -> Result<Self> {
        Self::build(BasisKind::HaarRandom { seed }, dim)
    }

    /// Qubit `X` eigenbasis `{|+>, |->}`.
    pub fn qubit_x() -> Self {
        let s = FRAC_1_SQRT_2;
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(s, 0.0), C64::new(s, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0)],
        );
        Self::new(vec!["+".into(), "-".into()], m).expect("orthonormal")
    }

    /// Qubit `Y` eigenbasis `{|+i>, |-i>}`.
    pub fn qubit_y() -> Self {
        let s = FRAC_1_SQRT_2;
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(s, 0.0), C64::new(s, 0.0), C64::new(0.0, s), C64::new(0.0, -s)],
        );
        Self::new(vec!["+i".into(), "-i".into()], m).expect("orthonormal")
    }

    /// Same columns, new labels.
    pub fn relabel<S: Into<String>>(self, labels: impl IntoIterator<Item = S>) -> Result<Self> {
        Self::new(labels.into_iter().map(Into::into).collect(), self.columns)
    }

    pub fn dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Column matrix; column `i` is the ket for label `i`.
    pub fn columns(&self) -> &CMatrix {
        &self.columns
    }

    pub fn column(&self, index: usize) -> CVector {
        self.columns.column(index).into_owned()
    }

    /// The basis ket at `index` as a [`PureState`] (canonical phase).
    pub fn state(&self, index: usize) -> PureState {
        PureState::new(self.column(index)).expect("basis columns are normalized")
    }

    pub fn state_of(&self, label: &str) -> Result<PureState> {
        Ok(self.state(self.index_of(label)?))
    }

    /// Basis with every ket replaced by `m |k>`; `m` must be unitary.
    pub fn transformed(&self, m: &CMatrix) -> Result<Self> {
        if m.nrows() != self.dim() || m.ncols() != self.dim() {
            return Err(Error::Shape(format!(
                "cannot transform a dimension-{} basis by a {}x{} matrix",
                self.dim(),
                m.nrows(),
                m.ncols()
            )));
        }
        Self::new(self.labels.clone(), m * &self.columns)
    }

    /// `max |G - I|` over the Gram matrix of the columns.
    pub fn gram_defect(&self) -> f64 {
        let g = self.columns.adjoint() * &self.columns;
        max_abs_diff(&g, &CMatrix::identity(self.dim(), self.dim()))
    }

    /// Squared overlaps `|<k|psi>|^2` for every basis ket.
    pub fn born(&self, psi: &PureState) -> Vec<f64> {
        (self.columns.adjoint() * psi.amplitudes()).iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "dim": self.dim(),
            "labels": self.labels,
            "columns": matrix_columns(&self.columns),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn standard_two() {
        let b = BasisSet::standard(2).unwrap();
        assert_eq!(b.column(0), CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]));
        assert_eq!(b.column(1), CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]));
        assert_eq!(b.labels(), ["0", "1"]);
    }

    #[test]
    fn fourier_two_is_plus_minus() {
        let b = BasisSet::fourier(2).unwrap();
        let s = FRAC_1_SQRT_2;
        assert!((b.column(0) - CVector::from_vec(vec![c(s, 0.0), c(s, 0.0)])).norm() < 1e-15);
        assert!((b.column(1) - CVector::from_vec(vec![c(s, 0.0), c(-s, 0.0)])).norm() < 1e-15);
    }

    #[test]
    fn fourier_four_column_one() {
        let b = BasisSet::fourier(4).unwrap();
        let expect = [c(0.5, 0.0), c(0.0, 0.5), c(-0.5, 0.0), c(0.0, -0.5)];
        for (z, e) in b.column(1).iter().zip(expect) {
            assert!((z - e).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_dimension_rejected() {
        for kind in [BasisKind::Standard, BasisKind::Fourier, BasisKind::HaarRandom { seed: 1 }] {
            assert!(matches!(BasisSet::build(kind, 0), Err(Error::InvalidDimension(0))));
        }
    }

    #[test]
    fn haar_is_seed_deterministic_and_orthonormal() {
        let a = BasisSet::haar_random(6, 9).unwrap();
        let b = BasisSet::haar_random(6, 9).unwrap();
        let c = BasisSet::haar_random(6, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.gram_defect() < 1e-12);
    }

    #[test]
    fn gram_defect_small_for_generated_bases() {
        for d in 1..=64 {
            assert!(BasisSet::fourier(d).unwrap().gram_defect() < 1e-12, "fourier {d}");
            assert!(BasisSet::haar_random(d, d as u64).unwrap().gram_defect() < 1e-12, "haar {d}");
        }
    }

    #[test]
    fn rejects_duplicate_labels_and_non_orthonormal_columns() {
        let id = CMatrix::identity(2, 2);
        assert!(BasisSet::new(vec!["a".into(), "a".into()], id.clone()).is_err());
        let mut bad = id;
        bad[(0, 1)] = c(0.1, 0.0);
        assert!(matches!(BasisSet::from_columns(bad), Err(Error::Shape(_))));
    }

    #[test]
    fn qubit_fixtures_are_mutually_unbiased() {
        let z = BasisSet::standard(2).unwrap();
        let x = BasisSet::qubit_x();
        let y = BasisSet::qubit_y();
        for (p, q) in [(&z, &x), (&z, &y), (&x, &y)] {
            let o = p.columns().adjoint() * q.columns();
            for v in o.iter() {
                assert!((v.norm_sqr() - 0.5).abs() < 1e-15);
            }
        }
    }
}
