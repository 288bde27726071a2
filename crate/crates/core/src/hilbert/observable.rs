use super::{canonicalize_phase, hermitian_part, hermiticity_defect, BasisSet, PureState};
use crate::error::{Error, Result};
use crate::{tol, CMatrix, C64};

/// A nondegenerate Hermitian observable `sum_a A_a |a><a|`, kept in its
/// labeled eigendecomposition. Outcome labels are the eigenbasis labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    eigenvalues: Vec<f64>,
    eigenbasis: BasisSet,
}

impl Observable {
    /// Eigenvalue `eigenvalues[k]` belongs to basis ket `k`. Rejects any
    /// pair of eigenvalues closer than [`tol::DEGEN`].
    pub fn new(eigenbasis: BasisSet, eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.len() != eigenbasis.dim() {
            return Err(Error::Shape(format!(
                "{} eigenvalues for a basis of dimension {}",
                eigenvalues.len(),
                eigenbasis.dim()
            )));
        }
        if let Some(v) = eigenvalues.iter().find(|v| !v.is_finite()) {
            return Err(Error::Shape(format!("non-finite eigenvalue {v}")));
        }
        let gap = min_gap(&eigenvalues);
        if gap < tol::DEGEN {
            return Err(Error::Degenerate {
                gap,
                tolerance: tol::DEGEN,
            });
        }
        Ok(Observable {
            eigenvalues,
            eigenbasis,
        })
    }

    /// Diagonal observable in the computational basis.
    pub fn diagonal(eigenvalues: &[f64]) -> Result<Self> {
        Self::new(BasisSet::standard(eigenvalues.len())?, eigenvalues.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn labels(&self) -> &[String] {
        self.eigenbasis.labels()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenbasis(&self) -> &BasisSet {
        &self.eigenbasis
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.eigenbasis.index_of(label)
    }

    pub fn eigenvalue(&self, label: &str) -> Result<f64> {
        Ok(self.eigenvalues[self.index_of(label)?])
    }

    pub fn eigenstate(&self, label: &str) -> Result<PureState> {
        self.eigenbasis.state_of(label)
    }

    /// `sum_a A_a |a><a|`.
    pub fn matrix(&self) -> CMatrix {
        let u = self.eigenbasis.columns();
        let mut scaled = u.clone();
        for (k, &a) in self.eigenvalues.iter().enumerate() {
            for z in scaled.column_mut(k).iter_mut() {
                *z *= a;
            }
        }
        hermitian_part(&(scaled * u.adjoint()))
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().map(|a| a.abs()).fold(0.0, f64::max)
    }

    /// Smallest distance between two eigenvalues; infinite for `d = 1`.
    pub fn min_gap(&self) -> f64 {
        min_gap(&self.eigenvalues)
    }
}

fn min_gap(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}

/// Eigendecomposition of a Hermitian matrix: eigenvalues sorted descending,
/// eigenvectors in canonical phase, labels `"0", "1", ...` in that order.
pub fn eigendecompose(matrix: &CMatrix) -> Result<Observable> {
    let d = matrix.nrows();
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if matrix.ncols() != d {
        return Err(Error::Shape(format!("matrix is {}x{}, expected square", d, matrix.ncols())));
    }
    let defect = hermiticity_defect(matrix);
    if defect > tol::LIN {
        return Err(Error::Shape(format!("matrix is not Hermitian (defect {defect:e})")));
    }
    let eig = hermitian_part(matrix).symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut columns = CMatrix::zeros(d, d);
    for (k, &i) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).into_owned();
        let n = v.norm();
        v /= C64::new(n, 0.0);
        canonicalize_phase(&mut v);
        columns.set_column(k, &v);
    }
    let gap = min_gap(&eigenvalues);
    if gap < tol::DEGEN {
        return Err(Error::Degenerate {
            gap,
            tolerance: tol::DEGEN,
        });
    }
    Observable::new(BasisSet::from_columns(columns)?, eigenvalues)
}
