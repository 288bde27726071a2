use super::{canonicalize_phase, hermitian_eigenvalues, hermitian_part, hermiticity_defect, BasisSet};
use crate::error::{Error, Result};
use crate::serial::matrix_rows;
use crate::{tol, CMatrix, CVector, C64};

/// A normalized state vector in canonical phase: the largest-magnitude
/// amplitude is real and non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    /// Requires unit norm within [`tol::LIN`]; applies the canonical phase.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        let n2 = amplitudes.norm_squared();
        if (n2 - 1.0).abs() > tol::LIN {
            return Err(Error::InvalidState(format!("squared norm {n2} is not 1")));
        }
        let mut amplitudes = amplitudes;
        canonicalize_phase(&mut amplitudes);
        Ok(PureState { amplitudes })
    }

    /// Normalizes `amplitudes` first.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let n = amplitudes.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::DegenerateInput("zero-norm amplitude vector".into()));
        }
        Self::new(amplitudes / C64::new(n, 0.0))
    }

    pub fn from_slice(amplitudes: &[C64]) -> Result<Self> {
        Self::normalized(CVector::from_column_slice(amplitudes))
    }

    /// Computational basis ket `|index>`.
    pub fn basis_ket(dim: usize, index: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        PureState { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `<self|v>` for a raw vector.
    pub fn inner_vec(&self, v: &CVector) -> C64 {
        self.amplitudes.dotc(v)
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// `|psi><psi|`.
    pub fn projector(&self) -> DensityOperator {
        DensityOperator {
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }

    /// Born probabilities `|<k|psi>|^2` in `basis`.
    pub fn born(&self, basis: &BasisSet) -> Vec<f64> {
        basis.born(self)
    }
}

/// A density operator: Hermitian, unit trace, positive semidefinite (all
/// within [`tol::LIN`]).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let d = matrix.nrows();
        if d == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if matrix.ncols() != d {
            return Err(Error::Shape(format!(
                "density matrix is {}x{}, expected square",
                d,
                matrix.ncols()
            )));
        }
        let herm = hermiticity_defect(&matrix);
        if herm > tol::LIN {
            return Err(Error::InvalidState(format!("not Hermitian (defect {herm:e})")));
        }
        let matrix = hermitian_part(&matrix);
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > tol::LIN {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min_ev = hermitian_eigenvalues(&matrix)[0];
        if min_ev < -tol::LIN {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_ev:e}")));
        }
        Ok(DensityOperator { matrix })
    }

    pub fn pure(psi: &PureState) -> Self {
        psi.projector()
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityOperator {
            matrix: CMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0),
        }
    }

    /// `lambda * a + (1 - lambda) * b` for `lambda` in `[0, 1]`.
    pub fn mix(lambda: f64, a: &DensityOperator, b: &DensityOperator) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidState(format!("mixing weight {lambda} outside [0, 1]")));
        }
        if a.dim() != b.dim() {
            return Err(Error::Shape("mixing operators of different dimension".into()));
        }
        Ok(DensityOperator {
            matrix: &a.matrix * C64::new(lambda, 0.0) + &b.matrix * C64::new(1.0 - lambda, 0.0),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Matrix elements `<k|rho|l>` in `basis`.
    pub fn in_basis(&self, basis: &BasisSet) -> CMatrix {
        basis.columns().adjoint() * &self.matrix * basis.columns()
    }

    /// Diagonal of [`in_basis`](Self::in_basis), i.e. Born probabilities.
    pub fn born(&self, basis: &BasisSet) -> Vec<f64> {
        let u = basis.columns();
        (0..basis.dim())
            .map(|k| {
                let col = u.column(k);
                col.dotc(&(&self.matrix * col)).re
            })
            .collect()
    }

    /// `<psi|rho|psi>`.
    pub fn fidelity_pure(&self, psi: &PureState) -> f64 {
        let v = psi.amplitudes();
        v.dotc(&(&self.matrix * v)).re
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// Half the trace norm of the difference.
    pub fn trace_distance(&self, other: &DensityOperator) -> f64 {
        let diff = &self.matrix - &other.matrix;
        0.5 * hermitian_eigenvalues(&diff).iter().map(|x| x.abs()).sum::<f64>()
    }

    /// Eigenvector of the largest eigenvalue, in canonical phase.
    pub fn dominant_state(&self) -> PureState {
        let eig = self.matrix.clone().symmetric_eigen();
        let (idx, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty");
        PureState::normalized(eig.eigenvectors.column(idx).into_owned())
            .expect("eigenvectors are normalized")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "dim": self.dim(), "matrix": matrix_rows(&self.matrix) })
    }
}
