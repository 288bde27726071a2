use super::{max_abs_diff, random, BasisSet, DensityOperator, Observable, PureState};
use crate::error::{Error, Result};
use crate::{rng, tol, CMatrix, C64};

/// A unitary matrix (`U^† U = 1` within [`tol::LIN`]).
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMap {
    matrix: CMatrix,
}

impl UnitaryMap {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let d = matrix.nrows();
        if d == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if matrix.ncols() != d {
            return Err(Error::Shape(format!("matrix is {}x{}, expected square", d, matrix.ncols())));
        }
        let defect = max_abs_diff(&(matrix.adjoint() * &matrix), &CMatrix::identity(d, d));
        if defect > tol::LIN {
            return Err(Error::Shape(format!("matrix is not unitary (defect {defect:e})")));
        }
        Ok(UnitaryMap { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        UnitaryMap {
            matrix: CMatrix::identity(dim, dim),
        }
    }

    /// `sum_k |to_k><from_k|`, which maps each ket of `from` onto the
    /// same-index ket of `to`.
    pub fn basis_change(from: &BasisSet, to: &BasisSet) -> Result<Self> {
        if from.dim() != to.dim() {
            return Err(Error::Shape("basis dimensions differ".into()));
        }
        Self::new(to.columns() * from.columns().adjoint())
    }

    pub fn haar_random(dim: usize, seed: u64) -> Self {
        UnitaryMap {
            matrix: random::haar_unitary(dim, &mut rng::seeded(seed)),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> UnitaryMap {
        UnitaryMap {
            matrix: self.matrix.adjoint(),
        }
    }

    /// `self * other`.
    pub fn compose(&self, other: &UnitaryMap) -> UnitaryMap {
        UnitaryMap {
            matrix: &self.matrix * &other.matrix,
        }
    }

    pub fn apply(&self, psi: &PureState) -> PureState {
        PureState::normalized(&self.matrix * psi.amplitudes()).expect("unitary preserves norm")
    }

    /// `U rho U^†`.
    pub fn conjugate(&self, rho: &DensityOperator) -> DensityOperator {
        DensityOperator::new(&self.matrix * rho.matrix() * self.matrix.adjoint())
            .expect("unitary conjugation preserves density operators")
    }

    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim();
        max_abs_diff(&(self.matrix.adjoint() * &self.matrix), &CMatrix::identity(d, d))
    }
}

/// `exp(-i phi A) = sum_a exp(-i phi A_a) |a><a|`.
pub fn phase_unitary(observable: &Observable, phi: f64) -> UnitaryMap {
    let u = observable.eigenbasis().columns();
    let mut scaled = u.clone();
    for (k, &a) in observable.eigenvalues().iter().enumerate() {
        let ph = C64::from_polar(1.0, -phi * a);
        for z in scaled.column_mut(k).iter_mut() {
            *z *= ph;
        }
    }
    UnitaryMap {
        matrix: scaled * u.adjoint(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::eigendecompose;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn zero_phase_is_identity() {
        let obs = eigendecompose(&random::gue(3, &mut rng::seeded(1))).unwrap();
        assert!(max_abs_diff(phase_unitary(&obs, 0.0).matrix(), &CMatrix::identity(3, 3)) < 1e-14);
    }

    #[test]
    fn diagonal_exponentiation() {
        let obs = Observable::diagonal(&[1.0, -1.0]).unwrap();
        let u = phase_unitary(&obs, FRAC_PI_2);
        let expect = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(0.0, -1.0),
            C64::new(0.0, 1.0),
        ]));
        assert!(max_abs_diff(u.matrix(), &expect) < 1e-15);
    }

    #[test]
    fn sigma_x_at_pi() {
        // exp(-i pi X) = cos(pi) 1 - i sin(pi) X = -1
        let x = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        );
        let obs = eigendecompose(&x).unwrap();
        let u = phase_unitary(&obs, PI);
        assert!(u.unitarity_defect() < 1e-14);
        let series = CMatrix::identity(2, 2) * C64::new(PI.cos(), 0.0) - x * C64::new(0.0, PI.sin());
        assert!(max_abs_diff(u.matrix(), &series) < 1e-14);
        let plus = BasisSet::qubit_x().state(0);
        assert!((u.apply(&plus).fidelity(&plus) - 1.0).abs() < 1e-14);
        for (k, &a) in obs.eigenvalues().iter().enumerate() {
            let v = obs.eigenbasis().column(k);
            let uv = u.matrix() * &v;
            assert!((uv - v * C64::from_polar(1.0, -PI * a)).norm() < 1e-14);
        }
    }

    #[test]
    fn phase_unitaries_form_a_group() {
        let obs = eigendecompose(&random::gue(5, &mut rng::seeded(3))).unwrap();
        let (p1, p2) = (0.37, -1.9);
        let lhs = phase_unitary(&obs, p1).compose(&phase_unitary(&obs, p2));
        let rhs = phase_unitary(&obs, p1 + p2);
        assert!(max_abs_diff(lhs.matrix(), rhs.matrix()) < tol::LIN);
    }

    #[test]
    fn rejects_non_unitary() {
        assert!(UnitaryMap::new(CMatrix::identity(2, 2) * C64::new(2.0, 0.0)).is_err());
    }
}
