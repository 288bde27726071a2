//! Finite-dimensional complex linear algebra: bases, states, observables and
//! unitaries.
//!
//! All values are immutable after construction and validated against
//! [`tol::LIN`](crate::tol::LIN). Complex numbers serialize as `[re, im]`.

mod basis;
mod observable;
pub mod random;
mod state;
mod unitary;

pub use basis::{BasisKind, BasisSet};
pub use observable::{eigendecompose, Observable};
pub use state::{DensityOperator, PureState};
pub use unitary::{phase_unitary, UnitaryMap};

use crate::{CMatrix, CVector, C64};

/// Magnitudes within this distance of the maximum count as ties when choosing
/// the canonical-phase pivot.
const PHASE_TIE: f64 = 1e-10;

/// Rotates `v` so that its largest-magnitude entry (lowest index on ties) is
/// real and non-negative.
pub(crate) fn canonicalize_phase(v: &mut CVector) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max - PHASE_TIE)
        .expect("max is attained");
    let rot = v[pivot].conj() / v[pivot].norm();
    for z in v.iter_mut() {
        *z *= rot;
    }
    v[pivot] = C64::new(v[pivot].norm(), 0.0);
}

/// Largest entrywise magnitude of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest entrywise magnitude of `m - m^†`.
pub(crate) fn hermiticity_defect(m: &CMatrix) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Hermitian part `(m + m^†)/2` with an exactly real diagonal.
pub(crate) fn hermitian_part(m: &CMatrix) -> CMatrix {
    let mut h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    for i in 0..h.nrows() {
        h[(i, i)].im = 0.0;
    }
    h
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub(crate) fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}
