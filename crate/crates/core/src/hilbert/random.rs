//! Random states, density operators, Hermitian matrices and Haar unitaries.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{canonicalize_phase, hermitian_part};
use crate::{CMatrix, CVector, C64};

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `rows x cols` matrix of i.i.d. standard complex normals.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Haar-random unitary (QR of a Ginibre matrix with the phases of `R`'s
/// diagonal absorbed into `Q`).
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(dim, dim, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Haar-random unit vector in canonical phase.
pub fn haar_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    let mut v = CVector::from_fn(dim, |_, _| complex_normal(rng));
    let n = v.norm();
    v /= C64::new(n, 0.0);
    canonicalize_phase(&mut v);
    v
}

/// Hilbert-Schmidt random density matrix `G G^† / tr(G G^†)`.
pub fn hilbert_schmidt_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(dim, dim, rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    hermitian_part(&(m / C64::new(tr, 0.0)))
}

/// Random Hermitian matrix from the Gaussian unitary ensemble.
pub fn gue<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    hermitian_part(&ginibre(dim, dim, rng))
}
