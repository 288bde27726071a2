//! Complex joint and conditional probabilities.
//!
//! A state `rho` seen through two bases `A` and `B` is the Kirkwood-Dirac table
//! `rho(a, b) = <b|a><a|rho|b>`. Its marginals are the Born distributions of
//! both bases. Conditioning on an initial `a` and a final `b` gives the complex
//! conditional probabilities (weak values of projectors)
//! `P(m|a,b) = <b|m><m|a> / <b|a>`.
//!
//! Sums that would divide by a vanishing `<b|a>` are evaluated in the form
//! where that denominator cancels, so they stay defined for every basis pair.

use std::io::Write;

use crate::error::{Error, Result};
use crate::hilbert::{BasisSet, DensityOperator, Observable, PureState, UnitaryMap};
use crate::serial::{fmt_f64, matrix_rows, pair};
use crate::{tol, CMatrix, C64};

/// The table `rho(a, b)` of a state in bases `A` (rows) and `B` (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexJointDistribution {
    basis_a: BasisSet,
    basis_b: BasisSet,
    table: CMatrix,
    state: DensityOperator,
}

impl ComplexJointDistribution {
    pub(crate) fn from_parts(basis_a: BasisSet, basis_b: BasisSet, table: CMatrix, state: DensityOperator) -> Self {
        ComplexJointDistribution {
            basis_a,
            basis_b,
            table,
            state,
        }
    }

    pub fn basis_a(&self) -> &BasisSet {
        &self.basis_a
    }

    pub fn basis_b(&self) -> &BasisSet {
        &self.basis_b
    }

    /// Rows indexed by `a`, columns by `b`.
    pub fn table(&self) -> &CMatrix {
        &self.table
    }

    /// The density operator the table represents.
    pub fn state(&self) -> &DensityOperator {
        &self.state
    }

    pub fn dim(&self) -> usize {
        self.table.nrows()
    }

    pub fn entry(&self, a_label: &str, b_label: &str) -> Result<C64> {
        Ok(self.table[(self.basis_a.index_of(a_label)?, self.basis_b.index_of(b_label)?)])
    }

    pub fn total(&self) -> C64 {
        self.table.iter().sum()
    }

    /// `sum_b rho(a, b)` for each `a`.
    pub fn marginal_a(&self) -> Vec<C64> {
        self.table.row_iter().map(|r| r.iter().sum()).collect()
    }

    /// `sum_a rho(a, b)` for each `b`.
    pub fn marginal_b(&self) -> Vec<C64> {
        self.table.column_iter().map(|c| c.iter().sum()).collect()
    }

    /// CSV with header `a_label,b_label,re,im`, rows in `(a, b)` order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["a_label", "b_label", "re", "im"])?;
        for (i, a) in self.basis_a.labels().iter().enumerate() {
            for (j, b) in self.basis_b.labels().iter().enumerate() {
                let z = self.table[(i, j)];
                w.write_record([a.as_str(), b.as_str(), &fmt_f64(z.re), &fmt_f64(z.im)])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "basis_a": self.basis_a.to_json(),
            "basis_b": self.basis_b.to_json(),
            "table": matrix_rows(&self.table),
            "state": self.state.to_json(),
        })
    }
}

/// Complex conditional probabilities `P(m | initial, final)` over `basis_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexConditional {
    initial: PureState,
    final_state: PureState,
    basis_m: BasisSet,
    values: Vec<C64>,
}

impl ComplexConditional {
    pub(crate) fn from_parts(initial: PureState, final_state: PureState, basis_m: BasisSet, values: Vec<C64>) -> Self {
        ComplexConditional {
            initial,
            final_state,
            basis_m,
            values,
        }
    }

    pub fn initial(&self) -> &PureState {
        &self.initial
    }

    pub fn final_state(&self) -> &PureState {
        &self.final_state
    }

    pub fn basis_m(&self) -> &BasisSet {
        &self.basis_m
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn value(&self, m_label: &str) -> Result<C64> {
        Ok(self.values[self.basis_m.index_of(m_label)?])
    }

    pub fn sum(&self) -> C64 {
        self.values.iter().sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "labels": self.basis_m.labels(),
            "values": self.values.iter().copied().map(pair).collect::<Vec<_>>(),
        })
    }
}

fn check_dim(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Shape(format!("{what} has dimension {got}, expected {expected}")));
    }
    Ok(())
}

fn check_overlap(overlap: C64) -> Result<()> {
    if overlap.norm() <= tol::OVERLAP {
        return Err(Error::OrthogonalConditioning {
            overlap: overlap.norm(),
            tolerance: tol::OVERLAP,
        });
    }
    Ok(())
}

/// `rho(a, b) = <b|a><a|rho|b>`.
pub fn kd_joint(
    rho: &DensityOperator,
    basis_a: &BasisSet,
    basis_b: &BasisSet,
) -> Result<ComplexJointDistribution> {
    let d = rho.dim();
    check_dim("basis A", d, basis_a.dim())?;
    check_dim("basis B", d, basis_b.dim())?;
    let a = basis_a.columns();
    let b = basis_b.columns();
    // overlaps[(b, a)] = <b|a>, elements[(a, b)] = <a|rho|b>
    let overlaps = b.adjoint() * a;
    let elements = a.adjoint() * rho.matrix() * b;
    let table = CMatrix::from_fn(d, d, |i, j| overlaps[(j, i)] * elements[(i, j)]);
    Ok(ComplexJointDistribution {
        basis_a: basis_a.clone(),
        basis_b: basis_b.clone(),
        table,
        state: rho.clone(),
    })
}

/// `P(m|a,b) = <b|m><m|a> / <b|a>` for every `m` in `basis_m`.
pub fn weak_conditional(a: &PureState, b: &PureState, basis_m: &BasisSet) -> Result<ComplexConditional> {
    check_dim("final state", a.dim(), b.dim())?;
    check_dim("basis M", a.dim(), basis_m.dim())?;
    let ba = b.inner(a);
    check_overlap(ba)?;
    let values = (0..basis_m.dim())
        .map(|k| {
            let m = basis_m.column(k);
            let bm = b.inner_vec(&m);
            let ma = m.dotc(a.amplitudes());
            bm * ma / ba
        })
        .collect();
    Ok(ComplexConditional {
        initial: a.clone(),
        final_state: b.clone(),
        basis_m: basis_m.clone(),
        values,
    })
}

/// The transformation kernel `P(U(b)|a,b') = <b'|U^†|b><b|U|a> / <b'|a>`.
pub fn transform_kernel(
    u: &UnitaryMap,
    a: &PureState,
    b_label: &str,
    bprime_label: &str,
    basis_b: &BasisSet,
) -> Result<C64> {
    check_dim("unitary", a.dim(), u.dim())?;
    check_dim("basis B", a.dim(), basis_b.dim())?;
    let b = basis_b.column(basis_b.index_of(b_label)?);
    let bp = basis_b.column(basis_b.index_of(bprime_label)?);
    let bpa = bp.dotc(a.amplitudes());
    check_overlap(bpa)?;
    let ua = u.matrix() * a.amplitudes();
    let ub = u.matrix() * &bp;
    // <b'|U^†|b> = conj(<b|U|b'>)
    let bp_udag_b = b.dotc(&ub).conj();
    let b_u_a = b.dotc(&ua);
    Ok(bp_udag_b * b_u_a / bpa)
}

/// The kernel in its spectral form for an eigenstate `a` of `observable`:
///
/// `<b|a>/<b'|a> * sum_a' <b'|a'><a'|b> w(A_a - A_a')`
///
/// With `w(gap) = exp(-i phi gap)` this equals [`transform_kernel`] for
/// `U = exp(-i phi A)`. With `w` a characteristic function it gives the
/// phase-averaged kernel.
pub fn kernel_spectral_sum<W: Fn(f64) -> C64>(
    observable: &Observable,
    a_label: &str,
    b_label: &str,
    bprime_label: &str,
    basis_b: &BasisSet,
    weight: W,
) -> Result<C64> {
    check_dim("basis B", observable.dim(), basis_b.dim())?;
    let eig = observable.eigenbasis();
    let ia = observable.index_of(a_label)?;
    let a = eig.column(ia);
    let b = basis_b.column(basis_b.index_of(b_label)?);
    let bp = basis_b.column(basis_b.index_of(bprime_label)?);
    let bpa = bp.dotc(&a);
    check_overlap(bpa)?;
    let aval = observable.eigenvalues()[ia];
    let sum: C64 = (0..observable.dim())
        .map(|k| {
            let ak = eig.column(k);
            bp.dotc(&ak) * ak.dotc(&b) * weight(aval - observable.eigenvalues()[k])
        })
        .sum();
    Ok(b.dotc(&a) / bpa * sum)
}

/// `rho(a, U(b))`, the table of the same state with `B` replaced by `U^† B`.
///
/// Evaluated as `<b|U|a> <a|rho U^†|b>`, which is the kernel sum
/// `sum_b' P(U(b)|a,b') rho(a,b')` with the `<b'|a>` denominators cancelled.
pub fn propagate_joint(joint: &ComplexJointDistribution, u: &UnitaryMap) -> Result<ComplexJointDistribution> {
    let d = joint.dim();
    check_dim("unitary", d, u.dim())?;
    let a = joint.basis_a.columns();
    let b = joint.basis_b.columns();
    let um = u.matrix();
    let b_u_a = b.adjoint() * um * a;
    let a_rho_udag_b = a.adjoint() * joint.state.matrix() * um.adjoint() * b;
    let table = CMatrix::from_fn(d, d, |i, j| b_u_a[(j, i)] * a_rho_udag_b[(i, j)]);
    Ok(ComplexJointDistribution {
        basis_a: joint.basis_a.clone(),
        basis_b: joint.basis_b.transformed(&um.adjoint())?,
        table,
        state: joint.state.clone(),
    })
}

/// Complex-valued `P_exp(m) = sum_{a,b} <b|m><m|a><a|rho|b>`.
pub fn predict_outcome_complex(joint: &ComplexJointDistribution, basis_m: &BasisSet) -> Result<Vec<C64>> {
    let d = joint.dim();
    check_dim("basis M", d, basis_m.dim())?;
    let a = joint.basis_a.columns();
    let b = joint.basis_b.columns();
    let m = basis_m.columns();
    let m_a = m.adjoint() * a; // <m|a>
    let a_rho_b = a.adjoint() * joint.state.matrix() * b; // <a|rho|b>
    let b_m = b.adjoint() * m; // <b|m>
    Ok((0..d)
        .map(|k| {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..d {
                for j in 0..d {
                    acc += b_m[(j, k)] * m_a[(k, i)] * a_rho_b[(i, j)];
                }
            }
            acc
        })
        .collect())
}

/// Outcome distribution `P_exp(m) = sum_{a,b} P(m|a,b) rho(a,b)` in the
/// cancelled form. Equals the Born rule `<m|rho|m>`.
pub fn predict_outcome(joint: &ComplexJointDistribution, basis_m: &BasisSet) -> Result<Vec<f64>> {
    Ok(predict_outcome_complex(joint, basis_m)?.into_iter().map(|z| z.re).collect())
}

/// `sum_{a,b} P(m|a,b) rho(a,b)` evaluated term by term from the table and
/// explicit weak values. Terms with `|<b|a>| <= tol::OVERLAP` are skipped when
/// their table entry is negligible (`0 * undefined := 0`) and are an error
/// otherwise.
pub fn predict_outcome_from_table(joint: &ComplexJointDistribution, basis_m: &BasisSet) -> Result<Vec<C64>> {
    let d = joint.dim();
    check_dim("basis M", d, basis_m.dim())?;
    let a = joint.basis_a.columns();
    let b = joint.basis_b.columns();
    let m = basis_m.columns();
    let b_a = b.adjoint() * a;
    let m_a = m.adjoint() * a;
    let b_m = b.adjoint() * m;
    let mut out = vec![C64::new(0.0, 0.0); d];
    for i in 0..d {
        for j in 0..d {
            let weight = joint.table[(i, j)];
            let denom = b_a[(j, i)];
            if denom.norm() <= tol::OVERLAP {
                if weight.norm() <= tol::LIN {
                    continue;
                }
                return Err(Error::OrthogonalConditioning {
                    overlap: denom.norm(),
                    tolerance: tol::OVERLAP,
                });
            }
            for (k, o) in out.iter_mut().enumerate() {
                *o += b_m[(j, k)] * m_a[(k, i)] / denom * weight;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::phase_unitary;
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-14
    }

    fn ket0() -> PureState {
        PureState::basis_ket(2, 0)
    }

    #[test]
    fn kd_standard_standard() {
        let z = BasisSet::standard(2).unwrap();
        let j = kd_joint(&ket0().projector(), &z, &z).unwrap();
        for i in 0..2 {
            for k in 0..2 {
                let e = if i == 0 && k == 0 { 1.0 } else { 0.0 };
                assert!(close(j.table()[(i, k)], c(e, 0.0)));
            }
        }
    }

    #[test]
    fn kd_standard_fourier() {
        let j = kd_joint(&ket0().projector(), &BasisSet::standard(2).unwrap(), &BasisSet::fourier(2).unwrap()).unwrap();
        assert!(close(j.table()[(0, 0)], c(0.5, 0.0)));
        assert!(close(j.table()[(0, 1)], c(0.5, 0.0)));
        assert!(close(j.table()[(1, 0)], c(0.0, 0.0)));
        assert!(close(j.table()[(1, 1)], c(0.0, 0.0)));
    }

    #[test]
    fn kd_x_y_table() {
        let j = kd_joint(&ket0().projector(), &BasisSet::qubit_x(), &BasisSet::qubit_y()).unwrap();
        assert!(close(j.entry("+", "+i").unwrap(), c(0.25, -0.25)));
        assert!(close(j.entry("+", "-i").unwrap(), c(0.25, 0.25)));
        assert!(close(j.entry("-", "+i").unwrap(), c(0.25, 0.25)));
        assert!(close(j.entry("-", "-i").unwrap(), c(0.25, -0.25)));
        assert!(close(j.total(), c(1.0, 0.0)));
    }

    #[test]
    fn kd_dimension_mismatch() {
        let r = kd_joint(&ket0().projector(), &BasisSet::standard(3).unwrap(), &BasisSet::standard(2).unwrap());
        assert!(matches!(r, Err(Error::Shape(_))));
    }

    #[test]
    fn weak_values_examples() {
        let z = BasisSet::standard(2).unwrap();
        let x = BasisSet::qubit_x();
        let y = BasisSet::qubit_y();
        let w = weak_conditional(&ket0(), &x.state(0), &z).unwrap();
        assert!(close(w.values()[0], c(1.0, 0.0)));
        assert!(close(w.values()[1], c(0.0, 0.0)));

        let w = weak_conditional(&x.state(0), &y.state(0), &z).unwrap();
        assert!(close(w.values()[0], c(0.5, 0.5)));
        assert!(close(w.values()[1], c(0.5, -0.5)));
        assert!(close(w.sum(), c(1.0, 0.0)));

        let r = weak_conditional(&x.state(0), &x.state(1), &y);
        assert!(matches!(r, Err(Error::OrthogonalConditioning { .. })));
    }

    #[test]
    fn kernel_identity_cases() {
        let f = BasisSet::fourier(2).unwrap();
        let id = UnitaryMap::identity(2);
        assert!(close(transform_kernel(&id, &ket0(), "0", "0", &f).unwrap(), c(1.0, 0.0)));
        assert!(close(transform_kernel(&id, &ket0(), "0", "1", &f).unwrap(), c(0.0, 0.0)));
    }

    #[test]
    fn kernel_phase_example_both_forms() {
        let obs = Observable::diagonal(&[1.0, -1.0]).unwrap();
        let f = BasisSet::fourier(2).unwrap();
        let u = phase_unitary(&obs, FRAC_PI_2);
        let direct = transform_kernel(&u, &ket0(), "0", "0", &f).unwrap();
        let spectral =
            kernel_spectral_sum(&obs, "0", "0", "0", &f, |g| C64::from_polar(1.0, -FRAC_PI_2 * g)).unwrap();
        assert!(direct.norm() < 1e-15);
        assert!(spectral.norm() < 1e-15);
        // b = -, b' = +: <+|U^†|-> = i, <-|U|0>/<+|0> = -i, kernel = 1
        let direct = transform_kernel(&u, &ket0(), "1", "0", &f).unwrap();
        let spectral =
            kernel_spectral_sum(&obs, "0", "1", "0", &f, |g| C64::from_polar(1.0, -FRAC_PI_2 * g)).unwrap();
        assert!((direct - spectral).norm() < 1e-14);
        assert!(close(direct, c(1.0, 0.0)));
    }

    #[test]
    fn kernel_rejects_orthogonal_conditioning() {
        let x = BasisSet::qubit_x();
        let r = transform_kernel(&UnitaryMap::identity(2), &x.state(0), "+", "-", &x);
        assert!(matches!(r, Err(Error::OrthogonalConditioning { .. })));
    }

    #[test]
    fn propagate_identity_and_fourier_rotation() {
        let z = BasisSet::standard(2).unwrap();
        let f = BasisSet::fourier(2).unwrap();
        let j = kd_joint(&ket0().projector(), &z, &z).unwrap();
        let same = propagate_joint(&j, &UnitaryMap::identity(2)).unwrap();
        assert_eq!(same.table(), j.table());

        // U^† |b> = fourier column b
        let u = UnitaryMap::basis_change(&f, &z).unwrap();
        let p = propagate_joint(&j, &u).unwrap();
        let expect = kd_joint(&ket0().projector(), &z, &f).unwrap();
        assert!(crate::hilbert::max_abs_diff(p.table(), expect.table()) < 1e-15);
    }

    #[test]
    fn predictions() {
        let z = BasisSet::standard(2).unwrap();
        let j = kd_joint(&ket0().projector(), &z, &z).unwrap();
        let p = predict_outcome(&j, &z).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-15 && p[1].abs() < 1e-15);

        let j = kd_joint(&ket0().projector(), &BasisSet::qubit_x(), &BasisSet::qubit_y()).unwrap();
        let p = predict_outcome(&j, &BasisSet::fourier(2).unwrap()).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        let t = predict_outcome_from_table(&j, &BasisSet::fourier(2).unwrap()).unwrap();
        assert!(close(t[0], c(0.5, 0.0)) && close(t[1], c(0.5, 0.0)));
    }

    #[test]
    fn table_prediction_skips_cancelled_terms() {
        // Z with Z: <b|a> = 0 off the diagonal, where the table vanishes too
        let z = BasisSet::standard(2).unwrap();
        let j = kd_joint(&BasisSet::qubit_x().state(0).projector(), &z, &z).unwrap();
        let t = predict_outcome_from_table(&j, &BasisSet::qubit_x()).unwrap();
        // the table has lost the Z coherences of |+>, so the result is the
        // X distribution of the dephased state
        assert!(close(t[0], c(0.5, 0.0)) && close(t[1], c(0.5, 0.0)));
    }

    #[test]
    fn csv_layout() {
        let j = kd_joint(&ket0().projector(), &BasisSet::qubit_x(), &BasisSet::qubit_y()).unwrap();
        let s = j.to_csv_string().unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "a_label,b_label,re,im");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("+,+i,2.5000000000000"));
        let v = j.to_json();
        assert_eq!(v["table"][0][0].as_array().unwrap().len(), 2);
    }
}
