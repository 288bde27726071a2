//! Time-symmetric causality identities and the action-phase representation.
//!
//! A preparation of `m'` is written as the joint table `rho(m,b|m') =
//! P(b|m) delta(m,m')` and carried into another basis `A` through the complex
//! conditional probabilities `P(a|m,b)`. Measuring `M` again must return
//! `m'` with certainty whatever the intermediate `B` was, which reduces to the
//! determinism condition `sum_a P(m|a,b) P(a|m',b) = delta(m,m')`.
//!
//! Sums over weak values skip terms whose weight vanishes even if the weak
//! value itself is singular (`0 * undefined := 0`).

use crate::error::{Error, Result};
use crate::hilbert::{BasisSet, PureState};
use crate::quasiprob::{kd_joint, weak_conditional, ComplexConditional, ComplexJointDistribution};
use crate::serial::{matrix_rows, pair};
use crate::{tol, CMatrix, CVector, C64};

fn same_dim(bases: &[&BasisSet]) -> Result<usize> {
    let d = bases[0].dim();
    if bases.iter().any(|b| b.dim() != d) {
        return Err(Error::Shape("bases have different dimensions".into()));
    }
    Ok(d)
}

/// Applies `0 * undefined := 0`: a denominator at or below `tol::OVERLAP`
/// is allowed only when the weight it multiplies is negligible.
fn weak_term(numerator: C64, denominator: C64, weight: C64) -> Result<Option<C64>> {
    if denominator.norm() <= tol::OVERLAP {
        if weight.norm() <= tol::LIN {
            return Ok(None);
        }
        return Err(Error::OrthogonalConditioning {
            overlap: denominator.norm(),
            tolerance: tol::OVERLAP,
        });
    }
    Ok(Some(numerator / denominator * weight))
}

/// `rho(m,b|m') = P(b|m) delta(m,m')`, the table of `|m'><m'|` in `(M, B)`.
pub fn prep_joint(mprime_label: &str, basis_m: &BasisSet, basis_b: &BasisSet) -> Result<ComplexJointDistribution> {
    let d = same_dim(&[basis_m, basis_b])?;
    let k = basis_m.index_of(mprime_label)?;
    let mprime = basis_m.column(k);
    let mut table = CMatrix::zeros(d, d);
    for j in 0..d {
        table[(k, j)] = C64::new(basis_b.column(j).dotc(&mprime).norm_sqr(), 0.0);
    }
    Ok(ComplexJointDistribution::from_parts(
        basis_m.clone(),
        basis_b.clone(),
        table,
        basis_m.state(k).projector(),
    ))
}

/// Replaces the row basis of `joint` by `basis_a`:
/// `rho(a,b) = sum_m P(a|m,b) rho(m,b)` with `P(a|m,b) = <b|a><a|m>/<b|m>`.
pub fn rerepresent(joint: &ComplexJointDistribution, basis_a: &BasisSet) -> Result<ComplexJointDistribution> {
    let m = joint.basis_a().columns();
    let b = joint.basis_b().columns();
    let d = same_dim(&[joint.basis_a(), joint.basis_b(), basis_a])?;
    let a = basis_a.columns();
    let b_a = b.adjoint() * a;
    let a_m = a.adjoint() * m;
    let b_m = b.adjoint() * m;
    let mut table = CMatrix::zeros(d, d);
    for ia in 0..d {
        for jb in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for km in 0..d {
                let num = b_a[(jb, ia)] * a_m[(ia, km)];
                if let Some(t) = weak_term(num, b_m[(jb, km)], joint.table()[(km, jb)])? {
                    acc += t;
                }
            }
            table[(ia, jb)] = acc;
        }
    }
    Ok(ComplexJointDistribution::from_parts(
        basis_a.clone(),
        joint.basis_b().clone(),
        table,
        joint.state().clone(),
    ))
}

/// `P_exp(m|m') = sum_{a,b} P(m|a,b) P(a|m',b) P(b|m')`, complex-valued.
pub fn prep_measure_chain_complex(
    mprime_label: &str,
    basis_m: &BasisSet,
    basis_a: &BasisSet,
    basis_b: &BasisSet,
) -> Result<Vec<C64>> {
    let d = same_dim(&[basis_m, basis_a, basis_b])?;
    let joint = rerepresent(&prep_joint(mprime_label, basis_m, basis_b)?, basis_a)?;
    let m = basis_m.columns();
    let a = basis_a.columns();
    let b = basis_b.columns();
    let b_m = b.adjoint() * m;
    let m_a = m.adjoint() * a;
    let b_a = b.adjoint() * a;
    let mut out = vec![C64::new(0.0, 0.0); d];
    for (km, o) in out.iter_mut().enumerate() {
        for ia in 0..d {
            for jb in 0..d {
                let num = b_m[(jb, km)] * m_a[(km, ia)];
                if let Some(t) = weak_term(num, b_a[(jb, ia)], joint.table()[(ia, jb)])? {
                    *o += t;
                }
            }
        }
    }
    Ok(out)
}

/// Real part of [`prep_measure_chain_complex`]; equals `delta(m, m')`.
pub fn prep_measure_chain(
    mprime_label: &str,
    basis_m: &BasisSet,
    basis_a: &BasisSet,
    basis_b: &BasisSet,
) -> Result<Vec<f64>> {
    Ok(prep_measure_chain_complex(mprime_label, basis_m, basis_a, basis_b)?
        .into_iter()
        .map(|z| z.re)
        .collect())
}

/// Entries `sum_a P(m|a,b) P(a|m',b)` (rows `m`, columns `m'`).
#[derive(Debug, Clone, PartialEq)]
pub struct DeterminismMatrix {
    pub labels: Vec<String>,
    pub entries: CMatrix,
}

impl DeterminismMatrix {
    /// `max |entries - 1|`.
    pub fn identity_deviation(&self) -> f64 {
        let d = self.entries.nrows();
        crate::hilbert::max_abs_diff(&self.entries, &CMatrix::identity(d, d))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "labels": self.labels, "entries": matrix_rows(&self.entries) })
    }
}

/// Requires `|<b|m'>|` and `|<b|a>|` above `tol::OVERLAP` for every `m'`
/// and `a`.
pub fn determinism_matrix(basis_m: &BasisSet, basis_a: &BasisSet, b: &PureState) -> Result<DeterminismMatrix> {
    let d = same_dim(&[basis_m, basis_a])?;
    if b.dim() != d {
        return Err(Error::Shape("final state dimension differs from the bases".into()));
    }
    let m = basis_m.columns();
    let a = basis_a.columns();
    let bm: Vec<C64> = (0..d).map(|k| b.inner_vec(&m.column(k).into_owned())).collect();
    let ba: Vec<C64> = (0..d).map(|k| b.inner_vec(&a.column(k).into_owned())).collect();
    if let Some(z) = bm.iter().chain(&ba).find(|z| z.norm() <= tol::OVERLAP) {
        return Err(Error::OrthogonalConditioning {
            overlap: z.norm(),
            tolerance: tol::OVERLAP,
        });
    }
    let m_a = m.adjoint() * a;
    // P(m|a,b) = <b|m><m|a>/<b|a>,  P(a|m',b) = <b|a><a|m'>/<b|m'>
    let entries = CMatrix::from_fn(d, d, |km, kp| {
        (0..d)
            .map(|ia| {
                let p_m = bm[km] * m_a[(km, ia)] / ba[ia];
                let p_a = ba[ia] * m_a[(kp, ia)].conj() / bm[kp];
                p_m * p_a
            })
            .sum()
    });
    Ok(DeterminismMatrix {
        labels: basis_m.labels().to_vec(),
        entries,
    })
}

/// Action `S(m)` per label of a basis, stored as the phase `S(m)/hbar`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSchedule {
    labels: Vec<String>,
    phases: Vec<f64>,
}

impl ActionSchedule {
    pub fn new(basis_m: &BasisSet, phases: Vec<f64>) -> Result<Self> {
        if phases.len() != basis_m.dim() {
            return Err(Error::Shape(format!(
                "{} actions for a basis of dimension {}",
                phases.len(),
                basis_m.dim()
            )));
        }
        if let Some(p) = phases.iter().find(|p| !p.is_finite()) {
            return Err(Error::Shape(format!("non-finite action {p}")));
        }
        Ok(ActionSchedule {
            labels: basis_m.labels().to_vec(),
            phases,
        })
    }

    pub fn zero(basis_m: &BasisSet) -> Self {
        Self::new(basis_m, vec![0.0; basis_m.dim()]).expect("finite")
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// `exp(-i S(m)/hbar)` per label.
    fn factors(&self) -> impl Iterator<Item = C64> + '_ {
        self.phases.iter().map(|&s| C64::from_polar(1.0, -s))
    }
}

/// The two evaluations of `P(U(b)|a)` for `U = sum_m exp(-i S(m)/hbar) |m><m|`.
#[derive(Debug)]
pub struct TransformedProbability {
    /// `|sum_m <b|m><m|a> exp(-i S(m)/hbar)|^2`.
    pub p_vector: f64,
    /// `P(b|a) |sum_m P(m|a,b) exp(-i S(m)/hbar)|^2`; needs `<b|a> != 0`.
    pub p_action: Result<f64>,
}

pub fn transformed_probability(
    a: &PureState,
    b: &PureState,
    basis_m: &BasisSet,
    schedule: &ActionSchedule,
) -> Result<TransformedProbability> {
    let d = basis_m.dim();
    if a.dim() != d || b.dim() != d || schedule.phases.len() != d {
        return Err(Error::Shape("states, basis and schedule must share a dimension".into()));
    }
    if schedule.labels != basis_m.labels() {
        return Err(Error::Shape("schedule labels do not match the basis".into()));
    }
    let amp: C64 = schedule
        .factors()
        .enumerate()
        .map(|(k, f)| {
            let m = basis_m.column(k);
            b.inner_vec(&m) * m.dotc(a.amplitudes()) * f
        })
        .sum();
    let p_action = weak_conditional(a, b, basis_m).map(|w| {
        let s: C64 = w.values().iter().zip(schedule.factors()).map(|(p, f)| p * f).sum();
        b.fidelity(a) * s.norm_sqr()
    });
    Ok(TransformedProbability {
        p_vector: amp.norm_sqr(),
        p_action,
    })
}

/// The equal-amplitude state `(1/sqrt d) sum_m |m>`, up to the canonical
/// global phase.
pub fn reference_state(basis_m: &BasisSet) -> PureState {
    // the rows of a unitary sum to a vector of norm sqrt(d)
    PureState::normalized(basis_m.columns().column_sum()).expect("non-zero sum")
}

/// `P(m|a,r) = <m|a> / sum_m' <m'|a>`.
pub fn action_phase_representation(a: &PureState, basis_m: &BasisSet) -> Result<ComplexConditional> {
    if a.dim() != basis_m.dim() {
        return Err(Error::Shape("state and basis dimensions differ".into()));
    }
    let comps: Vec<C64> = (0..basis_m.dim()).map(|k| basis_m.column(k).dotc(a.amplitudes())).collect();
    let total: C64 = comps.iter().sum();
    if total.norm() <= tol::OVERLAP {
        return Err(Error::OrthogonalReference { overlap: total.norm() });
    }
    let values = comps.into_iter().map(|c| c / total).collect();
    Ok(ComplexConditional::from_parts(
        a.clone(),
        reference_state(basis_m),
        basis_m.clone(),
        values,
    ))
}

/// The normalized, canonical-phase state proportional to
/// `sum_m P(m|a,r) |m>`.
pub fn reconstruct_state(cond: &ComplexConditional, basis_m: &BasisSet) -> Result<PureState> {
    if cond.values().len() != basis_m.dim() {
        return Err(Error::Shape("value count differs from the basis dimension".into()));
    }
    let v = CVector::from_column_slice(cond.values());
    if v.norm() == 0.0 {
        return Err(Error::DegenerateInput("all action-phase probabilities are zero".into()));
    }
    let sum = cond.sum();
    if (sum - C64::new(1.0, 0.0)).norm() > tol::LIN {
        return Err(Error::InvalidState(format!(
            "action-phase probabilities sum to {}{:+}i, not 1",
            sum.re, sum.im
        )));
    }
    PureState::normalized(basis_m.columns() * v)
}

/// Outcome distribution of `a` in `M` routed through its `(A, B)` table.
/// The result does not depend on `A` or `B`.
pub fn chained_prediction(
    a: &PureState,
    basis_a: &BasisSet,
    basis_b: &BasisSet,
    basis_m: &BasisSet,
) -> Result<Vec<f64>> {
    crate::quasiprob::predict_outcome(&kd_joint(&a.projector(), basis_a, basis_b)?, basis_m)
}

/// JSON for a chain result `P_exp(m|m')`.
pub fn chain_to_json(mprime_label: &str, basis_m: &BasisSet, values: &[C64]) -> serde_json::Value {
    serde_json::json!({
        "mprime": mprime_label,
        "labels": basis_m.labels(),
        "values": values.iter().copied().map(pair).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::max_abs_diff;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn z2() -> BasisSet {
        BasisSet::standard(2).unwrap()
    }

    #[test]
    fn prep_joint_examples() {
        let j = prep_joint("0", &z2(), &z2()).unwrap();
        assert_eq!(j.table(), &CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]));
        let j = prep_joint("0", &z2(), &BasisSet::fourier(2).unwrap()).unwrap();
        assert!((j.table()[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((j.table()[(0, 1)] - c(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(j.table()[(1, 0)], c(0.0, 0.0));
        assert!(matches!(prep_joint("7", &z2(), &z2()), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn rerepresent_examples() {
        let j = prep_joint("0", &z2(), &BasisSet::qubit_y()).unwrap();
        let same = rerepresent(&j, &z2()).unwrap();
        assert!(max_abs_diff(same.table(), j.table()) < 1e-15);
        let x = rerepresent(&j, &BasisSet::qubit_x()).unwrap();
        assert!((x.entry("+", "+i").unwrap() - c(0.25, -0.25)).norm() < 1e-15);
        assert!((x.entry("+", "-i").unwrap() - c(0.25, 0.25)).norm() < 1e-15);
        assert!((x.entry("-", "+i").unwrap() - c(0.25, 0.25)).norm() < 1e-15);
        assert!((x.entry("-", "-i").unwrap() - c(0.25, -0.25)).norm() < 1e-15);
    }

    #[test]
    fn chain_examples() {
        let p = prep_measure_chain("0", &z2(), &z2(), &z2()).unwrap();
        assert_eq!(p, vec![1.0, 0.0]);
        let p = prep_measure_chain("0", &z2(), &BasisSet::fourier(2).unwrap(), &BasisSet::qubit_y()).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-15 && p[1].abs() < 1e-15);
        let p = prep_measure_chain("-", &BasisSet::qubit_x(), &BasisSet::qubit_x(), &BasisSet::qubit_y()).unwrap();
        assert!(p[0].abs() < 1e-15 && (p[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn determinism_examples() {
        let y = BasisSet::qubit_y();
        let m = determinism_matrix(&z2(), &z2(), &y.state(0)).unwrap();
        assert!(m.identity_deviation() < 1e-15);
        let m = determinism_matrix(&z2(), &BasisSet::fourier(2).unwrap(), &y.state(0)).unwrap();
        assert!(m.identity_deviation() < 1e-12);
        let r = determinism_matrix(&z2(), &BasisSet::qubit_x(), &PureState::basis_ket(2, 0));
        assert!(matches!(r, Err(Error::OrthogonalConditioning { .. })));
    }

    #[test]
    fn transformed_probability_examples() {
        let x = BasisSet::qubit_x();
        let (plus, minus) = (x.state(0), x.state(1));
        let t = transformed_probability(&plus, &plus, &z2(), &ActionSchedule::zero(&z2())).unwrap();
        assert!((t.p_vector - 1.0).abs() < 1e-15);
        assert!((t.p_action.unwrap() - 1.0).abs() < 1e-15);

        let pi = ActionSchedule::new(&z2(), vec![0.0, PI]).unwrap();
        let t = transformed_probability(&plus, &plus, &z2(), &pi).unwrap();
        assert!(t.p_vector < 1e-15);
        assert!(t.p_action.unwrap() < 1e-15);

        let half = ActionSchedule::new(&z2(), vec![0.0, FRAC_PI_2]).unwrap();
        let t = transformed_probability(&plus, &plus, &z2(), &half).unwrap();
        assert!((t.p_vector - 0.5).abs() < 1e-15);
        assert!((t.p_action.unwrap() - 0.5).abs() < 1e-15);

        // orthogonal a, b: the vector form is still defined
        let t = transformed_probability(&plus, &minus, &z2(), &pi).unwrap();
        assert!((t.p_vector - 1.0).abs() < 1e-15);
        assert!(matches!(t.p_action, Err(Error::OrthogonalConditioning { .. })));
    }

    #[test]
    fn reference_states() {
        let r = reference_state(&z2());
        assert!(r.fidelity(&BasisSet::qubit_x().state(0)) > 1.0 - 1e-15);
        let f = BasisSet::fourier(2).unwrap();
        let r = reference_state(&f);
        for k in 0..2 {
            assert!((f.column(k).dotc(r.amplitudes()) - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        }
        let r = reference_state(&BasisSet::standard(4).unwrap());
        assert!(r.amplitudes().iter().all(|z| (z - c(0.5, 0.0)).norm() < 1e-15));
    }

    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn action_phase_examples() {
        let p = action_phase_representation(&PureState::basis_ket(2, 0), &z2()).unwrap();
        assert_eq!(p.values(), [c(1.0, 0.0), c(0.0, 0.0)]);
        let plus_i = BasisSet::qubit_y().state(0);
        let p = action_phase_representation(&plus_i, &z2()).unwrap();
        assert!((p.values()[0] - c(0.5, -0.5)).norm() < 1e-15);
        assert!((p.values()[1] - c(0.5, 0.5)).norm() < 1e-15);
        let back = reconstruct_state(&p, &z2()).unwrap();
        assert!((back.fidelity(&plus_i) - 1.0).abs() < 1e-12);
        assert!((back.amplitudes() - plus_i.amplitudes()).norm() < 1e-15);
        let r = action_phase_representation(&BasisSet::qubit_x().state(1), &z2());
        assert!(matches!(r, Err(Error::OrthogonalReference { .. })));
    }

    #[test]
    fn reconstruct_edge_cases() {
        let p = action_phase_representation(&PureState::basis_ket(2, 0), &z2()).unwrap();
        assert_eq!(reconstruct_state(&p, &z2()).unwrap(), PureState::basis_ket(2, 0));
        let zero = ComplexConditional::from_parts(
            PureState::basis_ket(2, 0),
            reference_state(&z2()),
            z2(),
            vec![c(0.0, 0.0); 2],
        );
        assert!(matches!(reconstruct_state(&zero, &z2()), Err(Error::DegenerateInput(_))));
    }
}
