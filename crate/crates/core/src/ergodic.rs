//! Ergodic randomization of the dynamics generated by an observable.
//!
//! The system evolves under `exp(-i phi A)` with a random phase `phi`. Averaged
//! over `phi`, every eigenbasis coherence `(a, a')` is multiplied by the
//! characteristic function of the phase distribution at the gap
//! `A_a - A_a'`. When that function vanishes at every nonzero gap the average
//! is complete dephasing, and selecting an outcome `a` afterwards prepares
//! `|a>` with the Born weight `<a|rho|a>`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{pairwise_sum, Exec};
use crate::hilbert::{BasisSet, DensityOperator, Observable, PureState};
use crate::quasiprob::{kernel_spectral_sum, ComplexJointDistribution};
use crate::{rng, serial, CMatrix, C64};

/// Distribution of the randomized phase `phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhaseDistribution {
    /// Uniform on `[0, period)`; the full turn is `period = 2 pi`.
    Uniform { period: f64 },
    /// Zero-mean normal with standard deviation `sigma`.
    Gaussian { sigma: f64 },
    /// Fixed phase.
    Point { phi: f64 },
}

impl PhaseDistribution {
    /// Uniform over a full turn `[0, 2 pi)`.
    pub fn uniform() -> Self {
        PhaseDistribution::Uniform { period: 2.0 * PI }
    }

    pub fn gaussian(sigma: f64) -> Self {
        PhaseDistribution::Gaussian { sigma }
    }

    pub fn point(phi: f64) -> Self {
        PhaseDistribution::Point { phi }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PhaseDistribution::Uniform { period } if !(period.is_finite() && period > 0.0) => {
                Err(Error::InvalidDistribution(format!("uniform period {period} must be positive")))
            }
            PhaseDistribution::Gaussian { sigma } if !(sigma.is_finite() && sigma >= 0.0) => {
                Err(Error::InvalidDistribution(format!("gaussian sigma {sigma} must be non-negative")))
            }
            PhaseDistribution::Point { phi } if !phi.is_finite() => {
                Err(Error::InvalidDistribution(format!("point phase {phi} is not finite")))
            }
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            PhaseDistribution::Uniform { period } => rng.gen::<f64>() * period,
            PhaseDistribution::Gaussian { sigma } => {
                Normal::new(0.0, sigma).expect("validated sigma").sample(rng)
            }
            PhaseDistribution::Point { phi } => phi,
        }
    }

    /// `E[exp(-i phi gap)]`.
    pub fn characteristic(&self, gap: f64) -> C64 {
        characteristic_function(self, gap)
    }

    /// A distribution that dephases `observable` completely or as nearly as
    /// possible.
    ///
    /// If all eigenvalue gaps are integer multiples of a common `g` (checked
    /// for `g = min_gap / k`, `k <= 64`), a uniform phase over `2 pi / g`
    /// kills every nonzero gap exactly. Otherwise a Gaussian with
    /// `sigma = 8 / min_gap` leaves residual factors below `exp(-32)`; check
    /// [`DephasingReport::max_residual`] for the actual value.
    pub fn complete_dephasing(observable: &Observable) -> Self {
        let gaps = positive_gaps(observable.eigenvalues());
        let Some(&min) = gaps.iter().min_by(|a, b| a.total_cmp(b)) else {
            return PhaseDistribution::uniform();
        };
        for k in 1..=64 {
            let g = min / k as f64;
            let commensurate = gaps.iter().all(|&x| {
                let r = x / g;
                (r - r.round()).abs() <= 1e-9 * r.max(1.0)
            });
            if commensurate {
                return PhaseDistribution::Uniform { period: 2.0 * PI / g };
            }
        }
        PhaseDistribution::Gaussian { sigma: 8.0 / min }
    }
}

/// `E[exp(-i phi gap)]` in closed form.
pub fn characteristic_function(dist: &PhaseDistribution, gap: f64) -> C64 {
    match *dist {
        PhaseDistribution::Uniform { period } => {
            let x = period * gap;
            if x == 0.0 {
                C64::new(1.0, 0.0)
            } else if x.abs() < 1e-4 {
                // (e^{-ix} - 1)/(-ix) = 1 - ix/2 - x^2/6 + i x^3/24 + ...
                C64::new(1.0 - x * x / 6.0, -x / 2.0 + x * x * x / 24.0)
            } else {
                (C64::from_polar(1.0, -x) - 1.0) / C64::new(0.0, -x)
            }
        }
        PhaseDistribution::Gaussian { sigma } => C64::new((-0.5 * sigma * sigma * gap * gap).exp(), 0.0),
        PhaseDistribution::Point { phi } => C64::from_polar(1.0, -phi * gap),
    }
}

fn positive_gaps(values: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            out.push((a - b).abs());
        }
    }
    out
}

/// Distinct signed gaps `A_a - A_a'`, ascending, including zero.
fn signed_gaps(values: &[f64]) -> Vec<f64> {
    let mut gaps: Vec<f64> = values
        .iter()
        .flat_map(|a| values.iter().map(move |b| a - b))
        .collect();
    gaps.sort_by(f64::total_cmp);
    gaps.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    gaps
}

/// Damping factor applied to coherences at one eigenvalue gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapFactor {
    pub gap: f64,
    #[serde(with = "serial::complex")]
    pub factor: C64,
}

/// Off-diagonal damping factors of a phase-averaging channel.
#[derive(Debug, Clone, PartialEq)]
pub struct DephasingReport {
    pub labels: Vec<String>,
    pub factors: Vec<GapFactor>,
}

impl DephasingReport {
    /// Largest `|factor|` over nonzero gaps; 0 means complete dephasing.
    pub fn max_residual(&self) -> f64 {
        self.factors
            .iter()
            .filter(|f| f.gap != 0.0)
            .map(|f| f.factor.norm())
            .fold(0.0, f64::max)
    }

    pub fn factor_at(&self, gap: f64) -> Option<C64> {
        self.factors.iter().find(|f| (f.gap - gap).abs() <= 1e-12).map(|f| f.factor)
    }

    /// JSON list of `{gap, factor: [re, im]}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.factors).expect("plain data")
    }
}

/// How [`phase_average_channel`] averages over the phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AveragingMode {
    /// Closed-form characteristic function.
    Exact,
    /// Mean of `U rho U^†` over `samples` sampled phases.
    MonteCarlo { samples: usize, seed: u64 },
}

/// Samples per independent random substream in Monte Carlo mode.
const MC_CHUNK: usize = 1024;

fn check_dims(rho: &DensityOperator, observable: &Observable) -> Result<()> {
    if rho.dim() != observable.dim() {
        return Err(Error::Shape(format!(
            "state has dimension {}, observable {}",
            rho.dim(),
            observable.dim()
        )));
    }
    Ok(())
}

/// Averages `exp(-i phi A) rho exp(i phi A)` over `dist`.
pub fn phase_average_channel(
    rho: &DensityOperator,
    observable: &Observable,
    dist: &PhaseDistribution,
    mode: AveragingMode,
) -> Result<(DensityOperator, DephasingReport)> {
    phase_average_channel_with(rho, observable, dist, mode, Exec::default())
}

/// [`phase_average_channel`] with an explicit execution policy for the
/// Monte Carlo mode. Output is identical for both policies.
pub fn phase_average_channel_with(
    rho: &DensityOperator,
    observable: &Observable,
    dist: &PhaseDistribution,
    mode: AveragingMode,
    exec: Exec,
) -> Result<(DensityOperator, DephasingReport)> {
    check_dims(rho, observable)?;
    dist.validate()?;
    let basis = observable.eigenbasis();
    let vals = observable.eigenvalues();
    let d = observable.dim();
    let in_eig = rho.in_basis(basis);
    let gaps = signed_gaps(vals);

    let (averaged, factors) = match mode {
        AveragingMode::Exact => {
            let avg = CMatrix::from_fn(d, d, |i, j| in_eig[(i, j)] * dist.characteristic(vals[i] - vals[j]));
            let factors = gaps.iter().map(|&g| dist.characteristic(g)).collect::<Vec<_>>();
            (avg, factors)
        }
        AveragingMode::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::EmptyEnsemble);
            }
            let chunks = samples.div_ceil(MC_CHUNK);
            let partial: Vec<(CMatrix, CMatrix)> = exec.map_indexed(chunks, |k| {
                let mut rng = rng::substream(seed, "ergodic.phase_average", k as u64);
                let count = MC_CHUNK.min(samples - k * MC_CHUNK);
                let mut acc = CMatrix::zeros(d, d);
                // gap sums kept as a column so they reduce with the same code path
                let mut gap_acc = CMatrix::zeros(gaps.len(), 1);
                for _ in 0..count {
                    let phi = dist.sample(&mut rng);
                    let phases: Vec<C64> = vals.iter().map(|&a| C64::from_polar(1.0, -phi * a)).collect();
                    for i in 0..d {
                        for j in 0..d {
                            acc[(i, j)] += phases[i] * in_eig[(i, j)] * phases[j].conj();
                        }
                    }
                    for (g, &gap) in gaps.iter().enumerate() {
                        gap_acc[(g, 0)] += C64::from_polar(1.0, -phi * gap);
                    }
                }
                (acc, gap_acc)
            });
            let (mats, gap_sums): (Vec<CMatrix>, Vec<CMatrix>) = partial.into_iter().unzip();
            let scale = C64::new(1.0 / samples as f64, 0.0);
            let avg = pairwise_sum(&mats).expect("at least one chunk") * scale;
            let gsum = pairwise_sum(&gap_sums).expect("at least one chunk") * scale;
            (avg, gsum.iter().copied().collect())
        }
    };

    let u = basis.columns();
    let out = DensityOperator::new(u * averaged * u.adjoint())?;
    let report = DephasingReport {
        labels: observable.labels().to_vec(),
        factors: gaps.into_iter().zip(factors).map(|(gap, factor)| GapFactor { gap, factor }).collect(),
    };
    Ok((out, report))
}

/// Removes every coherence between distinct eigenstates of `observable`.
pub fn dephase(rho: &DensityOperator, observable: &Observable) -> Result<DensityOperator> {
    check_dims(rho, observable)?;
    let u = observable.eigenbasis().columns();
    let mut in_eig = rho.in_basis(observable.eigenbasis());
    for i in 0..rho.dim() {
        for j in 0..rho.dim() {
            if i != j {
                in_eig[(i, j)] = C64::new(0.0, 0.0);
            }
        }
    }
    DensityOperator::new(u * in_eig * u.adjoint())
}

/// `|<b|a>|^2`, the phase-averaged transformation kernel for every `b'`.
pub fn ergodic_kernel(a: &PureState, b: &PureState) -> f64 {
    b.inner(a).norm_sqr()
}

/// The transformation kernel `P(U(b)|a,b')` averaged over `dist` in closed
/// form, for an eigenstate `a` of `observable`.
pub fn averaged_kernel(
    observable: &Observable,
    a_label: &str,
    b_label: &str,
    bprime_label: &str,
    basis_b: &BasisSet,
    dist: &PhaseDistribution,
) -> Result<C64> {
    dist.validate()?;
    kernel_spectral_sum(observable, a_label, b_label, bprime_label, basis_b, |g| dist.characteristic(g))
}

/// Phase average of the propagated table `rho(a, U(b))` for
/// `U = exp(-i phi A)`, with `A` the eigenbasis of `observable`:
///
/// `<b|a> sum_a' <a|rho|a'> chi(A_a - A_a') <a'|b>`.
///
/// Under complete dephasing this is `P(b|a) <a|rho|a>`.
pub fn ergodic_joint(
    rho: &DensityOperator,
    observable: &Observable,
    basis_b: &BasisSet,
    dist: &PhaseDistribution,
) -> Result<ComplexJointDistribution> {
    check_dims(rho, observable)?;
    if basis_b.dim() != rho.dim() {
        return Err(Error::Shape("basis B dimension differs from the state".into()));
    }
    dist.validate()?;
    let d = rho.dim();
    let vals = observable.eigenvalues();
    let a = observable.eigenbasis().columns();
    let b = basis_b.columns();
    let b_a = b.adjoint() * a;
    let a_rho_a = a.adjoint() * rho.matrix() * a;
    let table = CMatrix::from_fn(d, d, |i, j| {
        let s: C64 = (0..d)
            .map(|k| a_rho_a[(i, k)] * dist.characteristic(vals[i] - vals[k]) * b_a[(j, k)].conj())
            .sum();
        b_a[(j, i)] * s
    });
    let (state, _) = phase_average_channel(rho, observable, dist, AveragingMode::Exact)?;
    Ok(ComplexJointDistribution::from_parts(
        observable.eigenbasis().clone(),
        basis_b.clone(),
        table,
        state,
    ))
}

/// The prepared table `P(b|a) <a|rho|a>` (rows `a` in the eigenbasis of
/// `observable`, columns `b`).
pub fn preparation_table(rho: &DensityOperator, observable: &Observable, basis_b: &BasisSet) -> Result<CMatrix> {
    check_dims(rho, observable)?;
    let pa = rho.born(observable.eigenbasis());
    let b_a = basis_b.columns().adjoint() * observable.eigenbasis().columns();
    Ok(CMatrix::from_fn(rho.dim(), basis_b.dim(), |i, j| {
        C64::new(b_a[(j, i)].norm_sqr() * pa[i], 0.0)
    }))
}

/// Result of selecting one outcome after ergodic randomization.
#[derive(Debug, Clone, PartialEq)]
pub struct Preparation {
    pub probability: f64,
    pub state: DensityOperator,
}

/// Randomization followed by selection of `outcome_label`: returns
/// `<a|rho|a>` and `|a><a|`.
pub fn prepare_state(rho_in: &DensityOperator, observable: &Observable, outcome_label: &str) -> Result<Preparation> {
    check_dims(rho_in, observable)?;
    let a = observable.eigenstate(outcome_label)?;
    let probability = rho_in.fidelity_pure(&a);
    if probability < crate::tol::LIN {
        return Err(Error::ZeroProbability {
            branch: outcome_label.to_string(),
            probability,
        });
    }
    Ok(Preparation {
        probability,
        state: a.projector(),
    })
}
