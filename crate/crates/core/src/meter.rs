//! A discretized von Neumann meter coupled to the system.
//!
//! The meter is one degree of freedom sampled on `n` points of `[-L, L)`. The
//! interaction `exp(-i kappa A (x) p)` translates the meter wavefunction by
//! `kappa A_a` in the branch of eigenvalue `A_a`. Translations are applied as
//! phase ramps in the meter's discrete Fourier space, so shifts need not be
//! multiples of the grid spacing.
//!
//! Tracing out the meter multiplies each eigenbasis coherence `(a, a')` by the
//! meter's momentum characteristic function at `kappa (A_a - A_a')`, which is
//! the phase-averaging channel with `phi = kappa p`.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::ergodic::PhaseDistribution;
use crate::error::{Error, Result};
use crate::hilbert::{DensityOperator, Observable, PureState};
use crate::{tol, CMatrix, CVector, C64};

/// Default number of meter grid points.
pub const DEFAULT_GRID: usize = 512;

/// Ratio `kappa * min_gap / sigma_x` from which read-out counts as projective.
pub const STRONG_COUPLING_RATIO: f64 = 10.0;

/// `"auto"` or an explicit half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(untagged)]
pub enum GridExtent {
    Fixed(f64),
    #[default]
    #[serde(with = "auto_keyword")]
    Auto,
}

mod auto_keyword {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("auto")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let s = String::deserialize(d)?;
        if s == "auto" {
            Ok(())
        } else {
            Err(D::Error::custom(format!("expected a number or \"auto\", got \"{s}\"")))
        }
    }
}

/// Meter parameters as they appear in scenario configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeterSpec {
    /// Grid size. When absent, at least [`DEFAULT_GRID`] and fine enough for
    /// four points per `sigma_x`.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(rename = "L", default)]
    pub half_width: GridExtent,
    pub sigma_x: f64,
    pub kappa: f64,
}

impl MeterSpec {
    pub fn new(sigma_x: f64, kappa: f64) -> Self {
        MeterSpec {
            n: None,
            half_width: GridExtent::Auto,
            sigma_x,
            kappa,
        }
    }

    /// Gaussian meter sized for `observable`: `L = 4 (sigma_x + kappa max|A_a|)`
    /// unless fixed.
    pub fn build(&self, observable: &Observable) -> Result<MeterModel> {
        if !(self.sigma_x.is_finite() && self.sigma_x > 0.0) {
            return Err(Error::config("meter.sigma_x", "must be positive"));
        }
        if !self.kappa.is_finite() {
            return Err(Error::config("meter.kappa", "must be finite"));
        }
        let half_width = match self.half_width {
            GridExtent::Fixed(l) => l,
            GridExtent::Auto => required_half_width(self.sigma_x, self.kappa, observable),
        };
        let n = match self.n {
            Some(n) => n,
            None => {
                let needed = (8.0 * half_width / self.sigma_x).ceil() as usize;
                needed.next_power_of_two().max(DEFAULT_GRID)
            }
        };
        MeterModel::gaussian(n, half_width, self.sigma_x, self.kappa)
    }
}

fn required_half_width(sigma_x: f64, kappa: f64, observable: &Observable) -> f64 {
    4.0 * (sigma_x + kappa.abs() * observable.max_abs_eigenvalue())
}

/// Meter grid, initial wavefunction and coupling `kappa = g t`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeterModel {
    grid: Vec<f64>,
    half_width: f64,
    wavefunction: CVector,
    kappa: f64,
    sigma_x: f64,
}

impl MeterModel {
    /// Minimal-uncertainty Gaussian `exp(-x^2 / (4 sigma_x^2))`, normalized on
    /// the grid.
    pub fn gaussian(n: usize, half_width: f64, sigma_x: f64, kappa: f64) -> Result<Self> {
        if !(sigma_x.is_finite() && sigma_x > 0.0) {
            return Err(Error::config("meter.sigma_x", "must be positive"));
        }
        let grid = make_grid(n, half_width)?;
        let amps = CVector::from_iterator(
            n,
            grid.iter().map(|&x| C64::new((-x * x / (4.0 * sigma_x * sigma_x)).exp(), 0.0)),
        );
        Self::with_wavefunction(n, half_width, amps, kappa)
    }

    /// Arbitrary meter wavefunction (normalized here). `sigma_x` is its
    /// position spread.
    pub fn with_wavefunction(n: usize, half_width: f64, wavefunction: CVector, kappa: f64) -> Result<Self> {
        let grid = make_grid(n, half_width)?;
        if wavefunction.len() != n {
            return Err(Error::Shape(format!("wavefunction has {} points, grid {n}", wavefunction.len())));
        }
        if !kappa.is_finite() {
            return Err(Error::config("meter.kappa", "must be finite"));
        }
        let norm = wavefunction.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::DegenerateInput("zero meter wavefunction".into()));
        }
        let wavefunction = wavefunction / C64::new(norm, 0.0);
        let weights: Vec<f64> = wavefunction.iter().map(|z| z.norm_sqr()).collect();
        let mean: f64 = grid.iter().zip(&weights).map(|(x, w)| x * w).sum();
        let var: f64 = grid.iter().zip(&weights).map(|(x, w)| (x - mean).powi(2) * w).sum();
        Ok(MeterModel {
            grid,
            half_width,
            wavefunction,
            kappa,
            sigma_x: var.sqrt(),
        })
    }

    pub fn n(&self) -> usize {
        self.grid.len()
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n() as f64
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn sigma_x(&self) -> f64 {
        self.sigma_x
    }

    pub fn wavefunction(&self) -> &CVector {
        &self.wavefunction
    }

    /// Angular wavenumbers of the DFT bins in FFT order.
    pub fn momentum_grid(&self) -> Vec<f64> {
        let n = self.n();
        let dp = 2.0 * PI / (n as f64 * self.spacing());
        (0..n)
            .map(|k| {
                let signed = if k < n / 2 { k as i64 } else { k as i64 - n as i64 };
                signed as f64 * dp
            })
            .collect()
    }

    /// Momentum-space weights `|psi~(p_k)|^2`, summing to one.
    pub fn momentum_weights(&self) -> Vec<f64> {
        let spec = fft(&self.wavefunction, false);
        let n = self.n() as f64;
        spec.iter().map(|z| z.norm_sqr() / n).collect()
    }

    /// `1 / (2 sigma_x)` for the default Gaussian.
    pub fn momentum_sigma(&self) -> f64 {
        let p = self.momentum_grid();
        let w = self.momentum_weights();
        let mean: f64 = p.iter().zip(&w).map(|(p, w)| p * w).sum();
        p.iter().zip(&w).map(|(p, w)| (p - mean).powi(2) * w).sum::<f64>().sqrt()
    }

    /// Phase distribution of `phi = kappa p` for a Gaussian meter.
    pub fn phase_distribution(&self) -> PhaseDistribution {
        PhaseDistribution::gaussian(self.kappa.abs() / (2.0 * self.sigma_x))
    }

    /// `sum_k |psi~(p_k)|^2 exp(-i kappa gap p_k)` on the discrete grid.
    pub fn momentum_characteristic(&self, gap: f64) -> C64 {
        self.momentum_grid()
            .iter()
            .zip(self.momentum_weights())
            .map(|(&p, w)| C64::from_polar(w, -self.kappa * gap * p))
            .sum()
    }

    /// Errors unless `L >= 4 (sigma_x + kappa max|A_a|)`.
    pub fn check_coverage(&self, observable: &Observable) -> Result<()> {
        let required = required_half_width(self.sigma_x, self.kappa, observable);
        // sigma_x of a sampled Gaussian differs from its parameter in the last bits
        if self.half_width < required * (1.0 - 1e-9) {
            return Err(Error::Aliasing {
                half_width: self.half_width,
                required,
            });
        }
        Ok(())
    }

    /// Whether `kappa * min_gap >= 10 sigma_x` for `observable`.
    pub fn is_strong(&self, observable: &Observable) -> bool {
        self.kappa.abs() * observable.min_gap() >= STRONG_COUPLING_RATIO * self.sigma_x * (1.0 - 1e-9)
    }

    /// Meter wavefunction translated by `shift` in `x`.
    pub fn shifted(&self, shift: f64) -> CVector {
        shift_spectrum(&fft(&self.wavefunction, false), &self.momentum_grid(), shift)
    }
}

fn make_grid(n: usize, half_width: f64) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::config("meter.n", "grid needs at least 2 points"));
    }
    if !(half_width.is_finite() && half_width > 0.0) {
        return Err(Error::config("meter.L", "half-width must be positive"));
    }
    let dx = 2.0 * half_width / n as f64;
    Ok((0..n).map(|j| -half_width + j as f64 * dx).collect())
}

fn fft(v: &CVector, inverse: bool) -> Vec<C64> {
    let mut buf: Vec<Complex<f64>> = v.iter().copied().collect();
    let mut planner = FftPlanner::new();
    let plan = if inverse {
        planner.plan_fft_inverse(buf.len())
    } else {
        planner.plan_fft_forward(buf.len())
    };
    plan.process(&mut buf);
    buf
}

fn shift_spectrum(spectrum: &[C64], momenta: &[f64], shift: f64) -> CVector {
    let n = spectrum.len();
    let ramped = CVector::from_iterator(
        n,
        spectrum.iter().zip(momenta).map(|(z, &p)| z * C64::from_polar(1.0, -shift * p)),
    );
    let back = fft(&ramped, true);
    CVector::from_iterator(n, back.into_iter().map(|z| z / n as f64))
}

/// System (x) meter amplitudes; row `i` is the computational basis state
/// `|i>` of the system, column `j` the meter grid point `x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    amplitudes: CMatrix,
    grid: Vec<f64>,
}

impl JointState {
    /// Product state `|psi> (x) |meter>`.
    pub fn product(system: &PureState, meter: &MeterModel) -> Self {
        JointState {
            amplitudes: system.amplitudes() * meter.wavefunction().transpose(),
            grid: meter.grid.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.nrows()
    }

    pub fn meter_size(&self) -> usize {
        self.amplitudes.ncols()
    }

    pub fn amplitudes(&self) -> &CMatrix {
        &self.amplitudes
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    /// Meter position distribution `sum_i |psi(i, x_j)|^2`.
    pub fn meter_weights(&self) -> Vec<f64> {
        self.amplitudes.column_iter().map(|c| c.norm_squared()).collect()
    }
}

/// Applies `exp(-i kappa A (x) p)`: the branch of eigenvalue `A_a` is
/// translated by `kappa A_a`.
pub fn interact(system: &PureState, meter: &MeterModel, observable: &Observable) -> Result<JointState> {
    if system.dim() != observable.dim() {
        return Err(Error::Shape(format!(
            "system has dimension {}, observable {}",
            system.dim(),
            observable.dim()
        )));
    }
    meter.check_coverage(observable)?;
    let eig = observable.eigenbasis();
    let spectrum = fft(&meter.wavefunction, false);
    let momenta = meter.momentum_grid();
    let d = system.dim();
    let mut amplitudes = CMatrix::zeros(d, meter.n());
    for (k, &value) in observable.eigenvalues().iter().enumerate() {
        let ket = eig.column(k);
        let weight = ket.dotc(system.amplitudes());
        if weight == C64::new(0.0, 0.0) {
            continue;
        }
        let branch = shift_spectrum(&spectrum, &momenta, meter.kappa * value);
        amplitudes += (ket * weight) * branch.transpose();
    }
    let norm = amplitudes.norm();
    amplitudes /= C64::new(norm, 0.0);
    Ok(JointState {
        amplitudes,
        grid: meter.grid.clone(),
    })
}

/// Partial trace over the meter.
pub fn reduce_system(joint: &JointState) -> Result<DensityOperator> {
    DensityOperator::new(&joint.amplitudes * joint.amplitudes.adjoint())
}

/// One read-out bin `[lower, upper)` of the meter position.
#[derive(Debug, Clone, PartialEq)]
pub struct BinOutcome {
    pub bin: usize,
    pub lower: f64,
    pub upper: f64,
    pub probability: f64,
    /// Conditional system state; `None` when the bin carries no weight.
    pub state: Option<DensityOperator>,
}

impl BinOutcome {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "bin": self.bin,
            "lower": self.lower,
            "upper": self.upper,
            "probability": self.probability,
            "state": self.state.as_ref().map(|s| s.to_json()),
        })
    }
}

/// Bins the meter position at `bin_edges` (strictly increasing, spanning the
/// grid; the last bin includes its upper edge).
pub fn readout(joint: &JointState, bin_edges: &[f64]) -> Result<Vec<BinOutcome>> {
    if bin_edges.len() < 2 {
        return Err(Error::InvalidBinning("need at least two edges".into()));
    }
    if let Some(w) = bin_edges.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidBinning(format!("edges {} and {} are not increasing", w[0], w[1])));
    }
    let (first, last) = (bin_edges[0], bin_edges[bin_edges.len() - 1]);
    let (gmin, gmax) = (joint.grid[0], joint.grid[joint.grid.len() - 1]);
    if first > gmin || last < gmax {
        return Err(Error::InvalidBinning(format!(
            "edges [{first}, {last}] do not span the grid [{gmin}, {gmax}]"
        )));
    }
    let nbins = bin_edges.len() - 1;
    let mut out = Vec::with_capacity(nbins);
    let mut start = 0;
    for bin in 0..nbins {
        let upper = bin_edges[bin + 1];
        let mut end = start;
        while end < joint.grid.len() && (joint.grid[end] < upper || bin == nbins - 1) {
            end += 1;
        }
        let cols = joint.amplitudes.columns(start, end - start);
        let unnormalized = cols * cols.adjoint();
        let probability = unnormalized.trace().re;
        let state = if probability > tol::LIN {
            Some(DensityOperator::new(unnormalized / C64::new(probability, 0.0))?)
        } else {
            None
        };
        out.push(BinOutcome {
            bin,
            lower: bin_edges[bin],
            upper,
            probability,
            state,
        });
        start = end;
    }
    Ok(out)
}

/// Read-out bins for projective measurement of `observable`: edges at the
/// midpoints between adjacent branch centers `kappa A_a`, bounded by `+-L`.
/// Returns the edges and, per bin, the outcome label it selects.
pub fn default_bins(meter: &MeterModel, observable: &Observable) -> Result<(Vec<f64>, Vec<String>)> {
    let mut centers: Vec<(f64, &str)> = observable
        .eigenvalues()
        .iter()
        .zip(observable.labels())
        .map(|(&a, l)| (meter.kappa * a, l.as_str()))
        .collect();
    centers.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut edges = vec![-meter.half_width];
    for w in centers.windows(2) {
        edges.push(0.5 * (w[0].0 + w[1].0));
    }
    edges.push(meter.half_width);
    if edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidBinning(
            "branch centers coincide; increase the coupling".into(),
        ));
    }
    Ok((edges, centers.into_iter().map(|(_, l)| l.to_string()).collect()))
}

/// Outcome of [`prepare_by_measurement`].
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredPreparation {
    pub probability: f64,
    /// Dominant eigenvector of the conditional state.
    pub state: PureState,
    pub conditional: DensityOperator,
    pub purity: f64,
    /// `<a|rho_cond|a>` for the selected eigenstate.
    pub eigenstate_fidelity: f64,
    /// Set when `kappa * min_gap < 10 sigma_x`; results are then only
    /// approximately projective.
    pub weak_regime: bool,
}

/// Couples `input` to the meter, reads out with [`default_bins`] and keeps
/// the bin of `outcome_label`.
pub fn prepare_by_measurement(
    input: &PureState,
    observable: &Observable,
    meter: &MeterModel,
    outcome_label: &str,
) -> Result<MeasuredPreparation> {
    let target = observable.eigenstate(outcome_label)?;
    let joint = interact(input, meter, observable)?;
    let (edges, labels) = default_bins(meter, observable)?;
    let bin = labels
        .iter()
        .position(|l| l == outcome_label)
        .expect("every label has a bin");
    let outcome = readout(&joint, &edges)?.swap_remove(bin);
    let conditional = match outcome.state {
        Some(s) if outcome.probability >= tol::LIN => s,
        _ => {
            return Err(Error::ZeroProbability {
                branch: outcome_label.to_string(),
                probability: outcome.probability,
            })
        }
    };
    Ok(MeasuredPreparation {
        probability: outcome.probability,
        state: conditional.dominant_state(),
        purity: conditional.purity(),
        eigenstate_fidelity: conditional.fidelity_pure(&target),
        weak_regime: !meter.is_strong(observable),
        conditional,
    })
}
