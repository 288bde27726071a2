//! Scenario configs and the scenario runner behind the CLI.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ergodic::{phase_average_channel_with, prepare_state, AveragingMode};
use crate::exec::Exec;
use crate::hilbert::{max_abs_diff, BasisSet, DensityOperator, Observable, PureState};
use crate::meter::{default_bins, interact, prepare_by_measurement, readout, reduce_system, MeterSpec};
use crate::report::{Check, RunReport, Value};
use crate::suite::{run_identity_suite, SuiteOptions};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    SingleSlit,
    BeamSplitter,
    SternGerlach,
    IdentitySuite,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] = [
        ScenarioKind::SingleSlit,
        ScenarioKind::BeamSplitter,
        ScenarioKind::SternGerlach,
        ScenarioKind::IdentitySuite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::SingleSlit => "single-slit",
            ScenarioKind::BeamSplitter => "beam-splitter",
            ScenarioKind::SternGerlach => "stern-gerlach",
            ScenarioKind::IdentitySuite => "identity-suite",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// Global scale on default tolerances plus per-check overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<String, f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            scale: 1.0,
            overrides: BTreeMap::new(),
        }
    }
}

impl Tolerances {
    /// Tolerance for check `name` whose default is `default`.
    pub fn get(&self, name: &str, default: f64) -> f64 {
        self.overrides.get(name).copied().unwrap_or(default * self.scale)
    }
}

fn one() -> f64 {
    1.0
}
fn default_dim() -> usize {
    2
}
fn default_seed() -> u64 {
    42
}
fn default_dim_max() -> usize {
    8
}
fn default_seeds() -> usize {
    5
}
fn default_mc_samples() -> usize {
    20_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Slit index for `single-slit`; defaults to `dim / 2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slit: Option<usize>,
    /// Meter for the measurement scenarios; each has its own default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meter: Option<MeterSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Largest dimension swept by `identity-suite`.
    #[serde(default = "default_dim_max")]
    pub dim_max: usize,
    /// Random cases per dimension in `identity-suite`.
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    /// Phase samples for Monte Carlo checks.
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    /// Where the CLI writes the report; not part of the echoed config.
    #[serde(default, skip_serializing)]
    pub output: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn new(scenario: ScenarioKind) -> Self {
        ScenarioConfig {
            scenario,
            dim: default_dim(),
            seed: default_seed(),
            slit: None,
            meter: None,
            tolerances: Tolerances::default(),
            dim_max: default_dim_max(),
            seeds: default_seeds(),
            mc_samples: default_mc_samples(),
            output: None,
        }
    }

    /// Parses and validates a JSON config. Errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(if path == "." { String::new() } else { path }, e.into_inner().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::config("dim", "must be at least 1"));
        }
        match self.scenario {
            ScenarioKind::SingleSlit => {
                if self.dim < 2 {
                    return Err(Error::config("dim", "single-slit needs at least 2 positions"));
                }
                if let Some(q) = self.slit {
                    if q >= self.dim {
                        return Err(Error::config("slit", format!("index {q} is not below dim {}", self.dim)));
                    }
                }
            }
            ScenarioKind::BeamSplitter | ScenarioKind::SternGerlach => {
                if self.dim != 2 {
                    return Err(Error::config("dim", format!("{} is a qubit scenario; dim must be 2", self.scenario.name())));
                }
            }
            ScenarioKind::IdentitySuite => {
                if self.dim_max < 2 {
                    return Err(Error::config("dim_max", "must be at least 2"));
                }
                if self.seeds == 0 {
                    return Err(Error::config("seeds", "must be at least 1"));
                }
            }
        }
        if self.slit.is_some() && self.scenario != ScenarioKind::SingleSlit {
            return Err(Error::config("slit", "only used by single-slit"));
        }
        if self.mc_samples == 0 {
            return Err(Error::config("mc_samples", "must be at least 1"));
        }
        if !(self.tolerances.scale.is_finite() && self.tolerances.scale > 0.0) {
            return Err(Error::config("tolerances.scale", "must be positive"));
        }
        for (name, t) in &self.tolerances.overrides {
            if !(t.is_finite() && *t >= 0.0) {
                return Err(Error::config(format!("tolerances.overrides.{name}"), "must be non-negative"));
            }
        }
        if let Some(m) = &self.meter {
            if !(m.sigma_x.is_finite() && m.sigma_x > 0.0) {
                return Err(Error::config("meter.sigma_x", "must be positive"));
            }
            if !(m.kappa.is_finite() && m.kappa > 0.0) {
                return Err(Error::config("meter.kappa", "must be positive"));
            }
            if m.n == Some(0) {
                return Err(Error::config("meter.n", "must be positive"));
            }
        }
        Ok(())
    }

    fn tol(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name, default)
    }
}

/// Runs `config` with the default execution policy.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunReport> {
    run_scenario_with(config, Exec::default())
}

/// Runs `config`; `exec` only affects the identity suite's case sweep.
pub fn run_scenario_with(config: &ScenarioConfig, exec: Exec) -> Result<RunReport> {
    config.validate()?;
    let start = Instant::now();
    let checks = match config.scenario {
        ScenarioKind::SingleSlit => single_slit(config)?,
        ScenarioKind::BeamSplitter => beam_splitter(config)?,
        ScenarioKind::SternGerlach => stern_gerlach(config)?,
        ScenarioKind::IdentitySuite => run_identity_suite(
            &SuiteOptions {
                dim_max: config.dim_max,
                seeds: config.seeds,
                seed: config.seed,
                mc_samples: config.mc_samples,
            },
            &config.tolerances,
            exec,
        ),
    };
    Ok(RunReport::new(config.clone(), checks, start.elapsed()))
}

fn qubit_observable(labels: [&str; 2]) -> Result<Observable> {
    Observable::new(BasisSet::standard(2)?.relabel(labels)?, vec![0.5, -0.5])
}

/// Position basis `|x_j>` with `x_j = j - (d-1)/2`, a plane wave through slit
/// `q`, and the momentum distribution of the selected state.
fn single_slit(config: &ScenarioConfig) -> Result<Vec<Check>> {
    let d = config.dim;
    let q = config.slit.unwrap_or(d / 2);
    let center = (d as f64 - 1.0) / 2.0;
    let positions: Vec<f64> = (0..d).map(|j| j as f64 - center).collect();
    let position = Observable::new(BasisSet::standard(d)?, positions)?;
    let momentum = BasisSet::fourier(d)?;
    let meter = config.meter.unwrap_or(MeterSpec::new(0.5, 10.0)).build(&position)?;
    let plane_wave = momentum.state(0);

    let prep = prepare_by_measurement(&plane_wave, &position, &meter, &q.to_string())?;
    let dist = prep.state.born(&momentum);
    let uniform = vec![1.0 / d as f64; d];
    Ok(vec![
        Check::vector("single_slit.momentum_distribution", &dist, &uniform, config.tol("single_slit.momentum_distribution", 1e-10)),
        Check::scalar(
            "single_slit.passage_probability",
            prep.probability,
            1.0 / d as f64,
            config.tol("single_slit.passage_probability", 1e-3),
        ),
        Check::at_least("single_slit.position_fidelity", prep.eigenstate_fidelity, 0.999),
    ])
}

/// H/V polarization selection from circular input, read out by a meter.
fn beam_splitter(config: &ScenarioConfig) -> Result<Vec<Check>> {
    let polarization = qubit_observable(["H", "V"])?;
    let diagonal = BasisSet::fourier(2)?.relabel(["D", "A"])?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let circular = PureState::from_slice(&[C64::new(s, 0.0), C64::new(0.0, s)])?;
    let meter = config.meter.unwrap_or(MeterSpec::new(0.5, 5.0)).build(&polarization)?;

    let measured = prepare_by_measurement(&circular, &polarization, &meter, "H")?;
    let exact = prepare_state(&DensityOperator::pure(&circular), &polarization, "H")?;
    let dist = measured.conditional.born(&diagonal);
    Ok(vec![
        Check::scalar(
            "beam_splitter.branch_probability",
            measured.probability,
            0.5,
            config.tol("beam_splitter.branch_probability", 1e-3),
        ),
        Check::vector(
            "beam_splitter.diagonal_distribution",
            &dist,
            &[0.5, 0.5],
            config.tol("beam_splitter.diagonal_distribution", 1e-3),
        ),
        Check::scalar(
            "beam_splitter.ergodic_agreement",
            measured.probability,
            exact.probability,
            config.tol("beam_splitter.ergodic_agreement", 1e-3),
        ),
    ])
}

/// Spin-1/2 coupled to a Gaussian meter: coherence damping, branch
/// fidelities and the Monte Carlo phase channel.
fn stern_gerlach(config: &ScenarioConfig) -> Result<Vec<Check>> {
    let spin = qubit_observable(["up", "down"])?;
    let plus = BasisSet::qubit_x().state(0);
    let meter = config.meter.unwrap_or(MeterSpec::new(0.5, 5.0)).build(&spin)?;
    let dist = meter.phase_distribution();

    let joint = interact(&plus, &meter, &spin)?;
    let reduced = reduce_system(&joint)?;
    let coherence = reduced.matrix()[(0, 1)];
    let predicted = 0.5 * dist.characteristic(spin.eigenvalues()[0] - spin.eigenvalues()[1]);
    let rho = DensityOperator::pure(&plus);
    let (exact, _) = phase_average_channel_with(&rho, &spin, &dist, AveragingMode::Exact, Exec::Sequential)?;
    let (sampled, _) = phase_average_channel_with(
        &rho,
        &spin,
        &dist,
        AveragingMode::MonteCarlo {
            samples: config.mc_samples,
            seed: config.seed,
        },
        Exec::Sequential,
    )?;

    let mut checks = vec![
        Check::new(
            "stern_gerlach.residual_coherence",
            vec![Value::Complex(coherence)],
            vec![Value::Complex(predicted)],
            (coherence - predicted).norm(),
            config.tol("stern_gerlach.residual_coherence", 1e-8),
        ),
        Check::deviation(
            "stern_gerlach.channel_equivalence",
            max_abs_diff(reduced.matrix(), exact.matrix()),
            config.tol("stern_gerlach.channel_equivalence", 1e-8),
        ),
        Check::deviation(
            "stern_gerlach.montecarlo_trace_distance",
            sampled.trace_distance(&exact),
            config.tol("stern_gerlach.montecarlo_trace_distance", 5.0 / (config.mc_samples as f64).sqrt()),
        ),
    ];
    let (edges, labels) = default_bins(&meter, &spin)?;
    for (outcome, label) in readout(&joint, &edges)?.into_iter().zip(labels) {
        let name = format!("stern_gerlach.branch_probability_{label}");
        let tol = config.tol(&name, 1e-3);
        checks.push(Check::scalar(name, outcome.probability, 0.5, tol));
        let fidelity = match &outcome.state {
            Some(s) => s.fidelity_pure(&spin.eigenstate(&label)?),
            None => 0.0,
        };
        checks.push(Check::at_least(format!("stern_gerlach.fidelity_{label}"), fidelity, 0.999));
    }
    Ok(checks)
}
