//! Run reports and their JSON, CSV and text renderings.
//!
//! Output is deterministic for a given report: JSON keys are sorted, floats
//! carry 17 significant digits and complex values are `[re, im]`. The
//! wall-clock duration only appears in the text rendering so that repeated
//! runs of one config produce byte-identical JSON and CSV.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::time::Duration;

use serde_json::Value as Json;

use crate::error::{Error, Result};
use crate::scenario::{ScenarioConfig, ScenarioKind};
use crate::serial::{fmt_f64, pair};
use crate::C64;

pub const SCHEMA_VERSION: u32 = 1;

/// A reported number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Real(f64),
    Complex(C64),
}

impl Value {
    fn to_json(self) -> Json {
        match self {
            Value::Real(x) => serde_json::json!(x),
            Value::Complex(z) => serde_json::json!(pair(z)),
        }
    }

    fn to_field(self) -> String {
        match self {
            Value::Real(x) => fmt_f64(x),
            Value::Complex(z) => format!("[{},{}]", fmt_f64(z.re), fmt_f64(z.im)),
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Real(x)
    }
}

impl From<C64> for Value {
    fn from(z: C64) -> Self {
        Value::Complex(z)
    }
}

/// One named comparison with its own tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: Vec<Value>,
    pub reference: Vec<Value>,
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `deviation <= tolerance` (NaN fails).
    pub fn new(
        name: impl Into<String>,
        value: Vec<Value>,
        reference: Vec<Value>,
        deviation: f64,
        tolerance: f64,
    ) -> Self {
        Check {
            name: name.into(),
            value,
            reference,
            deviation,
            tolerance,
            pass: deviation <= tolerance,
        }
    }

    /// `|value - reference| <= tolerance`.
    pub fn scalar(name: impl Into<String>, value: f64, reference: f64, tolerance: f64) -> Self {
        Self::new(name, vec![value.into()], vec![reference.into()], (value - reference).abs(), tolerance)
    }

    /// Entrywise maximum of `|value - reference|`.
    pub fn vector(name: impl Into<String>, value: &[f64], reference: &[f64], tolerance: f64) -> Self {
        let dev = if value.len() == reference.len() {
            value.iter().zip(reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        Self::new(
            name,
            value.iter().map(|&x| x.into()).collect(),
            reference.iter().map(|&x| x.into()).collect(),
            dev,
            tolerance,
        )
    }

    /// A deviation already reduced to one number, compared with zero.
    pub fn deviation(name: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        Self::new(name, vec![deviation.into()], vec![0.0.into()], deviation, tolerance)
    }

    /// `value >= threshold`; the deviation is the shortfall.
    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        let shortfall = if value.is_nan() { f64::INFINITY } else { (threshold - value).max(0.0) };
        Self::new(name, vec![value.into()], vec![threshold.into()], shortfall, 0.0)
    }

    fn to_json(&self) -> Json {
        serde_json::json!({
            "name": self.name,
            "value": self.value.iter().map(|v| v.to_json()).collect::<Vec<_>>(),
            "reference": self.reference.iter().map(|v| v.to_json()).collect::<Vec<_>>(),
            "deviation": if self.deviation.is_finite() { serde_json::json!(self.deviation) } else { Json::Null },
            "tolerance": self.tolerance,
            "pass": self.pass,
        })
    }
}

/// Checks of one scenario run, sorted by name.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub config: ScenarioConfig,
    pub checks: Vec<Check>,
    pub duration: Duration,
}

impl RunReport {
    pub fn new(config: ScenarioConfig, mut checks: Vec<Check>, duration: Duration) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        RunReport {
            config,
            checks,
            duration,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> Json {
        serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "scenario": serde_json::to_value(&self.config).expect("config serializes"),
            "checks": self.checks.iter().map(Check::to_json).collect::<Vec<_>>(),
            "all_pass": self.all_pass(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
    Text,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "text" => Ok(ReportFormat::Text),
            other => Err(Error::config("format", format!("unknown format `{other}`"))),
        }
    }
}

/// Renders a JSON value with sorted keys and 17-digit floats.
fn render_json(v: &Json, out: &mut String) {
    match v {
        Json::Null => out.push_str("null"),
        Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Json::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                out.push_str(&fmt_f64(n.as_f64().expect("finite")));
            }
        }
        Json::String(s) => out.push_str(&serde_json::to_string(s).expect("string")),
        Json::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                render_json(item, out);
            }
            out.push(']');
        }
        Json::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("string"));
                out.push(':');
                render_json(&map[k], out);
            }
            out.push('}');
        }
    }
}

fn to_csv(report: &RunReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "value", "reference", "deviation", "pass"])?;
    let join = |vs: &[Value]| vs.iter().map(|v| v.to_field()).collect::<Vec<_>>().join(";");
    for c in &report.checks {
        w.write_record([
            c.name.as_str(),
            &join(&c.value),
            &join(&c.reference),
            &fmt_f64(c.deviation),
            if c.pass { "true" } else { "false" },
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn to_text(report: &RunReport) -> String {
    let mut out = String::new();
    let c = &report.config;
    let _ = match c.scenario {
        ScenarioKind::IdentitySuite => writeln!(
            out,
            "scenario {} (dims 2..={}, {} cases each, seed {})",
            c.scenario.name(),
            c.dim_max,
            c.seeds,
            c.seed
        ),
        _ => writeln!(out, "scenario {} (dim {}, seed {})", c.scenario.name(), c.dim, c.seed),
    };
    let width = report.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &report.checks {
        let _ = writeln!(
            out,
            "{} {:width$}  deviation {:.3e}  tolerance {:.3e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.deviation,
            c.tolerance,
        );
    }
    let passed = report.checks.iter().filter(|c| c.pass).count();
    let _ = writeln!(
        out,
        "{passed}/{} checks passed in {:.3} s",
        report.checks.len(),
        report.duration.as_secs_f64()
    );
    out
}

/// Serializes `report` in `format`.
pub fn emit_report(report: &RunReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => {
            let mut s = String::new();
            render_json(&report.to_json(), &mut s);
            s.push('\n');
            Ok(s)
        }
        ReportFormat::Csv => to_csv(report),
        ReportFormat::Text => Ok(to_text(report)),
    }
}

/// Writes [`emit_report`] output to `path`.
pub fn write_report(report: &RunReport, format: ReportFormat, path: &Path) -> Result<()> {
    std::fs::write(path, emit_report(report, format)?)?;
    Ok(())
}
