//! Machine-readable run reports.

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct Residual {
    pub name: String,
    /// The identity whose defect this is.
    pub identity: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// A yes/no condition (integrality, nondegeneracy, dimension agreement).
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub name: String,
    pub identity: &'static str,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<String>,
    pub seed: u64,
    pub tol_scale: f64,
    pub pass: bool,
    pub residuals: Vec<Residual>,
    pub verdicts: Vec<Verdict>,
    /// Failures that stopped part of the run (obstructed source, etc.).
    pub errors: Vec<String>,
    pub details: serde_json::Map<String, Value>,
}

impl Report {
    pub fn new(command: &'static str, config: Option<String>, seed: u64, tol_scale: f64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            config,
            seed,
            tol_scale,
            pass: true,
            residuals: Vec::new(),
            verdicts: Vec::new(),
            errors: Vec::new(),
            details: serde_json::Map::new(),
        }
    }

    /// Records `value` against `base_tol · tol_scale`.
    pub fn residual(&mut self, name: impl Into<String>, identity: &'static str, value: f64, base_tol: f64) {
        let tolerance = base_tol * self.tol_scale;
        self.residuals.push(Residual {
            name: name.into(),
            identity,
            value,
            tolerance,
            pass: value <= tolerance,
        });
    }

    pub fn verdict(&mut self, name: impl Into<String>, identity: &'static str, pass: bool) {
        self.verdicts.push(Verdict {
            name: name.into(),
            identity,
            pass,
        });
    }

    pub fn error(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.details.insert(key.to_string(), v);
    }

    pub fn finish(mut self) -> Self {
        self.pass = self.errors.is_empty()
            && self.residuals.iter().all(|r| r.pass)
            && self.verdicts.iter().all(|v| v.pass);
        self
    }

    /// The most severe failure, for the exit message.
    pub fn worst_offender(&self) -> Option<String> {
        if let Some(e) = self.errors.first() {
            return Some(e.clone());
        }
        let worst = self
            .residuals
            .iter()
            .filter(|r| !r.pass)
            .max_by(|a, b| severity(a).total_cmp(&severity(b)));
        if let Some(r) = worst {
            return Some(format!(
                "{} [{}]: {:.3e} exceeds tolerance {:.1e}",
                r.name, r.identity, r.value, r.tolerance
            ));
        }
        self.verdicts
            .iter()
            .find(|v| !v.pass)
            .map(|v| format!("{} [{}] does not hold", v.name, v.identity))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable") + "\n"
    }
}

fn severity(r: &Residual) -> f64 {
    if r.tolerance > 0.0 && !r.value.is_nan() {
        r.value / r.tolerance
    } else {
        f64::INFINITY
    }
}
