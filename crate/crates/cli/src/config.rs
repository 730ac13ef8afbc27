//! Scenario files (TOML).
//!
//! ```toml
//! sides = [1.0, 1.0, 1.0, 1.0]
//! grid = 4
//! t_squared = "1"
//! alpha = -1
//! beta = [[1, -1, 0, 0, 0, 0], [0, 0, 1, -1, 0, 0], [0, 0, 0, 0, 1, -1]]
//!
//! [instantons]
//! kind = "balanced"
//!
//! [u]
//! mode = "constant"
//! value = 0.0
//!
//! [lattice]
//! kind = "k3"
//! rank = 2
//! ```

use std::path::Path;

use serde::Deserialize;

use g2flux_core::ansatz::{balanced_scenario, InstantonData, Scenario, UMode};
use g2flux_core::fibered::{Torus4, TorusBundle};
use g2flux_core::lattice::LatticeKind;
use g2flux_core::sampling::{field_from_modes, FourierMode};
use g2flux_core::Scalar;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "unit_sides")]
    pub sides: [f64; 4],
    #[serde(default = "default_grid")]
    pub grid: usize,
    pub t_squared: Scalar,
    pub alpha: Scalar,
    /// Periods of β₁, β₂, β₃ in the pair basis (01, 23, 02, 31, 03, 12).
    pub beta: [[i64; 6]; 3],
    #[serde(default)]
    pub instantons: InstantonSpec,
    #[serde(default)]
    pub u: USpec,
    pub lattice: Option<LatticeSpec>,
}

fn unit_sides() -> [f64; 4] {
    [1.0; 4]
}

fn default_grid() -> usize {
    8
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstantonSpec {
    /// Unit ASD pairs chosen to cancel the fibration term.
    #[default]
    Balanced,
    None,
    Explicit { periods: Vec<[i64; 6]>, weights: Vec<f64> },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum USpec {
    Constant { value: f64 },
    /// Solve Δe^u = source with mean(e^u) = h0.
    Solved { h0: f64 },
    Modes { modes: Vec<FourierMode> },
}

impl Default for USpec {
    fn default() -> Self {
        USpec::Constant { value: 0.0 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub kind: LatticeKindSpec,
    pub rank: Option<u32>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeKindSpec {
    K3,
    T4,
}

impl From<LatticeKindSpec> for LatticeKind {
    fn from(k: LatticeKindSpec) -> Self {
        match k {
            LatticeKindSpec::K3 => LatticeKind::K3,
            LatticeKindSpec::T4 => LatticeKind::T4,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Parse { path: String, source: Box<toml::de::Error> },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    /// Well-formed input whose instanton budget cannot be balanced.
    #[error("{0}")]
    Unbalanced(g2flux_core::Error),
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.display().to_string(),
            source: Box::new(source),
        })
    }

    pub fn t(&self) -> f64 {
        self.t_squared.to_f64().sqrt()
    }

    pub fn torus(&self) -> Result<Torus4, ConfigError> {
        Torus4::new(self.sides, self.grid).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Builds the scenario; errors here are configuration errors.
    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let invalid = |e: g2flux_core::Error| ConfigError::Invalid(e.to_string());
        if !(self.t_squared.to_f64() > 0.0) {
            return Err(ConfigError::Invalid("t_squared must be positive".into()));
        }
        let torus = self.torus()?;
        let t = self.t();
        let alpha = self.alpha.to_f64();
        let mut scenario = match &self.instantons {
            InstantonSpec::Balanced => balanced_scenario(&torus, self.beta, t, alpha).map_err(|e| match e {
                g2flux_core::Error::Balance { .. } => ConfigError::Unbalanced(e),
                e => invalid(e),
            })?,
            InstantonSpec::None => {
                let bundle = TorusBundle::from_periods(&torus, self.beta).map_err(invalid)?;
                Scenario::new(bundle, t, InstantonData::none(alpha).map_err(invalid)?, UMode::Constant(0.0))
                    .map_err(invalid)?
            }
            InstantonSpec::Explicit { periods, weights } => {
                let bundle = TorusBundle::from_periods(&torus, self.beta).map_err(invalid)?;
                let inst = InstantonData::from_periods(&torus, periods, weights, alpha).map_err(invalid)?;
                Scenario::new(bundle, t, inst, UMode::Constant(0.0)).map_err(invalid)?
            }
        };
        scenario.u_mode = match &self.u {
            USpec::Constant { value } => UMode::Constant(*value),
            USpec::Solved { h0 } => UMode::Solved { h0: *h0 },
            USpec::Modes { modes } => UMode::Prescribed(field_from_modes(&torus, modes)),
        };
        Ok(scenario)
    }

    pub fn lattice_kind(&self) -> LatticeKind {
        self.lattice.as_ref().map_or(LatticeKind::T4, |l| l.kind.into())
    }

    /// Bundle rank for the charge window: the configured value, else the
    /// number of curvature summands (at least 1).
    pub fn lattice_rank(&self, scenario: Option<&Scenario>) -> u32 {
        self.lattice
            .as_ref()
            .and_then(|l| l.rank)
            .or_else(|| scenario.map(|s| s.instantons.curvatures().len().max(1) as u32))
            .unwrap_or(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BALANCED: &str = r#"
        t_squared = 1
        alpha = "-1"
        grid = 4
        beta = [[1, -1, 0, 0, 0, 0], [0, 0, 1, -1, 0, 0], [0, 0, 0, 0, 1, -1]]
    "#;

    #[test]
    fn defaults_fill_in() {
        let c: ScenarioConfig = toml::from_str(BALANCED).unwrap();
        assert_eq!(c.sides, [1.0; 4]);
        assert!(matches!(c.instantons, InstantonSpec::Balanced));
        assert!(c.t_squared.is_exact() && c.alpha.is_exact());
        let s = c.scenario().unwrap();
        assert_eq!(s.instantons.curvatures().len(), 12);
        assert_eq!(c.lattice_rank(Some(&s)), 12);
        assert_eq!(c.lattice_rank(None), 1);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{BALANCED}\ncolour = 3\n");
        assert!(toml::from_str::<ScenarioConfig>(&text).is_err());
        let text = format!("{BALANCED}\n[u]\nmode = \"constant\"\nvalue = 0.0\nextra = 1\n");
        assert!(toml::from_str::<ScenarioConfig>(&text).is_err());
    }

    #[test]
    fn tagged_sections() {
        let text = format!(
            "{BALANCED}\n[instantons]\nkind = \"explicit\"\nperiods = [[1, -1, 0, 0, 0, 0]]\nweights = [-1.0]\n\
             [u]\nmode = \"modes\"\nmodes = [{{ k = [1, 0, 0, 0], cos = 0.1, sin = 0.0 }}]\n"
        );
        let c: ScenarioConfig = toml::from_str(&text).unwrap();
        let s = c.scenario().unwrap();
        assert_eq!(s.instantons.curvatures().len(), 1);
        assert!(matches!(s.u_mode, UMode::Prescribed(_)));
    }

    #[test]
    fn non_asd_beta_is_invalid() {
        let text = BALANCED.replace("[1, -1, 0, 0, 0, 0], [0, 0, 1", "[1, 1, 0, 0, 0, 0], [0, 0, 1");
        let c: ScenarioConfig = toml::from_str(&text).unwrap();
        assert!(matches!(c.scenario(), Err(ConfigError::Invalid(_))));
    }
}
