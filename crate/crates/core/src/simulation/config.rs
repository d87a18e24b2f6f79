//! Flat key-value configuration for simulation runs.
//!
//! ```toml
//! scenario = "a"
//! n = 2000
//! reps = 1000
//! seed = 2024
//! dgp = "multi-period"
//! theta01 = 1.0
//! theta10 = -1.5
//! T = 13
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dgp::DgpParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DgpKind {
    TwoPeriod,
    MultiPeriod,
}

impl DgpKind {
    pub fn label(self) -> &'static str {
        match self {
            DgpKind::TwoPeriod => "two-period",
            DgpKind::MultiPeriod => "multi-period",
        }
    }

    /// Default `(theta01, theta10)`.
    pub fn default_thetas(self) -> (f64, f64) {
        match self {
            DgpKind::TwoPeriod => (0.5, -1.0),
            DgpKind::MultiPeriod => (1.0, -1.5),
        }
    }

    pub fn default_periods(self) -> usize {
        match self {
            DgpKind::TwoPeriod => 1,
            DgpKind::MultiPeriod => 13,
        }
    }

    /// Parameters for this design. Only the built-in period counts (1 and 13)
    /// have defined time schedules.
    pub fn params(
        self,
        theta01: Option<f64>,
        theta10: Option<f64>,
        periods: Option<usize>,
    ) -> Result<DgpParams> {
        let (d01, d10) = self.default_thetas();
        let (t01, t10) = (theta01.unwrap_or(d01), theta10.unwrap_or(d10));
        let expected = self.default_periods();
        if let Some(t) = periods {
            if t != expected {
                return Err(Error::Config(format!(
                    "the {} design has T = {expected}, got T = {t}",
                    self.label()
                )));
            }
        }
        Ok(match self {
            DgpKind::TwoPeriod => DgpParams::two_period_with(t01, t10),
            DgpKind::MultiPeriod => DgpParams::multi_period(t01, t10),
        })
    }
}

impl fmt::Display for DgpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for DgpKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "two-period" => Ok(DgpKind::TwoPeriod),
            "multi-period" => Ok(DgpKind::MultiPeriod),
            other => Err(Error::Config(format!(
                "unknown dgp {other:?}, expected two-period or multi-period"
            ))),
        }
    }
}

/// Every key is optional; command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub scenario: Option<String>,
    pub n: Option<usize>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub dgp: Option<DgpKind>,
    pub theta01: Option<f64>,
    pub theta10: Option<f64>,
    #[serde(rename = "T")]
    pub periods: Option<usize>,
}

impl SimulationConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("invalid config file: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}
