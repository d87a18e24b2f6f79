//! IPW, outcome-regression and doubly-robust estimators of the spillover
//! contrasts, with influence-function standard errors.
//!
//! All estimators share one set of weights. With `s_T`, `s_NC` the sample
//! shares of treated and neighbour-control units and `p_T(X)`, `p_NC(X)`,
//! `p_IC(X)` the fitted class probabilities:
//!
//! ```text
//! w0 = I(T) / s_T
//! w1 = p_T(X) I(NC) / (s_T p_NC(X))
//! w2 = p_T(X) I(IC) / (s_T p_IC(X))
//! v0 = I(NC) / s_NC
//! v2 = p_NC(X) I(IC) / (s_NC p_IC(X))
//! ```
//!
//! `delta` is the spillover a treated unit would have received had its
//! neighbours been treated, `E(Y(1,1) - Y(1,0) | A = 1)`. The offsetting effect
//! is `-delta` and AOTT is `ATT + delta`.

mod combine;
mod compute;

use std::fmt;
use std::str::FromStr;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

pub use combine::{att_rho, time_averaged, time_averaged_aott};
pub use compute::{
    aott_dr, aott_ipw, aott_reg, atn_dr, atn_ipw, atn_reg, att_dr, att_ipw, att_reg, delta_dr,
    delta_ipw, delta_reg, estimate, offset_dr, offset_ipw, offset_reg, AttComparison,
    EstimationInputs,
};

use crate::error::{Error, Result};

/// Two-sided 95% normal critical value.
pub const Z_95: f64 = 1.96;

/// A basic contrast estimable from one difference pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Contrast {
    Delta,
    Att,
    Atn,
    Offset,
    Aott,
}

impl Contrast {
    pub const ALL: [Contrast; 5] = [
        Contrast::Delta,
        Contrast::Att,
        Contrast::Atn,
        Contrast::Offset,
        Contrast::Aott,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Contrast::Delta => "Delta",
            Contrast::Att => "ATT",
            Contrast::Atn => "ATN",
            Contrast::Offset => "Offset",
            Contrast::Aott => "AOTT",
        }
    }
}

impl fmt::Display for Contrast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Contrast {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Contrast::ALL
            .into_iter()
            .find(|c| c.name().to_ascii_lowercase() == key)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown estimand {s:?}, expected one of Delta, ATT, ATN, Offset, AOTT"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimand {
    Effect(Contrast),
    /// `ATT(rho) = ATT + rho * delta`, the treated effect when a share `rho`
    /// of the neighbourhood is treated.
    AttRho(f64),
    /// Average over post periods `t = 1..T` of a per-period contrast.
    TimeAvg(Contrast),
}

impl Estimand {
    pub fn name(&self) -> String {
        match self {
            Estimand::Effect(c) => c.name().to_string(),
            Estimand::AttRho(rho) => format!("ATT_rho({rho})"),
            Estimand::TimeAvg(c) => format!("TimeAvg{}", c.name()),
        }
    }
}

impl From<Contrast> for Estimand {
    fn from(c: Contrast) -> Self {
        Estimand::Effect(c)
    }
}

impl fmt::Display for Estimand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Estimator {
    Ipw,
    Reg,
    Dr,
}

impl Estimator {
    pub const ALL: [Estimator; 3] = [Estimator::Ipw, Estimator::Reg, Estimator::Dr];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Ipw => "IPW",
            Estimator::Reg => "Reg",
            Estimator::Dr => "DR",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ipw" => Ok(Estimator::Ipw),
            "reg" => Ok(Estimator::Reg),
            "dr" => Ok(Estimator::Dr),
            _ => Err(Error::Config(format!(
                "unknown estimator {s:?}, expected IPW, Reg or DR"
            ))),
        }
    }
}

macro_rules! serialize_by_name {
    ($($ty:ty),*) => {
        $(
            impl Serialize for $ty {
                fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                    s.collect_str(self)
                }
            }
        )*
    };
}

serialize_by_name!(Contrast, Estimand, Estimator);

/// Point estimate with a 95% Wald interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectEstimate {
    pub estimand: Estimand,
    pub estimator: Estimator,
    pub point: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
    /// Post period `t` for multi-period estimates, `None` otherwise.
    pub time_index: Option<usize>,
}

impl EffectEstimate {
    pub fn new(
        estimand: Estimand,
        estimator: Estimator,
        point: f64,
        se: f64,
        n: usize,
        time_index: Option<usize>,
    ) -> Self {
        Self {
            estimand,
            estimator,
            point,
            se,
            ci_low: point - Z_95 * se,
            ci_high: point + Z_95 * se,
            n,
            time_index,
        }
    }

    pub fn covers(&self, truth: f64) -> bool {
        self.ci_low <= truth && truth <= self.ci_high
    }
}

impl Serialize for EffectEstimate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let fields = if self.time_index.is_some() { 7 } else { 6 };
        let mut st = s.serialize_struct("EffectEstimate", fields)?;
        st.serialize_field("estimand", &self.estimand.name())?;
        st.serialize_field("estimator", self.estimator.name())?;
        st.serialize_field("point", &self.point)?;
        st.serialize_field("se", &self.se)?;
        st.serialize_field("ci", &[self.ci_low, self.ci_high])?;
        st.serialize_field("n", &self.n)?;
        if let Some(t) = self.time_index {
            st.serialize_field("time_index", &t)?;
        }
        st.end()
    }
}

/// Per-unit influence contributions `psi_i` of one estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceVector {
    pub estimand: Estimand,
    pub values: Vec<f64>,
}

impl InfluenceVector {
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `sqrt(E_n[psi^2] / n)`.
    pub fn standard_error(&self) -> f64 {
        let n = self.values.len() as f64;
        (self.values.iter().map(|v| v * v).sum::<f64>() / n / n).sqrt()
    }
}

/// An estimate together with the influence values behind its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub summary: EffectEstimate,
    pub influence: InfluenceVector,
}

impl Estimate {
    pub(crate) fn from_influence(
        estimand: Estimand,
        estimator: Estimator,
        point: f64,
        values: Vec<f64>,
        time_index: Option<usize>,
    ) -> Self {
        let influence = InfluenceVector { estimand, values };
        let se = influence.standard_error();
        Self {
            summary: EffectEstimate::new(
                estimand,
                estimator,
                point,
                se,
                influence.values.len(),
                time_index,
            ),
            influence,
        }
    }

    pub fn point(&self) -> f64 {
        self.summary.point
    }

    pub fn se(&self) -> f64 {
        self.summary.se
    }
}
