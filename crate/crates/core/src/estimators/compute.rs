use std::str::FromStr;

use serde::Serialize;

use super::{Contrast, Estimand, Estimate, Estimator};
use crate::datamodel::{ExposureGroup, PanelDataset};
use crate::error::{Error, Result};
use crate::nuisance::{
    predict_outcome_diff, predict_propensities, ClassProbabilities, OutcomeModels, PropensityModel,
};

/// Which control group the treated are compared against in the ATT weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttComparison {
    /// Isolated controls, the group that shares the treated units' trend.
    #[default]
    IsolatedControl,
    /// Weight on neighbour controls (`p_T(X) I(NC) / (s_T p_NC(X))`) with the
    /// isolated-control outcome model kept in the residual. Kept for auditing
    /// that variant; `paper-literal` is accepted as an alias.
    NeighborControl,
}

impl FromStr for AttComparison {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "isolated-control" | "isolated" => Ok(AttComparison::IsolatedControl),
            "neighbor-control" | "paper-literal" => Ok(AttComparison::NeighborControl),
            other => Err(Error::Config(format!(
                "unknown ATT comparison {other:?}, expected isolated-control or neighbor-control"
            ))),
        }
    }
}

/// Everything the estimators need for one difference pair.
#[derive(Debug, Clone)]
pub struct EstimationInputs {
    pub groups: Vec<ExposureGroup>,
    /// Outcome difference over the pair, per unit.
    pub delta_y: Vec<f64>,
    pub propensities: Option<Vec<ClassProbabilities>>,
    /// Neighbour-control outcome-difference model evaluated at every unit.
    pub mu_neighbor: Option<Vec<f64>>,
    /// Isolated-control outcome-difference model evaluated at every unit.
    pub mu_isolated: Option<Vec<f64>>,
    pub att_comparison: AttComparison,
    pub time_index: Option<usize>,
}

impl EstimationInputs {
    pub fn new(groups: Vec<ExposureGroup>, delta_y: Vec<f64>) -> Self {
        Self {
            groups,
            delta_y,
            propensities: None,
            mu_neighbor: None,
            mu_isolated: None,
            att_comparison: AttComparison::default(),
            time_index: None,
        }
    }

    pub fn with_propensities(mut self, p: Vec<ClassProbabilities>) -> Self {
        self.propensities = Some(p);
        self
    }

    pub fn with_outcome_predictions(
        mut self,
        mu_neighbor: Vec<f64>,
        mu_isolated: Vec<f64>,
    ) -> Self {
        self.mu_neighbor = Some(mu_neighbor);
        self.mu_isolated = Some(mu_isolated);
        self
    }

    pub fn with_att_comparison(mut self, c: AttComparison) -> Self {
        self.att_comparison = c;
        self
    }

    pub fn with_time_index(mut self, t: Option<usize>) -> Self {
        self.time_index = t;
        self
    }

    /// Inputs for `pair` from fitted nuisance models; either may be absent,
    /// which disables the estimators that need it.
    pub fn from_fits(
        d: &PanelDataset,
        pair: (i32, i32),
        propensity: Option<&PropensityModel>,
        outcome: Option<&OutcomeModels>,
    ) -> Result<Self> {
        let mut inputs = Self::new(d.groups(), d.outcome_difference(pair.0, pair.1)?);
        if let Some(m) = propensity {
            inputs.propensities = Some(predict_propensities(m, d)?);
        }
        if let Some(om) = outcome {
            inputs.mu_neighbor = Some(predict_outcome_diff(
                &om.neighbor,
                d,
                ExposureGroup::NeighborControl,
            )?);
            inputs.mu_isolated = Some(predict_outcome_diff(
                &om.isolated,
                d,
                ExposureGroup::IsolatedControl,
            )?);
        }
        Ok(inputs)
    }

    fn n(&self) -> usize {
        self.groups.len()
    }

    fn check_lengths(&self) -> Result<()> {
        let n = self.n();
        let bad = |what: &str, len: usize| {
            Error::Config(format!("{what} has {len} entries but there are {n} units"))
        };
        if n == 0 {
            return Err(Error::Positivity("no units".into()));
        }
        if self.delta_y.len() != n {
            return Err(bad("outcome difference", self.delta_y.len()));
        }
        if let Some(p) = &self.propensities {
            if p.len() != n {
                return Err(bad("propensity vector", p.len()));
            }
        }
        for mu in [&self.mu_neighbor, &self.mu_isolated].into_iter().flatten() {
            if mu.len() != n {
                return Err(bad("outcome prediction vector", mu.len()));
            }
        }
        Ok(())
    }

    fn share(&self, group: ExposureGroup) -> Result<f64> {
        let count = self.groups.iter().filter(|g| **g == group).count();
        if count == 0 {
            return Err(Error::Positivity(format!("no units in group {group}")));
        }
        Ok(count as f64 / self.n() as f64)
    }

    fn propensities(&self) -> Result<&[ClassProbabilities]> {
        self.propensities
            .as_deref()
            .ok_or_else(|| Error::Config("this estimator needs fitted propensity scores".into()))
    }

    fn mu(&self, group: ExposureGroup) -> Result<&[f64]> {
        let mu = match group {
            ExposureGroup::NeighborControl => &self.mu_neighbor,
            _ => &self.mu_isolated,
        };
        mu.as_deref()
            .ok_or_else(|| Error::Config(format!("this estimator needs the {group} outcome model")))
    }

    /// `p_num(X) I(group) / (share * p_group(X))` for every unit.
    fn ratio_weights(
        &self,
        numerator: ExposureGroup,
        group: ExposureGroup,
        share: f64,
    ) -> Result<Vec<f64>> {
        let ps = self.propensities()?;
        self.groups
            .iter()
            .zip(ps)
            .enumerate()
            .map(|(i, (g, p))| {
                if *g != group {
                    return Ok(0.0);
                }
                let denom = p.of(group);
                if !denom.is_finite() || denom <= 0.0 {
                    return Err(Error::Positivity(format!(
                        "unit {i} in group {group} has predicted probability {denom} for its own group"
                    )));
                }
                Ok(p.of(numerator) / (share * denom))
            })
            .collect()
    }

    fn indicator_weights(&self, group: ExposureGroup, share: f64) -> Vec<f64> {
        self.groups
            .iter()
            .map(|g| if *g == group { 1.0 / share } else { 0.0 })
            .collect()
    }
}

/// Per-unit terms `phi_i` whose mean is the estimate, and the normalising
/// weight `c_i` with `E_n[c] = 1`. The influence value is `phi_i - c_i * point`.
struct Terms {
    phi: Vec<f64>,
    c: Vec<f64>,
}

impl Terms {
    fn into_estimate(
        self,
        estimand: Estimand,
        estimator: Estimator,
        time_index: Option<usize>,
    ) -> Estimate {
        let n = self.phi.len() as f64;
        let point = self.phi.iter().sum::<f64>() / n;
        let psi = self
            .phi
            .iter()
            .zip(&self.c)
            .map(|(p, c)| p - c * point)
            .collect();
        Estimate::from_influence(estimand, estimator, point, psi, time_index)
    }
}

fn delta_terms(x: &EstimationInputs, estimator: Estimator) -> Result<Terms> {
    use ExposureGroup::*;
    let s_t = x.share(Treated)?;
    let w0 = x.indicator_weights(Treated, s_t);
    let phi = match estimator {
        Estimator::Ipw => {
            let w1 = x.ratio_weights(Treated, NeighborControl, s_t)?;
            let w2 = x.ratio_weights(Treated, IsolatedControl, s_t)?;
            (0..x.n()).map(|i| (w1[i] - w2[i]) * x.delta_y[i]).collect()
        }
        Estimator::Reg => {
            let (m1, m0) = (x.mu(NeighborControl)?, x.mu(IsolatedControl)?);
            (0..x.n()).map(|i| w0[i] * (m1[i] - m0[i])).collect()
        }
        Estimator::Dr => {
            let w1 = x.ratio_weights(Treated, NeighborControl, s_t)?;
            let w2 = x.ratio_weights(Treated, IsolatedControl, s_t)?;
            let (m1, m0) = (x.mu(NeighborControl)?, x.mu(IsolatedControl)?);
            let dy = &x.delta_y;
            (0..x.n())
                .map(|i| {
                    w1[i] * (dy[i] - m1[i]) + w0[i] * m1[i]
                        - w2[i] * (dy[i] - m0[i])
                        - w0[i] * m0[i]
                })
                .collect()
        }
    };
    Ok(Terms { phi, c: w0 })
}

/// Shared shape of ATT and ATN: target group `target` against isolated
/// controls (or, for the literal ATT variant, neighbour-control weights).
fn effect_terms(
    x: &EstimationInputs,
    estimator: Estimator,
    target: ExposureGroup,
    comparison: ExposureGroup,
) -> Result<Terms> {
    let share = x.share(target)?;
    let c = x.indicator_weights(target, share);
    let dy = &x.delta_y;
    let phi = match estimator {
        Estimator::Ipw => {
            let w = x.ratio_weights(target, comparison, share)?;
            (0..x.n()).map(|i| (c[i] - w[i]) * dy[i]).collect()
        }
        Estimator::Reg => {
            let m0 = x.mu(ExposureGroup::IsolatedControl)?;
            (0..x.n()).map(|i| c[i] * (dy[i] - m0[i])).collect()
        }
        Estimator::Dr => {
            let w = x.ratio_weights(target, comparison, share)?;
            let m0 = x.mu(ExposureGroup::IsolatedControl)?;
            (0..x.n())
                .map(|i| (c[i] - w[i]) * (dy[i] - m0[i]))
                .collect()
        }
    };
    Ok(Terms { phi, c })
}

fn att_terms(x: &EstimationInputs, estimator: Estimator) -> Result<Terms> {
    let comparison = match x.att_comparison {
        AttComparison::IsolatedControl => ExposureGroup::IsolatedControl,
        AttComparison::NeighborControl => ExposureGroup::NeighborControl,
    };
    effect_terms(x, estimator, ExposureGroup::Treated, comparison)
}

fn atn_terms(x: &EstimationInputs, estimator: Estimator) -> Result<Terms> {
    effect_terms(
        x,
        estimator,
        ExposureGroup::NeighborControl,
        ExposureGroup::IsolatedControl,
    )
}

/// Any basic contrast with any estimator.
pub fn estimate(
    x: &EstimationInputs,
    contrast: Contrast,
    estimator: Estimator,
) -> Result<Estimate> {
    x.check_lengths()?;
    let estimand = Estimand::Effect(contrast);
    let t = x.time_index;
    Ok(match contrast {
        Contrast::Delta => delta_terms(x, estimator)?.into_estimate(estimand, estimator, t),
        Contrast::Att => att_terms(x, estimator)?.into_estimate(estimand, estimator, t),
        Contrast::Atn => atn_terms(x, estimator)?.into_estimate(estimand, estimator, t),
        Contrast::Offset => {
            let d = delta_terms(x, estimator)?.into_estimate(estimand, estimator, t);
            let psi = d.influence.values.iter().map(|v| -v).collect();
            Estimate::from_influence(estimand, estimator, -d.point(), psi, t)
        }
        Contrast::Aott => {
            let att = att_terms(x, estimator)?.into_estimate(estimand, estimator, t);
            let delta = delta_terms(x, estimator)?.into_estimate(estimand, estimator, t);
            let psi = att
                .influence
                .values
                .iter()
                .zip(&delta.influence.values)
                .map(|(a, b)| a + b)
                .collect();
            Estimate::from_influence(estimand, estimator, att.point() + delta.point(), psi, t)
        }
    })
}

macro_rules! named {
    ($($name:ident => $contrast:ident, $estimator:ident;)*) => {
        $(
            pub fn $name(x: &EstimationInputs) -> Result<Estimate> {
                estimate(x, Contrast::$contrast, Estimator::$estimator)
            }
        )*
    };
}

named! {
    delta_ipw => Delta, Ipw;
    delta_reg => Delta, Reg;
    delta_dr => Delta, Dr;
    att_ipw => Att, Ipw;
    att_reg => Att, Reg;
    att_dr => Att, Dr;
    atn_ipw => Atn, Ipw;
    atn_reg => Atn, Reg;
    atn_dr => Atn, Dr;
    offset_ipw => Offset, Ipw;
    offset_reg => Offset, Reg;
    offset_dr => Offset, Dr;
    aott_ipw => Aott, Ipw;
    aott_reg => Aott, Reg;
    aott_dr => Aott, Dr;
}
