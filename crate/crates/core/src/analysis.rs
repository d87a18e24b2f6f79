//! End-to-end estimation on one dataset: fit nuisances, evaluate every
//! requested contrast per difference pair, and time-average when `T > 1`.

use serde::Serialize;

use crate::datamodel::{
    validate_dataset, ExposureGroup, FeatureMap, PanelDataset, ValidationReport,
};
use crate::error::{Error, Result};
use crate::estimators::{
    att_rho, estimate, time_averaged, AttComparison, Contrast, Estimate, EstimationInputs,
    Estimator,
};
use crate::nuisance::{fit_propensity, predict_propensities, OutcomeModels, PropensityModel};

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisConfig {
    pub ps_map: FeatureMap,
    pub om_map: FeatureMap,
    pub contrasts: Vec<Contrast>,
    pub estimators: Vec<Estimator>,
    /// ATT(rho) is reported for each listed value.
    pub rhos: Vec<f64>,
    pub att_comparison: AttComparison,
    pub ps_floor: Option<f64>,
}

impl AnalysisConfig {
    /// Linear maps in all covariates, AOTT by DR.
    pub fn new(q: usize) -> Self {
        Self {
            ps_map: FeatureMap::linear(q),
            om_map: FeatureMap::linear(q),
            contrasts: vec![Contrast::Aott],
            estimators: vec![Estimator::Dr],
            rhos: Vec::new(),
            att_comparison: AttComparison::default(),
            ps_floor: None,
        }
    }

    fn needs_propensity(&self) -> bool {
        self.estimators.iter().any(|e| *e != Estimator::Reg)
    }

    fn needs_outcome(&self) -> bool {
        self.estimators.iter().any(|e| *e != Estimator::Ipw)
    }
}

/// Range of one predicted class probability over the units of one group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivityDiagnostic {
    pub group: ExposureGroup,
    pub class: ExposureGroup,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone)]
pub struct AnalysisOutput {
    /// Per-pair estimates (with `time_index` set when `T > 1`), then ATT(rho)
    /// rows, then time averages.
    pub estimates: Vec<Estimate>,
    pub propensity: Option<PropensityModel>,
    pub outcome_models: Vec<OutcomeModels>,
    pub positivity: Vec<PositivityDiagnostic>,
    pub validation: ValidationReport,
    pub warnings: Vec<String>,
}

pub fn analyze(d: &PanelDataset, cfg: &AnalysisConfig) -> Result<AnalysisOutput> {
    if cfg.contrasts.is_empty() && cfg.rhos.is_empty() {
        return Err(Error::Config("no estimands requested".into()));
    }
    if cfg.estimators.is_empty() {
        return Err(Error::Config("no estimators requested".into()));
    }
    for &rho in &cfg.rhos {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::Domain(format!("rho must lie in [0, 1], got {rho}")));
        }
    }
    let validation = validate_dataset(d);
    if !validation.passed() {
        let missing: Vec<&str> = validation.missing_groups.iter().map(|g| g.code()).collect();
        return Err(Error::Positivity(format!(
            "exposure groups without units: {}",
            missing.join(", ")
        )));
    }
    let mut warnings = Vec::new();

    let propensity = if cfg.needs_propensity() {
        let m = fit_propensity(d, &cfg.ps_map)?.with_floor(cfg.ps_floor);
        if !m.converged {
            warnings.push(format!(
                "propensity model did not converge after {} iterations (max |score| = {:e})",
                m.iterations, m.max_abs_score
            ));
        }
        Some(m)
    } else {
        None
    };
    let pairs = d.difference_pairs();
    let outcome_models = if cfg.needs_outcome() {
        pairs
            .iter()
            .map(|&pair| OutcomeModels::fit(d, pair, &cfg.om_map))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let probabilities = propensity
        .as_ref()
        .map(|m| predict_propensities(m, d))
        .transpose()?;
    let positivity = probabilities
        .as_deref()
        .map(|p| positivity_ranges(d, p))
        .unwrap_or_default();

    let multi = pairs.len() > 1;
    let mut per_pair: Vec<Estimate> = Vec::new();
    let mut rho_rows: Vec<Estimate> = Vec::new();
    for (i, &pair) in pairs.iter().enumerate() {
        let mut inputs = EstimationInputs::new(d.groups(), d.outcome_difference(pair.0, pair.1)?)
            .with_att_comparison(cfg.att_comparison)
            .with_time_index(multi.then_some(i + 1));
        inputs.propensities = probabilities.clone();
        if let Some(om) = outcome_models.get(i) {
            inputs = inputs
                .with_outcome_predictions(predict(&om.neighbor, d)?, predict(&om.isolated, d)?);
        }
        for &c in &cfg.contrasts {
            for &e in &cfg.estimators {
                per_pair.push(estimate(&inputs, c, e)?);
            }
        }
        let rho_estimators = if cfg.rhos.is_empty() {
            &[][..]
        } else {
            &cfg.estimators[..]
        };
        for &e in rho_estimators {
            let att = estimate(&inputs, Contrast::Att, e)?;
            let delta = estimate(&inputs, Contrast::Delta, e)?;
            for &rho in &cfg.rhos {
                rho_rows.push(att_rho(&att, &delta, rho)?);
            }
        }
    }

    let mut averages = Vec::new();
    if multi {
        for &c in &cfg.contrasts {
            for &e in &cfg.estimators {
                let series: Vec<Estimate> = per_pair
                    .iter()
                    .filter(|x| x.summary.estimand == c.into() && x.summary.estimator == e)
                    .cloned()
                    .collect();
                averages.push(time_averaged(&series)?);
            }
        }
    }

    let mut estimates = per_pair;
    estimates.extend(rho_rows);
    estimates.extend(averages);
    Ok(AnalysisOutput {
        estimates,
        propensity,
        outcome_models,
        positivity,
        validation,
        warnings,
    })
}

fn predict(m: &crate::nuisance::OutcomeModel, d: &PanelDataset) -> Result<Vec<f64>> {
    crate::nuisance::predict_outcome_diff(m, d, m.group)
}

fn positivity_ranges(
    d: &PanelDataset,
    probs: &[crate::nuisance::ClassProbabilities],
) -> Vec<PositivityDiagnostic> {
    let mut out = Vec::with_capacity(9);
    for group in ExposureGroup::ALL {
        for class in ExposureGroup::ALL {
            let (min, max) = d
                .units()
                .iter()
                .zip(probs)
                .filter(|(u, _)| u.group == group)
                .map(|(_, p)| p.of(class))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(v), hi.max(v))
                });
            out.push(PositivityDiagnostic {
                group,
                class,
                min,
                max,
            });
        }
    }
    out
}
