use serde::Serialize;

use super::linalg::{least_squares, ColMajor};
use super::{design_matrix, singular_terms};
use crate::datamodel::{ExposureGroup, FeatureMap, PanelDataset};
use crate::error::{Error, Result};

/// Least-squares regression of `Y_{t_post} - Y_{t_pre}` on mapped covariates
/// within one exposure group.
#[derive(Debug, Clone, Serialize)]
pub struct OutcomeModel {
    pub group: ExposureGroup,
    /// `(t_pre, t_post)`.
    pub pair: (i32, i32),
    pub feature_map: FeatureMap,
    pub coefficients: Vec<f64>,
    pub n_fit: usize,
}

impl OutcomeModel {
    /// Prediction for one raw covariate vector.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.feature_map.check_covariates(x.len())?;
        let mut row = vec![0.0; self.feature_map.len()];
        self.feature_map.fill_row(x, &mut row);
        Ok(dot(&row, &self.coefficients))
    }
}

/// Fits the outcome-difference regression on units of `group`.
///
/// Needs at least `p + 1` units for a `p`-term design and a full-rank design
/// on that subsample.
pub fn fit_outcome_diff(
    d: &PanelDataset,
    group: ExposureGroup,
    pair: (i32, i32),
    map: &FeatureMap,
) -> Result<OutcomeModel> {
    let dy = d.outcome_difference(pair.0, pair.1)?;
    let rows = design_matrix(d, map, |g| g == group)?;
    let y: Vec<f64> = d
        .units()
        .iter()
        .zip(&dy)
        .filter(|(u, _)| u.group == group)
        .map(|(_, v)| *v)
        .collect();
    let p = map.len();
    if y.is_empty() {
        return Err(Error::Positivity(format!(
            "no units in group {group} to fit its outcome model"
        )));
    }
    if y.len() < p + 1 {
        return Err(Error::Singular(format!(
            "group {group} has {} units, fewer than the {} needed for a {p}-term outcome model",
            y.len(),
            p + 1
        )));
    }
    let coefficients = least_squares(&ColMajor::from_rows(&rows, p), &y).map_err(|rd| {
        Error::Singular(format!(
            "outcome design for group {group} is rank deficient (rank {} of {p}); dependent terms: {}",
            rd.rank,
            singular_terms(map, &rd.dependent)
        ))
    })?;
    Ok(OutcomeModel {
        group,
        pair,
        feature_map: map.clone(),
        coefficients,
        n_fit: y.len(),
    })
}

/// Predictions of `m` for every unit of `d`, whatever its group.
///
/// `group` must name the group the model was fitted on.
pub fn predict_outcome_diff(
    m: &OutcomeModel,
    d: &PanelDataset,
    group: ExposureGroup,
) -> Result<Vec<f64>> {
    if m.group != group {
        return Err(Error::Config(format!(
            "outcome model was fitted for group {}, not {group}",
            m.group
        )));
    }
    Ok(design_matrix(d, &m.feature_map, |_| true)?
        .iter()
        .map(|row| dot(row, &m.coefficients))
        .collect())
}

/// Control-group outcome models for one difference pair.
#[derive(Debug, Clone, Serialize)]
pub struct OutcomeModels {
    pub neighbor: OutcomeModel,
    pub isolated: OutcomeModel,
}

impl OutcomeModels {
    pub fn fit(d: &PanelDataset, pair: (i32, i32), map: &FeatureMap) -> Result<Self> {
        Ok(Self {
            neighbor: fit_outcome_diff(d, ExposureGroup::NeighborControl, pair, map)?,
            isolated: fit_outcome_diff(d, ExposureGroup::IsolatedControl, pair, map)?,
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
