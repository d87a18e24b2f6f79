//! Nuisance models: the three-class propensity score and the per-group
//! outcome-difference regressions.

mod linalg;
mod outcome;
mod propensity;

pub use outcome::{fit_outcome_diff, predict_outcome_diff, OutcomeModel, OutcomeModels};
pub use propensity::{
    fit_propensity, fit_propensity_with, marginal_share, marginal_treated_share,
    predict_propensities, ClassProbabilities, LogitProblem, NewtonSettings, PropensityModel,
};

use crate::datamodel::{ExposureGroup, FeatureMap, PanelDataset};
use crate::error::Result;

/// Design rows for the units whose group passes `keep`, in unit order.
pub(crate) fn design_matrix(
    d: &PanelDataset,
    map: &FeatureMap,
    keep: impl Fn(ExposureGroup) -> bool,
) -> Result<Vec<Vec<f64>>> {
    map.check_covariates(d.n_covariates())?;
    Ok(d.units()
        .iter()
        .filter(|u| keep(u.group))
        .map(|u| {
            let mut row = vec![0.0; map.len()];
            map.fill_row(&u.covariates, &mut row);
            row
        })
        .collect())
}

/// Least-squares coefficients of `y` on `rows`, exposed for diagnostics and
/// tests that need an OLS fit outside the panel structure.
pub fn ordinary_least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>> {
    let p = rows.first().map_or(0, Vec::len);
    linalg::least_squares(&linalg::ColMajor::from_rows(rows, p), y).map_err(|rd| {
        crate::error::Error::Singular(format!(
            "design is rank deficient (rank {} of {p}); dependent columns: {:?}",
            rd.rank, rd.dependent
        ))
    })
}

fn singular_terms(map: &FeatureMap, dependent: &[usize]) -> String {
    let names = map.term_names();
    dependent
        .iter()
        .map(|&j| names[j].clone())
        .collect::<Vec<_>>()
        .join(", ")
}
