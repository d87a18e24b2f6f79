use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::linalg::{least_squares, ColMajor};
use super::{design_matrix, singular_terms};
use crate::datamodel::{validate_dataset, ExposureGroup, FeatureMap, PanelDataset};
use crate::error::{Error, Result};

/// Predicted exposure-group probabilities for one unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassProbabilities {
    pub treated: f64,
    pub neighbor: f64,
    pub isolated: f64,
}

impl ClassProbabilities {
    pub fn of(&self, group: ExposureGroup) -> f64 {
        match group {
            ExposureGroup::Treated => self.treated,
            ExposureGroup::NeighborControl => self.neighbor,
            ExposureGroup::IsolatedControl => self.isolated,
        }
    }

    /// Softmax over the log-odds `(0, eta_treated, eta_neighbor)` with the
    /// isolated class as reference.
    pub fn from_log_odds(eta_treated: f64, eta_neighbor: f64) -> Self {
        let m = eta_treated.max(eta_neighbor).max(0.0);
        let e0 = (-m).exp();
        let e1 = (eta_treated - m).exp();
        let e2 = (eta_neighbor - m).exp();
        let s = e0 + e1 + e2;
        Self {
            treated: e1 / s,
            neighbor: e2 / s,
            isolated: e0 / s,
        }
    }

    /// Raises every probability to at least `eps` and renormalises.
    pub fn floored(self, eps: f64) -> Self {
        let t = self.treated.max(eps);
        let n = self.neighbor.max(eps);
        let i = self.isolated.max(eps);
        let s = t + n + i;
        Self {
            treated: t / s,
            neighbor: n / s,
            isolated: i / s,
        }
    }
}

/// Newton–Raphson controls for the multinomial logit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NewtonSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 100,
            max_halvings: 20,
        }
    }
}

/// Multinomial log-likelihood over a fixed design with the isolated class as
/// reference. Parameters are stacked `[beta_treated; beta_neighbor]`.
#[derive(Debug, Clone)]
pub struct LogitProblem {
    rows: Vec<Vec<f64>>,
    labels: Vec<ExposureGroup>,
    p: usize,
}

impl LogitProblem {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<ExposureGroup>) -> Self {
        assert_eq!(rows.len(), labels.len(), "one label per design row");
        let p = rows.first().map_or(0, Vec::len);
        Self { rows, labels, p }
    }

    /// Width of one coefficient block.
    pub fn block_len(&self) -> usize {
        self.p
    }

    fn eta(&self, row: &[f64], theta: &[f64]) -> (f64, f64) {
        let (b1, b2) = theta.split_at(self.p);
        let e1 = row.iter().zip(b1).map(|(x, b)| x * b).sum();
        let e2 = row.iter().zip(b2).map(|(x, b)| x * b).sum();
        (e1, e2)
    }

    pub fn log_likelihood(&self, theta: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.labels)
            .map(|(row, g)| {
                let (e1, e2) = self.eta(row, theta);
                let m = e1.max(e2).max(0.0);
                let lse = m + ((-m).exp() + (e1 - m).exp() + (e2 - m).exp()).ln();
                let own = match g {
                    ExposureGroup::Treated => e1,
                    ExposureGroup::NeighborControl => e2,
                    ExposureGroup::IsolatedControl => 0.0,
                };
                own - lse
            })
            .sum()
    }

    /// Gradient of [`Self::log_likelihood`].
    pub fn score(&self, theta: &[f64]) -> Vec<f64> {
        let p = self.p;
        let mut s = vec![0.0; 2 * p];
        for (row, g) in self.rows.iter().zip(&self.labels) {
            let (e1, e2) = self.eta(row, theta);
            let pr = ClassProbabilities::from_log_odds(e1, e2);
            let r1 = f64::from(*g == ExposureGroup::Treated) - pr.treated;
            let r2 = f64::from(*g == ExposureGroup::NeighborControl) - pr.neighbor;
            for (j, x) in row.iter().enumerate() {
                s[j] += r1 * x;
                s[p + j] += r2 * x;
            }
        }
        s
    }

    /// Negative Hessian of the log-likelihood.
    pub fn information(&self, theta: &[f64]) -> DMatrix<f64> {
        let p = self.p;
        let mut h = DMatrix::<f64>::zeros(2 * p, 2 * p);
        for row in &self.rows {
            let (e1, e2) = self.eta(row, theta);
            let pr = ClassProbabilities::from_log_odds(e1, e2);
            let w11 = pr.treated * (1.0 - pr.treated);
            let w22 = pr.neighbor * (1.0 - pr.neighbor);
            let w12 = -pr.treated * pr.neighbor;
            for j in 0..p {
                for k in 0..=j {
                    let xx = row[j] * row[k];
                    h[(j, k)] += w11 * xx;
                    h[(p + j, p + k)] += w22 * xx;
                    h[(p + j, k)] += w12 * xx;
                    if k != j {
                        h[(p + k, j)] += w12 * xx;
                    }
                }
            }
        }
        // Fill the upper triangle of each symmetric block.
        for j in 0..2 * p {
            for k in j + 1..2 * p {
                h[(j, k)] = h[(k, j)];
            }
        }
        h
    }
}

/// Fitted three-class multinomial logit, isolated controls as reference.
#[derive(Debug, Clone, Serialize)]
pub struct PropensityModel {
    /// Row 0: log-odds of Treated vs IsolatedControl. Row 1: NeighborControl vs
    /// IsolatedControl. Columns follow `feature_map`.
    pub coefficients: [Vec<f64>; 2],
    pub feature_map: FeatureMap,
    pub converged: bool,
    pub iterations: usize,
    pub log_likelihood: f64,
    /// Log-likelihood at the start and after every accepted Newton step.
    pub log_likelihood_trace: Vec<f64>,
    pub max_abs_score: f64,
    /// Optional lower bound applied to predicted probabilities.
    pub floor: Option<f64>,
}

impl PropensityModel {
    /// Model with given coefficients, e.g. for prediction with known values.
    pub fn from_coefficients(
        feature_map: FeatureMap,
        treated: Vec<f64>,
        neighbor: Vec<f64>,
    ) -> Self {
        Self {
            coefficients: [treated, neighbor],
            feature_map,
            converged: true,
            iterations: 0,
            log_likelihood: f64::NAN,
            log_likelihood_trace: Vec::new(),
            max_abs_score: f64::NAN,
            floor: None,
        }
    }

    pub fn with_floor(mut self, floor: Option<f64>) -> Self {
        self.floor = floor;
        self
    }

    /// Probabilities for a raw covariate vector.
    pub fn probabilities(&self, x: &[f64]) -> Result<ClassProbabilities> {
        self.feature_map.check_covariates(x.len())?;
        let mut row = vec![0.0; self.feature_map.len()];
        self.feature_map.fill_row(x, &mut row);
        Ok(self.probabilities_for_row(&row))
    }

    fn probabilities_for_row(&self, row: &[f64]) -> ClassProbabilities {
        let dot = |b: &[f64]| row.iter().zip(b).map(|(x, c)| x * c).sum::<f64>();
        let pr = ClassProbabilities::from_log_odds(
            dot(&self.coefficients[0]),
            dot(&self.coefficients[1]),
        );
        match self.floor {
            Some(eps) => pr.floored(eps),
            None => pr,
        }
    }
}

pub fn fit_propensity(d: &PanelDataset, map: &FeatureMap) -> Result<PropensityModel> {
    fit_propensity_with(d, map, NewtonSettings::default())
}

/// Maximum-likelihood fit by Newton–Raphson from zero with step halving.
///
/// Non-convergence is not an error: the model comes back with
/// `converged = false` and the caller decides.
pub fn fit_propensity_with(
    d: &PanelDataset,
    map: &FeatureMap,
    settings: NewtonSettings,
) -> Result<PropensityModel> {
    let report = validate_dataset(d);
    if !report.passed() {
        return Err(Error::Positivity(format!(
            "exposure groups without units: {}",
            join_groups(&report.missing_groups)
        )));
    }
    let rows = design_matrix(d, map, |_| true)?;
    let p = map.len();
    if let Err(rd) = least_squares(&ColMajor::from_rows(&rows, p), &vec![0.0; rows.len()]) {
        return Err(Error::Singular(format!(
            "propensity design is rank deficient (rank {} of {p}); dependent terms: {}",
            rd.rank,
            singular_terms(map, &rd.dependent)
        )));
    }
    let problem = LogitProblem::new(rows, d.groups());

    let mut theta = vec![0.0; 2 * p];
    let mut ll = problem.log_likelihood(&theta);
    let mut trace = vec![ll];
    let mut score = problem.score(&theta);
    let mut max_score = max_abs(&score);
    let mut iterations = 0;
    let mut converged = max_score < settings.tolerance;

    while !converged && iterations < settings.max_iterations {
        let info = problem.information(&theta);
        let Some(chol) = info.cholesky() else {
            return Err(Error::Singular(
                "propensity information matrix is not positive definite".into(),
            ));
        };
        let step = chol.solve(&DVector::from_vec(score.clone()));
        // Near the optimum the quadratic gain drops below the rounding error
        // of the log-likelihood itself, so an LL comparison can no longer
        // judge the step. The full Newton step is taken there.
        let predicted_gain: f64 = 0.5
            * score
                .iter()
                .zip(step.iter())
                .map(|(g, s)| g * s)
                .sum::<f64>();
        let in_roundoff = predicted_gain <= 64.0 * f64::EPSILON * (1.0 + ll.abs());
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=settings.max_halvings {
            let candidate: Vec<f64> = theta
                .iter()
                .zip(step.iter())
                .map(|(t, s)| t + scale * s)
                .collect();
            let cand_ll = problem.log_likelihood(&candidate);
            if in_roundoff || cand_ll >= ll {
                accepted = Some((candidate, cand_ll));
                break;
            }
            scale *= 0.5;
        }
        iterations += 1;
        let Some((next, next_ll)) = accepted else {
            break;
        };
        theta = next;
        ll = next_ll;
        trace.push(ll);
        score = problem.score(&theta);
        max_score = max_abs(&score);
        converged = max_score < settings.tolerance;
    }

    let (b1, b2) = theta.split_at(p);
    Ok(PropensityModel {
        coefficients: [b1.to_vec(), b2.to_vec()],
        feature_map: map.clone(),
        converged,
        iterations,
        log_likelihood: ll,
        log_likelihood_trace: trace,
        max_abs_score: max_score,
        floor: None,
    })
}

/// Probability triple for every unit of `d`, in unit order.
pub fn predict_propensities(
    m: &PropensityModel,
    d: &PanelDataset,
) -> Result<Vec<ClassProbabilities>> {
    Ok(design_matrix(d, &m.feature_map, |_| true)?
        .iter()
        .map(|row| m.probabilities_for_row(row))
        .collect())
}

/// Sample share of `group`; errors when the group is empty.
pub fn marginal_share(d: &PanelDataset, group: ExposureGroup) -> Result<f64> {
    let count = d.group_count(group);
    if count == 0 {
        return Err(Error::Positivity(format!("no units in group {group}")));
    }
    Ok(count as f64 / d.n_units() as f64)
}

/// `E_n[I(A = 1)]`, the sample share of treated units.
pub fn marginal_treated_share(d: &PanelDataset) -> Result<f64> {
    marginal_share(d, ExposureGroup::Treated)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn join_groups(groups: &[ExposureGroup]) -> String {
    groups
        .iter()
        .map(|g| g.code())
        .collect::<Vec<_>>()
        .join(", ")
}
