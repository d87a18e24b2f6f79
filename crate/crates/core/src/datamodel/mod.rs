//! Observed panel data, exposure groups and covariate feature maps.
//!
//! Every unit carries a fixed exposure group (own treatment, neighbourhood
//! exposure), a covariate vector and one outcome per time point. The time grid
//! runs `-(T-1), ..., 0` before the intervention and `1, ..., T` after it; the
//! two-period case is `T = 1` with grid `[0, 1]`.

mod csv_io;
mod features;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use csv_io::{read_panel_csv, read_panel_csv_from, write_panel_csv, write_panel_csv_to};
pub use features::{build_design_row, FeatureMap, Term};

use crate::error::{Error, Result};

/// Exposure group `g(A) = (own treatment, neighbourhood exposure)`.
///
/// Treated units surrounded by treated neighbours, `(1, 1)`, are never
/// observed and therefore have no variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExposureGroup {
    /// `(1, 0)`: directly treated.
    Treated,
    /// `(0, 1)`: untreated, adjacent to treated units.
    NeighborControl,
    /// `(0, 0)`: untreated and not adjacent to treated units.
    IsolatedControl,
}

impl ExposureGroup {
    pub const ALL: [ExposureGroup; 3] = [
        ExposureGroup::Treated,
        ExposureGroup::NeighborControl,
        ExposureGroup::IsolatedControl,
    ];

    /// Short code used in panel CSV files.
    pub fn code(self) -> &'static str {
        match self {
            ExposureGroup::Treated => "T",
            ExposureGroup::NeighborControl => "NC",
            ExposureGroup::IsolatedControl => "IC",
        }
    }

    pub fn exposure(self) -> (u8, u8) {
        match self {
            ExposureGroup::Treated => (1, 0),
            ExposureGroup::NeighborControl => (0, 1),
            ExposureGroup::IsolatedControl => (0, 0),
        }
    }
}

impl fmt::Display for ExposureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for ExposureGroup {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "T" => Ok(ExposureGroup::Treated),
            "NC" => Ok(ExposureGroup::NeighborControl),
            "IC" => Ok(ExposureGroup::IsolatedControl),
            other => Err(format!(
                "unknown group code {other:?}, expected T, NC or IC"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitRecord {
    pub id: String,
    pub group: ExposureGroup,
    pub covariates: Vec<f64>,
    /// One outcome per entry of the dataset's time grid.
    pub outcomes: Vec<f64>,
}

/// A complete, rectangular panel. Immutable once constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelDataset {
    units: Vec<UnitRecord>,
    time_points: Vec<i32>,
    n_pre: usize,
}

impl PanelDataset {
    /// Builds a dataset from unit records on the grid `time_points`.
    ///
    /// The grid must be `-(T-1), ..., 0, 1, ..., T` for some `T >= 1`. Every
    /// unit must have the same number of covariates and a finite outcome at
    /// every time point.
    pub fn new(units: Vec<UnitRecord>, time_points: Vec<i32>) -> Result<Self> {
        let n_pre = time_points.iter().filter(|&&t| t <= 0).count();
        let n_post = time_points.len() - n_pre;
        if n_pre == 0 || n_pre != n_post {
            return Err(Error::Structure(format!(
                "time grid must hold T pre- and T post-treatment points, got {n_pre} and {n_post}"
            )));
        }
        let expected: Vec<i32> = (-(n_pre as i32 - 1)..=n_pre as i32).collect();
        if time_points != expected {
            return Err(Error::Structure(format!(
                "time grid must be consecutive from {} to {}, got {:?}",
                expected[0], n_pre, time_points
            )));
        }
        if units.is_empty() {
            return Err(Error::Structure("dataset has no units".into()));
        }
        let q = units[0].covariates.len();
        for (i, unit) in units.iter().enumerate() {
            if unit.covariates.len() != q {
                return Err(Error::Structure(format!(
                    "unit {} ({}) has {} covariates, expected {q}",
                    i,
                    unit.id,
                    unit.covariates.len()
                )));
            }
            if unit.outcomes.len() != time_points.len() {
                return Err(Error::Structure(format!(
                    "unit {} ({}) has {} outcomes, expected {}",
                    i,
                    unit.id,
                    unit.outcomes.len(),
                    time_points.len()
                )));
            }
            if let Some(j) = unit.covariates.iter().position(|v| !v.is_finite()) {
                return Err(Error::Structure(format!(
                    "unit {} ({}) has a non-finite covariate x{}",
                    i,
                    unit.id,
                    j + 1
                )));
            }
            if let Some(k) = unit.outcomes.iter().position(|v| !v.is_finite()) {
                return Err(Error::Structure(format!(
                    "unit {} ({}) has a missing or non-finite outcome at t = {}",
                    i, unit.id, time_points[k]
                )));
            }
        }
        Ok(Self {
            units,
            time_points,
            n_pre,
        })
    }

    pub fn units(&self) -> &[UnitRecord] {
        &self.units
    }

    pub fn time_points(&self) -> &[i32] {
        &self.time_points
    }

    /// Number of pre-treatment periods `T` (also the number of post periods).
    pub fn periods(&self) -> usize {
        self.n_pre
    }

    pub fn n_units(&self) -> usize {
        self.units.len()
    }

    pub fn n_covariates(&self) -> usize {
        self.units[0].covariates.len()
    }

    pub fn groups(&self) -> Vec<ExposureGroup> {
        self.units.iter().map(|u| u.group).collect()
    }

    pub fn group_count(&self, group: ExposureGroup) -> usize {
        self.units.iter().filter(|u| u.group == group).count()
    }

    /// Position of time `t` in the outcome vectors.
    pub fn time_position(&self, t: i32) -> Result<usize> {
        self.time_points
            .iter()
            .position(|&s| s == t)
            .ok_or_else(|| Error::Config(format!("time point {t} is not on the dataset grid")))
    }

    /// `Y_{t_post} - Y_{t_pre}` for every unit.
    pub fn outcome_difference(&self, t_pre: i32, t_post: i32) -> Result<Vec<f64>> {
        let a = self.time_position(t_pre)?;
        let b = self.time_position(t_post)?;
        Ok(self
            .units
            .iter()
            .map(|u| u.outcomes[b] - u.outcomes[a])
            .collect())
    }

    /// Difference pairs `(t - T, t)` for `t = 1..=T`.
    pub fn difference_pairs(&self) -> Vec<(i32, i32)> {
        let t_count = self.n_pre as i32;
        (1..=t_count).map(|t| (t - t_count, t)).collect()
    }
}

/// Per-covariate summary inside one exposure group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovariateSummary {
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub group: ExposureGroup,
    pub count: usize,
    pub covariates: Vec<CovariateSummary>,
}

/// Outcome of [`validate_dataset`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub n_units: usize,
    pub groups: Vec<GroupSummary>,
    pub missing_groups: Vec<ExposureGroup>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.missing_groups.is_empty()
    }

    pub fn count(&self, group: ExposureGroup) -> usize {
        self.groups
            .iter()
            .find(|g| g.group == group)
            .map_or(0, |g| g.count)
    }
}

/// Group counts, per-group covariate summaries and a missing-group flag.
///
/// Structural problems are rejected earlier by [`PanelDataset::new`]; this is
/// purely a diagnostic and never fails.
pub fn validate_dataset(d: &PanelDataset) -> ValidationReport {
    let q = d.n_covariates();
    let mut by_group: BTreeMap<ExposureGroup, Vec<&UnitRecord>> = BTreeMap::new();
    for unit in d.units() {
        by_group.entry(unit.group).or_default().push(unit);
    }
    let mut groups = Vec::with_capacity(3);
    let mut missing_groups = Vec::new();
    for group in ExposureGroup::ALL {
        let members = by_group.get(&group).map(Vec::as_slice).unwrap_or(&[]);
        if members.is_empty() {
            missing_groups.push(group);
        }
        let covariates = (0..q)
            .map(|j| summarize(members.iter().map(|u| u.covariates[j])))
            .collect();
        groups.push(GroupSummary {
            group,
            count: members.len(),
            covariates,
        });
    }
    ValidationReport {
        n_units: d.n_units(),
        groups,
        missing_groups,
    }
}

fn summarize(values: impl Iterator<Item = f64>) -> CovariateSummary {
    let values: Vec<f64> = values.collect();
    if values.is_empty() {
        return CovariateSummary {
            mean: f64::NAN,
            sd: f64::NAN,
            min: f64::NAN,
            max: f64::NAN,
        };
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    CovariateSummary {
        mean,
        sd,
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn unit(id: &str, group: ExposureGroup, x: &[f64], y: &[f64]) -> UnitRecord {
        UnitRecord {
            id: id.into(),
            group,
            covariates: x.to_vec(),
            outcomes: y.to_vec(),
        }
    }

    fn balanced(per_group: usize) -> PanelDataset {
        let mut units = Vec::new();
        for g in ExposureGroup::ALL {
            for i in 0..per_group {
                units.push(unit(&format!("{g}{i}"), g, &[i as f64], &[0.0, 1.0]));
            }
        }
        PanelDataset::new(units, vec![0, 1]).unwrap()
    }

    #[test]
    fn balanced_dataset_passes() {
        let report = validate_dataset(&balanced(5));
        assert!(report.passed());
        for g in ExposureGroup::ALL {
            assert_eq!(report.count(g), 5);
        }
        assert_eq!(report.groups[0].covariates[0].mean, 2.0);
    }

    #[test]
    fn missing_isolated_group_is_flagged() {
        let units = vec![
            unit("a", ExposureGroup::Treated, &[0.0], &[0.0, 1.0]),
            unit("b", ExposureGroup::NeighborControl, &[0.0], &[0.0, 1.0]),
        ];
        let d = PanelDataset::new(units, vec![0, 1]).unwrap();
        let report = validate_dataset(&d);
        assert!(!report.passed());
        assert_eq!(report.missing_groups, vec![ExposureGroup::IsolatedControl]);
    }

    #[test]
    fn ragged_covariates_are_a_structural_error() {
        let units = vec![
            unit("a", ExposureGroup::Treated, &[0.0, 1.0], &[0.0, 1.0]),
            unit("b", ExposureGroup::NeighborControl, &[0.0], &[0.0, 1.0]),
        ];
        let err = PanelDataset::new(units, vec![0, 1]).unwrap_err();
        assert!(matches!(err, Error::Structure(_)), "{err}");
    }

    #[test]
    fn missing_outcome_is_rejected() {
        let units = vec![unit("a", ExposureGroup::Treated, &[0.0], &[0.0, f64::NAN])];
        assert!(matches!(
            PanelDataset::new(units, vec![0, 1]),
            Err(Error::Structure(_))
        ));
    }

    #[test]
    fn time_grid_must_be_symmetric() {
        let units = vec![unit("a", ExposureGroup::Treated, &[0.0], &[0.0, 1.0, 2.0])];
        assert!(PanelDataset::new(units.clone(), vec![-1, 0, 1]).is_err());
        let units = vec![unit(
            "a",
            ExposureGroup::Treated,
            &[0.0],
            &[0.0, 1.0, 2.0, 3.0],
        )];
        let d = PanelDataset::new(units, vec![-1, 0, 1, 2]).unwrap();
        assert_eq!(d.periods(), 2);
        assert_eq!(d.difference_pairs(), vec![(-1, 1), (0, 2)]);
        assert_eq!(d.outcome_difference(-1, 1).unwrap(), vec![2.0]);
    }

    #[test]
    fn group_codes_round_trip() {
        for g in ExposureGroup::ALL {
            assert_eq!(g.code().parse::<ExposureGroup>().unwrap(), g);
        }
        assert!("TT".parse::<ExposureGroup>().is_err());
    }
}
