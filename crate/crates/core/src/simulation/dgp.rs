//! Synthetic panels with covariate-dependent group assignment, treatment
//! effects on the treated and spillover onto neighbouring controls.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::datamodel::{ExposureGroup, PanelDataset, UnitRecord};
use crate::error::{Error, Result};
use crate::nuisance::ClassProbabilities;

/// Parameters of the data-generating process on the grid
/// `t = -(T-1), ..., T`. Vectors indexed by time hold one entry per grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DgpParams {
    pub periods: usize,
    pub covariate_corr: f64,
    pub error_corr: f64,
    /// Log-odds of Treated vs IsolatedControl: intercept, x1, x2.
    pub beta_treated: [f64; 3],
    /// Log-odds of NeighborControl vs IsolatedControl.
    pub beta_neighbor: [f64; 3],
    pub alpha_treated: f64,
    pub alpha_neighbor: f64,
    pub alpha_isolated: f64,
    pub gamma: Vec<f64>,
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    pub theta01: f64,
    pub theta10: f64,
    pub eta01: Vec<f64>,
    pub eta10: Vec<f64>,
    /// `c` in the spillover modifier `(1 + 0.5 x1) + (1 - c x2^2)`.
    pub spill_square_coef: f64,
}

impl DgpParams {
    /// Two-period design, `theta01 = 0.5`, `theta10 = -1.0`.
    pub fn two_period() -> Self {
        Self::two_period_with(0.5, -1.0)
    }

    pub fn two_period_with(theta01: f64, theta10: f64) -> Self {
        Self {
            periods: 1,
            covariate_corr: 0.3,
            error_corr: 0.2,
            beta_treated: [-0.5, 1.0, 0.5],
            beta_neighbor: [0.3, -0.5, -0.5],
            alpha_treated: 0.5,
            alpha_neighbor: -1.0,
            alpha_isolated: 0.0,
            gamma: vec![1.0, 1.5],
            lambda1: vec![0.5, -0.5],
            lambda2: vec![0.5, 1.0],
            theta01,
            theta10,
            eta01: vec![0.0, 1.0],
            eta10: vec![0.0, 1.0],
            spill_square_coef: 2.0,
        }
    }

    /// Thirteen pre and thirteen post periods (`t = -12, ..., 13`).
    pub fn multi_period(theta01: f64, theta10: f64) -> Self {
        let times: Vec<i32> = (-12..=13).collect();
        // Piecewise-linear schedules: six 0.1 steps to a turning point, six back.
        let tent = |start: f64, step: f64, k: i32| start + step * f64::from(6 - (k - 6).abs());
        let mut lambda1 = Vec::with_capacity(26);
        let mut lambda2 = Vec::with_capacity(26);
        for &t in &times {
            if t <= 0 {
                let k = t + 12;
                lambda1.push(round1(tent(-0.3, 0.1, k)));
                lambda2.push(round1(tent(0.3, -0.1, k)));
            } else {
                let k = t - 1;
                lambda1.push(round1(tent(-0.2, 0.1, k)));
                lambda2.push(round1(tent(0.0, -0.1, k)));
            }
        }
        Self {
            periods: 13,
            gamma: times
                .iter()
                .map(|&t| round1(-1.0 + 0.1 * f64::from(t + 12)))
                .collect(),
            lambda1,
            lambda2,
            theta01,
            theta10,
            eta01: times
                .iter()
                .map(|&t| {
                    if t > 0 {
                        1.0 - f64::from(t - 1) / 12.0
                    } else {
                        0.0
                    }
                })
                .collect(),
            eta10: times
                .iter()
                .map(|&t| match t {
                    t if t <= 0 => 0.0,
                    1 => 0.8,
                    2 => 0.9,
                    t => 1.0 - f64::from(t - 1) / 10.0,
                })
                .collect(),
            spill_square_coef: 1.0,
            ..Self::two_period_with(theta01, theta10)
        }
    }

    pub fn time_points(&self) -> Vec<i32> {
        let t = self.periods as i32;
        (-(t - 1)..=t).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let len = 2 * self.periods;
        if self.periods == 0 {
            return Err(Error::Config("the design needs at least one period".into()));
        }
        for (name, v) in [
            ("gamma", &self.gamma),
            ("lambda1", &self.lambda1),
            ("lambda2", &self.lambda2),
            ("eta01", &self.eta01),
            ("eta10", &self.eta10),
        ] {
            if v.len() != len {
                return Err(Error::Config(format!(
                    "{name} has {} entries, expected {len}",
                    v.len()
                )));
            }
        }
        for (name, r) in [
            ("covariate_corr", self.covariate_corr),
            ("error_corr", self.error_corr),
        ] {
            if !(r > -1.0 && r < 1.0) {
                return Err(Error::Config(format!(
                    "{name} must lie in (-1, 1), got {r}"
                )));
            }
        }
        Ok(())
    }

    /// Treatment effect on a treated unit at grid position `k`.
    pub fn treated_effect(&self, x: [f64; 2], k: usize) -> f64 {
        self.theta10 * self.eta10[k] * treated_modifier(x)
    }

    /// Spillover onto a unit with neighbourhood exposure at grid position `k`.
    pub fn spillover_effect(&self, x: [f64; 2], k: usize) -> f64 {
        self.theta01 * self.eta01[k] * self.spill_modifier(x)
    }

    pub(crate) fn spill_modifier(&self, x: [f64; 2]) -> f64 {
        (1.0 + 0.5 * x[0]) + (1.0 - self.spill_square_coef * x[1] * x[1])
    }

    pub fn group_probabilities(&self, x: [f64; 2]) -> ClassProbabilities {
        let lin = |b: &[f64; 3]| b[0] + b[1] * x[0] + b[2] * x[1];
        ClassProbabilities::from_log_odds(lin(&self.beta_treated), lin(&self.beta_neighbor))
    }

    fn alpha(&self, g: ExposureGroup) -> f64 {
        match g {
            ExposureGroup::Treated => self.alpha_treated,
            ExposureGroup::NeighborControl => self.alpha_neighbor,
            ExposureGroup::IsolatedControl => self.alpha_isolated,
        }
    }
}

pub(crate) fn treated_modifier(x: [f64; 2]) -> f64 {
    1.0 - 0.5 * x[0]
}

fn round1(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

/// `min(max(-2, round(10 v) / 10), 2)`, ties away from zero.
pub fn discretize(v: f64) -> f64 {
    ((10.0 * v).round() / 10.0).clamp(-2.0, 2.0)
}

/// Draws covariates and exposure group. Consumes two normals and one uniform.
pub(crate) fn draw_covariates_and_group<R: Rng + ?Sized>(
    p: &DgpParams,
    rng: &mut R,
) -> ([f64; 2], ExposureGroup) {
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    let r = p.covariate_corr;
    let x = [
        discretize(z1),
        discretize(r * z1 + (1.0 - r * r).sqrt() * z2),
    ];
    let u: f64 = rng.random();
    let pr = p.group_probabilities(x);
    let group = if u < pr.treated {
        ExposureGroup::Treated
    } else if u < pr.treated + pr.neighbor {
        ExposureGroup::NeighborControl
    } else {
        ExposureGroup::IsolatedControl
    };
    (x, group)
}

/// Observed panel of `n` units. Per unit the draw order is: two covariate
/// normals, one group uniform, then two error normals for each difference
/// pair `(t - T, t)`, `t = 1..T`.
pub fn generate_panel<R: Rng + ?Sized>(
    p: &DgpParams,
    n: usize,
    rng: &mut R,
) -> Result<PanelDataset> {
    p.validate()?;
    if n == 0 {
        return Err(Error::Config("cannot generate an empty panel".into()));
    }
    let t_count = p.periods;
    let r = p.error_corr;
    let r_comp = (1.0 - r * r).sqrt();
    let mut units = Vec::with_capacity(n);
    let mut eps = vec![0.0; 2 * t_count];
    for i in 0..n {
        let (x, group) = draw_covariates_and_group(p, rng);
        // Grid position j pairs with j + T.
        for j in 0..t_count {
            let e1: f64 = rng.sample(StandardNormal);
            let e2: f64 = rng.sample(StandardNormal);
            eps[j] = e1;
            eps[j + t_count] = r * e1 + r_comp * e2;
        }
        let alpha = p.alpha(group);
        let outcomes = (0..2 * t_count)
            .map(|k| {
                let y00 = p.gamma[k] + p.lambda1[k] * x[0] + p.lambda2[k] * x[1] + alpha + eps[k];
                match group {
                    ExposureGroup::Treated => y00 + p.treated_effect(x, k),
                    ExposureGroup::NeighborControl => y00 + p.spillover_effect(x, k),
                    ExposureGroup::IsolatedControl => y00,
                }
            })
            .collect();
        units.push(UnitRecord {
            id: (i + 1).to_string(),
            group,
            covariates: x.to_vec(),
            outcomes,
        });
    }
    PanelDataset::new(units, p.time_points())
}

/// Two-period panel; `p.periods` must be 1.
pub fn gen_two_period<R: Rng + ?Sized>(
    p: &DgpParams,
    n: usize,
    rng: &mut R,
) -> Result<PanelDataset> {
    if p.periods != 1 {
        return Err(Error::Config(format!(
            "two-period generation needs periods = 1, got {}",
            p.periods
        )));
    }
    generate_panel(p, n, rng)
}

/// Multi-period panel; `p.periods` must exceed 1.
pub fn gen_multi_period<R: Rng + ?Sized>(
    p: &DgpParams,
    n: usize,
    rng: &mut R,
) -> Result<PanelDataset> {
    if p.periods < 2 {
        return Err(Error::Config(format!(
            "multi-period generation needs periods > 1, got {}",
            p.periods
        )));
    }
    generate_panel(p, n, rng)
}
