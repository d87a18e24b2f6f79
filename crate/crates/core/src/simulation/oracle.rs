//! Population values of the estimands by large-sample averaging.
//!
//! Both effects factor as `theta * eta_t * f(x)`, so a single pass over the
//! oracle sample collecting moments of the two modifiers `f10(x) = 1 - 0.5 x1`
//! and `f01(x)` serves every period.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::dgp::{draw_covariates_and_group, treated_modifier, DgpParams};
use crate::datamodel::ExposureGroup;
use crate::error::{Error, Result};
use crate::estimators::{Contrast, Estimand};

/// Stream reserved for the oracle so it never overlaps a replication stream.
const ORACLE_STREAM: u64 = u64::MAX;

pub const DEFAULT_ORACLE_N: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrueValue {
    pub value: f64,
    /// Monte Carlo standard error of the oracle average.
    pub se: f64,
}

/// Truths for one post period, or for the average over post periods.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodTruth {
    /// Post period `t`, `None` for the time average.
    pub t: Option<usize>,
    pub att: TrueValue,
    pub delta: TrueValue,
    pub atn: TrueValue,
    pub offset: TrueValue,
    pub aott: TrueValue,
}

impl PeriodTruth {
    pub fn get(&self, c: Contrast) -> TrueValue {
        match c {
            Contrast::Delta => self.delta,
            Contrast::Att => self.att,
            Contrast::Atn => self.atn,
            Contrast::Offset => self.offset,
            Contrast::Aott => self.aott,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrueEstimands {
    pub oracle_n: usize,
    pub seed: u64,
    pub per_period: Vec<PeriodTruth>,
    pub time_average: PeriodTruth,
}

impl TrueEstimands {
    /// Two-period truths (the single post period).
    pub fn two_period(&self) -> &PeriodTruth {
        &self.per_period[0]
    }

    /// Truth for `estimand`; `t` selects a post period for per-period
    /// estimands and is ignored for time averages.
    pub fn value(&self, estimand: Estimand, t: Option<usize>) -> Option<f64> {
        let period = |t: Option<usize>| match t {
            None if self.per_period.len() == 1 => self.per_period.first(),
            None => None,
            Some(t) => self.per_period.get(t.checked_sub(1)?),
        };
        match estimand {
            Estimand::Effect(c) => period(t).map(|p| p.get(c).value),
            Estimand::AttRho(rho) => period(t).map(|p| p.att.value + rho * p.delta.value),
            Estimand::TimeAvg(c) => Some(self.time_average.get(c).value),
        }
    }
}

/// Running first and second moments.
#[derive(Debug, Default, Clone, Copy)]
struct Moments {
    count: f64,
    a: f64,
    b: f64,
    aa: f64,
    bb: f64,
    ab: f64,
}

impl Moments {
    fn push(&mut self, a: f64, b: f64) {
        self.count += 1.0;
        self.a += a;
        self.b += b;
        self.aa += a * a;
        self.bb += b * b;
        self.ab += a * b;
    }

    /// Mean and standard error of `ca * a + cb * b`.
    fn combination(&self, ca: f64, cb: f64) -> TrueValue {
        let n = self.count;
        let (ma, mb) = (self.a / n, self.b / n);
        let mean = ca * ma + cb * mb;
        let second = ca * ca * self.aa / n + cb * cb * self.bb / n + 2.0 * ca * cb * self.ab / n;
        let var = (second - mean * mean).max(0.0) * n / (n - 1.0);
        TrueValue {
            value: mean,
            se: (var / n).sqrt(),
        }
    }
}

/// Population ATT, delta, ATN, offset and AOTT for every post period and
/// their time average, from `oracle_n` draws of covariates and groups.
pub fn true_estimands(p: &DgpParams, oracle_n: usize, seed: u64) -> Result<TrueEstimands> {
    p.validate()?;
    if oracle_n < 2 {
        return Err(Error::Config("the oracle needs at least two draws".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(ORACLE_STREAM);
    // Treated: (f10, f01). Neighbour controls: (f01, 0).
    let mut treated = Moments::default();
    let mut neighbor = Moments::default();
    for _ in 0..oracle_n {
        let (x, group) = draw_covariates_and_group(p, &mut rng);
        match group {
            ExposureGroup::Treated => treated.push(treated_modifier(x), p.spill_modifier(x)),
            ExposureGroup::NeighborControl => neighbor.push(p.spill_modifier(x), 0.0),
            ExposureGroup::IsolatedControl => {}
        }
    }
    if treated.count < 2.0 || neighbor.count < 2.0 {
        return Err(Error::Positivity(
            "oracle sample has too few treated or neighbour-control units".into(),
        ));
    }

    let truth = |t: Option<usize>, e10: f64, e01: f64| {
        let (c10, c01) = (p.theta10 * e10, p.theta01 * e01);
        let delta = treated.combination(0.0, c01);
        PeriodTruth {
            t,
            att: treated.combination(c10, 0.0),
            delta,
            atn: neighbor.combination(c01, 0.0),
            offset: TrueValue {
                value: -delta.value,
                se: delta.se,
            },
            aott: treated.combination(c10, c01),
        }
    };
    let t_count = p.periods;
    let per_period: Vec<PeriodTruth> = (1..=t_count)
        .map(|t| {
            let k = t_count + t - 1;
            truth(Some(t), p.eta10[k], p.eta01[k])
        })
        .collect();
    let mean_eta = |v: &[f64]| v[t_count..].iter().sum::<f64>() / t_count as f64;
    let time_average = truth(None, mean_eta(&p.eta10), mean_eta(&p.eta01));
    Ok(TrueEstimands {
        oracle_n,
        seed,
        per_period,
        time_average,
    })
}
