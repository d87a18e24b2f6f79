use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use super::dgp::{generate_panel, DgpParams};
use super::oracle::{true_estimands, TrueEstimands, DEFAULT_ORACLE_N};
use crate::analysis::{analyze, AnalysisConfig};
use crate::datamodel::{FeatureMap, Term};
use crate::error::{Error, Result};
use crate::estimators::{AttComparison, Contrast, Estimand, Estimator, Z_95};

/// Propensity-model specification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PsSpec {
    /// `1 + x1 + x2`.
    Correct,
    /// `1 + exp(x2)`: drops x1 and replaces x2 by its exponential.
    MisspecifiedC,
}

impl PsSpec {
    pub fn feature_map(self) -> FeatureMap {
        match self {
            PsSpec::Correct => FeatureMap::linear(2),
            PsSpec::MisspecifiedC => FeatureMap::with_intercept([Term::Exp(1)]),
        }
    }
}

/// Outcome-difference model specification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OmSpec {
    /// `1 + x1 + x2 + x2^2`, which nests every group's trend.
    Correct,
    /// Intercept only: drops the covariate-by-period terms and the squared
    /// spillover modifier.
    MisspecifiedB,
}

impl OmSpec {
    pub fn feature_map(self) -> FeatureMap {
        match self {
            OmSpec::Correct => {
                FeatureMap::with_intercept([Term::Linear(0), Term::Linear(1), Term::Square(1)])
            }
            OmSpec::MisspecifiedB => FeatureMap::intercept_only(),
        }
    }
}

/// (a) both models correct, (b) outcome model wrong, (c) propensity model wrong.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    A,
    B,
    C,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::A, Scenario::B, Scenario::C];

    pub fn ps_spec(self) -> PsSpec {
        match self {
            Scenario::C => PsSpec::MisspecifiedC,
            _ => PsSpec::Correct,
        }
    }

    pub fn om_spec(self) -> OmSpec {
        match self {
            Scenario::B => OmSpec::MisspecifiedB,
            _ => OmSpec::Correct,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Scenario::A => "a",
            Scenario::B => "b",
            Scenario::C => "c",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" => Ok(Scenario::A),
            "b" => Ok(Scenario::B),
            "c" => Ok(Scenario::C),
            other => Err(Error::Config(format!(
                "unknown scenario {other:?}, expected a, b or c"
            ))),
        }
    }
}

impl Serialize for Scenario {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

/// One Monte Carlo cell: a DGP, a nuisance specification and a sample size.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub dgp: DgpParams,
    pub contrasts: Vec<Contrast>,
    pub estimators: Vec<Estimator>,
    pub oracle_n: usize,
    /// Worker threads; 0 lets the pool decide.
    #[serde(skip)]
    pub threads: usize,
}

impl ScenarioSpec {
    /// AOTT by DR with the default oracle size.
    pub fn new(scenario: Scenario, dgp: DgpParams, n: usize, reps: usize, seed: u64) -> Self {
        Self {
            scenario,
            n,
            reps,
            seed,
            dgp,
            contrasts: vec![Contrast::Aott],
            estimators: vec![Estimator::Dr],
            oracle_n: DEFAULT_ORACLE_N,
            threads: 0,
        }
    }

    pub fn ps_map(&self) -> FeatureMap {
        self.scenario.ps_spec().feature_map()
    }

    pub fn om_map(&self) -> FeatureMap {
        self.scenario.om_spec().feature_map()
    }

    /// Reported estimands: per-contrast for two periods, time averages otherwise.
    pub fn estimands(&self) -> Vec<Estimand> {
        self.contrasts
            .iter()
            .map(|&c| {
                if self.dgp.periods > 1 {
                    Estimand::TimeAvg(c)
                } else {
                    Estimand::Effect(c)
                }
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        self.dgp.validate()?;
        if self.n == 0 || self.reps == 0 {
            return Err(Error::Config("n and reps must both be positive".into()));
        }
        if self.contrasts.is_empty() || self.estimators.is_empty() {
            return Err(Error::Config("no estimands or estimators requested".into()));
        }
        Ok(())
    }
}

/// Aggregates for one (estimand, estimator) over the successful replications.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloResult {
    pub estimand: Estimand,
    pub estimator: Estimator,
    pub n: usize,
    pub truth: f64,
    /// Mean estimate minus truth.
    pub bias: f64,
    /// Standard deviation of the estimates across replications.
    pub mc_se: f64,
    /// Mean influence-function standard error.
    pub mean_if_se: f64,
    /// Share of `point ± 1.96 se` intervals covering the truth.
    pub coverage_if: f64,
    /// Share of `point ± 1.96 mc_se` intervals covering the truth.
    pub coverage_emp: f64,
    pub reps_used: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationFailure {
    pub rep: usize,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloReport {
    pub spec: ScenarioSpec,
    pub truths: TrueEstimands,
    pub results: Vec<MonteCarloResult>,
    pub failures: Vec<ReplicationFailure>,
}

pub fn run_monte_carlo(spec: &ScenarioSpec) -> Result<MonteCarloReport> {
    spec.validate()?;
    let truths = true_estimands(&spec.dgp, spec.oracle_n, spec.seed)?;
    run_monte_carlo_with_truth(spec, &truths)
}

/// Same as [`run_monte_carlo`] with precomputed truths, so several cells
/// sharing a DGP need only one oracle pass.
///
/// Replication `r` draws from stream `r` of a generator seeded with
/// `spec.seed`, so results do not depend on scheduling or thread count.
pub fn run_monte_carlo_with_truth(
    spec: &ScenarioSpec,
    truths: &TrueEstimands,
) -> Result<MonteCarloReport> {
    spec.validate()?;
    let estimands = spec.estimands();
    let mut targets = Vec::new();
    for &estimand in &estimands {
        for &estimator in &spec.estimators {
            let truth = truths
                .value(estimand, None)
                .ok_or_else(|| Error::Config(format!("no true value available for {estimand}")))?;
            targets.push((estimand, estimator, truth));
        }
    }
    let cfg = AnalysisConfig {
        ps_map: spec.ps_map(),
        om_map: spec.om_map(),
        contrasts: spec.contrasts.clone(),
        estimators: spec.estimators.clone(),
        rhos: Vec::new(),
        att_comparison: AttComparison::default(),
        ps_floor: None,
    };

    let run_rep = |rep: usize| -> Result<Vec<(f64, f64)>> {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(rep as u64);
        let d = generate_panel(&spec.dgp, spec.n, &mut rng)?;
        let out = analyze(&d, &cfg)?;
        if let Some(m) = &out.propensity {
            if !m.converged {
                return Err(Error::Singular(format!(
                    "propensity fit did not converge (max |score| = {:e})",
                    m.max_abs_score
                )));
            }
        }
        targets
            .iter()
            .map(|(estimand, estimator, _)| {
                out.estimates
                    .iter()
                    .find(|e| {
                        e.summary.estimand == *estimand
                            && e.summary.estimator == *estimator
                            && (spec.dgp.periods > 1 || e.summary.time_index.is_none())
                    })
                    .map(|e| (e.point(), e.se()))
                    .ok_or_else(|| Error::Config(format!("{estimand} {estimator} not computed")))
            })
            .collect()
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))?;
    let outcomes: Vec<Result<Vec<(f64, f64)>>> =
        pool.install(|| (0..spec.reps).into_par_iter().map(run_rep).collect());

    let mut failures = Vec::new();
    let mut draws: Vec<Vec<(f64, f64)>> = vec![Vec::with_capacity(spec.reps); targets.len()];
    for (rep, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(values) => {
                for (slot, v) in draws.iter_mut().zip(values) {
                    slot.push(v);
                }
            }
            Err(e) => failures.push(ReplicationFailure {
                rep,
                message: e.to_string(),
            }),
        }
    }
    let results = targets
        .iter()
        .zip(&draws)
        .map(|(&(estimand, estimator, truth), values)| {
            summarize(estimand, estimator, spec.n, truth, values, failures.len())
        })
        .collect();
    Ok(MonteCarloReport {
        spec: spec.clone(),
        truths: truths.clone(),
        results,
        failures,
    })
}

fn summarize(
    estimand: Estimand,
    estimator: Estimator,
    n: usize,
    truth: f64,
    values: &[(f64, f64)],
    failed: usize,
) -> MonteCarloResult {
    let r = values.len() as f64;
    let mean = values.iter().map(|v| v.0).sum::<f64>() / r;
    let mc_se = if values.len() > 1 {
        (values.iter().map(|v| (v.0 - mean).powi(2)).sum::<f64>() / (r - 1.0)).sqrt()
    } else {
        f64::NAN
    };
    let mean_if_se = values.iter().map(|v| v.1).sum::<f64>() / r;
    let covered = |half: &dyn Fn(f64) -> f64| {
        values
            .iter()
            .filter(|v| (v.0 - truth).abs() <= half(v.1))
            .count() as f64
            / r
    };
    let coverage_if = covered(&|se| Z_95 * se);
    let coverage_emp = if mc_se.is_nan() {
        f64::NAN
    } else {
        covered(&|_| Z_95 * mc_se)
    };
    MonteCarloResult {
        estimand,
        estimator,
        n,
        truth,
        bias: mean - truth,
        mc_se,
        mean_if_se,
        coverage_if,
        coverage_emp,
        reps_used: values.len(),
        failed,
    }
}

/// Header of the results table.
pub const RESULT_COLUMNS: [&str; 9] = [
    "estimand",
    "estimator",
    "n",
    "bias",
    "mc_se",
    "mean_if_se",
    "coverage_if",
    "coverage_emp",
    "reps_used",
];

/// Writes results as CSV, numbers in shortest round-trip form.
pub fn write_results_csv(results: &[MonteCarloResult], writer: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(RESULT_COLUMNS)?;
    for r in results {
        wtr.write_record([
            r.estimand.name(),
            r.estimator.name().to_string(),
            r.n.to_string(),
            r.bias.to_string(),
            r.mc_se.to_string(),
            r.mean_if_se.to_string(),
            r.coverage_if.to_string(),
            r.coverage_emp.to_string(),
            r.reps_used.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
