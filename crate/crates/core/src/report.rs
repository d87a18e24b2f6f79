//! JSON report documents written by the command-line tool.
//!
//! Reports are deterministic functions of their inputs apart from
//! `metadata.timestamp`. Numbers are written in shortest round-trip form;
//! non-finite values become `null`.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::analysis::{AnalysisOutput, PositivityDiagnostic};
use crate::datamodel::{ExposureGroup, FeatureMap, ValidationReport};
use crate::error::Result;
use crate::estimators::EffectEstimate;
use crate::nuisance::{OutcomeModel, PropensityModel};
use crate::simulation::MonteCarloReport;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub timestamp: String,
    pub command: String,
    /// Effective settings after merging defaults, config file and flags.
    pub config: serde_json::Value,
}

impl Metadata {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Self {
            tool: "spillover-did",
            version: VERSION,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            command: command.to_string(),
            config,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Coefficient {
    pub term: String,
    pub estimate: f64,
}

fn coefficient_table(map: &FeatureMap, values: &[f64]) -> Vec<Coefficient> {
    map.term_names()
        .into_iter()
        .zip(values)
        .map(|(term, &estimate)| Coefficient { term, estimate })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct PropensitySummary {
    pub feature_map: FeatureMap,
    pub reference: ExposureGroup,
    pub converged: bool,
    pub iterations: usize,
    pub log_likelihood: f64,
    pub max_abs_score: f64,
    pub floor: Option<f64>,
    pub treated: Vec<Coefficient>,
    pub neighbor: Vec<Coefficient>,
}

impl From<&PropensityModel> for PropensitySummary {
    fn from(m: &PropensityModel) -> Self {
        Self {
            feature_map: m.feature_map.clone(),
            reference: ExposureGroup::IsolatedControl,
            converged: m.converged,
            iterations: m.iterations,
            log_likelihood: m.log_likelihood,
            max_abs_score: m.max_abs_score,
            floor: m.floor,
            treated: coefficient_table(&m.feature_map, &m.coefficients[0]),
            neighbor: coefficient_table(&m.feature_map, &m.coefficients[1]),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OutcomeModelSummary {
    pub group: ExposureGroup,
    pub t_pre: i32,
    pub t_post: i32,
    pub feature_map: FeatureMap,
    pub n_fit: usize,
    pub coefficients: Vec<Coefficient>,
}

impl From<&OutcomeModel> for OutcomeModelSummary {
    fn from(m: &OutcomeModel) -> Self {
        Self {
            group: m.group,
            t_pre: m.pair.0,
            t_post: m.pair.1,
            feature_map: m.feature_map.clone(),
            n_fit: m.n_fit,
            coefficients: coefficient_table(&m.feature_map, &m.coefficients),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub propensity: Option<PropensitySummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub outcome_models: Vec<OutcomeModelSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub positivity: Vec<PositivityDiagnostic>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument {
    pub metadata: Metadata,
    pub estimates: Vec<EffectEstimate>,
    pub diagnostics: Diagnostics,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub monte_carlo: Vec<MonteCarloReport>,
}

impl ReportDocument {
    pub fn for_analysis(metadata: Metadata, out: &AnalysisOutput) -> Self {
        let outcome_models = out
            .outcome_models
            .iter()
            .flat_map(|m| [(&m.neighbor).into(), (&m.isolated).into()])
            .collect();
        Self {
            metadata,
            estimates: out.estimates.iter().map(|e| e.summary).collect(),
            diagnostics: Diagnostics {
                validation: Some(out.validation.clone()),
                propensity: out.propensity.as_ref().map(Into::into),
                outcome_models,
                positivity: out.positivity.clone(),
                warnings: out.warnings.clone(),
            },
            monte_carlo: Vec::new(),
        }
    }

    pub fn for_simulation(metadata: Metadata, reports: Vec<MonteCarloReport>) -> Self {
        let warnings = reports
            .iter()
            .filter(|r| !r.failures.is_empty())
            .map(|r| {
                format!(
                    "scenario {} n = {}: {} of {} replications failed",
                    r.spec.scenario,
                    r.spec.n,
                    r.failures.len(),
                    r.spec.reps
                )
            })
            .collect();
        Self {
            metadata,
            estimates: Vec::new(),
            diagnostics: Diagnostics {
                warnings,
                ..Diagnostics::default()
            },
            monte_carlo: reports,
        }
    }

    pub fn to_writer(&self, mut w: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n")?;
        Ok(())
    }

    pub fn write_to_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        self.to_writer(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

/// Estimates as a flat table: estimand, estimator, time_index, point, se,
/// ci_low, ci_high, n.
pub fn write_estimates_csv(estimates: &[EffectEstimate], writer: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record([
        "estimand",
        "estimator",
        "time_index",
        "point",
        "se",
        "ci_low",
        "ci_high",
        "n",
    ])?;
    for e in estimates {
        wtr.write_record([
            e.estimand.name(),
            e.estimator.name().to_string(),
            e.time_index.map(|t| t.to_string()).unwrap_or_default(),
            e.point.to_string(),
            e.se.to_string(),
            e.ci_low.to_string(),
            e.ci_high.to_string(),
            e.n.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
