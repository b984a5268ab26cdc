//! TOML report layout. Every report starts with a `[manifest]` table.

use std::path::Path;

use serde::Serialize;

use crate::{CliError, CliResult};

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: &'static str,
    pub version: &'static str,
    pub inputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &'static str, seed: Option<u64>) -> Self {
        Self {
            command,
            version: env!("CARGO_PKG_VERSION"),
            inputs: Vec::new(),
            seed,
            outputs: Vec::new(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct PlanRow {
    pub q: Vec<f64>,
    pub q_deg: Vec<f64>,
    pub multiplicity: u32,
}

pub fn plan_rows(plan: &calplan::Plan) -> Vec<PlanRow> {
    plan.entries()
        .iter()
        .map(|e| PlanRow {
            q: e.q.clone(),
            q_deg: e.q.iter().map(|v| v.to_degrees()).collect(),
            multiplicity: e.multiplicity,
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct DesignSection {
    pub m: usize,
    pub sigma: f64,
    pub test_pose: Vec<f64>,
    pub rho0: f64,
    pub rho0_sq: f64,
    pub d_criterion: f64,
    pub a_criterion: f64,
    pub n_starts: usize,
    pub n_singular_starts: usize,
    pub n_refined: usize,
    pub best_start_rho0: f64,
    pub median_start_rho0: f64,
    pub local_evaluations: u64,
}

#[derive(Debug, Serialize)]
pub struct BaselineSection {
    pub n_plans: usize,
    pub n_singular: usize,
    pub min_rho0: f64,
    pub mean_rho0: f64,
    pub max_rho0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub improvement_vs_min_percent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub improvement_vs_mean_percent: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct DesignReport {
    pub manifest: Manifest,
    pub design: DesignSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineSection>,
    pub plan: Vec<PlanRow>,
}

#[derive(Debug, Serialize)]
pub struct ParameterStd {
    pub name: String,
    pub std: f64,
}

#[derive(Debug, Serialize)]
pub struct EvaluationSection {
    pub total_measurements: u64,
    pub sigma: f64,
    pub test_pose: Vec<f64>,
    pub rho0: f64,
    pub rho0_sq: f64,
    pub d_criterion: f64,
    pub a_criterion: f64,
    pub correlation_penalty: f64,
    pub information_det: f64,
    pub singular: bool,
}

#[derive(Debug, Serialize)]
pub struct EvaluateReport {
    pub manifest: Manifest,
    pub evaluation: EvaluationSection,
    pub parameter: Vec<ParameterStd>,
}

#[derive(Debug, Serialize)]
pub struct CampaignSection {
    pub sigma: f64,
    pub test_pose: Vec<f64>,
    pub truth: &'static str,
    pub n_trials: usize,
    pub n_failed: usize,
    pub mean_error: f64,
    pub std_error: f64,
    pub rms_error: f64,
    pub p5_error: f64,
    pub p50_error: f64,
    pub p95_error: f64,
    pub predicted_rho0: f64,
    pub rms_over_predicted: f64,
}

#[derive(Debug, Serialize)]
pub struct SimulateReport {
    pub manifest: Manifest,
    pub campaign: CampaignSection,
}

#[derive(Debug, Serialize)]
pub struct BaselineReport {
    pub manifest: Manifest,
    pub baseline: BaselineSection,
}

#[derive(Debug, Serialize)]
pub struct ScoreRow {
    pub name: String,
    pub rho0: f64,
    pub rho0_sq: f64,
    pub d_criterion: f64,
    pub a_criterion: f64,
}

#[derive(Debug, Serialize)]
pub struct PairRow {
    pub from: String,
    pub to: String,
    pub gain_percent: f64,
    pub reduction_percent: f64,
}

#[derive(Debug, Serialize)]
pub struct CompareReport {
    pub manifest: Manifest,
    pub plan: Vec<ScoreRow>,
    pub pair: Vec<PairRow>,
}

#[derive(Debug, Serialize)]
pub struct AnalyticRow {
    pub q20: f64,
    pub q20_deg: f64,
    pub m: usize,
    pub sigma: f64,
    pub s_star: f64,
    pub plan_q2: Vec<f64>,
    pub plan_q2_deg: Vec<f64>,
    pub rho0_sq: f64,
    pub rho_d_sq: f64,
    pub gain_percent: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_rho0_sq: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_gain_percent: Option<f64>,
    pub discrepancy: bool,
}

#[derive(Debug, Serialize)]
pub struct AnalyticReport {
    pub manifest: Manifest,
    pub row: Vec<AnalyticRow>,
}

#[derive(Debug, Serialize)]
pub struct IdentificationSection {
    pub records: usize,
    pub iterations: usize,
    pub final_residual_norm: f64,
    pub correction_history: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct IdentifiedParameter {
    pub name: String,
    pub identifiable: bool,
    pub nominal: f64,
    pub identified: f64,
    pub delta: f64,
}

#[derive(Debug, Serialize)]
pub struct IdentifyReport {
    pub manifest: Manifest,
    pub identification: IdentificationSection,
    pub parameter: Vec<IdentifiedParameter>,
}

#[derive(Debug, Serialize)]
pub struct ScreenedParameter {
    pub name: String,
    pub keep: bool,
    pub max_column_norm: f64,
}

#[derive(Debug, Serialize)]
pub struct NullCombination {
    pub relative_singular_value: f64,
    pub combination: String,
}

#[derive(Debug, Serialize)]
pub struct ScreenReport {
    pub manifest: Manifest,
    pub parameter: Vec<ScreenedParameter>,
    pub null_combination: Vec<NullCombination>,
}

/// Writes `text` to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn to_toml<T: Serialize>(report: &T) -> CliResult<String> {
    Ok(toml::to_string(report)?)
}
