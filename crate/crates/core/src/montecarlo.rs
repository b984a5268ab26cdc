//! Monte Carlo simulation of calibration campaigns.
//!
//! A trial draws noisy measurements of a "true" robot, identifies its
//! parameters starting from the nominal values, and records the remaining
//! position error at the test pose. Trial `k` of a campaign uses
//! [`stream_rng`]`(seed, k)`, so results do not depend on scheduling.

use nalgebra::{DMatrix, DVector, Vector3};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::identification::{identify, IdentifySettings, Measurement, MeasurementSet};
use crate::kinematics::{forward_position, forward_position_unchecked, KinematicModel, Unit};
use crate::metrics::rho0_squared;
use crate::optimizer::{sample_plan, stream_rng, DesignProblem};
use crate::plan::{Plan, TestPose};

/// Largest tolerated fraction of trials that fail identification.
pub const MAX_FAILURE_RATE: f64 = 0.01;
pub const DEFAULT_TRIALS: usize = 10_000;

/// Noisy measurements of the true robot: one record per unit of multiplicity,
/// with independent zero-mean Gaussian noise of standard deviation `sigma`
/// on each axis.
pub fn simulate_measurements<R: Rng + ?Sized>(
    model: &KinematicModel,
    true_params: &DVector<f64>,
    plan: &Plan,
    sigma: f64,
    rng: &mut R,
) -> Result<MeasurementSet> {
    let noise = Normal::new(0.0, sigma).map_err(|e| Error::input(format!("sigma: {e}")))?;
    plan.check_against(model)?;
    model.check_params(true_params)?;
    let records = plan
        .expanded()
        .map(|q| {
            let mut p = forward_position_unchecked(model, true_params.as_slice(), q);
            for k in 0..3 {
                p[k] += noise.sample(rng);
            }
            Measurement { q: q.clone(), p }
        })
        .collect();
    MeasurementSet::new(records)
}

/// Bounds of the uniform deviations applied to identifiable parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    /// Relative bound for length parameters (fraction of `|nominal|`).
    pub length_fraction: f64,
    /// Absolute bound for angular parameters (rad).
    pub angle: f64,
}

impl Default for Perturbation {
    fn default() -> Self {
        Self {
            length_fraction: 0.01,
            angle: 1f64.to_radians(),
        }
    }
}

/// Nominal parameters with every identifiable entry shifted uniformly within
/// the perturbation bounds. Fixed parameters are left alone.
pub fn perturb_parameters<R: Rng + ?Sized>(
    model: &KinematicModel,
    nominal: &DVector<f64>,
    perturbation: &Perturbation,
    rng: &mut R,
) -> Result<DVector<f64>> {
    model.check_params(nominal)?;
    let mut out = nominal.clone();
    for &i in model.identifiable_indices() {
        let bound = match model.parameters()[i].unit {
            Unit::Meter => perturbation.length_fraction * nominal[i].abs(),
            Unit::Radian => perturbation.angle,
        };
        if bound > 0.0 {
            out[i] += rng.random_range(-bound..=bound);
        }
    }
    Ok(out)
}

/// Where each trial's true parameters come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Truth {
    Fixed(DVector<f64>),
    /// Drawn afresh for every trial around the nominal parameters.
    Perturbed(Perturbation),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    /// Trial number within the campaign.
    pub index: usize,
    pub true_params: DVector<f64>,
    pub params_hat: DVector<f64>,
    /// `g(q0, params_hat) - g(q0, true_params)` (m).
    pub displacement: Vector3<f64>,
    /// Norm of `displacement` (m).
    pub test_pose_error: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Percentiles {
    pub p5: f64,
    pub p50: f64,
    pub p95: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CampaignStats {
    /// Trials that identified successfully and enter the statistics.
    pub n_trials: usize,
    pub n_failed: usize,
    pub mean_error: f64,
    /// Population standard deviation, so `rms^2 = mean^2 + std^2`.
    pub std_error: f64,
    pub rms_error: f64,
    pub percentiles: Percentiles,
}

impl CampaignStats {
    pub fn from_errors(errors: &[f64], n_failed: usize) -> Result<Self> {
        if errors.is_empty() {
            return Err(Error::input("no successful trials to summarize"));
        }
        let n = errors.len() as f64;
        let mean = errors.iter().sum::<f64>() / n;
        let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
        let ms = errors.iter().map(|e| e * e).sum::<f64>() / n;
        let mut sorted = errors.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self {
            n_trials: errors.len(),
            n_failed,
            mean_error: mean,
            std_error: var.sqrt(),
            rms_error: ms.sqrt(),
            percentiles: Percentiles {
                p5: percentile(&sorted, 5.0),
                p50: percentile(&sorted, 50.0),
                p95: percentile(&sorted, 95.0),
            },
        })
    }

    pub fn failure_rate(&self) -> f64 {
        self.n_failed as f64 / (self.n_trials + self.n_failed) as f64
    }
}

/// Linear interpolation between closest ranks of a sorted sample.
fn percentile(sorted: &[f64], pct: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * pct / 100.0;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Campaign {
    pub stats: CampaignStats,
    /// Successful trials in trial order.
    pub trials: Vec<TrialResult>,
}

impl Campaign {
    /// Sample mean and covariance (divisor `n - 1`) of the identifiable
    /// parameter errors `params_hat - true_params`.
    pub fn parameter_error_moments(&self, model: &KinematicModel) -> (DVector<f64>, DMatrix<f64>) {
        let idx = model.identifiable_indices();
        let n = self.trials.len() as f64;
        let errs: Vec<DVector<f64>> = self
            .trials
            .iter()
            .map(|t| {
                DVector::from_iterator(
                    idx.len(),
                    idx.iter().map(|&i| t.params_hat[i] - t.true_params[i]),
                )
            })
            .collect();
        let mean = errs.iter().fold(DVector::zeros(idx.len()), |a, e| a + e) / n;
        let cov = errs
            .iter()
            .fold(DMatrix::zeros(idx.len(), idx.len()), |a, e| {
                let d = e - &mean;
                a + &d * d.transpose()
            })
            / (n - 1.0);
        (mean, cov)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignSpec<'a> {
    pub model: &'a KinematicModel,
    pub nominal: &'a DVector<f64>,
    pub truth: Truth,
    pub plan: &'a Plan,
    pub test_pose: &'a TestPose,
    pub sigma: f64,
    pub n_trials: usize,
    pub seed: u64,
    pub identify: IdentifySettings,
}

fn run_trial(spec: &CampaignSpec<'_>, k: usize) -> Result<TrialResult> {
    let mut rng = stream_rng(spec.seed, k as u64);
    let truth = match &spec.truth {
        Truth::Fixed(p) => p.clone(),
        Truth::Perturbed(b) => perturb_parameters(spec.model, spec.nominal, b, &mut rng)?,
    };
    let data = simulate_measurements(spec.model, &truth, spec.plan, spec.sigma, &mut rng)?;
    let id = identify(spec.model, spec.nominal, &data, spec.identify)?;
    let q0 = &spec.test_pose.q0;
    let err = forward_position_unchecked(spec.model, id.params.as_slice(), q0)
        - forward_position_unchecked(spec.model, truth.as_slice(), q0);
    Ok(TrialResult {
        index: k,
        true_params: truth,
        params_hat: id.params,
        displacement: err,
        test_pose_error: err.norm(),
        converged: true,
    })
}

/// Runs `n_trials` independent calibrations and summarizes the test-pose
/// error. Fails if more than [`MAX_FAILURE_RATE`] of the trials cannot be
/// identified.
pub fn run_campaign(spec: &CampaignSpec<'_>) -> Result<Campaign> {
    if spec.n_trials == 0 {
        return Err(Error::input("n_trials must be at least 1"));
    }
    spec.plan.check_against(spec.model)?;
    forward_position(spec.model, spec.nominal, &spec.test_pose.q0)?;
    if let Truth::Fixed(p) = &spec.truth {
        spec.model.check_params(p)?;
    }
    let outcomes: Vec<Result<TrialResult>> = (0..spec.n_trials)
        .into_par_iter()
        .map(|k| run_trial(spec, k))
        .collect();
    let mut trials = Vec::with_capacity(outcomes.len());
    let mut failed = 0;
    for o in outcomes {
        match o {
            Ok(t) => trials.push(t),
            Err(e) if e.is_numerical_failure() => failed += 1,
            Err(e) => return Err(e),
        }
    }
    if failed as f64 > MAX_FAILURE_RATE * spec.n_trials as f64 || trials.is_empty() {
        return Err(Error::CampaignFailed {
            failed,
            trials: spec.n_trials,
        });
    }
    let errors: Vec<f64> = trials.iter().map(|t| t.test_pose_error).collect();
    Ok(Campaign {
        stats: CampaignStats::from_errors(&errors, failed)?,
        trials,
    })
}

/// Summary of `rho0` over random plans (m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineSummary {
    pub n_plans: usize,
    /// Plans with a singular information matrix, excluded from the extremes.
    pub n_singular: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

/// Scores `n_plans` random plans of the problem's size; plan `k` is drawn
/// from [`stream_rng`]`(seed, k)`.
pub fn random_plan_baseline(
    problem: &DesignProblem,
    n_plans: usize,
    seed: u64,
) -> Result<BaselineSummary> {
    if n_plans == 0 {
        return Err(Error::input("n_plans must be at least 1"));
    }
    let rho: Vec<f64> = (0..n_plans)
        .into_par_iter()
        .map(|k| {
            let plan = sample_plan(problem, &mut stream_rng(seed, k as u64))?;
            Ok(rho0_squared(
                problem.model(),
                problem.params(),
                &plan,
                problem.test_pose(),
                problem.sigma(),
            )?
            .sqrt())
        })
        .collect::<Result<_>>()?;
    let finite: Vec<f64> = rho.iter().copied().filter(|r| r.is_finite()).collect();
    let n_singular = n_plans - finite.len();
    if finite.is_empty() {
        return Err(Error::Infeasible(format!(
            "all {n_plans} random plans are singular"
        )));
    }
    Ok(BaselineSummary {
        n_plans,
        n_singular,
        min: finite.iter().copied().fold(f64::INFINITY, f64::min),
        max: finite.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean: finite.iter().sum::<f64>() / finite.len() as f64,
    })
}
