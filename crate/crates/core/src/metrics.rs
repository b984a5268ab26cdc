//! Plan quality metrics: test-pose accuracy, D- and A-criteria, and
//! parameter screening.
//!
//! All metrics share the information matrix `M = sum mult_i J_i^T J_i`.
//! A plan whose `M` has eigenvalue ratio `lambda_min / lambda_max` below
//! [`SINGULAR_RATIO`] scores `+inf`, so optimizers can discard it by plain
//! comparison.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, NullDirection, Result};
use crate::identification::{information_matrix, InformationMatrix};
use crate::kinematics::jacobian::jacobian_unchecked;
use crate::kinematics::{identification_jacobian, Configuration, KinematicModel};
use crate::plan::{Plan, TestPose};

/// Eigenvalue ratio of `M` below which a plan is treated as singular.
pub const SINGULAR_RATIO: f64 = 1e-14;

/// Jacobian columns whose largest norm over all probes stays below this
/// value are considered to have no effect on the position.
pub const SCREEN_COLUMN_TOL: f64 = 1e-6;
/// Relative singular value below which a parameter combination is reported
/// as (nearly) unobservable during screening.
pub const SCREEN_RANK_TOL: f64 = 1e-6;

/// Eigen-decomposition of an information matrix, or `None` when singular.
pub(crate) struct Spectrum {
    values: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl Spectrum {
    pub(crate) fn of(info: &DMatrix<f64>) -> Option<Self> {
        if info.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let eig = SymmetricEigen::new(info.clone());
        let max = eig.eigenvalues.max();
        let min = eig.eigenvalues.min();
        if max <= 0.0 || min <= SINGULAR_RATIO * max {
            return None;
        }
        Some(Self {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    /// `trace(J0 M^-1 J0^T)`.
    pub(crate) fn weighted_trace(&self, j0: &DMatrix<f64>) -> f64 {
        let proj = j0 * &self.vectors;
        (0..self.values.len())
            .map(|k| proj.column(k).norm_squared() / self.values[k])
            .sum()
    }

    pub(crate) fn inverse_trace(&self) -> f64 {
        self.values.iter().map(|l| 1.0 / l).sum()
    }

    pub(crate) fn determinant(&self) -> f64 {
        self.values.iter().product()
    }
}

/// `trace(J0 M^-1 J0^T)` for a precomputed information matrix; `+inf` when
/// the matrix is singular.
pub(crate) fn weighted_trace(info: &DMatrix<f64>, j0: &DMatrix<f64>) -> f64 {
    Spectrum::of(info).map_or(f64::INFINITY, |s| s.weighted_trace(j0))
}

/// Information matrix of the unreplicated plan plus the replication factor
/// `k`, so that `M = k M_base`. Keeping `k` out of the factorization makes
/// replicated plans score exactly `1/k` of the base plan.
fn checked_info(
    model: &KinematicModel,
    params: &DVector<f64>,
    plan: &Plan,
) -> Result<(InformationMatrix, f64)> {
    if plan.n_joints() != model.n_joints() {
        return Err(Error::Dimension {
            what: "plan joint count",
            expected: model.n_joints(),
            actual: plan.n_joints(),
        });
    }
    let k = plan.replication_factor();
    Ok((
        information_matrix(model, params, &plan.unreplicated())?,
        f64::from(k),
    ))
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma >= 0.0 {
        Ok(())
    } else {
        Err(Error::input("sigma must be finite and non-negative"))
    }
}

/// Expected squared position error at the test pose after compensation:
/// `sigma^2 trace(J0 M^-1 J0^T)`, in square meters.
///
/// Singular plans return `Ok(f64::INFINITY)`; malformed inputs return `Err`.
pub fn rho0_squared(
    model: &KinematicModel,
    params: &DVector<f64>,
    plan: &Plan,
    test_pose: &TestPose,
    sigma: f64,
) -> Result<f64> {
    check_sigma(sigma)?;
    let j0 = identification_jacobian(model, params, &test_pose.q0)?;
    let (info, k) = checked_info(model, params, plan)?;
    let t = weighted_trace(info.matrix(), &j0);
    Ok(if t.is_finite() {
        sigma * sigma * t / k
    } else {
        t
    })
}

/// `1 / det M`. Unit-bearing (it scales with the parameter units), so use it
/// only to rank plans of the same model.
pub fn d_criterion(model: &KinematicModel, params: &DVector<f64>, plan: &Plan) -> Result<f64> {
    let (info, k) = checked_info(model, params, plan)?;
    Ok(Spectrum::of(info.matrix()).map_or(f64::INFINITY, |s| {
        1.0 / (s.determinant() * k.powi(info.dim() as i32))
    }))
}

/// `trace(M^-1)`.
pub fn a_criterion(model: &KinematicModel, params: &DVector<f64>, plan: &Plan) -> Result<f64> {
    let (info, k) = checked_info(model, params, plan)?;
    Ok(Spectrum::of(info.matrix()).map_or(f64::INFINITY, |s| s.inverse_trace() / k))
}

/// The pair used to compare plans against a "diagonal covariance" target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DStar {
    /// Root-sum-square of the pairwise parameter correlations implied by `M^-1`;
    /// zero for a diagonal covariance.
    pub correlation_penalty: f64,
    /// `det M`.
    pub information_det: f64,
}

pub fn d_star(model: &KinematicModel, params: &DVector<f64>, plan: &Plan) -> Result<DStar> {
    let (info, k) = checked_info(model, params, plan)?;
    let Some(spec) = Spectrum::of(info.matrix()) else {
        return Ok(DStar {
            correlation_penalty: f64::INFINITY,
            information_det: 0.0,
        });
    };
    let mut inv = spec.vectors.clone();
    for k in 0..spec.values.len() {
        inv.column_mut(k).scale_mut(1.0 / spec.values[k]);
    }
    let cov = inv * spec.vectors.transpose();
    let n = cov.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += cov[(i, j)].powi(2) / (cov[(i, i)] * cov[(j, j)]);
        }
    }
    Ok(DStar {
        correlation_penalty: sum.sqrt(),
        information_det: spec.determinant() * k.powi(info.dim() as i32),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Screening {
    /// One entry per model parameter (table order); `true` means the parameter
    /// influences the position and should be kept.
    pub keep: Vec<bool>,
    /// Largest Jacobian column norm over the probes, per parameter.
    pub max_column_norm: Vec<f64>,
    /// Nearly unobservable combinations among the kept parameters.
    pub null_combinations: Vec<NullDirection>,
}

impl Screening {
    pub fn removed(&self, model: &KinematicModel) -> Vec<String> {
        model
            .parameters()
            .iter()
            .zip(&self.keep)
            .filter(|(_, k)| !**k)
            .map(|(p, _)| p.name.clone())
            .collect()
    }
}

/// Finds parameters that do not affect the end-effector position, and
/// parameter combinations that the probe configurations cannot separate.
///
/// Every parameter of the model is examined, regardless of its current
/// identifiability flag. Requires at least as many probes as parameters.
pub fn screen_parameters(
    model: &KinematicModel,
    params: &DVector<f64>,
    probe_configs: &[Configuration],
) -> Result<Screening> {
    let n = model.n_parameters();
    if probe_configs.len() < n {
        return Err(Error::input(format!(
            "screening needs at least {n} probe configurations, got {}",
            probe_configs.len()
        )));
    }
    let all = model.with_identifiable_mask(&vec![true; n])?;
    all.check_params(params)?;
    for q in probe_configs {
        all.check_configuration(q)?;
    }
    let jacs: Vec<DMatrix<f64>> = probe_configs
        .iter()
        .map(|q| jacobian_unchecked(&all, params.as_slice(), q))
        .collect();
    let max_column_norm: Vec<f64> = (0..n)
        .map(|c| jacs.iter().map(|j| j.column(c).norm()).fold(0.0, f64::max))
        .collect();
    let keep: Vec<bool> = max_column_norm
        .iter()
        .map(|&v| v >= SCREEN_COLUMN_TOL)
        .collect();

    let kept: Vec<usize> = (0..n).filter(|&i| keep[i]).collect();
    let mut null_combinations = Vec::new();
    if !kept.is_empty() {
        let mut a = DMatrix::zeros(3 * jacs.len(), kept.len());
        for (r, j) in jacs.iter().enumerate() {
            for (c, &i) in kept.iter().enumerate() {
                a.view_mut((3 * r, c), (3, 1)).copy_from(&j.column(i));
            }
        }
        let svd = a.svd(false, true);
        let v = svd.v_t.expect("v_t requested").transpose();
        let smax = svd.singular_values.max();
        for k in 0..svd.singular_values.len() {
            let rel = svd.singular_values[k] / smax;
            if rel < SCREEN_RANK_TOL {
                let mut components: Vec<(String, f64)> = v
                    .column(k)
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.abs() >= 1e-3)
                    .map(|(c, x)| (model.parameters()[kept[c]].name.clone(), *x))
                    .collect();
                if components.first().is_some_and(|(_, c)| *c < 0.0) {
                    components.iter_mut().for_each(|(_, c)| *c = -*c);
                }
                null_combinations.push(NullDirection {
                    relative_singular_value: rel,
                    components,
                });
            }
        }
    }
    Ok(Screening {
        keep,
        max_column_norm,
        null_combinations,
    })
}
