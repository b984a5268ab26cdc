//! Closed-form results for the planar two-link arm.
//!
//! With `S = sum cos q2_i` over the plan, the information matrix of the
//! link-length parameters is `[[m, S], [S, m]]` whatever the first-joint
//! angles are. Everything below follows from that: the covariance, the
//! test-pose accuracy as a function of `S`, the optimal `S` for a given
//! test-pose elbow angle `q20`, and plans realizing a target `S` with at most
//! three distinct elbow angles.
//!
//! The joint-offset parameterization has Jacobian `R J T` with `R` a fixed
//! quarter-turn and `T` a constant invertible matrix, so its test-pose
//! accuracy is identical; only the covariance changes by the congruence `T`.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::models::TwoLinkParameters;

/// Below this `|cos q20|` the optimal `S` is taken at its limit, zero.
pub const COS_LIMIT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLinkCase {
    pub l1: f64,
    pub l2: f64,
    pub parameters: TwoLinkParameters,
    /// Per-axis measurement noise standard deviation (m).
    pub sigma: f64,
    /// Number of measurements.
    pub m: usize,
    /// Test-pose elbow angle (rad).
    pub q20: f64,
}

impl TwoLinkCase {
    pub fn new(
        l1: f64,
        l2: f64,
        parameters: TwoLinkParameters,
        sigma: f64,
        m: usize,
        q20: f64,
    ) -> Result<Self> {
        if !(l1 > 0.0 && l2 > 0.0 && l1.is_finite() && l2.is_finite()) {
            return Err(Error::input("link lengths must be positive and finite"));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::input("sigma must be finite and non-negative"));
        }
        if !q20.is_finite() {
            return Err(Error::input("q20 must be finite"));
        }
        let min_m = match parameters {
            TwoLinkParameters::Both => 3,
            _ => 2,
        };
        if m < min_m {
            return Err(Error::input(format!(
                "need at least {min_m} measurements, got {m}"
            )));
        }
        Ok(Self {
            l1,
            l2,
            parameters,
            sigma,
            m,
            q20,
        })
    }

    fn mf(&self) -> f64 {
        self.m as f64
    }

    fn two_parameter(&self) -> Result<()> {
        match self.parameters {
            TwoLinkParameters::Both => Err(Error::input(
                "closed forms cover the link-length and joint-offset parameter sets only",
            )),
            _ => Ok(()),
        }
    }

    fn plan_sum(&self, q2s: &[f64]) -> Result<f64> {
        if q2s.len() != self.m {
            return Err(Error::Dimension {
                what: "elbow angle list",
                expected: self.m,
                actual: q2s.len(),
            });
        }
        let s: f64 = q2s.iter().map(|q| q.cos()).sum();
        let m = self.mf();
        if m * m - s * s <= 1e-14 * m * m {
            return Err(Error::Infeasible(
                "every elbow angle is a multiple of 2*pi (or of pi with one sign); the plan is singular".into(),
            ));
        }
        Ok(s)
    }
}

/// Parameter covariance of a plan given by its elbow angles.
///
/// Link lengths: `sigma^2 / (m^2 - S^2) [[m, -S], [-S, m]]`.
pub fn cov_2r(case: &TwoLinkCase, q2s: &[f64]) -> Result<Matrix2<f64>> {
    case.two_parameter()?;
    let s = case.plan_sum(q2s)?;
    let m = case.mf();
    let lengths = Matrix2::new(m, -s, -s, m) * (case.sigma * case.sigma / (m * m - s * s));
    Ok(match case.parameters {
        TwoLinkParameters::JointOffsets => {
            let t_inv = Matrix2::new(case.l1, 0.0, case.l2, case.l2)
                .try_inverse()
                .expect("positive link lengths");
            t_inv * lengths * t_inv.transpose()
        }
        _ => lengths,
    })
}

/// Test-pose accuracy `2 sigma^2 (m - cos q20 S) / (m^2 - S^2)`.
pub fn rho0_2r(case: &TwoLinkCase, q2s: &[f64]) -> Result<f64> {
    case.two_parameter()?;
    let s = case.plan_sum(q2s)?;
    Ok(rho0_of_sum(case, s))
}

/// Test-pose accuracy as a function of `S` alone.
pub fn rho0_of_sum(case: &TwoLinkCase, s: f64) -> f64 {
    let m = case.mf();
    2.0 * case.sigma * case.sigma * (m - case.q20.cos() * s) / (m * m - s * s)
}

/// Optimal `S = m (1 - |sin q20|) / cos q20`, or its limit 0 when
/// `|cos q20| < COS_LIMIT`.
pub fn optimal_s(case: &TwoLinkCase) -> f64 {
    let c = case.q20.cos();
    if c.abs() < COS_LIMIT {
        0.0
    } else {
        case.mf() * one_minus_abs_sin(case.q20) / c
    }
}

/// `1 - |sin q|` without cancellation near `|q| = pi/2`.
fn one_minus_abs_sin(q: f64) -> f64 {
    use std::f64::consts::{FRAC_PI_2, PI, TAU};
    let r = (q + PI).rem_euclid(TAU) - PI;
    // |sin q| = cos d with d the distance of |r| from pi/2
    let d = (r.abs() - FRAC_PI_2).abs();
    2.0 * (d / 2.0).sin().powi(2)
}

/// Smallest achievable test-pose accuracy, `(sigma^2 / m)(1 + |sin q20|)`.
pub fn rho0_min(case: &TwoLinkCase) -> f64 {
    case.sigma * case.sigma / case.mf() * (1.0 + case.q20.sin().abs())
}

/// The same minimum in the form `(sigma^2 / m) cos^2 q20 / (1 - |sin q20|)`,
/// undefined at `|q20| = pi/2`.
pub fn rho0_min_ratio_form(case: &TwoLinkCase) -> f64 {
    let c = case.q20.cos();
    case.sigma * case.sigma / case.mf() * c * c / one_minus_abs_sin(case.q20)
}

/// Elbow angles (ascending) whose cosines sum to `s_target`, using at most
/// three distinct values.
///
/// Even `m`: `m/2` pairs at `+-acos(S/m)`. Odd `m`: one elbow at 0 and pairs at
/// `+-acos((S-1)/(m-1))`; if that is out of range, one elbow at pi and pairs
/// at `+-acos((S+1)/(m-1))`. At `|S| = m` the returned plan is singular: the
/// optimum there is a limit that no plan attains.
pub fn decompose_plan(case: &TwoLinkCase, s_target: f64) -> Result<Vec<f64>> {
    let m = case.mf();
    if !s_target.is_finite() || s_target.abs() > m {
        return Err(Error::input(format!(
            "target S = {s_target} is outside [-{m}, {m}]"
        )));
    }
    let (fixed, pair_cos) = if case.m.is_multiple_of(2) {
        (None, s_target / m)
    } else {
        let c = (s_target - 1.0) / (m - 1.0);
        if c >= -1.0 {
            (Some(0.0), c)
        } else {
            (Some(std::f64::consts::PI), (s_target + 1.0) / (m - 1.0))
        }
    };
    let a = pair_cos.clamp(-1.0, 1.0).acos();
    let pairs = case.m / 2;
    let mut q2s = Vec::with_capacity(case.m);
    q2s.extend(std::iter::repeat_n(-a, pairs));
    q2s.extend(fixed);
    q2s.extend(std::iter::repeat_n(a, pairs));
    if fixed == Some(std::f64::consts::PI) {
        q2s.sort_by(f64::total_cmp);
    }
    Ok(q2s)
}

/// A reference accuracy-comparison entry for `m = 2`, `sigma = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub q20_deg: f64,
    pub rho0_sq: f64,
    pub gain_percent: f64,
}

/// Reference values for `m = 2`, `sigma = 1`, with the D-optimal plan at
/// `rho_D^2 = 1` in every column.
pub const REFERENCE: [ReferenceRow; 7] = [
    ReferenceRow {
        q20_deg: 0.0,
        rho0_sq: 0.5,
        gain_percent: 41.0,
    },
    ReferenceRow {
        q20_deg: 30.0,
        rho0_sq: 0.75,
        gain_percent: 15.0,
    },
    ReferenceRow {
        q20_deg: 60.0,
        rho0_sq: 0.83,
        gain_percent: 10.0,
    },
    ReferenceRow {
        q20_deg: 90.0,
        rho0_sq: 1.0,
        gain_percent: 0.0,
    },
    ReferenceRow {
        q20_deg: 120.0,
        rho0_sq: 0.83,
        gain_percent: 10.0,
    },
    ReferenceRow {
        q20_deg: 150.0,
        rho0_sq: 0.75,
        gain_percent: 15.0,
    },
    ReferenceRow {
        q20_deg: 180.0,
        rho0_sq: 0.5,
        gain_percent: 41.0,
    },
];

/// Reference values are rounded to two decimals; anything further off is a
/// genuine disagreement.
const REFERENCE_ROUNDING: f64 = 0.005;

/// One row of the D-optimal versus test-pose-optimal comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub q20: f64,
    pub m: usize,
    pub sigma: f64,
    pub s_star: f64,
    /// Elbow angles of an optimal plan (rad).
    pub plan: Vec<f64>,
    pub rho0_sq: f64,
    /// Accuracy of any plan with `S = 0`: `2 sigma^2 / m`.
    pub rho_d_sq: f64,
    /// `100 (rho_D / rho_0 - 1)`.
    pub gain_percent: f64,
    pub reference: Option<ReferenceRow>,
    /// Set when a reference value exists and disagrees with the closed form
    /// beyond rounding.
    pub discrepancy: bool,
}

pub fn comparison_row(q20: f64, m: usize, sigma: f64) -> Result<ComparisonRow> {
    let case = TwoLinkCase::new(1.0, 0.8, TwoLinkParameters::LinkLengths, sigma, m, q20)?;
    let s_star = optimal_s(&case);
    let plan = decompose_plan(&case, s_star)?;
    let rho0_sq = rho0_min(&case);
    let rho_d_sq = 2.0 * sigma * sigma / m as f64;
    let gain_percent = 100.0 * ((rho_d_sq / rho0_sq).sqrt() - 1.0);
    let reference = if m == 2 && sigma == 1.0 {
        REFERENCE
            .iter()
            .find(|r| (r.q20_deg.to_radians() - q20).abs() < 1e-9)
            .copied()
    } else {
        None
    };
    let discrepancy = reference.is_some_and(|p| (p.rho0_sq - rho0_sq).abs() > REFERENCE_ROUNDING);
    Ok(ComparisonRow {
        q20,
        m,
        sigma,
        s_star,
        plan,
        rho0_sq,
        rho_d_sq,
        gain_percent,
        reference,
        discrepancy,
    })
}

/// Test-pose Jacobian of the link-length parameters; handy for cross-checks.
pub fn link_length_jacobian(q1: f64, q2: f64) -> [Vector2<f64>; 2] {
    [
        Vector2::new(q1.cos(), q1.sin()),
        Vector2::new((q1 + q2).cos(), (q1 + q2).sin()),
    ]
}
