//! Least-squares identification of geometric parameters and the resulting
//! parameter covariance.
//!
//! Identification is Gauss-Newton on the position residuals: linearize at the
//! current estimate, solve the stacked linear least-squares problem through an
//! SVD of the stacked Jacobian, fold the correction into the parameter vector
//! and repeat until the predicted position correction drops below `tol`.

use nalgebra::{DMatrix, DVector, Vector3};
use rayon::prelude::*;

use crate::error::{Error, NullDirection, Result};
use crate::kinematics::jacobian::jacobian_unchecked;
use crate::kinematics::{
    apply_parameter_update, forward_position_unchecked, Configuration, KinematicModel, Position,
};
use crate::plan::Plan;

/// Smallest singular value of the stacked Jacobian, relative to the largest,
/// below which a parameter set is declared non-identifiable.
pub const RANK_TOL: f64 = 1e-10;

/// Default stopping threshold on the largest predicted position correction (m).
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub q: Configuration,
    pub p: Position,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    records: Vec<Measurement>,
}

impl MeasurementSet {
    pub fn new(records: Vec<Measurement>) -> Result<Self> {
        let first = records
            .first()
            .ok_or_else(|| Error::input("measurement set is empty"))?;
        let n = first.q.len();
        if let Some(bad) = records.iter().find(|r| r.q.len() != n) {
            return Err(Error::Dimension {
                what: "measurement joint count",
                expected: n,
                actual: bad.q.len(),
            });
        }
        if records
            .iter()
            .any(|r| r.q.iter().chain(r.p.iter()).any(|v| !v.is_finite()))
        {
            return Err(Error::input("measurement set contains non-finite values"));
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[Measurement] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// `sum_i multiplicity_i * J_i^T J_i` over a plan.
#[derive(Debug, Clone, PartialEq)]
pub struct InformationMatrix(pub DMatrix<f64>);

impl InformationMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentifySettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for IdentifySettings {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Identification {
    /// Full parameter vector (non-identifiable entries keep their nominal value).
    pub params: DVector<f64>,
    pub iterations: usize,
    /// Euclidean norm of all position residuals at the final estimate (m).
    pub final_residual_norm: f64,
    /// Largest predicted position correction of each iteration (m).
    pub correction_history: Vec<f64>,
}

fn stack(
    jacobians: &[DMatrix<f64>],
    residuals: &[Vector3<f64>],
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    if jacobians.len() != residuals.len() {
        return Err(Error::Dimension {
            what: "residual list",
            expected: jacobians.len(),
            actual: residuals.len(),
        });
    }
    let n = jacobians
        .first()
        .ok_or_else(|| Error::input("no measurements to solve"))?
        .ncols();
    let rows = 3 * jacobians.len();
    let mut a = DMatrix::zeros(rows, n);
    let mut b = DVector::zeros(rows);
    for (i, (j, r)) in jacobians.iter().zip(residuals).enumerate() {
        if j.nrows() != 3 || j.ncols() != n {
            return Err(Error::Dimension {
                what: "jacobian columns",
                expected: n,
                actual: j.ncols(),
            });
        }
        a.view_mut((3 * i, 0), (3, n)).copy_from(j);
        b.rows_mut(3 * i, 3).copy_from(r);
    }
    Ok((a, b))
}

/// SVD of a stacked system, zero-padded to at least `n` rows so that the
/// right singular vectors always span the full parameter space.
struct StackedSvd {
    u: DMatrix<f64>,
    s: DVector<f64>,
    v: DMatrix<f64>,
}

impl StackedSvd {
    fn new(a: &DMatrix<f64>) -> Self {
        let n = a.ncols();
        let padded;
        let a = if a.nrows() < n {
            let mut p = DMatrix::zeros(n, n);
            p.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
            padded = p;
            &padded
        } else {
            a
        };
        let svd = a.clone().svd(true, true);
        Self {
            u: svd.u.expect("u requested"),
            s: svd.singular_values,
            v: svd.v_t.expect("v_t requested").transpose(),
        }
    }

    fn null_directions(&self, names: &[String]) -> Vec<NullDirection> {
        let smax = self.s.max();
        let mut out = Vec::new();
        for k in 0..self.s.len() {
            let rel = if smax > 0.0 { self.s[k] / smax } else { 0.0 };
            if rel < RANK_TOL {
                let v = self.v.column(k);
                let mut components: Vec<(String, f64)> = v
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.abs() >= 1e-3)
                    .map(|(i, c)| (names.get(i).cloned().unwrap_or_else(|| format!("p{i}")), *c))
                    .collect();
                // fix the sign so reports are stable
                if components.first().is_some_and(|(_, c)| *c < 0.0) {
                    components.iter_mut().for_each(|(_, c)| *c = -*c);
                }
                out.push(NullDirection {
                    relative_singular_value: rel,
                    components,
                });
            }
        }
        out
    }

    fn check_rank(&self, names: &[String]) -> Result<()> {
        let dirs = self.null_directions(names);
        if dirs.is_empty() {
            Ok(())
        } else {
            Err(Error::NotIdentifiable { directions: dirs })
        }
    }

    fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let b = b.clone().resize_vertically(self.u.nrows(), 0.0);
        let mut x = DVector::zeros(self.v.nrows());
        for k in 0..self.s.len() {
            let coef = self.u.column(k).dot(&b) / self.s[k];
            x.axpy(coef, &self.v.column(k), 1.0);
        }
        x
    }

    /// `V diag(1/s^2) V^T`, the inverse of `A^T A`.
    fn inverse_normal(&self) -> DMatrix<f64> {
        let mut vs = self.v.clone();
        for k in 0..self.s.len() {
            let w = 1.0 / (self.s[k] * self.s[k]);
            vs.column_mut(k).scale_mut(w);
        }
        vs * self.v.transpose()
    }
}

fn generic_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i}")).collect()
}

/// Solves `min sum_i |J_i delta - r_i|^2` for `delta`.
///
/// Fails with [`Error::NotIdentifiable`] when the stacked Jacobian's smallest
/// singular value is below [`RANK_TOL`] times its largest; the error lists the
/// offending null-space directions.
pub fn solve_least_squares(
    jacobians: &[DMatrix<f64>],
    residuals: &[Vector3<f64>],
) -> Result<DVector<f64>> {
    let (a, b) = stack(jacobians, residuals)?;
    solve_stacked(&a, &b, &generic_names(a.ncols()))
}

fn solve_stacked(a: &DMatrix<f64>, b: &DVector<f64>, names: &[String]) -> Result<DVector<f64>> {
    let svd = StackedSvd::new(a);
    svd.check_rank(names)?;
    Ok(svd.solve(b))
}

/// Iterative identification from measured positions.
///
/// Starts from `nominal`, and on each pass recomputes model positions,
/// solves for the correction, and applies it to the identifiable parameters.
/// Stops once the largest predicted position correction `|J_i delta|` is
/// below `settings.tol`.
pub fn identify(
    model: &KinematicModel,
    nominal: &DVector<f64>,
    data: &MeasurementSet,
    settings: IdentifySettings,
) -> Result<Identification> {
    model.check_params(nominal)?;
    for r in data.records() {
        model.check_configuration(&r.q)?;
    }
    if model.n_identifiable() == 0 {
        return Err(Error::input("model has no identifiable parameters"));
    }
    let names = model.identifiable_names();
    let n = model.n_identifiable();
    let rows = 3 * data.len();
    let mut params = nominal.clone();
    let mut history = Vec::new();
    let mut a = DMatrix::zeros(rows, n);
    let mut b = DVector::zeros(rows);

    for iteration in 1..=settings.max_iter {
        for (i, rec) in data.records().iter().enumerate() {
            let modeled = forward_position_unchecked(model, params.as_slice(), &rec.q);
            b.rows_mut(3 * i, 3).copy_from(&(rec.p - modeled));
            a.view_mut((3 * i, 0), (3, n))
                .copy_from(&jacobian_unchecked(model, params.as_slice(), &rec.q));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical {
                parameter: names.join(","),
            });
        }
        let delta = solve_stacked(&a, &b, &names)?;
        let predicted = &a * &delta;
        let correction = (0..data.len())
            .map(|i| predicted.rows(3 * i, 3).norm())
            .fold(0.0, f64::max);
        params = apply_parameter_update(model, &params, &delta)?;
        history.push(correction);
        if correction < settings.tol {
            let final_residual_norm = data
                .records()
                .iter()
                .map(|r| {
                    (r.p - forward_position_unchecked(model, params.as_slice(), &r.q))
                        .norm_squared()
                })
                .sum::<f64>()
                .sqrt();
            return Ok(Identification {
                params,
                iterations: iteration,
                final_residual_norm,
                correction_history: history,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: settings.max_iter,
        history,
    })
}

/// Adds matrices in a fixed pairwise tree so the rounding does not depend
/// on how the inputs were produced.
pub(crate) fn pairwise_sum(mats: &[DMatrix<f64>]) -> DMatrix<f64> {
    match mats.len() {
        0 => panic!("pairwise_sum of nothing"),
        1 => mats[0].clone(),
        n => {
            let (l, r) = mats.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

fn plan_jacobians(
    model: &KinematicModel,
    params: &DVector<f64>,
    plan: &Plan,
) -> Result<Vec<DMatrix<f64>>> {
    model.check_params(params)?;
    for e in plan.entries() {
        model.check_configuration(&e.q)?;
    }
    Ok(plan
        .entries()
        .par_iter()
        .map(|e| jacobian_unchecked(model, params.as_slice(), &e.q))
        .collect())
}

/// Information matrix of a plan at the given parameters.
pub fn information_matrix(
    model: &KinematicModel,
    params: &DVector<f64>,
    plan: &Plan,
) -> Result<InformationMatrix> {
    let jacs = plan_jacobians(model, params, plan)?;
    let terms: Vec<DMatrix<f64>> = jacs
        .iter()
        .zip(plan.entries())
        .map(|(j, e)| (j.transpose() * j) * f64::from(e.multiplicity))
        .collect();
    Ok(InformationMatrix(pairwise_sum(&terms)))
}

/// Parameter covariance `sigma^2 M^-1` of a plan, computed from the SVD of the
/// multiplicity-weighted stacked Jacobian.
pub fn covariance(
    model: &KinematicModel,
    params: &DVector<f64>,
    plan: &Plan,
    sigma: f64,
) -> Result<DMatrix<f64>> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::input("sigma must be finite and non-negative"));
    }
    let jacs = plan_jacobians(model, params, plan)?;
    let weighted: Vec<DMatrix<f64>> = jacs
        .into_iter()
        .zip(plan.entries())
        .map(|(j, e)| j * f64::from(e.multiplicity).sqrt())
        .collect();
    let zeros = vec![Vector3::zeros(); weighted.len()];
    let (a, _) = stack(&weighted, &zeros)?;
    let svd = StackedSvd::new(&a);
    svd.check_rank(&model.identifiable_names())?;
    Ok(svd.inverse_normal() * (sigma * sigma))
}

/// Reads a measurement CSV: header `q_1,...,q_n,p_x,p_y,p_z`.
pub fn read_measurements_csv(text: &str, source_name: &str) -> Result<MeasurementSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(source_name, 1, "header", e.to_string()))?
        .clone();
    let n_cols = headers.len();
    if n_cols < 4
        || &headers[n_cols - 3] != "p_x"
        || &headers[n_cols - 2] != "p_y"
        || &headers[n_cols - 1] != "p_z"
    {
        return Err(Error::parse(
            source_name,
            1,
            "header",
            "expected q_1,...,q_n,p_x,p_y,p_z",
        ));
    }
    let n = n_cols - 3;
    for (j, h) in headers.iter().take(n).enumerate() {
        if h != format!("q_{}", j + 1) {
            return Err(Error::parse(
                source_name,
                1,
                h,
                format!("expected column q_{}", j + 1),
            ));
        }
    }
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(source_name, line, "record", e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let mut vals = Vec::with_capacity(n_cols);
        for (j, tok) in rec.iter().enumerate() {
            let v: f64 = tok.parse().map_err(|_| {
                Error::parse(
                    source_name,
                    line,
                    headers[j].to_string(),
                    format!("`{tok}` is not a number"),
                )
            })?;
            vals.push(v);
        }
        records.push(Measurement {
            q: vals[..n].to_vec(),
            p: Vector3::new(vals[n], vals[n + 1], vals[n + 2]),
        });
    }
    MeasurementSet::new(records)
}

pub fn write_measurements_csv(data: &MeasurementSet) -> String {
    let n = data.records()[0].q.len();
    let mut out: String = (1..=n).map(|j| format!("q_{j},")).collect();
    out.push_str("p_x,p_y,p_z\n");
    for r in data.records() {
        for v in &r.q {
            out.push_str(&format!("{v},"));
        }
        out.push_str(&format!("{},{},{}\n", r.p.x, r.p.y, r.p.z));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{forward_position, identification_jacobian};
    use crate::models::{two_link, TwoLinkParameters};
    use std::f64::consts::FRAC_PI_2;

    fn deg(d: f64) -> f64 {
        d.to_radians()
    }

    fn synthetic(
        model: &KinematicModel,
        truth: &DVector<f64>,
        configs: &[Vec<f64>],
    ) -> MeasurementSet {
        MeasurementSet::new(
            configs
                .iter()
                .map(|q| Measurement {
                    q: q.clone(),
                    p: forward_position(model, truth, q).unwrap(),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn zero_residuals_give_zero_step() {
        let m = two_link(1.0, 0.8, TwoLinkParameters::LinkLengths);
        let p = m.nominal_parameters();
        let jacs: Vec<_> = [[0.0, 1.0], [0.5, -1.0]]
            .iter()
            .map(|q| identification_jacobian(&m, &p, q).unwrap())
            .collect();
        let d = solve_least_squares(&jacs, &[Vector3::zeros(); 2]).unwrap();
        assert_eq!(d, DVector::zeros(2));
    }

    #[test]
    fn single_record_cannot_identify_four_parameters() {
        let m = two_link(1.0, 0.8, TwoLinkParameters::Both);
        let p = m.nominal_parameters();
        let j = identification_jacobian(&m, &p, &[0.3, 0.7]).unwrap();
        match solve_least_squares(&[j], &[Vector3::new(1e-3, 0.0, 0.0)]) {
            Err(Error::NotIdentifiable { directions }) => assert!(directions.len() >= 2),
            other => panic!("expected identifiability error, got {other:?}"),
        }
    }

    #[test]
    fn linear_solve_recovers_link_deviations() {
        let m = two_link(1.0, 0.8, TwoLinkParameters::LinkLengths);
        let p0 = m.nominal_parameters();
        let dl = [0.002, -0.001];
        let configs = [[0.0, -FRAC_PI_2], [0.0, FRAC_PI_2]];
        let jacs: Vec<_> = configs
            .iter()
            .map(|q| identification_jacobian(&m, &p0, q).unwrap())
            .collect();
        let truth = apply_parameter_update(&m, &p0, &DVector::from_row_slice(&dl)).unwrap();
        let residuals: Vec<_> = configs
            .iter()
            .map(|q| {
                forward_position(&m, &truth, q).unwrap() - forward_position(&m, &p0, q).unwrap()
            })
            .collect();
        let d = solve_least_squares(&jacs, &residuals).unwrap();
        assert!((d[0] - 0.002).abs() < 1e-12);
        assert!((d[1] + 0.001).abs() < 1e-12);
    }

    #[test]
    fn noise_free_recovery_of_all_four_parameters() {
        let m = two_link(1.0, 0.8, TwoLinkParameters::Both);
        let p0 = m.nominal_parameters();
        let truth = DVector::from_vec(vec![1.0 + 0.008, 0.8 - 0.006, deg(0.7), deg(-0.9)]);
        let configs: Vec<Vec<f64>> = vec![
            vec![0.0, deg(-60.0)],
            vec![deg(40.0), deg(10.0)],
            vec![deg(-70.0), deg(80.0)],
            vec![deg(120.0), deg(-120.0)],
        ];
        let data = synthetic(&m, &truth, &configs);
        let id = identify(&m, &p0, &data, IdentifySettings::default()).unwrap();
        assert!(id.iterations <= 5, "{} iterations", id.iterations);
        assert!((&id.params - &truth).amax() < 1e-10);
        assert!(id.final_residual_norm < 1e-10);
    }

    #[test]
    fn fixed_point_takes_one_iteration() {
        let m = two_link(1.0, 0.8, TwoLinkParameters::Both);
        let p0 = m.nominal_parameters();
        let configs = vec![
            vec![0.0, deg(-60.0)],
            vec![deg(40.0), deg(10.0)],
            vec![deg(-70.0), deg(80.0)],
        ];
        let data = synthetic(&m, &p0, &configs);
        let id = identify(&m, &p0, &data, IdentifySettings::default()).unwrap();
        assert_eq!(id.iterations, 1);
        assert_eq!(id.params, p0);
    }

    #[test]
    fn record_order_does_not_matter() {
        let m = two_link(1.0, 0.8, TwoLinkParameters::Both);
        let p0 = m.nominal_parameters();
        let truth = DVector::from_vec(vec![1.004, 0.797, deg(0.3), deg(0.5)]);
        let mut configs = vec![
            vec![0.1, deg(-50.0)],
            vec![deg(30.0), deg(20.0)],
            vec![deg(-80.0), deg(95.0)],
            vec![deg(10.0), deg(-130.0)],
        ];
        let mut data = synthetic(&m, &truth, &configs).records().to_vec();
        for r in &mut data {
            r.p.x += 1e-4 * r.q[1].sin();
        }
        let a = identify(
            &m,
            &p0,
            &MeasurementSet::new(data.clone()).unwrap(),
            IdentifySettings::default(),
        )
        .unwrap();
        data.reverse();
        configs.reverse();
        let b = identify(
            &m,
            &p0,
            &MeasurementSet::new(data).unwrap(),
            IdentifySettings::default(),
        )
        .unwrap();
        assert!((&a.params - &b.params).amax() < 1e-12);
    }

    #[test]
    fn non_convergence_reports_history() {
        let m = two_link(1.0, 0.8, TwoLinkParameters::Both);
        let p0 = m.nominal_parameters();
        let truth = DVector::from_vec(vec![1.05, 0.75, deg(5.0), deg(-4.0)]);
        let configs = vec![
            vec![0.0, deg(-60.0)],
            vec![deg(40.0), deg(10.0)],
            vec![deg(-70.0), deg(80.0)],
        ];
        let data = synthetic(&m, &truth, &configs);
        let settings = IdentifySettings {
            tol: 1e-9,
            max_iter: 1,
        };
        match identify(&m, &p0, &data, settings) {
            Err(Error::NonConvergence {
                iterations,
                history,
            }) => {
                assert_eq!(iterations, 1);
                assert_eq!(history.len(), 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn information_matrix_two_link_closed_form() {
        let m = two_link(1.0, 0.8, TwoLinkParameters::LinkLengths);
        let p0 = m.nominal_parameters();
        let q2s = [deg(-35.0), deg(70.0), deg(150.0)];
        let plan = Plan::from_configurations(
            q2s.iter()
                .enumerate()
                .map(|(i, &q)| vec![0.4 * i as f64, q])
                .collect(),
        )
        .unwrap();
        let info = information_matrix(&m, &p0, &plan).unwrap();
        let s: f64 = q2s.iter().map(|q| q.cos()).sum();
        let expected = DMatrix::from_row_slice(2, 2, &[3.0, s, s, 3.0]);
        assert!((info.matrix() - expected).amax() < 1e-14);

        let tripled = information_matrix(&m, &p0, &plan.replicate(3).unwrap()).unwrap();
        assert!((tripled.matrix() - info.matrix() * 3.0).amax() < 1e-14);

        let d =
            Plan::from_configurations(vec![vec![0.0, -FRAC_PI_2], vec![0.0, FRAC_PI_2]]).unwrap();
        let info = information_matrix(&m, &p0, &d).unwrap();
        assert!(info.matrix()[(0, 1)].abs() < 1e-15);
    }

    #[test]
    fn covariance_of_orthogonal_plan() {
        let m = two_link(1.0, 0.8, TwoLinkParameters::LinkLengths);
        let p0 = m.nominal_parameters();
        let plan =
            Plan::from_configurations(vec![vec![0.0, -FRAC_PI_2], vec![0.0, FRAC_PI_2]]).unwrap();
        let cov = covariance(&m, &p0, &plan, 1e-3).unwrap();
        let expected = DMatrix::identity(2, 2) * (1e-6 / 2.0);
        assert!((&cov - &expected).amax() < 1e-12 * 1e-6);
        let cov2 = covariance(&m, &p0, &plan, 2e-3).unwrap();
        assert!((&cov2 - &cov * 4.0).amax() < 1e-20);
    }

    #[test]
    fn covariance_general_form_equals_simplified_form() {
        // (sum J^T J)^-1 (sum J^T E[e e^T] J) (sum J^T J)^-1 with E[e e^T] = s^2 I
        let m = two_link(1.0, 0.8, TwoLinkParameters::Both);
        let p0 = m.nominal_parameters();
        let sigma = 1e-3;
        let configs = vec![vec![0.2, deg(-57.0)], vec![-0.3, 0.0], vec![1.1, deg(57.0)]];
        let plan = Plan::from_configurations(configs.clone()).unwrap();
        let jacs: Vec<_> = configs
            .iter()
            .map(|q| identification_jacobian(&m, &p0, q).unwrap())
            .collect();
        let info: DMatrix<f64> = jacs.iter().map(|j| j.transpose() * j).sum();
        let inv = info.clone().try_inverse().unwrap();
        let noise = DMatrix::<f64>::identity(3, 3) * (sigma * sigma);
        let middle: DMatrix<f64> = jacs.iter().map(|j| j.transpose() * &noise * j).sum();
        let sandwich = &inv * middle * &inv;
        let cov = covariance(&m, &p0, &plan, sigma).unwrap();
        let scale = cov.amax();
        assert!((&sandwich - &cov).amax() < 1e-12 * scale);
        assert!((&cov - cov.transpose()).amax() < 1e-15 * scale);
        assert!(cov.clone().cholesky().is_some());
    }

    #[test]
    fn singular_plan_covariance_is_an_error() {
        let m = two_link(1.0, 0.8, TwoLinkParameters::LinkLengths);
        let plan = Plan::from_configurations(vec![vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert!(matches!(
            covariance(&m, &m.nominal_parameters(), &plan, 1e-3),
            Err(Error::NotIdentifiable { .. })
        ));
    }

    #[test]
    fn measurement_csv_round_trip() {
        let m = two_link(1.0, 0.8, TwoLinkParameters::LinkLengths);
        let data = synthetic(
            &m,
            &m.nominal_parameters(),
            &[vec![0.1, 0.2], vec![-1.0, 2.5]],
        );
        let text = write_measurements_csv(&data);
        assert!(text.starts_with("q_1,q_2,p_x,p_y,p_z\n"));
        assert_eq!(read_measurements_csv(&text, "m.csv").unwrap(), data);
        assert!(read_measurements_csv("q_1,p_x,p_y\n1,2,3\n", "m.csv").is_err());
        assert!(read_measurements_csv("q_1,p_x,p_y,p_z\n", "m.csv").is_err());
    }
}
