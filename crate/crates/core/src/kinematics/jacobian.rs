use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use super::{forward_position_unchecked, rotate_in_place, Driver, KinematicModel, TransformKind};
use crate::error::{Error, Result};

/// Absolute floor of the central-difference step.
pub const FD_EPS_ABS: f64 = 1e-7;
/// Relative central-difference step, scaled by the parameter's nominal value.
pub const FD_EPS_REL: f64 = 1e-7;

/// Position Jacobian with respect to the identifiable parameters (3 x n_id).
///
/// Exact chain-rule derivative of the transform product: a translation
/// parameter contributes the current frame axis, a rotation parameter
/// (including joint offsets) contributes `axis x (p_end - origin)`.
pub fn identification_jacobian(
    model: &KinematicModel,
    params: &DVector<f64>,
    q: &[f64],
) -> Result<DMatrix<f64>> {
    model.check_params(params)?;
    model.check_configuration(q)?;
    let jac = jacobian_unchecked(model, params.as_slice(), q);
    check_finite(model, &jac)?;
    Ok(jac)
}

pub(crate) fn jacobian_unchecked(
    model: &KinematicModel,
    params: &[f64],
    q: &[f64],
) -> DMatrix<f64> {
    let mut jac = DMatrix::zeros(3, model.n_identifiable());
    // Rotation parameters need p_end, which is only known after the pass.
    let mut pending: Vec<(usize, Vector3<f64>, Vector3<f64>)> = Vec::new();

    let mut r = Matrix3::identity();
    let mut p = Vector3::zeros();
    for t in model.chain() {
        let param = match t.driver {
            Driver::Parameter(i) => Some(i),
            Driver::Joint { offset, .. } => offset,
            Driver::Constant(_) => None,
        };
        let col = param.and_then(|i| model.column_of(i));
        let v = model.transform_value(t, params, q);
        let axis: Vector3<f64> = r.column(t.axis.index()).into();
        match t.kind {
            TransformKind::Translation => {
                if let Some(c) = col {
                    jac.set_column(c, &axis);
                }
                p += axis * v;
            }
            TransformKind::Rotation => {
                if let Some(c) = col {
                    pending.push((c, axis, p));
                }
                rotate_in_place(&mut r, t.axis, v);
            }
        }
    }
    for (c, axis, origin) in pending {
        jac.set_column(c, &axis.cross(&(p - origin)));
    }
    jac
}

/// Central finite-difference Jacobian with step
/// `h = max(FD_EPS_ABS, FD_EPS_REL * |nominal|)` per parameter.
///
/// Kept as an independent check on [`identification_jacobian`].
pub fn finite_difference_jacobian(
    model: &KinematicModel,
    params: &DVector<f64>,
    q: &[f64],
) -> Result<DMatrix<f64>> {
    model.check_params(params)?;
    model.check_configuration(q)?;
    let mut jac = DMatrix::zeros(3, model.n_identifiable());
    let mut work = params.as_slice().to_vec();
    for (c, &i) in model.identifiable_indices().iter().enumerate() {
        let h = FD_EPS_ABS.max(FD_EPS_REL * model.parameters()[i].nominal.abs());
        let x = params[i];
        work[i] = x + h;
        let plus = forward_position_unchecked(model, &work, q);
        let hi = work[i];
        work[i] = x - h;
        let minus = forward_position_unchecked(model, &work, q);
        let step = hi - work[i];
        work[i] = x;
        jac.set_column(c, &((plus - minus) / step));
    }
    check_finite(model, &jac)?;
    Ok(jac)
}

fn check_finite(model: &KinematicModel, jac: &DMatrix<f64>) -> Result<()> {
    for c in 0..jac.ncols() {
        if jac.column(c).iter().any(|v| !v.is_finite()) {
            let name = model.parameters()[model.identifiable_indices()[c]]
                .name
                .clone();
            return Err(Error::Numerical { parameter: name });
        }
    }
    Ok(())
}
