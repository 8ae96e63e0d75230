//! Centered finite differences on grid fields (O(h^2) truncation) and on
//! arbitrary callables at arbitrary points.

use super::ScalarField;
use crate::error::{Error, Result};
use crate::symmat::{SymTensor, MAX_DIM};

/// Cone-membership tolerance absorbing FD truncation error on normalized
/// margins: `10 h^2 * max(1, 1/d^2)`. The `1/d^2` factor is the local
/// derivative-scale estimate for fields that are homogeneous around the
/// puncture; away from it (d >= 1) the default scale 1 applies.
pub fn fd_cone_tol(h: f64, d: f64) -> f64 {
    10.0 * h * h * (1.0 / (d * d)).max(1.0)
}

fn stencil_value(f: &ScalarField, node: &[i64], offset: &[i64]) -> Result<f64> {
    let n = node.len();
    let mut probe = [0i64; MAX_DIM];
    for a in 0..n {
        probe[a] = node[a] + offset[a];
    }
    f.value(&probe[..n]).map_err(|_| Error::Stencil {
        node: node.to_vec(),
        offset: offset.to_vec(),
    })
}

/// Central-difference gradient at an interior node.
pub fn fd_gradient(f: &ScalarField, node: &[i64]) -> Result<Vec<f64>> {
    let n = f.domain().dim();
    let h = f.domain().h();
    let mut grad = vec![0.0; n];
    let mut offset = [0i64; MAX_DIM];
    for (i, g) in grad.iter_mut().enumerate() {
        offset[..n].fill(0);
        offset[i] = 1;
        let plus = stencil_value(f, node, &offset[..n])?;
        offset[i] = -1;
        let minus = stencil_value(f, node, &offset[..n])?;
        *g = (plus - minus) / (2.0 * h);
    }
    Ok(grad)
}

/// Central-difference Hessian at an interior node; symmetric by construction
/// (the four-point cross stencil for mixed entries).
pub fn fd_hessian(f: &ScalarField, node: &[i64]) -> Result<SymTensor> {
    let n = f.domain().dim();
    let h = f.domain().h();
    let center = stencil_value(f, node, &vec![0; n])?;
    let mut out = SymTensor::zeros(n)?;
    let mut offset = [0i64; MAX_DIM];
    for i in 0..n {
        offset[..n].fill(0);
        offset[i] = 1;
        let plus = stencil_value(f, node, &offset[..n])?;
        offset[i] = -1;
        let minus = stencil_value(f, node, &offset[..n])?;
        out.set(i, i, (plus - 2.0 * center + minus) / (h * h));
        for j in i + 1..n {
            offset[..n].fill(0);
            offset[i] = 1;
            offset[j] = 1;
            let pp = stencil_value(f, node, &offset[..n])?;
            offset[j] = -1;
            let pm = stencil_value(f, node, &offset[..n])?;
            offset[i] = -1;
            offset[j] = 1;
            let mp = stencil_value(f, node, &offset[..n])?;
            offset[j] = -1;
            let mm = stencil_value(f, node, &offset[..n])?;
            out.set(i, j, (pp - pm - mp + mm) / (4.0 * h * h));
        }
    }
    Ok(out)
}

/// Central-difference Laplacian at an interior node.
pub fn fd_laplacian(f: &ScalarField, node: &[i64]) -> Result<f64> {
    let n = f.domain().dim();
    let h = f.domain().h();
    let center = stencil_value(f, node, &vec![0; n])?;
    let mut lap = 0.0;
    let mut offset = [0i64; MAX_DIM];
    for i in 0..n {
        offset[..n].fill(0);
        offset[i] = 1;
        let plus = stencil_value(f, node, &offset[..n])?;
        offset[i] = -1;
        let minus = stencil_value(f, node, &offset[..n])?;
        lap += (plus - 2.0 * center + minus) / (h * h);
    }
    Ok(lap)
}

/// Central-difference gradient of a callable at an arbitrary point.
pub fn fd_gradient_fn(f: impl Fn(&[f64]) -> f64, x: &[f64], step: f64) -> Vec<f64> {
    let mut grad = vec![0.0; x.len()];
    let mut buf = x.to_vec();
    for i in 0..x.len() {
        buf[i] = x[i] + step;
        let plus = f(&buf);
        buf[i] = x[i] - step;
        let minus = f(&buf);
        buf[i] = x[i];
        grad[i] = (plus - minus) / (2.0 * step);
    }
    grad
}

/// Central-difference Hessian of a callable at an arbitrary point.
pub fn fd_hessian_fn(f: impl Fn(&[f64]) -> f64, x: &[f64], step: f64) -> Result<SymTensor> {
    let n = x.len();
    let center = f(x);
    let mut buf = x.to_vec();
    SymTensor::from_upper_fn(n, |i, j| {
        if i == j {
            buf.copy_from_slice(x);
            buf[i] = x[i] + step;
            let plus = f(&buf);
            buf[i] = x[i] - step;
            let minus = f(&buf);
            (plus - 2.0 * center + minus) / (step * step)
        } else {
            buf.copy_from_slice(x);
            buf[i] = x[i] + step;
            buf[j] = x[j] + step;
            let pp = f(&buf);
            buf[j] = x[j] - step;
            let pm = f(&buf);
            buf[i] = x[i] - step;
            buf[j] = x[j] + step;
            let mp = f(&buf);
            buf[j] = x[j] - step;
            let mm = f(&buf);
            (pp - pm - mp + mm) / (4.0 * step * step)
        }
    })
}
