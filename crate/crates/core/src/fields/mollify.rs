//! Mollification of grid fields by a compactly supported radial bump, the
//! cone-preservation check it enables, and the Lambda-lift that turns a
//! cone form into a plain delta-convex field.

use std::sync::Arc;

use serde::Serialize;

use super::fd::{fd_cone_tol, fd_hessian};
use super::{unit_sphere_area, ScalarField};
use crate::cones::gamma_delta_margin_raw;
use crate::error::{Error, Result};
use crate::symmat::{eigenvalues, SymTensor, MAX_DIM};

/// A spherically symmetric mollifier: identically 1 on `|x| < 1`, a quintic
/// smoothstep transition on `1 <= |x| <= 2`, and 0 beyond. The normalization
/// constant making the profile integrate to 1 over R^n is computed by radial
/// midpoint quadrature.
#[derive(Clone, Debug, Serialize)]
pub struct MollifierSpec {
    dim: usize,
    normalization: f64,
}

impl MollifierSpec {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 1 || dim > MAX_DIM {
            return Err(Error::InvalidInput(format!(
                "mollifier dimension must be in 1..=8, got {dim}"
            )));
        }
        // integral of profile(|x|) over R^n by radial midpoint quadrature
        let steps = 1 << 20;
        let dr = 2.0 / steps as f64;
        let mut integral = 0.0;
        for i in 0..steps {
            let r = (i as f64 + 0.5) * dr;
            integral += Self::profile(r) * r.powi(dim as i32 - 1) * dr;
        }
        integral *= unit_sphere_area(dim);
        Ok(MollifierSpec {
            dim,
            normalization: integral,
        })
    }

    /// The unnormalized radial profile.
    pub fn profile(r: f64) -> f64 {
        if r < 1.0 {
            1.0
        } else if r >= 2.0 {
            0.0
        } else {
            // quintic smoothstep from 1 down to 0 on [1, 2]
            let t = r - 1.0;
            1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
        }
    }

    /// The normalized density `rho(|x|)`, integrating to 1 over R^n.
    pub fn density(&self, r: f64) -> f64 {
        Self::profile(r) / self.normalization
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn plateau_radius(&self) -> f64 {
        1.0
    }

    pub fn support_radius(&self) -> f64 {
        2.0
    }
}

/// Discrete mollification `W_h(x) = sum_y rho((x-y)/h_m) W(y) / sum_y rho`,
/// restricted to output nodes whose full `2 h_m`-ball is active. The discrete
/// weight normalization reproduces constants exactly; by symmetry of the
/// stencil, linear fields as well.
pub fn mollify(w: &ScalarField, h_m: f64, rho: &MollifierSpec) -> Result<ScalarField> {
    let dom = w.domain();
    let n = dom.dim();
    if rho.dim() != n {
        return Err(Error::InvalidInput(format!(
            "mollifier dimension {} does not match field dimension {n}",
            rho.dim()
        )));
    }
    let h = dom.h();
    if h_m < 2.0 * h * (1.0 - 1e-12) {
        return Err(Error::InvalidInput(format!(
            "mollification scale h_m = {h_m} must be at least twice the grid spacing {h}"
        )));
    }

    // weights depend only on the integer offset; precompute the stencil
    let support = rho.support_radius() * h_m;
    let reach = (support / h).ceil() as i64;
    let mut offsets: Vec<([i64; MAX_DIM], f64)> = Vec::new();
    let mut offset = [0i64; MAX_DIM];
    offset[..n].fill(-reach);
    'outer: loop {
        let dist = h
            * offset[..n]
                .iter()
                .map(|&o| (o * o) as f64)
                .sum::<f64>()
                .sqrt();
        if dist <= support {
            let weight = MollifierSpec::profile(dist / h_m);
            if weight > 0.0 {
                offsets.push((offset, weight));
            }
        }
        let mut axis = 0;
        loop {
            if axis == n {
                break 'outer;
            }
            offset[axis] += 1;
            if offset[axis] <= reach {
                break;
            }
            offset[axis] = -reach;
            axis += 1;
        }
    }
    let weight_sum: f64 = offsets.iter().map(|(_, w)| w).sum();

    let total = dom.total_nodes();
    let mut out_active = vec![false; total];
    let mut out_values = vec![f64::NAN; total];
    let mut idx = [0i64; MAX_DIM];
    let mut probe = [0i64; MAX_DIM];
    let mut any = false;
    for flat in dom.active_flat_iter() {
        dom.decode_into(flat, &mut idx);
        let mut acc = 0.0;
        let mut eligible = true;
        for (off, wgt) in &offsets {
            for a in 0..n {
                probe[a] = idx[a] + off[a];
            }
            match dom.flat(&probe[..n]) {
                Some(pf) if dom.is_active_flat(pf) => acc += wgt * w.value_flat(pf),
                _ => {
                    eligible = false;
                    break;
                }
            }
        }
        if eligible {
            out_active[flat] = true;
            out_values[flat] = acc / weight_sum;
            any = true;
        }
    }
    if !any {
        return Err(Error::EmptyDomain(format!(
            "no node has its full {support:.3}-ball active; shrink h_m or widen the domain"
        )));
    }
    let out_dom = Arc::new(dom.restrict(out_active)?);
    Ok(ScalarField::from_raw(out_dom, out_values, None))
}

/// Result of [`mollified_hessian_cone_check`].
#[derive(Clone, Debug, Serialize)]
pub struct MollifyConeReport {
    pub delta: f64,
    pub h_m: f64,
    /// Interior nodes of the input whose FD Hessian sits outside the closed
    /// cone by more than the FD tolerance. Non-empty means the precondition
    /// failed and no output check ran.
    pub precondition_failures: Vec<Vec<i64>>,
    pub input_min_margin: f64,
    pub output_min_margin: f64,
    pub output_nodes_checked: usize,
    pub passed: bool,
}

/// Checks that mollification preserves Gamma_delta membership of the Hessian:
/// first that `D^2 W` lies in the closed cone (margin >= -tau_fd) at interior
/// nodes, then the same for `D^2 W_h` at the mollified nodes.
pub fn mollified_hessian_cone_check(
    w: &ScalarField,
    delta: f64,
    h_m: f64,
) -> Result<MollifyConeReport> {
    let dom = w.domain();
    let h = dom.h();
    let mut failures = Vec::new();
    let mut input_min = f64::INFINITY;
    for idx in dom.interior_nodes() {
        let hess = fd_hessian(w, &idx)?;
        let lam = eigenvalues(&hess)?;
        let margin = gamma_delta_margin_raw(lam.values(), delta);
        input_min = input_min.min(margin);
        if margin < -fd_cone_tol(h, dom.distance(&idx)) {
            failures.push(idx);
        }
    }
    if !failures.is_empty() {
        return Ok(MollifyConeReport {
            delta,
            h_m,
            precondition_failures: failures,
            input_min_margin: input_min,
            output_min_margin: f64::NAN,
            output_nodes_checked: 0,
            passed: false,
        });
    }

    let rho = MollifierSpec::new(dom.dim())?;
    let smoothed = mollify(w, h_m, &rho)?;
    let sdom = smoothed.domain();
    let mut out_min = f64::INFINITY;
    let mut checked = 0usize;
    let mut passed = true;
    for idx in sdom.interior_nodes() {
        let hess = fd_hessian(&smoothed, &idx)?;
        let lam = eigenvalues(&hess)?;
        let margin = gamma_delta_margin_raw(lam.values(), delta);
        out_min = out_min.min(margin);
        checked += 1;
        if margin < -fd_cone_tol(h, sdom.distance(&idx)) {
            passed = false;
        }
    }
    Ok(MollifyConeReport {
        delta,
        h_m,
        precondition_failures: Vec::new(),
        input_min_margin: input_min,
        output_min_margin: out_min,
        output_nodes_checked: checked,
        passed,
    })
}

/// The Lambda-lift `W = v + Lambda |x - O|^2` with
/// `Lambda = safety + max_x ||beta v(x) A(x)||_op / 2`, so that
/// `2 Lambda I - beta v A` is positive semidefinite and `W` inherits cone
/// membership from `hess(v) + beta v A`.
pub fn lambda_lift(
    v: &ScalarField,
    a_field: impl Fn(&[f64]) -> SymTensor,
    beta: f64,
    safety: f64,
) -> Result<(ScalarField, f64)> {
    let dom = v.domain();
    let n = dom.dim();
    let mut max_norm = 0.0f64;
    let mut idx = [0i64; MAX_DIM];
    let mut pos = [0.0f64; MAX_DIM];
    for flat in dom.active_flat_iter() {
        let val = v.value_flat(flat);
        if !(val > 0.0) {
            dom.decode_into(flat, &mut idx);
            return Err(Error::InvalidInput(format!(
                "lambda_lift requires v > 0 on active nodes; v = {val} at {:?}",
                &idx[..n]
            )));
        }
        dom.decode_into(flat, &mut idx);
        dom.position_into(&idx[..n], &mut pos);
        let a = a_field(&pos[..n]);
        if a.dim() != n {
            return Err(Error::InvalidInput(
                "background tensor dimension mismatch in lambda_lift".into(),
            ));
        }
        max_norm = max_norm.max(a.scale(beta * val).op_norm()?);
    }
    let lambda = safety + 0.5 * max_norm;

    let total = dom.total_nodes();
    let mut values = vec![f64::NAN; total];
    for flat in dom.active_flat_iter() {
        dom.decode_into(flat, &mut idx);
        let d = dom.distance(&idx[..n]);
        values[flat] = v.value_flat(flat) + lambda * d * d;
    }
    Ok((
        ScalarField::from_raw(v.domain_arc(), values, None),
        lambda,
    ))
}
