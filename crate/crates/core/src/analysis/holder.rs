//! The barrier comparison around a point and the Holder exponent fit.

use serde::Serialize;

use super::trend::linear_fit;
use crate::cones::gamma_delta_margin_raw;
use crate::error::{Error, Result};
use crate::fields::{fd_cone_tol, fd_hessian, ScalarField};
use crate::symmat::{eigenvalues, MAX_DIM};

/// Collects `(|x - anchor|, W(x))` over active nodes within `radius` of the
/// anchor position, sorted by distance.
fn collect_ball(
    w: &ScalarField,
    anchor: &[f64],
    radius: f64,
) -> Vec<(f64, f64, Vec<i64>)> {
    let dom = w.domain();
    let n = dom.dim();
    let mut out = Vec::new();
    let mut idx = [0i64; MAX_DIM];
    let mut pos = [0.0f64; MAX_DIM];
    for flat in dom.active_flat_iter() {
        dom.decode_into(flat, &mut idx);
        dom.position_into(&idx[..n], &mut pos);
        let dist = pos[..n]
            .iter()
            .zip(anchor)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if dist <= radius {
            out.push((dist, w.value_flat(flat), idx[..n].to_vec()));
        }
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct BarrierReport {
    pub delta: f64,
    pub gamma: f64,
    pub radius: f64,
    /// Largest node distance actually present in the discrete ball; the
    /// comparison uses this as the ball radius, which is the honest discrete
    /// analogue of the continuum estimate.
    pub effective_radius: f64,
    pub oscillation: f64,
    pub nodes: usize,
    pub max_violation: f64,
    /// Interior nodes in the ball whose Hessian leaves the closed cone by
    /// more than the FD tolerance.
    pub precondition_failures: Vec<Vec<i64>>,
    pub passed: bool,
}

/// Maximum-principle barrier check: for `W` delta-convex on `B(y, R)` minus
/// the puncture,
///
/// `W(x) - W(y) <= osc_{B_R(y)} W * (|x-y| / R)^gamma + tau_fd R^2`.
pub fn barrier_oscillation_check(
    w: &ScalarField,
    delta: f64,
    y: &[i64],
    radius: f64,
) -> Result<BarrierReport> {
    let dom = w.domain();
    let n = dom.dim();
    let h = dom.h();
    if !(radius > 0.0) {
        return Err(Error::InvalidInput(format!(
            "barrier radius must be positive, got {radius}"
        )));
    }
    let anchor_value = w.value(y)?;
    let anchor_pos = dom.position(y);
    let gamma = (1.0 + (2.0 - n as f64) * delta) / (1.0 + delta);

    let ball = collect_ball(w, &anchor_pos, radius);
    if ball.len() < 2 {
        return Err(Error::Resolution(format!(
            "barrier ball of radius {radius} holds only {} nodes",
            ball.len()
        )));
    }

    // precondition: D^2 W in the closed cone on the ball, up to FD error
    let mut failures = Vec::new();
    for (dist, _, idx) in &ball {
        if !dom.is_interior(idx) {
            continue;
        }
        let hess = fd_hessian(w, idx)?;
        let lam = eigenvalues(&hess)?;
        let margin = gamma_delta_margin_raw(lam.values(), delta);
        // derivative scale set by the distance to the anchor singularity
        if margin < -fd_cone_tol(h, *dist) {
            failures.push(idx.clone());
        }
    }

    let effective_radius = ball.last().unwrap().0;
    let min = ball.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
    let max = ball.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    let oscillation = max - min;
    let slack = fd_cone_tol(h, 1.0) * radius * radius;

    let mut max_violation = f64::NEG_INFINITY;
    for (dist, value, _) in &ball {
        let bound = oscillation * (dist / effective_radius).powf(gamma) + slack;
        max_violation = max_violation.max(value - anchor_value - bound);
    }
    let passed = failures.is_empty() && max_violation <= 0.0;
    Ok(BarrierReport {
        delta,
        gamma,
        radius,
        effective_radius,
        oscillation,
        nodes: ball.len(),
        max_violation,
        precondition_failures: failures,
        passed,
    })
}

/// A fitted Holder exponent around a point.
#[derive(Clone, Debug, Serialize)]
pub struct HolderEstimate {
    pub exponent: f64,
    pub seminorm: f64,
    pub residual: f64,
    pub radius_range: (f64, f64),
    pub radii_used: usize,
    /// Set when the oscillation vanishes at every radius.
    pub constant_field: bool,
}

/// Least-squares fit of `log osc_{B_r(y)} W` against `log r` over dyadic
/// radii. The abscissa of each ball is the largest node distance it actually
/// contains, which removes the grid-quantization bias from the fit.
pub fn holder_exponent(w: &ScalarField, y: &[i64]) -> Result<HolderEstimate> {
    let dom = w.domain();
    let anchor_pos = dom.position(y);
    let offcenter = anchor_pos
        .iter()
        .zip(dom.center())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let r_max = dom.r0() - offcenter;
    if r_max <= 4.0 * dom.h() {
        return Err(Error::Resolution(
            "anchor too close to the domain boundary for dyadic balls".into(),
        ));
    }

    let ball = collect_ball(w, &anchor_pos, r_max);
    let mut radii = Vec::new();
    let mut r = r_max;
    while r >= 3.0 * dom.h() {
        radii.push(r);
        r *= 0.5;
    }
    if radii.len() < 4 {
        return Err(Error::Resolution(format!(
            "holder fit needs >= 4 dyadic radii, got {} (r_max = {r_max:.3}, h = {})",
            radii.len(),
            dom.h()
        )));
    }

    // prefix min/max over the distance-sorted ball gives every dyadic osc
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut r_eff_range = (f64::INFINITY, f64::NEG_INFINITY);
    for &rad in &radii {
        let end = ball.partition_point(|t| t.0 <= rad);
        if end < 8 {
            continue;
        }
        let slice = &ball[..end];
        let min = slice.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
        let max = slice.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
        let osc = max - min;
        let r_eff = slice.last().unwrap().0;
        if osc > 0.0 && r_eff > 0.0 {
            xs.push(r_eff.ln());
            ys.push(osc.ln());
            r_eff_range.0 = r_eff_range.0.min(r_eff);
            r_eff_range.1 = r_eff_range.1.max(r_eff);
        }
    }

    if xs.is_empty() {
        return Ok(HolderEstimate {
            exponent: f64::INFINITY,
            seminorm: 0.0,
            residual: 0.0,
            radius_range: (0.0, r_max),
            radii_used: 0,
            constant_field: true,
        });
    }
    if xs.len() < 4 {
        return Err(Error::Resolution(format!(
            "only {} usable dyadic radii around the anchor",
            xs.len()
        )));
    }
    let (slope, intercept, residual) = linear_fit(&xs, &ys)?;
    Ok(HolderEstimate {
        exponent: slope,
        seminorm: intercept.exp(),
        residual,
        radius_range: r_eff_range,
        radii_used: xs.len(),
        constant_field: false,
    })
}
