//! Pointwise degenerate-elliptic inequality checks: the p0-Laplacian
//! subsolution property and the eigenvalue bounds that follow from the
//! relaxed cone condition `hess v + delta lap(v) g + mu v g >= 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{fd_cone_tol, fd_hessian, ScalarField};
use crate::symmat::{eigenvalues, SymTensor, MAX_DIM};

/// Discrete divergence of `|grad v|^{p-2} grad v` at an interior node, by
/// staggered-flux central differencing (fluxes on half-node faces).
pub fn p_laplacian_divergence(v: &ScalarField, node: &[i64], p: f64) -> Result<f64> {
    let dom = v.domain();
    let n = dom.dim();
    let h = dom.h();

    let shifted = |base: &[i64], axis: usize, step: i64| -> [i64; MAX_DIM] {
        let mut out = [0i64; MAX_DIM];
        out[..n].copy_from_slice(base);
        out[axis] += step;
        out
    };
    let value = |idx: &[i64]| -> Result<f64> {
        v.value(idx).map_err(|_| Error::Stencil {
            node: node.to_vec(),
            offset: idx
                .iter()
                .zip(node)
                .map(|(a, b)| a - b)
                .collect(),
        })
    };

    // gradient at the half-node x + (step/2) e_axis
    let half_gradient = |base: &[i64], axis: usize, step: i64| -> Result<Vec<f64>> {
        let far = shifted(base, axis, step);
        let far = &far[..n];
        let mut grad = vec![0.0; n];
        for j in 0..n {
            if j == axis {
                grad[j] = step as f64 * (value(far)? - value(base)?) / h;
            } else {
                let a = (value(&shifted(base, j, 1)[..n])? - value(&shifted(base, j, -1)[..n])?)
                    / (2.0 * h);
                let fp = shifted(far, j, 1);
                let fm = shifted(far, j, -1);
                let b = (value(&fp[..n])? - value(&fm[..n])?) / (2.0 * h);
                grad[j] = 0.5 * (a + b);
            }
        }
        Ok(grad)
    };

    let mut div = 0.0;
    for axis in 0..n {
        let gp = half_gradient(node, axis, 1)?;
        let gm_base = shifted(node, axis, -1);
        let gm = half_gradient(&gm_base[..n], axis, 1)?;
        let np = gp.iter().map(|g| g * g).sum::<f64>().sqrt();
        let nm = gm.iter().map(|g| g * g).sum::<f64>().sqrt();
        let fp = np.powf(p - 2.0) * gp[axis];
        let fm = nm.powf(p - 2.0) * gm[axis];
        div += (fp - fm) / h;
    }
    Ok(div)
}

#[derive(Clone, Debug, Serialize)]
pub struct PLaplacianReport {
    pub p0: f64,
    pub mu: f64,
    /// The constant in the subsolution inequality: `C = (p0 - 2) mu`.
    pub c: f64,
    pub nodes_checked: usize,
    pub nodes_skipped: usize,
    /// Minimum over nodes of the normalized defect
    /// `(div(|grad v|^{p0-2} grad v) + C |grad v|^{p0-2} v) / scale`.
    pub min_normalized_defect: f64,
    pub max_abs_divergence: f64,
    pub passed: bool,
}

/// Verifies `div(|grad v|^{p0-2} grad v) >= -C |grad v|^{p0-2} v - tol` with
/// `p0 = 2 + 1/delta` and `C = (p0-2) mu`, at interior nodes where the
/// relaxed cone condition `hess v + delta lap(v) g + mu v g >= -tol` holds.
pub fn p_laplacian_defect(v: &ScalarField, delta: f64, mu: f64) -> Result<PLaplacianReport> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!(
            "p_laplacian_defect requires delta > 0 (p0 finite), got {delta}"
        )));
    }
    if mu < 0.0 {
        return Err(Error::InvalidInput(format!("mu must be >= 0, got {mu}")));
    }
    let p0 = 2.0 + 1.0 / delta;
    let c = (p0 - 2.0) * mu;
    let dom = v.domain();
    let n = dom.dim();
    let h = dom.h();

    let mut checked = 0usize;
    let mut skipped = 0usize;
    let mut min_defect = f64::INFINITY;
    let mut max_div = 0.0f64;
    let mut idx = [0i64; MAX_DIM];
    for flat in dom.interior_flat_iter() {
        dom.decode_into(flat, &mut idx);
        let node = &idx[..n];
        let d = dom.distance(node);
        let val = v.value_flat(flat);
        if !(val > 0.0) {
            return Err(Error::InvalidInput(format!(
                "p_laplacian_defect requires v > 0; v = {val} at {node:?}"
            )));
        }
        let hess = fd_hessian(v, node)?;
        let lap = hess.trace();
        let relaxed = hess
            .add_scaled_identity(delta * lap + mu * val);
        let lam = eigenvalues(&relaxed)?;
        let scale = hess.frobenius_norm().max(mu * val).max(1e-30);
        if lam.min() < -fd_cone_tol(h, d) * scale {
            skipped += 1;
            continue;
        }
        checked += 1;

        let div = p_laplacian_divergence(v, node, p0)?;
        max_div = max_div.max(div.abs());
        let grad = crate::fields::fd_gradient(v, node)?;
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        let weight = gnorm.powf(p0 - 2.0);
        let defect = div + c * weight * val;
        // normalize by the inequality's own scale; FD error in the staggered
        // divergence of a d-homogeneous field enters at (h/d)^2 relative to
        // the flux scale weight/d
        let norm = (weight * val.max(1.0)).max(1e-30);
        min_defect = min_defect.min(defect / norm);
    }
    if checked == 0 {
        return Err(Error::EmptyDomain(
            "no interior node satisfied the relaxed cone precondition".into(),
        ));
    }
    let tol = p_laplacian_tolerance(h, dom.r_exc().max(4.0 * h));
    Ok(PLaplacianReport {
        p0,
        mu,
        c,
        nodes_checked: checked,
        nodes_skipped: skipped,
        min_normalized_defect: min_defect,
        max_abs_divergence: max_div,
        passed: min_defect >= -tol,
    })
}

/// FD-error allowance for the normalized p0-Laplacian defect: second-order
/// truncation of the staggered fluxes, amplified by the derivative scale at
/// the innermost usable distance.
pub fn p_laplacian_tolerance(h: f64, d_min: f64) -> f64 {
    let d = d_min.min(1.0);
    10.0 * h * h / (d * d * d * d)
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenBoundsOutcome {
    pub precondition_ok: bool,
    pub bounds_ok: bool,
    pub corollary_ok: bool,
    pub nu_min: f64,
    pub nu_max: f64,
    pub laplacian: f64,
    pub lower: f64,
    pub upper: f64,
    pub c0: f64,
    pub c1: f64,
}

/// The eigenvalue bounds implied by `hess v + delta lap(v) g + mu v g >= 0`:
/// every eigenvalue `nu` of `hess v` satisfies
///
/// `-delta lap(v) - mu v <= nu <= (1 + (n-1) delta) lap(v) + (n-1) mu v`,
///
/// together with the corollary `lap(v) >= c0 |hess v| - C1 v`, where
/// `c0 = 1/(1 + (n-1) delta)` and `C1 = c0 (n-1) mu + 2 n mu / (1 + n delta)`.
pub fn hessian_eigen_bounds(
    hess: &SymTensor,
    v: f64,
    delta: f64,
    mu: f64,
    tau: f64,
) -> Result<EigenBoundsOutcome> {
    if !(delta >= 0.0) || mu < 0.0 || !(v >= 0.0) {
        return Err(Error::InvalidInput(
            "hessian_eigen_bounds requires delta >= 0, mu >= 0, v >= 0".into(),
        ));
    }
    let n = hess.dim() as f64;
    let lam = eigenvalues(hess)?;
    let lap = hess.trace();
    let precondition_ok = lam.min() + delta * lap + mu * v >= -tau;

    let lower = -delta * lap - mu * v - tau;
    let upper = (1.0 + (n - 1.0) * delta) * lap + (n - 1.0) * mu * v + tau;
    let bounds_ok = lam.min() >= lower && lam.max() <= upper;

    let c0 = 1.0 / (1.0 + (n - 1.0) * delta);
    let c1 = c0 * (n - 1.0) * mu + 2.0 * n * mu / (1.0 + n * delta);
    let op = lam.values().iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let corollary_ok = lap >= c0 * op - c1 * v - tau;

    Ok(EigenBoundsOutcome {
        precondition_ok,
        bounds_ok,
        corollary_ok,
        nu_min: lam.min(),
        nu_max: lam.max(),
        laplacian: lap,
        lower,
        upper,
        c0,
        c1,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenBoundsReport {
    pub delta: f64,
    pub mu: f64,
    pub nodes_checked: usize,
    pub nodes_skipped: usize,
    pub passed: bool,
}

/// Field-level sweep of [`hessian_eigen_bounds`] over interior nodes; nodes
/// failing the precondition (beyond FD tolerance) are skipped and counted.
pub fn hessian_eigen_bounds_field(
    v: &ScalarField,
    delta: f64,
    mu: f64,
) -> Result<EigenBoundsReport> {
    let dom = v.domain();
    let n = dom.dim();
    let h = dom.h();
    let mut checked = 0usize;
    let mut skipped = 0usize;
    let mut passed = true;
    let mut idx = [0i64; MAX_DIM];
    for flat in dom.interior_flat_iter() {
        dom.decode_into(flat, &mut idx);
        let node = &idx[..n];
        let hess = fd_hessian(v, node)?;
        let val = v.value_flat(flat);
        let scale = hess.frobenius_norm().max(mu * val.abs()).max(1.0);
        let tau = fd_cone_tol(h, dom.distance(node)) * scale;
        let out = hessian_eigen_bounds(&hess, val.max(0.0), delta, mu, tau)?;
        if !out.precondition_ok {
            skipped += 1;
            continue;
        }
        checked += 1;
        if !(out.bounds_ok && out.corollary_ok) {
            passed = false;
        }
    }
    if checked == 0 {
        return Err(Error::EmptyDomain(
            "no interior node satisfied the relaxed cone precondition".into(),
        ));
    }
    Ok(EigenBoundsReport {
        delta,
        mu,
        nodes_checked: checked,
        nodes_skipped: skipped,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Generator, GridDomain};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn annulus(res: usize) -> GridDomain {
        GridDomain::with_resolution(3, &[0.0; 3], 1.0, 0.45, res).unwrap()
    }

    #[test]
    fn model_power_is_p0_harmonic() {
        // v = |x|^gamma with (n, delta) = (3, 1/3): p0 = 5 and the radial
        // divergence vanishes identically; FD values shrink with h. The max
        // is taken over a fixed comparison region so the resolutions see the
        // same derivative scales.
        let mut maxima = Vec::new();
        for &res in &[32usize, 64] {
            let dom = annulus(res);
            let v = ScalarField::from_generator(dom, Generator::abs_power(3, 0.5)).unwrap();
            let mut max_div = 0.0f64;
            for idx in v.domain().interior_nodes() {
                let d = v.domain().distance(&idx);
                if !(0.55..=0.9).contains(&d) {
                    continue;
                }
                let div = p_laplacian_divergence(&v, &idx, 5.0).unwrap();
                max_div = max_div.max(div.abs());
            }
            maxima.push(max_div);
        }
        let order = (maxima[0] / maxima[1]).log2();
        assert!(order >= 1.5, "observed order {order}, maxima {maxima:?}");
    }

    #[test]
    fn squared_field_has_closed_form_p_laplacian() {
        // v = |x|^2: div(|grad v|^{p-2} grad v) = 2^{p-1}(p + n - 2) |x|^{p-2}
        let p = 5.0;
        let dom = annulus(64);
        let v = ScalarField::from_generator(dom, Generator::abs_squared(3).unwrap()).unwrap();
        for idx in v.domain().interior_nodes().step_by(97) {
            let d = v.domain().distance(&idx);
            let expect = 2.0f64.powf(p - 1.0) * (p + 1.0) * d.powf(p - 2.0);
            let div = p_laplacian_divergence(&v, &idx, p).unwrap();
            assert!(
                (div - expect).abs() <= 0.02 * expect,
                "at d={d}: {div} vs {expect}"
            );
        }
    }

    #[test]
    fn constant_field_has_zero_divergence() {
        let dom = annulus(32);
        let v = ScalarField::constant(dom, 2.0).unwrap();
        for idx in v.domain().interior_nodes().step_by(53) {
            assert_eq!(p_laplacian_divergence(&v, &idx, 5.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn defect_report_passes_on_model_power() {
        let dom = annulus(64);
        let v = ScalarField::from_generator(dom, Generator::abs_power(3, 0.5)).unwrap();
        let rep = p_laplacian_defect(&v, 1.0 / 3.0, 0.0).unwrap();
        assert!(rep.passed, "min defect {}", rep.min_normalized_defect);
        assert!((rep.p0 - 5.0).abs() < 1e-14);
        assert_eq!(rep.c, 0.0);

        // delta = 0 is rejected (p0 infinite)
        assert!(p_laplacian_defect(&v, 0.0, 0.0).is_err());
    }

    #[test]
    fn eigen_bounds_on_convex_example() {
        // v = |x|^2 at delta = 1/4, mu = 0: nu = 2, lap = 2n
        let n = 4;
        let hess = SymTensor::identity(n).unwrap().scale(2.0);
        let out = hessian_eigen_bounds(&hess, 1.0, 0.25, 0.0, 0.0).unwrap();
        assert!(out.precondition_ok && out.bounds_ok && out.corollary_ok);
        assert_eq!(out.laplacian, 8.0);
        assert_eq!(out.lower, -2.0);
        assert!((out.upper - (1.0 + 3.0 * 0.25) * 8.0).abs() < 1e-14);
    }

    #[test]
    fn eigen_bounds_boundary_case_for_model_power() {
        // v = |x|^gamma at |x| = 1, mu = 0: nu_min = gamma(gamma-1) equals
        // -delta lap(v) exactly
        let n = 3;
        let delta = 1.0 / 3.0;
        let gamma = 0.5;
        let hess = SymTensor::from_diag(&[gamma * (gamma - 1.0), gamma, gamma]).unwrap();
        let out = hessian_eigen_bounds(&hess, 1.0, delta, 0.0, 1e-13).unwrap();
        assert!(out.precondition_ok);
        assert!(out.bounds_ok);
        let lap = gamma * (gamma + n as f64 - 2.0);
        assert!((out.nu_min + delta * lap).abs() < 1e-14);
    }

    #[test]
    fn eigen_bounds_random_property() {
        // 10^5 random matrices satisfying the relaxed condition with mu = 1,
        // v = 1 all satisfy the bounds and the corollary
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let mut accepted = 0u64;
        while accepted < 100_000 {
            let n = rng.gen_range(3..=6);
            let delta = rng.gen_range(0.0..1.0 / (n as f64 - 2.0));
            let hess = SymTensor::from_upper_fn(n, |_, _| rng.gen_range(-1.5..1.5)).unwrap();
            let out = hessian_eigen_bounds(&hess, 1.0, delta, 1.0, 0.0).unwrap();
            if !out.precondition_ok {
                continue;
            }
            accepted += 1;
            assert!(out.bounds_ok, "bounds violated: {out:?}");
            assert!(out.corollary_ok, "corollary violated: {out:?}");
        }
    }

    #[test]
    fn eigen_bounds_field_sweep() {
        let dom = annulus(32);
        let v = ScalarField::from_generator(dom, Generator::abs_power(3, 0.5)).unwrap();
        let rep = hessian_eigen_bounds_field(&v, 1.0 / 3.0, 0.0).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(rep.nodes_checked > 100);
    }
}
