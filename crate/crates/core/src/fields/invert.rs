//! Inversion coordinates `z = x / |x|^2` and the flatness check for the
//! rescaled metric `g_star = |x|^{-4} delta` in the inverted chart.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Generator, ScalarField};
use crate::error::{Error, Result};
use crate::symmat::MAX_DIM;

/// `z = x / |x|^2`; an involution fixing the unit sphere.
pub fn invert_coordinates(x: &[f64]) -> Result<Vec<f64>> {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if r2 == 0.0 {
        return Err(Error::Domain("inversion is singular at the origin".into()));
    }
    Ok(x.iter().map(|&v| v / r2).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct PullbackReport {
    pub dim: usize,
    pub samples: usize,
    pub fd_step_rel: f64,
    pub max_deviation: f64,
}

/// Verifies numerically that the pullback of `g_star = |x|^{-4} delta` under
/// inversion is the identity: samples points `z`, computes the Jacobian of
/// `x(z) = z/|z|^2` by central differences, and measures
/// `max | |x|^{-4} J^T J - I |`.
pub fn pullback_flat_check(n: usize, samples: usize, seed: u64) -> Result<PullbackReport> {
    if n < 2 || n > MAX_DIM {
        return Err(Error::InvalidInput(format!(
            "pullback check dimension must be in 2..=8, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step_rel = f64::EPSILON.cbrt();
    let mut max_dev = 0.0f64;
    let mut taken = 0usize;
    while taken < samples {
        let z: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.6..1.6)).collect();
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(0.6..=1.6).contains(&norm) {
            continue;
        }
        taken += 1;
        let step = step_rel * norm;
        // Jacobian J[k][i] = d x^k / d z^i by central differences
        let mut jac = [[0.0f64; MAX_DIM]; MAX_DIM];
        let mut buf = z.clone();
        for i in 0..n {
            buf[i] = z[i] + step;
            let xp = invert_coordinates(&buf)?;
            buf[i] = z[i] - step;
            let xm = invert_coordinates(&buf)?;
            buf[i] = z[i];
            for k in 0..n {
                jac[k][i] = (xp[k] - xm[k]) / (2.0 * step);
            }
        }
        let x = invert_coordinates(&z)?;
        let x4 = x.iter().map(|v| v * v).sum::<f64>().powi(2);
        for i in 0..n {
            for j in 0..n {
                let mut g = 0.0;
                for k in 0..n {
                    g += jac[k][i] * jac[k][j];
                }
                g /= x4;
                let target = if i == j { 1.0 } else { 0.0 };
                max_dev = max_dev.max((g - target).abs());
            }
        }
    }
    Ok(PullbackReport {
        dim: n,
        samples: taken,
        fd_step_rel: step_rel,
        max_deviation: max_dev,
    })
}

/// `Psi = u - 2 log |x - O|`, the deviation of a conformal factor from the
/// model singular profile. Requires the center to be excised.
pub fn psi_field(u: &ScalarField) -> Result<ScalarField> {
    let dom = u.domain();
    let n = dom.dim();
    let log_gen = Generator::log_singular(n);
    let center = dom.center().to_vec();
    let values: Result<Vec<(Vec<i64>, f64)>> = dom
        .active_nodes()
        .map(|idx| {
            let d = dom.distance(&idx);
            if d == 0.0 {
                return Err(Error::Domain(
                    "psi_field requires the center node to be excised (r_exc > 0)".into(),
                ));
            }
            let pos = dom.position(&idx);
            let _ = &center;
            Ok((idx.clone(), u.value(&idx)? - log_gen.value(&pos)))
        })
        .collect();
    let values = values?;
    let mut raw = vec![f64::NAN; dom.total_nodes()];
    for (idx, v) in values {
        if let Some(flat) = dom.flat(&idx) {
            raw[flat] = v;
        }
    }
    Ok(ScalarField::from_raw(u.domain_arc(), raw, None))
}
