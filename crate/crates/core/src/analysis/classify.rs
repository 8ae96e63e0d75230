//! Classification of isolated singularities: fundamental-solution growth
//! versus bounded Holder-extendable behavior.

use serde::Serialize;

use super::trend::linear_fit;
use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::symmat::MAX_DIM;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingularityClass {
    BoundedExtendable,
    GreensRate,
    Indeterminate,
}

#[derive(Clone, Debug, Serialize)]
pub struct SingularityVerdict {
    pub class: SingularityClass,
    /// Fitted slope of `u` against `log d` over the fit shells.
    pub slope: f64,
    /// Fitted slope of the shell minima; near zero certifies a uniform lower
    /// bound toward the puncture.
    pub min_slope: f64,
    /// Oscillation of `u - 2 log d` across the fit shells.
    pub deviation_osc: f64,
    pub shells_total: usize,
    pub shells_used: usize,
    pub notes: String,
}

/// Tunables of the shell classifier. The defaults make the two model fields
/// (the log-singular factor and the stereographic factor) classify correctly
/// with margin.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ClassifyConfig {
    /// `|slope - 2|` tolerance for the greens-rate branch.
    pub slope_tol: f64,
    /// Window for the oscillation of `u - 2 log d` in u-units.
    pub deviation_window: f64,
    /// `|min slope|` tolerance for the bounded branch.
    pub bounded_slope_tol: f64,
    /// Minimum dyadic shell count.
    pub min_shells: usize,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            slope_tol: 0.05,
            deviation_window: 1.0,
            bounded_slope_tol: 0.1,
            min_shells: 4,
        }
    }
}

struct ShellStats {
    mean_log_d: f64,
    mean_u: f64,
    min_u: f64,
    dev_min: f64,
    dev_max: f64,
}

/// Shell-statistics classifier over `(d, u)` samples. Fits run on the
/// innermost shells, where the asymptotics at the puncture live; outer
/// shells would bias bounded fields that still vary at unit scale.
pub fn classify_samples(
    samples: &[(f64, f64)],
    r_outer: f64,
    cfg: &ClassifyConfig,
) -> Result<SingularityVerdict> {
    if samples.iter().any(|&(d, _)| !(d > 0.0)) {
        return Err(Error::InvalidInput(
            "classification samples must have positive distance".into(),
        ));
    }
    // dyadic shells (r_outer 2^{-j-1}, r_outer 2^{-j}]
    let mut shells: Vec<Vec<(f64, f64)>> = Vec::new();
    let d_min = samples
        .iter()
        .map(|&(d, _)| d)
        .fold(f64::INFINITY, f64::min);
    let mut lo = r_outer;
    while lo > d_min * (1.0 - 1e-12) && shells.len() < 60 {
        shells.push(Vec::new());
        lo *= 0.5;
    }
    for &(d, u) in samples {
        if d > r_outer {
            continue;
        }
        // shell index: largest j with d <= r_outer 2^{-j}
        let j = (r_outer / d).log2().floor() as usize;
        let j = j.min(shells.len() - 1);
        shells[j].push((d, u));
    }
    let stats: Vec<ShellStats> = shells
        .iter()
        .filter(|s| s.len() >= 2)
        .map(|s| {
            let inv = 1.0 / s.len() as f64;
            let mean_log_d = s.iter().map(|(d, _)| d.ln()).sum::<f64>() * inv;
            let mean_u = s.iter().map(|(_, u)| u).sum::<f64>() * inv;
            let min_u = s.iter().map(|(_, u)| *u).fold(f64::INFINITY, f64::min);
            let devs = s.iter().map(|(d, u)| u - 2.0 * d.ln());
            let dev_min = devs.clone().fold(f64::INFINITY, f64::min);
            let dev_max = devs.fold(f64::NEG_INFINITY, f64::max);
            ShellStats {
                mean_log_d,
                mean_u,
                min_u,
                dev_min,
                dev_max,
            }
        })
        .collect();

    let total = stats.len();
    if total < cfg.min_shells {
        return Err(Error::Resolution(format!(
            "classifier needs >= {} populated dyadic shells, got {total}",
            cfg.min_shells
        )));
    }

    // innermost shells carry the asymptotics
    let used = (total / 2).max(3).min(total);
    let fit = &stats[total - used..];

    let xs: Vec<f64> = fit.iter().map(|s| s.mean_log_d).collect();
    let ys: Vec<f64> = fit.iter().map(|s| s.mean_u).collect();
    let (slope, _, _) = linear_fit(&xs, &ys)?;
    let mins: Vec<f64> = fit.iter().map(|s| s.min_u).collect();
    let (min_slope, _, _) = linear_fit(&xs, &mins)?;
    let dev_min = fit.iter().map(|s| s.dev_min).fold(f64::INFINITY, f64::min);
    let dev_max = fit
        .iter()
        .map(|s| s.dev_max)
        .fold(f64::NEG_INFINITY, f64::max);
    let deviation_osc = dev_max - dev_min;

    let (class, notes) = if (slope - 2.0).abs() <= cfg.slope_tol
        && deviation_osc <= cfg.deviation_window
    {
        (
            SingularityClass::GreensRate,
            format!("u tracks 2 log d with oscillation {deviation_osc:.3}"),
        )
    } else if min_slope.abs() <= cfg.bounded_slope_tol {
        (
            SingularityClass::BoundedExtendable,
            format!("shell minima stable (slope {min_slope:.3})"),
        )
    } else {
        (
            SingularityClass::Indeterminate,
            format!("slope {slope:.3} matches neither branch of the dichotomy"),
        )
    };

    Ok(SingularityVerdict {
        class,
        slope,
        min_slope,
        deviation_osc,
        shells_total: total,
        shells_used: used,
        notes,
    })
}

/// Classifies a punctured grid field by its dyadic shell statistics.
pub fn singularity_classify(u: &ScalarField, cfg: &ClassifyConfig) -> Result<SingularityVerdict> {
    let dom = u.domain();
    let mut samples = Vec::with_capacity(dom.active_count());
    let mut idx = [0i64; MAX_DIM];
    for flat in dom.active_flat_iter() {
        dom.decode_into(flat, &mut idx);
        let d = dom.distance(&idx[..dom.dim()]);
        if d > 0.0 {
            samples.push((d, u.value_flat(flat)));
        }
    }
    classify_samples(&samples, dom.r0(), cfg)
}
