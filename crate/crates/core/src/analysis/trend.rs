//! Least-squares fitting and the nested-excision trend detector shared by the
//! integral estimators.

use serde::Serialize;

use crate::error::{Error, Result};

/// Ordinary least squares `y = slope * x + intercept`; returns
/// `(slope, intercept, rms_residual)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "linear fit needs >= 2 paired samples, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::InvalidInput(
            "linear fit abscissae are all identical".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut rss = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let e = y - (slope * x + intercept);
        rss += e * e;
    }
    Ok((slope, intercept, (rss / n).sqrt()))
}

/// An integral is *diverging* when its shell increments fail to decay
/// geometrically as the excision shrinks; the threshold below 1 leaves room
/// for quadrature noise while still catching log-divergence (ratio = 1).
pub const DIVERGENCE_RATIO_THRESHOLD: f64 = 0.95;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrendVerdict {
    Converging,
    Diverging,
}

/// Trend of an integral evaluated at nested excision radii `rho -> 0`.
#[derive(Clone, Debug, Serialize)]
pub struct TrendReport {
    pub verdict: TrendVerdict,
    /// `(rho, integral over d >= rho)` pairs, outermost excision first.
    pub levels: Vec<(f64, f64)>,
    /// Geometric mean of successive shell-increment ratios.
    pub increment_ratio: f64,
    /// Fitted slope of `log I` against `log(1/rho)`; the divergence rate
    /// exponent when diverging (about 0 for log-divergence).
    pub rate_exponent: f64,
}

/// Classifies nested-excision values `(rho descending, I ascending)`.
pub fn detect_trend(levels: &[(f64, f64)]) -> Result<TrendReport> {
    if levels.len() < 3 {
        return Err(Error::Resolution(format!(
            "trend detection needs >= 3 excision levels, got {}",
            levels.len()
        )));
    }
    let max_val = levels
        .iter()
        .map(|(_, v)| v.abs())
        .fold(0.0f64, f64::max)
        .max(1e-300);

    let mut ratios = Vec::new();
    let mut increments = Vec::new();
    for w in levels.windows(2) {
        increments.push(w[1].1 - w[0].1);
    }
    for w in increments.windows(2) {
        if w[0] > 1e-14 * max_val {
            ratios.push((w[1].max(0.0) / w[0]).max(1e-12));
        }
    }
    let increment_ratio = if ratios.is_empty() {
        0.0
    } else {
        (ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64).exp()
    };

    let xs: Vec<f64> = levels.iter().map(|(rho, _)| (1.0 / rho).ln()).collect();
    let ys: Vec<f64> = levels
        .iter()
        .map(|(_, v)| v.abs().max(1e-300).ln())
        .collect();
    let (rate_exponent, _, _) = linear_fit(&xs, &ys)?;

    let verdict = if increment_ratio >= DIVERGENCE_RATIO_THRESHOLD {
        TrendVerdict::Diverging
    } else {
        TrendVerdict::Converging
    };
    Ok(TrendReport {
        verdict,
        levels: levels.to_vec(),
        increment_ratio,
        rate_exponent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        let (s, b, r) = linear_fit(&xs, &ys).unwrap();
        assert!((s - 2.5).abs() < 1e-14);
        assert!((b + 1.0).abs() < 1e-14);
        assert!(r < 1e-14);
    }

    #[test]
    fn geometric_increments_converge() {
        // I(rho) = 1 - rho: increments halve with the radius
        let levels = [(0.5, 0.5), (0.25, 0.75), (0.125, 0.875), (0.0625, 0.9375)];
        let rep = detect_trend(&levels).unwrap();
        assert_eq!(rep.verdict, TrendVerdict::Converging);
        assert!((rep.increment_ratio - 0.5).abs() < 1e-12);
    }

    #[test]
    fn power_blowup_diverges_with_rate() {
        // I(rho) = rho^{-3}
        let levels: Vec<(f64, f64)> = (1..=4)
            .map(|j| {
                let rho = 0.5f64.powi(j);
                (rho, rho.powi(-3))
            })
            .collect();
        let rep = detect_trend(&levels).unwrap();
        assert_eq!(rep.verdict, TrendVerdict::Diverging);
        assert!((rep.rate_exponent - 3.0).abs() < 0.05);
        assert!(rep.increment_ratio > 1.0);
    }

    #[test]
    fn log_blowup_counts_as_diverging() {
        // I(rho) = log(1/rho): constant increments
        let levels: Vec<(f64, f64)> = (1..=4)
            .map(|j| {
                let rho = 0.5f64.powi(j);
                (rho, (1.0 / rho).ln())
            })
            .collect();
        let rep = detect_trend(&levels).unwrap();
        assert_eq!(rep.verdict, TrendVerdict::Diverging);
        assert!((rep.increment_ratio - 1.0).abs() < 1e-12);
        assert!(rep.rate_exponent < 1.0);
    }

    #[test]
    fn constant_integral_converges() {
        let levels = [(0.5, 2.0), (0.25, 2.0), (0.125, 2.0)];
        let rep = detect_trend(&levels).unwrap();
        assert_eq!(rep.verdict, TrendVerdict::Converging);
        assert_eq!(rep.increment_ratio, 0.0);
    }
}
