//! Radial reduction of the conformal curvature equations on a flat
//! background.
//!
//! For a radial factor `u(r)` the transformed Schouten tensor has spectrum
//! `(lam_rad, lam_tan x (n-1))` with
//!
//! `lam_rad = u'' + (u')^2 / 2`,  `lam_tan = u'/r - (u')^2 / 2`,
//!
//! and `sigma_k` depends affinely on `lam_rad`, which lets the curvature
//! equation be solved for `u''` and integrated as a second-order ODE in
//! `t = log r`.

use std::io::Write;

use serde::Serialize;

use crate::analysis::{classify_samples, detect_trend, ClassifyConfig, SingularityVerdict, TrendReport};
use crate::error::{Error, Result};
use crate::fields::unit_sphere_area;
use crate::symmat::{binomial, EigenTuple};

/// A radial profile on a log-spaced grid: `u`, `u'`, `u''` per radius.
/// Profiles built from analytic formulas store the exact derivatives.
#[derive(Clone, Debug, Serialize)]
pub struct RadialProfile {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub d2u: Vec<f64>,
}

impl RadialProfile {
    pub fn new(r: Vec<f64>, u: Vec<f64>, du: Vec<f64>, d2u: Vec<f64>) -> Result<Self> {
        if r.len() < 2 || r.len() != u.len() || r.len() != du.len() || r.len() != d2u.len() {
            return Err(Error::InvalidInput(
                "radial profile arrays must share a length >= 2".into(),
            ));
        }
        if r[0] <= 0.0 || r.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "radial grid must be strictly increasing and positive".into(),
            ));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&u) || !finite(&du) || !finite(&d2u) {
            return Err(Error::InvalidInput("radial profile has non-finite entries".into()));
        }
        Ok(RadialProfile { r, u, du, d2u })
    }

    /// Samples an analytic profile `r -> (u, u', u'')` on a log-spaced grid.
    pub fn from_analytic(
        r_min: f64,
        r_max: f64,
        points: usize,
        f: impl Fn(f64) -> (f64, f64, f64),
    ) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min) || points < 2 {
            return Err(Error::InvalidInput("bad radial grid parameters".into()));
        }
        let mut r = Vec::with_capacity(points);
        let mut u = Vec::with_capacity(points);
        let mut du = Vec::with_capacity(points);
        let mut d2u = Vec::with_capacity(points);
        let lt0 = r_min.ln();
        let lt1 = r_max.ln();
        for i in 0..points {
            let t = lt0 + (lt1 - lt0) * i as f64 / (points - 1) as f64;
            let rr = t.exp();
            let (a, b, c) = f(rr);
            r.push(rr);
            u.push(a);
            du.push(b);
            d2u.push(c);
        }
        Self::new(r, u, du, d2u)
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// CSV rows `r,u,u',u''`.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "r,u,du,d2u")?;
        for i in 0..self.len() {
            writeln!(
                out,
                "{},{},{},{}",
                self.r[i], self.u[i], self.du[i], self.d2u[i]
            )?;
        }
        Ok(())
    }
}

/// Radial and tangential Schouten eigenvalues of a radial conformal factor.
pub fn radial_schouten(u: f64, du: f64, d2u: f64, r: f64) -> Result<(f64, f64)> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    let _ = u;
    let lam_rad = d2u + 0.5 * du * du;
    let lam_tan = du / r - 0.5 * du * du;
    Ok((lam_rad, lam_tan))
}

/// The full spectrum `(lam_rad, lam_tan x (n-1))`, sorted.
pub fn radial_spectrum(n: usize, lam_rad: f64, lam_tan: f64) -> Result<EigenTuple> {
    let mut vals = vec![lam_tan; n];
    vals[0] = lam_rad;
    EigenTuple::new(&vals)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RadialOperator {
    SigmaK { k: usize },
    Quotient { k: usize, l: usize },
}

#[derive(Clone, Copy, Debug)]
pub struct RadialOdeConfig {
    /// Fixed RK4 step in `t = log r`.
    pub dt: f64,
    /// Degeneracy threshold on tangential symmetric functions.
    pub tol: f64,
}

impl Default for RadialOdeConfig {
    fn default() -> Self {
        RadialOdeConfig {
            dt: 1e-3,
            tol: 1e-9,
        }
    }
}

struct RadialRhs {
    op: RadialOperator,
    f_const: f64,
    n: usize,
    tol: f64,
}

impl RadialRhs {
    /// Solves the curvature equation for `lam_rad` given `lam_tan` and `u`.
    fn lam_rad(&self, r: f64, u: f64, lam_tan: f64) -> Result<f64> {
        let n = self.n;
        let k = match self.op {
            RadialOperator::SigmaK { k } | RadialOperator::Quotient { k, .. } => k,
        };
        if self.f_const.abs() <= self.tol {
            // degenerate equation sigma_k = 0: with a positive tangential
            // block the only admissible branch is the linear factor
            // C(n-1,k-1) lam_rad + C(n-1,k) lam_tan = 0
            return Ok(-(n as f64 - k as f64) / k as f64 * lam_tan);
        }
        let rhs = self.f_const * (-2.0 * u).exp();
        let sig = |j: usize| binomial(n - 1, j) * lam_tan.powi(j as i32);
        match self.op {
            RadialOperator::SigmaK { k } => {
                let denom = sig(k - 1);
                if denom <= self.tol {
                    return Err(Error::Degenerate {
                        r,
                        what: format!(
                            "sigma_{}(tangential block) = {denom:.3e} <= tol; the equation \
                             cannot be solved for u''",
                            k - 1
                        ),
                    });
                }
                Ok((rhs.powi(k as i32) - sig(k)) / denom)
            }
            RadialOperator::Quotient { k, l } => {
                let factor = rhs.powi((k - l) as i32);
                let denom = sig(k - 1) - factor * sig(l - 1);
                if denom <= self.tol {
                    return Err(Error::Degenerate {
                        r,
                        what: format!(
                            "cross-multiplied quotient equation degenerate (denominator \
                             {denom:.3e})"
                        ),
                    });
                }
                let lam_rad = (factor * sig(l) - sig(k)) / denom;
                // the quotient is only meaningful while sigma_l stays positive
                let sigma_l_full = lam_rad * sig(l - 1) + sig(l);
                if sigma_l_full <= self.tol {
                    return Err(Error::Degenerate {
                        r,
                        what: format!("sigma_{l} of the full spectrum lost positivity"),
                    });
                }
                Ok(lam_rad)
            }
        }
    }

    /// `d/dt (u, p)` with `p = r u'`, `t = log r`.
    fn eval(&self, t: f64, u: f64, p: f64) -> Result<(f64, f64)> {
        let r = t.exp();
        let du = p / r;
        let lam_tan = du / r - 0.5 * du * du;
        let lam_rad = self.lam_rad(r, u, lam_tan)?;
        let d2u = lam_rad - 0.5 * du * du;
        Ok((p, p + r * r * d2u))
    }
}

/// Integrates the radial curvature equation with constant right-hand side
/// `f`, from initial data `(r_a, u_a, u'_a)` across `interval`, by RK4 with a
/// fixed step in `log r`. Admissibility (the Gamma_sigma_k margin of the full
/// spectrum) is monitored at every step.
pub fn radial_ode_solve(
    op: RadialOperator,
    f_const: f64,
    n: usize,
    initial: (f64, f64, f64),
    interval: (f64, f64),
    cfg: &RadialOdeConfig,
) -> Result<RadialProfile> {
    let (k, l) = match op {
        RadialOperator::SigmaK { k } => (k, 0),
        RadialOperator::Quotient { k, l } => (k, l),
    };
    if n < 3 || k < 1 || k > n || (l != 0 && (l >= k || l < 1)) {
        return Err(Error::InvalidInput(format!(
            "bad radial operator indices: n = {n}, k = {k}, l = {l}"
        )));
    }
    if f_const < 0.0 {
        return Err(Error::InvalidInput(format!(
            "constant right-hand side must be >= 0, got {f_const}"
        )));
    }
    let (r_a, u_a, du_a) = initial;
    let (r_lo, r_hi) = interval;
    if !(r_lo > 0.0 && r_lo < r_hi && r_a >= r_lo && r_a <= r_hi) {
        return Err(Error::InvalidInput(format!(
            "interval must satisfy 0 < r_lo <= r_a <= r_hi (got {r_lo}, {r_a}, {r_hi})"
        )));
    }
    if !(cfg.dt > 0.0) {
        return Err(Error::InvalidInput("step must be positive".into()));
    }

    let rhs = RadialRhs {
        op,
        f_const,
        n,
        tol: cfg.tol,
    };

    // strict admissibility of the initial data when the equation is
    // non-degenerate
    {
        let lam_tan_a = du_a / r_a - 0.5 * du_a * du_a;
        if f_const.abs() > cfg.tol {
            let sig_km1 = binomial(n - 1, k - 1) * lam_tan_a.powi(k as i32 - 1);
            if sig_km1 <= cfg.tol {
                return Err(Error::Degenerate {
                    r: r_a,
                    what: format!(
                        "initial tangential block has sigma_{} = {sig_km1:.3e} <= tol",
                        k - 1
                    ),
                });
            }
        }
    }

    let mut samples: Vec<(f64, f64, f64, f64)> = Vec::new();
    let mut push_state = |t: f64, u: f64, p: f64| -> Result<()> {
        let r = t.exp();
        let du = p / r;
        let lam_tan = du / r - 0.5 * du * du;
        let lam_rad = rhs.lam_rad(r, u, lam_tan)?;
        let spectrum = radial_spectrum(n, lam_rad, lam_tan)?;
        // a numerically-zero spectrum is the degenerate boundary trajectory;
        // its normalized margin is meaningless noise
        let scale_ref = 1.0 + du * du;
        if spectrum.norm() > 1e-9 * scale_ref {
            let margin = crate::cones::gamma_sigmak_margin(&spectrum, k)?;
            if margin.margin < -1e-6 {
                return Err(Error::Degenerate {
                    r,
                    what: format!(
                        "trajectory left the closed Gamma_sigma_{k} cone (margin {:.3e})",
                        margin.margin
                    ),
                });
            }
        }
        samples.push((r, u, du, lam_rad - 0.5 * du * du));
        Ok(())
    };

    let integrate = |direction: f64,
                     t_end: f64,
                     push: &mut dyn FnMut(f64, f64, f64) -> Result<()>|
     -> Result<()> {
        let mut t = r_a.ln();
        let mut u = u_a;
        let mut p = r_a * du_a;
        let span = (t_end - t) * direction;
        if span <= 0.0 {
            return Ok(());
        }
        let steps = (span / cfg.dt).ceil() as usize;
        for _ in 0..steps {
            let dt = direction * cfg.dt.min(span);
            let dt = if direction > 0.0 {
                dt.min(t_end - t)
            } else {
                dt.max(t_end - t)
            };
            let (k1u, k1p) = rhs.eval(t, u, p)?;
            let (k2u, k2p) = rhs.eval(t + 0.5 * dt, u + 0.5 * dt * k1u, p + 0.5 * dt * k1p)?;
            let (k3u, k3p) = rhs.eval(t + 0.5 * dt, u + 0.5 * dt * k2u, p + 0.5 * dt * k2p)?;
            let (k4u, k4p) = rhs.eval(t + dt, u + dt * k3u, p + dt * k3p)?;
            u += dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            p += dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
            t += dt;
            push(t, u, p)?;
            if (direction > 0.0 && t >= t_end - 1e-15) || (direction < 0.0 && t <= t_end + 1e-15)
            {
                break;
            }
        }
        Ok(())
    };

    push_state(r_a.ln(), u_a, r_a * du_a)?;
    integrate(-1.0, r_lo.ln(), &mut push_state)?;
    integrate(1.0, r_hi.ln(), &mut push_state)?;

    samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    samples.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-15);
    let r: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let u: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let du: Vec<f64> = samples.iter().map(|s| s.2).collect();
    let d2u: Vec<f64> = samples.iter().map(|s| s.3).collect();
    RadialProfile::new(r, u, du, d2u)
}

/// Delegates to the shell classifier on the radial samples.
pub fn classify_radial(
    profile: &RadialProfile,
    cfg: &ClassifyConfig,
) -> Result<SingularityVerdict> {
    let r_min = profile.r[0];
    let r_max = *profile.r.last().unwrap();
    if r_min > r_max / 16.0 {
        return Err(Error::Resolution(format!(
            "radial classification needs r_min <= r_max/16 (got [{r_min}, {r_max}])"
        )));
    }
    let samples: Vec<(f64, f64)> = profile
        .r
        .iter()
        .copied()
        .zip(profile.u.iter().copied())
        .collect();
    classify_samples(&samples, r_max, cfg)
}

/// Conformal volume `omega_{n-1} int e^{-n u(r)} r^{n-1} dr` of a radial
/// profile, evaluated at nested lower limits for divergence detection.
pub fn radial_volume_trend(profile: &RadialProfile, n: usize) -> Result<TrendReport> {
    let r_max = *profile.r.last().unwrap();
    let r_min = profile.r[0];
    let area = unit_sphere_area(n);
    // trapezoid in t = log r of the weight e^{-n u} r^n
    let weight = |i: usize| (-(n as f64) * profile.u[i]).exp() * profile.r[i].powi(n as i32);
    let integral_from = |rho: f64| -> f64 {
        let mut acc = 0.0;
        for i in 1..profile.len() {
            if profile.r[i - 1] < rho {
                continue;
            }
            let dt = (profile.r[i] / profile.r[i - 1]).ln();
            acc += 0.5 * (weight(i) + weight(i - 1)) * dt;
        }
        area * acc
    };
    let mut levels = Vec::new();
    let mut rho = r_max * 0.5;
    while rho >= r_min * (1.0 - 1e-12) && levels.len() < 24 {
        levels.push((rho, integral_from(rho)));
        rho *= 0.5;
    }
    detect_trend(&levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{SingularityClass, TrendVerdict};
    use crate::conformal::{conformal_change, ConformalPointData};
    use crate::symmat::{eigenvalues, sigma_k, SymTensor};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn log_model(r: f64) -> (f64, f64, f64) {
        (2.0 * r.ln(), 2.0 / r, -2.0 / (r * r))
    }

    fn stereographic(r: f64) -> (f64, f64, f64) {
        let q = 1.0 + r * r;
        ((q / 2.0).ln(), 2.0 * r / q, (2.0 - 2.0 * r * r) / (q * q))
    }

    #[test]
    fn radial_schouten_examples() {
        // the model singular factor is scalar-flat: both eigenvalues vanish
        // (up to rounding in the 1/r^2 cancellation)
        for &r in &[0.1, 1.0, 7.0] {
            let (u, du, d2u) = log_model(r);
            let (a, b) = radial_schouten(u, du, d2u, r).unwrap();
            let tol = 1e-13 * (1.0 + du * du);
            assert!(a.abs() < tol && b.abs() < tol);
        }
        // constants likewise
        let (a, b) = radial_schouten(3.0, 0.0, 0.0, 2.0).unwrap();
        assert_eq!((a, b), (0.0, 0.0));
        // stereographic: both equal 2/(1+r^2)^2
        for &r in &[0.3, 1.0, 2.5] {
            let (u, du, d2u) = stereographic(r);
            let (a, b) = radial_schouten(u, du, d2u, r).unwrap();
            let expect = 2.0 / (1.0 + r * r).powi(2);
            assert!((a - expect).abs() < 1e-14);
            assert!((b - expect).abs() < 1e-14);
        }
        assert!(radial_schouten(0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn radial_schouten_matches_conformal_change() {
        // cross-module oracle at axis-aligned points
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let n = rng.gen_range(3..=6);
            let r = rng.gen_range(0.2..3.0);
            let u = rng.gen_range(-1.0..1.0);
            let du = rng.gen_range(-2.0..2.0);
            let d2u = rng.gen_range(-2.0..2.0);

            let mut grad = vec![0.0; n];
            grad[0] = du;
            let hess = SymTensor::from_upper_fn(n, |i, j| {
                if i != j {
                    0.0
                } else if i == 0 {
                    d2u
                } else {
                    du / r
                }
            })
            .unwrap();
            let p = ConformalPointData::new(SymTensor::zeros(n).unwrap(), grad, hess, u).unwrap();
            let au = conformal_change(&p).unwrap();
            let direct = eigenvalues(&au).unwrap();

            let (lam_rad, lam_tan) = radial_schouten(u, du, d2u, r).unwrap();
            let reduced = radial_spectrum(n, lam_rad, lam_tan).unwrap();
            for (a, b) in direct.values().iter().zip(reduced.values()) {
                assert!((a - b).abs() <= 1e-10 * direct.norm().max(1.0));
            }
        }
    }

    #[test]
    fn degenerate_run_preserves_the_model_solution() {
        // f = 0 with data on u = 2 log r stays on it over a decade
        for (n, k) in [(3usize, 2usize), (4, 3)] {
            let profile = radial_ode_solve(
                RadialOperator::SigmaK { k },
                0.0,
                n,
                (1.0, 0.0, 2.0),
                (0.1, 1.0),
                &RadialOdeConfig::default(),
            )
            .unwrap();
            let mut max_err = 0.0f64;
            let mut max_sigma = 0.0f64;
            for i in 0..profile.len() {
                let r = profile.r[i];
                max_err = max_err.max((profile.u[i] - 2.0 * r.ln()).abs());
                let (lr, lt) =
                    radial_schouten(profile.u[i], profile.du[i], profile.d2u[i], r).unwrap();
                let spec = radial_spectrum(n, lr, lt).unwrap();
                max_sigma = max_sigma.max(sigma_k(&spec, k).unwrap().abs());
            }
            assert!(max_err <= 1e-8, "(n,k)=({n},{k}): drift {max_err:.2e}");
            assert!(max_sigma <= 1e-8, "sigma_k residual {max_sigma:.2e}");
        }
    }

    #[test]
    fn constant_f_reproduces_the_sphere_factor() {
        // f = C(n,k)^{1/k} / 2 makes the stereographic factor an exact solution
        for (n, k) in [(3usize, 2usize), (4, 3)] {
            let f = 0.5 * binomial(n, k).powf(1.0 / k as f64);
            let r_a = 0.5;
            let (u_a, du_a, _) = stereographic(r_a);
            let profile = radial_ode_solve(
                RadialOperator::SigmaK { k },
                f,
                n,
                (r_a, u_a, du_a),
                (0.5, 2.0),
                &RadialOdeConfig::default(),
            )
            .unwrap();
            let mut max_err = 0.0f64;
            for i in 0..profile.len() {
                let (expect, _, _) = stereographic(profile.r[i]);
                max_err = max_err.max((profile.u[i] - expect).abs());
            }
            assert!(max_err <= 1e-6, "(n,k)=({n},{k}): error {max_err:.2e}");
        }
    }

    #[test]
    fn quotient_operator_also_holds_the_sphere() {
        // on the sphere A_u = a g, so (sigma_k/sigma_l)^{1/(k-l)} =
        // (C(n,k)/C(n,l))^{1/(k-l)} a
        let (n, k, l) = (4usize, 3usize, 1usize);
        let coeff = (binomial(n, k) / binomial(n, l)).powf(1.0 / (k - l) as f64);
        let f = 0.5 * coeff;
        let r_a = 0.5;
        let (u_a, du_a, _) = stereographic(r_a);
        let profile = radial_ode_solve(
            RadialOperator::Quotient { k, l },
            f,
            n,
            (r_a, u_a, du_a),
            (0.5, 2.0),
            &RadialOdeConfig::default(),
        )
        .unwrap();
        let mut max_err = 0.0f64;
        for i in 0..profile.len() {
            let (expect, _, _) = stereographic(profile.r[i]);
            max_err = max_err.max((profile.u[i] - expect).abs());
        }
        assert!(max_err <= 1e-6, "error {max_err:.2e}");
    }

    #[test]
    fn inadmissible_initial_data_is_rejected() {
        // negative tangential eigenvalue: u' < 0 at r = 1 gives lam_tan < 0
        let err = radial_ode_solve(
            RadialOperator::SigmaK { k: 2 },
            1.0,
            3,
            (1.0, 0.0, -0.5),
            (0.5, 2.0),
            &RadialOdeConfig::default(),
        )
        .unwrap_err();
        match err {
            Error::Degenerate { .. } => {}
            other => panic!("expected degeneracy error, got {other}"),
        }
    }

    #[test]
    fn classify_radial_profiles() {
        let cfg = ClassifyConfig::default();
        let model = RadialProfile::from_analytic(1.0 / 64.0, 1.0, 800, |r| {
            let (u, du, d2u) = log_model(r);
            (u + 0.7, du, d2u)
        })
        .unwrap();
        let v = classify_radial(&model, &cfg).unwrap();
        assert_eq!(v.class, SingularityClass::GreensRate);
        assert!((v.slope - 2.0).abs() <= 0.05);

        let sphere =
            RadialProfile::from_analytic(1.0 / 64.0, 1.0, 800, stereographic).unwrap();
        let v = classify_radial(&sphere, &cfg).unwrap();
        assert_eq!(v.class, SingularityClass::BoundedExtendable);

        let half = RadialProfile::from_analytic(1.0 / 64.0, 1.0, 800, |r| {
            (r.ln(), 1.0 / r, -1.0 / (r * r))
        })
        .unwrap();
        let v = classify_radial(&half, &cfg).unwrap();
        assert_eq!(v.class, SingularityClass::Indeterminate);

        // short interval is a resolution error
        let short = RadialProfile::from_analytic(0.5, 1.0, 100, log_model).unwrap();
        assert!(classify_radial(&short, &cfg).is_err());
    }

    #[test]
    fn volume_dichotomy_on_radial_profiles() {
        // greens-rate profiles have diverging conformal volume
        let model = RadialProfile::from_analytic(1e-4, 1.0, 4000, log_model).unwrap();
        let trend = radial_volume_trend(&model, 3).unwrap();
        assert_eq!(trend.verdict, TrendVerdict::Diverging);

        // bounded profiles have converging volume
        let sphere = RadialProfile::from_analytic(1e-4, 1.0, 4000, stereographic).unwrap();
        let trend = radial_volume_trend(&sphere, 3).unwrap();
        assert_eq!(trend.verdict, TrendVerdict::Converging);
    }

    #[test]
    fn profile_csv_has_expected_shape() {
        let p = RadialProfile::from_analytic(0.1, 1.0, 16, log_model).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "r,u,du,d2u");
        assert_eq!(lines.len(), 17);
        assert_eq!(lines[1].split(',').count(), 4);
    }
}
