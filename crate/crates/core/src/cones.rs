//! Membership, margin, and exponent calculus for the cones Gamma_delta and
//! Gamma_sigma_k.
//!
//! Gamma_delta is the polyhedral cone `{ lambda : lambda_i > -delta * sum_j
//! lambda_j  for all i }`; Gamma_sigma_k is the Garding cone of the k-th
//! elementary symmetric polynomial, decided here through the classical
//! characterization `sigma_j(lambda) > 0, j = 1..k`. Margins are normalized by
//! `||lambda||` so verdicts are scale invariant.

use num::rational::Ratio;
use num::{One, Signed, Zero};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symmat::{binomial, sigma_all_into, EigenTuple, MAX_DIM};

/// Default boundary tolerance on normalized margins.
pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-9;

/// Floor for the margin normalization, so the zero tuple sits on the boundary
/// instead of producing 0/0.
pub const MARGIN_SCALE_FLOOR: f64 = 1e-300;

pub type Rat = Ratio<i64>;

/// Three-way cone verdict at tolerance `boundary_tol`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    StrictInterior,
    Boundary,
    Exterior,
}

/// Signed, `||lambda||`-normalized distance to the cone boundary.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConeMargin {
    pub margin: f64,
    pub verdict: Verdict,
    pub boundary_tol: f64,
}

impl ConeMargin {
    pub fn from_margin(margin: f64, boundary_tol: f64) -> Self {
        let verdict = if margin.abs() <= boundary_tol {
            Verdict::Boundary
        } else if margin > boundary_tol {
            Verdict::StrictInterior
        } else {
            Verdict::Exterior
        };
        ConeMargin {
            margin,
            verdict,
            boundary_tol,
        }
    }

    /// Interior or boundary, i.e. membership in the closed cone.
    pub fn in_closure(&self) -> bool {
        self.verdict != Verdict::Exterior
    }
}

/// Which cone, with its dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConeSpec {
    pub dim: usize,
    pub kind: ConeKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "cone", rename_all = "kebab-case")]
pub enum ConeKind {
    GammaDelta { delta: f64 },
    GammaSigmaK { k: usize },
}

impl ConeSpec {
    pub fn gamma_delta(dim: usize, delta: f64) -> Result<Self> {
        if dim < 2 || dim > MAX_DIM {
            return Err(Error::InvalidInput(format!(
                "cone dimension must be in 2..=8, got {dim}"
            )));
        }
        if !delta.is_finite() || delta <= -1.0 / dim as f64 {
            return Err(Error::InvalidInput(format!(
                "Gamma_delta requires delta > -1/n = {:.4}, got {delta}",
                -1.0 / dim as f64
            )));
        }
        Ok(ConeSpec {
            dim,
            kind: ConeKind::GammaDelta { delta },
        })
    }

    pub fn gamma_sigma_k(dim: usize, k: usize) -> Result<Self> {
        if dim < 2 || dim > MAX_DIM {
            return Err(Error::InvalidInput(format!(
                "cone dimension must be in 2..=8, got {dim}"
            )));
        }
        if k < 1 || k > dim {
            return Err(Error::InvalidInput(format!(
                "Gamma_sigma_k requires 1 <= k <= n = {dim}, got k = {k}"
            )));
        }
        Ok(ConeSpec {
            dim,
            kind: ConeKind::GammaSigmaK { k },
        })
    }

    pub fn margin(&self, lam: &EigenTuple) -> Result<ConeMargin> {
        self.margin_with_tol(lam, DEFAULT_BOUNDARY_TOL)
    }

    pub fn margin_with_tol(&self, lam: &EigenTuple, tol: f64) -> Result<ConeMargin> {
        if lam.dim() != self.dim {
            return Err(Error::InvalidInput(format!(
                "tuple dimension {} does not match cone dimension {}",
                lam.dim(),
                self.dim
            )));
        }
        match self.kind {
            ConeKind::GammaDelta { delta } => gamma_delta_margin_with_tol(lam, delta, tol),
            ConeKind::GammaSigmaK { k } => gamma_sigmak_margin_with_tol(lam, k, tol),
        }
    }

    pub fn describe(&self) -> String {
        match self.kind {
            ConeKind::GammaDelta { delta } => format!("Gamma_delta(delta={delta})"),
            ConeKind::GammaSigmaK { k } => format!("Gamma_sigma_{k}"),
        }
    }
}

/// Raw normalized Gamma_delta margin `min_i (lambda_i + delta * S) / ||lambda||`
/// over a slice, with no validation. Hot path for samplers.
#[inline]
pub(crate) fn gamma_delta_margin_raw(vals: &[f64], delta: f64) -> f64 {
    let sum: f64 = vals.iter().sum();
    let mut min = f64::INFINITY;
    let mut norm_sq = 0.0;
    for &v in vals {
        min = min.min(v + delta * sum);
        norm_sq += v * v;
    }
    min / norm_sq.sqrt().max(MARGIN_SCALE_FLOOR)
}

/// Normalized signed margin of `lambda` relative to Gamma_delta.
pub fn gamma_delta_margin(lam: &EigenTuple, delta: f64) -> Result<ConeMargin> {
    gamma_delta_margin_with_tol(lam, delta, DEFAULT_BOUNDARY_TOL)
}

pub fn gamma_delta_margin_with_tol(
    lam: &EigenTuple,
    delta: f64,
    tol: f64,
) -> Result<ConeMargin> {
    let n = lam.dim();
    if !delta.is_finite() || delta <= -1.0 / n as f64 {
        return Err(Error::InvalidInput(format!(
            "Gamma_delta requires delta > -1/n, got delta = {delta} at n = {n}"
        )));
    }
    Ok(ConeMargin::from_margin(
        gamma_delta_margin_raw(lam.values(), delta),
        tol,
    ))
}

#[inline]
pub(crate) fn gamma_sigmak_margin_raw(vals: &[f64], k: usize) -> f64 {
    let n = vals.len();
    let mut e = [0.0; MAX_DIM + 1];
    sigma_all_into(vals, &mut e);
    let norm = vals.iter().map(|v| v * v).sum::<f64>().sqrt();
    let scale = norm.max(MARGIN_SCALE_FLOOR);
    let mut min = f64::INFINITY;
    let mut pow = 1.0;
    for j in 1..=k {
        pow *= scale;
        min = min.min(e[j] / (binomial(n, j) * pow));
    }
    min
}

/// Normalized margin relative to Gamma_sigma_k, via `sigma_j > 0, j = 1..k`.
/// Each `sigma_j` is normalized by `C(n,j) ||lambda||^j` so the scales are
/// comparable across j.
pub fn gamma_sigmak_margin(lam: &EigenTuple, k: usize) -> Result<ConeMargin> {
    gamma_sigmak_margin_with_tol(lam, k, DEFAULT_BOUNDARY_TOL)
}

pub fn gamma_sigmak_margin_with_tol(lam: &EigenTuple, k: usize, tol: f64) -> Result<ConeMargin> {
    let n = lam.dim();
    if k < 1 || k > n {
        return Err(Error::InvalidInput(format!(
            "Gamma_sigma_k requires 1 <= k <= n = {n}, got k = {k}"
        )));
    }
    Ok(ConeMargin::from_margin(
        gamma_sigmak_margin_raw(lam.values(), k),
        tol,
    ))
}

/// A finite rational or a distinguished +infinity (the delta = 0 limit of the
/// integrability exponents).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtRat {
    Finite(Rat),
    Infinity,
}

impl ExtRat {
    pub fn to_f64(&self) -> f64 {
        match self {
            ExtRat::Finite(r) => rat_to_f64(*r),
            ExtRat::Infinity => f64::INFINITY,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtRat::Infinity)
    }
}

impl std::fmt::Display for ExtRat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtRat::Finite(r) => write!(f, "{r}"),
            ExtRat::Infinity => write!(f, "inf"),
        }
    }
}

pub fn rat_to_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// The derived constants of the cone calculus, tied together by exact rational
/// identities:
///
/// * `gamma  = (1 + (2-n) delta) / (1 + delta)`
/// * `beta   = gamma / 2`, `alpha = 1 / beta`
/// * `p0     = 2 + 1/delta` (+inf at delta = 0)
/// * `p_delta = n (1 + delta) / ((n-1) delta) = n (p0 - 1) / (n - 1)`
/// * `2 delta0 = 1 + (2-n) delta`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentTable {
    pub n: usize,
    pub delta: Rat,
    pub gamma: Rat,
    pub beta: Rat,
    pub alpha: Rat,
    pub p0: ExtRat,
    pub p_delta: ExtRat,
    pub delta0: Rat,
}

impl ExponentTable {
    pub fn gamma_f64(&self) -> f64 {
        rat_to_f64(self.gamma)
    }
    pub fn beta_f64(&self) -> f64 {
        rat_to_f64(self.beta)
    }
    pub fn delta_f64(&self) -> f64 {
        rat_to_f64(self.delta)
    }
    pub fn p0_f64(&self) -> f64 {
        self.p0.to_f64()
    }
    pub fn p_delta_f64(&self) -> f64 {
        self.p_delta.to_f64()
    }
}

/// The delta for which a k-convex function is delta-convex:
/// `delta = (n-k) / (n(k-1))`, valid for k > n/2.
pub fn delta_of_k(n: usize, k: usize) -> Result<Rat> {
    if n < 3 {
        return Err(Error::Domain(format!("delta_of_k requires n >= 3, got {n}")));
    }
    if k > n {
        return Err(Error::Domain(format!("delta_of_k requires k <= n, got k = {k} > n = {n}")));
    }
    if 2 * k <= n {
        return Err(Error::Domain(format!(
            "delta_of_k requires k > n/2 (got n = {n}, k = {k})"
        )));
    }
    let d = Rat::new((n - k) as i64, (n * (k - 1)) as i64);
    debug_assert!(d >= Rat::zero() && d < Rat::new(1, (n - 2) as i64));
    Ok(d)
}

/// Populates the full exponent table from (n, delta), exactly.
pub fn exponents(n: usize, delta: Rat) -> Result<ExponentTable> {
    if n < 3 || n > MAX_DIM {
        return Err(Error::Domain(format!(
            "exponents requires 3 <= n <= 8, got {n}"
        )));
    }
    let upper = Rat::new(1, (n - 2) as i64);
    if delta.is_negative() || delta >= upper {
        return Err(Error::Domain(format!(
            "exponents requires 0 <= delta < 1/(n-2) = {upper}, got {delta}"
        )));
    }
    let one = Rat::one();
    let ni = n as i64;
    let gamma = (one + Rat::from_integer(2 - ni) * delta) / (one + delta);
    let beta = gamma / Rat::from_integer(2);
    let alpha = beta.recip();
    let (p0, p_delta) = if delta.is_zero() {
        (ExtRat::Infinity, ExtRat::Infinity)
    } else {
        let p0 = Rat::from_integer(2) + delta.recip();
        let p_delta = Rat::from_integer(ni) * (one + delta) / (Rat::from_integer(ni - 1) * delta);
        (ExtRat::Finite(p0), ExtRat::Finite(p_delta))
    };
    let delta0 = (one + Rat::from_integer(2 - ni) * delta) / Rat::from_integer(2);
    Ok(ExponentTable {
        n,
        delta,
        gamma,
        beta,
        alpha,
        p0,
        p_delta,
        delta0,
    })
}

/// The Holder exponent of the trace-modified equation with parameter tau:
/// `gamma_tau = (n-2)(2k - 2n + n tau) / (n - 2k + kn - n tau)`,
/// valid for k > n/2 and `tau0 < tau <= 1` with `tau0 = 2(n-k)/n`.
pub fn gamma_tau(n: usize, k: usize, tau: Rat) -> Result<Rat> {
    if n < 3 {
        return Err(Error::Domain(format!("gamma_tau requires n >= 3, got {n}")));
    }
    if k > n || 2 * k <= n {
        return Err(Error::Domain(format!(
            "gamma_tau requires n/2 < k <= n (got n = {n}, k = {k})"
        )));
    }
    let ni = n as i64;
    let ki = k as i64;
    let tau0 = Rat::new(2 * (ni - ki), ni);
    if tau <= tau0 || tau > Rat::one() {
        return Err(Error::Domain(format!(
            "gamma_tau requires tau0 = {tau0} < tau <= 1, got tau = {tau}"
        )));
    }
    let num = Rat::from_integer(ni - 2) * (Rat::from_integer(2 * ki - 2 * ni) + Rat::from_integer(ni) * tau);
    let den = Rat::from_integer(ni - 2 * ki + ki * ni) - Rat::from_integer(ni) * tau;
    let g = num / den;
    debug_assert!(g > Rat::zero());
    Ok(g)
}

/// Report from [`inclusion_sample_test`].
#[derive(Clone, Debug, Serialize)]
pub struct InclusionReport {
    pub n: usize,
    pub k: usize,
    pub delta: f64,
    pub samples: u64,
    pub draws: u64,
    pub acceptance_rate: f64,
    pub min_margin: f64,
    pub violations: u64,
    pub boundary_tol: f64,
    pub passed: bool,
}

/// Draws `sample_count` tuples from Gamma_sigma_k by rejection sampling over
/// `[-1,1]^n` and records the worst Gamma_delta(k,n) margin observed.
///
/// The inclusion being tested: every k-convex spectrum (k > n/2) lies in
/// Gamma_delta for `delta = (n-k)/(n(k-1))`.
pub fn inclusion_sample_test(
    n: usize,
    k: usize,
    sample_count: u64,
    seed: u64,
) -> Result<InclusionReport> {
    let delta = rat_to_f64(delta_of_k(n, k)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf = [0.0f64; MAX_DIM];
    let mut accepted = 0u64;
    let mut draws = 0u64;
    let mut min_margin = f64::INFINITY;
    let mut violations = 0u64;
    const MIN_RATE: f64 = 1e-4;

    while accepted < sample_count {
        draws += 1;
        for slot in buf.iter_mut().take(n) {
            *slot = rng.gen_range(-1.0..1.0);
        }
        if gamma_sigmak_margin_raw(&buf[..n], k) <= 0.0 {
            // acceptance-rate guard, checked once sampling has warmed up
            if draws >= 10_000 && (accepted as f64) < MIN_RATE * draws as f64 {
                return Err(Error::SamplingFailure {
                    accepted,
                    draws,
                    rate: accepted as f64 / draws as f64,
                    min_rate: MIN_RATE,
                });
            }
            continue;
        }
        accepted += 1;
        let margin = gamma_delta_margin_raw(&buf[..n], delta);
        if margin < min_margin {
            min_margin = margin;
        }
        if margin < -DEFAULT_BOUNDARY_TOL {
            violations += 1;
        }
    }

    Ok(InclusionReport {
        n,
        k,
        delta,
        samples: accepted,
        draws,
        acceptance_rate: accepted as f64 / draws as f64,
        min_margin,
        violations,
        boundary_tol: DEFAULT_BOUNDARY_TOL,
        passed: violations == 0,
    })
}

/// Ricci eigenvalues recovered from a Schouten spectrum:
/// `Ric_i = (n-2) lambda_i + sigma_1(lambda)` (flat-coordinate convention).
pub fn ricci_from_schouten(lam_a: &EigenTuple) -> Result<EigenTuple> {
    let n = lam_a.dim();
    if n < 3 {
        return Err(Error::Domain(format!(
            "ricci_from_schouten requires n >= 3, got {n}"
        )));
    }
    let s1 = lam_a.sum();
    let vals: Vec<f64> = lam_a
        .values()
        .iter()
        .map(|&l| (n as f64 - 2.0) * l + s1)
        .collect();
    EigenTuple::new(&vals)
}

/// `min_i Ric_i - [1 + (2-n) delta] sigma_1(lambda_A)`: non-negative whenever
/// `lambda_A` lies in the closed Gamma_delta cone, zero on its boundary.
pub fn ricci_lower_bound_margin(lam_a: &EigenTuple, delta: f64) -> Result<f64> {
    let ric = ricci_from_schouten(lam_a)?;
    let n = lam_a.dim() as f64;
    Ok(ric.min() - (1.0 + (2.0 - n) * delta) * lam_a.sum())
}
