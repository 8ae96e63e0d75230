//! Pointwise conformal geometry on a flat background.
//!
//! Follows the convention that eigenvalues are taken with respect to the
//! background metric represented as the identity in the working coordinates;
//! curved backgrounds enter only through a conformal factor. The Schouten
//! tensor of a conformal metric `e^{-2u} g` is
//!
//! `A_u = A + hess(u) + du (x) du - |grad u|^2 / 2 * g`,
//!
//! and the curvature operators below act on the eigenvalue tuple of `A_u`.

use serde::Serialize;

use crate::cones::{ConeSpec, Verdict, DEFAULT_BOUNDARY_TOL};
use crate::error::{Error, Result};
use crate::symmat::{binomial, sigma_all_into, EigenTuple, SymTensor, MAX_DIM};

/// One of the curvature operators acting on Schouten eigenvalues, together
/// with its ellipticity cone.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CurvatureOperator {
    pub dim: usize,
    pub kind: OperatorKind,
    pub cone: ConeSpec,
}

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum OperatorKind {
    /// `sigma_k(lambda)^{1/k}`
    SigmaK { k: usize },
    /// `(sigma_k / sigma_l)^{1/(k-l)}`
    Quotient { k: usize, l: usize },
    /// `sigma_k^{1/k}` applied to an A^tau-shifted spectrum supplied by the
    /// caller; tau is recorded and gated at construction.
    SigmaKTau { k: usize, tau: f64 },
    /// `(prod_i (lambda_i + delta * sum lambda))^{1/n}`
    DetDelta { delta: f64 },
}

impl CurvatureOperator {
    pub fn sigma_k(dim: usize, k: usize) -> Result<Self> {
        let cone = ConeSpec::gamma_sigma_k(dim, k)?;
        Ok(CurvatureOperator {
            dim,
            kind: OperatorKind::SigmaK { k },
            cone,
        })
    }

    pub fn quotient(dim: usize, k: usize, l: usize) -> Result<Self> {
        if l < 1 || l >= k {
            return Err(Error::InvalidInput(format!(
                "quotient operator requires 1 <= l < k, got k = {k}, l = {l}"
            )));
        }
        let cone = ConeSpec::gamma_sigma_k(dim, k)?;
        Ok(CurvatureOperator {
            dim,
            kind: OperatorKind::Quotient { k, l },
            cone,
        })
    }

    /// Requires `k > n/2` and `tau0 < tau <= 1` with `tau0 = 2(n-k)/n`.
    pub fn sigma_k_tau(dim: usize, k: usize, tau: f64) -> Result<Self> {
        if 2 * k <= dim {
            return Err(Error::Domain(format!(
                "sigma_k_tau requires k > n/2, got n = {dim}, k = {k}"
            )));
        }
        let tau0 = 2.0 * (dim as f64 - k as f64) / dim as f64;
        if !(tau > tau0 && tau <= 1.0) {
            return Err(Error::Domain(format!(
                "sigma_k_tau requires tau0 = {tau0} < tau <= 1, got {tau}"
            )));
        }
        let cone = ConeSpec::gamma_sigma_k(dim, k)?;
        Ok(CurvatureOperator {
            dim,
            kind: OperatorKind::SigmaKTau { k, tau },
            cone,
        })
    }

    /// The degenerate determinant operator solved by `|x|^gamma`; requires
    /// `0 <= delta < 1/(n-2)`.
    pub fn det_delta(dim: usize, delta: f64) -> Result<Self> {
        if dim < 3 {
            return Err(Error::Domain(format!(
                "det_delta requires n >= 3, got {dim}"
            )));
        }
        if !(0.0..1.0 / (dim as f64 - 2.0)).contains(&delta) {
            return Err(Error::Domain(format!(
                "det_delta requires 0 <= delta < 1/(n-2), got {delta}"
            )));
        }
        let cone = ConeSpec::gamma_delta(dim, delta)?;
        Ok(CurvatureOperator {
            dim,
            kind: OperatorKind::DetDelta { delta },
            cone,
        })
    }
}

/// Pointwise conformal data in flat coordinates: the background Schouten
/// tensor, the conformal factor and its first two derivatives. The optional
/// `conformal_factor` records how the background tensor was produced when the
/// ambient metric is only conformally flat; it does not enter the formulas.
#[derive(Clone, Debug)]
pub struct ConformalPointData {
    pub a: SymTensor,
    pub grad_u: Vec<f64>,
    pub hess_u: SymTensor,
    pub u: f64,
    pub conformal_factor: Option<f64>,
}

impl ConformalPointData {
    pub fn new(a: SymTensor, grad_u: Vec<f64>, hess_u: SymTensor, u: f64) -> Result<Self> {
        let n = a.dim();
        if grad_u.len() != n || hess_u.dim() != n {
            return Err(Error::InvalidInput(
                "conformal point data dimensions disagree".into(),
            ));
        }
        a.check_finite()?;
        hess_u.check_finite()?;
        if !u.is_finite() || grad_u.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidInput(
                "conformal point data has non-finite entries".into(),
            ));
        }
        Ok(ConformalPointData {
            a,
            grad_u,
            hess_u,
            u,
            conformal_factor: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }
}

/// `A = (Ric - R/(2(n-1)) g) / (n-2)` with `g` the identity.
pub fn schouten_from_ricci(ric: &SymTensor, r_scalar: f64) -> Result<SymTensor> {
    let n = ric.dim();
    if n < 3 {
        return Err(Error::Domain(format!(
            "Schouten tensor requires n >= 3, got {n}"
        )));
    }
    ric.check_finite()?;
    let shift = -r_scalar / (2.0 * (n as f64 - 1.0));
    Ok(ric.add_scaled_identity(shift).scale(1.0 / (n as f64 - 2.0)))
}

/// Inverse of [`schouten_from_ricci`] specialized to flat coordinates:
/// `Ric = (n-2) A + trace(A) g`.
pub fn ricci_tensor_from_schouten(a: &SymTensor) -> Result<SymTensor> {
    let n = a.dim();
    if n < 3 {
        return Err(Error::Domain(format!(
            "Ricci reconstruction requires n >= 3, got {n}"
        )));
    }
    Ok(a.scale(n as f64 - 2.0).add_scaled_identity(a.trace()))
}

/// Conformal change of the Schouten tensor:
/// `A_u = A + hess(u) + du (x) du - |grad u|^2 / 2 * I`.
pub fn conformal_change(p: &ConformalPointData) -> Result<SymTensor> {
    let grad_sq: f64 = p.grad_u.iter().map(|g| g * g).sum();
    let outer = SymTensor::outer(&p.grad_u)?;
    Ok(p.a
        .add(&p.hess_u)
        .add(&outer)
        .add_scaled_identity(-0.5 * grad_sq))
}

/// Evaluates the curvature operator at an eigenvalue tuple in the closure of
/// its cone. Values snap to exactly 0 when the required factor is within the
/// boundary tolerance, avoiding spurious tiny negatives under fractional
/// roots.
pub fn evaluate_f(op: &CurvatureOperator, lam: &EigenTuple) -> Result<f64> {
    evaluate_f_with_tol(op, lam, DEFAULT_BOUNDARY_TOL)
}

pub fn evaluate_f_with_tol(op: &CurvatureOperator, lam: &EigenTuple, tol: f64) -> Result<f64> {
    let n = op.dim;
    if lam.dim() != n {
        return Err(Error::InvalidInput(format!(
            "tuple dimension {} does not match operator dimension {n}",
            lam.dim()
        )));
    }
    let margin = op.cone.margin_with_tol(lam, tol)?;
    if margin.verdict == Verdict::Exterior {
        return Err(Error::Domain(format!(
            "eigenvalues lie outside the closure of {} (margin {:.3e})",
            op.cone.describe(),
            margin.margin
        )));
    }

    let norm = lam.norm();
    let mut e = [0.0; MAX_DIM + 1];
    sigma_all_into(lam.values(), &mut e);

    let value = match op.kind {
        OperatorKind::SigmaK { k } | OperatorKind::SigmaKTau { k, .. } => {
            let scale = binomial(n, k) * norm.powi(k as i32);
            if e[k] <= tol * scale {
                0.0
            } else {
                e[k].powf(1.0 / k as f64)
            }
        }
        OperatorKind::Quotient { k, l } => {
            let scale_k = binomial(n, k) * norm.powi(k as i32);
            let scale_l = binomial(n, l) * norm.powi(l as i32);
            if e[k] <= tol * scale_k || e[l] <= tol * scale_l {
                0.0
            } else {
                (e[k] / e[l]).powf(1.0 / (k - l) as f64)
            }
        }
        OperatorKind::DetDelta { delta } => {
            let sum = lam.sum();
            let mut prod = 1.0;
            let mut snapped = false;
            for &v in lam.values() {
                let factor = v + delta * sum;
                if factor.abs() <= tol * norm.max(1e-300) {
                    snapped = true;
                    break;
                }
                prod *= factor;
            }
            if snapped {
                0.0
            } else {
                prod.powf(1.0 / n as f64)
            }
        }
    };
    Ok(value)
}

/// Admissibility of a transformed Schouten spectrum relative to a cone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Admissibility {
    StrictlyAdmissible,
    AdmissibleDegenerate,
    Inadmissible,
}

pub fn admissibility_classify(lam_au: &EigenTuple, cone: &ConeSpec) -> Result<Admissibility> {
    admissibility_classify_with_tol(lam_au, cone, DEFAULT_BOUNDARY_TOL)
}

pub fn admissibility_classify_with_tol(
    lam_au: &EigenTuple,
    cone: &ConeSpec,
    tol: f64,
) -> Result<Admissibility> {
    let m = cone.margin_with_tol(lam_au, tol)?;
    Ok(match m.verdict {
        Verdict::StrictInterior => Admissibility::StrictlyAdmissible,
        Verdict::Boundary => Admissibility::AdmissibleDegenerate,
        Verdict::Exterior => Admissibility::Inadmissible,
    })
}

/// `v = e^{beta u}`, the substitution turning delta-admissibility into
/// delta-convexity.
pub fn v_transform(u: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::Domain(format!(
            "v_transform requires beta > 0, got {beta}"
        )));
    }
    Ok((beta * u).exp())
}

/// Inverse transform `u = log(v) / beta`.
pub fn u_of_v(v: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::Domain(format!("u_of_v requires beta > 0, got {beta}")));
    }
    if !(v > 0.0) {
        return Err(Error::Domain(format!("u_of_v requires v > 0, got {v}")));
    }
    Ok(v.ln() / beta)
}

/// The tensor whose cone membership certifies delta-convexity of `v`:
/// `hess(v) + beta v A`.
pub fn hessian_v_cone_form(
    a: &SymTensor,
    beta: f64,
    v: f64,
    hess_v: &SymTensor,
) -> Result<SymTensor> {
    if !(v > 0.0) {
        return Err(Error::Domain(format!(
            "hessian_v_cone_form requires v > 0, got {v}"
        )));
    }
    Ok(hess_v.add(&a.scale(beta * v)))
}

/// Eigenvalues of the gradient tensor dropped by the transform:
/// `((n-1) delta / (1 + delta), -1, ..., -1) |grad v|^2`. The tuple lies in
/// `-Gamma_delta` closure, which is what makes the drop harmless.
pub fn gradient_tensor_eigenvalues(
    n: usize,
    delta: f64,
    grad_v_norm_sq: f64,
) -> Result<EigenTuple> {
    if n < 2 || n > MAX_DIM {
        return Err(Error::InvalidInput(format!("dimension {n} out of range")));
    }
    let head = (n as f64 - 1.0) * delta / (1.0 + delta);
    let mut vals = vec![-grad_v_norm_sq; n];
    vals[0] = head * grad_v_norm_sq;
    EigenTuple::new(&vals)
}

/// The Schouten tensor written in terms of `v = e^{beta u}`, `alpha = 1/beta`:
/// `A_v = A + alpha hess(v)/v + (alpha^2 - alpha) dv (x) dv / v^2
///        - alpha^2/2 |grad v|^2 / v^2 * I`.
pub fn a_v_formula(
    v: f64,
    grad_v: &[f64],
    hess_v: &SymTensor,
    a: &SymTensor,
    alpha: f64,
) -> Result<SymTensor> {
    if !(v > 0.0) {
        return Err(Error::Domain(format!("a_v_formula requires v > 0, got {v}")));
    }
    let grad_sq: f64 = grad_v.iter().map(|g| g * g).sum();
    let outer = SymTensor::outer(grad_v)?;
    Ok(a
        .add(&hess_v.scale(alpha / v))
        .add(&outer.scale((alpha * alpha - alpha) / (v * v)))
        .add_scaled_identity(-0.5 * alpha * alpha * grad_sq / (v * v)))
}

/// The conformal Laplacian applied to `w`:
/// `L w = lap(w) - (n-2)/(4(n-1)) R w`.
///
/// For `w = e^{-(n-2) u / 2}` with `sigma_1(A_u) >= 0` the defect is
/// non-positive.
pub fn conformal_laplacian_defect(w: f64, lap_w: f64, r_scalar: f64, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!(
            "conformal Laplacian requires n >= 3, got {n}"
        )));
    }
    let nf = n as f64;
    Ok(lap_w - (nf - 2.0) / (4.0 * (nf - 1.0)) * r_scalar * w)
}

/// Exact Hessian spectrum of the radial power `|x|^g` at radius `r`:
/// `(g(g-1), g, ..., g) r^{g-2}`, sorted ascending.
pub fn power_hessian_spectrum(n: usize, g: f64, r: f64) -> Result<EigenTuple> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    let factor = r.powf(g - 2.0);
    let mut vals = vec![g * factor; n];
    vals[0] = g * (g - 1.0) * factor;
    EigenTuple::new(&vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::{
        exponents, gamma_delta_margin, gamma_delta_margin_raw, rat_to_f64, ricci_from_schouten,
        Rat,
    };
    use crate::symmat::{eigenvalues, sigma_k};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn et(vals: &[f64]) -> EigenTuple {
        EigenTuple::new(vals).unwrap()
    }

    fn random_delta(rng: &mut impl Rng, n: usize) -> f64 {
        rng.gen_range(0.0..1.0 / (n as f64 - 2.0) * 0.95)
    }

    #[test]
    fn schouten_from_ricci_examples() {
        // round sphere, n = 4: Ric = 3I, R = 12 -> A = I/2
        let ric = SymTensor::identity(4).unwrap().scale(3.0);
        let a = schouten_from_ricci(&ric, 12.0).unwrap();
        for i in 0..4 {
            assert!((a.get(i, i) - 0.5).abs() < 1e-15);
        }

        let zero = SymTensor::zeros(3).unwrap();
        assert_eq!(schouten_from_ricci(&zero, 0.0).unwrap(), zero);

        let ric = SymTensor::from_diag(&[2.0, 2.0, 2.0]).unwrap();
        let a = schouten_from_ricci(&ric, 6.0).unwrap();
        for i in 0..3 {
            assert!((a.get(i, i) - 0.5).abs() < 1e-15);
        }

        let ric2 = SymTensor::identity(2);
        assert!(ric2.is_ok());
        assert!(schouten_from_ricci(&ric2.unwrap(), 1.0).is_err());
    }

    #[test]
    fn schouten_ricci_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..2000 {
            let n = rng.gen_range(3..=MAX_DIM);
            let a = SymTensor::from_upper_fn(n, |_, _| rng.gen_range(-2.0..2.0)).unwrap();
            let ric = ricci_tensor_from_schouten(&a).unwrap();
            let back = schouten_from_ricci(&ric, ric.trace()).unwrap();
            assert!(back.sub(&a).frobenius_norm() <= 1e-12 * a.frobenius_norm().max(1.0));

            // and on eigenvalues, against the cones-module reconstruction
            let lam_a = eigenvalues(&a).unwrap();
            let ric_eigs = ricci_from_schouten(&lam_a).unwrap();
            let direct = eigenvalues(&ric).unwrap();
            for (x, y) in ric_eigs.values().iter().zip(direct.values()) {
                assert!((x - y).abs() <= 1e-10 * direct.norm().max(1.0));
            }
        }
    }

    #[test]
    fn conformal_change_constant_factor() {
        let a = SymTensor::from_diag(&[0.3, -0.2, 1.0]).unwrap();
        let p = ConformalPointData::new(
            a,
            vec![0.0; 3],
            SymTensor::zeros(3).unwrap(),
            1.7,
        )
        .unwrap();
        assert_eq!(conformal_change(&p).unwrap(), a);
    }

    #[test]
    fn conformal_change_kills_log_singular_factor() {
        // u = 2 log |x| on flat background has A_u = 0
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.gen_range(3..=5);
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let r2: f64 = x.iter().map(|v| v * v).sum();
            if r2 < 1e-2 {
                continue;
            }
            let grad: Vec<f64> = x.iter().map(|v| 2.0 * v / r2).collect();
            let hess = SymTensor::from_upper_fn(n, |i, j| {
                let kron = if i == j { 1.0 } else { 0.0 };
                2.0 * kron / r2 - 4.0 * x[i] * x[j] / (r2 * r2)
            })
            .unwrap();
            let p = ConformalPointData::new(
                SymTensor::zeros(n).unwrap(),
                grad,
                hess,
                r2.ln(),
            )
            .unwrap();
            let au = conformal_change(&p).unwrap();
            assert!(au.frobenius_norm() < 1e-13 / r2.min(1.0), "A_u != 0");
        }
    }

    #[test]
    fn conformal_change_stereographic_factor() {
        // u0 = log((1+|x|^2)/2): A_u eigenvalues are all 2/(1+|x|^2)^2
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let n = rng.gen_range(3..=5);
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let r2: f64 = x.iter().map(|v| v * v).sum();
            let q = 1.0 + r2;
            let grad: Vec<f64> = x.iter().map(|v| 2.0 * v / q).collect();
            let hess = SymTensor::from_upper_fn(n, |i, j| {
                let kron = if i == j { 1.0 } else { 0.0 };
                2.0 * kron / q - 4.0 * x[i] * x[j] / (q * q)
            })
            .unwrap();
            let p = ConformalPointData::new(
                SymTensor::zeros(n).unwrap(),
                grad,
                hess,
                (q / 2.0).ln(),
            )
            .unwrap();
            let au = conformal_change(&p).unwrap();
            let lam = eigenvalues(&au).unwrap();
            let expect = 2.0 / (q * q);
            for &v in lam.values() {
                assert!((v - expect).abs() <= 1e-13, "{v} vs {expect}");
            }
            // equals e^{-2 u0} / 2
            assert!((expect - 0.5 * (-2.0 * (q / 2.0).ln()).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn evaluate_f_examples() {
        let op = CurvatureOperator::sigma_k(3, 2).unwrap();
        let v = evaluate_f(&op, &et(&[1.0, 1.0, 1.0])).unwrap();
        assert!((v - 3.0f64.sqrt()).abs() < 1e-15);

        let op = CurvatureOperator::quotient(3, 2, 1).unwrap();
        let v = evaluate_f(&op, &et(&[1.0, 1.0, 1.0])).unwrap();
        assert!((v - 1.0).abs() < 1e-15);

        // DetDelta on the spectrum of D^2(|x|^gamma) vanishes identically
        for (n, delta) in [(3usize, 1.0 / 3.0), (4, 1.0 / 8.0), (5, 0.1)] {
            let t = exponents(n, approx_rat(delta)).unwrap();
            let g = t.gamma_f64();
            let op = CurvatureOperator::det_delta(n, rat_to_f64(t.delta)).unwrap();
            for &r in &[0.3, 1.0, 2.5] {
                let lam = power_hessian_spectrum(n, g, r).unwrap();
                let v = evaluate_f(&op, &lam).unwrap();
                assert_eq!(v, 0.0, "n={n} r={r}");
            }
        }

        // outside the cone: domain error naming the cone
        let op = CurvatureOperator::sigma_k(3, 2).unwrap();
        let err = evaluate_f(&op, &et(&[3.0, -1.0, -1.0])).unwrap_err();
        assert!(err.to_string().contains("Gamma_sigma_2"), "{err}");
    }

    fn approx_rat(x: f64) -> Rat {
        // exact for the dyadic/near-rational deltas used in tests
        let denom = 360360i64;
        Rat::new((x * denom as f64).round() as i64, denom)
    }

    #[test]
    fn evaluate_f_homogeneity() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut tested = 0;
        while tested < 10_000 {
            let n = rng.gen_range(3..=6);
            let kind = rng.gen_range(0..4);
            let op = match kind {
                0 => CurvatureOperator::sigma_k(n, rng.gen_range(1..=n)).unwrap(),
                1 => {
                    let k = rng.gen_range(2..=n);
                    CurvatureOperator::quotient(n, k, rng.gen_range(1..k)).unwrap()
                }
                2 => {
                    let k = rng.gen_range(n / 2 + 1..=n);
                    let tau0 = 2.0 * (n as f64 - k as f64) / n as f64;
                    let tau = rng.gen_range((tau0 + 1e-3).min(1.0)..=1.0);
                    CurvatureOperator::sigma_k_tau(n, k, tau).unwrap()
                }
                _ => CurvatureOperator::det_delta(n, random_delta(&mut rng, n)).unwrap(),
            };
            // sample interior points: positive tuples are interior to all cones here
            let vals: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..2.0)).collect();
            let lam = et(&vals);
            let c: f64 = rng.gen_range(0.1..10.0);
            let f1 = evaluate_f(&op, &lam).unwrap();
            let f2 = evaluate_f(&op, &lam.scale(c)).unwrap();
            assert!(
                (f2 - c * f1).abs() <= 1e-12 * (c * f1).abs().max(1e-6),
                "homogeneity violated: {f2} vs {}",
                c * f1
            );
            tested += 1;
        }
    }

    #[test]
    fn evaluate_f_elliptic_monotone() {
        // F increasing in each eigenvalue direction (finite differences)
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let step = 1e-6;
        for _ in 0..500 {
            let n = rng.gen_range(3..=5);
            let k = rng.gen_range(1..=n);
            let op = CurvatureOperator::sigma_k(n, k).unwrap();
            let vals: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..2.0)).collect();
            let f0 = evaluate_f(&op, &et(&vals)).unwrap();
            for i in 0..n {
                let mut bumped = vals.clone();
                bumped[i] += step;
                let f1 = evaluate_f(&op, &et(&bumped)).unwrap();
                assert!(f1 > f0, "not elliptic at i={i}");
            }
        }
    }

    #[test]
    fn evaluate_f_vanishes_on_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..2000 {
            let n = rng.gen_range(3..=5);
            let k = rng.gen_range(2..=n);
            // boundary tuple of Gamma_sigma_k: solve sigma_k = 0 for the last entry
            // with the rest positive; bisection on t in [-max, 0]
            let mut vals: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(0.2..2.0)).collect();
            let sig_k = |t: f64, vals: &[f64]| {
                let mut all = vals.to_vec();
                all.push(t);
                let mut e = [0.0; MAX_DIM + 1];
                sigma_all_into(&all, &mut e);
                e[k]
            };
            let (mut lo, mut hi) = (-10.0, 0.1);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if sig_k(mid, &vals) > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            vals.push(0.5 * (lo + hi));
            let lam = et(&vals);
            let op = CurvatureOperator::sigma_k(n, k).unwrap();
            match evaluate_f(&op, &lam) {
                Ok(v) => assert!(v.abs() <= 1e-10, "boundary value {v}"),
                // bisection can land a hair outside the closure
                Err(Error::Domain(_)) => {}
                Err(e) => panic!("unexpected error {e}"),
            }
        }
    }

    #[test]
    fn admissibility_examples() {
        let cone = ConeSpec::gamma_sigma_k(4, 2).unwrap();
        let sphere = et(&[0.5, 0.5, 0.5, 0.5]);
        assert_eq!(
            admissibility_classify(&sphere, &cone).unwrap(),
            Admissibility::StrictlyAdmissible
        );

        let zero = et(&[0.0, 0.0, 0.0, 0.0]);
        assert_eq!(
            admissibility_classify(&zero, &cone).unwrap(),
            Admissibility::AdmissibleDegenerate
        );

        let cone3 = ConeSpec::gamma_sigma_k(3, 2).unwrap();
        let bad = et(&[3.0, -1.0, -1.0]);
        assert_eq!(
            admissibility_classify(&bad, &cone3).unwrap(),
            Admissibility::Inadmissible
        );
    }

    #[test]
    fn v_transform_examples() {
        assert_eq!(v_transform(0.0, 0.25).unwrap(), 1.0);
        // u = 2 log r with beta = gamma/2 gives v = r^gamma
        let gamma: f64 = 0.5;
        for &r in &[0.2f64, 1.0, 3.7] {
            let v = v_transform(2.0 * r.ln(), gamma / 2.0).unwrap();
            assert!((v - r.powf(gamma)).abs() < 1e-14 * v.max(1.0));
        }
        let v = v_transform(2.0, 0.5).unwrap();
        assert!((v - std::f64::consts::E).abs() < 1e-15);

        // round trip
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let u = rng.gen_range(-20.0..20.0);
            let beta = rng.gen_range(0.01..2.0);
            let back = u_of_v(v_transform(u, beta).unwrap(), beta).unwrap();
            assert!((back - u).abs() <= 1e-13 * u.abs().max(1.0));
        }
        assert!(u_of_v(-1.0, 0.5).is_err());
        assert!(u_of_v(0.0, 0.5).is_err());
    }

    #[test]
    fn hessian_v_cone_form_examples() {
        // flat A = 0 leaves the Hessian unchanged
        let hess = SymTensor::from_diag(&[1.0, 2.0, 3.0]).unwrap();
        let out =
            hessian_v_cone_form(&SymTensor::zeros(3).unwrap(), 0.25, 1.0, &hess).unwrap();
        assert_eq!(out, hess);

        // v = |x|^gamma has Hessian exactly on the Gamma_delta boundary
        for (n, delta) in [(3usize, 1.0 / 3.0), (4, 1.0 / 8.0), (5, 0.05)] {
            let gamma = (1.0 + (2.0 - n as f64) * delta) / (1.0 + delta);
            for &r in &[0.3, 1.0, 2.0] {
                let lam = power_hessian_spectrum(n, gamma, r).unwrap();
                let m = gamma_delta_margin(&lam, delta).unwrap();
                assert!(m.margin.abs() <= 1e-9, "margin {}", m.margin);
            }
        }

        // gradient tensor helper at n = 3, delta = 1/3
        let g = gradient_tensor_eigenvalues(3, 1.0 / 3.0, 1.0).unwrap();
        assert_eq!(g.values(), &[-1.0, -1.0, 0.5]);
    }

    #[test]
    fn a_v_matches_conformal_change() {
        // cross-formula oracle: A_v computed from v-data equals A_u from u-data
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10_000 {
            let n = rng.gen_range(3..=6);
            let delta = random_delta(&mut rng, n);
            let gamma = (1.0 + (2.0 - n as f64) * delta) / (1.0 + delta);
            let beta = gamma / 2.0;
            let alpha = 1.0 / beta;

            let a = SymTensor::from_upper_fn(n, |_, _| rng.gen_range(-1.0..1.0)).unwrap();
            let grad_u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let hess_u = SymTensor::from_upper_fn(n, |_, _| rng.gen_range(-1.0..1.0)).unwrap();
            let u = rng.gen_range(-1.0..1.0);

            let p = ConformalPointData::new(a, grad_u.clone(), hess_u, u).unwrap();
            let au = conformal_change(&p).unwrap();

            let v = (beta * u).exp();
            let grad_v: Vec<f64> = grad_u.iter().map(|g| beta * v * g).collect();
            // hess(v) = v (beta hess(u) + beta^2 du (x) du)
            let outer = SymTensor::outer(&grad_u).unwrap();
            let hess_v = hess_u.scale(beta).add(&outer.scale(beta * beta)).scale(v);

            let av = a_v_formula(v, &grad_v, &hess_v, &a, alpha).unwrap();
            let diff = av.sub(&au).frobenius_norm();
            assert!(
                diff <= 1e-10 * au.frobenius_norm().max(1.0),
                "A_v mismatch {diff:.3e}"
            );
        }
    }

    #[test]
    fn a_v_constant_and_power_cases() {
        let a = SymTensor::from_diag(&[0.4, -0.1, 0.2]).unwrap();
        let out = a_v_formula(2.0, &[0.0; 3], &SymTensor::zeros(3).unwrap(), &a, 4.0).unwrap();
        assert_eq!(out, a);

        // flat background, v = |x|^gamma -> A_v = 0 (same cancellation as u = 2 log|x|)
        let n = 3;
        let delta = 1.0 / 3.0;
        let gamma = (1.0 + (2.0 - n as f64) * delta) / (1.0 + delta);
        let alpha = 2.0 / gamma;
        let x = [0.7, -0.4, 0.5];
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let r = r2.sqrt();
        let v = r.powf(gamma);
        let grad_v: Vec<f64> = x.iter().map(|xi| gamma * r.powf(gamma - 2.0) * xi).collect();
        let hess_v = SymTensor::from_upper_fn(n, |i, j| {
            let kron = if i == j { 1.0 } else { 0.0 };
            gamma * (gamma - 2.0) * r.powf(gamma - 4.0) * x[i] * x[j]
                + gamma * r.powf(gamma - 2.0) * kron
        })
        .unwrap();
        let av = a_v_formula(v, &grad_v, &hess_v, &SymTensor::zeros(n).unwrap(), alpha).unwrap();
        assert!(av.frobenius_norm() < 1e-13, "A_v = {:.3e}", av.frobenius_norm());

        assert!(a_v_formula(0.0, &[0.0; 3], &SymTensor::zeros(3).unwrap(), &a, 4.0).is_err());
    }

    #[test]
    fn theorem_adtocon_transform_property() {
        // sample A_u in the closed cone, back-solve hess(u), and verify
        // hess(v) + beta v A stays in the closed cone
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let mut count = 0;
        while count < 10_000 {
            let n = rng.gen_range(3..=6);
            let delta = random_delta(&mut rng, n);
            let gamma = (1.0 + (2.0 - n as f64) * delta) / (1.0 + delta);
            let beta = gamma / 2.0;

            let vals: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if gamma_delta_margin_raw(&vals, delta) < 0.0 {
                continue;
            }
            count += 1;
            let lam_au = et(&vals);
            let frame = {
                let s = SymTensor::from_upper_fn(n, |_, _| rng.gen_range(-1.0..1.0)).unwrap();
                crate::symmat::eigen_decompose(&s).unwrap().1
            };
            let au = crate::symmat::spectral_assemble(&lam_au, &frame).unwrap();

            let a = SymTensor::from_upper_fn(n, |_, _| rng.gen_range(-0.5..0.5)).unwrap();
            let grad_u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let u = rng.gen_range(-1.0..1.0);
            let grad_sq: f64 = grad_u.iter().map(|g| g * g).sum();
            let outer = SymTensor::outer(&grad_u).unwrap();
            let hess_u = au
                .sub(&a)
                .sub(&outer)
                .add_scaled_identity(0.5 * grad_sq);

            let v = (beta * u).exp();
            let hess_v = hess_u.scale(beta).add(&outer.scale(beta * beta)).scale(v);
            let form = hessian_v_cone_form(&a, beta, v, &hess_v).unwrap();
            let lam = eigenvalues(&form).unwrap();
            let m = gamma_delta_margin(&lam, delta).unwrap();
            assert!(m.margin >= -1e-9, "transform left the cone: {}", m.margin);
        }
    }

    #[test]
    fn conformal_laplacian_defect_cases() {
        // w = r^{2-n} is harmonic away from the pole (flat R = 0)
        for n in [3usize, 4, 5] {
            let x = [0.6, -0.8, 0.3, 0.2, 0.1];
            let x = &x[..n];
            let f = |y: &[f64]| -> f64 {
                let r: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                r.powi(2 - n as i32)
            };
            let h = 1e-4;
            let mut lap = 0.0;
            for i in 0..n {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[i] += h;
                xm[i] -= h;
                lap += (f(&xp) - 2.0 * f(x) + f(&xm)) / (h * h);
            }
            let defect = conformal_laplacian_defect(f(x), lap, 0.0, n).unwrap();
            assert!(defect.abs() < 1e-5, "n={n}: defect {defect}");
        }

        assert_eq!(conformal_laplacian_defect(3.0, 0.0, 0.0, 4).unwrap(), 0.0);

        // u = |x|^2 near 0 gives w = e^{-(n-2)|x|^2/2} with negative defect at 0
        let n = 4usize;
        let w = |y: &[f64]| -> f64 {
            let r2: f64 = y.iter().map(|v| v * v).sum();
            (-(n as f64 - 2.0) * r2 / 2.0).exp()
        };
        let h = 1e-4;
        let origin = vec![0.0; n];
        let mut lap = 0.0;
        for i in 0..n {
            let mut xp = origin.clone();
            let mut xm = origin.clone();
            xp[i] += h;
            xm[i] -= h;
            lap += (w(&xp) - 2.0 * w(&origin) + w(&xm)) / (h * h);
        }
        let defect = conformal_laplacian_defect(w(&origin), lap, 0.0, n).unwrap();
        assert!(defect < -1.0, "defect at the origin should be strongly negative");

        assert!(conformal_laplacian_defect(1.0, 0.0, 0.0, 2).is_err());
    }

    #[test]
    fn sigma_k_tau_gate() {
        assert!(CurvatureOperator::sigma_k_tau(4, 3, 0.75).is_ok());
        assert!(CurvatureOperator::sigma_k_tau(4, 3, 0.5).is_err());
        assert!(CurvatureOperator::sigma_k_tau(4, 3, 1.2).is_err());
        assert!(CurvatureOperator::sigma_k_tau(4, 2, 0.9).is_err());

        // evaluation applies sigma_k^{1/k} to the supplied (shifted) tuple
        let op = CurvatureOperator::sigma_k_tau(4, 3, 0.9).unwrap();
        let lam = et(&[1.0, 1.0, 1.0, 1.0]);
        let expect = sigma_k(&lam, 3).unwrap().powf(1.0 / 3.0);
        assert!((evaluate_f(&op, &lam).unwrap() - expect).abs() < 1e-14);
    }
}
