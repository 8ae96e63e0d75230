//! The acceptance suite: one runner per verification criterion, each pinning
//! its tolerances in code and reporting quantitative details. The CLI `suite`
//! command and the `acceptance` integration tests both drive these runners.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{
    barrier_oscillation_check, holder_exponent, p_laplacian_divergence, scale_invariant_check,
    singularity_classify, volume_integral, w1p_norm, ClassifyConfig, DerivMode, SingularityClass,
    TrendVerdict,
};
use crate::cones::{
    delta_of_k, exponents, gamma_delta_margin, gamma_delta_margin_raw, gamma_sigmak_margin_raw,
    inclusion_sample_test, rat_to_f64, ricci_lower_bound_margin, ExtRat, Rat,
};
use crate::conformal::{
    conformal_change, evaluate_f, hessian_v_cone_form, power_hessian_spectrum,
    ConformalPointData, CurvatureOperator,
};
use crate::error::{Error, Result};
use crate::fields::{
    ball_volume, fd_hessian_fn, lambda_lift, mollified_hessian_cone_check, mollify,
    pullback_flat_check, Generator, GridDomain, MollifierSpec, ScalarField,
};
use crate::radial::{
    radial_ode_solve, radial_schouten, radial_spectrum, RadialOdeConfig, RadialOperator,
};
use crate::symmat::{
    binomial, eigen_decompose, eigenvalues, spectral_assemble, EigenTuple, SymTensor, MAX_DIM,
};

/// Suite size profile: `Full` runs the criteria at their stated sample
/// counts; `Fast` shrinks the Monte Carlo counts for a quick smoke run (the
/// grids and tolerances are identical).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    Fast,
    Full,
}

impl Profile {
    fn mc(&self, full: u64) -> u64 {
        match self {
            Profile::Full => full,
            Profile::Fast => (full / 5).max(1000),
        }
    }
}

impl std::str::FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Profile::Fast),
            "full" => Ok(Profile::Full),
            other => Err(Error::InvalidInput(format!(
                "unknown profile {other:?} (expected fast|full)"
            ))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub details: BTreeMap<String, Value>,
    #[serde(skip_serializing)]
    pub runtime_secs: f64,
}

impl CriterionOutcome {
    fn new(id: usize, name: &str) -> Self {
        CriterionOutcome {
            id,
            name: name.into(),
            passed: true,
            details: BTreeMap::new(),
            runtime_secs: 0.0,
        }
    }

    fn detail(&mut self, key: &str, value: impl Into<Value>) {
        self.details.insert(key.into(), value.into());
    }

    fn check(&mut self, label: &str, ok: bool) {
        self.details.insert(format!("check.{label}"), json!(ok));
        self.passed &= ok;
    }

    pub fn summary_line(&self) -> String {
        format!(
            "criterion {:02} [{}] {} ({:.2}s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.runtime_secs
        )
    }
}

pub const CRITERION_COUNT: usize = 13;

pub fn criterion_name(id: usize) -> &'static str {
    match id {
        1 => "fundamental solution spectrum and F_delta = 0",
        2 => "cone inclusion: k-convex implies delta-convex",
        3 => "exact rational exponent identities",
        4 => "admissibility-to-convexity transform",
        5 => "Holder exponent estimator and barrier",
        6 => "W^{1,p} integrability threshold",
        7 => "mollification exactness and cone preservation",
        8 => "p0-harmonicity of the model profile",
        9 => "singularity dichotomy classifier",
        10 => "conformal volume criterion",
        11 => "inversion chart flatness",
        12 => "radial ODE fidelity",
        13 => "Ricci lower bound from the cone condition",
        _ => "unknown",
    }
}

/// Runs one criterion; ids are 1-based.
pub fn run_criterion(id: usize, profile: Profile, seed: u64) -> Result<CriterionOutcome> {
    let started = Instant::now();
    let mut out = match id {
        1 => c01_fundamental(seed)?,
        2 => c02_inclusion(profile, seed)?,
        3 => c03_exponents()?,
        4 => c04_transform(profile, seed)?,
        5 => c05_holder()?,
        6 => c06_w1p()?,
        7 => c07_mollify()?,
        8 => c08_p0_harmonic()?,
        9 => c09_dichotomy()?,
        10 => c10_volume()?,
        11 => c11_inversion(seed)?,
        12 => c12_radial(seed)?,
        13 => c13_ricci(profile, seed)?,
        other => {
            return Err(Error::InvalidInput(format!(
                "criterion id {other} out of range 1..={CRITERION_COUNT}"
            )))
        }
    };
    out.runtime_secs = started.elapsed().as_secs_f64();
    Ok(out)
}

pub fn run_all(profile: Profile, seed: u64) -> Result<Vec<CriterionOutcome>> {
    (1..=CRITERION_COUNT)
        .map(|id| run_criterion(id, profile, seed))
        .collect()
}

fn random_point(rng: &mut impl Rng, n: usize, r_lo: f64, r_hi: f64) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-3 {
            continue;
        }
        let r = rng.gen_range(r_lo..r_hi);
        return x.iter().map(|v| v * r / norm).collect();
    }
}

fn c01_fundamental(seed: u64) -> Result<CriterionOutcome> {
    let mut out = CriterionOutcome::new(1, criterion_name(1));
    let tol = 1e-10;
    let fd_tol = 1e-4;
    out.detail("tolerance.relative_spectrum", tol);
    out.detail("tolerance.fd_cross_check", fd_tol);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut worst_spec = 0.0f64;
    let mut worst_f = 0.0f64;
    let mut worst_fd = 0.0f64;
    for n in [3usize, 4, 5] {
        let mut deltas = vec![0.0, 0.125, 1.0 / (n as f64 - 2.0) - 0.01];
        if n == 3 {
            deltas.push(1.0 / 3.0);
        }
        for delta in deltas {
            let gamma = (1.0 + (2.0 - n as f64) * delta) / (1.0 + delta);
            let expect_factor = gamma * (2.0 - gamma);
            let gen = Generator::abs_power(n, gamma);
            let op = CurvatureOperator::det_delta(n, delta)?;
            for _ in 0..100 {
                let x = random_point(&mut rng, n, 0.5, 2.0);
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let hess = gen.hessian(&x)?;
                let shifted = hess.add_scaled_identity(delta * hess.trace());
                let lam = eigenvalues(&shifted)?;
                let expect = expect_factor * r.powf(gamma - 2.0);
                // spectrum {0} u {gamma(2-gamma) r^{gamma-2}}
                worst_spec = worst_spec.max(lam.min().abs() / expect);
                for &v in &lam.values()[1..] {
                    worst_spec = worst_spec.max((v - expect).abs() / expect);
                }
                let f_val = evaluate_f(&op, &eigenvalues(&hess)?)?;
                worst_f = worst_f.max(f_val.abs());

                // FD cross-check at coarser tolerance; the step balances
                // truncation against roundoff in the second differences
                let fd = fd_hessian_fn(|p| gen.value(p), &x, 1e-3)?;
                let fd_shifted = fd.add_scaled_identity(delta * fd.trace());
                let fd_lam = eigenvalues(&fd_shifted)?;
                for (a, b) in fd_lam.values().iter().zip(lam.values()) {
                    worst_fd = worst_fd.max((a - b).abs() / expect.max(1e-30));
                }
            }
        }
    }
    out.detail("worst_spectrum_rel_error", worst_spec);
    out.detail("worst_f_delta", worst_f);
    out.detail("worst_fd_rel_error", worst_fd);
    out.check("spectrum", worst_spec <= tol);
    out.check("f_delta_vanishes", worst_f <= tol);
    out.check("fd_cross_check", worst_fd <= fd_tol);
    Ok(out)
}

fn c02_inclusion(profile: Profile, seed: u64) -> Result<CriterionOutcome> {
    let mut out = CriterionOutcome::new(2, criterion_name(2));
    let samples = profile.mc(100_000);
    let margin_tol = 1e-9;
    let extremal_tol = 1e-12;
    out.detail("samples_per_pair", samples);
    out.detail("tolerance.margin", margin_tol);
    out.detail("tolerance.extremal", extremal_tol);

    let mut global_min = f64::INFINITY;
    for n in [3usize, 4, 5] {
        for k in (n / 2 + 1)..=n {
            let rep = inclusion_sample_test(n, k, samples, seed ^ ((n * 16 + k) as u64))?;
            out.detail(&format!("min_margin.n{n}k{k}"), rep.min_margin);
            out.check(&format!("inclusion.n{n}k{k}"), rep.min_margin >= -margin_tol);
            global_min = global_min.min(rep.min_margin);
        }
    }
    out.detail("global_min_margin", global_min);

    let extremal = EigenTuple::new(&[2.0, 2.0, -1.0])?;
    let m = gamma_delta_margin(&extremal, rat_to_f64(delta_of_k(3, 2)?))?;
    out.detail("extremal_margin", m.margin);
    out.check("extremal_on_boundary", m.margin.abs() <= extremal_tol);
    Ok(out)
}

fn c03_exponents() -> Result<CriterionOutcome> {
    let mut out = CriterionOutcome::new(3, criterion_name(3));
    let mut pairs = 0;
    let mut all_exact = true;
    for n in 3..=8usize {
        for k in (n / 2 + 1)..=n {
            pairs += 1;
            let ni = n as i64;
            let ki = k as i64;
            let delta = delta_of_k(n, k)?;
            let t = exponents(n, delta)?;
            let mut ok = t.gamma == Rat::from_integer(2) - Rat::new(ni, ki);
            ok &= t.beta * Rat::from_integer(2) == t.gamma;
            ok &= Rat::from_integer(2) * t.delta0
                == Rat::from_integer(1) + Rat::from_integer(2 - ni) * delta;
            if k == n {
                ok &= t.p_delta.is_infinite() && t.p0.is_infinite();
            } else {
                ok &= t.p_delta == ExtRat::Finite(Rat::new(ni * ki, ni - ki));
                match (t.p0, t.p_delta) {
                    (ExtRat::Finite(p0), ExtRat::Finite(pd)) => {
                        ok &= pd
                            == Rat::from_integer(ni) * (p0 - Rat::from_integer(1))
                                / Rat::from_integer(ni - 1);
                    }
                    _ => ok = false,
                }
            }
            if !ok {
                out.detail(&format!("failed.n{n}k{k}"), true);
            }
            all_exact &= ok;
        }
    }
    out.detail("pairs_verified", pairs);
    out.detail("tolerance", "exact rational arithmetic (zero)");
    out.check("identities_exact", all_exact);
    Ok(out)
}

fn c04_transform(profile: Profile, seed: u64) -> Result<CriterionOutcome> {
    let mut out = CriterionOutcome::new(4, criterion_name(4));
    let samples = profile.mc(10_000);
    let margin_tol = 1e-9;
    out.detail("samples", samples);
    out.detail("tolerance.margin", margin_tol);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // (a) random admissible configurations stay in the closed cone
    let mut min_margin = f64::INFINITY;
    let mut count = 0u64;
    while count < samples {
        let n = rng.gen_range(3..=6);
        let delta = rng.gen_range(0.0..0.95 / (n as f64 - 2.0));
        let gamma = (1.0 + (2.0 - n as f64) * delta) / (1.0 + delta);
        let beta = gamma / 2.0;

        let vals: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if gamma_delta_margin_raw(&vals, delta) < 0.0 {
            continue;
        }
        count += 1;
        let lam_au = EigenTuple::new(&vals)?;
        let frame = {
            let s = SymTensor::from_upper_fn(n, |_, _| rng.gen_range(-1.0..1.0))?;
            eigen_decompose(&s)?.1
        };
        let au = spectral_assemble(&lam_au, &frame)?;
        let a = SymTensor::from_upper_fn(n, |_, _| rng.gen_range(-0.5..0.5))?;
        let grad_u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let u = rng.gen_range(-1.0..1.0);
        let grad_sq: f64 = grad_u.iter().map(|g| g * g).sum();
        let outer = SymTensor::outer(&grad_u)?;
        let hess_u = au.sub(&a).sub(&outer).add_scaled_identity(0.5 * grad_sq);
        let p = ConformalPointData::new(a, grad_u.clone(), hess_u, u)?;
        debug_assert!(conformal_change(&p)?.sub(&au).frobenius_norm() < 1e-9);

        let v = (beta * u).exp();
        let hess_v = hess_u.scale(beta).add(&outer.scale(beta * beta)).scale(v);
        let form = hessian_v_cone_form(&a, beta, v, &hess_v)?;
        let m = gamma_delta_margin(&eigenvalues(&form)?, delta)?;
        min_margin = min_margin.min(m.margin);
    }
    out.detail("min_margin_random", min_margin);
    out.check("random_configurations", min_margin >= -margin_tol);

    // (b) the model u = 2 log|x| maps onto the cone boundary exactly
    let mut worst_boundary = 0.0f64;
    for (n, delta) in [(3usize, 1.0 / 3.0), (4, 0.125), (5, 0.2)] {
        let gamma = (1.0 + (2.0 - n as f64) * delta) / (1.0 + delta);
        for _ in 0..100 {
            let r = rng.gen_range(0.2..3.0);
            let lam = power_hessian_spectrum(n, gamma, r)?;
            let m = gamma_delta_margin(&lam, delta)?;
            worst_boundary = worst_boundary.max(m.margin.abs());
        }
    }
    out.detail("worst_model_boundary_margin", worst_boundary);
    out.check("model_on_boundary", worst_boundary <= margin_tol);
    Ok(out)
}

fn c05_holder() -> Result<CriterionOutcome> {
    let mut out = CriterionOutcome::new(5, criterion_name(5));
    let exponent_tol = 0.02;
    let (n, delta, gamma) = (3usize, 1.0 / 3.0, 0.5);
    out.detail("tolerance.exponent", exponent_tol);
    out.detail("grid", "64^3 punctured unit ball");

    let dom = GridDomain::with_resolution(n, &[0.0; 3], 1.0, 0.0, 64)?;
    let w = ScalarField::from_generator(dom, Generator::abs_power(n, gamma))?;
    let est = holder_exponent(&w, &[0, 0, 0])?;
    out.detail("fitted_exponent", est.exponent);
    out.detail("fit_residual", est.residual);
    out.check("exponent", (est.exponent - gamma).abs() <= exponent_tol);

    let barrier = barrier_oscillation_check(&w, delta, &[0, 0, 0], 0.9)?;
    out.detail("barrier_max_violation", barrier.max_violation);
    out.detail(
        "barrier_precondition_failures",
        barrier.precondition_failures.len(),
    );
    out.check("barrier", barrier.passed);
    Ok(out)
}

fn c06_w1p() -> Result<CriterionOutcome> {
    let mut out = CriterionOutcome::new(6, criterion_name(6));
    let (n, gamma, p_delta) = (3usize, 0.5, 6.0);
    let bracket = 0.25;
    out.detail("p_delta", p_delta);
    out.detail("bracket", bracket);
    out.detail("grid", "64^3 punctured unit ball");

    let h = 1.0 / 32.0;
    let dom = GridDomain::with_resolution(n, &[0.0; 3], 1.0, h, 64)?;
    let w = ScalarField::from_generator(dom, Generator::abs_power(n, gamma))?;

    let below = w1p_norm(&w, p_delta - bracket)?;
    let above = w1p_norm(&w, p_delta + bracket)?;
    out.detail("ratio_below", below.trend.increment_ratio);
    out.detail("ratio_above", above.trend.increment_ratio);
    out.check(
        "converges_below_threshold",
        below.trend.verdict == TrendVerdict::Converging,
    );
    out.check(
        "diverges_above_threshold",
        above.trend.verdict == TrendVerdict::Diverging,
    );
    Ok(out)
}

fn c07_mollify() -> Result<CriterionOutcome> {
    let mut out = CriterionOutcome::new(7, criterion_name(7));
    let reproduce_tol = 1e-12;
    let margin_tol = 1e-10;
    out.detail("tolerance.reproduction", reproduce_tol);
    out.detail("tolerance.output_margin", margin_tol);

    let n = 3usize;
    let h = 1.0 / 24.0;
    let ball = GridDomain::new(n, &[0.0; 3], 1.0, 0.0, h)?;
    let rho = MollifierSpec::new(n)?;

    // constants and linear fields reproduce exactly
    let c = ScalarField::constant(ball.clone(), 2.75)?;
    let ch = mollify(&c, 3.0 * h, &rho)?;
    let mut worst = 0.0f64;
    for idx in ch.domain().active_nodes() {
        worst = worst.max((ch.value(&idx)? - 2.75).abs());
    }
    let lin = ScalarField::from_generator(ball, Generator::linear(vec![1.0, -2.0, 0.5])?)?;
    let lh = mollify(&lin, 3.0 * h, &rho)?;
    for idx in lh.domain().active_nodes() {
        let expect = lin.value(&idx)?;
        worst = worst.max((lh.value(&idx)? - expect).abs() / expect.abs().max(1.0));
    }
    out.detail("worst_reproduction_error", worst);
    out.check("constants_and_linears", worst <= reproduce_tol);

    // cone preservation on the lifted model field over an annulus
    let (delta, gamma) = (1.0 / 3.0, 0.5);
    let beta = gamma / 2.0;
    let annulus = GridDomain::new(n, &[0.0; 3], 1.0, 0.35, h)?;
    let v = ScalarField::from_generator(annulus, Generator::abs_power(n, gamma))?;
    let zero_bg = SymTensor::zeros(n)?;
    let (lifted, lambda) = lambda_lift(&v, |_| zero_bg, beta, 1.0)?;
    out.detail("lambda", lambda);
    for (tag, h_m) in [("2h", 2.0 * h), ("4h", 4.0 * h)] {
        let rep = mollified_hessian_cone_check(&lifted, delta, h_m)?;
        out.detail(&format!("output_min_margin.{tag}"), rep.output_min_margin);
        out.check(
            &format!("cone_preserved.{tag}"),
            rep.precondition_failures.is_empty() && rep.output_min_margin >= -margin_tol,
        );
    }
    Ok(out)
}

fn c08_p0_harmonic() -> Result<CriterionOutcome> {
    let mut out = CriterionOutcome::new(8, criterion_name(8));
    let (n, gamma, p0) = (3usize, 0.5, 5.0);
    let order_floor = 1.0;
    let closed_form_tol = 0.02;
    out.detail("p0", p0);
    out.detail("tolerance.order", order_floor);
    out.detail("tolerance.closed_form", closed_form_tol);

    // model profile: discrete p0-Laplacian falls toward 0 with order >= 1
    let mut maxima = Vec::new();
    for &res in &[16usize, 32, 64] {
        let dom = GridDomain::with_resolution(n, &[0.0; 3], 1.0, 0.45, res)?;
        let v = ScalarField::from_generator(dom, Generator::abs_power(n, gamma))?;
        let mut max_div = 0.0f64;
        for idx in v.domain().interior_nodes() {
            let d = v.domain().distance(&idx);
            if !(0.55..=0.9).contains(&d) {
                continue;
            }
            max_div = max_div.max(p_laplacian_divergence(&v, &idx, p0)?.abs());
        }
        maxima.push(max_div);
    }
    let order1 = (maxima[0] / maxima[1]).log2();
    let order2 = (maxima[1] / maxima[2]).log2();
    out.detail("defect_maxima", json!(maxima));
    out.detail("observed_orders", json!([order1, order2]));
    out.check("order", order1 >= order_floor && order2 >= order_floor);

    // |x|^2 has the closed-form value 2^{p0-1} (p0 + n - 2) |x|^{p0-2}
    let dom = GridDomain::with_resolution(n, &[0.0; 3], 1.0, 0.45, 64)?;
    let sq = ScalarField::from_generator(dom, Generator::abs_squared(n)?)?;
    let mut worst_rel = 0.0f64;
    for idx in sq.domain().interior_nodes() {
        let d = sq.domain().distance(&idx);
        if !(0.55..=0.9).contains(&d) {
            continue;
        }
        let expect = 2.0f64.powf(p0 - 1.0) * (p0 + n as f64 - 2.0) * d.powf(p0 - 2.0);
        let div = p_laplacian_divergence(&sq, &idx, p0)?;
        worst_rel = worst_rel.max((div - expect).abs() / expect);
    }
    out.detail("worst_closed_form_rel_error", worst_rel);
    out.check("closed_form", worst_rel <= closed_form_tol);
    Ok(out)
}

fn c09_dichotomy() -> Result<CriterionOutcome> {
    let mut out = CriterionOutcome::new(9, criterion_name(9));
    let slope_tol = 0.05;
    let scale_tol = 1e-12;
    out.detail("tolerance.slope", slope_tol);
    out.detail("tolerance.scale_invariant", scale_tol);

    let h = 1.0 / 32.0;
    let dom = GridDomain::with_resolution(3, &[0.0; 3], 1.0, h, 64)?;
    let cfg = ClassifyConfig::default();

    let log_field = ScalarField::from_generator(dom.clone(), Generator::log_singular(3))?;
    let v = singularity_classify(&log_field, &cfg)?;
    out.detail("log_singular_class", format!("{:?}", v.class));
    out.detail("log_singular_slope", v.slope);
    out.check(
        "greens_rate",
        v.class == SingularityClass::GreensRate && (v.slope - 2.0).abs() <= slope_tol,
    );

    let stereo = ScalarField::from_generator(dom, Generator::Stereographic)?;
    let v = singularity_classify(&stereo, &cfg)?;
    out.detail("stereographic_class", format!("{:?}", v.class));
    out.check(
        "bounded_extendable",
        v.class == SingularityClass::BoundedExtendable,
    );

    let rep = scale_invariant_check(&log_field, 1, DerivMode::Exact)?;
    out.detail("d_grad_u_sup", rep.sup);
    out.check("scale_invariant_exactly_two", (rep.sup - 2.0).abs() <= scale_tol);
    Ok(out)
}

fn c10_volume() -> Result<CriterionOutcome> {
    let mut out = CriterionOutcome::new(10, criterion_name(10));
    let rel_tol = 0.01;
    let rate_tol = 0.3;
    out.detail("tolerance.relative", rel_tol);
    out.detail("tolerance.rate", rate_tol);

    // flat ball volume at n = 3
    let dom = GridDomain::with_resolution(3, &[0.0; 3], 1.0, 0.0, 128)?;
    let zero = ScalarField::constant(dom, 0.0)?;
    let rep = volume_integral(&zero)?;
    let expect = ball_volume(3, 1.0);
    out.detail("ball_volume", rep.value);
    out.check("unit_ball", (rep.value - expect).abs() <= rel_tol * expect);

    // log-singular factor: divergence at rate n
    let h = 1.0 / 32.0;
    let dom = GridDomain::with_resolution(3, &[0.0; 3], 1.0, h, 64)?;
    let log_field = ScalarField::from_generator(dom, Generator::log_singular(3))?;
    let rep = volume_integral(&log_field)?;
    out.detail("log_singular_rate", rep.trend.rate_exponent);
    out.check(
        "log_singular_diverges",
        rep.trend.verdict == TrendVerdict::Diverging
            && (rep.trend.rate_exponent - 3.0).abs() <= rate_tol,
    );

    // stereographic factor over a growing ball: volume of S^3
    let dom = GridDomain::with_resolution(3, &[0.0; 3], 8.0, 0.0, 128)?;
    let stereo = ScalarField::from_generator(dom, Generator::Stereographic)?;
    let rep = volume_integral(&stereo)?;
    let expect = 2.0 * std::f64::consts::PI.powi(2);
    out.detail("sphere_volume", rep.value);
    out.check("sphere_volume", (rep.value - expect).abs() <= rel_tol * expect);
    Ok(out)
}

fn c11_inversion(seed: u64) -> Result<CriterionOutcome> {
    let mut out = CriterionOutcome::new(11, criterion_name(11));
    let tol = 1e-9;
    out.detail("tolerance.deviation", tol);
    for n in [3usize, 4] {
        let rep = pullback_flat_check(n, 100, seed ^ n as u64)?;
        out.detail(&format!("max_deviation.n{n}"), rep.max_deviation);
        out.check(&format!("flat.n{n}"), rep.max_deviation <= tol);
    }
    Ok(out)
}

fn c12_radial(seed: u64) -> Result<CriterionOutcome> {
    let mut out = CriterionOutcome::new(12, criterion_name(12));
    let model_tol = 1e-8;
    let sphere_tol = 1e-6;
    let schouten_tol = 1e-10;
    out.detail("tolerance.model", model_tol);
    out.detail("tolerance.sphere", sphere_tol);
    out.detail("tolerance.schouten", schouten_tol);
    let cfg = RadialOdeConfig::default();

    // f = 0 preserves u = 2 log r over one decade
    let profile = radial_ode_solve(
        RadialOperator::SigmaK { k: 2 },
        0.0,
        3,
        (1.0, 0.0, 2.0),
        (0.1, 1.0),
        &cfg,
    )?;
    let mut drift = 0.0f64;
    for i in 0..profile.len() {
        drift = drift.max((profile.u[i] - 2.0 * profile.r[i].ln()).abs());
    }
    out.detail("model_drift", drift);
    out.check("degenerate_run", drift <= model_tol);

    // constant f reproduces the stereographic factor on [1/2, 2]
    let (n, k) = (3usize, 2usize);
    let f = 0.5 * binomial(n, k).powf(1.0 / k as f64);
    let u0 = |r: f64| ((1.0 + r * r) / 2.0).ln();
    let du0 = |r: f64| 2.0 * r / (1.0 + r * r);
    let profile = radial_ode_solve(
        RadialOperator::SigmaK { k },
        f,
        n,
        (0.5, u0(0.5), du0(0.5)),
        (0.5, 2.0),
        &cfg,
    )?;
    let mut err = 0.0f64;
    for i in 0..profile.len() {
        err = err.max((profile.u[i] - u0(profile.r[i])).abs());
    }
    out.detail("sphere_error", err);
    out.check("sphere_run", err <= sphere_tol);

    // radial reduction against the full conformal change
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
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
        })?;
        let p = ConformalPointData::new(SymTensor::zeros(n)?, grad, hess, u)?;
        let direct = eigenvalues(&conformal_change(&p)?)?;
        let (lr, lt) = radial_schouten(u, du, d2u, r)?;
        let reduced = radial_spectrum(n, lr, lt)?;
        for (a, b) in direct.values().iter().zip(reduced.values()) {
            worst = worst.max((a - b).abs() / direct.norm().max(1.0));
        }
    }
    out.detail("worst_schouten_mismatch", worst);
    out.check("schouten_reduction", worst <= schouten_tol);
    Ok(out)
}

fn c13_ricci(profile: Profile, seed: u64) -> Result<CriterionOutcome> {
    let mut out = CriterionOutcome::new(13, criterion_name(13));
    let samples = profile.mc(100_000);
    let tol = 1e-9;
    out.detail("samples", samples);
    out.detail("tolerance.margin", tol);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut min_margin = f64::INFINITY;
    let mut count = 0u64;
    let mut buf = [0.0f64; MAX_DIM];
    while count < samples {
        let n = rng.gen_range(3..=MAX_DIM);
        let delta = rng.gen_range(0.0..1.0 / (n as f64 - 2.0));
        for slot in buf.iter_mut().take(n) {
            *slot = rng.gen_range(-1.0..1.0);
        }
        if gamma_delta_margin_raw(&buf[..n], delta) < 0.0 {
            continue;
        }
        count += 1;
        let lam = EigenTuple::new(&buf[..n])?;
        min_margin = min_margin.min(ricci_lower_bound_margin(&lam, delta)?);
    }
    out.detail("min_margin_random", min_margin);
    out.check("lower_bound", min_margin >= -tol);

    // boundary tuples achieve equality
    let mut worst_eq = 0.0f64;
    for _ in 0..samples.min(10_000) {
        let n = rng.gen_range(3..=MAX_DIM);
        let delta = rng.gen_range(1e-3..1.0 / (n as f64 - 2.0));
        let others: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(0.1..1.0)).collect();
        let s: f64 = others.iter().sum();
        let l1 = -delta * s / (1.0 + delta);
        let mut vals = others;
        vals.push(l1);
        let lam = EigenTuple::new(&vals)?;
        worst_eq = worst_eq.max(ricci_lower_bound_margin(&lam, delta)?.abs());
    }
    out.detail("worst_boundary_equality", worst_eq);
    out.check("boundary_equality", worst_eq <= tol);
    Ok(out)
}
