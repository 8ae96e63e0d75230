//! The analytic field catalog: radial powers, the log-singular factor, the
//! stereographic sphere factor, and degree-two polynomials. Each generator
//! evaluates pointwise and carries exact first and second derivatives.

use crate::error::{Error, Result};
use crate::symmat::SymTensor;

#[derive(Clone, Debug)]
pub enum Generator {
    /// `|x - x0|^a`
    Power { center: Vec<f64>, exponent: f64 },
    /// `2 log |x - x0|`, the model singular conformal factor
    LogSingular { center: Vec<f64> },
    /// `log((1 + |x|^2) / 2)`, the round-sphere factor over flat coordinates
    Stereographic,
    /// `c + b . x + x^T M x` (Hessian `2 M`)
    Quadratic {
        c: f64,
        linear: Vec<f64>,
        quad: SymTensor,
    },
}

impl Generator {
    pub fn power(center: Vec<f64>, exponent: f64) -> Self {
        Generator::Power { center, exponent }
    }

    /// `|x|^a` centered at the origin of an n-dimensional chart.
    pub fn abs_power(n: usize, exponent: f64) -> Self {
        Generator::Power {
            center: vec![0.0; n],
            exponent,
        }
    }

    pub fn log_singular(n: usize) -> Self {
        Generator::LogSingular {
            center: vec![0.0; n],
        }
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Ok(Generator::Quadratic {
            c,
            linear: vec![0.0; n],
            quad: SymTensor::zeros(n)?,
        })
    }

    pub fn linear(coeffs: Vec<f64>) -> Result<Self> {
        let quad = SymTensor::zeros(coeffs.len())?;
        Ok(Generator::Quadratic {
            c: 0.0,
            linear: coeffs,
            quad,
        })
    }

    /// `|x|^2` (quad = identity).
    pub fn abs_squared(n: usize) -> Result<Self> {
        Ok(Generator::Quadratic {
            c: 0.0,
            linear: vec![0.0; n],
            quad: SymTensor::identity(n)?,
        })
    }

    pub fn describe(&self) -> String {
        match self {
            Generator::Power { exponent, .. } => format!("power(a={exponent})"),
            Generator::LogSingular { .. } => "log-singular".into(),
            Generator::Stereographic => "stereographic".into(),
            Generator::Quadratic { .. } => "polynomial".into(),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Generator::Power { center, exponent } => {
                let r = dist(x, center);
                r.powf(*exponent)
            }
            Generator::LogSingular { center } => 2.0 * dist(x, center).ln(),
            Generator::Stereographic => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                ((1.0 + r2) / 2.0).ln()
            }
            Generator::Quadratic { c, linear, quad } => {
                let mut v = *c;
                for (xi, bi) in x.iter().zip(linear) {
                    v += xi * bi;
                }
                v + quad.quad_form(x)
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = x.len();
        match self {
            Generator::Power { center, exponent } => {
                let (r, rel) = dist_rel(x, center);
                if r == 0.0 {
                    return Err(Error::Domain(
                        "power-field derivatives are singular at the center".into(),
                    ));
                }
                let a = *exponent;
                let f = a * r.powf(a - 2.0);
                Ok(rel.iter().map(|&d| f * d).collect())
            }
            Generator::LogSingular { center } => {
                let (r, rel) = dist_rel(x, center);
                if r == 0.0 {
                    return Err(Error::Domain(
                        "log-singular derivatives are singular at the center".into(),
                    ));
                }
                Ok(rel.iter().map(|&d| 2.0 * d / (r * r)).collect())
            }
            Generator::Stereographic => {
                let q = 1.0 + x.iter().map(|v| v * v).sum::<f64>();
                Ok(x.iter().map(|&v| 2.0 * v / q).collect())
            }
            Generator::Quadratic { linear, quad, .. } => {
                let mut g = linear.clone();
                for (i, gi) in g.iter_mut().enumerate() {
                    for j in 0..n {
                        *gi += 2.0 * quad.get(i, j) * x[j];
                    }
                }
                Ok(g)
            }
        }
    }

    pub fn hessian(&self, x: &[f64]) -> Result<SymTensor> {
        let n = x.len();
        match self {
            Generator::Power { center, exponent } => {
                let (r, rel) = dist_rel(x, center);
                if r == 0.0 {
                    return Err(Error::Domain(
                        "power-field derivatives are singular at the center".into(),
                    ));
                }
                let a = *exponent;
                let c1 = a * (a - 2.0) * r.powf(a - 4.0);
                let c2 = a * r.powf(a - 2.0);
                SymTensor::from_upper_fn(n, |i, j| {
                    let kron = if i == j { 1.0 } else { 0.0 };
                    c1 * rel[i] * rel[j] + c2 * kron
                })
            }
            Generator::LogSingular { center } => {
                let (r, rel) = dist_rel(x, center);
                if r == 0.0 {
                    return Err(Error::Domain(
                        "log-singular derivatives are singular at the center".into(),
                    ));
                }
                let r2 = r * r;
                SymTensor::from_upper_fn(n, |i, j| {
                    let kron = if i == j { 1.0 } else { 0.0 };
                    2.0 * kron / r2 - 4.0 * rel[i] * rel[j] / (r2 * r2)
                })
            }
            Generator::Stereographic => {
                let q = 1.0 + x.iter().map(|v| v * v).sum::<f64>();
                SymTensor::from_upper_fn(n, |i, j| {
                    let kron = if i == j { 1.0 } else { 0.0 };
                    2.0 * kron / q - 4.0 * x[i] * x[j] / (q * q)
                })
            }
            Generator::Quadratic { quad, .. } => Ok(quad.scale(2.0)),
        }
    }
}

fn dist(x: &[f64], center: &[f64]) -> f64 {
    x.iter()
        .zip(center)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

fn dist_rel(x: &[f64], center: &[f64]) -> (f64, Vec<f64>) {
    let rel: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
    let r = rel.iter().map(|v| v * v).sum::<f64>().sqrt();
    (r, rel)
}
