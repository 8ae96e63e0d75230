//! Discretized scalar fields on punctured balls and annuli, with
//! finite-difference derivatives, mollification, the Lambda-lift, and
//! inversion coordinates.

mod csv;
mod fd;
mod generator;
mod grid;
mod invert;
mod mollify;

pub use csv::{load_csv, read_csv, save_csv, write_csv};
pub use fd::{
    fd_cone_tol, fd_gradient, fd_gradient_fn, fd_hessian, fd_hessian_fn, fd_laplacian,
};
pub use generator::Generator;
pub use grid::{GridDomain, MAX_NODES};
pub use invert::{invert_coordinates, psi_field, pullback_flat_check, PullbackReport};
pub use mollify::{
    lambda_lift, mollified_hessian_cone_check, mollify, MollifierSpec, MollifyConeReport,
};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::symmat::MAX_DIM;

/// Surface area of the unit sphere S^{n-1} in R^n.
pub fn unit_sphere_area(n: usize) -> f64 {
    // 2 pi^{n/2} / Gamma(n/2), with Gamma at half-integers computed exactly
    let half_gamma = |two_a: usize| -> f64 {
        // Gamma(two_a / 2)
        if two_a % 2 == 0 {
            let mut g = 1.0;
            for i in 1..two_a / 2 {
                g *= i as f64;
            }
            g
        } else {
            let mut g = std::f64::consts::PI.sqrt();
            let mut a = 0.5;
            while (a - two_a as f64 / 2.0).abs() > 0.25 {
                g *= a;
                a += 1.0;
            }
            g
        }
    };
    2.0 * std::f64::consts::PI.powf(n as f64 / 2.0) / half_gamma(n)
}

/// Volume of the n-ball of radius r.
pub fn ball_volume(n: usize, r: f64) -> f64 {
    unit_sphere_area(n) * r.powi(n as i32) / n as f64
}

/// A scalar field sampled on a grid, optionally tagged with the analytic
/// generator it was sampled from (which then provides exact derivatives).
#[derive(Clone, Debug)]
pub struct ScalarField {
    domain: Arc<GridDomain>,
    values: Vec<f64>,
    generator: Option<Generator>,
}

impl ScalarField {
    pub fn from_generator(domain: impl Into<Arc<GridDomain>>, gen: Generator) -> Result<Self> {
        let domain = domain.into();
        let mut values = vec![f64::NAN; domain.total_nodes()];
        let mut idx = [0i64; MAX_DIM];
        let mut pos = [0.0f64; MAX_DIM];
        for flat in domain.active_flat_iter() {
            domain.decode_into(flat, &mut idx);
            domain.position_into(&idx[..domain.dim()], &mut pos);
            let v = gen.value(&pos[..domain.dim()]);
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "generator {} is non-finite at active node {:?}; \
                     excise the singular point with r_exc > 0",
                    gen.describe(),
                    &idx[..domain.dim()]
                )));
            }
            values[flat] = v;
        }
        Ok(ScalarField {
            domain,
            values,
            generator: Some(gen),
        })
    }

    pub fn from_fn(
        domain: impl Into<Arc<GridDomain>>,
        f: impl Fn(&[f64]) -> f64,
    ) -> Result<Self> {
        let domain = domain.into();
        let mut values = vec![f64::NAN; domain.total_nodes()];
        let mut idx = [0i64; MAX_DIM];
        let mut pos = [0.0f64; MAX_DIM];
        for flat in domain.active_flat_iter() {
            domain.decode_into(flat, &mut idx);
            domain.position_into(&idx[..domain.dim()], &mut pos);
            let v = f(&pos[..domain.dim()]);
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "field value non-finite at active node {:?}",
                    &idx[..domain.dim()]
                )));
            }
            values[flat] = v;
        }
        Ok(ScalarField {
            domain,
            values,
            generator: None,
        })
    }

    pub(crate) fn from_raw(
        domain: Arc<GridDomain>,
        values: Vec<f64>,
        generator: Option<Generator>,
    ) -> Self {
        debug_assert_eq!(values.len(), domain.total_nodes());
        ScalarField {
            domain,
            values,
            generator,
        }
    }

    pub fn constant(domain: impl Into<Arc<GridDomain>>, c: f64) -> Result<Self> {
        let domain = domain.into();
        let n = domain.dim();
        Self::from_generator(domain, Generator::constant(n, c)?)
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn domain_arc(&self) -> Arc<GridDomain> {
        Arc::clone(&self.domain)
    }

    pub fn generator(&self) -> Option<&Generator> {
        self.generator.as_ref()
    }

    pub fn value(&self, idx: &[i64]) -> Result<f64> {
        match self.domain.flat(idx) {
            Some(f) if self.domain.is_active_flat(f) => Ok(self.values[f]),
            _ => Err(Error::InvalidInput(format!(
                "node {idx:?} is not active in this field's domain"
            ))),
        }
    }

    #[inline]
    pub(crate) fn value_flat(&self, flat: usize) -> f64 {
        self.values[flat]
    }

    /// Minimum over active nodes.
    pub fn min_value(&self) -> f64 {
        self.domain
            .active_flat_iter()
            .map(|f| self.values[f])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.domain
            .active_flat_iter()
            .map(|f| self.values[f])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Pointwise combination of two fields on the same geometry; the result
    /// is active where both are. Drops the generator tag.
    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !self.domain.same_geometry(other.domain()) {
            return Err(Error::InvalidInput(
                "fields live on different grid geometries".into(),
            ));
        }
        let mut active = vec![false; self.domain.total_nodes()];
        let mut values = vec![f64::NAN; self.domain.total_nodes()];
        for flat in 0..self.domain.total_nodes() {
            if self.domain.is_active_flat(flat) && other.domain.is_active_flat(flat) {
                active[flat] = true;
                values[flat] = f(self.values[flat], other.values[flat]);
            }
        }
        let domain = Arc::new(self.domain.restrict(active)?);
        Ok(ScalarField {
            domain,
            values,
            generator: None,
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(flat, &v)| {
                if self.domain.is_active_flat(flat) {
                    f(v)
                } else {
                    f64::NAN
                }
            })
            .collect();
        ScalarField {
            domain: Arc::clone(&self.domain),
            values,
            generator: None,
        }
    }
}
