//! Numerical toolkit for the cone geometry of fully nonlinear conformal
//! curvature equations: Gamma_delta / Gamma_sigma_k cone calculus, conformal
//! Schouten-tensor transforms, grid-based estimators for Holder / W^{1,p}
//! behavior, and classification of isolated singularities.

pub mod analysis;
pub mod cones;
pub mod conformal;
pub mod error;
pub mod fields;
pub mod radial;
pub mod suite;
pub mod symmat;

pub use error::{Error, Result};
