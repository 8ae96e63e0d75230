//! Uniform Cartesian grids over punctured balls and annuli.

use crate::error::{Error, Result};
use crate::symmat::MAX_DIM;

/// Hard cap on total box nodes, to keep accidental high-dimensional grids
/// from exhausting memory.
pub const MAX_NODES: usize = 100_000_000;

/// A uniform grid over the box `[-m h, m h]^n` around `center`, with the
/// active set `{ x : r_exc <= |x - center| <= r0 }`. Nodes sit at
/// `center + h * i` for integer multi-indices `i`; the excised set is every
/// node with `d(x) < r_exc`.
#[derive(Clone, Debug)]
pub struct GridDomain {
    n: usize,
    center: Vec<f64>,
    r0: f64,
    r_exc: f64,
    h: f64,
    m: i64,
    strides: Vec<usize>,
    active: Vec<bool>,
    active_count: usize,
}

impl GridDomain {
    pub fn new(n: usize, center: &[f64], r0: f64, r_exc: f64, h: f64) -> Result<Self> {
        if n < 1 || n > MAX_DIM {
            return Err(Error::InvalidInput(format!(
                "grid dimension must be in 1..=8, got {n}"
            )));
        }
        if center.len() != n {
            return Err(Error::InvalidInput(format!(
                "center has {} coordinates, expected {n}",
                center.len()
            )));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidInput(format!("spacing h must be positive, got {h}")));
        }
        if !(r0 > 0.0) || !r0.is_finite() {
            return Err(Error::InvalidInput(format!("outer radius must be positive, got {r0}")));
        }
        if !(0.0..r0).contains(&r_exc) {
            return Err(Error::InvalidInput(format!(
                "excision radius must satisfy 0 <= r_exc < r0, got {r_exc}"
            )));
        }
        let m = (r0 / h + 1e-12).floor() as i64;
        let side = (2 * m + 1) as usize;
        let total = side
            .checked_pow(n as u32)
            .filter(|&t| t <= MAX_NODES)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "grid too large: {side}^{n} nodes exceeds the {MAX_NODES} cap"
                ))
            })?;

        let mut strides = vec![1usize; n];
        for axis in (0..n.saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * side;
        }

        let mut dom = GridDomain {
            n,
            center: center.to_vec(),
            r0,
            r_exc,
            h,
            m,
            strides,
            active: vec![false; total],
            active_count: 0,
        };
        let mut count = 0usize;
        let mut idx = [0i64; MAX_DIM];
        for flat in 0..total {
            dom.decode_into(flat, &mut idx);
            let d = dom.distance(&idx[..n]);
            if d >= r_exc && d <= r0 * (1.0 + 1e-12) {
                dom.active[flat] = true;
                count += 1;
            }
        }
        dom.active_count = count;
        if count == 0 {
            return Err(Error::EmptyDomain(format!(
                "no active nodes for r0 = {r0}, r_exc = {r_exc}, h = {h}"
            )));
        }
        if !dom.interior_flat_iter().any(|_| true) {
            return Err(Error::EmptyDomain(format!(
                "no interior nodes (full stencil active) for r0 = {r0}, r_exc = {r_exc}, h = {h}"
            )));
        }
        Ok(dom)
    }

    /// Grid with roughly `nodes_per_axis` nodes across the diameter:
    /// `m = nodes_per_axis / 2`, `h = r0 / m`.
    pub fn with_resolution(
        n: usize,
        center: &[f64],
        r0: f64,
        r_exc: f64,
        nodes_per_axis: usize,
    ) -> Result<Self> {
        if nodes_per_axis < 4 {
            return Err(Error::InvalidInput(format!(
                "resolution too small: {nodes_per_axis}"
            )));
        }
        let m = (nodes_per_axis / 2) as f64;
        Self::new(n, center, r0, r_exc, r0 / m)
    }

    /// Same geometry, different active mask. Used by mollification, whose
    /// output lives on a shrunken node set.
    pub(crate) fn restrict(&self, active: Vec<bool>) -> Result<Self> {
        assert_eq!(active.len(), self.active.len());
        let count = active.iter().filter(|&&a| a).count();
        if count == 0 {
            return Err(Error::EmptyDomain(
                "restriction leaves no active nodes".into(),
            ));
        }
        Ok(GridDomain {
            active,
            active_count: count,
            center: self.center.clone(),
            strides: self.strides.clone(),
            ..*self
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn r0(&self) -> f64 {
        self.r0
    }
    pub fn r_exc(&self) -> f64 {
        self.r_exc
    }
    pub fn center(&self) -> &[f64] {
        &self.center
    }
    pub fn extent(&self) -> i64 {
        self.m
    }
    pub fn total_nodes(&self) -> usize {
        self.active.len()
    }
    pub fn active_count(&self) -> usize {
        self.active_count
    }

    #[inline]
    pub(crate) fn flat(&self, idx: &[i64]) -> Option<usize> {
        debug_assert_eq!(idx.len(), self.n);
        let mut flat = 0usize;
        for (axis, &i) in idx.iter().enumerate() {
            if i < -self.m || i > self.m {
                return None;
            }
            flat += (i + self.m) as usize * self.strides[axis];
        }
        Some(flat)
    }

    #[inline]
    pub(crate) fn decode_into(&self, flat: usize, out: &mut [i64; MAX_DIM]) {
        let mut rem = flat;
        for axis in 0..self.n {
            let q = rem / self.strides[axis];
            rem %= self.strides[axis];
            out[axis] = q as i64 - self.m;
        }
    }

    /// Physical position of a node.
    pub fn position(&self, idx: &[i64]) -> Vec<f64> {
        idx.iter()
            .zip(&self.center)
            .map(|(&i, &c)| c + self.h * i as f64)
            .collect()
    }

    #[inline]
    pub(crate) fn position_into(&self, idx: &[i64], out: &mut [f64; MAX_DIM]) {
        for axis in 0..self.n {
            out[axis] = self.center[axis] + self.h * idx[axis] as f64;
        }
    }

    /// Distance `d(x) = |x - center|` of a node from the grid center.
    #[inline]
    pub fn distance(&self, idx: &[i64]) -> f64 {
        self.h
            * idx
                .iter()
                .map(|&i| (i as f64) * (i as f64))
                .sum::<f64>()
                .sqrt()
    }

    #[inline]
    pub fn is_active(&self, idx: &[i64]) -> bool {
        self.flat(idx).map(|f| self.active[f]).unwrap_or(false)
    }

    #[inline]
    pub(crate) fn is_active_flat(&self, flat: usize) -> bool {
        self.active[flat]
    }

    /// A node is interior when every node of the full 3^n neighborhood
    /// (the widest stencil any estimator uses) is active.
    pub fn is_interior(&self, idx: &[i64]) -> bool {
        if !self.is_active(idx) {
            return false;
        }
        let n = self.n;
        let mut probe = [0i64; MAX_DIM];
        for code in 0..3usize.pow(n as u32) {
            let mut c = code;
            for a in 0..n {
                probe[a] = idx[a] + (c % 3) as i64 - 1;
                c /= 3;
            }
            if !self.is_active(&probe[..n]) {
                return false;
            }
        }
        true
    }

    pub(crate) fn active_flat_iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.active.len()).filter(move |&f| self.active[f])
    }

    pub(crate) fn interior_flat_iter(&self) -> impl Iterator<Item = usize> + '_ {
        let mut idx = [0i64; MAX_DIM];
        (0..self.active.len()).filter(move |&f| {
            if !self.active[f] {
                return false;
            }
            self.decode_into(f, &mut idx);
            self.is_interior(&idx[..self.n])
        })
    }

    /// Iterates active node multi-indices.
    pub fn active_nodes(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        self.active_flat_iter().map(move |f| {
            let mut idx = [0i64; MAX_DIM];
            self.decode_into(f, &mut idx);
            idx[..self.n].to_vec()
        })
    }

    /// Iterates interior node multi-indices.
    pub fn interior_nodes(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        self.interior_flat_iter().map(move |f| {
            let mut idx = [0i64; MAX_DIM];
            self.decode_into(f, &mut idx);
            idx[..self.n].to_vec()
        })
    }

    /// Geometry equality check used when combining fields.
    pub fn same_geometry(&self, other: &GridDomain) -> bool {
        self.n == other.n
            && self.h == other.h
            && self.m == other.m
            && self.center == other.center
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_and_masks() {
        let dom = GridDomain::new(2, &[0.0, 0.0], 1.0, 0.0, 0.25).unwrap();
        assert_eq!(dom.extent(), 4);
        assert!(dom.is_active(&[0, 0]));
        assert!(dom.is_active(&[4, 0]));
        assert!(!dom.is_active(&[4, 4])); // corner outside the ball
        assert!(dom.is_interior(&[0, 0]));
        assert!(!dom.is_interior(&[4, 0])); // boundary node

        let punctured = GridDomain::new(2, &[0.0, 0.0], 1.0, 0.3, 0.1).unwrap();
        assert!(!punctured.is_active(&[0, 0]));
        assert!(!punctured.is_active(&[2, 0])); // d = 0.2 < 0.3
        assert!(punctured.is_active(&[3, 0]));
    }

    #[test]
    fn resolution_helper() {
        let dom = GridDomain::with_resolution(3, &[0.0; 3], 1.0, 0.0, 64).unwrap();
        assert_eq!(dom.extent(), 32);
        assert!((dom.h() - 1.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(GridDomain::new(3, &[0.0; 3], 1.0, 1.5, 0.1).is_err());
        assert!(GridDomain::new(3, &[0.0; 3], 1.0, 0.0, -0.1).is_err());
        assert!(GridDomain::new(3, &[0.0; 2], 1.0, 0.0, 0.1).is_err());
        // annulus so thin there is no interior node
        assert!(GridDomain::new(2, &[0.0, 0.0], 1.0, 0.99, 0.25).is_err());
    }

    #[test]
    fn node_counts_match_iteration() {
        let dom = GridDomain::new(3, &[0.5, -0.25, 0.0], 0.8, 0.2, 0.1).unwrap();
        assert_eq!(dom.active_nodes().count(), dom.active_count());
        for idx in dom.active_nodes() {
            let d = dom.distance(&idx);
            assert!(d >= 0.2 && d <= 0.8 * (1.0 + 1e-12));
        }
        for idx in dom.interior_nodes() {
            assert!(dom.is_interior(&idx));
        }
    }

    #[test]
    fn positions_are_center_offsets() {
        let dom = GridDomain::new(2, &[1.0, -2.0], 1.0, 0.0, 0.5).unwrap();
        assert_eq!(dom.position(&[1, -1]), vec![1.5, -2.5]);
        assert!((dom.distance(&[1, -1]) - 0.5 * 2.0f64.sqrt()).abs() < 1e-15);
    }
}
