//! Dense symmetric-matrix algebra for small dimensions.
//!
//! Everything here is sized for pointwise curvature data: matrices are at most
//! 8x8 and live on the stack. Eigenvalues come from cyclic Jacobi sweeps, which
//! at these sizes are both fast and as accurate as the conditioning allows.
//! Elementary symmetric polynomials use the stable prefix recurrence
//! `e_k(x_1..x_m) = e_k(x_1..x_{m-1}) + x_m e_{k-1}(x_1..x_{m-1})`.

use crate::error::{Error, Result};

/// Largest supported matrix/tuple dimension.
pub const MAX_DIM: usize = 8;

const PACKED_LEN: usize = MAX_DIM * (MAX_DIM + 1) / 2;

/// Orthogonality tolerance accepted by [`Frame::from_columns`] and
/// [`spectral_assemble`].
pub const ORTHO_TOL: f64 = 1e-12;

/// Jacobi sweeps stop once the off-diagonal Frobenius mass drops below
/// `JACOBI_TOL * ||S||_F`.
pub const JACOBI_TOL: f64 = 1e-14;

/// A symmetric n x n matrix, 2 <= n <= 8, storing only the upper triangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymTensor {
    n: usize,
    a: [f64; PACKED_LEN],
}

#[inline]
fn packed_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < n);
    // row-major upper triangle
    i * n - i * (i + 1) / 2 + j
}

impl SymTensor {
    pub fn zeros(n: usize) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&n) {
            return Err(Error::InvalidInput(format!(
                "SymTensor dimension must be in 2..=8, got {n}"
            )));
        }
        Ok(SymTensor {
            n,
            a: [0.0; PACKED_LEN],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut s = Self::zeros(n)?;
        for i in 0..n {
            s.set(i, i, 1.0);
        }
        Ok(s)
    }

    pub fn from_diag(diag: &[f64]) -> Result<Self> {
        let mut s = Self::zeros(diag.len())?;
        for (i, &d) in diag.iter().enumerate() {
            s.set(i, i, d);
        }
        s.check_finite()?;
        Ok(s)
    }

    /// Builds from a callback over (i, j) with i <= j.
    pub fn from_upper_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut s = Self::zeros(n)?;
        for i in 0..n {
            for j in i..n {
                s.set(i, j, f(i, j));
            }
        }
        s.check_finite()?;
        Ok(s)
    }

    /// Rank-one tensor `v v^T`.
    pub fn outer(v: &[f64]) -> Result<Self> {
        Self::from_upper_fn(v.len(), |i, j| v[i] * v[j])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.a[packed_index(self.n, i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.a[packed_index(self.n, i, j)] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let v = self.get(i, j);
                s += v * v;
            }
        }
        s.sqrt()
    }

    /// Spectral (operator) norm, via the eigendecomposition.
    pub fn op_norm(&self) -> Result<f64> {
        let lam = eigenvalues(self)?;
        Ok(lam
            .values()
            .iter()
            .fold(0.0f64, |acc, &v| acc.max(v.abs())))
    }

    pub fn is_finite(&self) -> bool {
        (0..self.n).all(|i| (i..self.n).all(|j| self.get(i, j).is_finite()))
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidInput(
                "SymTensor has a non-finite entry".into(),
            ))
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = *self;
        for v in out.a.iter_mut() {
            *v *= c;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut out = *self;
        for (v, w) in out.a.iter_mut().zip(other.a.iter()) {
            *v += w;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// `self + c * I`.
    pub fn add_scaled_identity(&self, c: f64) -> Self {
        let mut out = *self;
        for i in 0..self.n {
            let v = out.get(i, i);
            out.set(i, i, v + c);
        }
        out
    }

    /// Quadratic form `x^T S x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n, "dimension mismatch");
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += x[i] * self.get(i, j) * x[j];
            }
        }
        s
    }
}

impl std::ops::Add for SymTensor {
    type Output = SymTensor;
    fn add(self, rhs: SymTensor) -> SymTensor {
        SymTensor::add(&self, &rhs)
    }
}

impl std::ops::Sub for SymTensor {
    type Output = SymTensor;
    fn sub(self, rhs: SymTensor) -> SymTensor {
        SymTensor::sub(&self, &rhs)
    }
}

/// Sorted (non-decreasing) tuple of real eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenTuple {
    n: usize,
    vals: [f64; MAX_DIM],
}

impl EigenTuple {
    /// Sorts the input; holds tuples of length 1..=8.
    pub fn new(vals: &[f64]) -> Result<Self> {
        if vals.is_empty() || vals.len() > MAX_DIM {
            return Err(Error::InvalidInput(format!(
                "eigen tuple length must be in 1..=8, got {}",
                vals.len()
            )));
        }
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "eigen tuple has a non-finite entry".into(),
            ));
        }
        let mut buf = [0.0; MAX_DIM];
        buf[..vals.len()].copy_from_slice(vals);
        buf[..vals.len()].sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(EigenTuple {
            n: vals.len(),
            vals: buf,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.vals[..self.n]
    }

    pub fn min(&self) -> f64 {
        self.vals[0]
    }

    pub fn max(&self) -> f64 {
        self.vals[self.n - 1]
    }

    pub fn sum(&self) -> f64 {
        self.values().iter().sum()
    }

    pub fn norm(&self) -> f64 {
        self.values().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        let scaled: Vec<f64> = self.values().iter().map(|v| c * v).collect();
        EigenTuple::new(&scaled).expect("scaling a finite tuple by a finite factor")
    }
}

/// Orthogonal frame: columns are the eigenvectors of a decomposition.
#[derive(Clone, Copy, Debug)]
pub struct Frame {
    n: usize,
    // m[i][j] = entry in row i, column j
    m: [[f64; MAX_DIM]; MAX_DIM],
}

impl Frame {
    pub fn identity(n: usize) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&n) {
            return Err(Error::InvalidInput(format!(
                "Frame dimension must be in 2..=8, got {n}"
            )));
        }
        let mut m = [[0.0; MAX_DIM]; MAX_DIM];
        for (i, row) in m.iter_mut().enumerate().take(n) {
            row[i] = 1.0;
        }
        Ok(Frame { n, m })
    }

    /// Validates orthonormality of the columns to [`ORTHO_TOL`].
    pub fn from_columns(cols: &[Vec<f64>]) -> Result<Self> {
        let n = cols.len();
        let mut f = Frame::identity(n)?;
        for (j, col) in cols.iter().enumerate() {
            if col.len() != n {
                return Err(Error::InvalidInput(format!(
                    "frame column {j} has length {}, expected {n}",
                    col.len()
                )));
            }
            for (i, &v) in col.iter().enumerate() {
                f.m[i][j] = v;
            }
        }
        f.check_orthogonal()?;
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[i][j]
    }

    pub fn check_orthogonal(&self) -> Result<()> {
        for a in 0..self.n {
            for b in a..self.n {
                let dot: f64 = (0..self.n).map(|i| self.m[i][a] * self.m[i][b]).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                if !dot.is_finite() || (dot - target).abs() > ORTHO_TOL {
                    return Err(Error::InvalidInput(format!(
                        "frame is not orthogonal: column dot ({a},{b}) = {dot:.3e}, \
                         expected {target}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Full eigendecomposition `S = Q diag(lambda) Q^T` by cyclic Jacobi rotations.
///
/// Eigenvalues are returned sorted ascending, with the frame columns permuted
/// to match. Sweeps run until the off-diagonal Frobenius mass is below
/// `JACOBI_TOL * ||S||_F`.
pub fn eigen_decompose(s: &SymTensor) -> Result<(EigenTuple, Frame)> {
    s.check_finite()?;
    let n = s.dim();
    let mut a = [[0.0f64; MAX_DIM]; MAX_DIM];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = s.get(i, j);
        }
    }
    let mut q = [[0.0f64; MAX_DIM]; MAX_DIM];
    for (i, row) in q.iter_mut().enumerate().take(n) {
        row[i] = 1.0;
    }

    let norm = s.frobenius_norm();
    let stop = JACOBI_TOL * norm;

    let off = |a: &[[f64; MAX_DIM]; MAX_DIM]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i][j] * a[i][j];
                }
            }
        }
        s.sqrt()
    };

    if norm > 0.0 {
        let mut sweeps = 0;
        while off(&a) > stop {
            sweeps += 1;
            if sweeps > 64 {
                // Jacobi converges quadratically; 64 sweeps means the input is
                // pathological (NaN-free but overflowing intermediate scale).
                return Err(Error::InvalidInput(
                    "Jacobi iteration failed to converge".into(),
                ));
            }
            for p in 0..n - 1 {
                for r in p + 1..n {
                    let apr = a[p][r];
                    if apr == 0.0 {
                        continue;
                    }
                    let theta = (a[r][r] - a[p][p]) / (2.0 * apr);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + (1.0 + theta * theta).sqrt())
                    } else {
                        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let sn = t * c;

                    for k in 0..n {
                        let akp = a[k][p];
                        let akr = a[k][r];
                        a[k][p] = c * akp - sn * akr;
                        a[k][r] = sn * akp + c * akr;
                    }
                    for k in 0..n {
                        let apk = a[p][k];
                        let ark = a[r][k];
                        a[p][k] = c * apk - sn * ark;
                        a[r][k] = sn * apk + c * ark;
                    }
                    for k in 0..n {
                        let qkp = q[k][p];
                        let qkr = q[k][r];
                        q[k][p] = c * qkp - sn * qkr;
                        q[k][r] = sn * qkp + c * qkr;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].partial_cmp(&a[j][j]).unwrap());

    let mut vals = [0.0; MAX_DIM];
    let mut frame = Frame::identity(n)?;
    for (slot, &src) in order.iter().enumerate() {
        vals[slot] = a[src][src];
        for i in 0..n {
            frame.m[i][slot] = q[i][src];
        }
    }
    let lam = EigenTuple {
        n,
        vals,
    };
    Ok((lam, frame))
}

/// Eigenvalues of a symmetric matrix, sorted ascending.
pub fn eigenvalues(s: &SymTensor) -> Result<EigenTuple> {
    eigen_decompose(s).map(|(lam, _)| lam)
}

/// All elementary symmetric polynomials `e_0..e_n` of the entries of `vals`,
/// written into `out[0..=n]` (`out[0] = 1`).
pub fn sigma_all_into(vals: &[f64], out: &mut [f64]) {
    let n = vals.len();
    debug_assert!(out.len() > n);
    out[0] = 1.0;
    for o in out.iter_mut().take(n + 1).skip(1) {
        *o = 0.0;
    }
    for (m, &x) in vals.iter().enumerate() {
        // e_k over the first m+1 entries, descending k so e_{k-1} is still
        // the previous prefix value.
        for k in (1..=m + 1).rev() {
            out[k] += x * out[k - 1];
        }
    }
}

/// `sigma_k` of an eigenvalue tuple.
pub fn sigma_k(lam: &EigenTuple, k: usize) -> Result<f64> {
    if k < 1 || k > lam.dim() {
        return Err(Error::InvalidInput(format!(
            "sigma_k order k = {k} out of range 1..={}",
            lam.dim()
        )));
    }
    let mut e = [0.0; MAX_DIM + 1];
    sigma_all_into(lam.values(), &mut e);
    Ok(e[k])
}

/// Binomial coefficient as f64 (exact for n <= 8).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut num = 1.0;
    let mut den = 1.0;
    for i in 0..k {
        num *= (n - i) as f64;
        den *= (i + 1) as f64;
    }
    num / den
}

/// Reassembles `Q diag(lambda) Q^T`.
pub fn spectral_assemble(lam: &EigenTuple, q: &Frame) -> Result<SymTensor> {
    if lam.dim() != q.dim() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: tuple {} vs frame {}",
            lam.dim(),
            q.dim()
        )));
    }
    q.check_orthogonal()?;
    let n = lam.dim();
    let v = lam.values();
    SymTensor::from_upper_fn(n, |i, j| (0..n).map(|k| q.get(i, k) * v[k] * q.get(j, k)).sum())
}
