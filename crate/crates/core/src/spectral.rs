//! Gershgorin bounds and smallest-eigenvalue oracles.
//!
//! The bounds are what the sampler optimizes. The oracles (`lambda_min_*`)
//! exist to check those bounds and are never called from the sampling path.

use crate::error::{Error, Result};
use crate::graph::TridiagonalLaplacian;

/// Default absolute tolerance for the eigenvalue oracles.
pub const ORACLE_TOL: f64 = 1e-10;

/// Largest matrix the Jacobi oracle accepts.
pub const DENSE_ORACLE_MAX_DIM: usize = 64;

/// Row-wise access needed for Gershgorin discs.
pub trait Gershgorin {
    fn dim(&self) -> usize;

    fn center(&self, i: usize) -> f64;

    /// Radius of disc `i` of `S·M·S⁻¹` with `S = diag(scale)`:
    /// `Σ_{j≠i} |M_ij| · s_i / s_j`.
    fn scaled_radius(&self, i: usize, scale: &[f64]) -> f64;

    fn radius(&self, i: usize) -> f64;
}

/// Symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidArgument("empty matrix".into()));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::DimensionMismatch {
                expected: diag.len() - 1,
                actual: offdiag.len(),
            });
        }
        Ok(Self { diag, offdiag })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.abs_diff(j) {
            0 => self.diag[i],
            1 => self.offdiag[i.min(j)],
            _ => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(x.len(), n);
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.offdiag[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.offdiag[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    pub fn to_dense(&self) -> DenseSymmetric {
        let n = self.dim();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = self.diag[i];
            if i + 1 < n {
                data[i * n + i + 1] = self.offdiag[i];
                data[(i + 1) * n + i] = self.offdiag[i];
            }
        }
        DenseSymmetric { n, data }
    }

    fn neighbor_abs(&self, i: usize) -> (f64, f64) {
        let left = if i > 0 {
            self.offdiag[i - 1].abs()
        } else {
            0.0
        };
        let right = self.offdiag.get(i).map_or(0.0, |v| v.abs());
        (left, right)
    }
}

impl Gershgorin for SymTridiagonal {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn center(&self, i: usize) -> f64 {
        self.diag[i]
    }

    fn scaled_radius(&self, i: usize, scale: &[f64]) -> f64 {
        let (left, right) = self.neighbor_abs(i);
        let mut r = 0.0;
        if i > 0 {
            r += left * scale[i] / scale[i - 1];
        }
        if i + 1 < self.dim() {
            r += right * scale[i] / scale[i + 1];
        }
        r
    }

    fn radius(&self, i: usize) -> f64 {
        let (left, right) = self.neighbor_abs(i);
        left + right
    }
}

/// Dense symmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymmetric {
    n: usize,
    data: Vec<f64>,
}

impl DenseSymmetric {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("empty matrix".into()));
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                actual: data.len(),
            });
        }
        for i in 0..n {
            for j in 0..i {
                if data[i * n + j] != data[j * n + i] {
                    return Err(Error::InvalidArgument(format!(
                        "matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

impl Gershgorin for DenseSymmetric {
    fn dim(&self) -> usize {
        self.n
    }

    fn center(&self, i: usize) -> f64 {
        self.get(i, i)
    }

    fn scaled_radius(&self, i: usize, scale: &[f64]) -> f64 {
        (0..self.n)
            .filter(|&j| j != i)
            .map(|j| self.get(i, j).abs() * scale[i] / scale[j])
            .sum()
    }

    fn radius(&self, i: usize) -> f64 {
        (0..self.n)
            .filter(|&j| j != i)
            .map(|j| self.get(i, j).abs())
            .sum()
    }
}

/// Per-node positive scalars defining `S = diag(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingVector(Vec<f64>);

impl ScalingVector {
    pub fn new(s: Vec<f64>) -> Result<Self> {
        if let Some(i) = s.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "scalar {i} = {} is not a positive finite number",
                s[i]
            )));
        }
        Ok(Self(s))
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Ordered node indices picked by a binary selection vector; these are the
/// rows of the sampling matrix `H`, one one-hot row per selected node.
pub fn selection_to_sampling_matrix(selection: &[bool]) -> Vec<usize> {
    selection
        .iter()
        .enumerate()
        .filter_map(|(i, &a)| a.then_some(i))
        .collect()
}

/// Inverse of [`selection_to_sampling_matrix`]: the diagonal of `HᵀH`.
pub fn sampling_rows_to_selection(rows: &[usize], n: usize) -> Result<Vec<bool>> {
    let mut a = vec![false; n];
    for &r in rows {
        if r >= n {
            return Err(Error::OutOfRange { index: r, len: n });
        }
        a[r] = true;
    }
    Ok(a)
}

/// `B = diag(a) + μL` on a path.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    mu: f64,
    selection: Vec<bool>,
    matrix: SymTridiagonal,
}

impl CoefficientMatrix {
    pub fn matrix(&self) -> &SymTridiagonal {
        &self.matrix
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn selection(&self) -> &[bool] {
        &self.selection
    }
}

impl AsRef<SymTridiagonal> for CoefficientMatrix {
    fn as_ref(&self) -> &SymTridiagonal {
        &self.matrix
    }
}

pub fn coefficient_matrix(
    selection: &[bool],
    mu: f64,
    laplacian: &TridiagonalLaplacian,
) -> Result<CoefficientMatrix> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "mu must be positive, got {mu}"
        )));
    }
    if selection.len() != laplacian.dim() {
        return Err(Error::DimensionMismatch {
            expected: laplacian.dim(),
            actual: selection.len(),
        });
    }
    let diag = laplacian
        .diag()
        .iter()
        .zip(selection)
        .map(|(l, &a)| if a { 1.0 } else { 0.0 } + mu * l)
        .collect();
    let offdiag = laplacian.offdiag().iter().map(|l| mu * l).collect();
    Ok(CoefficientMatrix {
        mu,
        selection: selection.to_vec(),
        matrix: SymTridiagonal::new(diag, offdiag)?,
    })
}

/// Smallest Gershgorin disc left-end, `min_i (M_ii − Σ_{j≠i} |M_ij|)`.
pub fn gct_lower_bound<M: Gershgorin + ?Sized>(m: &M) -> f64 {
    (0..m.dim())
        .map(|i| m.center(i) - m.radius(i))
        .fold(f64::INFINITY, f64::min)
}

/// Left-end of disc `i` of `S·M·S⁻¹`.
pub fn scaled_left_end<M: Gershgorin + ?Sized>(m: &M, s: &ScalingVector, i: usize) -> f64 {
    m.center(i) - m.scaled_radius(i, s.as_slice())
}

/// Gershgorin lower bound of the similarity transform `S·M·S⁻¹`, which has
/// the same spectrum as `M`.
pub fn scaled_gct_lower_bound<M: Gershgorin + ?Sized>(m: &M, s: &ScalingVector) -> Result<f64> {
    if s.len() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            actual: s.len(),
        });
    }
    Ok((0..m.dim())
        .map(|i| scaled_left_end(m, s, i))
        .fold(f64::INFINITY, f64::min))
}

/// Number of eigenvalues strictly below `x` (Sturm sequence via the LDLᵀ
/// pivots of `T − xI`).
pub fn sturm_count(t: &SymTridiagonal, x: f64) -> usize {
    let diag = t.diag();
    let off = t.offdiag();
    let mut count = 0;
    let mut q = diag[0] - x;
    for i in 0..diag.len() {
        if i > 0 {
            let prev = if q == 0.0 { f64::MIN_POSITIVE } else { q };
            q = diag[i] - x - off[i - 1] * off[i - 1] / prev;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest eigenvalue of a symmetric tridiagonal matrix to within `±tol`,
/// by bisection on the Gershgorin interval.
pub fn lambda_min_tridiagonal(t: &SymTridiagonal, tol: f64) -> Result<f64> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let n = t.dim();
    let (mut lo, mut hi) = (0..n).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
        let c = t.center(i);
        let r = t.radius(i);
        (lo.min(c - r), hi.max(c + r))
    });
    let pad = f64::EPSILON * (lo.abs().max(hi.abs()).max(1.0)) * n as f64;
    lo -= pad;
    hi += pad;
    // Invariant: sturm_count(lo) == 0, sturm_count(hi) >= 1.
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(t, mid) == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Smallest eigenvalue of a dense symmetric matrix to within `±tol`, by
/// cyclic Jacobi rotations. Limited to [`DENSE_ORACLE_MAX_DIM`].
pub fn lambda_min_dense(m: &DenseSymmetric, tol: f64) -> Result<f64> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let n = m.dim();
    if n > DENSE_ORACLE_MAX_DIM {
        return Err(Error::TooLarge {
            dim: n,
            cap: DENSE_ORACLE_MAX_DIM,
        });
    }
    let mut a = m.data().to_vec();
    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };
    // Every eigenvalue lies within ‖offdiag‖_F of some diagonal entry, so the
    // minimum diagonal entry is accurate to that norm.
    for _sweep in 0..100 {
        if off_norm(&a) <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
    }
    Ok((0..n).map(|i| a[i * n + i]).fold(f64::INFINITY, f64::min))
}
