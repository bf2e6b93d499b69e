//! Graph-Laplacian-regularized interpolation from samples.
//!
//! Minimizes `‖y − Hx‖² + μ·xᵀLx`, i.e. solves `(diag(a) + μL)·x = Hᵀy` with
//! a symmetric tridiagonal LDLᵀ factorization.

use crate::error::{Error, Result};
use crate::graph::{path_laplacian, PathGraph};
use crate::spectral::{coefficient_matrix, SymTridiagonal};

/// Relative pivot size below which the system is treated as singular.
pub const PIVOT_THRESHOLD: f64 = 1e-12;

/// Observations `y` at the nodes selected by `a`, in node order.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    selection: Vec<bool>,
    values: Vec<f64>,
}

impl SampledSignal {
    pub fn new(selection: Vec<bool>, values: Vec<f64>) -> Result<Self> {
        let count = selection.iter().filter(|&&a| a).count();
        if values.len() != count {
            return Err(Error::DimensionMismatch {
                expected: count,
                actual: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: i, col: 0 });
        }
        Ok(Self { selection, values })
    }

    /// Samples `signal` at the selected nodes.
    pub fn observe(selection: &[bool], signal: &[f64]) -> Result<Self> {
        if selection.len() != signal.len() {
            return Err(Error::DimensionMismatch {
                expected: selection.len(),
                actual: signal.len(),
            });
        }
        let values = signal
            .iter()
            .zip(selection)
            .filter_map(|(&v, &a)| a.then_some(v))
            .collect();
        Self::new(selection.to_vec(), values)
    }

    pub fn selection(&self) -> &[bool] {
        &self.selection
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `Hᵀy`: observations scattered back to their nodes.
    pub fn scatter(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.selection.len()];
        let mut it = self.values.iter();
        for (slot, &a) in out.iter_mut().zip(&self.selection) {
            if a {
                *slot = *it.next().expect("length checked");
            }
        }
        out
    }
}

/// First maximal run of positively-connected nodes that holds no sample.
fn uncovered_segment(graph: &PathGraph, selection: &[bool]) -> Option<(usize, usize)> {
    let n = graph.n_nodes();
    let mut first = 0;
    let mut sampled = false;
    for (i, &a) in selection.iter().enumerate() {
        sampled |= a;
        let breaks = i + 1 == n || graph.weights()[i] <= 0.0;
        if breaks {
            if !sampled {
                return Some((first, i));
            }
            first = i + 1;
            sampled = false;
        }
    }
    None
}

/// Solves a symmetric tridiagonal system by LDLᵀ. Fails with the index of
/// the first pivot that is too small.
pub fn solve_sym_tridiagonal(
    t: &SymTridiagonal,
    rhs: &[f64],
) -> std::result::Result<Vec<f64>, usize> {
    let n = t.dim();
    assert_eq!(rhs.len(), n);
    let diag = t.diag();
    let off = t.offdiag();
    let scale = diag
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);

    let mut d = vec![0.0; n];
    let mut l = vec![0.0; n.saturating_sub(1)];
    d[0] = diag[0];
    for i in 0..n {
        if i > 0 {
            l[i - 1] = off[i - 1] / d[i - 1];
            d[i] = diag[i] - l[i - 1] * off[i - 1];
        }
        if d[i].is_nan() || d[i] <= PIVOT_THRESHOLD * scale {
            return Err(i);
        }
    }

    let mut x = rhs.to_vec();
    for i in 1..n {
        x[i] -= l[i - 1] * x[i - 1];
    }
    for i in 0..n {
        x[i] /= d[i];
    }
    for i in (0..n.saturating_sub(1)).rev() {
        x[i] -= l[i] * x[i + 1];
    }
    Ok(x)
}

/// GLR reconstruction of the full signal from `obs`.
pub fn solve_glr(graph: &PathGraph, obs: &SampledSignal, mu: f64) -> Result<Vec<f64>> {
    let n = graph.n_nodes();
    if obs.selection().len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: obs.selection().len(),
        });
    }
    if let Some((first, last)) = uncovered_segment(graph, obs.selection()) {
        return Err(Error::Singular { first, last });
    }
    let b = coefficient_matrix(obs.selection(), mu, &path_laplacian(graph))?;
    solve_sym_tridiagonal(b.matrix(), &obs.scatter()).map_err(|pivot| {
        // Weak but nonzero links can still leave B numerically singular;
        // report the positively-connected run holding the bad pivot.
        let w = graph.weights();
        let first = (0..pivot).rev().find(|&j| w[j] <= 0.0).map_or(0, |j| j + 1);
        let last = (pivot..n - 1).find(|&j| w[j] <= 0.0).unwrap_or(n - 1);
        Error::Singular { first, last }
    })
}

/// `‖(diag(a) + μL)x − Hᵀy‖₂`
pub fn glr_residual(graph: &PathGraph, obs: &SampledSignal, mu: f64, x: &[f64]) -> Result<f64> {
    let b = coefficient_matrix(obs.selection(), mu, &path_laplacian(graph))?;
    let bx = b.matrix().mul_vec(x);
    Ok(bx
        .iter()
        .zip(obs.scatter())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt())
}
