//! Similarity path graph (SPG) construction and Laplacians.
//!
//! Consecutive frames are joined by an edge whose weight is `1 - δ`, where δ
//! is a symmetric feature distance in `[0, 2]`. Weights are clamped to
//! `[0, 1]` so the graph stays positive.
//!
//! General graphs with self-loops are supported only for checking the
//! partition lower bound on generalized Laplacians; the sampler itself works
//! on paths.

use crate::error::{Error, Result};
use crate::spectral::{DenseSymmetric, SymTridiagonal};

/// `N` frame descriptors of dimension `K`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    dim: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || dim == 0 {
            return Err(Error::InvalidArgument(format!(
                "feature matrix must be non-empty, got {rows}x{dim}"
            )));
        }
        let expected = rows
            .checked_mul(dim)
            .ok_or_else(|| Error::InvalidArgument("feature matrix too large".into()))?;
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: data.len(),
            });
        }
        for (row, chunk) in data.chunks_exact(dim).enumerate() {
            if let Some(col) = chunk.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row, col });
            }
            if norm(chunk) <= 0.0 {
                return Err(Error::ZeroNorm { row });
            }
        }
        Ok(Self { rows, dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "row {i} has {} columns, expected {dim}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), dim, data)
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `‖a - scale·b‖₂`
fn residual_norm(a: &[f64], b: &[f64], scale: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - scale * y;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Feature distance between two frame descriptors:
///
/// ```text
/// δ = (‖f − cosθ·g‖ + ‖g − cosθ·f‖) / (‖f‖ + ‖g‖),   cosθ = ⟨f,g⟩ / (‖f‖‖g‖)
/// ```
///
/// Symmetric and bounded in `[0, 2]`. Identical vectors give 0.
pub fn feature_distance(f: &[f64], g: &[f64]) -> Result<f64> {
    if f.len() != g.len() {
        return Err(Error::DimensionMismatch {
            expected: f.len(),
            actual: g.len(),
        });
    }
    let nf = norm(f);
    let ng = norm(g);
    if !(nf > 0.0 && ng > 0.0) || !nf.is_finite() || !ng.is_finite() {
        return Err(Error::InvalidArgument(
            "feature distance needs finite vectors of positive norm".into(),
        ));
    }
    let cos = (dot(f, g) / (nf * ng)).clamp(-1.0, 1.0);
    Ok((residual_norm(f, g, cos) + residual_norm(g, f, cos)) / (nf + ng))
}

/// A path graph over `n` nodes with `n - 1` edge weights in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGraph {
    weights: Vec<f64>,
}

impl PathGraph {
    /// Path with `weights.len() + 1` nodes.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if let Some(i) = weights
            .iter()
            .position(|w| !w.is_finite() || !(0.0..=1.0).contains(w))
        {
            return Err(Error::InvalidArgument(format!(
                "edge weight {i} = {} outside [0, 1]",
                weights[i]
            )));
        }
        Ok(Self { weights })
    }

    /// A single isolated node.
    pub fn singleton() -> Self {
        Self {
            weights: Vec::new(),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.weights.len() + 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Sub-path over nodes `first..=last`; the edges leaving it are dropped.
    pub fn segment(&self, first: usize, last: usize) -> Segment<'_> {
        assert!(
            first <= last && last < self.n_nodes(),
            "segment out of range"
        );
        Segment {
            weights: &self.weights[first..last],
        }
    }

    pub fn as_segment(&self) -> Segment<'_> {
        Segment {
            weights: &self.weights,
        }
    }

    /// Graph Laplacian regularizer `xᵀLx = Σ w_{i,i+1} (x_i − x_{i+1})²`.
    pub fn glr(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n_nodes());
        self.weights
            .iter()
            .zip(x.windows(2))
            .map(|(w, p)| w * (p[0] - p[1]).powi(2))
            .sum()
    }
}

/// Borrowed view of a contiguous run of path nodes.
#[derive(Debug, Clone, Copy)]
pub struct Segment<'a> {
    weights: &'a [f64],
}

impl<'a> Segment<'a> {
    pub fn from_weights(weights: &'a [f64]) -> Self {
        Self { weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn weights(&self) -> &'a [f64] {
        self.weights
    }

    /// Weight of the edge `(i, i + 1)`, zero past either end.
    #[inline]
    pub(crate) fn edge(&self, i: usize) -> f64 {
        self.weights.get(i).copied().unwrap_or(0.0)
    }

    /// Weight of the edge `(i - 1, i)`, zero at the first node.
    #[inline]
    pub(crate) fn left_edge(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.weights[i - 1]
        }
    }

    #[inline]
    pub(crate) fn degree(&self, i: usize) -> f64 {
        self.left_edge(i) + self.edge(i)
    }

    pub fn laplacian(&self) -> TridiagonalLaplacian {
        let n = self.len();
        let diag = (0..n).map(|i| self.degree(i)).collect();
        let offdiag = self.weights.iter().map(|w| -w).collect();
        TridiagonalLaplacian(SymTridiagonal::new(diag, offdiag).expect("consistent lengths"))
    }
}

/// Builds the similarity path graph: `w_{i,i+1} = clamp(1 − δ(f_i, f_{i+1}), 0, 1)`.
pub fn build_spg(features: &FeatureMatrix) -> Result<PathGraph> {
    let n = features.n_rows();
    let mut weights = Vec::with_capacity(n.saturating_sub(1));
    for i in 0..n.saturating_sub(1) {
        let delta = feature_distance(features.row(i), features.row(i + 1)).map_err(|e| {
            Error::EdgeDistance {
                row: i,
                next: i + 1,
                reason: e.to_string(),
            }
        })?;
        weights.push((1.0 - delta).clamp(0.0, 1.0));
    }
    PathGraph::from_weights(weights)
}

/// Combinatorial Laplacian `L = D − W` of a path, kept in tridiagonal form.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalLaplacian(SymTridiagonal);

impl TridiagonalLaplacian {
    pub fn matrix(&self) -> &SymTridiagonal {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn diag(&self) -> &[f64] {
        self.0.diag()
    }

    pub fn offdiag(&self) -> &[f64] {
        self.0.offdiag()
    }
}

impl AsRef<SymTridiagonal> for TridiagonalLaplacian {
    fn as_ref(&self) -> &SymTridiagonal {
        &self.0
    }
}

pub fn path_laplacian(graph: &PathGraph) -> TridiagonalLaplacian {
    graph.as_segment().laplacian()
}

/// Undirected graph with a symmetric nonnegative adjacency matrix. Diagonal
/// entries are self-loop weights.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralGraph {
    n: usize,
    adjacency: Vec<f64>,
}

impl GeneralGraph {
    pub fn new(n: usize, adjacency: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "graph needs at least one node".into(),
            ));
        }
        if adjacency.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                actual: adjacency.len(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                let w = adjacency[i * n + j];
                if !w.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                if w < 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "negative weight {w} at ({i}, {j})"
                    )));
                }
                if w != adjacency[j * n + i] {
                    return Err(Error::InvalidArgument(format!(
                        "adjacency not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { n, adjacency })
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.adjacency[i * self.n + j]
    }

    pub fn self_loop(&self, i: usize) -> f64 {
        self.weight(i, i)
    }
}

/// Dense generalized Laplacian `ℒ = D − W + diag(W)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedLaplacian(DenseSymmetric);

impl GeneralizedLaplacian {
    pub fn matrix(&self) -> &DenseSymmetric {
        &self.0
    }
}

impl AsRef<DenseSymmetric> for GeneralizedLaplacian {
    fn as_ref(&self) -> &DenseSymmetric {
        &self.0
    }
}

pub fn generalized_laplacian(graph: &GeneralGraph) -> GeneralizedLaplacian {
    let n = graph.n_nodes();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        // D_ii counts the self-loop once; adding diag(W) back after
        // subtracting W leaves it on the diagonal.
        let degree: f64 = (0..n).map(|j| graph.weight(i, j)).sum();
        for j in 0..n {
            data[i * n + j] = if i == j { degree } else { -graph.weight(i, j) };
        }
    }
    GeneralizedLaplacian(DenseSymmetric::new(n, data).expect("square by construction"))
}

/// Splits `graph` into the sub-graphs induced by `blocks`. Edges between
/// blocks are removed together with their degree contribution; self-loops
/// stay with their node.
pub fn partition_induced(graph: &GeneralGraph, blocks: &[Vec<usize>]) -> Result<Vec<GeneralGraph>> {
    let n = graph.n_nodes();
    let mut seen = vec![false; n];
    for block in blocks {
        if block.is_empty() {
            return Err(Error::InvalidPartition("empty block".into()));
        }
        for &v in block {
            if v >= n {
                return Err(Error::InvalidPartition(format!("node {v} out of range")));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidPartition(format!("node {v} appears twice")));
            }
        }
    }
    if let Some(v) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidPartition(format!("node {v} not covered")));
    }
    blocks
        .iter()
        .map(|block| {
            let m = block.len();
            let mut adjacency = Vec::with_capacity(m * m);
            for &i in block {
                for &j in block {
                    adjacency.push(graph.weight(i, j));
                }
            }
            GeneralGraph::new(m, adjacency)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{gct_lower_bound, lambda_min_dense};
    use approx::assert_abs_diff_eq;

    #[test]
    fn distance_examples() {
        assert_eq!(feature_distance(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(feature_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(
            feature_distance(&[1.0, 0.0], &[2.0, 0.0]).unwrap(),
            2.0 / 3.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn distance_rejects_zero_norm() {
        assert!(feature_distance(&[0.0, 0.0], &[1.0, 0.0]).is_err());
        assert!(feature_distance(&[1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn distance_above_one_clamps_to_zero_weight() {
        // Parallel rows of very different norm: δ = 2·9/11 > 1.
        let f = FeatureMatrix::from_rows(&[vec![1.0, 0.0], vec![10.0, 0.0]]).unwrap();
        assert_abs_diff_eq!(
            feature_distance(f.row(0), f.row(1)).unwrap(),
            18.0 / 11.0,
            epsilon = 1e-15
        );
        assert_eq!(build_spg(&f).unwrap().weights(), &[0.0]);
    }

    #[test]
    fn antiparallel_rows_have_zero_distance() {
        // f − cosθ·g vanishes for cosθ = −1 and equal norms.
        assert_eq!(feature_distance(&[1.0, 0.0], &[-1.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn spg_examples() {
        let same = FeatureMatrix::from_rows(&[vec![0.3, 0.4], vec![0.3, 0.4]]).unwrap();
        assert_abs_diff_eq!(build_spg(&same).unwrap().weights()[0], 1.0, epsilon = 1e-15);

        let orth = FeatureMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(build_spg(&orth).unwrap().weights(), &[0.0]);

        let one = FeatureMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let g = build_spg(&one).unwrap();
        assert!(g.weights().is_empty());
        assert_eq!(g.n_nodes(), 1);
    }

    #[test]
    fn feature_matrix_invariants() {
        assert!(matches!(
            FeatureMatrix::from_rows(&[vec![1.0], vec![0.0]]),
            Err(Error::ZeroNorm { row: 1 })
        ));
        assert!(matches!(
            FeatureMatrix::from_rows(&[vec![1.0, f64::NAN]]),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
        assert!(FeatureMatrix::new(0, 3, vec![]).is_err());
        assert!(FeatureMatrix::new(1, 3, vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn laplacian_examples() {
        let l = path_laplacian(&PathGraph::from_weights(vec![0.5, 0.5, 0.5]).unwrap());
        assert_eq!(l.diag(), &[0.5, 1.0, 1.0, 0.5]);
        assert_eq!(l.offdiag(), &[-0.5, -0.5, -0.5]);

        let l = path_laplacian(&PathGraph::from_weights(vec![1.0]).unwrap());
        assert_eq!(l.diag(), &[1.0, 1.0]);
        assert_eq!(l.offdiag(), &[-1.0]);

        let l = path_laplacian(&PathGraph::from_weights(vec![0.0]).unwrap());
        assert_eq!(l.diag(), &[0.0, 0.0]);
        assert_eq!(l.offdiag(), &[-0.0]);
    }

    #[test]
    fn path_rejects_bad_weights() {
        assert!(PathGraph::from_weights(vec![1.5]).is_err());
        assert!(PathGraph::from_weights(vec![-0.1]).is_err());
        assert!(PathGraph::from_weights(vec![f64::NAN]).is_err());
    }

    #[test]
    fn generalized_laplacian_examples() {
        let g = GeneralGraph::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(
            generalized_laplacian(&g).matrix().data(),
            &[1.0, -1.0, -1.0, 1.0]
        );

        let g = GeneralGraph::new(1, vec![0.3]).unwrap();
        assert_eq!(generalized_laplacian(&g).matrix().data(), &[0.3]);

        let g = GeneralGraph::new(2, vec![0.2, 0.5, 0.5, 0.0]).unwrap();
        let l = generalized_laplacian(&g);
        assert_abs_diff_eq!(l.matrix().get(0, 0), 0.7, epsilon = 1e-15);
        assert_eq!(l.matrix().get(0, 1), -0.5);
        assert_eq!(l.matrix().get(1, 0), -0.5);
        assert_eq!(l.matrix().get(1, 1), 0.5);
    }

    #[test]
    fn general_graph_validation() {
        assert!(GeneralGraph::new(2, vec![0.0, 1.0, 0.5, 0.0]).is_err());
        assert!(GeneralGraph::new(2, vec![0.0, -1.0, -1.0, 0.0]).is_err());
        assert!(GeneralGraph::new(2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn partition_examples() {
        let w = [0.2, 0.7, 0.4];
        let mut adj = vec![0.0; 16];
        for (i, &x) in w.iter().enumerate() {
            adj[i * 4 + i + 1] = x;
            adj[(i + 1) * 4 + i] = x;
        }
        let g = GeneralGraph::new(4, adj).unwrap();
        let parts = partition_induced(&g, &[vec![0, 1, 2], vec![3]]).unwrap();
        assert_eq!(parts[0].weight(0, 1), 0.2);
        assert_eq!(parts[0].weight(1, 2), 0.7);
        assert_eq!(parts[1].n_nodes(), 1);
        assert_eq!(parts[1].weight(0, 0), 0.0);

        let whole = partition_induced(&g, &[vec![0, 1, 2, 3]]).unwrap();
        assert_eq!(whole[0], g);

        assert!(partition_induced(&g, &[vec![0, 1], vec![1, 2, 3]]).is_err());
        assert!(partition_induced(&g, &[vec![0, 1], vec![2]]).is_err());
        assert!(partition_induced(&g, &[vec![0, 1, 2, 3, 4]]).is_err());
    }

    #[test]
    fn triangle_partition_keeps_bound() {
        let g = GeneralGraph::new(3, vec![0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0]).unwrap();
        let parts = partition_induced(&g, &[vec![0, 1], vec![2]]).unwrap();
        let whole = gct_lower_bound(generalized_laplacian(&g).matrix());
        let min_part = parts
            .iter()
            .map(|p| gct_lower_bound(generalized_laplacian(p).matrix()))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(min_part, whole);
        let lam = lambda_min_dense(generalized_laplacian(&g).matrix(), 1e-12).unwrap();
        assert!(min_part <= lam + 1e-8);
    }

    #[test]
    fn glr_matches_quadratic_form() {
        let g = PathGraph::from_weights(vec![0.5, 1.0]).unwrap();
        let x = [1.0, 3.0, 0.0];
        let lx = path_laplacian(&g).matrix().mul_vec(&x);
        let quad: f64 = x.iter().zip(&lx).map(|(a, b)| a * b).sum();
        assert_abs_diff_eq!(g.glr(&x), quad, epsilon = 1e-12);
        assert_abs_diff_eq!(g.glr(&x), 0.5 * 4.0 + 9.0, epsilon = 1e-12);
    }
}
