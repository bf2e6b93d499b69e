//! Gershgorin disc alignment sampling on a path graph.
//!
//! For a candidate sample `k` on a segment, the disc of `k` is shifted right
//! by one (the sample) and its radius is scaled so the left-end sits exactly
//! at the threshold `T`. Scaling row `k` divides the neighbouring rows'
//! entries by `s_k`, shrinking their radii; if a neighbour's left-end then
//! clears `T` it is aligned in turn, and the cascade continues outwards.
//!
//! The left cascade must reach the start of the segment, otherwise the
//! candidate is infeasible. The right cascade runs until a disc no longer
//! clears `T`; the last aligned node is the coverage `d`. The chosen sample
//! is the feasible candidate with the furthest coverage, and nodes `0..=d`
//! become one sub-graph. Repeating on the remaining suffix partitions the
//! whole path.
//!
//! Every sub-graph `q` then satisfies `λ_min(B^q) ≥ T` by the Gershgorin
//! bound of `S·B^q·S⁻¹`, and since the dropped cut edges only add PSD terms,
//! `λ_min(diag(a) + μL) ≥ T` for the full path.

use crate::error::{Error, Result};
use crate::graph::{PathGraph, Segment};

/// Parameters for threshold-mode sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerParams {
    mu: f64,
    threshold: f64,
    tolerance: f64,
    radius_fault: f64,
}

impl SamplerParams {
    pub fn new(mu: f64, threshold: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "mu must be positive, got {mu}"
            )));
        }
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "threshold must lie in (0, 1), got {threshold}"
            )));
        }
        Ok(Self {
            mu,
            threshold,
            tolerance: 0.0,
            radius_fault: 1.0,
        })
    }

    /// Slack allowed when testing a disc left-end against the threshold.
    pub fn with_tolerance(mut self, tolerance: f64) -> Result<Self> {
        if !(tolerance >= 0.0 && tolerance.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be nonnegative, got {tolerance}"
            )));
        }
        self.tolerance = tolerance;
        Ok(self)
    }

    /// Multiplies every propagated neighbour radius term by `factor`.
    /// Only for exercising the verification harness; `1.0` is correct.
    #[doc(hidden)]
    pub fn with_radius_fault(mut self, factor: f64) -> Self {
        self.radius_fault = factor;
        self
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    #[inline]
    fn clears(&self, left_end: f64) -> bool {
        left_end >= self.threshold - self.tolerance
    }
}

/// Scalar `s` that puts the left-end of a disc with center `c` and radius
/// `r` at `T`: `c − s·r = T`. A disc with zero radius keeps `s = 1`.
pub fn align_scalar(center: f64, radius: f64, threshold: f64) -> Result<f64> {
    let infeasible = || Error::Infeasible {
        center,
        radius,
        threshold,
    };
    if radius > 0.0 {
        if center <= threshold {
            return Err(infeasible());
        }
        Ok((center - threshold) / radius)
    } else if center >= threshold {
        Ok(1.0)
    } else {
        Err(infeasible())
    }
}

/// Outcome of one disc-alignment cascade.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageResult {
    pub feasible: bool,
    /// Last covered node (segment-local). Equals the candidate when infeasible.
    pub last: usize,
    /// Longest one-sided cascade, in discs visited.
    pub depth: usize,
    /// Scalars for nodes `0..=last`; empty when infeasible.
    pub scalars: Vec<f64>,
}

impl CoverageResult {
    fn infeasible(k: usize, depth: usize) -> Self {
        Self {
            feasible: false,
            last: k,
            depth,
            scalars: Vec::new(),
        }
    }
}

/// Runs the alignment cascade for sample `k` on `segment`, whose Laplacian is
/// that of the segment alone (edges leaving it are ignored).
pub fn disc_align_coverage(
    segment: Segment<'_>,
    k: usize,
    params: &SamplerParams,
) -> CoverageResult {
    let n = segment.len();
    assert!(k < n, "candidate {k} outside segment of length {n}");
    let mu = params.mu;
    let t = params.threshold;
    let fault = params.radius_fault;

    let center = |i: usize| mu * segment.degree(i);

    let c_k = 1.0 + center(k);
    let r_k = mu * segment.degree(k);
    let s_k = match align_scalar(c_k, r_k, t) {
        Ok(s) => s,
        Err(_) => return CoverageResult::infeasible(k, 0),
    };
    let mut scalars = vec![1.0; k + 1];
    scalars[k] = s_k;

    // Leftward: node i sees its right neighbour scaled by 1/s_{i+1}; its left
    // neighbour is still unscaled.
    let mut s_right = s_k;
    for i in (0..k).rev() {
        let c = center(i);
        let r = fault * mu * segment.edge(i) / s_right + mu * segment.left_edge(i);
        if !params.clears(c - r) {
            return CoverageResult::infeasible(k, k - i);
        }
        let s = align_scalar(c, r, t).unwrap_or(1.0);
        scalars[i] = s;
        s_right = s;
    }

    let mut last = k;
    let mut s_left = s_k;
    for i in k + 1..n {
        let c = center(i);
        let r = fault * mu * segment.left_edge(i) / s_left + mu * segment.edge(i);
        if !params.clears(c - r) {
            break;
        }
        let s = align_scalar(c, r, t).unwrap_or(1.0);
        scalars.push(s);
        s_left = s;
        last = i;
    }
    CoverageResult {
        feasible: true,
        last,
        depth: k.max(last - k),
        scalars,
    }
}

/// Picks the sample covering the longest prefix of `segment`.
///
/// Candidates are tried from the first node and the scan stops at the first
/// one whose leftward cascade fails. Ties go to the smallest candidate. The
/// first node is always feasible.
pub fn choose_sample(segment: Segment<'_>, params: &SamplerParams) -> (usize, CoverageResult) {
    let n = segment.len();
    let mut best: Option<(usize, CoverageResult)> = None;
    for k in 0..n {
        let cov = disc_align_coverage(segment, k, params);
        if !cov.feasible {
            break;
        }
        let better = best.as_ref().is_none_or(|(_, b)| cov.last > b.last);
        if better {
            let done = cov.last + 1 == n;
            best = Some((k, cov));
            if done {
                break;
            }
        }
    }
    best.expect("first candidate is always feasible")
}

/// Inclusive range of path nodes forming one sub-graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Span {
    pub first: usize,
    pub last: usize,
}

impl Span {
    pub fn len(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: usize) -> bool {
        (self.first..=self.last).contains(&i)
    }
}

/// Sampling outcome over a whole path.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    /// Sampled nodes, ascending, one per sub-graph.
    pub samples: Vec<usize>,
    pub subgraphs: Vec<Span>,
    /// Binary selection vector `a`.
    pub selection: Vec<bool>,
    /// Alignment scalars per node, from each sub-graph's winning cascade.
    pub scalars: Vec<f64>,
    /// Threshold the selection was computed at; `None` when every node was
    /// selected without sampling.
    pub threshold: Option<f64>,
    pub budget_infeasible: bool,
    /// Largest cascade depth seen.
    pub max_depth: usize,
    /// Threshold probes made by the budget search.
    pub probes: usize,
}

impl SelectionResult {
    pub fn count(&self) -> usize {
        self.samples.len()
    }

    fn all_nodes(n: usize) -> Self {
        Self {
            samples: (0..n).collect(),
            subgraphs: (0..n).map(|i| Span { first: i, last: i }).collect(),
            selection: vec![true; n],
            scalars: vec![1.0; n],
            threshold: None,
            budget_infeasible: false,
            max_depth: 0,
            probes: 0,
        }
    }
}

/// Greedily partitions `graph` into sub-graphs, each certified by one sample
/// at threshold `params.threshold()`.
pub fn partition_sample(graph: &PathGraph, params: &SamplerParams) -> SelectionResult {
    let n = graph.n_nodes();
    let mut samples = Vec::new();
    let mut subgraphs = Vec::new();
    let mut selection = vec![false; n];
    let mut scalars = vec![1.0; n];
    let mut max_depth = 0;

    let mut start = 0;
    while start < n {
        let segment = graph.segment(start, n - 1);
        let (k, cov) = choose_sample(segment, params);
        let sample = start + k;
        let last = start + cov.last;
        samples.push(sample);
        selection[sample] = true;
        subgraphs.push(Span { first: start, last });
        scalars[start..=last].copy_from_slice(&cov.scalars);
        max_depth = max_depth.max(cov.depth);
        start = last + 1;
    }

    SelectionResult {
        samples,
        subgraphs,
        selection,
        scalars,
        threshold: Some(params.threshold),
        budget_infeasible: false,
        max_depth,
        probes: 0,
    }
}

/// Number of threshold probes the budget search makes for `epsilon`.
pub fn probe_count(epsilon: f64) -> usize {
    let mut width = 1.0;
    let mut probes = 0;
    while width > epsilon {
        width *= 0.5;
        probes += 1;
    }
    probes
}

/// Chooses at most `budget` samples by binary search on the threshold.
///
/// Higher thresholds need more samples. Each probe that fits the budget
/// raises the lower end of the search interval, each probe that does not
/// lowers the upper end; the search stops once the interval is no wider than
/// `epsilon`. Returns the fitting selection with the most samples (highest
/// threshold among ties). When no probe fits, returns the probe with the
/// fewest samples and sets `budget_infeasible`.
pub fn budgeted_sample(
    graph: &PathGraph,
    budget: usize,
    mu: f64,
    epsilon: f64,
) -> Result<SelectionResult> {
    if budget < 1 {
        return Err(Error::InvalidArgument("budget must be at least 1".into()));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "mu must be positive, got {mu}"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let n = graph.n_nodes();
    if budget >= n {
        return Ok(SelectionResult::all_nodes(n));
    }

    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    let mut fitting: Option<SelectionResult> = None;
    let mut fallback: Option<SelectionResult> = None;
    let mut probes = 0;
    while hi - lo > epsilon {
        let t = 0.5 * (lo + hi);
        let params = SamplerParams::new(mu, t)?;
        let result = partition_sample(graph, &params);
        probes += 1;
        if result.count() > budget {
            hi = t;
            let fewer = fallback.as_ref().is_none_or(|f| {
                result.count() < f.count()
                    || (result.count() == f.count() && t > f.threshold.unwrap_or(0.0))
            });
            if fewer {
                fallback = Some(result);
            }
        } else {
            lo = t;
            let more = fitting.as_ref().is_none_or(|f| {
                result.count() > f.count()
                    || (result.count() == f.count() && t > f.threshold.unwrap_or(0.0))
            });
            if more {
                fitting = Some(result);
            }
        }
    }

    let mut out = match (fitting, fallback) {
        (Some(f), _) => f,
        (None, Some(mut f)) => {
            f.budget_infeasible = true;
            f
        }
        (None, None) => unreachable!("epsilon < 1 guarantees at least one probe"),
    };
    out.probes = probes;
    Ok(out)
}
