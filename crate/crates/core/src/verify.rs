//! Randomized property suites behind `spgkf verify`.
//!
//! Each suite draws its own instances from a ChaCha stream seeded by the
//! configured seed and the suite index, so a run is reproducible and suites
//! are independent of each other. A suite stops at its first violation and
//! records the offending instance.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{
    generalized_laplacian, partition_induced, path_laplacian, GeneralGraph, PathGraph,
};
use crate::sampler::{budgeted_sample, disc_align_coverage, partition_sample, SamplerParams};
use crate::spectral::{
    coefficient_matrix, gct_lower_bound, lambda_min_dense, lambda_min_tridiagonal,
    scaled_gct_lower_bound, ScalingVector, ORACLE_TOL,
};

/// Slack on eigenvalue comparisons against the oracles.
pub const EIG_SLACK: f64 = 1e-8;
/// Slack on disc left-end comparisons.
pub const DISC_SLACK: f64 = 1e-9;

const MUS: [f64; 3] = [0.01, 0.1, 1.0];
const THRESHOLDS: [f64; 3] = [0.05, 0.1, 0.3];
const PARTITION_MAX_NODES: usize = 12;
const BRUTE_MAX_NODES: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub trials: usize,
    pub seed: u64,
    pub max_nodes: usize,
    radius_fault: Option<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            trials: 500,
            seed: 0,
            max_nodes: 32,
            radius_fault: None,
        }
    }
}

impl VerifyConfig {
    pub fn new(trials: usize, seed: u64, max_nodes: usize) -> Self {
        Self {
            trials,
            seed,
            max_nodes: max_nodes.max(2),
            radius_fault: None,
        }
    }

    /// Runs the sampler with a deliberately wrong radius propagation factor
    /// so the harness can be seen to catch it.
    #[doc(hidden)]
    pub fn with_radius_fault(mut self, factor: f64) -> Self {
        self.radius_fault = Some(factor);
        self
    }

    fn params(&self, mu: f64, t: f64) -> SamplerParams {
        let p = SamplerParams::new(mu, t).expect("suite parameters are valid");
        match self.radius_fault {
            Some(f) => p.with_radius_fault(f),
            None => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub trial: usize,
    pub message: String,
    pub instance: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checked: usize,
    pub skipped: usize,
    pub note: Option<String>,
    pub violation: Option<Violation>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

fn rng_for(seed: u64, suite: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ suite)
}

/// Weights drawn from (0, 1].
fn random_path(rng: &mut impl Rng, n: usize) -> PathGraph {
    let w = (0..n - 1).map(|_| 1.0 - rng.gen::<f64>()).collect();
    PathGraph::from_weights(w).expect("weights in (0, 1]")
}

fn describe_path(g: &PathGraph, mu: f64, t: Option<f64>) -> String {
    let mut s = format!("n={} mu={mu}", g.n_nodes());
    if let Some(t) = t {
        let _ = write!(s, " T={t}");
    }
    let _ = write!(s, " weights={:?}", g.weights());
    s
}

pub fn run_verify(cfg: &VerifyConfig) -> Vec<SuiteReport> {
    vec![
        gct_soundness(cfg),
        partition_bound(cfg),
        certificate(cfg),
        monotonicity(cfg),
        brute_force(cfg),
    ]
}

fn gct_soundness(cfg: &VerifyConfig) -> SuiteReport {
    let mut rng = rng_for(cfg.seed, 1);
    let mut report = SuiteReport {
        name: "gct-soundness",
        checked: 0,
        skipped: 0,
        note: None,
        violation: None,
    };
    for trial in 0..cfg.trials {
        let n = rng.gen_range(1..=cfg.max_nodes);
        let g = random_path(&mut rng, n);
        let mu = *MUS.choose(&mut rng).unwrap();
        let a: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.3)).collect();
        let b = coefficient_matrix(&a, mu, &path_laplacian(&g)).expect("matching sizes");
        let s: Vec<f64> = (0..n)
            .map(|_| 10f64.powf(rng.gen_range(-1.0..1.0)))
            .collect();
        let s = ScalingVector::new(s).expect("positive");
        let lam = lambda_min_tridiagonal(b.matrix(), ORACLE_TOL).expect("valid tolerance");
        let plain = gct_lower_bound(b.matrix());
        let scaled = scaled_gct_lower_bound(b.matrix(), &s).expect("matching sizes");
        report.checked += 1;
        if plain > lam + EIG_SLACK || scaled > lam + EIG_SLACK {
            report.violation = Some(Violation {
                trial,
                message: format!(
                    "bound exceeds λ_min: plain {plain}, scaled {scaled}, λ_min {lam}"
                ),
                instance: format!(
                    "{} a={a:?} s={:?}",
                    describe_path(&g, mu, None),
                    s.as_slice()
                ),
            });
            break;
        }
    }
    report
}

fn partition_bound(cfg: &VerifyConfig) -> SuiteReport {
    let mut rng = rng_for(cfg.seed, 2);
    let mut report = SuiteReport {
        name: "partition-bound",
        checked: 0,
        skipped: 0,
        note: None,
        violation: None,
    };
    let cap = cfg.max_nodes.min(PARTITION_MAX_NODES);
    for trial in 0..cfg.trials {
        let n = rng.gen_range(1..=cap);
        let mut adj = vec![0.0; n * n];
        for i in 0..n {
            if rng.gen_bool(0.5) {
                adj[i * n + i] = rng.gen::<f64>();
            }
            for j in i + 1..n {
                if rng.gen_bool(0.5) {
                    let w = 1.0 - rng.gen::<f64>();
                    adj[i * n + j] = w;
                    adj[j * n + i] = w;
                }
            }
        }
        let g = GeneralGraph::new(n, adj.clone()).expect("symmetric nonnegative");
        let q = rng.gen_range(1..=n);
        let mut blocks = vec![Vec::new(); q];
        for v in 0..n {
            blocks[rng.gen_range(0..q)].push(v);
        }
        blocks.retain(|b| !b.is_empty());
        let parts = partition_induced(&g, &blocks).expect("valid partition");

        let whole = generalized_laplacian(&g);
        let bound = gct_lower_bound(whole.matrix());
        let min_part = parts
            .iter()
            .map(|p| gct_lower_bound(generalized_laplacian(p).matrix()))
            .fold(f64::INFINITY, f64::min);
        let lam = lambda_min_dense(whole.matrix(), ORACLE_TOL).expect("within cap");
        report.checked += 1;
        if (min_part - bound).abs() > 1e-12 || min_part > lam + EIG_SLACK {
            report.violation = Some(Violation {
                trial,
                message: format!("min_q bound {min_part}, whole bound {bound}, λ_min {lam}"),
                instance: format!("n={n} adjacency={adj:?} blocks={blocks:?}"),
            });
            break;
        }
    }
    report
}

fn certificate(cfg: &VerifyConfig) -> SuiteReport {
    let mut rng = rng_for(cfg.seed, 3);
    let mut report = SuiteReport {
        name: "certificate",
        checked: 0,
        skipped: 0,
        note: None,
        violation: None,
    };
    'trials: for trial in 0..cfg.trials {
        let n = rng.gen_range(2..=cfg.max_nodes);
        let g = random_path(&mut rng, n);
        let mu = *MUS.choose(&mut rng).unwrap();
        let t = *THRESHOLDS.choose(&mut rng).unwrap();
        let result = partition_sample(&g, &cfg.params(mu, t));
        report.checked += 1;
        let fail = |msg: String| Violation {
            trial,
            message: msg,
            instance: format!(
                "{} samples={:?}",
                describe_path(&g, mu, Some(t)),
                result.samples
            ),
        };

        for span in &result.subgraphs {
            let seg = g.segment(span.first, span.last);
            let a: Vec<bool> = (span.first..=span.last)
                .map(|i| result.selection[i])
                .collect();
            let b = coefficient_matrix(&a, mu, &seg.laplacian()).expect("matching sizes");
            let s = ScalingVector::new(result.scalars[span.first..=span.last].to_vec());
            let Ok(s) = s else {
                report.violation = Some(fail(format!("non-positive scalars in {span:?}")));
                break 'trials;
            };
            let disc = scaled_gct_lower_bound(b.matrix(), &s).expect("matching sizes");
            if disc < t - DISC_SLACK {
                report.violation = Some(fail(format!(
                    "sub-graph {}..={} disc left-end {disc} < T",
                    span.first, span.last
                )));
                break 'trials;
            }
        }
        let b = coefficient_matrix(&result.selection, mu, &path_laplacian(&g)).expect("sizes");
        let lam = lambda_min_tridiagonal(b.matrix(), ORACLE_TOL).expect("valid tolerance");
        if lam < t - EIG_SLACK {
            report.violation = Some(fail(format!("λ_min(B) = {lam} < T")));
            break;
        }
    }
    report
}

/// Twenty thresholds evenly spaced over [0.01, 0.9].
pub fn threshold_grid() -> Vec<f64> {
    (0..20).map(|i| 0.01 + i as f64 * (0.89 / 19.0)).collect()
}

fn monotonicity(cfg: &VerifyConfig) -> SuiteReport {
    let mut rng = rng_for(cfg.seed, 4);
    let mut report = SuiteReport {
        name: "monotonicity",
        checked: 0,
        skipped: 0,
        note: None,
        violation: None,
    };
    let grid = threshold_grid();
    for trial in 0..cfg.trials {
        let n = rng.gen_range(2..=cfg.max_nodes);
        let g = random_path(&mut rng, n);
        let mu = *MUS.choose(&mut rng).unwrap();
        let mut prev: Option<(usize, usize)> = None;
        report.checked += 1;
        for &t in &grid {
            let p = cfg.params(mu, t);
            let cover = disc_align_coverage(g.as_segment(), 0, &p).last;
            let count = partition_sample(&g, &p).count();
            if let Some((pc, pn)) = prev {
                if cover > pc || count < pn {
                    report.violation = Some(Violation {
                        trial,
                        message: format!(
                            "at T={t}: coverage {pc} -> {cover}, sample count {pn} -> {count}"
                        ),
                        instance: describe_path(&g, mu, None),
                    });
                    return report;
                }
            }
            prev = Some((cover, count));
        }
    }
    report
}

/// Largest `λ_min(diag(a) + μL)` over all selections of exactly `c` nodes.
pub fn best_selection_lambda(g: &PathGraph, mu: f64, c: usize) -> f64 {
    let n = g.n_nodes();
    let l = path_laplacian(g);
    let mut best = f64::NEG_INFINITY;
    let mut idx: Vec<usize> = (0..c).collect();
    loop {
        let mut a = vec![false; n];
        for &i in &idx {
            a[i] = true;
        }
        let b = coefficient_matrix(&a, mu, &l).expect("sizes");
        best = best.max(lambda_min_tridiagonal(b.matrix(), ORACLE_TOL).expect("tol"));
        // next combination in lexicographic order
        let Some(pos) = (0..c).rev().find(|&p| idx[p] < n - c + p) else {
            break;
        };
        idx[pos] += 1;
        for p in pos + 1..c {
            idx[p] = idx[p - 1] + 1;
        }
    }
    best
}

fn brute_force(cfg: &VerifyConfig) -> SuiteReport {
    let mut rng = rng_for(cfg.seed, 5);
    let mut report = SuiteReport {
        name: "brute-force",
        checked: 0,
        skipped: 0,
        note: None,
        violation: None,
    };
    let cap = cfg.max_nodes.min(BRUTE_MAX_NODES);
    let mut ratios = Vec::new();
    for trial in 0..cfg.trials {
        let n = rng.gen_range(2..=cap);
        let g = random_path(&mut rng, n);
        let mu = *MUS.choose(&mut rng).unwrap();
        let c = rng.gen_range(1..=3.min(n - 1));
        let result = budgeted_sample(&g, c, mu, 1e-7).expect("valid parameters");
        if result.budget_infeasible {
            report.skipped += 1;
            continue;
        }
        let t_used = result.threshold.expect("threshold set below full budget");
        let b = coefficient_matrix(&result.selection, mu, &path_laplacian(&g)).expect("sizes");
        let achieved = lambda_min_tridiagonal(b.matrix(), ORACLE_TOL).expect("tol");
        let optimum = best_selection_lambda(&g, mu, c);
        report.checked += 1;
        if achieved > optimum + EIG_SLACK || achieved < t_used - EIG_SLACK {
            report.violation = Some(Violation {
                trial,
                message: format!("achieved {achieved}, optimum {optimum}, T_used {t_used}"),
                instance: format!(
                    "{} C={c} samples={:?}",
                    describe_path(&g, mu, None),
                    result.samples
                ),
            });
            break;
        }
        if optimum > 0.0 {
            ratios.push(achieved / optimum);
        }
    }
    if !ratios.is_empty() {
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        report.note = Some(format!(
            "λ_min ratio to optimum: mean {mean:.3}, min {min:.3}"
        ));
    }
    report
}
