//! Keyframe extraction by graph sampling on a similarity path graph.
//!
//! Frames become nodes of a path graph whose edge weights measure how alike
//! consecutive frames are. Keyframes are chosen so that the coefficient
//! matrix `B = diag(a) + μL` of graph-Laplacian-regularized reconstruction
//! keeps its smallest eigenvalue above a threshold `T`. The sampler certifies
//! this with Gershgorin disc alignment in time roughly linear in the number
//! of frames, and a binary search on `T` meets a keyframe budget.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`graph`] | feature distance, path graph, Laplacians, general graphs |
//! | [`spectral`] | Gershgorin bounds, coefficient matrix, eigenvalue oracles |
//! | [`sampler`] | disc alignment, sample selection, budget search |
//! | [`reconstruct`] | tridiagonal GLR interpolation |
//! | [`eval`] | precision / recall / F1 against user summaries |
//! | [`features_io`] | binary and CSV feature files |
//! | [`verify`] | randomized property suites |

pub mod error;
pub mod eval;
pub mod features_io;
pub mod graph;
pub mod reconstruct;
pub mod sampler;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{build_spg, FeatureMatrix, PathGraph};
pub use sampler::{budgeted_sample, partition_sample, SamplerParams, SelectionResult, Span};
