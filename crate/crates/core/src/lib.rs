//! Equivariant discrete Morse theory on Vietoris-Rips posets.
//!
//! The crate builds truncated Rips posets of finite metric spaces that carry
//! an isometric permutation-group action, and checks the combinatorial
//! hypotheses that make `VR_t(X)` a finite model for the universal space of
//! proper actions:
//!
//! * [`geometry`]: exact finite metric spaces, comparison triangles, defect
//!   profiling and covering radii.
//! * [`symmetry`]: permutation groups, isometric actions, orbits, stabilizers
//!   and the subgroup lattice.
//! * [`rips`]: the poset of finite subsets filtered by diameter, its order
//!   complex, the flag-complex model and fixed subposets.
//! * [`morse`]: descending links under `(diam, -card)`, level filtrations and
//!   homological descent checks.
//! * [`zeta`]: witness pairs, set-valued midpoints, the link conditions,
//!   conical certificates and threshold arithmetic.
//! * [`homology`]: Betti numbers over GF(2) and the rationals, greedy
//!   collapses and the contractibility-evidence ladder.
//! * [`egcheck`]: the fixed-point audit for every subgroup at a given scale.
//! * [`cli`]: JSON input, batch commands and report assembly.
//!
//! All metric comparisons are exact. Distances are stored as integer
//! numerators over one common positive denominator per space.

pub mod cli;
pub mod complex;
pub mod egcheck;
pub mod exact;
pub mod geometry;
pub mod homology;
pub mod morse;
pub mod pointset;
pub mod rips;
pub mod suites;
pub mod symmetry;
pub mod zeta;

pub use exact::{Rat, Scale};
pub use geometry::FiniteMetricSpace;
pub use pointset::PointSet;

/// Runs `f` on a rayon pool with `jobs` worker threads.
///
/// Every parallel routine in the crate merges its results in canonical order,
/// so the output does not depend on `jobs`.
pub fn with_jobs<R: Send>(jobs: usize, f: impl FnOnce() -> R + Send) -> R {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().expect("failed to build worker pool");
    pool.install(f)
}
