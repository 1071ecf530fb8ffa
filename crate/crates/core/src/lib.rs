//! Branching random walks on lazily generated infinite graphs.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`]: graph families with canonical vertex addresses and on-demand adjacency.
//! * [`kernel`]: random-walk transition kernels over those graphs.
//! * [`spectral`]: exact return-probability series, spectral radius estimates and
//!   the summability criteria used to decide whether a critical process has
//!   infinitely many ends.
//! * [`brw`]: vertex-aggregated simulation of branching random walks.
//! * [`topology`]: end counting, red/blue intersection experiments, fiber hits and
//!   embedded Galton-Watson processes.
//!
//! Probabilities are carried by the [`weight::Weight`] trait so that the same
//! dynamic programs run in double precision or in exact rational arithmetic.

pub mod brw;
pub mod error;
pub mod graph;
pub mod kernel;
pub mod rng;
pub mod spectral;
pub mod topology;
pub mod weight;

pub use error::{Error, Result};

/// Hash map with a fixed hasher so iteration order is reproducible across runs.
pub type FixedMap<K, V> =
    std::collections::HashMap<K, V, std::hash::BuildHasherDefault<std::collections::hash_map::DefaultHasher>>;
pub use graph::{GraphFamily, SpineEmbedding, TreeWord, VertexAddr};
pub use kernel::{Kernel, KernelSpec, TransitionRow};
pub use weight::{ArithmeticMode, Weight};
