//! Linear network error-correction (LNEC) codes on single-source acyclic
//! networks.
//!
//! The crate covers the full pipeline for the four classes of LNEC codes
//! (multicast, broadcast, dispersion, generic):
//!
//! * [`galois`] — exact arithmetic over GF(p) and GF(2^m), matrix rank and
//!   subspace primitives;
//! * [`network`] — the acyclic network model, min-cut capacities for nodes,
//!   node collections and channel sets, error-pattern ranks, and disjoint
//!   path families;
//! * [`code`] — local/extended encoding kernels, transfer matrices and
//!   decoding views;
//! * [`construct`] — deterministic and randomized code construction for all
//!   four classes, plus field-size bounds;
//! * [`analyze`] — regularity classification, brute-force minimum distances,
//!   Singleton-bound slack, and MDS certification;
//! * [`decode`] — channel simulation and minimum-distance decoding.
//!
//! Everything is exact: no floating point is used anywhere. Brute-force
//! enumerations run in parallel via rayon when the `parallel` feature
//! (enabled by default) is active, and fall back to sequential scans
//! otherwise.

// Index loops over multiple parallel buffers read better than zipped
// iterator chains in the elimination and solver kernels.
#![allow(clippy::needless_range_loop)]

pub mod analyze;
pub mod code;
pub mod construct;
pub mod decode;
mod error;
pub mod exec;
pub mod fixtures;
pub mod galois;
pub mod network;
pub mod rng;

pub use error::{Error, Result};
