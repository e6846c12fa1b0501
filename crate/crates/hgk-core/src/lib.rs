//! Graph kernels for attributed graphs via randomized attribute hashing.
//!
//! Continuous node attributes are mapped to discrete labels with 2-stable
//! LSH functions; a discrete base kernel (Weisfeiler-Lehman subtree or
//! shortest-path) is then evaluated through explicit sparse feature maps.
//! Averaging over independent hashing iterations yields a positive
//! semidefinite kernel that approximates the corresponding implicit kernel
//! on the raw attributes.
//!
//! The crate also ships brute-force implicit kernels ([`oracles`]) used as
//! ground truth at small scale, a synthetic benchmark generator
//! ([`datagen`]), and a cross-validated linear-SVM harness ([`eval`]).

pub mod datagen;
pub mod eval;
pub mod features;
pub mod graph;
pub mod hashing;
pub mod hgk;
pub mod oracles;

mod error;

pub use error::{Error, Result};
pub use features::{dot, FeatureKey, FeatureVector};
pub use graph::{AttributedGraph, GraphCollection};
pub use hashing::{HashMode, SeedSpec, StableHashFunction};
pub use hgk::{BaseKernel, GramMatrix, HgkConfig, LabelMode};
