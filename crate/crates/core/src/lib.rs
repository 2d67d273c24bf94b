//! Subject classification for high-dimensional, small-sample datasets via
//! clustering of variables around latent components.
//!
//! The pipeline: generate (or load) a two-group dataset, cluster its
//! *variables* by correlation distance with Ward linkage, summarize each
//! variable cluster as a resultant vector (the mean of its standardized
//! members), then partition the *subjects* with two-cluster k-means and score
//! the agreement with the known groups. A Monte-Carlo harness sweeps the
//! generator parameters and aggregates the congruence statistics.
//!
//! Module map:
//!
//! * [`datagen`] — seeded synthetic dataset generator (latent factors,
//!   loadings, multiplicative noise).
//! * [`clv`] — correlation distances, Ward dendrogram, tree cuts, resultant
//!   vectors.
//! * [`classify`] — two-cluster k-means with restarts and the congruence
//!   coefficient.
//! * [`stats`] — Mann-Whitney U, Pearson correlation test, one-way ANOVA,
//!   and the special functions backing their p-values.
//! * [`experiment`] — the replicate/grid Monte-Carlo harness and the
//!   descriptive dataset scan.
//! * [`io`] — CSV formats and config files shared by the CLI and harness.

pub mod classify;
pub mod clv;
pub mod datagen;
mod error;
pub mod experiment;
pub mod io;
pub mod seed;
pub mod stats;

pub use error::{Error, Result};
