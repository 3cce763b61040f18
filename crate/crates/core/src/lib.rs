//! Granular-ball fuzzy rough sets for noise-robust feature selection.
//!
//! The pipeline is: normalize a [`Dataset`](dataset::Dataset), partition it
//! into granular-balls ([`granular_ball::generate`]), score attribute
//! subsets with the size-weighted ball dependency
//! ([`fuzzy_rough::weighted_dependency`]) and grow a subset greedily
//! ([`feature_selection::forward_select`]). The [`evaluation`] module runs
//! the cross-validated noise experiments against a point-based baseline.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod feature_selection;
pub mod fuzzy_rough;
pub mod granular_ball;
pub mod rng;

pub use error::{Error, Result};
