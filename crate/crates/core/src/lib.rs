//! Scan-site planning, route optimization, navigation simulation and
//! registration scoring for multi-scan terrestrial laser scanning of
//! plot-based crop fields.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod cover;
pub mod error;
pub mod field;
pub mod geometry;
pub mod nav;
pub mod pipeline;
pub mod raycast;
pub mod registration;
pub mod routing;
pub mod spatial;
pub mod svg;

pub use config::RunConfig;
pub use error::{Error, Result};

/// Non-blank lines that are not `#` comments, with 1-based line numbers.
pub(crate) fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}
