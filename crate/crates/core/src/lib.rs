//! Computational coarse geometry on graphs and pseudogroup orbits.
//!
//! Infinite spaces are explored through neighbour oracles and every claim
//! is checked on a finite [`metric::Window`]. Constructions return the
//! constants they promise together with an independently computed
//! [`report::Report`].

#![allow(clippy::type_complexity)]

pub mod amenability;
pub mod asdim;
pub mod cqi;
pub mod ends;
pub mod error;
pub mod growth;
pub mod metric;
mod pairs;
pub mod pseudogroup;
pub mod report;
pub mod spaces;

pub use error::{Error, Result};
pub use metric::{ball, lambda_bound, penumbra, r_boundary, Distance, Space, SpaceKind, Window};
