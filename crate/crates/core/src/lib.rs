//! Inflation hierarchies on finite windows of marked-square tilings.
//!
//! The pipeline: a block substitution generates a repetitive window; each
//! level packs a maximal family of disjoint N x N squares, connects them by
//! arms, classifies the leftover crosses, and inflates every square to a
//! supertile made of the previous level's tiles. On top of the hierarchy sit
//! the boundary graphs with their tree classification and strata, and the
//! Bratteli diagram of the supertile containment structure with its Vershik
//! successor dynamics and frequency measures.

pub mod boundary;
pub mod bratteli;
pub mod decomposition;
pub mod error;
pub mod fixtures;
pub mod geom;
pub mod inflation;
pub mod ratio;
pub mod tiling;
pub mod verify;

pub use error::{Error, Result};
