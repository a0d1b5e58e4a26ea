//! Far field splitting and data completion for well-separated 2-D Helmholtz
//! sources.
//!
//! The crate synthesizes far fields radiated by sources supported in disjoint
//! balls, splits a measured far field into its per-source components (least
//! squares Galerkin projection or weighted basis pursuit), restores missing
//! angular segments, and evaluates the stability and conditioning bounds that
//! certify those reconstructions.

pub mod bessel;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod farfield;
pub mod picard;
pub mod split_l1;
pub mod split_ls;
pub mod synth;

pub use error::{Error, Result};
