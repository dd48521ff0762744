// NaN must fail the `!(x < y)` style guards.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod characteristics;
pub mod csvio;
pub mod diagnostics;
pub mod ep;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod ks;
pub mod ks_map;
pub mod params;
mod phi;
pub mod spectral;
pub mod spectrum;
pub mod state;
