//! Two-phase segmentation of images corrupted by multiplicative Gamma speckle.
//!
//! The model couples an I-divergence data term with an edge-weighted total
//! variation regularizer. Three solvers minimize it:
//!
//! - [`solvers::solve_levelset`]: explicit gradient flow of the smoothed
//!   level-set energy,
//! - [`solvers::solve_go`]: split Bregman on the convex relaxation,
//! - [`solvers::solve_fpa`]: a relaxed proximal fixed-point iteration on the
//!   same relaxation, with no linear solve at all.
//!
//! The supporting modules provide finite-difference operators ([`grid`]),
//! speckle and scene synthesis ([`speckle`]), the ISEF edge map ([`edge`]),
//! the model terms ([`energy`]), evaluation ([`metrics`]) and netpbm I/O
//! ([`pnm`]).

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod edge;
pub mod energy;
mod error;
mod field;
pub mod grid;
pub mod metrics;
pub mod pnm;
pub mod solvers;
pub mod speckle;

pub use error::{Error, Result};
pub use field::{Connectivity, IntensityImage, ScalarField, SegmentationMask};
