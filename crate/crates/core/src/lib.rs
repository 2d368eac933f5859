//! Spectra of the relative motion of two electrons in a circular quantum dot
//! in a magnetic field, from three independent routes:
//!
//! * [`wkb`]: Fock–Darwin closed form and Langer-corrected WKB levels,
//! * [`hk`]: Herman–Kluk semiclassical autocorrelation over classical
//!   trajectories from [`dynamics`],
//! * [`qmref`]: Crank–Nicolson propagation on a grid.
//!
//! Autocorrelations become spectra in [`spectral`]; [`cli`] ties the pieces
//! to JSON-configured runs.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod hk;
pub mod model;
pub mod qmref;
pub mod series;
pub mod spectral;
pub mod wkb;

pub use error::{Error, Result};
