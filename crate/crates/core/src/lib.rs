//! Traveling diffusive-dispersive shock waves of the dissipative
//! Peregrine system.
//!
//! - [`waveform`]: closed-form equilibria, spectra, regime criterion,
//!   potential and speed-amplitude relations.
//! - [`profile`] and [`shape`]: the heteroclinic front computed with
//!   [`radau`], its shape diagnostics and consistency checks.
//! - [`pde`]: method-of-lines evolution and the shallow-water reference.
//! - [`config`], [`io`], [`overlay`] and [`cli`]: the command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod overlay;
pub mod pde;
pub mod profile;
pub mod radau;
pub mod shape;
pub mod waveform;

pub use error::{Error, Result};
