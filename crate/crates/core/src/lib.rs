//! Numerical geometry of Legendrian surfaces in the round contact 5-sphere.
//!
//! The crate is organised bottom-up: [`contact`] holds the ambient contact
//! metric structure, [`immersions`] the catalog surfaces and grid
//! resampling, [`extrinsic`] the pointwise second fundamental form,
//! [`grid_ops`] the global operators and integral identities on periodic
//! grids, and [`flow`] a Legendrian area descent. [`cli`] wires these into
//! the `leglab` binary.

pub mod cli;
pub mod contact;
pub mod convergence;
pub mod dual;
pub mod error;
pub mod extrinsic;
pub mod flow;
pub mod grid;
pub mod grid_ops;
pub mod immersions;
pub mod report;
pub mod verification;
pub mod vec6;

pub use error::{Error, Result};
