//! Exact symbolic engine for osp(2|2)-modules of weighted densities on the
//! superline R^{1|2}.
//!
//! The crate is layered bottom-up:
//! - [`grassmann`]: polynomial superfunctions and the derivations on them,
//! - [`contact`]: the Poisson bracket and the osp(2|2) basis,
//! - [`operators`]: differential operators between density spaces,
//! - [`cohomology`]: cochains, coboundaries, cup products and the coboundary solver,
//! - [`catalog`]: the explicit 1-cocycles and their cup products,
//! - [`deformation`]: infinitesimal deformations, obstructions and flatness checks.

pub mod catalog;
pub mod cohomology;
pub mod contact;
pub mod deformation;
pub mod grassmann;
pub mod linalg;
pub mod operators;
pub mod rational;
pub mod report;
