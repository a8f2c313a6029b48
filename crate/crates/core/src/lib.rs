//! Boundary-driven elastic exclusion and its zero-range picture.
//!
//! This crate holds the allocation-only core of the laboratory:
//!
//! * [`lattice`] and [`measure`]: the staggered lattice `A_N`, configurations,
//!   empirical measures, mollifiers and the cosine-family metric.
//! * [`zero_range`]: exact event-driven simulation of the zero-range process
//!   with the simultaneous drift map, and its ρ-projection.
//! * [`exclusion`]: direct simulation of the elastic exclusion process, where a
//!   block-edge particle hops at a rate proportional to the block length.
//! * [`isomorphism`]: the space-removing maps between the two pictures and the
//!   exact integer generator-conjugacy check.
//! * [`stefan`] and [`elastic`]: reference solvers for the one-phase Stefan
//!   problem (boundary immobilization) and the fixed-domain nonlinear diffusion
//!   `z_t = (z_y / (1 - z)^2)_y`, plus the transforms between them.
//! * [`spectral`]: discrete cosine/sine machinery, difference operators and the
//!   H₋₁-type functionals.
//!
//! Everything is `no_std` with `alloc`; IO, the CLI and experiment orchestration
//! live in the `elex` crate.

#![no_std]

extern crate alloc;

pub mod elastic;
pub mod exclusion;
mod fenwick;
pub mod isomorphism;
pub mod lattice;
pub mod linalg;
pub mod measure;
pub mod profile;
pub mod quadrature;
pub mod rng;
pub mod spectral;
pub mod stefan;
pub mod testfn;
pub mod zero_range;

pub use elastic::{solve_z, ZParams, ZSolution};
pub use exclusion::{ExclusionConfiguration, ExclusionState};
pub use lattice::{rho, Configuration, LatticeError, LatticeParams};
pub use measure::{measure_distance, mollify_line, mollify_torus, EmpiricalMeasure, GridDensity, Measure};
pub use stefan::{solve_stefan, StefanParams, StefanSolution};
pub use testfn::{CosineMode, TestFunction};
pub use zero_range::{sample_initial, ZeroRangeState};
