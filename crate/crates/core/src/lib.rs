//! Coefficients of the characteristic Cross-Newell phase equation for the
//! real Ginzburg-Landau system, spectral solvers for the underlying PDEs and
//! KdV solitary waves of the reduced steady equation.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases below fix the scalar to `f64`, which all quoted tolerances
//! assume.

// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod coeffs;
pub mod error;
pub mod field;
pub mod kdv;
pub mod linalg;
pub mod msys;
pub mod pde;
pub mod regions;
pub mod roll;
pub mod scalar;
pub mod spectral;
pub mod validation;

pub use coeffs::{Branch, ChainVectors, CoeffBundle, FluxData};
pub use error::{CcnError, Result};
pub use msys::{LoopFunction, RglSystem, SystemModel};
pub use roll::{DomainClass, RollState, Wavenumber};
pub use scalar::Real;
pub use spectral::{PeriodicGrid2D, Spectral1D, Spectral2D};

pub type Wavenumber64 = Wavenumber<f64>;
pub type RollState64 = RollState<f64>;
pub type FluxData64 = FluxData<f64>;
pub type ChainVectors64 = ChainVectors<f64>;
pub type CoeffBundle64 = CoeffBundle<f64>;
pub type RglSystem64 = RglSystem<f64>;
pub type LoopFunction64 = LoopFunction<f64>;
pub type PeriodicGrid64 = PeriodicGrid2D<f64>;
