//! Adiabatic hyperspherical representation of three particles moving in a plane.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] – mass-scaled Jacobi vectors and democratic hyperangles.
//! * [`harmonics`] – closed-form hyperspherical harmonics, symmetry operators
//!   and enumeration of the symmetry-allowed quantum numbers.
//! * [`twobody`] – radial bound states of the `D sech²(r/r0)` pair potential.
//! * [`adiabatic`] – fixed-R hyperangular eigenproblem on a 2D B-spline basis.
//! * [`channels`] – phase alignment, nonadiabatic couplings, effective
//!   potentials and asymptotic channel classification.
//! * [`threshold`] – threshold-law exponents and the WKB tunnelling estimate.
//! * [`run`] – configuration and orchestration used by the `hyper2d` binary.
//!
//! Units throughout: ħ = 1, identical-particle mass m = 1, potential range
//! r0 = 1. Energies are therefore in units of 1/(m r0²).

pub mod adiabatic;
pub mod bspline;
pub mod channels;
pub mod error;
pub mod geometry;
pub mod harmonics;
pub mod linalg;
pub mod quadrature;
pub mod run;
pub mod threshold;
pub mod twobody;

pub use error::{Error, Result};
pub use geometry::{HyperPoint, JacobiPair, MassGeometry};
pub use harmonics::{HarmonicLabel, SymmetryClass, SymmetryOp};
pub use twobody::{BoundState, PairPotential};
