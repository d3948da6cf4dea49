//! Numerical toolkit for anti-compatible almost complex structures on the
//! standard contact R^5: horizontal form algebra, a fixed-point elliptic
//! solver for J-invariant Legendrian disks, and foliations by disk stacks.

pub mod acs;
pub mod banded;
pub mod chart;
pub mod contact;
pub mod elliptic;
pub mod error;
pub mod foliation;
pub mod forms;
pub mod grid;
pub mod lift;
pub mod psi;
pub mod report;
pub mod sampling;
pub mod scenarios;
pub mod solver;

pub use acs::{ACSField, Coeffs, JField, ScalarField5};
pub use chart::PlaneChart;
pub use contact::{ContactParams, HVec, Point5, Vec5};
pub use elliptic::EllipticOperator;
pub use error::{Error, Result};
pub use forms::{Form2H, JMatrix};
pub use grid::{GridFunction, GridSpec};
pub use lift::LegendrianPatch;
pub use solver::{AdaptedChart, DiskSolution, SolverConfig};

