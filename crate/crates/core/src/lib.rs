//! Splitting Gibbs measures of the Potts-SOS model on Cayley trees.
//!
//! The crate is organised bottom-up:
//!
//! * [`params`] and [`tree`]: model parameters, finite Cayley trees and the
//!   Potts-SOS Hamiltonian on finite configurations.
//! * [`recursion`]: the boundary-law map `F` and field propagation towards
//!   the root.
//! * [`solvers`]: translation-invariant fixed points, two-cycles of the
//!   scalar map `f`, and the full bipartite (even/odd periodic) system.
//! * [`analysis`]: the closed-form k = 2 quadratic, its discriminant, the
//!   threshold `theta_D` and phase-plane scans.
//! * [`exactpoly`]: exact rational polynomial arithmetic used to re-derive
//!   the quadratic independently of floating point.
//! * [`oracle`]: brute-force enumeration of finite-volume measures and the
//!   compatibility check between consecutive volumes.

pub mod analysis;
pub mod error;
pub mod exactpoly;
pub mod oracle;
pub mod params;
pub mod recursion;
pub mod solvers;
pub mod tree;

mod newton;

pub use error::{Error, Result};
pub use params::ModelParams;
pub use recursion::{boundary_map, FieldAssignment, ReducedField};
pub use tree::{FiniteConfig, FiniteTree};
