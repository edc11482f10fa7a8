//! critlab: a chart-based numerical differential-geometry workbench.
//!
//! Evaluates curvature tensors, quadratic curvature functionals and their
//! Euler-Lagrange tensors, second-variation (Jacobi) operators, ALE/AF mass
//! integrals, and connected-sum gluing coupling constants on a catalog of
//! closed-form metrics, and cross-checks every identity against independent
//! oracles (finite differences of quadrature functionals, topology, and
//! closed-form reference values).

pub mod catalog;
pub mod curvature;
pub mod error;
pub mod jet;
pub mod quadrature;
pub mod tensor;

pub use error::{CritError, Result};
