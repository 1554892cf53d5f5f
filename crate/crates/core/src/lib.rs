//! Self-similar regularizations of the Riemann problem for strictly
//! hyperbolic systems `u_t + A(u) u_x = 0`.
//!
//! The crate computes viscous profiles `eps (B(u) u')' = (A(u) - y) u'` in
//! the similarity variable `y = x / t`, their relaxation and half-space
//! analogues, and the characteristic machinery built on top of them: wave
//! decompositions, linearized wave measures, interaction coefficients and
//! viscous wave curves.

pub mod analysis;
pub mod bvp;
pub mod error;
pub mod geneig;
pub mod linalg;
pub mod models;
pub mod system;
pub mod wavecurve;

pub use error::{Error, Result};
pub use system::State;
