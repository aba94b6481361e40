//! Random equilateral polygons in confinement.
//!
//! The crate samples the moduli space of closed equilateral polygons in
//! action-angle coordinates, restricts it by diameter, and computes the
//! expected total curvature of confined quadrilaterals by quadrature, along
//! with the boundary measures and the Crofton identity that explain why it
//! decreases as the confinement loosens.

pub mod crofton;
pub mod error;
pub mod geom;
pub mod knotproxy;
pub mod measures;
pub mod moduli;
pub mod par;
pub mod quadrature;
pub mod sampling;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use stats::{Estimate, Method};
