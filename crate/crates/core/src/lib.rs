//! Geodesic ray transforms for isotropic elastic media.
//!
//! An isotropic elastic medium is described by Lamé parameters λ, μ and a
//! density ρ. Compressional (P) and shear (S) waves propagate with speeds
//! c_P = √((λ+2μ)/ρ) and c_S = √(μ/ρ), and their high-frequency ray paths are
//! the geodesics of the conformal metrics g = c⁻² g_E. This crate provides
//!
//! * closed-form medium models with exact derivatives ([`medium`]),
//! * geodesic tracing, spreading Jacobians, and convexity checks for the
//!   conformal metrics ([`geometry`]),
//! * parallel transport of polarization vectors and the amplitude /
//!   transport-scalar laws along rays ([`transport`]),
//! * the symmetric 2-tensors M and Sym(N) driving those laws, and the
//!   linearization of Sym(N) in f = log√ρ − log√ρ₀ ([`tensors`]),
//! * longitudinal and transverse geodesic ray transforms ([`transforms`]),
//! * a regularized least-squares inversion of the linearized transverse
//!   transform recovering the density on a lattice ([`inversion`]).
//!
//! All geometry is Cartesian in ℝ³; domains are closed balls. Arc length in
//! g equals travel time, so every path is parametrized by travel time s.

pub mod geometry;
pub mod inversion;
pub mod linalg;
pub mod medium;
pub mod numdiff;
pub mod tensors;
pub mod transforms;
pub mod transport;


pub use geometry::{ConformalMetric, GeodesicPath};
pub use medium::{Domain, MediumModel, WaveMode};
pub use tensors::SymTensorField;

