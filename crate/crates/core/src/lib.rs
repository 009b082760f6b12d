//! Convex integration toolkit for the ε-isometric relation in codimension one.
//!
//! The crate is organised bottom-up:
//!
//! - [`jets`]: 1-jets, pullback metrics, slices of the (ε-)isometric relation
//!   and the subsolution predicate.
//! - [`pattern`]: the piecewise-linear loop pattern, its exact average and its
//!   exact periodic primitive.
//! - [`surrounding`]: the surrounding loop family built from a jet and a target
//!   average, together with its normalising and base-point homotopies.
//! - [`corrugation`]: the Corrugation Process operator, both through quadrature
//!   and through the closed-form pattern primitive.
//! - [`cone`]: desingularisation of a cone into a surface ε-isometric to a flat
//!   cylinder.
//! - [`mesh`], [`sweep`], [`verify`]: mesh export, N-sweeps and the property
//!   checks driven by the `kuiper` command-line tool.

// comparisons are written so that NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cone;
pub mod corrugation;
mod error;
pub mod exec;
pub mod grid;
pub mod jets;
pub mod mesh;
pub mod pattern;
pub mod quadrature;
pub mod surrounding;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};

/// Vector of the Euclidean target space.
pub type Vec3 = nalgebra::Vector3<f64>;
/// Vector of the two-dimensional domain.
pub type Vec2 = nalgebra::Vector2<f64>;
/// Symmetric bilinear form on the domain, in the coordinates `(x1, x2)`.
pub type Mat2 = nalgebra::Matrix2<f64>;
/// Linear map from the domain to the target; column `j` is the image of `∂_j`.
pub type LinearMap = nalgebra::Matrix3x2<f64>;
