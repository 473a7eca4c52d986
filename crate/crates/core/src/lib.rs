//! Gradient-orientation densities of 2D point-set distance transforms.
//!
//! The distance transform `S(X) = min_k |X - Y_k|` has unit-length gradients almost
//! everywhere, so its gradient density lives on orientations alone. This crate
//! computes that density three ways:
//!
//! * in closed form from the Voronoi cells of the sites ([`density::closed_form_histogram`]),
//! * by Monte-Carlo sampling of the domain ([`density::monte_carlo_histogram`]),
//! * from the power spectrum of the wave field `exp(iS/tau)`, integrated over an annulus
//!   around the unit circle in frequency space ([`spectrum::Spectrum::orientation_histogram`]).
//!
//! As `tau` shrinks the spectral estimate approaches the closed form; the
//! [`experiments`] module turns that limit into measurable convergence curves.

pub mod density;
pub mod error;
pub mod experiments;
pub mod field;
pub mod geometry;
pub mod spectrum;

pub use error::{Error, Result};
