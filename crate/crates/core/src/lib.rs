//! Discrete energies, quadrature quality and jittered sampling on the unit
//! sphere S^d.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`] – log-gamma, Pochhammer symbols, Jacobi and normalized
//!   Legendre polynomials, and the Jacobi expansion of the Riesz kernel.
//! * [`quad`] – one-dimensional quadrature rules used for energy integrals.
//! * [`geometry`] – point sets, chordal distances and spherical caps.
//! * [`partition`] – recursive zonal equal-area partitions and exact uniform
//!   sampling inside a cell.
//! * [`pointsets`] – generators, fixtures, file I/O, separation and a local
//!   Riesz energy minimizer.
//! * [`energy`] – Riesz and kernel energies, the energy integral `V_d(s)` and
//!   the truncated expansions `h_t`, `r_t`.
//! * [`quality`] – design defects and worst-case errors in Sobolev-type spaces.
//! * [`experiments`] – seeded sweeps, jittered expectations and power-law fits.

pub mod energy;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod partition;
pub mod pointsets;
pub mod quad;
pub mod quality;
pub mod specfun;
pub mod sum;

pub use error::{Error, Result};
pub use geometry::PointSet;
