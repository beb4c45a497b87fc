//! Lagrangian particle level-set toolkit.
//!
//! The crate is organised bottom-up:
//!
//! * [`spatial`] uniform cell lists for fixed-radius and nearest-point queries,
//! * [`polyreg`] total-degree polynomial regression in a Newton-Lagrange
//!   ("minter") basis on Chebyshev-Lobatto nodes, or in a monomial basis,
//! * [`levelset`] particle containers, analytic test shapes with reference
//!   signed distance functions, advection and error utilities,
//! * [`pcp`] particle closest-point redistancing and surface quantities,
//! * [`remesh`] particle-to-mesh interpolation baselines,
//! * [`sph`] a weakly compressible two-phase SPH solver with continuum
//!   surface force from either PCP geometry or a colorfield.
//!
//! Everything here is `no_std` (with `alloc`); IO, configuration and the
//! command line live in the companion `pcp-bench` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

mod error;
pub mod geom;
pub mod levelset;
pub mod linalg;
mod par;
pub mod pcp;
pub mod polyreg;
pub mod remesh;
pub mod spatial;
pub mod sph;

pub use error::{Error, Result};
pub use geom::{Domain, Vector};
