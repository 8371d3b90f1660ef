//! Kac-type N-particle jump processes for a general convex particle energy.
//!
//! The crate is `no_std` (with `alloc`). It contains the numerical core:
//!
//! * [`energy`]: the particle energy φ(v), its inverse and the sphere weight f(y).
//! * [`numerics`]: adaptive quadrature, a monotone root finder and leading-order
//!   saddle-point formulas, all in log domain where overflow is possible.
//! * [`equilibrium`]: the saddle point z₀ and the limit density C·e^{−z₀φ(v)},
//!   the asymptotics of the microcanonical volume and a brute-force oracle.
//! * [`kacwalk`]: the collision map and the continuous-time walk on the energy
//!   manifold Σφ(vᵢ) = N.
//! * [`meanfield`]: a pairwise stochastic particle solver for the limit equation.
//! * [`chaos`]: empirical marginals, KS / Wasserstein distances and the
//!   chaoticity / propagation-of-chaos experiments.
//! * [`planar`]: the two-dimensional momentum-conserving variant.
//!
//! Every stochastic routine takes an explicit [`rng::RandomStream`].
#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` is used on purpose so that NaN lands in the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod chaos;
pub mod energy;
pub mod equilibrium;
pub mod error;
pub mod kacwalk;
pub mod math;
pub mod meanfield;
pub mod numerics;
pub mod planar;
pub mod rng;
pub mod stats;
pub mod table;

pub use energy::EnergyFunction;
pub use equilibrium::SaddleSolution;
pub use error::{Error, Result};
pub use kacwalk::MasterVector;
pub use rng::RandomStream;
