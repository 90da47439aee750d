//! Numerical laboratory for the concentration of `|AX|` when `X` is an
//! isotropic log-concave random vector.
//!
//! The crate is organized around the objects the experiments manipulate:
//!
//! * [`distributions`] — the log-concave zoo, exact samplers, whitening,
//!   psi-alpha constants and the effective dimension;
//! * [`radial1d`] — one-dimensional log-concave machinery (adaptive radial
//!   quadrature, concavity checks, half-line mass bounds, marginals);
//! * [`bodies`] — star/convex body oracles (one-sided centroid bodies,
//!   moment bodies of densities) and the inclusion-relation verifier;
//! * [`rotations`] — Haar sampling on SO(n), geodesics, tangent movements,
//!   directional radial moments of marginals and log-Lipschitz probes;
//! * [`moments`] — moment-ratio and tail curves, identity checks,
//!   moments/tails conversions, thin-shell scans and the Cheeger diagnostic.
//!
//! Support modules: [`special`] (log-gamma, erfc, incomplete beta),
//! [`quadrature`] (adaptive Gauss-Legendre), [`stats`] (bootstrap, jackknife,
//! Clopper-Pearson), [`rng`] (seeded sub-streams), [`linalg`].
//!
//! Everything is deterministic given a 64-bit seed; sampling is sharded by
//! row index so results do not depend on the worker count.

pub mod bodies;
pub mod distributions;
pub mod error;
pub mod linalg;
pub mod moments;
pub mod quadrature;
pub mod radial1d;
pub mod rng;
pub mod rotations;
pub mod special;
pub mod stats;

pub use error::{Error, Result};

// re-exported so downstream crates share the same matrix types
pub use nalgebra;
