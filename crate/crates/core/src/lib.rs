//! Hyperbolic sets of diffeomorphisms on pseudo-Riemannian manifolds.
//!
//! A compact invariant set C of f is hyperbolic up to a null distribution
//! E^n when every tangent space over C splits as E^s ⊕ E^u ⊕ E^n with
//! non-null, Df-invariant E^s and E^u on which |g(Df^n v, Df^n v)| decays
//! (resp. grows) at least like a·b^n (resp. a⁻¹·b⁻ⁿ), b < 1.
//!
//! Modules, bottom-up:
//!
//! * [`geometry`]: indefinite metrics, hypersurfaces, causal character.
//! * [`transport`]: Levi-Civita parallel transport along curves.
//! * [`dynamics`]: discrete systems and the overflow-safe derivative cocycle.
//! * [`splitting`]: subspaces, splittings, and the transport-based subspace distance.
//! * [`checker`]: verification of the splitting conditions and fitted constants.
//! * [`catalog`]: the four built-in systems and attractor tools.

pub mod catalog;
pub mod checker;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod splitting;
pub mod transport;

pub use error::{Error, Result};
pub use exec::Execution;
pub use geometry::{Causal, Manifold, MetricSignature, Point, TangentVector, Vector};
