//! Exact lattice invariants built from Gram matrices.
//!
//! The crate computes, for an integral lattice given by its Gram matrix:
//!
//! - the classical theta series `Σ_γ q^{‖γ‖²}`,
//! - the embedding-independent forms `Θ_{11,Λ}` (any dimension) and
//!   `Θ_{nn,Λ}` (dimension two), computed exactly from inner products only,
//! - spherical theta functions `Σ_γ h(γ) q^{‖γ‖²}` for harmonic `h`, which
//!   need a concrete embedding and therefore carry float coefficients,
//! - numerical heat-flux quantities `f_t`, `⟨P, f_t⟩` and the sphere
//!   invariants `c_{k₁…k_m}` that tie the pieces together.
//!
//! Every exact quantity is a [`num_rational::BigRational`]; floats appear
//! only where an embedding or the heat parameter `t` is involved.
//!
//! The Laplacian follows the analyst's *negative* convention
//! `Δ = −Σ ∂²/∂x_i²` everywhere; see [`polyalg::Polynomial::laplacian`].

#![allow(clippy::needless_range_loop)]

pub mod heat;
pub mod lattice;
pub mod polyalg;
pub mod qseries;
pub mod sphere;
pub mod theta;

pub use heat::{HeatContext, HeatError, IdentityCheck};
pub use lattice::{Embedding, GramLattice, LatticeError, LatticeVector, LevelDiscriminant};
pub use polyalg::{FloatPoly, PolyError, Polynomial, RatPoly};
pub use qseries::{FloatSeries, QExpansion, QSeriesError};
pub use theta::{HarmonicDatum, ThetaError};

pub use num_rational::BigRational;
