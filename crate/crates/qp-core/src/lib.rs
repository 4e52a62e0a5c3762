//! Finite-volume numerics for lattice quasi-periodic Schrödinger operators
//!
//! The operator under study is `H = ε Δ + cos 2π(θ + n·ω) δ_{n,n'}` on `Z^d`.
//! This crate provides the pieces needed to probe its Green's functions,
//! spectra and eigenfunctions at finite volume:
//!
//! * exact half-integer lattice geometry ([`lattice`]),
//! * operator assembly, dense and banded ([`operator`]),
//! * Green's functions, Schur complements and certified decay ([`green`]),
//! * brute-force Diophantine verification ([`diophantine`]),
//! * the multi-scale resonance engine ([`msa`]),
//! * integrated density of states via inertia counting ([`ids`]),
//! * eigenvector decay measurements ([`localization`]).
//!
//! All public types are immutable after construction and safe to share
//! across threads.

pub mod diophantine;
pub mod green;
pub mod ids;
pub mod lattice;
pub mod linalg;
pub mod localization;
pub mod msa;
pub mod operator;
pub mod report;
pub mod torus;

pub use lattice::{HalfLatticePoint, Region};
pub use operator::{OperatorInstance, OperatorParams};
