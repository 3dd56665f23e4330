//! Spectral toolkit for Dirac-type representations of conformal tori in
//! four-dimensional Euclidean space and their soliton deformations.
//!
//! Fields live on a periodic grid ([`grid`]). Spinor data solving a pair of
//! Dirac equations ([`spinor`]) produce closed one-forms whose integrals are
//! conformal immersions ([`weierstrass`]). The potential and spinors can be
//! deformed by a hierarchy of flows ([`hierarchy`], [`flow`]) that preserve
//! the Dirac equations and the Willmore energy. [`gaussmap`] computes the
//! Grassmannian Gauss map of the resulting surfaces.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod flow;
pub mod gaussmap;
pub mod grid;
pub mod hierarchy;
pub mod spinor;
pub mod weierstrass;

pub use error::{Error, Result};
pub use grid::{ComplexField, GridSpec, Measure};
pub use num_complex::Complex64;
