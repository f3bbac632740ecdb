//! `H³`-nonconforming finite elements on n-rectangle meshes for the
//! tri-harmonic equation `(−Δ)³u = f` with clamped boundary conditions.
//!
//! Two element families are provided: a Morley-type element with vertex
//! values, gradients and face-centre normal second derivatives, and an
//! Adini-type element with vertex values, gradients and pure second
//! derivatives. Reference bases are computed exactly over the rationals.

pub mod analysis;
pub mod assembly;
pub mod cli;
pub mod element;
pub mod error;
pub mod exact;
pub mod fespace;
pub mod mesh;
pub mod polynomial;
pub mod quadrature;
pub mod solver;
