//! Pseudospectral solver and verification lab for the periodic elastic wave
//! equation `∂ₜ²u − Δ*u = F`, `Δ* = μΔ + (λ+μ)∇div`.
//!
//! Everything is built on the frequency-space diagonalization of the Lamé
//! symbol by a pair of smooth pole rotations glued with an angular
//! partition of unity.

pub mod angular;
pub mod error;
pub mod fft;
pub mod grid;
pub mod harness;
pub mod mat;
pub mod norms;
pub mod par;
pub mod profile;
pub mod propagator;
pub mod report;
pub mod resolvent;
pub mod symbol;
pub mod verification;

pub use error::{Error, Result};
pub use grid::{Grid, LameParams, Space, VectorField};
