//! Spin dynamics, decoherence channels, quantum-correlation quantifiers and
//! black-box phase estimation for small qubit registers.
//!
//! The crate is organized bottom-up:
//!
//! - [`qmatrix`]: dense complex matrices, partial operations, spectra,
//!   entropies and state distances.
//! - [`bloch`]: classical Bloch equations and single-spin pulse work.
//! - [`states`]: Bell-diagonal, M³_N, pseudopure and probe states;
//!   Peres test and correlation-triple readout.
//! - [`channels`]: phase damping, generalized amplitude damping and global
//!   phase damping in operator-sum form.
//! - [`correlations`]: entropic, geometric and global discord.
//! - [`dynamics`]: correlation trajectories, sudden changes and freezing.
//! - [`io`]: CSV and JSON emitters with a fixed numeric format.
//! - [`metrology`]: quantum Fisher information, SLD, interferometric power
//!   and the optimal phase estimator.
//!
//! Grid scans and sweeps run on rayon when the default `parallel` feature is
//! enabled and sequentially otherwise; results are identical either way.

pub mod bloch;
pub mod channels;
pub mod correlations;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod metrology;
pub mod optimize;
pub mod par;
pub mod qmatrix;
pub mod states;

pub use error::{Error, Result};
