//! Coherent pulse-Doppler adaptive-detection simulator and analysis library.
//!
//! Implements Doppler-domain localized (DDL) adaptive detection around the
//! region of possible target detection (RPTD): time-domain data synthesis
//! with Gaussian clutter mixtures and Swerling I targets, zero-Doppler-
//! centered DFT processing, RPTD identification with fine Doppler
//! estimation, the DDL-AMF/DDL-GLR detectors and their time-domain and
//! RODI-bank baselines, analytic false-alarm/detection probabilities with
//! threshold inversion and a fast minimax threshold approximation, the
//! computational-load model, and deterministic Monte Carlo estimation.
//!
//! Bin and range-cell indices on public surfaces are 1-based, matching the
//! zero-Doppler-centered layout in which bin `N/2 + 1` carries zero
//! frequency.

// negated comparisons are deliberate: `!(x > 0.0)` rejects NaN, `x <= 0.0`
// does not
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detectors;
pub mod doppler;
pub mod error;
pub mod linalg;
pub mod performance;
pub mod rptd;
pub mod signal_model;

pub use error::{Error, Result};
pub use linalg::{C64, CMatrix, CVector, HermitianMatrix, HpdSolve};
