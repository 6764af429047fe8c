// Copyright 2026 The transmon-drag Contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors produced by model construction, propagation and optimization.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("tridiagonal eigensolver did not converge for eigenvalue {index} after {iterations} iterations")]
    NoConvergence { index: usize, iterations: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("propagator lost unitarity: max |U^dag U - I| = {deviation:.3e} (step {dt:.3e} ns too large?)")]
    NonUnitary { deviation: f64, dt: f64 },

    #[error("non-finite value encountered during {0}")]
    NotFinite(&'static str),

    #[error("optimum pinned at bracket edge for {variable} after widening to [{lo}, {hi}]")]
    BracketExhausted { variable: &'static str, lo: f64, hi: f64 },

    #[error("sweep point failed at A_y = {a_y}, W = {w}, t_p = {t_p} ns: {source}")]
    SweepPoint {
        a_y: f64,
        w: f64,
        t_p: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("spectrum error: {0}")]
    Spectrum(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
