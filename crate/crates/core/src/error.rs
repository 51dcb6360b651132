// Copyright 2026 The stmbus Authors
// SPDX-License-Identifier: Apache-2.0

//! Error type shared by every module.

use thiserror::Error;

/// Coarse classification used by callers that map failures onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input or violated precondition.
    Validation,
    /// The computation itself failed (blow-up, non-convergence).
    Numerical,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("numerical blow-up: {0}")]
    Blowup(String),
    #[error("did not converge: {0}")]
    Convergence(String),
    #[error("undefined quantity: {0}")]
    Undefined(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Domain(_) | Error::Config(_) | Error::Precondition(_) => ErrorClass::Validation,
            Error::Blowup(_) | Error::Convergence(_) | Error::Undefined(_) => ErrorClass::Numerical,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
