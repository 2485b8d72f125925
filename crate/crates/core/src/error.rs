// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("structural error: {0}")]
    Structural(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid step: {0}")]
    InvalidStep(String),
    #[error("game is not almost non-Zeno; witness cycle {0:?}")]
    NotAlmostNonZeno(Vec<String>),
    #[error("cycle enumeration budget of {0} exceeded")]
    BudgetExceeded(usize),
    #[error("solver supports at most two clocks, game has {0}")]
    MoreThanTwoClocks(usize),
    #[error("unbounded clock: {0}")]
    UnboundedClock(String),
    #[error("Max fully controls a cycle: {0}")]
    MaxControlledCycle(String),
    #[error("value iteration did not stabilise within {0} steps")]
    IterationCap(usize),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
