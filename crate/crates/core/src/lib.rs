// SPDX-License-Identifier: Apache-2.0

//! Exact solver for two-clock, almost non-Zeno, turn-based weighted timed
//! games with non-negative integer weights.

pub mod all_reset;
pub mod cycle;
pub mod error;
pub mod game;
pub mod geom;
pub mod io;
pub mod kernel_vi;
pub mod plf;
pub mod plf2;
pub mod rational;
pub mod normalize;
pub mod oracle;
pub mod region;
pub mod region_game;
pub mod solver;
pub mod step;
pub mod unfold;

pub use error::{Error, Result};
pub use rational::{Ext, Q};
