//! Word compilation and diameter/mixing measurements for congruence quotients of classical
//! groups over `Z_p` and `F_q[[t]]`, and of the Nottingham group.

#[macro_use]
mod dispatch;

pub mod additive;
pub mod cli;
pub mod error;
pub mod group;
pub mod liealg;
pub mod matgroups;
pub mod nottingham;
pub mod rings;
pub mod skcompiler;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
