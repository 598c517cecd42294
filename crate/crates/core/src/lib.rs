//! Local analysis of SL(n, C) representation varieties of knot groups at
//! regular diagonal representations.

pub mod analysis;
pub mod burnside;
pub mod catalog;
pub mod charvar;
pub mod cone;
pub mod dd;
pub mod error;
pub mod foxcoh;
pub mod jets;
pub mod laurent;
pub mod linalg;
pub mod presentation;
pub mod repbuild;

pub use error::{Error, Result};
