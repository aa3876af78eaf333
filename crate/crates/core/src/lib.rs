//! Supertile rules, transition statistics, spectral diagnostics and
//! diffraction for substitution and fusion tilings.

pub mod cli;
pub mod diffraction;
pub mod error;
pub mod image;
pub mod poly;
pub mod rulespec;
pub mod spectral;
pub mod supertile;
pub mod transition;

pub use error::{Error, ParseError, Result};
