pub mod cli;
pub mod error;
pub mod fixtures;
pub mod harmonics;
pub mod peg;
pub mod radial;
pub mod sphere;
pub mod square;
pub mod svg;
pub mod table;

pub use error::{Error, Result};
