pub mod bnb;
pub mod branching;
pub mod error;
pub mod format;
pub mod heuristic;
pub mod hull;
pub mod interval;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod relax;

pub use error::{Error, Result};
