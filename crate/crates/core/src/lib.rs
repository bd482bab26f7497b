//! Differential privacy and Pufferfish privacy viewed as intervals of
//! measures, with bounds on what an attacker can infer from a privatised
//! output and exact oracles to check those bounds against.

pub mod config;
pub mod error;
pub mod inference;
pub mod measures;
pub mod mechanisms;
pub mod oracles;
pub mod pufferfish;
pub mod sampling;
pub mod universe;

pub use error::{Error, Result};
pub use mechanisms::{Mechanism, Outcome};
pub use measures::{FiniteMeasure, MeasureInterval};
pub use universe::{DataUniverse, Dataset, DatasetMode, Distance, Metric};
