//! Trace-map analysis of Engel word maps on `SL(2,q)` and `PSL(2,q)`.

pub mod analysis;
pub mod error;
pub mod ff;
pub mod oracle;
pub mod sl2;
pub mod tracemap;
pub mod words;

pub use error::{Error, Result};
