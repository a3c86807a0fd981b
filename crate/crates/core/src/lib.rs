pub mod basis;
pub mod data;
pub mod design;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod model;
pub mod par;
pub mod quad;
pub mod solve;
pub mod special;

pub use error::{Error, Result};
