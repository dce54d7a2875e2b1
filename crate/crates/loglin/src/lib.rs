pub mod data;
pub mod error;
pub mod estimation;
pub mod experiments;
pub mod faces;
pub mod io;
pub mod local;
pub mod lp;
pub mod model;
pub mod param;
pub mod rank;
pub mod report;
pub mod sampler;

pub use error::{Error, Result};
