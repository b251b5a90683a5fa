pub mod blocks;
pub mod error;
pub mod fixedpoint;
pub mod protocols;
pub mod reference;
pub mod sharing;
pub mod transport;

pub use error::{Error, Result};
