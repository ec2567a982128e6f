pub mod config;
pub mod did;
pub mod error;
pub mod extras;
pub mod ols;
pub mod output;
pub mod panel;
pub mod pipeline;
pub mod sensitivity;
pub mod sim;
pub mod stats;
pub mod text;

pub use error::{Error, Result};

#[cfg(test)]
pub(crate) mod testutil;
