//! CLI and HTTP front end for the cbp pipeline.

pub mod cli;
pub mod error;
pub mod http;
pub mod pipeline;
pub mod project;

pub use error::Error;
