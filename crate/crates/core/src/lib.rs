mod binio;
pub mod cli;
pub mod data;
pub mod error;
pub mod layers;
pub mod metrics;
pub mod mfcc;
pub mod models;
pub mod numcore;
pub mod training;

pub use error::{Error, Result};
