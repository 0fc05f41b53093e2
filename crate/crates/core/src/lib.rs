//! Detection of outdated code comments from revision history.

pub mod change;
pub mod corpus;
pub mod distiller;
pub mod embed;
pub mod error;
pub mod features;
pub mod fixture;
pub mod lexicon;
pub mod linker;
pub mod model;
pub mod pipeline;
pub mod refactor;
pub mod synth;
pub mod text;

pub use error::{Error, Result};
