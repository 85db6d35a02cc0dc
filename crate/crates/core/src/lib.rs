#![forbid(unsafe_code)]

pub mod definetti;
pub mod entropies;
pub mod error;
pub mod linalg;
pub mod oneshot;
pub mod recovery;
pub mod squashed;
pub mod states;
pub mod typicality;

pub use error::{Error, Result};
