//! Problem documents, generation, runs and verification.

pub mod document;
pub mod generate;
pub mod run;
pub mod verify;
