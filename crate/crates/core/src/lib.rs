pub mod bratteli;
pub mod checks;
pub mod cli;
pub mod error;
pub mod fock;
pub mod gicar;
pub mod ideal;
pub mod linalg;
pub mod rep;
pub mod rewrite;
pub mod symmetry;
pub mod words;

pub use error::{Error, Result};
