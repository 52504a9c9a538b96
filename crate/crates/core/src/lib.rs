pub mod combin;
pub mod error;
pub mod hypergraph;
pub mod laplacian;
pub mod matrix;
pub mod spectra;

pub use error::{Error, Result};
pub mod apps;
pub mod cli;
pub mod walks;
