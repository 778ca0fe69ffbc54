pub mod covops;
pub mod dataio;
pub mod error;
pub mod exactlik;
pub mod fit;
pub mod linalg;
pub mod model;
pub mod quad;
pub mod specfun;
pub mod spectrum;
pub mod whittle;

pub use error::{Error, Result};
