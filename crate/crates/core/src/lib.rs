pub mod cli;
pub mod ddouble;
pub mod error;
pub mod formula;
pub mod grassmann;
pub mod haar_mc;
pub mod jets;
pub mod params;
pub mod radial;
pub mod scalar;
pub mod series_oracle;
pub mod spectra;
pub mod summation;
pub mod verify;

pub use error::{Error, Result};
