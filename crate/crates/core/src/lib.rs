pub mod check;
pub mod error;
pub mod ito;
pub mod lefschetz;
pub mod linalg;
pub mod polygons;
pub mod report;
pub mod scenarios;
pub mod strata;
pub mod weight_ss;

pub use error::{Error, Result};
