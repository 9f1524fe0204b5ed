pub mod driver;
pub mod error;
pub mod harness;
pub mod interval;
pub mod io;
pub mod local_search;
pub mod lp;
pub mod milp;
pub mod poly;
pub mod relax;
pub mod tighten;

pub use error::{Error, Result};
