//! Command-line front end for the `planepart` library.

pub mod args;
pub mod cache;
pub mod error;
pub mod nlist;
pub mod output;
pub mod run;
