//! File formats, the grid benchmark, random instances and the command-line
//! driver built on `obsmode-core`.

pub mod casestudy;
pub mod cli;
pub mod dot;
pub mod formats;
pub mod fuzz;
pub mod pipeline;
