//! Command-line experiments for the `proxproj` solvers: file formats, run
//! artifacts and the SMC summary table.

pub mod cli;
pub mod io;
pub mod run;
pub mod table;
