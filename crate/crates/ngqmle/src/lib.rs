//! File formats, reports, tables and a parallel replication driver on top of
//! [`ngqmle_core`].

pub mod io;
pub mod mc;
pub mod report;
pub mod tables;

pub use ngqmle_core as core;
