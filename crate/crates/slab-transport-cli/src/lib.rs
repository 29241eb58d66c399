//! Configuration-driven front end for the slab transport solvers.
//!
//! The library half of the binary: flag and file parsing, deterministic CSV
//! tables, hand-rolled SVG charts, and the runner that turns a [`config::RunConfig`]
//! into files on disk. Everything here is deterministic: the same
//! configuration produces byte-identical artifacts.

pub mod config;
pub mod plot;
pub mod runner;
pub mod table;
