//! Finite-dimensional models of product systems of C*-correspondences over
//! ℕ^k, finite group actions on them, and their crossed products.

pub mod action;
pub mod bratteli;
pub mod cli;
pub mod correspondence;
pub mod crossed;
pub mod dr;
pub mod error;
pub mod fdalg;
pub mod kgraph;
pub mod prodsys;
pub mod report;

pub use error::{Error, Result};
pub use report::{CheckRecord, CheckValue, Report};
