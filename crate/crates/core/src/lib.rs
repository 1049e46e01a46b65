//! Penalty-method crash for linear programs in standard form.
//!
//! The main entry point is [`idiot::run_idiot`], which approximately minimises
//! `c^T x + lambda^T r + r^T r / (2 mu)` over `x >= 0` (with `r = A x - b`) by
//! exact coordinate steps while driving `mu` down. Around it sit reference
//! penalty modes ([`lab`]), a vertex-enumeration oracle for tiny problems
//! ([`oracle`]), MPS input/output ([`mps`], [`general`]) and the
//! Adams–Johnson linearization of quadratic assignment problems ([`qap`]).

pub mod general;
pub mod idiot;
pub mod instances;
pub mod lab;
pub mod model;
pub mod mps;
pub mod oracle;
pub mod qap;
pub mod report;
pub mod sparse;

pub use model::{Names, Point, StandardFormLP};
pub use sparse::SparseColMatrix;
