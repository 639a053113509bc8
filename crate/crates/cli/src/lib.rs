//! Command-line front end for the dustclear restoration library.
//!
//! The binary lives in `main.rs`; everything testable sits here:
//! image file I/O with extension dispatch, report serialization, the
//! deterministic batch runner, and the small option parsers for
//! compound flag values.

pub mod batch;
pub mod io;
pub mod opts;
pub mod report;
