//! Library surface of the CLI so integration tests can reuse the document
//! schemas and IO helpers.

pub mod commands;
pub mod io;
pub mod svg;
