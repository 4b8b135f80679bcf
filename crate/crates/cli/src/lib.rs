//! Library surface behind the `sairp` binary, exposed so integration tests
//! can drive the commands directly.

pub mod artifacts;
pub mod commands;
pub mod config;
