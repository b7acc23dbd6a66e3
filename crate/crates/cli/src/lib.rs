//! Batch CLI and HTTP service over `cfscope-core` sessions.

pub mod commands;
pub mod server;
