//! Library surface of the batch runner, exposed so integration tests can
//! drive experiments without spawning the binary.

pub mod cache;
pub mod manifest;
pub mod runner;
