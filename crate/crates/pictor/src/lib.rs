//! Std companion to `pictor-core`: file formats, PNG IO, corpus synthesis,
//! remote backends, and the evaluation harnesses behind the `pictor` binary.

pub mod config;
pub mod corpus;
pub mod evalrun;
pub mod imageio;
pub mod manifest;
pub mod remote;
pub mod scripted;
pub mod solver;
