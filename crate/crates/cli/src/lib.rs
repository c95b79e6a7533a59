//! Library side of the command-line front end: configuration, on-disk
//! formats, the remote translation backend, gradient verification, and the
//! command implementations. The `semrel` binary is a thin argv wrapper over
//! these modules.

pub mod commands;
pub mod config;
pub mod gradcheck;
pub mod overrides;
pub mod remote;
pub mod store;
