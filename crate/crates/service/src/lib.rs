//! Command-line and HTTP shells around `framedx-core`.

pub mod cli;
pub mod http;
pub mod session;
pub mod store;
