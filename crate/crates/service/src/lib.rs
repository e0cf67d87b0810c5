//! Command-line runner and WebSocket session service over `shadowcue-core`.

pub mod cli;
pub mod protocol;
pub mod server;
pub mod session;
