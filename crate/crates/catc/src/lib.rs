//! Std companion to `catc-core`: airport and scenario files, event logs, the
//! message gateway and its WebSocket endpoint.

pub mod format;
pub mod gateway;
pub mod server;
