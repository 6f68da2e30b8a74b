//! Configuration, file formats, offline commands and the live WebSocket
//! session service built on `tap-core`.

pub mod commands;
pub mod config;
pub mod formats;
pub mod protocol;
pub mod server;

pub use config::{load_config, load_config_file, AppConfig, ConfigError};
pub use server::{serve_session, LiveSession, Server};
