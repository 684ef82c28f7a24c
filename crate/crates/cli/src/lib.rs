pub mod checks;
pub mod commands;
pub mod config;
pub mod fit;
pub mod ic;
pub mod snapshot;
pub mod sweep;
