pub mod matcore;
pub mod sdpcore;
pub mod states;
pub mod channels;
pub mod state_measures;
pub mod channel_measures;
pub mod io;
pub mod batch;
pub mod selftest;

/// Library version, echoed in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
