//! Orthogonal delay-Doppler multiplexing (ODDM) with time-domain
//! Tomlinson-Harashima precoding.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`] holds the delay-Doppler grid, frames and time sequences.
//! * [`seed`] derives reproducible per-frame random streams.
//! * [`qam`] maps Gray-coded bits to square QAM and back.
//! * [`channel`] draws doubly-selective channels and applies them.
//! * [`modem`] does ODDM (de)modulation, prefixes, pulse shaping and the
//!   effective delay-Doppler channel matrix.
//! * [`thp`] is the transmitter precoder and the receiver modulo/equalizer.
//! * [`analysis`] evaluates the closed-form BER bounds.
//! * [`sim`] runs Monte Carlo sweeps and writes result tables.

pub mod analysis;
pub mod channel;
pub mod error;
pub mod grid;
pub mod modem;
pub mod qam;
pub mod seed;
pub mod sim;
pub mod thp;

pub use num_complex::Complex64 as C64;

pub use analysis::{BoundKind, BoundParams, Theorem1};
pub use channel::{ChannelRealization, ModelTag, PathTap, ProfileSpec};
pub use error::{ConfigError, OddmError, Result};
pub use grid::{DDFrame, GridConfig, PrefixKind, TimeSequence};
pub use modem::{Fidelity, OddmModem, PulseConfig};
pub use qam::Constellation;
pub use seed::{SeedPlan, StreamTag};
pub use sim::{BerRecord, Scheme, SimConfig};
pub use thp::{ThpConfig, Wrapped};
