//! Voice command interpretation for block-based programming.
//!
//! Transcripts are normalized, split into a command and a remainder, matched
//! against the language pack (exact, phonetic, fuzzy), turned into block
//! instantiations through per-block grammars and applied to a simulated
//! workspace that is the single source of truth. The [`stats`] and [`eval`]
//! modules reproduce the transcription-reliability evaluation.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod config;
pub mod distance;
pub mod eval;
pub mod grammar;
pub mod matcher;
pub mod phonetic;
pub mod pipeline;
pub mod stats;
pub mod textnorm;
pub mod value;
pub mod workspace;

pub use config::{Command, Config, Language};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
