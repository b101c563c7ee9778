//! Stage pipeline behind the `collab-atlas` binary.

pub mod compare;
pub mod config;
pub mod groups;
pub mod manifest;
pub mod stages;
