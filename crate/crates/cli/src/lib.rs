//! Rendering and verification suites for the `bouquet` command.

pub mod render;
pub mod suites;
