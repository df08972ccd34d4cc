//! Procedural layout generation on dynamic templates and grids.
//!
//! Instances are generated from parameterized templates, placed on a
//! placement grid, connected on a routing grid generated after placement,
//! and then passed through technology-specific post-processing (min-area
//! extension, cut insertion, mask coloring, dummy fill) before export to
//! GDSII, canonical JSON, or SVG.

pub mod design;
pub mod error;
pub mod genlib;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod postprocess;
pub mod tech;
pub mod template;

pub use error::{Error, Result};
