//! Command implementations. Each command reads its own config section,
//! computes with the core crate (parallel over independent points), writes
//! its artifacts, and finishes with a run log carrying the config hash, the
//! effective seed, and a summary.

pub mod cell;
pub mod density;
pub mod envelope;
pub mod hyper;
pub mod report;
pub mod sweep;

use crate::config::LoadedConfig;
use crate::output::Format;
use std::path::Path;

pub struct Ctx<'a> {
    pub cfg: &'a LoadedConfig,
    pub out_dir: &'a Path,
    pub format: Format,
}
