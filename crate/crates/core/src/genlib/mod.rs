//! Reference generators and the command-line front end.

mod channel;
pub mod cli;
mod dac;
mod scan;

use std::sync::Arc;

pub use dac::CurrentDac;
pub use scan::ScanChain;

pub use crate::design::{Generator, GeneratorSpec};

use crate::design::{run_flow, Design, FlowFlags};
use crate::error::{Error, Result};
use crate::tech::TechDb;
use crate::template::{params, Params};

/// Every registered generator, sorted by name.
pub fn generators() -> Vec<Box<dyn Generator>> {
    vec![Box::new(CurrentDac), Box::new(ScanChain)]
}

pub fn generator(name: &str) -> Result<Box<dyn Generator>> {
    generators()
        .into_iter()
        .find(|g| g.spec().name == name)
        .ok_or_else(|| Error::UnknownGenerator(name.to_string()))
}

/// Runs generator `name` with every post-processing pass enabled.
pub fn generate(name: &str, tech: Arc<TechDb>, given: &Params) -> Result<Design> {
    run_flow(generator(name)?.as_ref(), tech, given, &FlowFlags::default())
}

pub fn gen_current_dac(tech: Arc<TechDb>, bits: i64) -> Result<Design> {
    generate("dac", tech, &params([("bits", bits)]))
}

pub fn gen_scan_cell(tech: Arc<TechDb>, n_bits: i64, levelshift: bool) -> Result<Design> {
    let mut p = params([("n_bits", n_bits)]);
    p.insert("levelshift".into(), levelshift.into());
    generate("scan", tech, &p)
}
