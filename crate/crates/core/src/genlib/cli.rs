//! `laygen` command line.
//!
//! Exit status is 0 on success, 1 on a runtime failure or when `check`
//! finds violations, and 2 on a usage error.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use super::{generator, generators};
use crate::design::{check_all, default_fill_region, run_flow, Design, FlowFlags};
use crate::error::{Error, Result};
use crate::io::{read_json, write_gds, write_json, write_svg, SvgStyle};
use crate::postprocess;
use crate::tech::TechDb;
use crate::template::Params;

#[derive(Debug, Parser)]
#[command(name = "laygen", version, about = "Template- and grid-based layout generator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Gds,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Pass {
    MinArea,
    Cuts,
    Colors,
    Dummies,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a generator and write the layout.
    Gen {
        /// Technology JSON file.
        #[arg(long)]
        tech: PathBuf,
        /// Registered generator name (see list-generators).
        #[arg(long)]
        generator: String,
        /// Generator parameter as NAME=VALUE; repeatable.
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Skip post-processing entirely.
        #[arg(long)]
        raw: bool,
        /// Shift applied to track mask colors.
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        color_offset: i64,
    },
    /// Apply post-processing passes to a layout JSON; all passes when none given.
    Postprocess {
        /// Pass to run; repeatable. Passes always run in the fixed flow order.
        #[arg(long = "pass", value_enum)]
        passes: Vec<Pass>,
        /// Layout JSON to read.
        #[arg(long = "in")]
        input: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Shift applied to track mask colors.
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        color_offset: i64,
    },
    /// Run the spacing check on a layout JSON; exits 1 on violations.
    Check {
        /// Layout JSON to read.
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// List generators and their parameters.
    ListGenerators {
        /// Print the parameter schemas as JSON.
        #[arg(long)]
        json: bool,
    },
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::validation(path.display().to_string(), e.to_string())
}

fn emit(bytes: &[u8], out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| io_err(p, e)),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| io_err(Path::new("<stdout>"), e)),
    }
}

fn render(d: &Design, format: Format) -> Result<Vec<u8>> {
    Ok(match format {
        Format::Json => write_json(d)?.into_bytes(),
        Format::Gds => write_gds(d)?,
        Format::Svg => write_svg(d, &SvgStyle::default())?.into_bytes(),
    })
}

fn read_design(path: &Path) -> Result<Design> {
    read_json(&std::fs::read_to_string(path).map_err(|e| io_err(path, e))?)
}

fn parse_params(spec: &super::GeneratorSpec, raw: &[String]) -> Result<Params> {
    let mut given = Params::new();
    for kv in raw {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::bad_param(kv.clone(), "expected NAME=VALUE"))?;
        let ps = spec
            .params
            .get(k)
            .ok_or_else(|| Error::bad_param(k, "unknown parameter"))?;
        given.insert(k.to_string(), ps.parse(k, v)?);
    }
    Ok(given)
}

/// Executes a parsed command; `Ok(false)` means the check found violations.
pub fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Gen {
            tech,
            generator: name,
            params,
            out,
            format,
            raw,
            color_offset,
        } => {
            let gen = generator(&name)?;
            let given = parse_params(&gen.spec(), &params)?;
            let tech = Arc::new(TechDb::load_file(&tech)?);
            let flags = if raw {
                FlowFlags {
                    min_area: false,
                    cuts: false,
                    colors: false,
                    color_offset,
                    dummies: false,
                }
            } else {
                FlowFlags {
                    color_offset,
                    ..FlowFlags::default()
                }
            };
            let d = run_flow(gen.as_ref(), tech, &given, &flags)?;
            emit(&render(&d, format)?, out.as_deref())?;
            Ok(true)
        }
        Command::Postprocess {
            passes,
            input,
            out,
            color_offset,
        } => {
            let mut d = read_design(&input)?;
            let on = |p: Pass| passes.is_empty() || passes.contains(&p);
            let flags = FlowFlags {
                min_area: on(Pass::MinArea),
                cuts: on(Pass::Cuts),
                colors: on(Pass::Colors),
                color_offset,
                dummies: on(Pass::Dummies),
            };
            let region = default_fill_region(&d);
            postprocess::apply(&mut d, &flags, region.as_ref())?;
            emit(write_json(&d)?.as_bytes(), out.as_deref())?;
            Ok(true)
        }
        Command::Check { input } => {
            let d = read_design(&input)?;
            let v = check_all(&d)?;
            for x in &v {
                println!("{x}");
            }
            Ok(v.is_empty())
        }
        Command::ListGenerators { json } => {
            let specs: Vec<_> = generators().iter().map(|g| g.spec()).collect();
            if json {
                println!("{}", serde_json::to_string_pretty(&specs)?);
            } else {
                for s in specs {
                    println!("{}: {}", s.name, s.description);
                    for (k, p) in &s.params {
                        println!("  {k} (default {})", p.default_value());
                    }
                }
            }
            Ok(true)
        }
    }
}

/// Entry point for the binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
