//! Experiment harness for `geoptics-core`: JSON scenario configs, the
//! scenario runners, field and table formats, and the output writer used
//! by the `geoptics` binary.

pub mod config;
pub mod error;
pub mod experiments;
pub mod io;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::config::Config;
use crate::error::Result;
use crate::experiments::Report;

/// Version string embedded in every manifest.
pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'a str,
    subcommand: &'a str,
    seed: u64,
    threads: usize,
    config: &'a Config,
    outputs: Vec<String>,
}

/// Writes the run outputs into `out`:
///
/// * `table.csv`, the sweep table;
/// * `summary.json`, derived quantities and trend checks;
/// * `manifest.json`, the resolved config, seed and code version;
/// * `fields/<name>.bin` and `.csv` for every dumped field;
/// * `run_log.jsonl` when the scenario keeps a per-step log;
/// * `cascade/` when cascade coefficients were requested.
///
/// Nothing time- or host-dependent is written, so outputs are
/// byte-identical across runs.
pub fn write_outputs(out: &Path, config: &Config, report: &Report, seed: u64, threads: usize) -> Result<()> {
    fs::create_dir_all(out)?;
    let mut outputs = vec!["table.csv".to_string(), "summary.json".to_string()];

    let mut w = BufWriter::new(fs::File::create(out.join("table.csv"))?);
    io::write_table_csv(&mut w, &report.columns, &report.rows)?;
    w.flush()?;
    fs::write(
        out.join("summary.json"),
        serde_json::to_string_pretty(&report.summary_json())? + "\n",
    )?;

    if !report.fields.is_empty() {
        let dir = out.join("fields");
        fs::create_dir_all(&dir)?;
        for (name, field) in &report.fields {
            io::save_field(&dir.join(format!("{name}.bin")), field)?;
            io::save_field_csv(&dir.join(format!("{name}.csv")), field)?;
            outputs.push(format!("fields/{name}.bin"));
            outputs.push(format!("fields/{name}.csv"));
        }
    }
    if !report.run_log.is_empty() {
        let mut w = BufWriter::new(fs::File::create(out.join("run_log.jsonl"))?);
        io::write_run_log(&mut w, &report.run_log)?;
        w.flush()?;
        outputs.push("run_log.jsonl".into());
    }
    for (name, cascade) in &report.cascades {
        io::write_cascade(&out.join(name), cascade)?;
        outputs.push(format!("{name}/cascade.json"));
    }

    let resolved = config.resolved();
    let manifest = Manifest {
        version: VERSION,
        subcommand: config.scenario.subcommand(),
        seed,
        threads,
        config: &resolved,
        outputs,
    };
    fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}
