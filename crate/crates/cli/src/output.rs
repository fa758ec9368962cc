use std::fs::File;
use std::io::{self, Write};

use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{Format, OutputArgs};
use crate::CliError;

/// Bumped whenever the JSON envelope or a CSV header changes.
pub const SCHEMA_VERSION: u32 = 1;

fn sink(out: &OutputArgs) -> Result<Box<dyn Write>, CliError> {
    Ok(match &out.out {
        Some(path) => Box::new(File::create(path).map_err(gapcert::Error::from)?),
        None => Box::new(io::stdout().lock()),
    })
}

/// Writes `{schema_version, command, seed, tolerances, passed, result}`.
pub fn json<T: Serialize>(
    out: &OutputArgs,
    command: &str,
    seed: Option<u64>,
    tolerances: Value,
    passed: bool,
    result: &T,
) -> Result<(), CliError> {
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "seed": seed,
        "tolerances": tolerances,
        "passed": passed,
        "result": result,
    });
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, &doc).map_err(gapcert::Error::from)?;
    writeln!(w).map_err(gapcert::Error::from)?;
    Ok(())
}

/// Header row from the field names of `R`, one record per row.
pub fn csv<R: Serialize>(out: &OutputArgs, rows: &[R]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(sink(out)?);
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Config(format!("csv: {e}")))?;
    }
    w.flush().map_err(gapcert::Error::from)?;
    Ok(())
}

/// JSON document or, for commands with a table, CSV rows.
pub fn emit<T: Serialize, R: Serialize>(
    out: &OutputArgs,
    command: &str,
    seed: Option<u64>,
    tolerances: Value,
    passed: bool,
    result: &T,
    rows: Option<&[R]>,
) -> Result<(), CliError> {
    match (out.format, rows) {
        (Format::Json, _) => json(out, command, seed, tolerances, passed, result),
        (Format::Csv, Some(rows)) => csv(out, rows),
        (Format::Csv, None) => Err(CliError::Config(format!("`{command}` has no CSV form; use --format json"))),
    }
}
