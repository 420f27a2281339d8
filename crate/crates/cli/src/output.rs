use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;
use crate::manifest::Format;
use crate::run::{Row, Summary};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn write_csv<W: Write>(w: W, rows: &[Row]) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    summary: &'a Summary,
    rows: &'a [Row],
}

pub fn to_json(rows: &[Row], summary: &Summary) -> String {
    serde_json::to_string_pretty(&JsonDocument { summary, rows }).expect("rows always serialize")
}

/// Writes `<name>.csv` or `<name>.json` plus `<name>.summary.json` into `dir`
/// and returns the paths written.
pub fn write_dir(dir: &Path, format: Format, rows: &[Row], summary: &Summary) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let table = dir.join(format!(
        "{}.{}",
        summary.name,
        match format {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    ));
    match format {
        Format::Csv => {
            let f = fs::File::create(&table).map_err(io_err(&table))?;
            write_csv(std::io::BufWriter::new(f), rows).map_err(|e| CliError::Io {
                path: table.display().to_string(),
                source: std::io::Error::other(e),
            })?;
        }
        Format::Json => fs::write(&table, to_json(rows, summary)).map_err(io_err(&table))?,
    }
    let meta = dir.join(format!("{}.summary.json", summary.name));
    let text = serde_json::to_string_pretty(summary).expect("summary always serializes");
    fs::write(&meta, text + "\n").map_err(io_err(&meta))?;
    Ok(vec![table, meta])
}

/// Prints the table to stdout and the summary to stderr.
pub fn write_stdout(format: Format, rows: &[Row], summary: &Summary) -> Result<(), CliError> {
    let stdout = std::io::stdout();
    let path = Path::new("<stdout>");
    match format {
        Format::Csv => {
            write_csv(stdout.lock(), rows).map_err(|e| CliError::Io {
                path: path.display().to_string(),
                source: std::io::Error::other(e),
            })?;
            eprintln!("{}", serde_json::to_string(summary).expect("summary always serializes"));
        }
        Format::Json => writeln!(stdout.lock(), "{}", to_json(rows, summary)).map_err(io_err(path))?,
    }
    Ok(())
}
