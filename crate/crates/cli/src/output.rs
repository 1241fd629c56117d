use std::fs;
use std::path::Path;
use std::time::Duration;

use chrono::{DateTime, Utc};

use crate::commands::Table;
use crate::config::Settings;
use crate::error::{CliError, CliResult};

pub const CONFIG_FILE: &str = "config.txt";
pub const METADATA_FILE: &str = "metadata.txt";

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::Io(path.display().to_string(), e))
}

/// Writes the tables, the effective settings and the run metadata into `dir`.
pub fn write_run(
    dir: &Path,
    command: &str,
    settings: &Settings,
    tables: &[Table],
    started: DateTime<Utc>,
    wall: Duration,
) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.display().to_string(), e))?;
    for t in tables {
        write(&dir.join(format!("{}.csv", t.name)), &t.to_csv())?;
    }
    write(&dir.join(CONFIG_FILE), &settings.render())?;
    let meta = format!(
        "version = {}\ncommand = {command}\nstarted = {}\nwall_time_s = {:.3}\n",
        env!("CARGO_PKG_VERSION"),
        started.to_rfc3339(),
        wall.as_secs_f64()
    );
    write(&dir.join(METADATA_FILE), &meta)
}
