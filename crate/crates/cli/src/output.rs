//! Single-writer output directory: CSV data, JSON certificates and a
//! manifest. Only the manifest carries timestamps.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use blowup_core::dynamics::fmt17;
use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

pub struct Output {
    dir: PathBuf,
    files: Vec<String>,
    started: DateTime<Utc>,
    timings: BTreeMap<String, f64>,
}

/// 17 significant digits, the format of every float in data files.
pub fn f17(x: f64) -> String {
    fmt17(x)
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    pass: bool,
    started: String,
    finished: String,
    config: &'a RunConfig,
    config_text: String,
    files: &'a [String],
    /// Wall-clock seconds per step; kept out of the data files.
    timings: &'a BTreeMap<String, f64>,
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new(), started: Utc::now(), timings: BTreeMap::new() })
    }

    pub fn timing(&mut self, key: &str, seconds: f64) {
        self.timings.insert(key.into(), seconds);
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut w = csv::Writer::from_path(self.dir.join(name))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
        self.files.push(name.into());
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value)?;
        self.text(name, &(text + "\n"))
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        std::fs::write(self.dir.join(name), body)?;
        self.files.push(name.into());
        Ok(())
    }

    /// Writes `manifest.json` last, listing every file written before it.
    pub fn finish(self, command: &str, cfg: &RunConfig, pass: bool) -> Result<PathBuf, CliError> {
        let stamp = |t: DateTime<Utc>| t.to_rfc3339_opts(SecondsFormat::Millis, true);
        let m = Manifest {
            command,
            pass,
            started: stamp(self.started),
            finished: stamp(Utc::now()),
            config: cfg,
            config_text: cfg.render(),
            files: &self.files,
            timings: &self.timings,
        };
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&m)? + "\n")?;
        Ok(path)
    }
}
