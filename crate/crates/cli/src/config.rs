//! Run configuration: defaults, flat `key = value` files and flag overrides.
//!
//! Config file schema (one `key = value` per line, `#` starts a comment):
//!
//! | key          | meaning                                   | default       |
//! |--------------|-------------------------------------------|---------------|
//! | `p`          | nonlinearity exponent                     | 2             |
//! | `delta`      | sextic weight                             | 100           |
//! | `A`          | shrinking-set amplitude                   | 20            |
//! | `s0`         | initial similarity time                   | 12            |
//! | `d`          | five comma-separated reals `d00,...,d60`  | 0,0,0,0,0     |
//! | `window`     | integration window in `s`                 | 3             |
//! | `quad_order` | Gauss-Hermite nodes per direction         | 48            |
//! | `nmax`       | total Hermite degree kept                 | 16            |
//! | `ds`         | time step                                 | 0.01          |
//! | `budget`     | trial budget of the `d` search            | 2000          |
//! | `out`        | output directory                          | `out`         |
//! | `seedless`   | must be `true`: every search is a fixed bisection | `true` |

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use blowup_core::basis::TensorGrid;
use blowup_core::profile::Params;
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: Params,
    pub quad_order: usize,
    pub n_max: usize,
    pub ds: f64,
    pub window: f64,
    pub budget: usize,
    pub output_dir: PathBuf,
    pub seedless: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: Params::default(),
            quad_order: 48,
            n_max: 16,
            ds: 0.01,
            window: 3.0,
            budget: 2000,
            output_dir: PathBuf::from("out"),
            seedless: true,
        }
    }
}

/// Keys accepted by `RunConfig::set`, in the order `render` writes them.
pub const KEYS: [&str; 12] = ["p", "delta", "A", "s0", "d", "window", "quad_order", "nmax", "ds", "budget", "out", "seedless"];

fn real(key: &str, v: &str) -> Result<f64, CliError> {
    let x: f64 = v.trim().parse().map_err(|_| CliError::Config(format!("{key}: `{v}` is not a real number")))?;
    if !x.is_finite() {
        return Err(CliError::Config(format!("{key}: `{v}` is not finite")));
    }
    Ok(x)
}

fn count(key: &str, v: &str) -> Result<usize, CliError> {
    v.trim().parse().map_err(|_| CliError::Config(format!("{key}: `{v}` is not a nonnegative integer")))
}

/// Parses `d00,d20,d40,d42,d60`.
pub fn parse_d(v: &str) -> Result<[f64; 5], CliError> {
    let parts: Vec<&str> = v.split(',').collect();
    if parts.len() == 1 && real("d", parts[0]).is_ok_and(|x| x == 0.0) {
        return Ok([0.0; 5]);
    }
    if parts.len() != 5 {
        return Err(CliError::Config(format!("d: expected 5 comma-separated reals, got `{v}`")));
    }
    let mut d = [0.0; 5];
    for (slot, part) in d.iter_mut().zip(parts) {
        *slot = real("d", part)?;
    }
    Ok(d)
}

impl RunConfig {
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), CliError> {
        match key {
            "p" => self.params.p = real(key, v)?,
            "delta" => self.params.delta = real(key, v)?,
            "A" => self.params.amp = real(key, v)?,
            "s0" => self.params.s0 = real(key, v)?,
            "d" => self.params.d = parse_d(v)?,
            "window" => self.window = real(key, v)?,
            "quad_order" => self.quad_order = count(key, v)?,
            "nmax" => self.n_max = count(key, v)?,
            "ds" => self.ds = real(key, v)?,
            "budget" => self.budget = count(key, v)?,
            "out" => self.output_dir = PathBuf::from(v.trim()),
            "seedless" => {
                if v.trim() != "true" {
                    return Err(CliError::Config("seedless: only `true` is supported".into()));
                }
            }
            _ => return Err(CliError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a config file on top of the current values.
    pub fn load(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("{}:{}: expected `key = value`", path.display(), n + 1)))?;
            self.set(k.trim(), v)
                .map_err(|e| CliError::Config(format!("{}:{}: {e}", path.display(), n + 1)))?;
        }
        Ok(())
    }

    /// Checks the physical and numerical parameters.
    pub fn validate(&self) -> Result<(), CliError> {
        self.params.validate()?;
        self.grid()?;
        if !(self.ds > 0.0 && self.ds <= 0.1) {
            return Err(CliError::Config(format!("ds = {} outside (0, 0.1]", self.ds)));
        }
        if !(self.window >= 0.0) {
            return Err(CliError::Config(format!("window = {} is negative", self.window)));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TensorGrid, CliError> {
        Ok(TensorGrid::new(self.quad_order, self.n_max)?)
    }

    /// Key-value form; reading it back with `load` gives the same config.
    pub fn render(&self) -> String {
        let d: Vec<String> = self.params.d.iter().map(|x| x.to_string()).collect();
        let vals: BTreeMap<&str, String> = [
            ("p", self.params.p.to_string()),
            ("delta", self.params.delta.to_string()),
            ("A", self.params.amp.to_string()),
            ("s0", self.params.s0.to_string()),
            ("d", d.join(",")),
            ("window", self.window.to_string()),
            ("quad_order", self.quad_order.to_string()),
            ("nmax", self.n_max.to_string()),
            ("ds", self.ds.to_string()),
            ("budget", self.budget.to_string()),
            ("out", self.output_dir.display().to_string()),
            ("seedless", self.seedless.to_string()),
        ]
        .into_iter()
        .collect();
        KEYS.iter().map(|k| format!("{k} = {}\n", vals[k])).collect()
    }
}
