//! Flat key=value configuration with command-line overrides.
//!
//! A config file holds one `key = value` pair per line (`#` comments
//! allowed); every key can also be given on the command line as
//! `--key value` or `--key=value`, which wins over the file. Keys are
//! kebab-case.

use std::collections::BTreeMap;
use std::path::PathBuf;

use cggm::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    /// Parses `--config FILE` plus `--key value` overrides from raw args.
    pub fn from_args(args: &[String], known_keys: &[&str]) -> Result<Self> {
        let mut overrides: Vec<(String, String)> = Vec::new();
        let mut config_path: Option<PathBuf> = None;
        let mut idx = 0;
        while idx < args.len() {
            let arg = &args[idx];
            let Some(stripped) = arg.strip_prefix("--") else {
                return Err(Error::invalid_argument(format!(
                    "unexpected positional argument {arg:?}"
                )));
            };
            let (key, value) = if let Some((k, v)) = stripped.split_once('=') {
                idx += 1;
                (k.to_string(), v.to_string())
            } else {
                let Some(value) = args.get(idx + 1) else {
                    return Err(Error::invalid_argument(format!(
                        "flag --{stripped} is missing a value"
                    )));
                };
                idx += 2;
                (stripped.to_string(), value.clone())
            };
            if key == "config" {
                config_path = Some(PathBuf::from(value));
            } else {
                overrides.push((key, value));
            }
        }

        let mut values = BTreeMap::new();
        if let Some(path) = config_path {
            for (lineno, line) in std::fs::read_to_string(&path)
                .map_err(|_| {
                    Error::invalid_argument(format!("config file {} not readable", path.display()))
                })?
                .lines()
                .enumerate()
            {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((k, v)) = line.split_once('=') else {
                    return Err(Error::invalid_argument(format!(
                        "{}:{}: expected key=value",
                        path.display(),
                        lineno + 1
                    )));
                };
                values.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        for (k, v) in overrides {
            values.insert(k, v);
        }
        for key in values.keys() {
            if !known_keys.contains(&key.as_str()) {
                return Err(Error::invalid_argument(format!(
                    "unknown configuration key {key:?}; known keys: {}",
                    known_keys.join(", ")
                )));
            }
        }
        Ok(Config { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.get(key).unwrap_or(default)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::invalid_argument(format!("missing required key --{key}")))
    }

    pub fn f64_opt(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::invalid_argument(format!("--{key} expects a number, got {v:?}")))
            })
            .transpose()
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    pub fn usize_opt(&self, key: &str) -> Result<Option<usize>> {
        self.get(key)
            .map(|v| {
                v.parse::<usize>().map_err(|_| {
                    Error::invalid_argument(format!("--{key} expects a non-negative integer, got {v:?}"))
                })
            })
            .transpose()
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.usize_opt(key)?.unwrap_or(default))
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        self.get(key)
            .map(|v| {
                v.parse::<u64>()
                    .map_err(|_| Error::invalid_argument(format!("--{key} expects an integer, got {v:?}")))
            })
            .transpose()
            .map(|o| o.unwrap_or(default))
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some("false") | Some("0") | Some("no") => Ok(false),
            Some(other) => Err(Error::invalid_argument(format!(
                "--{key} expects true/false, got {other:?}"
            ))),
        }
    }

    pub fn path_opt(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(PathBuf::from)
    }

    /// Existing file required at validation time.
    pub fn existing_file(&self, key: &str) -> Result<PathBuf> {
        let path = PathBuf::from(self.require(key)?);
        if !path.is_file() {
            return Err(Error::invalid_argument(format!(
                "--{key}: file {} does not exist",
                path.display()
            )));
        }
        Ok(path)
    }

    /// Everything that was set, for the run meta echo.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

/// Worker cap: CGGM_THREADS, else available parallelism.
pub fn thread_cap() -> usize {
    std::env::var("CGGM_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// Output directory helper.
pub fn out_dir(config: &Config) -> Result<PathBuf> {
    let dir = PathBuf::from(config.require("out")?);
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}
