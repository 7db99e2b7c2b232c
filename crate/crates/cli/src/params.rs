//! Flat `key=value` parameters from a config file and the command line.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default)]
pub struct Params {
    values: BTreeMap<String, String>,
    used: BTreeSet<String>,
}

impl Params {
    /// Parses a config file body. Blank lines and lines starting with `#` are skipped.
    pub fn parse_file(text: &str) -> CliResult<Self> {
        let mut p = Params::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            p.set_pair(line)
                .map_err(|e| CliError::usage(format!("config line {}: {e}", i + 1)))?;
        }
        Ok(p)
    }

    /// Adds one `key=value` pair, replacing an earlier value.
    pub fn set_pair(&mut self, pair: &str) -> CliResult<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("expected key=value, got `{pair}`")))?;
        let key = k.trim();
        if key.is_empty() {
            return Err(CliError::usage(format!("empty key in `{pair}`")));
        }
        self.set(key, v.trim());
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    fn raw(&mut self, key: &str) -> Option<String> {
        self.used.insert(key.to_string());
        self.values.get(key).cloned()
    }

    pub fn get<T: FromStr>(&mut self, key: &str, default: T) -> CliResult<T>
    where
        T::Err: Display,
    {
        match self.raw(key) {
            None => Ok(default),
            Some(s) => parse_scalar(key, &s),
        }
    }

    /// Raw value if present.
    pub fn get_str(&mut self, key: &str) -> Option<String> {
        self.raw(key)
    }

    pub fn grid_usize(&mut self, key: &str, default: &[usize]) -> CliResult<Vec<usize>> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some(s) => parse_grid(key, &s, |a, b, step| usize_range(key, a, b, step)),
        }
    }

    pub fn grid_f64(&mut self, key: &str, default: &[f64]) -> CliResult<Vec<f64>> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some(s) => parse_grid(key, &s, |a, b, step| f64_range(key, a, b, step)),
        }
    }

    /// Grid of free-form words.
    pub fn grid_words(&mut self, key: &str, default: &[&str]) -> CliResult<Vec<String>> {
        match self.raw(key) {
            None => Ok(default.iter().map(|s| s.to_string()).collect()),
            Some(s) => Ok(s
                .split(',')
                .map(str::trim)
                .filter(|w| !w.is_empty())
                .map(String::from)
                .collect()),
        }
    }

    /// Fails on any key no experiment asked for.
    pub fn reject_unknown(&self) -> CliResult<()> {
        let unknown: Vec<&str> = self
            .values
            .keys()
            .filter(|k| !self.used.contains(*k))
            .map(String::as_str)
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::usage(format!(
                "unknown parameter(s): {}",
                unknown.join(", ")
            )))
        }
    }
}

fn parse_scalar<T: FromStr>(key: &str, s: &str) -> CliResult<T>
where
    T::Err: Display,
{
    s.parse::<T>()
        .map_err(|e| CliError::usage(format!("parameter `{key}`: cannot parse `{s}`: {e}")))
}

/// A grid is a comma-separated list whose items are values or inclusive
/// `start:stop:step` ranges. An empty string is an empty grid.
fn parse_grid<T: FromStr>(
    key: &str,
    s: &str,
    range: impl Fn(T, T, T) -> CliResult<Vec<T>>,
) -> CliResult<Vec<T>>
where
    T::Err: Display,
{
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|w| !w.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [v] => out.push(parse_scalar(key, v)?),
            [a, b, step] => out.extend(range(
                parse_scalar(key, a)?,
                parse_scalar(key, b)?,
                parse_scalar(key, step)?,
            )?),
            _ => {
                return Err(CliError::usage(format!(
                    "parameter `{key}`: bad grid item `{item}`"
                )))
            }
        }
    }
    Ok(out)
}

fn usize_range(key: &str, start: usize, stop: usize, step: usize) -> CliResult<Vec<usize>> {
    if step == 0 || stop < start {
        return Err(CliError::usage(format!(
            "parameter `{key}`: range needs start <= stop and step > 0"
        )));
    }
    Ok((start..=stop).step_by(step).collect())
}

// Values are start + i * step so that long ranges do not accumulate rounding.
fn f64_range(key: &str, start: f64, stop: f64, step: f64) -> CliResult<Vec<f64>> {
    if !step.is_finite() || step <= 0.0 || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(CliError::usage(format!(
            "parameter `{key}`: range needs start <= stop and step > 0"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}
