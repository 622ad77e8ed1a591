//! `key = value` run configuration. Keys are the long flag names; every key
//! must be consumed by the command or the file is rejected.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::CliError;

#[derive(Debug, Default)]
pub struct ConfigFile {
    path: Option<PathBuf>,
    entries: BTreeMap<String, (usize, String)>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, Some(path))
    }

    pub fn parse(text: &str, path: Option<&Path>) -> Result<Self, CliError> {
        let where_ = |n: usize| match path {
            Some(p) => format!("{}:{n}", p.display()),
            None => format!("line {n}"),
        };
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("{}: expected `key = value`", where_(i + 1))))?;
            let key = k.trim().replace('_', "-");
            if key.is_empty() {
                return Err(CliError::Usage(format!("{}: empty key", where_(i + 1))));
            }
            if entries.insert(key.clone(), (i + 1, v.trim().to_string())).is_some() {
                return Err(CliError::Usage(format!("{}: duplicate key `{key}`", where_(i + 1))));
            }
        }
        Ok(Self { path: path.map(Path::to_path_buf), entries })
    }

    fn location(&self, line: usize) -> String {
        match &self.path {
            Some(p) => format!("{}:{line}", p.display()),
            None => format!("line {line}"),
        }
    }

    /// Removes `key` and parses it.
    pub fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("{}: bad value for `{key}`: {e}", self.location(line)))),
        }
    }

    /// Like [`ConfigFile::take`] with a custom parser.
    pub fn take_with<T>(&mut self, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<Option<T>, CliError> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, v)) => parse(&v)
                .map(Some)
                .map_err(|e| CliError::Usage(format!("{}: bad value for `{key}`: {e}", self.location(line)))),
        }
    }

    /// Fails on keys nobody asked for.
    pub fn finish(self) -> Result<(), CliError> {
        match self.entries.iter().next() {
            None => Ok(()),
            Some((k, (line, _))) => Err(CliError::Usage(format!("{}: unknown key `{k}`", self.location(*line)))),
        }
    }
}
