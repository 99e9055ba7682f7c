use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// Shortest text that parses back to the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn joined<T: Display>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// Comma-separated table with a header row. Fields never contain commas, quotes or newlines, so
/// no quoting is needed.
#[derive(Debug, Default)]
pub struct Table {
    text: String,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut t = Self::default();
        t.row(header.iter().map(|s| s.to_string()));
        t
    }

    pub fn row(&mut self, fields: impl IntoIterator<Item = String>) {
        let line = fields.into_iter().collect::<Vec<_>>().join(",");
        self.text.push_str(&line);
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn partial_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".partial");
    PathBuf::from(p)
}

/// Writes `<path>.partial`, then renames it over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = partial_path(path);
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming {} to {}", tmp.display(), path.display()))
}

/// Leaves output at `<path>.partial` only; used when a run fails part-way.
pub fn write_partial(path: &Path, contents: &str) -> Result<PathBuf> {
    let tmp = partial_path(path);
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    Ok(tmp)
}
