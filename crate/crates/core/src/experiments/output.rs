use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::grid_potential::SpatialGrid;
use crate::Result;

/// Floats in every artifact: 9 significant digits.
pub fn fmt_f(v: f64) -> String {
    format!("{v:.8e}")
}

/// Run directory writer; every method is a no-op without a directory.
#[derive(Debug, Clone)]
pub struct RunDir {
    path: Option<PathBuf>,
}

impl RunDir {
    pub fn new(path: Option<&Path>) -> Result<Self> {
        if let Some(p) = path {
            fs::create_dir_all(p)?;
        }
        Ok(Self {
            path: path.map(Path::to_path_buf),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn is_enabled(&self) -> bool {
        self.path.is_some()
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<()> {
        if let Some(p) = &self.path {
            fs::write(p.join(name), text)?;
        }
        Ok(())
    }

    pub fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<()> {
        if let Some(p) = &self.path {
            fs::write(p.join(name), bytes)?;
        }
        Ok(())
    }

    /// One header line, then one row per entry.
    pub fn write_csv<R: AsRef<[f64]>>(&self, name: &str, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<()> {
        if self.path.is_none() {
            return Ok(());
        }
        let mut s = header.join(",");
        s.push('\n');
        for row in rows {
            let cells: Vec<String> = row.as_ref().iter().map(|v| fmt_f(*v)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        self.write_text(name, &s)
    }

    /// x, re, im for each field.
    pub fn write_fields(&self, name: &str, grid: &SpatialGrid, labels: &[&str], fields: &[&[Complex64]]) -> Result<()> {
        if self.path.is_none() {
            return Ok(());
        }
        let mut header = vec!["x_nm".to_string()];
        for l in labels {
            header.push(format!("re_{l}"));
            header.push(format!("im_{l}"));
        }
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows = (0..grid.len()).map(|i| {
            let mut r = vec![grid.x(i)];
            for f in fields {
                r.push(f[i].re);
                r.push(f[i].im);
            }
            r
        });
        self.write_csv(name, &header, rows)
    }
}

/// Key-value summary lines.
#[derive(Debug, Clone, Default)]
pub struct Summary {
    text: String,
}

impl Summary {
    pub fn line(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.text, "{key} = {value}");
    }

    pub fn float(&mut self, key: &str, value: f64) {
        self.line(key, fmt_f(value));
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}
