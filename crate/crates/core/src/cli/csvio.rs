use std::fs;
use std::path::Path;

use crate::cli::config::ExperimentConfig;
use crate::error::{Error, Result};

/// Commented header written above every table.
pub struct Meta<'a> {
    pub command: &'a str,
    pub config: &'a ExperimentConfig,
    pub extra: Vec<String>,
}

impl Meta<'_> {
    fn lines(&self) -> Vec<String> {
        let mut out = vec![
            format!("qgraph {}", env!("CARGO_PKG_VERSION")),
            format!("command: {}", self.command),
            format!("config_sha256: {}", self.config.hash()),
            format!("seed: {}", self.config.seed),
        ];
        out.extend(self.config.echo());
        out.extend(self.extra.iter().cloned());
        out
    }
}

pub fn write_table(path: &Path, meta: &Meta, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut buf = Vec::new();
    for line in meta.lines() {
        buf.extend_from_slice(format!("# {line}\n").as_bytes());
    }
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header).map_err(csv_err)?;
        for row in rows {
            w.write_record(row).map_err(csv_err)?;
        }
        w.flush()?;
    }
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, buf).map_err(|e| Error::from(e).context(format!("writing {}", path.display())))
}

fn csv_err(e: csv::Error) -> Error {
    Error::invalid(format!("csv: {e}"))
}

/// Header and rows, skipping `#` comment lines.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::from(e).context(format!("reading {}", path.display())))?;
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(csv_err)?.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

/// Column accessor by name.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub source: String,
}

impl Table {
    pub fn read(path: &Path) -> Result<Table> {
        let (header, rows) = read_table(path)?;
        Ok(Table { header, rows, source: path.display().to_string() })
    }

    pub fn col(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::invalid(format!("{} has no column `{name}`", self.source)))
    }

    pub fn get<T: std::str::FromStr>(&self, row: usize, col: usize) -> Result<T> {
        let s = &self.rows[row][col];
        s.parse().map_err(|_| Error::invalid(format!("{} row {}: cannot parse `{s}`", self.source, row + 1)))
    }
}
