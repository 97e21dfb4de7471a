//! Tab-separated text tables for trajectories, snapshots and summaries.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use wavepacket_core::{Grid, Snapshot, Trajectory};

pub const TIMESERIES_COLUMNS: [&str; 8] = [
    "t", "p1", "p2", "mean_x1", "mean_x2", "var_x1", "var_x2", "absorbed",
];

/// I/O failure with the offending path.
#[derive(Debug, thiserror::Error)]
#[error("{path}: {source}")]
pub struct OutputError {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

pub type OutputResult<T> = std::result::Result<T, OutputError>;

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> OutputError + '_ {
    move |source| OutputError {
        path: path.to_path_buf(),
        source,
    }
}

/// Twelve significant digits.
pub fn fmt12(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.11e}")
    } else {
        format!("{v}")
    }
}

/// Header plus rows of a table, every value with twelve significant digits.
pub fn render_table(columns: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = columns.join("\t");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| fmt12(*v)).collect();
        out.push_str(&cells.join("\t"));
        out.push('\n');
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> OutputResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, text).map_err(io_err(path))
}

pub fn render_timeseries(traj: &Trajectory) -> String {
    let rows = (0..traj.len()).map(|k| {
        vec![
            traj.times[k],
            traj.p1[k],
            traj.p2[k],
            traj.mean_x1[k],
            traj.mean_x2[k],
            traj.var_x1[k],
            traj.var_x2[k],
            traj.absorbed[k],
        ]
    });
    render_table(&TIMESERIES_COLUMNS, rows)
}

pub fn write_timeseries(traj: &Trajectory, path: &Path) -> OutputResult<()> {
    write_text(path, &render_timeseries(traj))
}

/// Snapshot table. Positions use the shortest exact decimal form so the
/// column reproduces the grid nodes bit for bit.
pub fn render_snapshot(snapshot: &Snapshot, grid: &Grid, config_hash: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# t = {}", snapshot.t);
    let _ = writeln!(out, "# config_hash = {config_hash}");
    out.push_str("x\tdensity1\tdensity2\n");
    for (j, x) in grid.x().iter().enumerate() {
        let _ = writeln!(
            out,
            "{x:e}\t{}\t{}",
            fmt12(snapshot.density1[j]),
            fmt12(snapshot.density2[j])
        );
    }
    out
}

pub fn write_snapshot(snapshot: &Snapshot, grid: &Grid, config_hash: &str, path: &Path) -> OutputResult<()> {
    write_text(path, &render_snapshot(snapshot, grid, config_hash))
}

/// A parsed table: comment lines, column names and numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReadError {
    #[error(transparent)]
    Io(#[from] OutputError),
    #[error("{path}: line {line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

pub fn read_table(path: &Path) -> std::result::Result<Table, ReadError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let bad = |line: usize, message: String| ReadError::Format {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut comments = Vec::new();
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if let Some(c) = line.strip_prefix('#') {
            comments.push(c.trim().to_string());
            continue;
        }
        match &columns {
            None => columns = Some(line.split('\t').map(str::to_string).collect()),
            Some(cols) => {
                let row = line
                    .split('\t')
                    .map(|c| c.parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| bad(i + 1, e.to_string()))?;
                if row.len() != cols.len() {
                    return Err(bad(i + 1, format!("{} cells for {} columns", row.len(), cols.len())));
                }
                rows.push(row);
            }
        }
    }
    Ok(Table {
        comments,
        columns: columns.ok_or_else(|| bad(0, "missing header".into()))?,
        rows,
    })
}

/// Reads back a table written by [`write_timeseries`].
pub fn read_timeseries(path: &Path) -> std::result::Result<Trajectory, ReadError> {
    let table = read_table(path)?;
    if table.columns != TIMESERIES_COLUMNS {
        return Err(ReadError::Format {
            path: path.to_path_buf(),
            line: 1,
            message: format!("unexpected columns {:?}", table.columns),
        });
    }
    let col = |i: usize| table.rows.iter().map(|r| r[i]).collect::<Vec<_>>();
    Ok(Trajectory {
        times: col(0),
        p1: col(1),
        p2: col(2),
        mean_x1: col(3),
        mean_x2: col(4),
        var_x1: col(5),
        var_x2: col(6),
        absorbed: col(7),
        ..Trajectory::default()
    })
}
