//! CSV tables and the matplotlib script that renders them.
//!
//! Numbers are written as `{:.16e}` (17 significant digits), so identical
//! inputs give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use nalgebra::DMatrix;

/// Columns of named, unit-tagged numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        self.rows.push(row);
    }

    /// Long format `(x, y, value)` of a map whose rows follow `y` and
    /// columns follow `x`.
    pub fn long_format(columns: [&str; 3], x: &[f64], y: &[f64], values: &DMatrix<f64>) -> Self {
        let mut t = Self::new(&columns);
        for (i, yi) in y.iter().enumerate() {
            for (j, xj) in x.iter().enumerate() {
                t.push(vec![*xj, *yi, values[(i, j)]]);
            }
        }
        t
    }
}

pub fn export_csv(table: &Table, path: &Path) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "# {}", table.columns.join(","))?;
    for (r, row) in table.rows.iter().enumerate() {
        if row.len() != table.columns.len() {
            bail!("row {r} has {} values for {} columns", row.len(), table.columns.len());
        }
        for (c, v) in row.iter().enumerate() {
            if !v.is_finite() {
                bail!("refusing to write non-finite value {v} at row {r}, column `{}`", table.columns[c]);
            }
            if c > 0 {
                out.push(',');
            }
            write!(out, "{v:.16e}")?;
        }
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlotKind {
    /// Columns `ys` against column `x`.
    Lines { x: usize, ys: Vec<usize> },
    /// Long-format map: column 0 on the horizontal axis, column 1 on the
    /// vertical axis, column 2 as color.
    Heatmap,
    /// Printed, not plotted.
    Table,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub path: PathBuf,
    pub title: String,
    pub kind: PlotKind,
}

/// Writes `plot.py` next to the CSVs; one figure per artifact.
pub fn export_plot_script(artifacts: &[Artifact], out_dir: &Path) -> Result<PathBuf> {
    if artifacts.is_empty() {
        bail!("nothing to plot: the report lists no CSV files");
    }
    let mut py = String::from(
        "import numpy as np\nimport matplotlib.pyplot as plt\nfrom pathlib import Path\n\nhere = Path(__file__).parent\n\n\
def load(name):\n    path = here / name\n    with open(path) as fh:\n        header = fh.readline().lstrip('# ').strip().split(',')\n    \
return header, np.loadtxt(path, delimiter=',', comments='#', ndmin=2)\n\n",
    );
    for a in artifacts {
        if !a.path.is_file() {
            bail!("missing CSV {}", a.path.display());
        }
        let name = a.path.file_name().and_then(|n| n.to_str()).context("CSV name is not UTF-8")?;
        writeln!(py, "cols, data = load({name:?})")?;
        match &a.kind {
            PlotKind::Lines { x, ys } => {
                writeln!(py, "fig, ax = plt.subplots()")?;
                for y in ys {
                    writeln!(py, "ax.plot(data[:, {x}], data[:, {y}], label=cols[{y}])")?;
                }
                writeln!(py, "ax.set_xlabel(cols[{x}])\nax.legend()")?;
            }
            PlotKind::Heatmap => {
                writeln!(py, "xs, ys = np.unique(data[:, 0]), np.unique(data[:, 1])")?;
                writeln!(py, "z = data[:, 2].reshape(len(ys), len(xs))")?;
                writeln!(py, "fig, ax = plt.subplots()")?;
                writeln!(
                    py,
                    "im = ax.pcolormesh(xs, ys, z, shading='nearest')\nfig.colorbar(im, ax=ax, label=cols[2])"
                )?;
                writeln!(py, "ax.set_xlabel(cols[0])\nax.set_ylabel(cols[1])")?;
            }
            PlotKind::Table => {
                writeln!(py, "print({:?}, dict(zip(cols, data[0])))", a.title)?;
                continue;
            }
        }
        let png = Path::new(name).with_extension("png");
        writeln!(py, "ax.set_title({:?})\nfig.savefig(here / {:?}, dpi=150)\n", a.title, png.display().to_string())?;
    }
    py.push_str("plt.show()\n");
    let path = out_dir.join("plot.py");
    fs::write(&path, py).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}
