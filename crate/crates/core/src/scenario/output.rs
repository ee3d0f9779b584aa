use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::opexpr::{OutputFormat, ScenarioConfig};

use super::{scenario_name, RunError, ScenarioOutcome, ScenarioReport};

/// One CSV row; the column order is part of the output contract.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub t: f64,
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub mean_hrel0: f64,
    pub visibility: f64,
    pub norm_defect: f64,
}

/// Column-major curves, as written in JSON format.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Curves {
    pub t: Vec<f64>,
    pub mean_x: Vec<f64>,
    pub mean_p: Vec<f64>,
    pub var_x: Vec<f64>,
    pub mean_hrel0: Vec<f64>,
    pub visibility: Vec<f64>,
    pub norm_defect: Vec<f64>,
}

impl Curves {
    pub fn from_rows(rows: Vec<CurveRow>) -> Self {
        let mut c = Self::default();
        for r in rows {
            c.t.push(r.t);
            c.mean_x.push(r.mean_x);
            c.mean_p.push(r.mean_p);
            c.var_x.push(r.var_x);
            c.mean_hrel0.push(r.mean_hrel0);
            c.visibility.push(r.visibility);
            c.norm_defect.push(r.norm_defect);
        }
        c
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = CurveRow> + '_ {
        (0..self.len()).map(|i| CurveRow {
            t: self.t[i],
            mean_x: self.mean_x[i],
            mean_p: self.mean_p[i],
            var_x: self.var_x[i],
            mean_hrel0: self.mean_hrel0[i],
            visibility: self.visibility[i],
            norm_defect: self.norm_defect[i],
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputPaths {
    pub curves: PathBuf,
    pub report: PathBuf,
}

pub fn output_paths(cfg: &ScenarioConfig) -> OutputPaths {
    let name = scenario_name(cfg);
    let ext = match cfg.output.format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    };
    OutputPaths {
        curves: cfg.output.dir.join(format!("{name}.{ext}")),
        report: cfg.output.dir.join(format!("{name}.report.json")),
    }
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { context: format!("writing {}", path.display()), source }
}

pub fn write_curves(curves: &Curves, format: OutputFormat, path: &Path) -> Result<(), RunError> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_path(path).map_err(|e| RunError::Output(format!("{}: {e}", path.display())))?;
            for row in curves.rows() {
                w.serialize(row).map_err(|e| RunError::Output(e.to_string()))?;
            }
            w.flush().map_err(io(path))
        }
        OutputFormat::Json => {
            let text = serde_json::to_string_pretty(curves).map_err(|e| RunError::Output(e.to_string()))?;
            fs::write(path, text + "\n").map_err(io(path))
        }
    }
}

pub fn write_report(report: &ScenarioReport, path: &Path) -> Result<(), RunError> {
    let text = serde_json::to_string_pretty(report).map_err(|e| RunError::Output(e.to_string()))?;
    fs::write(path, text + "\n").map_err(io(path))
}

pub fn write_outputs(out: &ScenarioOutcome, paths: &OutputPaths) -> Result<(), RunError> {
    if let Some(dir) = paths.report.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io(dir))?;
    }
    write_curves(&out.curves, out.report.config.output.format, &paths.curves)?;
    write_report(&out.report, &paths.report)
}
