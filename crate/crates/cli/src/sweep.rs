//! Cartesian sweeps over geometry axes and the scalar metrics built on them.

use rayon::prelude::*;
use std::path::Path;

use crate::config::{CellAxes, ExperimentConfig};
use crate::output::{self, RunRecord};
use crate::run::{self, RunOutput};
use crate::{CliError, Result};

/// Concurrence history of one cell.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub axes: CellAxes,
    pub times: Vec<f64>,
    pub concurrence: Vec<f64>,
    pub record: RunRecord,
}

impl CellResult {
    pub fn peak(&self) -> f64 {
        self.concurrence.iter().cloned().fold(0.0, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.concurrence.iter().sum::<f64>() / self.concurrence.len() as f64
    }

    /// Concurrence at the output time nearest to `t`.
    pub fn at(&self, t: f64) -> f64 {
        let dt = if self.times.len() > 1 { self.times[1] - self.times[0] } else { 1.0 };
        let i = ((t / dt).round() as usize).min(self.concurrence.len() - 1);
        self.concurrence[i]
    }
}

/// Metrics over the offset axis for one (count, width) group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupMetrics {
    pub count: Option<usize>,
    pub width: Option<f64>,
    pub cells: usize,
    pub probe_time: Option<f64>,
    /// `(max − min)/(max + min)` of C at the probe time across offsets.
    pub contrast: Option<f64>,
    /// Population variance of C at the probe time across offsets.
    pub variance: Option<f64>,
    pub probe_max: Option<f64>,
    /// Largest C over all times and offsets.
    pub peak: f64,
    /// C averaged over times and offsets.
    pub mean: f64,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub cells: Vec<CellResult>,
    pub groups: Vec<GroupMetrics>,
}

impl SweepOutput {
    pub fn group(&self, count: Option<usize>, width: Option<f64>) -> Option<&GroupMetrics> {
        self.groups.iter().find(|g| g.count == count && g.width == width)
    }
}

pub fn fringe_contrast(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if max + min > 0.0 {
        (max - min) / (max + min)
    } else {
        0.0
    }
}

pub fn variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n
}

fn group_metrics(cells: &[CellResult], probe: Option<f64>) -> Vec<GroupMetrics> {
    let mut keys: Vec<(Option<usize>, Option<f64>)> = Vec::new();
    for c in cells {
        let k = (c.axes.count, c.axes.width);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(count, width)| {
            let members: Vec<&CellResult> =
                cells.iter().filter(|c| c.axes.count == count && c.axes.width == width).collect();
            let at: Option<Vec<f64>> = probe.map(|t| members.iter().map(|c| c.at(t)).collect());
            GroupMetrics {
                count,
                width,
                cells: members.len(),
                probe_time: probe,
                contrast: at.as_deref().map(fringe_contrast),
                variance: at.as_deref().map(variance),
                probe_max: at.as_deref().map(|v| v.iter().cloned().fold(0.0, f64::max)),
                peak: members.iter().map(|c| c.peak()).fold(0.0, f64::max),
                mean: members.iter().map(|c| c.mean()).sum::<f64>() / members.len() as f64,
            }
        })
        .collect()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Runs every cell (in parallel), optionally writing per-cell outputs and
/// the aggregated `surface.csv` / `metrics.csv` under `dir`.
pub fn sweep(cfg: &ExperimentConfig, dir: Option<&Path>) -> Result<SweepOutput> {
    cfg.validate()?;
    let axes = cfg.cells();
    let results: Vec<Result<CellResult>> = axes
        .par_iter()
        .enumerate()
        .map(|(i, &ax)| {
            let wrap = |e: CliError| CliError::Cell { index: i, source: Box::new(e) };
            let r = cfg.resolve(ax).map_err(wrap)?;
            let out: RunOutput = run::run(&r).map_err(wrap)?;
            if let Some(d) = dir {
                output::write_run(&d.join("cells").join(format!("{i:04}")), cfg, &r, &out).map_err(wrap)?;
            }
            Ok(CellResult {
                axes: ax,
                times: out.series.times(),
                concurrence: out.concurrence().map_err(wrap)?,
                record: output::run_record(cfg, &r, &out).map_err(wrap)?,
            })
        })
        .collect();
    let cells = results.into_iter().collect::<Result<Vec<_>>>()?;
    let probe = cfg.sweep.as_ref().and_then(|s| s.probe_time);
    let groups = group_metrics(&cells, probe);

    if let Some(d) = dir {
        let mut rows = Vec::new();
        for (i, c) in cells.iter().enumerate() {
            for (t, v) in c.times.iter().zip(&c.concurrence) {
                rows.push(vec![
                    i.to_string(),
                    opt(c.axes.count),
                    opt(c.axes.width),
                    opt(c.axes.offset),
                    t.to_string(),
                    v.to_string(),
                ]);
            }
        }
        output::write_atomic(
            &d.join("surface.csv"),
            &output::table_csv(&["cell", "count", "width", "offset", "t", "concurrence"], &rows)?,
        )?;
        let rows: Vec<Vec<String>> = groups
            .iter()
            .map(|g| {
                vec![
                    opt(g.count),
                    opt(g.width),
                    g.cells.to_string(),
                    opt(g.probe_time),
                    opt(g.contrast),
                    opt(g.variance),
                    opt(g.probe_max),
                    g.peak.to_string(),
                    g.mean.to_string(),
                ]
            })
            .collect();
        output::write_atomic(
            &d.join("metrics.csv"),
            &output::table_csv(
                &["count", "width", "cells", "probe_time", "contrast", "variance", "probe_max", "peak", "mean"],
                &rows,
            )?,
        )?;
        #[derive(serde::Serialize)]
        struct SweepManifest<'a> {
            name: &'a str,
            code_version: &'a str,
            config_hash: String,
            cells: usize,
            elapsed_seconds: Vec<f64>,
            excluded_trajectories: usize,
            config: &'a ExperimentConfig,
        }
        let m = SweepManifest {
            name: &cfg.name,
            code_version: env!("CARGO_PKG_VERSION"),
            config_hash: output::config_hash(cfg),
            cells: cells.len(),
            elapsed_seconds: cells.iter().map(|c| c.record.elapsed_seconds).collect(),
            excluded_trajectories: cells.iter().map(|c| c.record.excluded_trajectories).sum(),
            config: cfg,
        };
        output::write_atomic(&d.join("manifest.toml"), &output::manifest_toml(&m)?)?;
    }
    Ok(SweepOutput { cells, groups })
}
