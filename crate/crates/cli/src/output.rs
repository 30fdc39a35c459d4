//! CSV tables, run manifests and atomic file output.

use giant_sse::{CorrelationKernel, DensitySeries, Atom};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

use crate::config::{CellAxes, ExperimentConfig, Resolved};
use crate::run::RunOutput;
use crate::{CliError, Result};

/// Environment variable that overrides the output root.
pub const OUTPUT_DIR_ENV: &str = "GIANT_SSE_OUTPUT_DIR";

pub fn output_root(cli_value: Option<&Path>) -> PathBuf {
    if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV) {
        return PathBuf::from(dir);
    }
    cli_value.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("runs"))
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes `bytes` to a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    std::fs::write(&tmp, bytes).map_err(|e| io_err(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let digest = Sha256::digest(cfg.to_toml().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::Io(e.to_string()))?;
    for row in rows {
        w.write_record(&row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

/// Time series table. `t` is ωt; `rho_eg_ge` and `rho_ee_gg` are the
/// coherences split into re/im; `se_*` columns are ensemble standard errors.
pub fn series_csv(series: &DensitySeries<f64>) -> Result<Vec<u8>> {
    let mut header = vec![
        "t", "p_ee", "p_eg", "p_ge", "p_gg", "re_rho_eg_ge", "im_rho_eg_ge", "re_rho_ee_gg", "im_rho_ee_gg",
        "concurrence", "trace",
    ];
    let with_se = series.std_errors.is_some();
    if with_se {
        header.extend(["se_p_ee", "se_p_eg", "se_p_ge", "se_p_gg", "se_re_rho_eg_ge", "se_im_rho_eg_ge"]);
    }
    let conc = series.concurrence()?;
    let rows = series.states.iter().enumerate().map(|(i, rho)| {
        let m = &rho.op;
        let mut row = vec![
            rho.time.to_string(),
            m[(0, 0)].re.to_string(),
            m[(1, 1)].re.to_string(),
            m[(2, 2)].re.to_string(),
            m[(3, 3)].re.to_string(),
            m[(1, 2)].re.to_string(),
            m[(1, 2)].im.to_string(),
            m[(0, 3)].re.to_string(),
            m[(0, 3)].im.to_string(),
            conc[i].to_string(),
            rho.trace().to_string(),
        ];
        if let Some(se) = &series.std_errors {
            let s = &se[i];
            row.extend(
                [s[(0, 0)].re, s[(1, 1)].re, s[(2, 2)].re, s[(3, 3)].re, s[(1, 2)].re, s[(1, 2)].im]
                    .iter()
                    .map(|x| x.to_string()),
            );
        }
        row
    });
    csv_bytes(&header, rows)
}

/// Kernel table: τ (ωτ) and re/im/abs of each α_{μν}(τ).
pub fn kernel_csv(k: &CorrelationKernel<f64>) -> Result<Vec<u8>> {
    let pairs = [(Atom::A, Atom::A, "aa"), (Atom::A, Atom::B, "ab"), (Atom::B, Atom::A, "ba"), (Atom::B, Atom::B, "bb")];
    let mut header = vec!["tau".to_string()];
    for (_, _, n) in pairs {
        header.extend([format!("re_alpha_{n}"), format!("im_alpha_{n}"), format!("abs_alpha_{n}")]);
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = (0..k.len()).map(|i| {
        let mut row = vec![(k.dt() * i as f64).to_string()];
        for (mu, nu, _) in pairs {
            let z = k.at(mu, nu, i);
            row.extend([z.re.to_string(), z.im.to_string(), z.norm().to_string()]);
        }
        row
    });
    csv_bytes(&header, rows)
}

/// Generic table writer for surfaces and metrics.
pub fn table_csv(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    csv_bytes(header, rows.iter().cloned())
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub name: String,
    pub method: String,
    pub code_version: String,
    pub config_hash: String,
    pub axes: CellAxes,
    pub k_max: f64,
    pub modes: usize,
    pub dt: f64,
    pub elapsed_seconds: f64,
    pub trajectories: usize,
    pub excluded_trajectories: usize,
    pub max_concurrence: f64,
    pub final_trace: f64,
    /// Largest ensemble standard error of any population (0 for deterministic methods).
    pub max_population_error: f64,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub run: RunRecord,
    pub config: &'a ExperimentConfig,
}

pub fn run_record(base: &ExperimentConfig, r: &Resolved, out: &RunOutput) -> Result<RunRecord> {
    let conc = out.concurrence()?;
    let max_pop_err = out
        .series
        .std_errors
        .as_ref()
        .map(|v| v.iter().flat_map(|s| (0..4).map(move |i| s[(i, i)].re)).fold(0.0, f64::max))
        .unwrap_or(0.0);
    Ok(RunRecord {
        name: base.name.clone(),
        method: format!("{:?}", base.method).to_lowercase(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config_hash(base),
        axes: r.axes,
        k_max: r.k_max,
        modes: r.modes,
        dt: r.dt,
        elapsed_seconds: out.elapsed.as_secs_f64(),
        trajectories: out.trajectories,
        excluded_trajectories: out.excluded,
        max_concurrence: conc.iter().cloned().fold(0.0, f64::max),
        final_trace: out.series.last().trace(),
        max_population_error: max_pop_err,
    })
}

pub fn manifest_toml<T: Serialize>(m: &T) -> Result<Vec<u8>> {
    toml::to_string(m).map(String::into_bytes).map_err(|e| CliError::Io(e.to_string()))
}

/// Writes `series.csv` and `manifest.toml` for one run into `dir`.
pub fn write_run(dir: &Path, base: &ExperimentConfig, r: &Resolved, out: &RunOutput) -> Result<()> {
    write_atomic(&dir.join("series.csv"), &series_csv(&out.series)?)?;
    let manifest = Manifest { run: run_record(base, r, out)?, config: &r.config };
    write_atomic(&dir.join("manifest.toml"), &manifest_toml(&manifest)?)
}
