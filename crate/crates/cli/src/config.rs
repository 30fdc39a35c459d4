//! Experiment configuration: a TOML document describing one run or a sweep.

use giant_sse::coupling::unit_rate_strength;
use giant_sse::{CouplingDistribution, StateVector, C};
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sse,
    Master,
    Lindblad,
    Dressed1,
    Dressed2,
}

impl Method {
    pub fn is_dressed(self) -> bool {
        matches!(self, Method::Dressed1 | Method::Dressed2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Initial {
    #[serde(rename = "eg")]
    Eg,
    #[serde(rename = "ge")]
    Ge,
    #[serde(rename = "ee")]
    Ee,
    #[serde(rename = "gg")]
    Gg,
    #[serde(rename = "bell+")]
    BellPlus,
    #[serde(rename = "bell-")]
    BellMinus,
    #[serde(rename = "custom")]
    Custom,
}

/// Comb normalization Ñ: `"count"` (Ñ = m), `"sqrt"` (Ñ = √m) or a number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Normalization {
    Value(f64),
    Rule(NormRule),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormRule {
    Count,
    Sqrt,
}

impl Default for Normalization {
    fn default() -> Self {
        Normalization::Rule(NormRule::Count)
    }
}

impl Normalization {
    fn resolve(self, m: usize) -> f64 {
        match self {
            Normalization::Value(v) => v,
            Normalization::Rule(NormRule::Count) => m as f64,
            Normalization::Rule(NormRule::Sqrt) => (m as f64).sqrt(),
        }
    }
}

/// One atom's coupling profile. Lengths in units of λ = c/ω.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AtomSpec {
    Point {
        x: f64,
        #[serde(default)]
        strength: Option<f64>,
    },
    Comb {
        points: Vec<f64>,
        #[serde(default)]
        normalization: Normalization,
        #[serde(default)]
        strength: Option<f64>,
    },
    /// `count` evenly spaced points starting at `start`, or (atom b only)
    /// `gap_after_a` beyond the last point of atom a.
    CombArray {
        count: usize,
        spacing: f64,
        #[serde(default)]
        start: Option<f64>,
        #[serde(default)]
        gap_after_a: Option<f64>,
        #[serde(default)]
        normalization: Normalization,
        #[serde(default)]
        strength: Option<f64>,
    },
    Gaussian {
        center: f64,
        width: f64,
        #[serde(default)]
        strength: Option<f64>,
    },
    DoubleGaussian {
        centers: [f64; 2],
        width: f64,
        #[serde(default)]
        strength: Option<f64>,
    },
}

impl AtomSpec {
    fn strength(&self) -> f64 {
        let s = match self {
            AtomSpec::Point { strength, .. }
            | AtomSpec::Comb { strength, .. }
            | AtomSpec::CombArray { strength, .. }
            | AtomSpec::Gaussian { strength, .. }
            | AtomSpec::DoubleGaussian { strength, .. } => *strength,
        };
        s.unwrap_or_else(unit_rate_strength::<f64>)
    }

    pub fn width(&self) -> Option<f64> {
        match self {
            AtomSpec::Gaussian { width, .. } | AtomSpec::DoubleGaussian { width, .. } => Some(*width),
            _ => None,
        }
    }

    fn set_width(&mut self, w: f64) -> bool {
        match self {
            AtomSpec::Gaussian { width, .. } | AtomSpec::DoubleGaussian { width, .. } => {
                *width = w;
                true
            }
            _ => false,
        }
    }

    fn set_count(&mut self, m: usize) -> bool {
        match self {
            AtomSpec::CombArray { count, .. } => {
                *count = m;
                true
            }
            _ => false,
        }
    }

    fn last_point(&self, other_last: Option<f64>) -> Option<f64> {
        match self {
            AtomSpec::CombArray { count, spacing, .. } => {
                let start = self.array_start(other_last)?;
                Some(start + (*count as f64 - 1.0) * spacing)
            }
            AtomSpec::Comb { points, .. } => points.iter().cloned().reduce(f64::max),
            AtomSpec::Point { x, .. } => Some(*x),
            _ => None,
        }
    }

    fn array_start(&self, a_last: Option<f64>) -> Option<f64> {
        match self {
            AtomSpec::CombArray { start, gap_after_a, .. } => match (start, gap_after_a) {
                (Some(s), None) => Some(*s),
                (None, Some(g)) => a_last.map(|l| l + g),
                _ => None,
            },
            _ => None,
        }
    }

    fn build(&self, a_last: Option<f64>, shift: f64) -> giant_sse::Result<CouplingDistribution<f64>> {
        let g0 = self.strength();
        let d = match self {
            AtomSpec::Point { x, .. } => CouplingDistribution::point(*x, g0)?,
            AtomSpec::Comb { points, normalization, .. } => {
                CouplingDistribution::comb_normalized(points.clone(), normalization.resolve(points.len()), g0)?
            }
            AtomSpec::CombArray { count, spacing, normalization, .. } => {
                let start = self
                    .array_start(a_last)
                    .ok_or_else(|| giant_sse::Error::Config("comb array needs exactly one of start / gap_after_a".into()))?;
                let points = (0..*count).map(|i| start + i as f64 * spacing).collect();
                CouplingDistribution::comb_normalized(points, normalization.resolve(*count), g0)?
            }
            AtomSpec::Gaussian { center, width, .. } => CouplingDistribution::gaussian(*center, *width, g0)?,
            AtomSpec::DoubleGaussian { centers, width, .. } => {
                CouplingDistribution::double_gaussian(*centers, *width, g0)?
            }
        };
        Ok(if shift != 0.0 { d.translated(shift) } else { d })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atoms {
    pub a: AtomSpec,
    pub b: AtomSpec,
}

/// Mode grid. Omitted fields are derived: `k_max` from the narrowest
/// Gaussian width (`3.5/s`, clamped to [5, 100]), `modes` from the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub k_max: Option<f64>,
    #[serde(default)]
    pub modes: Option<usize>,
    /// Margin of the half recurrence time over `t_max` when `modes` is derived.
    #[serde(default = "default_horizon_factor")]
    pub horizon_factor: f64,
}

fn default_horizon_factor() -> f64 {
    2.0
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { k_max: None, modes: None, horizon_factor: default_horizon_factor() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub t_max: f64,
    #[serde(default)]
    pub dt: Option<f64>,
    /// Write every `output_stride`-th grid time.
    #[serde(default = "one")]
    pub output_stride: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub trajectories: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    42
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self { trajectories: 2000, seed: default_seed() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BathSpec {
    Vacuum,
    Thermal {
        beta: f64,
        #[serde(default)]
        omega_floor: Option<f64>,
    },
    /// Squeezed vacuum, constant `r` or a band `r·[e^{-(k∓k_c)²/2w²}]`.
    Squeezed {
        r: f64,
        #[serde(default)]
        band_center: Option<f64>,
        #[serde(default)]
        band_width: Option<f64>,
    },
}

/// Sweep axis: explicit values or `{ start, stop, count }` (stop excluded
/// unless `inclusive = true`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Values(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        count: usize,
        #[serde(default)]
        inclusive: bool,
    },
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Axis::Values(v) => v.clone(),
            Axis::Range { start, stop, count, inclusive } => {
                let div = if *inclusive { count.saturating_sub(1).max(1) } else { *count } as f64;
                (0..*count).map(|i| start + (stop - start) * i as f64 / div).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Δx̄_ab: atom b is translated by each value (λ units).
    #[serde(default)]
    pub offset: Option<Axis>,
    /// Width s of both (Gaussian) atoms.
    #[serde(default)]
    pub width: Option<Axis>,
    /// Point count m of both comb arrays.
    #[serde(default)]
    pub count: Option<Axis>,
    /// Cross-section time for the aggregated metrics.
    #[serde(default)]
    pub probe_time: Option<f64>,
}

impl SweepSpec {
    pub fn is_empty(&self) -> bool {
        self.offset.is_none() && self.width.is_none() && self.count.is_none()
    }
}

/// Full experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub method: Method,
    pub initial: Initial,
    /// Amplitudes `[re, im]` in the order ee, eg, ge, gg; used with `initial = "custom"`.
    #[serde(default)]
    pub custom_state: Option<Vec<[f64; 2]>>,
    #[serde(default = "unit_omega")]
    pub omega: [f64; 2],
    pub atoms: Atoms,
    #[serde(default)]
    pub grid: GridSpec,
    pub time: TimeSpec,
    #[serde(default)]
    pub ensemble: Option<EnsembleSpec>,
    #[serde(default)]
    pub bath: Option<BathSpec>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    /// Mode cap for the two-excitation solver.
    #[serde(default = "default_mode_cap")]
    pub mode_cap: usize,
}

fn unit_omega() -> [f64; 2] {
    [1.0, 1.0]
}

fn default_mode_cap() -> usize {
    giant_sse::oracle::DEFAULT_DOUBLE_MODE_CAP
}

/// Axis values that produced one cell of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CellAxes {
    pub offset: Option<f64>,
    pub width: Option<f64>,
    pub count: Option<usize>,
}

/// A config with every derived quantity filled in.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub axes: CellAxes,
    pub a: CouplingDistribution<f64>,
    pub b: CouplingDistribution<f64>,
    pub k_max: f64,
    pub modes: usize,
    pub dt: f64,
    pub initial: StateVector<f64>,
}

fn field_err(path: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation { path: path.to_string(), message: msg.to_string() }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn initial_state(&self) -> Result<StateVector<f64>> {
        Ok(match self.initial {
            Initial::Eg => StateVector::eg(),
            Initial::Ge => StateVector::ge(),
            Initial::Ee => StateVector::ee(),
            Initial::Gg => StateVector::gg(),
            Initial::BellPlus => StateVector::bell(1.0),
            Initial::BellMinus => StateVector::bell(-1.0),
            Initial::Custom => {
                let v = self
                    .custom_state
                    .as_ref()
                    .ok_or_else(|| field_err("custom_state", "required when initial = \"custom\""))?;
                if v.len() != 4 {
                    return Err(field_err("custom_state", format!("expected 4 amplitudes, got {}", v.len())));
                }
                let amps = [0, 1, 2, 3].map(|i| C::new(v[i][0], v[i][1]));
                let s = StateVector::new(amps);
                let n = s.norm_sqr();
                if !(n > 1e-12) || !n.is_finite() {
                    return Err(field_err("custom_state", "state has zero or non-finite norm"));
                }
                s.scale(C::new(1.0 / n.sqrt(), 0.0))
            }
        })
    }

    /// Checks everything that can be checked without building a grid.
    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(field_err("name", "must not be empty"));
        }
        if !(self.time.t_max > 0.0) || !self.time.t_max.is_finite() {
            return Err(field_err("time.t_max", "must be positive and finite"));
        }
        if let Some(dt) = self.time.dt {
            if !(dt > 0.0) || dt > self.time.t_max {
                return Err(field_err("time.dt", "must lie in (0, t_max]"));
            }
        }
        if self.time.output_stride == 0 {
            return Err(field_err("time.output_stride", "must be at least 1"));
        }
        if let Some(k) = self.grid.k_max {
            if !(k > 0.0) || !k.is_finite() {
                return Err(field_err("grid.k_max", "must be positive and finite"));
            }
        }
        if let Some(n) = self.grid.modes {
            if n < 2 || n % 2 != 0 {
                return Err(field_err("grid.modes", "must be even and at least 2"));
            }
        }
        if !(self.grid.horizon_factor >= 1.0) {
            return Err(field_err("grid.horizon_factor", "must be at least 1"));
        }
        if self.omega.iter().any(|w| !(*w > 0.0)) {
            return Err(field_err("omega", "transition frequencies must be positive"));
        }
        for (path, spec) in [("atoms.a", &self.atoms.a), ("atoms.b", &self.atoms.b)] {
            check_atom(path, spec)?;
        }
        if matches!(self.atoms.a, AtomSpec::CombArray { gap_after_a: Some(_), .. }) {
            return Err(field_err("atoms.a.gap_after_a", "only atom b can be placed after atom a"));
        }
        let psi = self.initial_state()?;
        match self.method {
            Method::Dressed1 if psi.amps[0].norm_sqr() > 0.0 => {
                return Err(field_err("initial", "dressed1 needs a state without |ee⟩ component"));
            }
            Method::Dressed2 if self.initial != Initial::Ee => {
                return Err(field_err("initial", "dressed2 starts from |ee⟩"));
            }
            _ => {}
        }
        if (self.method.is_dressed() || self.method == Method::Lindblad) && !matches!(self.bath, None | Some(BathSpec::Vacuum)) {
            return Err(field_err("bath", format!("method {:?} supports only the vacuum", self.method)));
        }
        if self.method == Method::Master && matches!(self.bath, Some(BathSpec::Squeezed { .. })) {
            return Err(field_err("bath", "the squeezed bath has no master equation; use method = \"sse\""));
        }
        if self.method == Method::Sse {
            let e = self.ensemble.as_ref().ok_or_else(|| field_err("ensemble", "required for method = \"sse\""))?;
            if e.trajectories < 2 {
                return Err(field_err("ensemble.trajectories", "must be at least 2"));
            }
        }
        match &self.bath {
            Some(BathSpec::Thermal { beta, omega_floor }) => {
                if !(*beta > 0.0) {
                    return Err(field_err("bath.beta", "must be positive"));
                }
                if let Some(f) = omega_floor {
                    if !(*f > 0.0) {
                        return Err(field_err("bath.omega_floor", "must be positive"));
                    }
                }
            }
            Some(BathSpec::Squeezed { r, band_center, band_width }) => {
                if !r.is_finite() {
                    return Err(field_err("bath.r", "must be finite"));
                }
                if band_center.is_some() != band_width.is_some() {
                    return Err(field_err("bath", "band_center and band_width go together"));
                }
                if let Some(w) = band_width {
                    if !(*w > 0.0) {
                        return Err(field_err("bath.band_width", "must be positive"));
                    }
                }
            }
            _ => {}
        }
        if let Some(sw) = &self.sweep {
            for (name, axis) in [("offset", &sw.offset), ("width", &sw.width), ("count", &sw.count)] {
                if let Some(ax) = axis {
                    let v = ax.values();
                    if v.is_empty() {
                        return Err(field_err(&format!("sweep.{name}"), "axis is empty"));
                    }
                    if v.iter().any(|x| !x.is_finite()) {
                        return Err(field_err(&format!("sweep.{name}"), "values must be finite"));
                    }
                }
            }
            if let Some(ax) = &sw.width {
                if ax.values().iter().any(|w| !(*w > 0.0)) {
                    return Err(field_err("sweep.width", "widths must be positive"));
                }
                if self.atoms.a.width().is_none() || self.atoms.b.width().is_none() {
                    return Err(field_err("sweep.width", "both atoms must be Gaussian profiles"));
                }
            }
            if let Some(ax) = &sw.count {
                if ax.values().iter().any(|m| *m < 1.0 || m.fract() != 0.0) {
                    return Err(field_err("sweep.count", "counts must be positive integers"));
                }
                let arrays = [&self.atoms.a, &self.atoms.b].iter().all(|s| matches!(s, AtomSpec::CombArray { .. }));
                if !arrays {
                    return Err(field_err("sweep.count", "both atoms must be comb arrays"));
                }
            }
            if let Some(t) = sw.probe_time {
                if !(t >= 0.0 && t <= self.time.t_max) {
                    return Err(field_err("sweep.probe_time", "must lie in [0, t_max]"));
                }
            }
        }
        Ok(())
    }

    /// Cartesian product of the sweep axes (a single cell without a sweep).
    pub fn cells(&self) -> Vec<CellAxes> {
        let sw = self.sweep.clone().unwrap_or_default();
        let opt = |a: &Option<Axis>| a.as_ref().map(|a| a.values().into_iter().map(Some).collect()).unwrap_or(vec![None]);
        let counts: Vec<Option<f64>> = opt(&sw.count);
        let widths: Vec<Option<f64>> = opt(&sw.width);
        let offsets: Vec<Option<f64>> = opt(&sw.offset);
        let mut out = Vec::new();
        for &count in &counts {
            for &width in &widths {
                for &offset in &offsets {
                    out.push(CellAxes { offset, width, count: count.map(|m| m as usize) });
                }
            }
        }
        out
    }

    /// Applies one sweep cell and derives grid and step sizes.
    pub fn resolve(&self, axes: CellAxes) -> Result<Resolved> {
        self.validate()?;
        let mut cfg = self.clone();
        if let Some(w) = axes.width {
            cfg.atoms.a.set_width(w);
            cfg.atoms.b.set_width(w);
        }
        if let Some(m) = axes.count {
            cfg.atoms.a.set_count(m);
            cfg.atoms.b.set_count(m);
        }
        let a = cfg.atoms.a.build(None, 0.0).map_err(|e| field_err("atoms.a", e))?;
        let a_last = cfg.atoms.a.last_point(None);
        let b = cfg.atoms.b.build(a_last, axes.offset.unwrap_or(0.0)).map_err(|e| field_err("atoms.b", e))?;

        let k_max = match cfg.grid.k_max {
            Some(k) => k,
            None => {
                let widths: Vec<f64> = [&cfg.atoms.a, &cfg.atoms.b].iter().filter_map(|s| s.width()).collect();
                if widths.len() < 2 {
                    return Err(field_err("grid.k_max", "required unless both atoms are Gaussian profiles"));
                }
                let s = widths.iter().cloned().fold(f64::INFINITY, f64::min);
                (3.5 / s).clamp(5.0, 100.0)
            }
        };
        let dt = match cfg.time.dt {
            Some(dt) => dt,
            None if cfg.method.is_dressed() => (0.05 / k_max).min(0.005),
            None => (0.1 / k_max).min(0.005),
        };
        let t_max = cfg.time.t_max;
        let modes = match cfg.grid.modes {
            Some(n) => n,
            None => {
                let n = (cfg.grid.horizon_factor * 2.0 * k_max * t_max / std::f64::consts::PI).ceil() as usize + 2;
                (n + n % 2).max(20)
            }
        };
        if cfg.method == Method::Dressed2 && modes > cfg.mode_cap {
            return Err(CliError::Core(giant_sse::Error::MemoryCap {
                needed: modes * (modes + 1) / 2,
                cap: cfg.mode_cap * (cfg.mode_cap + 1) / 2,
            }));
        }
        let initial = cfg.initial_state()?;
        Ok(Resolved { config: cfg, axes, a, b, k_max, modes, dt, initial })
    }
}

fn check_atom(path: &str, spec: &AtomSpec) -> Result<()> {
    let bad_norm = |n: &Normalization| matches!(n, Normalization::Value(v) if !(*v > 0.0));
    match spec {
        AtomSpec::Comb { points, normalization, .. } => {
            if points.is_empty() {
                return Err(field_err(&format!("{path}.points"), "needs at least one point"));
            }
            if bad_norm(normalization) {
                return Err(field_err(&format!("{path}.normalization"), "must be positive"));
            }
        }
        AtomSpec::CombArray { count, spacing, start, gap_after_a, normalization, .. } => {
            if *count == 0 {
                return Err(field_err(&format!("{path}.count"), "must be at least 1"));
            }
            if !spacing.is_finite() {
                return Err(field_err(&format!("{path}.spacing"), "must be finite"));
            }
            if start.is_some() == gap_after_a.is_some() {
                return Err(field_err(path, "give exactly one of start / gap_after_a"));
            }
            if bad_norm(normalization) {
                return Err(field_err(&format!("{path}.normalization"), "must be positive"));
            }
        }
        AtomSpec::Gaussian { width, .. } | AtomSpec::DoubleGaussian { width, .. } => {
            if !(*width > 0.0) {
                return Err(field_err(&format!("{path}.width"), "must be positive"));
            }
        }
        AtomSpec::Point { .. } => {}
    }
    let s = spec.strength();
    if !s.is_finite() || s < 0.0 {
        return Err(field_err(&format!("{path}.strength"), "must be finite and non-negative"));
    }
    Ok(())
}
