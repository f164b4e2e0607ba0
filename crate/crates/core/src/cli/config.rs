use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::{ExactSolution, KillingKind};
use crate::perron::{AsymptoticSetup, BoundaryDatum};
use crate::{Error, Result};

/// What a run does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    SolveAsymptotic,
    SolveDirichlet,
    Barrier,
    VerifyExact,
    OracleMc,
    Compare,
}

impl Mode {
    pub fn solves(self) -> bool {
        matches!(self, Mode::SolveAsymptotic | Mode::SolveDirichlet | Mode::Compare)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    #[serde(rename = "L", default = "default_half_width")]
    pub half_width: f64,
    #[serde(default = "default_y_min")]
    pub y_min: f64,
    #[serde(default = "default_y_max")]
    pub y_max: f64,
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self { half_width: default_half_width(), y_min: default_y_min(), y_max: default_y_max() }
    }
}

fn default_half_width() -> f64 {
    1.0
}
fn default_y_min() -> f64 {
    0.05
}
fn default_y_max() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iters: usize,
    pub max_sweeps: usize,
    /// Visit Perron balls in a seeded random order.
    pub shuffle: bool,
    /// Ball radius in grid cells (default: a quarter of the grid).
    pub ball_radius: Option<f64>,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self { tol: 1e-9, max_iters: 60, max_sweeps: 400, shuffle: false, ball_radius: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub csv: String,
    pub obj: String,
    pub report: String,
    /// Stack levels table (barrier mode).
    pub levels: String,
    /// Pasted stack profile (barrier mode).
    pub profile: String,
}

impl Default for OutputPaths {
    fn default() -> Self {
        Self {
            csv: "solution.csv".into(),
            obj: "graph.obj".into(),
            report: "report.json".into(),
            levels: "levels.csv".into(),
            profile: "profile.csv".into(),
        }
    }
}

/// A run description. Every key except `mode` has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(rename = "H", default)]
    pub h: f64,
    #[serde(default = "default_structure")]
    pub structure: KillingKind,
    #[serde(default = "default_boundary")]
    pub boundary: BoundaryDatum,
    /// Larger data for `compare`; defaults to `boundary` raised by 0.1.
    #[serde(default)]
    pub compare_with: Option<BoundaryDatum>,
    /// Offset of the upper bounding sphere `E_2`; defaults to `sup φ`.
    #[serde(default)]
    pub c_max: Option<f64>,
    /// Closed-form solution supplying Dirichlet data in `solve-dirichlet`.
    #[serde(default)]
    pub exact: Option<ExactSolution>,
    #[serde(default)]
    pub domain: DomainConfig,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub outputs: OutputPaths,
    #[serde(default)]
    pub seed: u64,
    /// Stack position `l` for `barrier` mode.
    #[serde(default = "default_l")]
    pub l: f64,
}

fn default_n() -> usize {
    2
}
fn default_structure() -> KillingKind {
    KillingKind::Parabolic
}
fn default_boundary() -> BoundaryDatum {
    BoundaryDatum::Constant { c: 0.5 }
}
fn default_grid() -> usize {
    65
}
fn default_l() -> f64 {
    1.0
}

impl RunConfig {
    pub fn mode(&self) -> Mode {
        self.mode.unwrap_or(Mode::SolveAsymptotic)
    }

    pub fn setup(&self) -> AsymptoticSetup {
        AsymptoticSetup {
            c_max: self.c_max,
            ..AsymptoticSetup::new(self.n, self.h, self.domain.half_width, self.domain.y_min, self.domain.y_max, self.grid)
        }
    }

    pub fn upper_datum(&self) -> BoundaryDatum {
        self.compare_with
            .clone()
            .unwrap_or_else(|| BoundaryDatum::Shifted { datum: Box::new(self.boundary.clone()), by: 0.1 })
    }
}

fn config_error(path: &str, message: impl Into<String>) -> Error {
    Error::Config { path: path.into(), message: message.into() }
}

/// Parses and validates a JSON run description. `mode` overrides the document's mode.
pub fn parse_config(document: &str, mode: Option<Mode>) -> Result<RunConfig> {
    let mut cfg: RunConfig = serde_json::from_str(document).map_err(|e| {
        config_error(&format!("line {} column {}", e.line(), e.column()), e.to_string())
    })?;
    if let (Some(a), Some(b)) = (mode, cfg.mode) {
        if a != b {
            return Err(config_error("mode", format!("command line asks for {a:?} but the document says {b:?}")));
        }
    }
    if let Some(m) = mode {
        cfg.mode = Some(m);
    }
    validate(&cfg)?;
    Ok(cfg)
}

pub fn load_config(path: &Path, mode: Option<Mode>) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_error(&path.display().to_string(), format!("cannot read config: {e}")))?;
    parse_config(&text, mode)
}

fn validate(cfg: &RunConfig) -> Result<()> {
    if !(cfg.h.abs() < 1.0) {
        return Err(config_error("H", format!("|H| < 1 is required for equidistant barriers and graph solutions, got {}", cfg.h)));
    }
    if !(1..=3).contains(&cfg.n) {
        return Err(config_error("n", format!("slice dimension must be 1, 2 or 3, got {}", cfg.n)));
    }
    if !(cfg.domain.y_min > 0.0) {
        return Err(config_error("domain.y_min", "y_min must be positive"));
    }
    if !(cfg.domain.y_max > cfg.domain.y_min) {
        return Err(config_error("domain.y_max", "y_max must exceed y_min"));
    }
    if !(cfg.domain.half_width > 0.0) {
        return Err(config_error("domain.L", "L must be positive"));
    }
    if cfg.mode().solves() && cfg.grid < 17 {
        return Err(config_error("grid", format!("solve modes need at least 17 nodes per axis, got {}", cfg.grid)));
    }
    if cfg.grid < 3 {
        return Err(config_error("grid", "grids need at least 3 nodes per axis"));
    }
    if !(cfg.solver.tol > 0.0) {
        return Err(config_error("solver.tol", "tolerance must be positive"));
    }
    if !(cfg.l > 0.0) {
        return Err(config_error("l", "stack position must be positive"));
    }
    if let Some(c) = cfg.c_max {
        if !(c > 0.0) {
            return Err(config_error("c_max", "c_max must be positive"));
        }
    }
    if cfg.structure == KillingKind::Hyperbolic && matches!(cfg.mode(), Mode::SolveAsymptotic | Mode::Compare) {
        return Err(config_error("structure", "the asymptotic solver is built for the parabolic structure"));
    }
    if cfg.mode() == Mode::SolveDirichlet && cfg.exact.is_none() {
        return Err(config_error("exact", "solve-dirichlet takes its boundary values from an exact family"));
    }
    let mut data = vec![("boundary", cfg.boundary.clone())];
    if cfg.mode() == Mode::Compare {
        data.push(("compare_with", cfg.upper_datum()));
    }
    for (key, datum) in data {
        datum.validate().map_err(|e| config_error(key, e.to_string()))?;
        let c = cfg.c_max.unwrap_or(datum.c_max());
        // Between-spheres check on a fine sampling of the truncated boundary.
        let samples = boundary_samples(cfg);
        for x in &samples {
            let v = datum.eval(x);
            if !(v >= 0.0 && v <= c) {
                return Err(config_error(
                    key,
                    format!("data leave the slab between E_1 and E_2: φ({x:?}) = {v} not in [0, {c}]"),
                ));
            }
        }
    }
    Ok(())
}

fn boundary_samples(cfg: &RunConfig) -> Vec<Vec<f64>> {
    let m = cfg.n - 1;
    let per_axis: usize = if m >= 2 { 65 } else { 513 };
    let l = cfg.domain.half_width;
    let total = if m == 0 { 1 } else { per_axis.pow(m as u32) };
    (0..total)
        .map(|code| {
            let mut c = code;
            (0..m)
                .map(|_| {
                    let i = c % per_axis;
                    c /= per_axis;
                    -l + 2.0 * l * i as f64 / (per_axis - 1) as f64
                })
                .collect()
        })
        .collect()
}

/// One check in a run report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: CheckStatus,
    pub value: f64,
    pub tolerance: Option<f64>,
    pub anchor: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Info,
}

/// Machine-readable record of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub mode: Mode,
    pub checks: Vec<CheckRecord>,
    /// Free-form tables and numbers specific to the mode.
    pub details: BTreeMap<String, serde_json::Value>,
    pub runtime_seconds: f64,
    pub config: RunConfig,
}

impl DiagnosticsReport {
    pub fn new(config: RunConfig) -> Self {
        Self { mode: config.mode(), checks: Vec::new(), details: BTreeMap::new(), runtime_seconds: 0.0, config }
    }

    /// Records `value ≤ tolerance`.
    pub fn at_most(&mut self, name: &str, value: f64, tolerance: f64, anchor: &str) {
        let status = if value <= tolerance { CheckStatus::Pass } else { CheckStatus::Fail };
        self.checks.push(CheckRecord { name: name.into(), status, value, tolerance: Some(tolerance), anchor: anchor.into() });
    }

    /// Records `value ≥ tolerance`.
    pub fn at_least(&mut self, name: &str, value: f64, bound: f64, anchor: &str) {
        let status = if value >= bound { CheckStatus::Pass } else { CheckStatus::Fail };
        self.checks.push(CheckRecord { name: name.into(), status, value, tolerance: Some(bound), anchor: anchor.into() });
    }

    pub fn flag(&mut self, name: &str, ok: bool, value: f64, anchor: &str) {
        let status = if ok { CheckStatus::Pass } else { CheckStatus::Fail };
        self.checks.push(CheckRecord { name: name.into(), status, value, tolerance: None, anchor: anchor.into() });
    }

    pub fn info(&mut self, name: &str, value: f64, anchor: &str) {
        self.checks.push(CheckRecord { name: name.into(), status: CheckStatus::Info, value, tolerance: None, anchor: anchor.into() });
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        self.details.insert(key.into(), serde_json::to_value(value).unwrap_or(serde_json::Value::Null));
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(r#"{"mode": "solve-asymptotic", "n": 2, "H": 0.0, "boundary": {"kind": "constant", "c": 0.5}}"#, None).unwrap();
        assert_eq!(cfg.grid, 65);
        assert_eq!(cfg.domain, DomainConfig::default());
        assert_eq!(cfg.outputs.csv, "solution.csv");
        assert_eq!(cfg.structure, KillingKind::Parabolic);
    }

    #[test]
    fn unit_mean_curvature_is_rejected() {
        let err = parse_config(r#"{"H": 1.0}"#, None).unwrap_err();
        assert!(matches!(&err, Error::Config { path, message } if path == "H" && message.contains("|H| < 1")), "{err}");
    }

    #[test]
    fn bump_above_the_slab_is_rejected() {
        let doc = r#"{"boundary": {"kind": "bump", "center": [0.0], "height": 0.9, "width": 0.2}, "c_max": 0.5}"#;
        let err = parse_config(doc, None).unwrap_err();
        assert!(matches!(&err, Error::Config { path, .. } if path == "boundary"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let err = parse_config(r#"{"H": 0.1, "colour": 3}"#, None).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
        let err = parse_config(r#"{"solver": {"tol": 1e-9, "sweeps": 3}}"#, None).unwrap_err();
        assert!(err.to_string().contains("sweeps"), "{err}");
    }

    #[test]
    fn coarse_grids_are_rejected_for_solves() {
        assert!(parse_config(r#"{"grid": 9}"#, Some(Mode::SolveAsymptotic)).is_err());
        assert!(parse_config(r#"{"grid": 9}"#, Some(Mode::Barrier)).is_ok());
    }

    #[test]
    fn mode_conflict_is_an_error() {
        assert!(parse_config(r#"{"mode": "barrier"}"#, Some(Mode::Compare)).is_err());
    }
}
