//! Run configuration (TOML).
//!
//! ```toml
//! scenario = "burgers_stationary_shock"
//! scheme = "godunov"          # godunov | engquist_osher | lax_friedrichs | roe
//! eps = 0.0
//!
//! [grid]
//! n_cells = 100
//!
//! [time]
//! T = 0.5
//! cfl = 0.5
//! output_count = 10
//!
//! [dp]
//! enabled = false             # defaults to the scenario's kind
//! elliptic_backend = "green"  # green | fd
//!
//! [diagnostics]
//! checks = ["kruzkov_production", { name = "max_principle", tolerance = 1e-10 }]
//!
//! [output]
//! dir = "out"
//! formats = ["csv", "json"]
//! ```
//!
//! Every problem found is reported at once, each prefixed by its key path.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use toml::{Table, Value};

use super::scenarios::{self, ScenarioKind};
use crate::elliptic::EllipticBackend;
use crate::error::{Error, Result};
use crate::hyperbolic::{Scheme, SourceCoupling};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    Trace,
    KruzkovProduction,
    BoundaryEntropy,
    MaxPrinciple,
    L1Stability,
    PBounds,
    DpEnergy,
}

impl CheckName {
    pub const ALL: [CheckName; 7] = [
        CheckName::Trace,
        CheckName::KruzkovProduction,
        CheckName::BoundaryEntropy,
        CheckName::MaxPrinciple,
        CheckName::L1Stability,
        CheckName::PBounds,
        CheckName::DpEnergy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckName::Trace => "trace",
            CheckName::KruzkovProduction => "kruzkov_production",
            CheckName::BoundaryEntropy => "boundary_entropy",
            CheckName::MaxPrinciple => "max_principle",
            CheckName::L1Stability => "l1_stability",
            CheckName::PBounds => "p_bounds",
            CheckName::DpEnergy => "dp_energy",
        }
    }

    /// Only meaningful with a pressure.
    pub fn needs_dp(self) -> bool {
        matches!(self, CheckName::PBounds | CheckName::DpEnergy)
    }

    pub fn valid_names() -> String {
        Self::ALL.iter().map(|c| c.name()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown check `{s}` (valid: {})", Self::valid_names())))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CheckSpec {
    pub name: CheckName,
    /// Overrides the check's default tolerance.
    pub tolerance: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub scenario: String,
    pub n_cells: usize,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub cfl: f64,
    /// 0 keeps every time level in fields.csv.
    pub output_count: usize,
    pub scheme: Scheme,
    pub eps: f64,
    pub coupling: SourceCoupling,
    pub dp_enabled: bool,
    pub elliptic_backend: EllipticBackend,
    pub diagnostics: Vec<CheckSpec>,
    pub output_dir: PathBuf,
    pub formats: Vec<OutputFormat>,
}

impl RunConfig {
    /// Defaults for everything but the three required keys.
    pub fn new(scenario: &str, n_cells: usize, t_end: f64) -> Result<Self> {
        let info = scenarios::lookup(scenario)?;
        let dp = info.kind == ScenarioKind::Dp;
        let cfg = Self {
            scenario: scenario.to_string(),
            n_cells,
            t_end,
            cfl: 0.5,
            output_count: 10,
            scheme: Scheme::Godunov,
            eps: 0.0,
            coupling: SourceCoupling::Unsplit,
            dp_enabled: dp,
            elliptic_backend: EllipticBackend::Green,
            diagnostics: scenario_checks(info.kind, dp),
            output_dir: PathBuf::from("output").join(scenario),
            formats: vec![OutputFormat::Csv, OutputFormat::Json],
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if let Err(e) = scenarios::lookup(&self.scenario) {
            errs.push(format!("scenario: {e}"));
        }
        self.check_values(&mut errs);
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    fn check_values(&self, errs: &mut Vec<String>) {
        if self.n_cells < 8 {
            errs.push(format!("grid.n_cells: must be at least 8, got {}", self.n_cells));
        }
        let elliptic = scenarios::lookup(&self.scenario).map(|s| s.kind == ScenarioKind::Elliptic).unwrap_or(false);
        if !(self.t_end > 0.0 && self.t_end.is_finite()) && !elliptic {
            errs.push(format!("time.T: must be positive, got {}", self.t_end));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            errs.push(format!("time.cfl: must lie in (0, 1], got {}", self.cfl));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            errs.push(format!("eps: must be nonnegative, got {}", self.eps));
        }
        if self.scenario == "linear_advection_inflow" && self.dp_enabled {
            errs.push("dp.enabled: the DP coupling needs the Burgers flux; linear_advection_inflow uses A(u) = u".into());
        }
        for c in &self.diagnostics {
            if let Some(t) = c.tolerance {
                if !(t >= 0.0 && t.is_finite()) {
                    errs.push(format!("diagnostics.{}: tolerance must be nonnegative, got {t}", c.name));
                }
            }
        }
    }

    pub fn has_format(&self, f: OutputFormat) -> bool {
        self.formats.contains(&f)
    }

    /// Checks requested that apply to this run.
    pub fn active_checks(&self) -> Vec<CheckSpec> {
        self.diagnostics.iter().copied().filter(|c| self.dp_enabled || !c.name.needs_dp()).collect()
    }
}

pub fn default_checks(dp: bool) -> Vec<CheckSpec> {
    CheckName::ALL
        .into_iter()
        .filter(|c| dp || !c.needs_dp())
        .map(|name| CheckSpec { name, tolerance: None })
        .collect()
}

/// The elliptic scenario has no trajectory: only the pressure bounds apply.
fn scenario_checks(kind: ScenarioKind, dp: bool) -> Vec<CheckSpec> {
    if kind == ScenarioKind::Elliptic {
        vec![CheckSpec { name: CheckName::PBounds, tolerance: None }]
    } else {
        default_checks(dp)
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(vec![format!("{}: {e}", path.display())]))?;
    parse_config_str(&text)
}

/// Typed accessors that record errors instead of stopping at the first.
struct Walker<'a> {
    errs: &'a mut Vec<String>,
}

impl Walker<'_> {
    fn table<'t>(&mut self, root: &'t Table, key: &str) -> Option<&'t Table> {
        match root.get(key) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(other) => {
                self.errs.push(format!("{key}: expected a table, got {}", other.type_str()));
                None
            }
        }
    }

    fn float(&mut self, t: Option<&Table>, path: &str, key: &str) -> Option<f64> {
        match t?.get(key)? {
            Value::Float(f) => Some(*f),
            Value::Integer(i) => Some(*i as f64),
            other => {
                self.errs.push(format!("{path}: expected a number, got {}", other.type_str()));
                None
            }
        }
    }

    fn uint(&mut self, t: Option<&Table>, path: &str, key: &str) -> Option<usize> {
        match t?.get(key)? {
            Value::Integer(i) if *i >= 0 => Some(*i as usize),
            other => {
                self.errs.push(format!("{path}: expected a nonnegative integer, got {other}"));
                None
            }
        }
    }

    fn string<'t>(&mut self, t: Option<&'t Table>, path: &str, key: &str) -> Option<&'t str> {
        match t?.get(key)? {
            Value::String(s) => Some(s),
            other => {
                self.errs.push(format!("{path}: expected a string, got {}", other.type_str()));
                None
            }
        }
    }

    fn boolean(&mut self, t: Option<&Table>, path: &str, key: &str) -> Option<bool> {
        match t?.get(key)? {
            Value::Boolean(b) => Some(*b),
            other => {
                self.errs.push(format!("{path}: expected true or false, got {other}"));
                None
            }
        }
    }

    fn unknown_keys(&mut self, t: Option<&Table>, prefix: &str, known: &[&str]) {
        let Some(t) = t else { return };
        for k in t.keys() {
            if !known.contains(&k.as_str()) {
                let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                self.errs.push(format!("{path}: unknown key (expected one of: {})", known.join(", ")));
            }
        }
    }

    fn parsed<T: FromStr<Err = Error>>(&mut self, path: &str, s: Option<&str>) -> Option<T> {
        match s?.parse() {
            Ok(v) => Some(v),
            Err(e) => {
                self.errs.push(format!("{path}: {e}"));
                None
            }
        }
    }
}

pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| Error::Config(vec![format!("TOML syntax: {e}")]))?;
    let mut errs = Vec::new();
    let mut w = Walker { errs: &mut errs };
    let top = Some(&root);
    w.unknown_keys(top, "", &["scenario", "scheme", "eps", "coupling", "grid", "time", "dp", "diagnostics", "output"]);
    let grid = w.table(&root, "grid");
    let time = w.table(&root, "time");
    let dp = w.table(&root, "dp");
    let diag = w.table(&root, "diagnostics");
    let output = w.table(&root, "output");
    w.unknown_keys(grid, "grid", &["n_cells"]);
    w.unknown_keys(time, "time", &["T", "cfl", "output_count"]);
    w.unknown_keys(dp, "dp", &["enabled", "elliptic_backend"]);
    w.unknown_keys(diag, "diagnostics", &["checks"]);
    w.unknown_keys(output, "output", &["dir", "formats"]);

    let scenario = w.string(top, "scenario", "scenario");
    let info = match scenario {
        None => {
            if !root.contains_key("scenario") {
                w.errs.push(format!("scenario: missing required key (valid: {})", scenarios::scenario_names()));
            }
            None
        }
        Some(s) => match scenarios::lookup(s) {
            Ok(i) => Some(i),
            Err(e) => {
                w.errs.push(format!("scenario: {e}"));
                None
            }
        },
    };
    let n_cells = w.uint(grid, "grid.n_cells", "n_cells");
    if grid.and_then(|g| g.get("n_cells")).is_none() {
        w.errs.push("grid.n_cells: missing required key".into());
    }
    let elliptic = info.map(|i| i.kind == ScenarioKind::Elliptic).unwrap_or(false);
    let t_end = w.float(time, "time.T", "T");
    if time.and_then(|t| t.get("T")).is_none() && !elliptic {
        w.errs.push("time.T: missing required key".into());
    }
    let cfl = w.float(time, "time.cfl", "cfl");
    let output_count = w.uint(time, "time.output_count", "output_count");
    let scheme_s = w.string(top, "scheme", "scheme");
    let scheme: Option<Scheme> = w.parsed("scheme", scheme_s);
    let eps = w.float(top, "eps", "eps");
    let coupling = match w.string(top, "coupling", "coupling") {
        None => None,
        Some("unsplit") => Some(SourceCoupling::Unsplit),
        Some("strang") => Some(SourceCoupling::Strang),
        Some(other) => {
            w.errs.push(format!("coupling: unknown value `{other}` (valid: unsplit, strang)"));
            None
        }
    };
    let dp_enabled = w.boolean(dp, "dp.enabled", "enabled");
    let backend_s = w.string(dp, "dp.elliptic_backend", "elliptic_backend");
    let backend: Option<EllipticBackend> = w.parsed("dp.elliptic_backend", backend_s);

    let mut checks = None;
    if let Some(v) = diag.and_then(|d| d.get("checks")) {
        match v {
            Value::Array(items) => {
                let mut out = Vec::new();
                for (i, item) in items.iter().enumerate() {
                    let path = format!("diagnostics.checks[{i}]");
                    let (name, tol) = match item {
                        Value::String(s) => (Some(s.as_str()), None),
                        Value::Table(t) => {
                            w.unknown_keys(Some(t), &path, &["name", "tolerance"]);
                            let name = w.string(Some(t), &format!("{path}.name"), "name");
                            if name.is_none() && !t.contains_key("name") {
                                w.errs.push(format!("{path}.name: missing required key"));
                            }
                            (name, w.float(Some(t), &format!("{path}.tolerance"), "tolerance"))
                        }
                        other => {
                            w.errs.push(format!("{path}: expected a check name or table, got {}", other.type_str()));
                            (None, None)
                        }
                    };
                    if let Some(name) = w.parsed::<CheckName>(&path, name) {
                        out.push(CheckSpec { name, tolerance: tol });
                    }
                }
                checks = Some(out);
            }
            Value::String(s) if s == "all" => {}
            other => w.errs.push(format!("diagnostics.checks: expected an array or \"all\", got {}", other.type_str())),
        }
    }

    let dir = w.string(output, "output.dir", "dir").map(PathBuf::from);
    let mut formats = None;
    if let Some(v) = output.and_then(|o| o.get("formats")) {
        match v {
            Value::Array(items) => {
                let mut out = Vec::new();
                for (i, item) in items.iter().enumerate() {
                    match item.as_str() {
                        Some("csv") => out.push(OutputFormat::Csv),
                        Some("json") => out.push(OutputFormat::Json),
                        _ => w.errs.push(format!("output.formats[{i}]: unknown format {item} (valid: csv, json)")),
                    }
                }
                formats = Some(out);
            }
            other => w.errs.push(format!("output.formats: expected an array, got {}", other.type_str())),
        }
    }

    let Some(info) = info else {
        return Err(Error::Config(errs));
    };
    let dp_default = info.kind == ScenarioKind::Dp;
    let dp_on = dp_enabled.unwrap_or(dp_default);
    let cfg = RunConfig {
        scenario: info.name.to_string(),
        n_cells: n_cells.unwrap_or(0),
        t_end: t_end.unwrap_or(if elliptic { 1.0 } else { f64::NAN }),
        cfl: cfl.unwrap_or(0.5),
        output_count: output_count.unwrap_or(10),
        scheme: scheme.unwrap_or(Scheme::Godunov),
        eps: eps.unwrap_or(0.0),
        coupling: coupling.unwrap_or_default(),
        dp_enabled: dp_on,
        elliptic_backend: backend.unwrap_or_default(),
        diagnostics: checks.unwrap_or_else(|| scenario_checks(info.kind, dp_on)),
        output_dir: dir.unwrap_or_else(|| PathBuf::from("output").join(info.name)),
        formats: formats.unwrap_or_else(|| vec![OutputFormat::Csv, OutputFormat::Json]),
    };
    // value checks only for keys that parsed; missing ones are reported above
    let mut value_errs = Vec::new();
    cfg.check_values(&mut value_errs);
    value_errs.retain(|e| {
        !(e.starts_with("grid.n_cells") && n_cells.is_none() || e.starts_with("time.T") && t_end.is_none())
    });
    errs.extend(value_errs);
    if errs.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Config(errs))
    }
}
