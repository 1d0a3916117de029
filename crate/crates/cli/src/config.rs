//! Run configuration: TOML sections of `key = value` pairs, `--set` overrides,
//! validation against the model hypotheses, and the `meta.txt` echo.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use relaxlab::convergence_lab::{fmt_num, MetaSection};
use relaxlab::entropy::{TableSpec, DEFAULT_GAUSS_NODES};
use relaxlab::model::{monotonicity_margin, MONOTONICITY_SAMPLES};
use relaxlab::{make_grid, DtRule, Field64, FluxFunction64, Grid64, ModelParams64, NormKind};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::init::InitSection;

/// Environment variable overriding `[output] dir`.
pub const OUT_ENV: &str = "RELAXLAB_OUT";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Simulate,
    Reference,
    Sweep,
    EntropyAudit,
    LinearCheck,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelSection,
    pub grid: GridSection,
    pub time: TimeSection,
    pub init: InitSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    /// Linear part of the flux.
    pub a: f64,
    /// `[degree, coefficient]` pairs of `h`; every degree must be at least 2.
    pub h: Vec<(u32, f64)>,
    pub lambda: f64,
    /// Used by `simulate`, `entropy-audit` and `linear-check`.
    pub eps: f64,
    /// Used by `sweep`; strictly decreasing.
    pub eps_ladder: Vec<f64>,
    /// Declared bound on `|u|`; defaults to `2·max|u_0|`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_limit: Option<f64>,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            a: 1.0,
            h: vec![(2, 0.1)],
            lambda: 2.0,
            eps: 0.1,
            eps_ladder: vec![0.08, 0.04, 0.02, 0.01],
            u_limit: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub n: usize,
    pub length: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { n: 256, length: 2.0 * std::f64::consts::PI }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    pub t_end: f64,
    /// `dt = min(dt_c1·ε², dt_cap)`.
    pub dt_c1: f64,
    pub dt_cap: f64,
    /// Output / comparison samples over `[0, t_end]`.
    pub samples: usize,
}

impl Default for TimeSection {
    fn default() -> Self {
        let rule = DtRule::<f64>::default();
        Self { t_end: 0.25, dt_c1: rule.c1, dt_cap: rule.cap, samples: 50 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub reference_dt: f64,
    pub s: f64,
    pub s_prime: f64,
    /// Error norms (`L2`, `Linf`, `H<s>`), in report column order.
    pub norms: Vec<String>,
    /// Nodes per entropy table.
    pub table_size: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            reference_dt: 1e-4,
            s: 2.0,
            s_prime: 1.0,
            norms: vec!["L2".into(), "Linf".into(), "H1".into()],
            table_size: relaxlab::entropy::DEFAULT_TABLE_SIZE,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("relaxlab-out") }
    }
}

/// Validated numerical objects built from a [`RunConfig`].
#[derive(Clone, Debug)]
pub struct Prepared {
    pub grid: Arc<Grid64>,
    pub flux: FluxFunction64,
    pub u0: Field64,
    pub u_limit: f64,
    pub dt_rule: DtRule<f64>,
    pub norms: Vec<NormKind<f64>>,
    pub table: TableSpec,
}

/// Parses `text` (TOML sections) and applies `section.key=value` overrides.
pub fn parse_config_str(text: &str, sets: &[String]) -> Result<RunConfig, CliError> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    for item in sets {
        apply_override(&mut table, item)?;
    }
    toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))
}

/// Reads the optional config file, applies overrides, then the output
/// directory from `RELAXLAB_OUT` and finally from `out`.
pub fn parse_config(
    file: Option<&Path>,
    sets: &[String],
    out: Option<&Path>,
    env_out: Option<String>,
) -> Result<RunConfig, CliError> {
    let text = match file {
        Some(path) => {
            fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?
        }
        None => String::new(),
    };
    let mut config = parse_config_str(&text, sets)?;
    if let Some(dir) = env_out.filter(|d| !d.is_empty()) {
        config.output.dir = PathBuf::from(dir);
    }
    if let Some(dir) = out {
        config.output.dir = dir.to_path_buf();
    }
    Ok(config)
}

fn apply_override(table: &mut toml::Table, item: &str) -> Result<(), CliError> {
    let bad = || CliError::Config(format!("override '{item}' must look like section.key=value"));
    let (path, raw) = item.split_once('=').ok_or_else(bad)?;
    let (section, key) = path.trim().split_once('.').ok_or_else(bad)?;
    let raw = raw.trim();
    // TOML literal if it parses as one, bare string otherwise (e.g. kind=sin)
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let entry = table.entry(section.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
    let section_table =
        entry.as_table_mut().ok_or_else(|| CliError::Config(format!("'{section}' is not a section")))?;
    section_table.insert(key.to_string(), value);
    Ok(())
}

impl RunConfig {
    pub fn params(&self, eps: f64, flux: &FluxFunction64) -> Result<ModelParams64, CliError> {
        ModelParams64::new(eps, self.model.lambda, flux.clone()).map_err(|e| CliError::Validation(e.to_string()))
    }

    /// The ε values a command runs with.
    pub fn eps_values(&self, command: CommandKind) -> Vec<f64> {
        match command {
            CommandKind::Sweep => self.model.eps_ladder.clone(),
            CommandKind::Reference => Vec::new(),
            _ => vec![self.model.eps],
        }
    }

    /// Checks every hypothesis the command relies on and builds the grid,
    /// flux and initial datum.
    pub fn prepare(&self, command: CommandKind) -> Result<Prepared, CliError> {
        let invalid = |msg: String| CliError::Validation(msg);
        let m = &self.model;
        if !(m.lambda > 0.0) {
            return Err(invalid(format!("lambda = {} must be positive", m.lambda)));
        }
        if !(m.eps > 0.0) {
            return Err(invalid(format!("eps = {} must be positive", m.eps)));
        }
        if command == CommandKind::Sweep {
            if m.eps_ladder.is_empty() {
                return Err(invalid("eps_ladder is empty".into()));
            }
            if m.eps_ladder.iter().any(|&e| !(e > 0.0)) {
                return Err(invalid("eps_ladder entries must be positive".into()));
            }
            if m.eps_ladder.windows(2).any(|w| !(w[1] < w[0])) {
                return Err(invalid("eps_ladder must be strictly decreasing".into()));
            }
        }
        let terms: Vec<(usize, f64)> = m.h.iter().map(|&(d, c)| (d as usize, c)).collect();
        let flux = FluxFunction64::from_terms(m.a, &terms).map_err(|_| {
            invalid(
                "h must be a polynomial of degree >= 2 (no constant or linear terms; \
                 the linear part belongs in `a`)"
                    .into(),
            )
        })?;
        let grid = make_grid(self.grid.n, self.grid.length).map_err(|e| invalid(e.to_string()))?;
        let t = &self.time;
        if !(t.t_end >= 0.0 && t.t_end.is_finite()) {
            return Err(invalid(format!("t_end = {} must be nonnegative", t.t_end)));
        }
        let dt_rule = DtRule::new(t.dt_c1, t.dt_cap).map_err(|e| invalid(e.to_string()))?;
        if t.samples == 0 {
            return Err(invalid("samples must be at least 1".into()));
        }
        let s = &self.sweep;
        if !(0.0 < s.s_prime && s.s_prime < s.s) {
            return Err(invalid(format!("Sobolev indices need 0 < s' < s (s = {}, s' = {})", s.s, s.s_prime)));
        }
        if !(s.reference_dt > 0.0) {
            return Err(invalid(format!("reference_dt = {} must be positive", s.reference_dt)));
        }
        if s.table_size < 4 {
            return Err(invalid("table_size must be at least 4".into()));
        }
        let norms = s
            .norms
            .iter()
            .map(|n| n.parse::<NormKind<f64>>().map_err(|e| invalid(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        if norms.is_empty() {
            return Err(invalid("at least one norm is required".into()));
        }

        let u0 = self.init.build(&grid).map_err(invalid)?;
        let u_limit = m.u_limit.unwrap_or_else(|| relaxlab::kinetic_solver::default_u_limit(&u0));
        if !(u_limit > 0.0) {
            return Err(invalid(format!("u_limit = {u_limit} must be positive")));
        }
        if u0.max_abs() > u_limit {
            return Err(invalid(format!("max |u0| = {} exceeds u_limit = {u_limit}", u0.max_abs())));
        }
        for eps in self.eps_values(command) {
            let params = self.params(eps, &flux)?;
            let margin = monotonicity_margin(&params, -u_limit, u_limit, MONOTONICITY_SAMPLES);
            if !(margin > 0.0) {
                return Err(invalid(format!(
                    "Maxwellians are not monotone on [-{u_limit}, {u_limit}] at eps = {eps}: margin {margin:.6e} <= 0"
                )));
            }
        }
        Ok(Prepared {
            grid,
            flux,
            u0,
            u_limit,
            dt_rule,
            norms,
            table: TableSpec { nodes: s.table_size, gauss_nodes: DEFAULT_GAUSS_NODES },
        })
    }

    /// Full echo in the config format; parsing it back yields an equal config.
    pub fn to_meta(&self) -> Vec<MetaSection> {
        let value = toml::Value::try_from(self).expect("config serializes");
        let table = value.as_table().expect("config is a table");
        ["model", "grid", "time", "init", "sweep", "output"]
            .iter()
            .filter_map(|name| table.get(*name).and_then(|v| v.as_table()).map(|t| (name, t)))
            .map(|(name, t)| t.iter().fold(MetaSection::new(*name), |sec, (k, v)| sec.with(k.clone(), render_value(v))))
            .collect()
    }
}

/// TOML rendering with floats in 17-significant-digit scientific notation.
fn render_value(v: &toml::Value) -> String {
    match v {
        toml::Value::Float(x) => fmt_num(*x),
        toml::Value::Array(items) => {
            format!("[{}]", items.iter().map(render_value).collect::<Vec<_>>().join(", "))
        }
        toml::Value::Table(t) => format!(
            "{{ {} }}",
            t.iter().map(|(k, v)| format!("{k} = {}", render_value(v))).collect::<Vec<_>>().join(", ")
        ),
        other => other.to_string(),
    }
}
