//! TOML run configuration: parsing with key-level error reporting, per-mode
//! validation and serialization back to text.
//!
//! ```toml
//! mode = "run-cross"          # optional; the CLI subcommand decides
//!
//! [model]
//! d_u = 0.1
//! d_v = 0.1
//! r_u = 1.0
//! r_v = 1.0
//! r_a = 1.0
//! r_b = 0.5
//! r_c = 1.0
//! r_d = 0.5
//! a = 1.0
//! b = 1.0
//! c = 1.0
//! d = 1.0
//! [model.phi]
//! kind = "linear"             # or "power" (coeff, exponent), "tabulated" (points)
//! slope = 0.5
//!
//! [grid]
//! nx = 200
//! lx = 1.0                    # ny, ly for 2D
//!
//! [time]
//! dt = 2e-4
//! t_end = 1.0
//!
//! [initial.u]
//! kind = "cosine"             # or "constant" (value), "coexistence"
//! base = 1.0
//! amp = 0.5
//! kx = 2.0
//! ```
//!
//! Further optional sections: `[solver]`, `[fast]`, `[output]`, `[refine]`,
//! `[stability]`, `[diagnostics]`; see the README for every key.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::harness::{Problem, Profile};
use crate::model::{CrossFunction, ModelParams, Regime};
use crate::solver::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    RunCross,
    RunFast,
    SweepEps,
    Refine,
    Stability,
    Diagnose,
}

impl Mode {
    pub const ALL: [Mode; 6] =
        [Mode::RunCross, Mode::RunFast, Mode::SweepEps, Mode::Refine, Mode::Stability, Mode::Diagnose];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::RunCross => "run-cross",
            Mode::RunFast => "run-fast",
            Mode::SweepEps => "sweep-eps",
            Mode::Refine => "refine",
            Mode::Stability => "stability",
            Mode::Diagnose => "diagnose",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mode '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConfigErrorKind {
    Missing,
    TypeMismatch { expected: String, found: String },
    Unknown,
    Invalid { message: String },
    UnsupportedRegime,
}

/// One problem with one key; `key` is the dotted path, e.g. `model.phi.slope`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigError {
    pub key: String,
    #[serde(flatten)]
    pub kind: ConfigErrorKind,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ConfigErrorKind::Missing => write!(f, "{}: missing required key", self.key),
            ConfigErrorKind::TypeMismatch { expected, found } => {
                write!(f, "{}: expected {expected}, found {found}", self.key)
            }
            ConfigErrorKind::Unknown => write!(f, "{}: unknown key", self.key),
            ConfigErrorKind::Invalid { message } => write!(f, "{}: {message}", self.key),
            ConfigErrorKind::UnsupportedRegime => write!(
                f,
                "{}: exponents fall outside both supported regimes (pass --allow-unsupported to run anyway)",
                self.key
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FastSection {
    pub epsilon: Option<f64>,
    pub eps_list: Option<Vec<f64>>,
    /// Exponent of the relaxation defect; defaults by regime.
    pub defect_p: Option<f64>,
    /// Exponents at which the sign of the exchange dissipation is monitored.
    pub dissipation_p: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSection {
    pub dir: Option<String>,
    pub write_snapshots: bool,
    pub diagnostics_every: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: None, write_snapshots: true, diagnostics_every: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineSection {
    pub levels: usize,
    pub ratio: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsSection {
    pub p_list: Vec<f64>,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        Self { p_list: vec![2.0, 0.5] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    pub problem: Problem,
    pub fast: FastSection,
    pub output: OutputSection,
    pub refine: Option<RefineSection>,
    pub stability: Option<Vec<f64>>,
    pub diagnostics: DiagnosticsSection,
}

impl RunConfig {
    pub fn regime(&self) -> Regime {
        self.problem.params.regime()
    }

    /// `p = 2` in the first regime, `p = 1/2` otherwise, unless configured.
    pub fn defect_p(&self) -> f64 {
        self.fast.defect_p.unwrap_or(match self.regime() {
            Regime::Theorem1 => 2.0,
            _ => 0.5,
        })
    }

    pub fn dissipation_ps(&self) -> Vec<f64> {
        if self.fast.dissipation_p.is_empty() {
            vec![self.defect_p()]
        } else {
            self.fast.dissipation_p.clone()
        }
    }

    /// Checks the keys a given mode needs beyond the always-required ones.
    pub fn validate_for(&self, mode: Mode) -> Result<()> {
        let mut errs = Vec::new();
        let missing = |key: &str| ConfigError { key: key.into(), kind: ConfigErrorKind::Missing };
        if let Some(m) = self.mode {
            if m != mode {
                errs.push(invalid("mode", format!("config is for '{m}' but '{mode}' was requested")));
            }
        }
        match mode {
            Mode::RunFast if self.fast.epsilon.is_none() => errs.push(missing("fast.epsilon")),
            Mode::SweepEps if self.fast.eps_list.is_none() => errs.push(missing("fast.eps_list")),
            Mode::Refine if self.refine.is_none() => errs.push(missing("refine.levels")),
            Mode::Stability if self.stability.is_none() => errs.push(missing("stability.deltas")),
            _ => {}
        }
        if errs.is_empty() { Ok(()) } else { Err(Error::Config(errs)) }
    }
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { key: key.into(), kind: ConfigErrorKind::Invalid { message: message.into() } }
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::String(_) => "string",
        Value::Integer(_) => "integer",
        Value::Float(_) => "float",
        Value::Boolean(_) => "boolean",
        Value::Datetime(_) => "datetime",
        Value::Array(_) => "array",
        Value::Table(_) => "table",
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() { key.to_string() } else { format!("{path}.{key}") }
}

/// Pulls typed values out of TOML tables while collecting every problem.
#[derive(Default)]
struct Reader {
    errors: Vec<ConfigError>,
}

impl Reader {
    fn mismatch(&mut self, key: String, expected: &str, v: &Value) {
        self.errors.push(ConfigError {
            key,
            kind: ConfigErrorKind::TypeMismatch { expected: expected.into(), found: type_name(v).into() },
        });
    }

    fn get<'t>(&mut self, t: &'t Table, path: &str, key: &str, required: bool) -> Option<&'t Value> {
        let v = t.get(key);
        if v.is_none() && required {
            self.errors.push(ConfigError { key: join(path, key), kind: ConfigErrorKind::Missing });
        }
        v
    }

    fn as_f64(&mut self, v: &Value, key: String) -> Option<f64> {
        match v {
            Value::Float(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            _ => {
                self.mismatch(key, "number", v);
                None
            }
        }
    }

    fn f64(&mut self, t: &Table, path: &str, key: &str, required: bool) -> Option<f64> {
        let v = self.get(t, path, key, required)?;
        let x = self.as_f64(v, join(path, key))?;
        if !x.is_finite() {
            self.errors.push(invalid(&join(path, key), "must be finite"));
            return None;
        }
        Some(x)
    }

    fn usize(&mut self, t: &Table, path: &str, key: &str, required: bool) -> Option<usize> {
        let v = self.get(t, path, key, required)?;
        match v {
            Value::Integer(i) if *i >= 0 => Some(*i as usize),
            Value::Integer(_) => {
                self.errors.push(invalid(&join(path, key), "must be nonnegative"));
                None
            }
            _ => {
                self.mismatch(join(path, key), "integer", v);
                None
            }
        }
    }

    fn bool(&mut self, t: &Table, path: &str, key: &str) -> Option<bool> {
        let v = self.get(t, path, key, false)?;
        match v {
            Value::Boolean(b) => Some(*b),
            _ => {
                self.mismatch(join(path, key), "boolean", v);
                None
            }
        }
    }

    fn string<'t>(&mut self, t: &'t Table, path: &str, key: &str, required: bool) -> Option<&'t str> {
        let v = self.get(t, path, key, required)?;
        match v {
            Value::String(s) => Some(s),
            _ => {
                self.mismatch(join(path, key), "string", v);
                None
            }
        }
    }

    fn f64_list(&mut self, t: &Table, path: &str, key: &str, required: bool) -> Option<Vec<f64>> {
        let v = self.get(t, path, key, required)?;
        let Value::Array(items) = v else {
            self.mismatch(join(path, key), "array of numbers", v);
            return None;
        };
        let mut out = Vec::with_capacity(items.len());
        for (i, item) in items.iter().enumerate() {
            out.push(self.as_f64(item, format!("{}[{i}]", join(path, key)))?);
        }
        if out.iter().any(|x| !x.is_finite()) {
            self.errors.push(invalid(&join(path, key), "entries must be finite"));
            return None;
        }
        Some(out)
    }

    fn table<'t>(&mut self, t: &'t Table, path: &str, key: &str, required: bool) -> Option<&'t Table> {
        let v = self.get(t, path, key, required)?;
        match v {
            Value::Table(inner) => Some(inner),
            _ => {
                self.mismatch(join(path, key), "table", v);
                None
            }
        }
    }

    fn reject_unknown(&mut self, t: &Table, path: &str, allowed: &[&str]) {
        for k in t.keys() {
            if !allowed.contains(&k.as_str()) {
                self.errors.push(ConfigError { key: join(path, k), kind: ConfigErrorKind::Unknown });
            }
        }
    }
}

const MODEL_SCALARS: [&str; 12] =
    ["d_u", "d_v", "r_u", "r_v", "r_a", "r_b", "r_c", "r_d", "a", "b", "c", "d"];

fn read_phi(r: &mut Reader, t: &Table) -> Option<CrossFunction> {
    let path = "model.phi";
    let kind = r.string(t, path, "kind", true)?;
    let phi = match kind {
        "linear" => {
            r.reject_unknown(t, path, &["kind", "slope"]);
            CrossFunction::Linear { slope: r.f64(t, path, "slope", true)? }
        }
        "power" => {
            r.reject_unknown(t, path, &["kind", "coeff", "exponent"]);
            let coeff = r.f64(t, path, "coeff", true);
            let exponent = r.f64(t, path, "exponent", true);
            CrossFunction::Power { coeff: coeff?, exponent: exponent? }
        }
        "tabulated" => {
            r.reject_unknown(t, path, &["kind", "points"]);
            let v = r.get(t, path, "points", true)?;
            let pts = match v {
                Value::Array(rows) => rows
                    .iter()
                    .enumerate()
                    .map(|(i, row)| match row {
                        Value::Array(pair) if pair.len() == 2 => {
                            let key = format!("{path}.points[{i}]");
                            Some((r.as_f64(&pair[0], key.clone())?, r.as_f64(&pair[1], key)?))
                        }
                        other => {
                            r.mismatch(format!("{path}.points[{i}]"), "[v, phi] pair", other);
                            None
                        }
                    })
                    .collect::<Option<Vec<_>>>()?,
                other => {
                    r.mismatch(format!("{path}.points"), "array of [v, phi] pairs", other);
                    return None;
                }
            };
            match CrossFunction::tabulated(pts) {
                Ok(f) => f,
                Err(e) => {
                    r.errors.push(invalid("model.phi.points", e.to_string()));
                    return None;
                }
            }
        }
        other => {
            r.errors.push(invalid("model.phi.kind", format!(
                "unknown kind '{other}' (expected linear, power or tabulated)"
            )));
            return None;
        }
    };
    if let Err(e) = phi.validate() {
        r.errors.push(invalid(path, e.to_string()));
        return None;
    }
    Some(phi)
}

fn read_model(r: &mut Reader, t: &Table) -> Option<ModelParams> {
    let mut allowed: Vec<&str> = MODEL_SCALARS.to_vec();
    allowed.push("phi");
    r.reject_unknown(t, "model", &allowed);
    let vals: Vec<Option<f64>> = MODEL_SCALARS.iter().map(|k| r.f64(t, "model", k, true)).collect();
    let phi = r.table(t, "model", "phi", true).and_then(|p| read_phi(r, p));
    let v: Vec<f64> = vals.into_iter().collect::<Option<_>>()?;
    let params = ModelParams {
        d_u: v[0],
        d_v: v[1],
        r_u: v[2],
        r_v: v[3],
        r_a: v[4],
        r_b: v[5],
        r_c: v[6],
        r_d: v[7],
        a: v[8],
        b: v[9],
        c: v[10],
        d: v[11],
        phi: phi?,
    };
    if let Err(e) = params.validate() {
        r.errors.push(invalid("model", e.to_string()));
        return None;
    }
    Some(params)
}

fn read_grid(r: &mut Reader, t: &Table) -> Option<Grid> {
    r.reject_unknown(t, "grid", &["nx", "ny", "lx", "ly"]);
    let nx = r.usize(t, "grid", "nx", true);
    let lx = r.f64(t, "grid", "lx", true);
    let ny = r.usize(t, "grid", "ny", false);
    let ly = r.f64(t, "grid", "ly", false);
    let (nx, lx) = (nx?, lx?);
    let grid = match (ny, ly) {
        (None, None) => Grid::new_1d(nx, lx),
        (Some(ny), Some(ly)) => Grid::new_2d(nx, ny, lx, ly),
        (Some(_), None) => {
            r.errors.push(ConfigError { key: "grid.ly".into(), kind: ConfigErrorKind::Missing });
            return None;
        }
        (None, Some(_)) => {
            r.errors.push(ConfigError { key: "grid.ny".into(), kind: ConfigErrorKind::Missing });
            return None;
        }
    };
    grid.map_err(|e| r.errors.push(invalid("grid", e.to_string()))).ok()
}

fn read_profile(r: &mut Reader, t: &Table, path: &str) -> Option<Profile> {
    let kind = r.string(t, path, "kind", true)?;
    match kind {
        "constant" => {
            r.reject_unknown(t, path, &["kind", "value"]);
            Some(Profile::Constant { value: r.f64(t, path, "value", true)? })
        }
        "cosine" => {
            r.reject_unknown(t, path, &["kind", "base", "amp", "kx", "ky"]);
            let base = r.f64(t, path, "base", true);
            let amp = r.f64(t, path, "amp", true);
            let kx = r.f64(t, path, "kx", true);
            let ky = r.f64(t, path, "ky", false).unwrap_or(0.0);
            Some(Profile::Cosine { base: base?, amp: amp?, kx: kx?, ky })
        }
        "coexistence" => {
            r.reject_unknown(t, path, &["kind"]);
            Some(Profile::Coexistence)
        }
        other => {
            r.errors.push(invalid(&join(path, "kind"), format!(
                "unknown kind '{other}' (expected constant, cosine or coexistence)"
            )));
            None
        }
    }
}

/// Parses and validates a configuration, rejecting unsupported exponent
/// regimes.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with(text, false)
}

pub fn parse_config_with(text: &str, allow_unsupported: bool) -> Result<RunConfig> {
    let root: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(vec![invalid("<document>", e.message().to_string())]))?;
    let mut r = Reader::default();
    r.reject_unknown(
        &root,
        "",
        &["mode", "model", "grid", "time", "solver", "initial", "fast", "output", "refine", "stability", "diagnostics"],
    );

    let mode = r.string(&root, "", "mode", false).and_then(|s| {
        s.parse::<Mode>().map_err(|m| r.errors.push(invalid("mode", m))).ok()
    });
    let params = r.table(&root, "", "model", true).and_then(|t| read_model(&mut r, t));
    let grid = r.table(&root, "", "grid", true).and_then(|t| read_grid(&mut r, t));

    let mut solver = SolverConfig::default();
    if let Some(t) = r.table(&root, "", "time", true) {
        r.reject_unknown(t, "time", &["dt", "t_end"]);
        if let Some(dt) = r.f64(t, "time", "dt", true) {
            solver.dt = dt;
        }
        if let Some(te) = r.f64(t, "time", "t_end", true) {
            solver.t_end = te;
        }
    }
    if let Some(t) = r.table(&root, "", "solver", false) {
        r.reject_unknown(t, "solver", &["linear_tol", "max_linear_iters"]);
        if let Some(x) = r.f64(t, "solver", "linear_tol", false) {
            solver.linear_tol = x;
        }
        if let Some(n) = r.usize(t, "solver", "max_linear_iters", false) {
            solver.max_linear_iters = n;
        }
    }
    if let Err(e) = solver.validate() {
        r.errors.push(invalid("time", e.to_string()));
    }

    let mut profiles = (None, None);
    if let Some(t) = r.table(&root, "", "initial", true) {
        r.reject_unknown(t, "initial", &["u", "v"]);
        profiles.0 = r.table(t, "initial", "u", true).and_then(|p| read_profile(&mut r, p, "initial.u"));
        profiles.1 = r.table(t, "initial", "v", true).and_then(|p| read_profile(&mut r, p, "initial.v"));
    }

    let mut fast = FastSection::default();
    if let Some(t) = r.table(&root, "", "fast", false) {
        r.reject_unknown(t, "fast", &["epsilon", "eps_list", "defect_p", "dissipation_p"]);
        fast.epsilon = r.f64(t, "fast", "epsilon", false);
        fast.eps_list = r.f64_list(t, "fast", "eps_list", false);
        fast.defect_p = r.f64(t, "fast", "defect_p", false);
        fast.dissipation_p = r.f64_list(t, "fast", "dissipation_p", false).unwrap_or_default();
        if fast.epsilon.is_some_and(|e| !(e > 0.0 && e < 1.0)) {
            r.errors.push(invalid("fast.epsilon", "must lie in (0, 1)"));
        }
        if let Some(list) = &fast.eps_list {
            if list.is_empty() || list.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
                r.errors.push(invalid("fast.eps_list", "must be a nonempty list of values in (0, 1)"));
            } else if list.windows(2).any(|w| w[1] >= w[0]) {
                r.errors.push(invalid("fast.eps_list", "must be strictly decreasing"));
            }
        }
        let ps = fast.defect_p.iter().chain(&fast.dissipation_p);
        if ps.into_iter().any(|&p| !(p > 0.0) || p == 1.0) {
            r.errors.push(invalid("fast", "exponents must be positive and different from 1"));
        }
    }

    let mut output = OutputSection::default();
    let mut snapshot_every = 50;
    if let Some(t) = r.table(&root, "", "output", false) {
        r.reject_unknown(t, "output", &["dir", "snapshot_every", "write_snapshots", "diagnostics_every"]);
        output.dir = r.string(t, "output", "dir", false).map(str::to_string);
        if let Some(n) = r.usize(t, "output", "snapshot_every", false) {
            snapshot_every = n;
        }
        if let Some(b) = r.bool(t, "output", "write_snapshots") {
            output.write_snapshots = b;
        }
        if let Some(n) = r.usize(t, "output", "diagnostics_every", false) {
            output.diagnostics_every = n;
        }
        if snapshot_every == 0 {
            r.errors.push(invalid("output.snapshot_every", "must be ≥ 1"));
        }
        if output.diagnostics_every == 0 {
            r.errors.push(invalid("output.diagnostics_every", "must be ≥ 1"));
        }
    }

    let refine = r.table(&root, "", "refine", false).and_then(|t| {
        r.reject_unknown(t, "refine", &["levels", "ratio"]);
        let levels = r.usize(t, "refine", "levels", true)?;
        let ratio = r.usize(t, "refine", "ratio", false).unwrap_or(2);
        if levels < 2 {
            r.errors.push(invalid("refine.levels", "must be ≥ 2"));
        }
        if ratio < 2 {
            r.errors.push(invalid("refine.ratio", "must be ≥ 2 so consecutive levels differ"));
        }
        Some(RefineSection { levels, ratio })
    });

    let stability = r.table(&root, "", "stability", false).and_then(|t| {
        r.reject_unknown(t, "stability", &["deltas"]);
        let deltas = r.f64_list(t, "stability", "deltas", true)?;
        if deltas.is_empty() || deltas.iter().any(|&d| d < 0.0) {
            r.errors.push(invalid("stability.deltas", "must be a nonempty list of values ≥ 0"));
        }
        Some(deltas)
    });

    let mut diagnostics = DiagnosticsSection::default();
    if let Some(t) = r.table(&root, "", "diagnostics", false) {
        r.reject_unknown(t, "diagnostics", &["p_list"]);
        if let Some(ps) = r.f64_list(t, "diagnostics", "p_list", false) {
            if ps.iter().any(|&p| !(p > 0.0)) {
                r.errors.push(invalid("diagnostics.p_list", "exponents must be positive"));
            }
            diagnostics.p_list = ps;
        }
    }

    if let Some(p) = &params {
        if p.regime() == Regime::Unsupported && !allow_unsupported {
            r.errors.push(ConfigError { key: "model".into(), kind: ConfigErrorKind::UnsupportedRegime });
        }
    }

    if !r.errors.is_empty() {
        return Err(Error::Config(r.errors));
    }
    let (Some(params), Some(grid), (Some(u_in), Some(v_in))) = (params, grid, profiles) else {
        unreachable!("every missing piece records an error")
    };
    let cfg = RunConfig {
        mode,
        problem: Problem { params, grid, solver, u_in, v_in, snapshot_every },
        fast,
        output,
        refine,
        stability,
        diagnostics,
    };
    if let Some(m) = mode {
        cfg.validate_for(m)?;
    }
    Ok(cfg)
}

fn float_array(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| Value::Float(x)).collect())
}

fn profile_table(p: &Profile) -> Table {
    let mut t = Table::new();
    match *p {
        Profile::Constant { value } => {
            t.insert("kind".into(), "constant".into());
            t.insert("value".into(), value.into());
        }
        Profile::Cosine { base, amp, kx, ky } => {
            t.insert("kind".into(), "cosine".into());
            t.insert("base".into(), base.into());
            t.insert("amp".into(), amp.into());
            t.insert("kx".into(), kx.into());
            t.insert("ky".into(), ky.into());
        }
        Profile::Coexistence => {
            t.insert("kind".into(), "coexistence".into());
        }
    }
    t
}

/// Writes every field explicitly, defaults included.
pub fn serialize(cfg: &RunConfig) -> String {
    let mut root = Table::new();
    if let Some(m) = cfg.mode {
        root.insert("mode".into(), m.as_str().into());
    }
    let p = &cfg.problem.params;
    let mut model = Table::new();
    for (k, v) in p.scalars() {
        model.insert(k.into(), v.into());
    }
    let mut phi = Table::new();
    match &p.phi {
        CrossFunction::Linear { slope } => {
            phi.insert("kind".into(), "linear".into());
            phi.insert("slope".into(), (*slope).into());
        }
        CrossFunction::Power { coeff, exponent } => {
            phi.insert("kind".into(), "power".into());
            phi.insert("coeff".into(), (*coeff).into());
            phi.insert("exponent".into(), (*exponent).into());
        }
        CrossFunction::Tabulated(table) => {
            phi.insert("kind".into(), "tabulated".into());
            let rows = table.points().into_iter().map(|(v, f)| float_array(&[v, f])).collect();
            phi.insert("points".into(), Value::Array(rows));
        }
    }
    model.insert("phi".into(), phi.into());
    root.insert("model".into(), model.into());

    let g = &cfg.problem.grid;
    let mut grid = Table::new();
    grid.insert("nx".into(), (g.n(0) as i64).into());
    grid.insert("lx".into(), g.length(0).into());
    if g.dim() == 2 {
        grid.insert("ny".into(), (g.n(1) as i64).into());
        grid.insert("ly".into(), g.length(1).into());
    }
    root.insert("grid".into(), grid.into());

    let s = &cfg.problem.solver;
    let mut time = Table::new();
    time.insert("dt".into(), s.dt.into());
    time.insert("t_end".into(), s.t_end.into());
    root.insert("time".into(), time.into());
    let mut solver = Table::new();
    solver.insert("linear_tol".into(), s.linear_tol.into());
    solver.insert("max_linear_iters".into(), (s.max_linear_iters as i64).into());
    root.insert("solver".into(), solver.into());

    let mut initial = Table::new();
    initial.insert("u".into(), profile_table(&cfg.problem.u_in).into());
    initial.insert("v".into(), profile_table(&cfg.problem.v_in).into());
    root.insert("initial".into(), initial.into());

    let f = &cfg.fast;
    let mut fast = Table::new();
    if let Some(e) = f.epsilon {
        fast.insert("epsilon".into(), e.into());
    }
    if let Some(list) = &f.eps_list {
        fast.insert("eps_list".into(), float_array(list));
    }
    if let Some(p) = f.defect_p {
        fast.insert("defect_p".into(), p.into());
    }
    fast.insert("dissipation_p".into(), float_array(&f.dissipation_p));
    root.insert("fast".into(), fast.into());

    let o = &cfg.output;
    let mut output = Table::new();
    if let Some(dir) = &o.dir {
        output.insert("dir".into(), dir.clone().into());
    }
    output.insert("snapshot_every".into(), (cfg.problem.snapshot_every as i64).into());
    output.insert("write_snapshots".into(), o.write_snapshots.into());
    output.insert("diagnostics_every".into(), (o.diagnostics_every as i64).into());
    root.insert("output".into(), output.into());

    if let Some(rf) = cfg.refine {
        let mut t = Table::new();
        t.insert("levels".into(), (rf.levels as i64).into());
        t.insert("ratio".into(), (rf.ratio as i64).into());
        root.insert("refine".into(), t.into());
    }
    if let Some(deltas) = &cfg.stability {
        let mut t = Table::new();
        t.insert("deltas".into(), float_array(deltas));
        root.insert("stability".into(), t.into());
    }
    let mut diag = Table::new();
    diag.insert("p_list".into(), float_array(&cfg.diagnostics.p_list));
    root.insert("diagnostics".into(), diag.into());

    toml::to_string(&root).expect("a TOML table always serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const SKT: &str = include_str!("../../../presets/skt.toml");
    const THM1: &str = include_str!("../../../presets/theorem1.toml");

    fn errors(text: &str) -> Vec<ConfigError> {
        match parse_config(text) {
            Err(Error::Config(errs)) => errs,
            other => panic!("expected config errors, got {other:?}"),
        }
    }

    #[test]
    fn presets_parse_into_their_regimes() {
        assert_eq!(parse_config(SKT).unwrap().regime(), Regime::Theorem2);
        assert_eq!(parse_config(THM1).unwrap().regime(), Regime::Theorem1);
    }

    #[test]
    fn unsupported_regime_needs_opt_in() {
        let text = SKT.replace("a = 1.0", "a = 0.5").replace("d = 1.0", "d = 3.0");
        let errs = errors(&text);
        assert!(errs.iter().any(|e| e.kind == ConfigErrorKind::UnsupportedRegime));
        let cfg = parse_config_with(&text, true).unwrap();
        assert_eq!(cfg.regime(), Regime::Unsupported);
    }

    #[test]
    fn errors_name_the_key() {
        let errs = errors(&SKT.replace("d_v = 0.1", "d_v = \"fast\"").replace("nx = 200", "nx = 200\nnz = 3"));
        assert!(errs.iter().any(|e| e.key == "model.d_v"
            && matches!(e.kind, ConfigErrorKind::TypeMismatch { .. })));
        assert!(errs.iter().any(|e| e.key == "grid.nz" && e.kind == ConfigErrorKind::Unknown));
        let errs = errors(&SKT.replace("r_c = 1.0", ""));
        assert_eq!(errs, vec![ConfigError { key: "model.r_c".into(), kind: ConfigErrorKind::Missing }]);
    }

    #[test]
    fn mode_specific_keys() {
        let cfg = parse_config(SKT).unwrap();
        assert!(cfg.validate_for(Mode::RunCross).is_ok());
        assert!(cfg.validate_for(Mode::Stability).is_ok());
        let no_eps = SKT.replace("epsilon = 1e-3", "");
        let cfg = parse_config(&no_eps).unwrap();
        assert!(matches!(cfg.validate_for(Mode::RunFast), Err(Error::Config(_))));
    }

    #[test]
    fn serialize_round_trips_presets() {
        for text in [SKT, THM1] {
            let cfg = parse_config(text).unwrap();
            assert_eq!(parse_config(&serialize(&cfg)).unwrap(), cfg);
        }
    }
}
