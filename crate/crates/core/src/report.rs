//! Batch configs, the analysis pipelines behind each CLI mode, and
//! deterministic CSV / JSON-lines output.

use crate::error::{Error, Result};
use crate::orbit::{
    count_functions_by_height, estimate_beta, is_preperiodic, orbit_census, predict_function_count,
    theta_ratio, AssumeFree, CensusOptions, Count, Cutoff, SemigroupSystem, DEFAULT_BUDGET,
};
use crate::p1::{check_generic_set, ProjPointQ, RationalMapQ};
use crate::weights::{
    acyclic_constant, classify, count_exact, cyclic_growth, solve_rho, CyclicClassification,
    WeightVector, DEFAULT_RHO_TOL,
};
use num_bigint::BigInt;
use std::fmt;
use std::str::FromStr;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
const DETERMINISM: &str =
    "output is a pure function of the configuration: no randomness, clocks or thread scheduling affect it";

/// One analysis pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    Rho,
    CountWords,
    Constants,
    Classify,
    CritCheck,
    Preperiodic,
    OrbitCensus,
    Beta,
    Predict,
    Theta,
}

impl Mode {
    pub const ALL: [Mode; 10] = [
        Mode::Rho,
        Mode::CountWords,
        Mode::Constants,
        Mode::Classify,
        Mode::CritCheck,
        Mode::Preperiodic,
        Mode::OrbitCensus,
        Mode::Beta,
        Mode::Predict,
        Mode::Theta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Rho => "rho",
            Mode::CountWords => "count-words",
            Mode::Constants => "constants",
            Mode::Classify => "classify",
            Mode::CritCheck => "crit-check",
            Mode::Preperiodic => "preperiodic",
            Mode::OrbitCensus => "orbit-census",
            Mode::Beta => "beta",
            Mode::Predict => "predict",
            Mode::Theta => "theta",
        }
    }

    fn needs_maps(self) -> bool {
        !matches!(self, Mode::Rho | Mode::CountWords | Mode::Constants | Mode::Classify)
    }

    fn needs_point(self) -> bool {
        matches!(
            self,
            Mode::Preperiodic | Mode::OrbitCensus | Mode::Beta | Mode::Predict | Mode::Theta
        )
    }

    fn needs_heights(self) -> bool {
        matches!(self, Mode::OrbitCensus | Mode::Predict | Mode::Theta)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mode `{s}`"))
    }
}

/// A parsed configuration. Map coefficients are kept exactly as written
/// (highest degree first) so that the echo parses back to the same value.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemConfig {
    pub maps: Vec<(Vec<BigInt>, Vec<BigInt>)>,
    pub degrees: Option<Vec<u64>>,
    pub point: Option<(BigInt, BigInt)>,
    pub x: Option<f64>,
    pub x_grid: Vec<f64>,
    pub weight_max: Option<u64>,
    pub weight_grid: Vec<u64>,
    pub modes: Vec<Mode>,
    pub tol: f64,
    pub budget: usize,
    /// Number of terms of the height-sum sequence.
    pub depth: usize,
    pub assume_free: bool,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            maps: Vec::new(),
            degrees: None,
            point: None,
            x: None,
            x_grid: Vec::new(),
            weight_max: None,
            weight_grid: Vec::new(),
            modes: Vec::new(),
            tol: DEFAULT_RHO_TOL,
            budget: DEFAULT_BUDGET,
            depth: 10,
            assume_free: false,
        }
    }
}

fn perr(line: usize, field: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        field: field.to_string(),
        message: message.into(),
    }
}

fn parse_list<T: FromStr>(s: &str) -> std::result::Result<Vec<T>, String> {
    let inner = s
        .trim()
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| format!("expected a bracketed list, got `{}`", s.trim()))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| format!("bad list entry `{}`", t.trim())))
        .collect()
}

fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("bad real `{s}`"))?;
    if !v.is_finite() {
        return Err(format!("real `{s}` is not finite"));
    }
    Ok(v)
}

fn parse_map(s: &str) -> std::result::Result<(Vec<BigInt>, Vec<BigInt>), String> {
    let (num, den) = s
        .split_once('/')
        .ok_or("expected `[numerator] / [denominator]`")?;
    let num: Vec<BigInt> = parse_list(num)?;
    let den: Vec<BigInt> = parse_list(den)?;
    if num.is_empty() || den.is_empty() {
        return Err("coefficient lists must be nonempty".into());
    }
    RationalMapQ::from_coefficients(&num, &den).map_err(|e| e.to_string())?;
    Ok((num, den))
}

fn parse_point(s: &str) -> std::result::Result<(BigInt, BigInt), String> {
    let inner = s
        .trim()
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or("expected `(x, y)`")?;
    let (x, y) = inner.split_once(',').ok_or("expected `(x, y)`")?;
    let x: BigInt = x.trim().parse().map_err(|_| format!("bad integer `{}`", x.trim()))?;
    let y: BigInt = y.trim().parse().map_err(|_| format!("bad integer `{}`", y.trim()))?;
    ProjPointQ::new(x.clone(), y.clone()).map_err(|e| e.to_string())?;
    Ok((x, y))
}

impl SystemConfig {
    /// Parses `key = value` lines. `#` starts a comment; `map` may repeat,
    /// every other key may appear once.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SystemConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        let mut last_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            last_line = line;
            let content = raw.split('#').next().unwrap().trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| perr(line, "", "expected `key = value`"))?;
            let key = key.trim();
            let value = value.trim();
            const KEYS: [&str; 12] = [
                "map", "degrees", "point", "x", "x_grid", "weight_max", "weight_grid", "mode",
                "tol", "budget", "depth", "assume_free",
            ];
            let Some(&key) = KEYS.iter().find(|&&k| k == key) else {
                return Err(perr(line, key, "unknown key"));
            };
            if key != "map" {
                if seen.contains(&key) {
                    return Err(perr(line, key, "key given twice"));
                }
                seen.push(key);
            }
            let e = |m: String| perr(line, key, m);
            match key {
                "map" => cfg.maps.push(parse_map(value).map_err(e)?),
                "degrees" => cfg.degrees = Some(parse_list(value).map_err(e)?),
                "point" => cfg.point = Some(parse_point(value).map_err(e)?),
                "x" => {
                    let v = parse_real(value).map_err(e)?;
                    if v <= 0.0 {
                        return Err(perr(line, key, "height must be positive"));
                    }
                    cfg.x = Some(v);
                }
                "x_grid" => {
                    let grid: Vec<f64> = parse_list(value).map_err(e)?;
                    if grid.is_empty() || grid.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
                        return Err(perr(line, key, "grid must be nonempty, positive and finite"));
                    }
                    cfg.x_grid = grid;
                }
                "weight_max" => {
                    cfg.weight_max =
                        Some(value.parse().map_err(|_| e(format!("bad integer `{value}`")))?)
                }
                "weight_grid" => cfg.weight_grid = parse_list(value).map_err(e)?,
                "mode" => {
                    cfg.modes = value
                        .split(',')
                        .map(|m| m.trim().parse::<Mode>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(e)?
                }
                "tol" => {
                    let v = parse_real(value).map_err(e)?;
                    if v <= 0.0 {
                        return Err(perr(line, key, "tolerance must be positive"));
                    }
                    cfg.tol = v;
                }
                "budget" => {
                    cfg.budget = value.parse().map_err(|_| e(format!("bad integer `{value}`")))?
                }
                "depth" => {
                    cfg.depth = value.parse().map_err(|_| e(format!("bad integer `{value}`")))?
                }
                "assume_free" => {
                    cfg.assume_free = match value {
                        "true" => true,
                        "false" => false,
                        _ => return Err(e(format!("expected true or false, got `{value}`"))),
                    }
                }
                _ => unreachable!(),
            }
        }
        if cfg.maps.is_empty() && cfg.degrees.is_none() {
            return Err(perr(last_line + 1, "map", "no maps given"));
        }
        if let Some(d) = &cfg.degrees {
            WeightVector::new(d.clone()).map_err(|err| perr(0, "degrees", err.to_string()))?;
            if !cfg.maps.is_empty() && *d != cfg.map_degrees() {
                return Err(perr(0, "degrees", "degrees disagree with the maps"));
            }
        }
        Ok(cfg)
    }

    fn map_degrees(&self) -> Vec<u64> {
        self.rational_maps().iter().map(|m| m.degree() as u64).collect()
    }

    fn rational_maps(&self) -> Vec<RationalMapQ> {
        self.maps
            .iter()
            .map(|(n, d)| RationalMapQ::from_coefficients(n, d).expect("validated while parsing"))
            .collect()
    }

    /// Checks that everything `mode` needs is present.
    pub fn validate_for(&self, mode: Mode) -> Result<()> {
        let field = |f: &str, m: String| perr(0, f, format!("{m} (required by mode {mode})"));
        if mode.needs_maps() && self.maps.is_empty() {
            return Err(field("map", "no maps given".into()));
        }
        if mode == Mode::CritCheck && self.maps.len() < 2 {
            return Err(field("map", "at least two maps needed".into()));
        }
        if mode.needs_point() && self.point.is_none() {
            return Err(field("point", "no base point".into()));
        }
        if mode.needs_heights() && self.x.is_none() && self.x_grid.is_empty() {
            return Err(field("x", "no height cutoff (x or x_grid)".into()));
        }
        if mode == Mode::CountWords && self.weight_max.is_none() && self.weight_grid.is_empty() {
            return Err(field("weight_max", "no weight cutoff (weight_max or weight_grid)".into()));
        }
        Ok(())
    }

    pub fn weights(&self) -> Result<WeightVector> {
        match &self.degrees {
            Some(d) => WeightVector::new(d.clone()),
            None => WeightVector::new(self.map_degrees()),
        }
    }

    pub fn system(&self) -> Result<SemigroupSystem> {
        SemigroupSystem::new(self.rational_maps())
    }

    pub fn base_point(&self) -> Option<ProjPointQ> {
        self.point
            .as_ref()
            .map(|(x, y)| ProjPointQ::new(x.clone(), y.clone()).expect("validated while parsing"))
    }

    /// Height grid for orbit modes, ascending and deduplicated.
    pub fn heights(&self) -> Vec<f64> {
        let mut g = self.x_grid.clone();
        if let Some(x) = self.x {
            g.push(x);
        }
        g.sort_by(|a, b| a.total_cmp(b));
        g.dedup();
        g
    }

    /// Canonical text form; parsing it gives back an equal config.
    pub fn to_config_string(&self) -> String {
        let ints = |v: &[BigInt]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ");
        let mut out = Vec::new();
        for (n, d) in &self.maps {
            out.push(format!("map = [{}] / [{}]", ints(n), ints(d)));
        }
        if let Some(d) = &self.degrees {
            out.push(format!(
                "degrees = [{}]",
                d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
            ));
        }
        if let Some((x, y)) = &self.point {
            out.push(format!("point = ({x}, {y})"));
        }
        if let Some(x) = self.x {
            out.push(format!("x = {x:?}"));
        }
        if !self.x_grid.is_empty() {
            let g: Vec<String> = self.x_grid.iter().map(|v| format!("{v:?}")).collect();
            out.push(format!("x_grid = [{}]", g.join(", ")));
        }
        if let Some(w) = self.weight_max {
            out.push(format!("weight_max = {w}"));
        }
        if !self.weight_grid.is_empty() {
            let g: Vec<String> = self.weight_grid.iter().map(|v| v.to_string()).collect();
            out.push(format!("weight_grid = [{}]", g.join(", ")));
        }
        if !self.modes.is_empty() {
            let m: Vec<&str> = self.modes.iter().map(|m| m.name()).collect();
            out.push(format!("mode = {}", m.join(", ")));
        }
        out.push(format!("tol = {:?}", self.tol));
        out.push(format!("budget = {}", self.budget));
        out.push(format!("depth = {}", self.depth));
        out.push(format!("assume_free = {}", self.assume_free));
        out.join("\n") + "\n"
    }
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(BigInt),
    Real(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(BigInt::from(v))
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Real)
    }
}

impl From<Count> for Cell {
    fn from(c: Count) -> Self {
        match c {
            Count::Finite(n) => n.into(),
            Count::Infinite => Cell::Text("inf".into()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WarningKind {
    PreperiodicBasePoint,
    BudgetExhausted,
    CyclicDegreesNoConstant,
    FreenessNotAsserted,
    FiniteOrbit,
}

impl WarningKind {
    pub fn name(self) -> &'static str {
        match self {
            WarningKind::PreperiodicBasePoint => "preperiodic_base_point",
            WarningKind::BudgetExhausted => "budget_exhausted",
            WarningKind::CyclicDegreesNoConstant => "cyclic_degrees_no_constant",
            WarningKind::FreenessNotAsserted => "freeness_not_asserted",
            WarningKind::FiniteOrbit => "finite_orbit",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Warning {
    pub kind: WarningKind,
    pub mode: Mode,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    /// Config echo, one line per entry.
    pub config: Vec<String>,
    pub tables: Vec<Table>,
    pub warnings: Vec<Warning>,
}

impl Report {
    pub fn budget_exhausted(&self) -> bool {
        self.warnings.iter().any(|w| w.kind == WarningKind::BudgetExhausted)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    fn warn(&mut self, kind: WarningKind, mode: Mode, detail: impl Into<String>) {
        self.warnings.push(Warning {
            kind,
            mode,
            detail: detail.into(),
        });
    }
}

/// Runs every mode listed in the config, in order.
pub fn run(config: &SystemConfig) -> Result<Report> {
    run_modes(config, &config.modes)
}

/// Runs the given modes against a config. Budget exhaustion becomes a
/// warning and leaves the affected table partial; other failures abort.
pub fn run_modes(config: &SystemConfig, modes: &[Mode]) -> Result<Report> {
    if modes.is_empty() {
        return Err(perr(0, "mode", "no mode selected"));
    }
    let mut report = Report {
        config: config.to_config_string().lines().map(str::to_string).collect(),
        tables: Vec::new(),
        warnings: Vec::new(),
    };
    for &mode in modes {
        config.validate_for(mode)?;
        let outcome = match mode {
            Mode::Rho => mode_rho(config, &mut report),
            Mode::CountWords => mode_count_words(config, &mut report),
            Mode::Constants => mode_constants(config, &mut report),
            Mode::Classify => mode_classify(config, &mut report),
            Mode::CritCheck => mode_crit_check(config, &mut report),
            Mode::Preperiodic => mode_preperiodic(config, &mut report),
            Mode::OrbitCensus => mode_orbit(config, &mut report),
            Mode::Beta => mode_beta(config, &mut report),
            Mode::Predict => mode_predict(config, &mut report),
            Mode::Theta => mode_theta(config, &mut report),
        };
        match outcome {
            Ok(()) => {}
            Err(Error::ResourceLimit(msg)) => report.warn(WarningKind::BudgetExhausted, mode, msg),
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}

/// Pushes `table` even when `body` stops early, so partial rows survive.
fn with_table(
    report: &mut Report,
    mut table: Table,
    body: impl FnOnce(&mut Table, &mut Report) -> Result<()>,
) -> Result<()> {
    let r = body(&mut table, report);
    report.tables.push(table);
    r
}

fn mode_rho(config: &SystemConfig, report: &mut Report) -> Result<()> {
    let d = config.weights()?;
    let rho = solve_rho(&d, config.tol)?;
    let mut t = Table::new("rho", &["degrees", "rho", "residual"]);
    t.push(vec![d.to_string().into(), rho.rho.into(), rho.residual.into()]);
    report.tables.push(t);
    Ok(())
}

fn mode_count_words(config: &SystemConfig, report: &mut Report) -> Result<()> {
    let d = config.weights()?;
    let mut grid = config.weight_grid.clone();
    grid.extend(config.weight_max);
    grid.sort_unstable();
    grid.dedup();
    let t = Table::new("word_counts", &["degrees", "x", "count", "count_with_identity"]);
    with_table(report, t, |t, _| {
        for &x in &grid {
            let with = count_exact(&d, x, true)?;
            let without = count_exact(&d, x, false)?;
            t.push(vec![
                d.to_string().into(),
                Cell::Int(x.into()),
                Cell::Int(without.into()),
                Cell::Int(with.into()),
            ]);
        }
        Ok(())
    })
}

fn mode_constants(config: &SystemConfig, report: &mut Report) -> Result<()> {
    let d = config.weights()?;
    let rho = solve_rho(&d, config.tol)?;
    let class = classify(&d);
    let mut t = Table::new(
        "constants",
        &["degrees", "classification", "rho", "acyclic_constant", "cyclic_constant", "cyclic_theta"],
    );
    match &class {
        CyclicClassification::Acyclic => {
            let c = acyclic_constant(&d, &rho)?;
            t.push(vec![
                d.to_string().into(),
                class.to_string().into(),
                rho.rho.into(),
                c.into(),
                Cell::Empty,
                Cell::Empty,
            ]);
        }
        CyclicClassification::Cyclic { base, .. } => {
            let g = cyclic_growth(&d)?;
            t.push(vec![
                d.to_string().into(),
                class.to_string().into(),
                rho.rho.into(),
                Cell::Empty,
                g.constant.into(),
                g.theta.into(),
            ]);
            report.warn(
                WarningKind::CyclicDegreesNoConstant,
                Mode::Constants,
                format!(
                    "degrees are powers of {base}; counts up to {base}^L grow like C*theta^(-L) with no single constant in X"
                ),
            );
        }
    }
    report.tables.push(t);
    Ok(())
}

fn mode_classify(config: &SystemConfig, report: &mut Report) -> Result<()> {
    let d = config.weights()?;
    let mut t = Table::new("classification", &["degrees", "classification", "base", "exponents"]);
    match classify(&d) {
        CyclicClassification::Acyclic => {
            t.push(vec![d.to_string().into(), "acyclic".to_string().into(), Cell::Empty, Cell::Empty])
        }
        CyclicClassification::Cyclic { base, exponents } => {
            let e: Vec<String> = exponents.iter().map(|a| a.to_string()).collect();
            t.push(vec![
                d.to_string().into(),
                "cyclic".to_string().into(),
                Cell::Int(base.into()),
                e.join(" ").into(),
            ])
        }
    }
    report.tables.push(t);
    Ok(())
}

fn mode_crit_check(config: &SystemConfig, report: &mut Report) -> Result<()> {
    let maps = config.rational_maps();
    let r = check_generic_set(&maps)?;
    let mut t = Table::new(
        "crit_maps",
        &["index", "map", "degree", "simple", "infinity_critical", "critical_values", "degree_at_least_4"],
    );
    for m in &r.maps {
        t.push(vec![
            (m.index + 1).into(),
            maps[m.index].to_string().into(),
            m.degree.into(),
            m.simple.into(),
            m.critical.infinity_is_critical_value.into(),
            m.critical.describe().into(),
            m.degree_at_least_4.into(),
        ]);
    }
    report.tables.push(t);
    let mut t = Table::new("crit_pairs", &["i", "j", "separate"]);
    for p in &r.pairs {
        t.push(vec![(p.i + 1).into(), (p.j + 1).into(), p.separate.into()]);
    }
    report.tables.push(t);
    let mut t = Table::new("crit_summary", &["simple", "separate", "degree_at_least_4", "generic"]);
    t.push(vec![
        r.all_simple().into(),
        r.all_separate().into(),
        r.all_degree_at_least_4().into(),
        r.generic().into(),
    ]);
    report.tables.push(t);
    Ok(())
}

fn mode_preperiodic(config: &SystemConfig, report: &mut Report) -> Result<()> {
    let s = config.system()?;
    let p = config.base_point().unwrap();
    let v = is_preperiodic(&s, &p, config.budget)?;
    let mut t = Table::new("preperiodic", &["point", "preperiodic", "f", "g"]);
    let (f, g) = match &v.witness {
        Some(w) => (Cell::Text(w.f.to_string()), Cell::Text(w.g.to_string())),
        None => (Cell::Empty, Cell::Empty),
    };
    t.push(vec![p.to_string().into(), v.verdict.into(), f, g]);
    report.tables.push(t);
    if v.verdict {
        report.warn(
            WarningKind::PreperiodicBasePoint,
            Mode::Preperiodic,
            format!("{p} is preperiodic"),
        );
    }
    Ok(())
}

/// Rho when the system has at least two generators.
fn system_rho(s: &SemigroupSystem, tol: f64) -> Result<Option<crate::weights::GrowthExponent>> {
    if s.rank() < 2 {
        return Ok(None);
    }
    solve_rho(s.degrees(), tol).map(Some)
}

/// Height sums and the predicted count, when the config allows them.
fn prediction_inputs(
    config: &SystemConfig,
    s: &SemigroupSystem,
    p: &ProjPointQ,
    mode: Mode,
    report: &mut Report,
) -> Result<Option<crate::orbit::BetaEstimate>> {
    let Some(rho) = system_rho(s, config.tol)? else {
        return Ok(None);
    };
    if classify(s.degrees()).is_cyclic() {
        report.warn(
            WarningKind::CyclicDegreesNoConstant,
            mode,
            "cyclic degrees: no predicted count",
        );
        return Ok(None);
    }
    if !config.assume_free {
        report.warn(
            WarningKind::FreenessNotAsserted,
            mode,
            "set assume_free = true to compute height sums and predictions",
        );
        return Ok(None);
    }
    match estimate_beta(s, p, &rho, config.depth.max(1), AssumeFree, config.budget) {
        Ok(b) => Ok(Some(b)),
        Err(Error::ResourceLimit(m)) => {
            report.warn(WarningKind::BudgetExhausted, mode, m);
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn mode_orbit(config: &SystemConfig, report: &mut Report) -> Result<()> {
    let s = config.system()?;
    let p = config.base_point().unwrap();
    let rho = system_rho(&s, config.tol)?;
    let preperiodic = is_preperiodic(&s, &p, config.budget)?.verdict;
    if preperiodic {
        report.warn(
            WarningKind::PreperiodicBasePoint,
            Mode::OrbitCensus,
            format!("{p} is preperiodic; function counts may be infinite"),
        );
    }
    let beta = if preperiodic {
        None
    } else {
        prediction_inputs(config, &s, &p, Mode::OrbitCensus, report)?
    };
    let t = Table::new("orbit", &["x", "n_funcs", "n_points", "predicted", "theta"]);
    let mut summary = Table::new(
        "orbit_summary",
        &["x", "fiber_max", "collisions", "max_height_drift", "b_s", "c_s", "point_growth_slope"],
    );
    let r = with_table(report, t, |t, _| {
        for x in config.heights() {
            let census = orbit_census(
                &s,
                &p,
                &Cutoff::Nats(x),
                CensusOptions {
                    max_depth: None,
                    budget: config.budget,
                },
            )?;
            let n = census.total_funcs();
            let predicted = match &beta {
                Some(b) => Some(predict_function_count(&s, x, b)?),
                None => None,
            };
            let theta = match (n, &rho) {
                (Count::Finite(k), Some(r)) => Some(k as f64 / x.powf(r.rho)),
                _ => None,
            };
            t.push(vec![
                x.into(),
                n.into(),
                census.distinct_points().len().into(),
                predicted.into(),
                theta.into(),
            ]);
            let finite = !census.is_infinite();
            summary.push(vec![
                x.into(),
                if finite { census.fiber_max().into() } else { Cell::Text("inf".into()) },
                census.collisions().len().into(),
                census.max_height_drift(s.degrees()).into(),
                s.b_s().into(),
                s.c_s().into(),
                census.point_growth_slope().into(),
            ]);
        }
        Ok(())
    });
    report.tables.push(summary);
    r
}

fn mode_beta(config: &SystemConfig, report: &mut Report) -> Result<()> {
    let s = config.system()?;
    let p = config.base_point().unwrap();
    if is_preperiodic(&s, &p, config.budget)?.verdict {
        report.warn(
            WarningKind::PreperiodicBasePoint,
            Mode::Beta,
            format!("{p} is preperiodic; height sums are undefined"),
        );
        return Ok(());
    }
    if !config.assume_free {
        report.warn(
            WarningKind::FreenessNotAsserted,
            Mode::Beta,
            "set assume_free = true to compute height sums",
        );
        return Ok(());
    }
    let Some(rho) = system_rho(&s, config.tol)? else {
        return Err(Error::InvalidInput("height sums need at least two maps".into()));
    };
    let b = estimate_beta(&s, &p, &rho, config.depth.max(1), AssumeFree, config.budget)?;
    let mut t = Table::new("beta", &["n", "beta_n", "step_bound", "tail_bound"]);
    for (i, &v) in b.beta_sequence.iter().enumerate() {
        let n = i + 1;
        t.push(vec![n.into(), v.into(), b.step_bound(n).into(), b.tail_bound_at(n).into()]);
    }
    report.tables.push(t);
    let mut t = Table::new("beta_summary", &["rho", "k", "c_prime", "shift_n"]);
    t.push(vec![
        rho.rho.into(),
        b.k.into(),
        b.c_prime.into(),
        b.shift_n.map_or(Cell::Empty, Cell::from),
    ]);
    report.tables.push(t);
    Ok(())
}

fn mode_predict(config: &SystemConfig, report: &mut Report) -> Result<()> {
    let s = config.system()?;
    let p = config.base_point().unwrap();
    if is_preperiodic(&s, &p, config.budget)?.verdict {
        report.warn(
            WarningKind::PreperiodicBasePoint,
            Mode::Predict,
            format!("{p} is preperiodic"),
        );
        return Ok(());
    }
    let Some(beta) = prediction_inputs(config, &s, &p, Mode::Predict, report)? else {
        return Ok(());
    };
    let t = Table::new("predict", &["x", "n_funcs", "predicted", "ratio"]);
    with_table(report, t, |t, _| {
        for x in config.heights() {
            let predicted = predict_function_count(&s, x, &beta)?;
            let n = count_functions_by_height(&s, &p, x, config.budget)?;
            let ratio = match n {
                Count::Finite(k) => Some(k as f64 / predicted),
                Count::Infinite => None,
            };
            t.push(vec![x.into(), n.into(), predicted.into(), ratio.into()]);
        }
        Ok(())
    })
}

fn mode_theta(config: &SystemConfig, report: &mut Report) -> Result<()> {
    let s = config.system()?;
    let p = config.base_point().unwrap();
    let Some(rho) = system_rho(&s, config.tol)? else {
        return Err(Error::InvalidInput("theta needs at least two maps".into()));
    };
    match theta_ratio(&s, &p, &config.heights(), &rho, config.budget) {
        Ok(rows) => {
            let mut t = Table::new("theta", &["x", "n_funcs", "theta"]);
            for (x, n, th) in rows {
                t.push(vec![x.into(), n.into(), th.into()]);
            }
            report.tables.push(t);
            Ok(())
        }
        Err(Error::InvalidInput(m)) if m.contains("preperiodic") => {
            report.warn(WarningKind::PreperiodicBasePoint, Mode::Theta, m);
            Ok(())
        }
        Err(e) => Err(e),
    }
}

// ---------------------------------------------------------------------------
// Output

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    JsonLines,
}

/// Twelve significant digits, `%g` style: fixed notation for exponents in
/// `[-4, 12)`, scientific otherwise, trailing zeros removed.
pub fn format_real(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.11e}");
    let (mant, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-4..12).contains(&exp) {
        trim(&format!("{:.*}", (11 - exp) as usize, v))
    } else {
        format!("{}e{}", trim(mant), exp)
    }
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Int(i) => i.to_string(),
        Cell::Real(v) => format_real(*v),
        Cell::Text(s) => s.clone(),
        Cell::Bool(b) => b.to_string(),
        Cell::Empty => String::new(),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn json_value(c: &Cell) -> String {
    match c {
        Cell::Int(i) => i.to_string(),
        Cell::Real(v) if v.is_finite() => format_real(*v),
        Cell::Real(v) => json_string(&format_real(*v)),
        Cell::Text(s) => json_string(s),
        Cell::Bool(b) => b.to_string(),
        Cell::Empty => "null".into(),
    }
}

fn json_object(mut fields: Vec<(String, String)>) -> String {
    fields.sort_by(|a, b| a.0.cmp(&b.0));
    let body: Vec<String> = fields
        .into_iter()
        .map(|(k, v)| format!("{}:{}", json_string(&k), v))
        .collect();
    format!("{{{}}}", body.join(","))
}

fn warnings_table(report: &Report) -> Table {
    let mut t = Table::new("warnings", &["kind", "mode", "detail"]);
    for w in &report.warnings {
        t.push(vec![
            w.kind.name().to_string().into(),
            w.mode.name().to_string().into(),
            w.detail.clone().into(),
        ]);
    }
    t
}

/// Serializes a report. The warnings table is always present, even when
/// empty.
pub fn emit(report: &Report, format: Format) -> String {
    let warnings = warnings_table(report);
    let tables = report.tables.iter().chain(std::iter::once(&warnings));
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str(&format!("# semiorbit {VERSION}\n# determinism: {DETERMINISM}\n"));
            for line in &report.config {
                out.push_str(&format!("# config: {line}\n"));
            }
            for t in tables {
                out.push_str(&format!("\n# table: {}\n", t.name));
                let header: Vec<String> = t.columns.iter().map(|c| csv_field(c)).collect();
                out.push_str(&header.join(","));
                out.push('\n');
                for row in &t.rows {
                    let cells: Vec<String> = row.iter().map(|c| csv_field(&cell_text(c))).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
            }
        }
        Format::JsonLines => {
            let config: Vec<String> = report.config.iter().map(|l| json_string(l)).collect();
            out.push_str(&json_object(vec![
                ("record".into(), json_string("metadata")),
                ("tool".into(), json_string("semiorbit")),
                ("version".into(), json_string(VERSION)),
                ("determinism".into(), json_string(DETERMINISM)),
                ("config".into(), format!("[{}]", config.join(","))),
            ]));
            out.push('\n');
            for t in tables {
                for row in &t.rows {
                    let mut fields: Vec<(String, String)> = t
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(k, c)| (k.clone(), json_value(c)))
                        .collect();
                    fields.push(("table".into(), json_string(&t.name)));
                    out.push_str(&json_object(fields));
                    out.push('\n');
                }
            }
        }
    }
    out
}
