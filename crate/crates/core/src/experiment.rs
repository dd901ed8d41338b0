//! Experiment specification, flat key-value config files, coverage sweeps
//! and CSV output.
//!
//! Config files hold one `key = value` pair per line; `#` starts a comment.
//! Recognised keys (defaults reproduce the reference figure: alpha = 4,
//! lambda_b = 0.001, R = 10, T from -10 to 20 dB in 1 dB steps):
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `model.kind` | `ppp,mcp` | comma-separated list of `ppp`, `mcp` |
//! | `model.lambda_b` | `0.001` | BS density |
//! | `model.lambda_u` | `100 * lambda_b` | PPP user density |
//! | `model.r` | `10` | MCP cluster radius |
//! | `model.alpha` | `4` | path-loss exponent |
//! | `sweep.t_db_min` / `sweep.t_db_max` / `sweep.t_db_step` | `-10` / `20` / `1` | threshold grid (dB) |
//! | `sweep.schemes` | `isp,msp,msp_ad` | ranking schemes |
//! | `sweep.roles` | `near,far` | user roles |
//! | `engine` | `both` | `analytic`, `mc` or `both` |
//! | `laplace_variant` | `auto` | MCP transform: `auto`, `exact`, `approx` |
//! | `analytic.tol` | `1e-4` | absolute coverage tolerance |
//! | `mc.trials` | `100000` | Monte Carlo trials |
//! | `mc.seed` | `1` | master seed |
//! | `mc.window_radius` | `10/sqrt(pi lambda_b)` | simulation window |
//! | `output` | stdout | CSV path |
//! | `output.timing` | `false` | fill the `wall_ms` column |

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::coverage::{coverage, RankingScheme, UserRole, DEFAULT_COVERAGE_TOL};
use crate::error::{Error, Result};
use crate::estimate::CoverageEstimate;
use crate::laplace::{LaplaceEvaluator, LaplaceVariant};
use crate::sim::{default_window_radius, simulate, SimConfig};
use crate::spatial::{ModelConfig, ModelKind, SirThreshold, DEFAULT_USER_LOAD};

/// Version token written ahead of the CSV header.
pub const CSV_SCHEMA: &str = "noma-coverage-csv/1";

pub const CSV_COLUMNS: [&str; 12] = [
    "model",
    "scheme",
    "role",
    "t_db",
    "t_linear",
    "coverage",
    "ci_halfwidth",
    "trials",
    "seed",
    "engine",
    "laplace_variant",
    "wall_ms",
];

/// Environment variable redirecting the output file into another directory.
pub const OUTPUT_DIR_ENV: &str = "NOMA_COV_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    Analytic,
    MonteCarlo,
    #[default]
    Both,
}

impl Engine {
    pub fn runs_analytic(self) -> bool {
        matches!(self, Engine::Analytic | Engine::Both)
    }

    pub fn runs_mc(self) -> bool {
        matches!(self, Engine::MonteCarlo | Engine::Both)
    }
}

impl std::str::FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "analytic" => Ok(Engine::Analytic),
            "mc" | "montecarlo" | "simulate" => Ok(Engine::MonteCarlo),
            "both" => Ok(Engine::Both),
            other => Err(format!("unknown engine `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McSettings {
    pub trials: u64,
    pub seed: u64,
    /// `None` uses the default window of the model.
    pub window_radius: Option<f64>,
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            trials: 100_000,
            seed: 1,
            window_radius: None,
        }
    }
}

/// A full sweep request.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub models: Vec<ModelConfig>,
    pub schemes: Vec<RankingScheme>,
    pub roles: Vec<UserRole>,
    pub t_grid_db: Vec<f64>,
    pub engine: Engine,
    pub mc: McSettings,
    pub laplace_variant: LaplaceVariant,
    pub analytic_tol: f64,
    pub output: Option<PathBuf>,
    pub record_timing: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        SpecBuilder::default().build().expect("defaults are valid")
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        let cfg = |key: &str, reason: String| Error::Config {
            key: key.to_string(),
            reason,
        };
        if self.models.is_empty() {
            return Err(cfg("model.kind", "no model selected".into()));
        }
        for m in &self.models {
            m.validate().map_err(|e| cfg("model", e.to_string()))?;
        }
        if self.schemes.is_empty() {
            return Err(cfg("sweep.schemes", "empty".into()));
        }
        if self.roles.is_empty() {
            return Err(cfg("sweep.roles", "empty".into()));
        }
        if self.t_grid_db.is_empty() {
            return Err(cfg("sweep.t_db_min", "empty threshold grid".into()));
        }
        if self.t_grid_db.windows(2).any(|w| w[0] >= w[1]) {
            return Err(cfg("sweep.t_db_step", "threshold grid must be strictly increasing".into()));
        }
        if !(self.analytic_tol > 0.0 && self.analytic_tol < 1.0) {
            return Err(cfg("analytic.tol", format!("must lie in (0, 1), got {}", self.analytic_tol)));
        }
        if self.mc.trials == 0 {
            return Err(cfg("mc.trials", "must be >= 1".into()));
        }
        Ok(())
    }

    pub fn thresholds(&self) -> Result<Vec<SirThreshold>> {
        self.t_grid_db.iter().map(|&d| SirThreshold::from_db(d)).collect()
    }

    /// Output path after applying [`OUTPUT_DIR_ENV`].
    pub fn resolved_output(&self) -> Option<PathBuf> {
        let path = self.output.as_ref()?;
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => {
                let name = path.file_name().map(PathBuf::from).unwrap_or_else(|| path.clone());
                Some(Path::new(&dir).join(name))
            }
            _ => Some(path.clone()),
        }
    }
}

/// Collects raw key-value settings and turns them into a validated spec.
#[derive(Debug, Clone, Default)]
pub struct SpecBuilder {
    values: BTreeMap<String, String>,
}

const KNOWN_KEYS: [&str; 18] = [
    "model.kind",
    "model.lambda_b",
    "model.lambda_u",
    "model.r",
    "model.alpha",
    "sweep.t_db_min",
    "sweep.t_db_max",
    "sweep.t_db_step",
    "sweep.schemes",
    "sweep.roles",
    "engine",
    "laplace_variant",
    "analytic.tol",
    "mc.trials",
    "mc.seed",
    "mc.window_radius",
    "output",
    "output.timing",
];

fn config_err(key: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        reason: reason.into(),
    }
}

impl SpecBuilder {
    /// Parses `key = value` lines. Later lines override earlier ones.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut b = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                config_err(&format!("line {}", lineno + 1), format!("expected `key = value`, got `{line}`"))
            })?;
            b.set(key.trim(), value.trim())?;
        }
        Ok(b)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<&mut Self> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(config_err(key, "unknown key"));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(self)
    }

    /// Applies a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<&mut Self> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| config_err(pair, "override must look like key=value"))?;
        self.set(k.trim(), v.trim())
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn number(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => {
                let x: f64 = v
                    .parse()
                    .map_err(|_| config_err(key, format!("expected a number, got `{v}`")))?;
                if !x.is_finite() {
                    return Err(config_err(key, format!("must be finite, got `{v}`")));
                }
                Ok(x)
            }
        }
    }

    fn integer(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => {
                let cleaned = v.replace('_', "");
                cleaned
                    .parse::<u64>()
                    .or_else(|_| {
                        // Accept 1e5 style for trial counts.
                        cleaned
                            .parse::<f64>()
                            .ok()
                            .filter(|x| x.fract() == 0.0 && *x >= 0.0 && *x <= u64::MAX as f64)
                            .map(|x| x as u64)
                            .ok_or(())
                    })
                    .map_err(|_| config_err(key, format!("expected a non-negative integer, got `{v}`")))
            }
        }
    }

    fn list<T>(&self, key: &str, default: &[T]) -> Result<Vec<T>>
    where
        T: std::str::FromStr<Err = String> + Clone + PartialEq,
    {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => {
                let mut out: Vec<T> = Vec::new();
                for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let parsed = item.parse::<T>().map_err(|e| config_err(key, e))?;
                    if !out.contains(&parsed) {
                        out.push(parsed);
                    }
                }
                if out.is_empty() {
                    return Err(config_err(key, "empty list"));
                }
                Ok(out)
            }
        }
    }

    fn boolean(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key).map(|v| v.to_ascii_lowercase()) {
            None => Ok(default),
            Some(v) if v == "true" || v == "1" || v == "yes" => Ok(true),
            Some(v) if v == "false" || v == "0" || v == "no" => Ok(false),
            Some(v) => Err(config_err(key, format!("expected true or false, got `{v}`"))),
        }
    }

    pub fn build(&self) -> Result<ExperimentSpec> {
        let kinds: Vec<ModelKind> = self.list("model.kind", &[ModelKind::Ppp, ModelKind::Mcp])?;
        let lambda_b = self.number("model.lambda_b", 1e-3)?;
        let alpha = self.number("model.alpha", 4.0)?;
        let radius = self.number("model.r", 10.0)?;
        let lambda_u = self.number("model.lambda_u", DEFAULT_USER_LOAD * lambda_b)?;
        if !(alpha > 2.0) {
            return Err(config_err("model.alpha", format!("must be > 2, got {alpha}")));
        }
        if !(lambda_b > 0.0) {
            return Err(config_err("model.lambda_b", format!("must be positive, got {lambda_b}")));
        }
        let mut models = Vec::with_capacity(kinds.len());
        for kind in kinds {
            let m = match kind {
                ModelKind::Ppp => ModelConfig::ppp_with_users(lambda_b, lambda_u, alpha)
                    .map_err(|e| config_err("model.lambda_u", e.to_string()))?,
                ModelKind::Mcp => {
                    ModelConfig::mcp(lambda_b, radius, alpha).map_err(|e| config_err("model.r", e.to_string()))?
                }
            };
            models.push(m);
        }

        let t_min = self.number("sweep.t_db_min", -10.0)?;
        let t_max = self.number("sweep.t_db_max", 20.0)?;
        let step = self.number("sweep.t_db_step", 1.0)?;
        if !(step > 0.0) {
            return Err(config_err("sweep.t_db_step", format!("must be positive, got {step}")));
        }
        if t_max < t_min {
            return Err(config_err("sweep.t_db_max", format!("{t_max} is below t_db_min {t_min}")));
        }
        let n = ((t_max - t_min) / step + 1e-9).floor() as usize + 1;
        if n > 100_000 {
            return Err(config_err("sweep.t_db_step", format!("grid would have {n} points")));
        }
        let t_grid_db = (0..n).map(|i| t_min + i as f64 * step).collect();

        let window_radius = match self.get("mc.window_radius") {
            None => None,
            Some(_) => Some(self.number("mc.window_radius", 0.0)?),
        };
        if let Some(w) = window_radius {
            let min = default_window_radius(lambda_b);
            if w < min * (1.0 - 1e-12) {
                return Err(config_err("mc.window_radius", format!("must be >= {min}, got {w}")));
            }
        }

        let spec = ExperimentSpec {
            models,
            schemes: self.list("sweep.schemes", &RankingScheme::ALL)?,
            roles: self.list("sweep.roles", &UserRole::ALL)?,
            t_grid_db,
            engine: match self.get("engine") {
                None => Engine::default(),
                Some(v) => v.parse().map_err(|e: String| config_err("engine", e))?,
            },
            mc: McSettings {
                trials: self.integer("mc.trials", McSettings::default().trials)?,
                seed: self.integer("mc.seed", McSettings::default().seed)?,
                window_radius,
            },
            laplace_variant: match self.get("laplace_variant") {
                None => LaplaceVariant::default(),
                Some(v) => v.parse().map_err(|e: String| config_err("laplace_variant", e))?,
            },
            analytic_tol: self.number("analytic.tol", DEFAULT_COVERAGE_TOL)?,
            output: self.get("output").filter(|s| !s.is_empty()).map(PathBuf::from),
            record_timing: self.boolean("output.timing", false)?,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Reads and validates a config file.
pub fn parse_config(path: &Path) -> Result<ExperimentSpec> {
    load_builder(path)?.build()
}

/// Reads a config file without building it, so overrides can be applied.
pub fn load_builder(path: &Path) -> Result<SpecBuilder> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(&path.display().to_string(), format!("cannot read: {e}")))?;
    SpecBuilder::parse_str(&text)
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub model: ModelKind,
    pub scheme: RankingScheme,
    pub role: UserRole,
    pub t_db: f64,
    pub t_linear: f64,
    pub estimate: CoverageEstimate,
    pub laplace_variant: Option<&'static str>,
    pub wall_ms: Option<f64>,
}

/// Runs every requested (model, scheme, role, T, engine) cell.
///
/// Rows come back ordered by model, scheme, role, threshold and engine
/// (analytic before Monte Carlo), independent of thread count.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let thresholds = spec.thresholds()?;
    let mut rows = Vec::new();
    for model in &spec.models {
        let mut analytic: BTreeMap<(RankingScheme, UserRole, usize), SweepRow> = BTreeMap::new();
        let mut mc: BTreeMap<(RankingScheme, UserRole, usize), SweepRow> = BTreeMap::new();

        if spec.engine.runs_analytic() {
            let ev = LaplaceEvaluator::for_model(model, spec.laplace_variant)?;
            let cells: Vec<(RankingScheme, UserRole, usize)> = spec
                .schemes
                .iter()
                .flat_map(|&s| spec.roles.iter().map(move |&r| (s, r)))
                .flat_map(|(s, r)| (0..thresholds.len()).map(move |k| (s, r, k)))
                .collect();
            let computed: Vec<Result<SweepRow>> = cells
                .par_iter()
                .map(|&(scheme, role, k)| {
                    let start = Instant::now();
                    let est = coverage(model, scheme, role, thresholds[k], &ev, spec.analytic_tol)?;
                    Ok(SweepRow {
                        model: model.kind(),
                        scheme,
                        role,
                        t_db: spec.t_grid_db[k],
                        t_linear: thresholds[k].linear(),
                        estimate: est,
                        laplace_variant: Some(ev.model().tag()),
                        wall_ms: spec.record_timing.then(|| start.elapsed().as_secs_f64() * 1e3),
                    })
                })
                .collect();
            for (cell, row) in cells.into_iter().zip(computed) {
                analytic.insert(cell, row?);
            }
        }

        if spec.engine.runs_mc() {
            let mut cfg = SimConfig::new(*model, spec.mc.trials, spec.mc.seed, thresholds.clone())?;
            if let Some(w) = spec.mc.window_radius {
                cfg.window_radius = w;
                cfg.validate()?;
            }
            let start = Instant::now();
            let summary = simulate(&cfg)?;
            let wall = spec.record_timing.then(|| start.elapsed().as_secs_f64() * 1e3);
            for &scheme in &spec.schemes {
                for &role in &spec.roles {
                    for (k, est) in summary.estimate(scheme, role).into_iter().enumerate() {
                        mc.insert(
                            (scheme, role, k),
                            SweepRow {
                                model: model.kind(),
                                scheme,
                                role,
                                t_db: spec.t_grid_db[k],
                                t_linear: thresholds[k].linear(),
                                estimate: est,
                                laplace_variant: None,
                                wall_ms: wall,
                            },
                        );
                    }
                }
            }
        }

        for &scheme in &spec.schemes {
            for &role in &spec.roles {
                for k in 0..thresholds.len() {
                    if let Some(r) = analytic.remove(&(scheme, role, k)) {
                        rows.push(r);
                    }
                    if let Some(r) = mc.remove(&(scheme, role, k)) {
                        rows.push(r);
                    }
                }
            }
        }
    }
    Ok(rows)
}

/// Renders rows as CSV: schema comment, header, one line per row, LF endings.
pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# schema: {CSV_SCHEMA}");
    out.push_str(&CSV_COLUMNS.join(","));
    out.push('\n');
    for r in rows {
        let e = &r.estimate;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.model.as_str(),
            r.scheme.as_str(),
            r.role.as_str(),
            r.t_db,
            r.t_linear,
            e.value,
            e.ci_halfwidth,
            e.trials,
            e.seed.map(|s| s.to_string()).unwrap_or_default(),
            e.method.as_str(),
            r.laplace_variant.unwrap_or(""),
            r.wall_ms.map(|w| format!("{w:.3}")).unwrap_or_default(),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_reference_defaults() {
        let spec = SpecBuilder::parse_str("").unwrap().build().unwrap();
        assert_eq!(spec.models.len(), 2);
        assert_eq!(spec.models[0].kind(), ModelKind::Ppp);
        assert_eq!(spec.models[1], ModelConfig::mcp(1e-3, 10.0, 4.0).unwrap());
        assert_eq!(spec.t_grid_db.len(), 31);
        assert_eq!(spec.t_grid_db[0], -10.0);
        assert_eq!(spec.t_grid_db[30], 20.0);
        assert_eq!(spec.schemes.len(), 3);
        assert_eq!(spec.roles.len(), 2);
        assert_eq!(spec.engine, Engine::Both);
        assert_eq!(spec, ExperimentSpec::default());
    }

    #[test]
    fn rejects_bad_values_naming_the_key() {
        let err = |text: &str| SpecBuilder::parse_str(text).and_then(|b| b.build()).unwrap_err();
        let key_of = |e: Error| match e {
            Error::Config { key, .. } => key,
            other => panic!("unexpected {other:?}"),
        };
        assert_eq!(key_of(err("model.alpha = 2")), "model.alpha");
        assert_eq!(key_of(err("sweep.t_db_step = 0")), "sweep.t_db_step");
        assert_eq!(key_of(err("model.bogus = 1")), "model.bogus");
        assert_eq!(key_of(err("mc.trials = lots")), "mc.trials");
        assert_eq!(key_of(err("engine = quantum")), "engine");
        assert_eq!(key_of(err("model.kind = ppp\nmodel.lambda_u = 0.002")), "model.lambda_u");
        assert!(matches!(err("no equals sign"), Error::Config { .. }));
    }

    #[test]
    fn parses_lists_comments_and_overrides() {
        let mut b = SpecBuilder::parse_str(
            "# comment\nmodel.kind = mcp\nsweep.schemes = isp, msp_ad # inline\nmc.trials = 1e4\n",
        )
        .unwrap();
        b.set_pair("sweep.t_db_min=0").unwrap();
        b.set_pair("sweep.t_db_max = 10").unwrap();
        b.set_pair("sweep.t_db_step=5").unwrap();
        let spec = b.build().unwrap();
        assert_eq!(spec.models.len(), 1);
        assert_eq!(spec.schemes, vec![RankingScheme::Isp, RankingScheme::MspAd]);
        assert_eq!(spec.mc.trials, 10_000);
        assert_eq!(spec.t_grid_db, vec![0.0, 5.0, 10.0]);
    }

    #[test]
    fn csv_layout() {
        let row = SweepRow {
            model: ModelKind::Mcp,
            scheme: RankingScheme::MspAd,
            role: UserRole::Far,
            t_db: 0.0,
            t_linear: 1.0,
            estimate: CoverageEstimate::from_counts(25, 100, 7),
            laplace_variant: None,
            wall_ms: None,
        };
        let csv = to_csv(&[row]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# schema: noma-coverage-csv/1");
        assert_eq!(lines[1], CSV_COLUMNS.join(","));
        assert!(lines[2].starts_with("mcp,msp_ad,far,0,1,0.25,"));
        assert!(lines[2].ends_with(",100,7,mc,,"));
        assert!(!csv.contains('\r'));
    }
}
