//! Validation suite: the acceptance checks bundled behind one entry point.
//!
//! Every check runs to completion and records its outcome; a failing or
//! erroring check never stops the others. [`Level::Fast`] shrinks trial
//! counts for a quick smoke run, [`Level::Full`] uses the reference scale.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::coverage::{
    conditional_coverage, coverage, ConditionalCoverageInputs, RankingScheme, UserRole,
};
use crate::error::{Error, Result};
use crate::experiment::{run_sweep, to_csv, Engine, ExperimentSpec, SpecBuilder};
use crate::laplace::{laplace_mcp_approx, laplace_mcp_exact, ConstantInterference, LaplaceEvaluator, LaplaceVariant};
use crate::sim::{estimate_ordering_probability, fading_oracle, simulate, SimConfig, SimSummary};
use crate::spatial::{ModelConfig, ModelKind, OrderedDistancePair, SirThreshold};

/// Analytic slack for inequalities between quadrature results.
pub const QUADRATURE_SLACK: f64 = 2e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

impl Level {
    pub fn as_str(self) -> &'static str {
        match self {
            Level::Fast => "fast",
            Level::Full => "full",
        }
    }

    fn pick<T>(self, fast: T, full: T) -> T {
        match self {
            Level::Fast => fast,
            Level::Full => full,
        }
    }
}

impl std::str::FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fast" => Ok(Level::Fast),
            "full" => Ok(Level::Full),
            other => Err(format!("unknown validation level `{other}`")),
        }
    }
}

/// Outcome of a single check. `observed` is compared against `limit` in the
/// direction the check describes; `detail` says which way.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub criterion: u8,
    pub name: String,
    pub passed: bool,
    pub observed: f64,
    pub limit: f64,
    pub detail: String,
}

impl Check {
    fn at_most(criterion: u8, name: impl Into<String>, observed: f64, limit: f64, detail: impl Into<String>) -> Self {
        Self {
            criterion,
            name: name.into(),
            passed: observed <= limit,
            observed,
            limit,
            detail: detail.into(),
        }
    }

    fn errored(criterion: u8, name: impl Into<String>, err: &Error) -> Self {
        Self {
            criterion,
            name: name.into(),
            passed: false,
            observed: f64::NAN,
            limit: f64::NAN,
            detail: format!("error: {err}"),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidateOptions {
    pub level: Option<Level>,
    /// Test fixture: reverses the bound chain so the suite must fail.
    pub invert_bound_check: bool,
    /// Worker count for the multi-threaded determinism run (0 = all cores, at least 2).
    pub threads: usize,
    /// Criteria to run; empty runs all of them.
    pub only: Vec<u8>,
}

impl ValidateOptions {
    pub fn new(level: Level) -> Self {
        Self {
            level: Some(level),
            ..Self::default()
        }
    }

    fn level(&self) -> Level {
        self.level.unwrap_or(Level::Fast)
    }
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub level: Level,
    pub checks: Vec<Check>,
    pub wall_seconds: f64,
}

/// One line per criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionSummary {
    pub criterion: u8,
    pub passed: bool,
    pub checks: usize,
    pub failed: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn by_criterion(&self) -> Vec<CriterionSummary> {
        let mut ids: Vec<u8> = self.checks.iter().map(|c| c.criterion).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.into_iter()
            .map(|id| {
                let mine: Vec<&Check> = self.checks.iter().filter(|c| c.criterion == id).collect();
                CriterionSummary {
                    criterion: id,
                    passed: mine.iter().all(|c| c.passed),
                    checks: mine.len(),
                    failed: mine.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect(),
                }
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(
                out,
                "[{}] {} {}: observed {:.6e}, limit {:.6e} ({})",
                c.criterion,
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.observed,
                c.limit,
                c.detail
            );
        }
        let failed = self.failures().count();
        let _ = writeln!(
            out,
            "{} level: {} checks, {} failed, {:.1} s",
            self.level.as_str(),
            self.checks.len(),
            failed,
            self.wall_seconds
        );
        out
    }

    pub fn to_csv(&self) -> String {
        let quote = |s: &str| format!("\"{}\"", s.replace('"', "\"\""));
        let mut out = String::from("criterion,check,passed,observed,limit,detail\n");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                c.criterion,
                quote(&c.name),
                c.passed,
                c.observed,
                c.limit,
                quote(&c.detail)
            );
        }
        out
    }
}

/// Runs every criterion at the requested level.
pub fn run_validate(opts: &ValidateOptions) -> ValidationReport {
    let level = opts.level();
    let start = Instant::now();
    let wanted = |c: u8| opts.only.is_empty() || opts.only.contains(&c);
    let mut checks = Vec::new();
    if wanted(1) {
        checks.extend(ordering_checks(level));
    }
    let sims = if wanted(2) || wanted(4) { fig1_simulations(level) } else { Vec::new() };
    if wanted(2) {
        checks.extend(bound_chain_checks(level, &sims, opts.invert_bound_check));
    }
    if wanted(3) {
        checks.extend(oracle_checks(level));
    }
    if wanted(4) {
        checks.extend(cross_validation_checks(&sims));
    }
    if wanted(5) {
        checks.extend(scale_invariance_checks());
    }
    if wanted(6) {
        checks.extend(lemma_checks());
    }
    if wanted(7) {
        checks.extend(limit_checks());
    }
    if wanted(8) {
        checks.extend(determinism_checks(level, opts.threads));
    }
    ValidationReport {
        level,
        checks,
        wall_seconds: start.elapsed().as_secs_f64(),
    }
}

/// Reference parameters: alpha = 4, lambda_b = 1e-3, R = 10.
pub fn fig1_models() -> [ModelConfig; 2] {
    [
        ModelConfig::ppp(1e-3, 4.0).expect("valid"),
        ModelConfig::mcp(1e-3, 10.0, 4.0).expect("valid"),
    ]
}

/// Threshold grid `-10, -8, ..., 20` dB.
pub fn even_db_grid() -> Vec<SirThreshold> {
    (-10..=20)
        .step_by(2)
        .map(|d| SirThreshold::from_db(d as f64).expect("finite"))
        .collect()
}

fn collect(criterion: u8, name: &str, res: Result<Vec<Check>>) -> Vec<Check> {
    res.unwrap_or_else(|e| vec![Check::errored(criterion, name, &e)])
}

/// Criterion 1: ordering probabilities 0.84 (PPP) and 0.79 (MCP), within 0.01.
pub fn ordering_checks(level: Level) -> Vec<Check> {
    let trials = level.pick(100_000, 1_000_000);
    let mut out = Vec::new();
    for (model, target) in fig1_models().into_iter().zip([0.84, 0.79]) {
        let name = format!("ordering probability {}", model.kind());
        let res = SimConfig::new(model, trials, 11, even_db_grid()).and_then(|cfg| estimate_ordering_probability(&cfg));
        out.push(match res {
            Ok(est) => Check::at_most(
                1,
                name,
                (est.value - target).abs(),
                0.01,
                format!("|p - {target}| with p = {:.5} over {trials} trials", est.value),
            ),
            Err(e) => Check::errored(1, name, &e),
        });
    }
    out
}

/// Monte Carlo runs shared by the bound-chain and cross-validation checks.
pub fn fig1_simulations(level: Level) -> Vec<(ModelConfig, Result<SimSummary>)> {
    let trials = level.pick(20_000, 100_000);
    fig1_models()
        .into_iter()
        .map(|m| (m, SimConfig::new(m, trials, 2024, even_db_grid()).and_then(|c| simulate(&c))))
        .collect()
}

/// Criterion 2: MSP-AD <= MSP <= ISP, analytically and in simulation.
pub fn bound_chain_checks(level: Level, sims: &[(ModelConfig, Result<SimSummary>)], invert: bool) -> Vec<Check> {
    let _ = level;
    let grid = even_db_grid();
    let mut out = Vec::new();
    // violation of lower <= upper, positive when the chain breaks
    let order = |lower: f64, upper: f64| if invert { upper - lower } else { lower - upper };
    for (model, sim) in sims {
        let kind = model.kind();
        let name = format!("analytic bound chain {kind}");
        out.extend(collect(2, &name, (|| {
            let ev = LaplaceEvaluator::for_model(model, LaplaceVariant::Auto)?;
            let mut worst = f64::NEG_INFINITY;
            let mut at = String::new();
            for role in UserRole::ALL {
                for t in &grid {
                    let v = |s| coverage(model, s, role, *t, &ev, 1e-4).map(|e| e.value);
                    let (isp, msp, ad) = (v(RankingScheme::Isp)?, v(RankingScheme::Msp)?, v(RankingScheme::MspAd)?);
                    for gap in [order(ad, msp), order(msp, isp)] {
                        if gap > worst {
                            worst = gap;
                            at = format!("{role} at {:.0} dB", t.db());
                        }
                    }
                }
            }
            Ok(vec![Check::at_most(2, name.clone(), worst, QUADRATURE_SLACK, format!("largest chain violation, {at}"))])
        })()));

        let name = format!("simulated bound chain {kind}");
        match sim {
            Ok(summary) => {
                let mut worst = f64::NEG_INFINITY;
                let mut at = String::new();
                for role in UserRole::ALL {
                    let isp = summary.estimate(RankingScheme::Isp, role);
                    let msp = summary.estimate(RankingScheme::Msp, role);
                    let ad = summary.estimate(RankingScheme::MspAd, role);
                    for k in 0..grid.len() {
                        for (lo, hi) in [(&ad[k], &msp[k]), (&msp[k], &isp[k])] {
                            let se = lo.std_error().hypot(hi.std_error()).max(f64::MIN_POSITIVE);
                            let z = order(lo.value, hi.value) / se;
                            if z > worst {
                                worst = z;
                                at = format!("{role} at {:.0} dB", grid[k].db());
                            }
                        }
                    }
                }
                out.push(Check::at_most(2, name, worst, 3.0, format!("largest violation in combined standard errors, {at}")));
            }
            Err(e) => out.push(Check::errored(2, name, e)),
        }
    }
    out
}

/// Criterion 3: conditional closed forms against the fading oracle.
pub fn oracle_checks(level: Level) -> Vec<Check> {
    let tuples = level.pick(10, 50);
    let draws = level.pick(100_000, 1_000_000);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let mut worst: [(f64, String); 6] = Default::default();
    let mut out = Vec::new();
    for idx in 0..tuples {
        let a: f64 = 2.0 * (1.0 - rng.random::<f64>());
        let b: f64 = 2.0 * (1.0 - rng.random::<f64>());
        let alpha = [3.0, 4.0, 6.0][rng.random_range(0..3)];
        let t = rng.random_range(0.1..5.0);
        let i_const: f64 = rng.random();
        let res = (|| -> Result<()> {
            let pair = OrderedDistancePair::from_unordered(a, b)?;
            let t = SirThreshold::new(t)?;
            let lt = ConstantInterference(i_const);
            let inp = ConditionalCoverageInputs::new(pair, t, alpha, &lt)?;
            let oracle = fading_oracle(&pair, alpha, t, i_const, draws, 1000 + idx as u64)?;
            for (k, (scheme, role)) in schemes_and_roles().enumerate() {
                let analytic = conditional_coverage(scheme, role, &inp)?;
                let tol = (3.0 * oracle.std_error(scheme, role)).max(3.0 / (draws as f64).sqrt());
                let ratio = (analytic - oracle.probability(scheme, role)).abs() / tol;
                if ratio > worst[k].0 {
                    worst[k] = (
                        ratio,
                        format!(
                            "r1={:.3} r2={:.3} alpha={alpha} T={:.3} I={i_const:.3}",
                            pair.r1(),
                            pair.r2(),
                            t.linear()
                        ),
                    );
                }
            }
            Ok(())
        })();
        if let Err(e) = res {
            out.push(Check::errored(3, format!("oracle tuple {idx}"), &e));
        }
    }
    for (k, (scheme, role)) in schemes_and_roles().enumerate() {
        out.push(Check::at_most(
            3,
            format!("oracle {scheme} {role}"),
            worst[k].0,
            1.0,
            format!("worst gap over tolerance in {tuples} tuples x {draws} draws, {}", worst[k].1),
        ));
    }
    out
}

fn schemes_and_roles() -> impl Iterator<Item = (RankingScheme, UserRole)> {
    RankingScheme::ALL
        .into_iter()
        .flat_map(|s| UserRole::ALL.into_iter().map(move |r| (s, r)))
}

/// Criterion 4: analytic against simulated coverage at the reference parameters.
///
/// MCP uses the exact interference transform: the closed-form approximation
/// carries its own error (see [`lemma_checks`]), which is not what this
/// cross-check is after.
pub fn cross_validation_checks(sims: &[(ModelConfig, Result<SimSummary>)]) -> Vec<Check> {
    let grid = even_db_grid();
    let mut out = Vec::new();
    for (model, sim) in sims {
        let kind = model.kind();
        let name = format!("analytic vs simulation {kind}");
        out.extend(collect(4, &name, (|| {
            let summary = sim.as_ref().map_err(Clone::clone)?;
            let ev = LaplaceEvaluator::for_model(model, LaplaceVariant::Exact)?;
            let cells: Vec<(RankingScheme, UserRole, usize)> = schemes_and_roles()
                .flat_map(|(s, r)| (0..grid.len()).map(move |k| (s, r, k)))
                .collect();
            let analytic: Vec<f64> = cells
                .par_iter()
                .map(|&(scheme, role, k)| coverage(model, scheme, role, grid[k], &ev, 1e-4).map(|e| e.value))
                .collect::<Result<_>>()?;
            let mut worst = f64::NEG_INFINITY;
            let mut at = String::new();
            for (&(scheme, role, k), an) in cells.iter().zip(analytic) {
                let mc = &summary.estimate(scheme, role)[k];
                let gap = (an - mc.value).abs();
                // Excess over the allowed gap; <= 0 passes.
                let allowed = match kind {
                    ModelKind::Mcp => 0.02_f64.max(3.0 * mc.std_error()),
                    ModelKind::Ppp => 0.05,
                };
                if gap - allowed > worst {
                    worst = gap - allowed;
                    at = format!("{scheme} {role} at {:.0} dB: analytic {an:.4}, simulated {:.4}", grid[k].db(), mc.value);
                }
            }
            Ok(vec![Check::at_most(4, name.clone(), worst, 0.0, format!("gap minus allowance ({}), worst {at}", ev.model().tag()))])
        })()));
    }
    out
}

/// Criterion 5: coverage does not depend on BS density.
pub fn scale_invariance_checks() -> Vec<Check> {
    let grid: Vec<SirThreshold> = [-10.0, 0.0, 10.0].map(|d| SirThreshold::from_db(d).expect("finite")).to_vec();
    let mut out = Vec::new();
    // PPP in raw units at two densities, so the density actually enters the integrals.
    out.extend(collect(5, "scale invariance ppp", (|| {
        let (m1, m2) = (ModelConfig::ppp(1e-3, 4.0)?, ModelConfig::ppp(1e-2, 4.0)?);
        let (e1, e2) = (LaplaceEvaluator::ppp_general(1e-3, 4.0)?.cached(), LaplaceEvaluator::ppp_general(1e-2, 4.0)?.cached());
        let mut worst = 0.0_f64;
        for (scheme, role) in schemes_and_roles() {
            for t in &grid {
                let a = coverage(&m1, scheme, role, *t, &e1, 1e-5)?.value;
                let b = coverage(&m2, scheme, role, *t, &e2, 1e-5)?.value;
                worst = worst.max((a - b).abs());
            }
        }
        Ok(vec![Check::at_most(5, "scale invariance ppp", worst, QUADRATURE_SLACK, "lambda_b 1e-3 vs 1e-2, raw units")])
    })()));
    out.extend(collect(5, "scale invariance mcp", (|| {
        let (m1, m2) = (ModelConfig::mcp(1e-3, 10.0, 4.0)?, ModelConfig::mcp(2.5e-4, 20.0, 4.0)?);
        let (e1, e2) = (
            LaplaceEvaluator::for_model(&m1, LaplaceVariant::Auto)?,
            LaplaceEvaluator::for_model(&m2, LaplaceVariant::Auto)?,
        );
        let mut worst = 0.0_f64;
        for (scheme, role) in schemes_and_roles() {
            for t in &grid {
                let a = coverage(&m1, scheme, role, *t, &e1, 1e-5)?.value;
                let b = coverage(&m2, scheme, role, *t, &e2, 1e-5)?.value;
                worst = worst.max((a - b).abs());
            }
        }
        Ok(vec![Check::at_most(5, "scale invariance mcp", worst, QUADRATURE_SLACK, "(1e-3, 10) vs (2.5e-4, 20)")])
    })()));
    out
}

/// Criterion 6: the closed-form MCP transform against the exact one.
pub fn lemma_checks() -> Vec<Check> {
    let mut out = collect(6, "mcp approx vs exact", (|| {
        let mut worst = 0.0_f64;
        let mut at = 0.0;
        for k in 0..33 {
            let s = 10f64.powf(-2.0 + 4.0 * k as f64 / 32.0);
            let gap = (laplace_mcp_exact(s, 0.1, 4.0, 1e-7)? - laplace_mcp_approx(s, 0.1, 4.0)?).abs();
            if gap > worst {
                worst = gap;
                at = s;
            }
        }
        Ok(vec![Check::at_most(6, "mcp approx vs exact", worst, 0.02, format!("33-point log grid on [1e-2, 1e2], worst at s = {at:.4}"))])
    })());
    out.extend(collect(6, "mcp approx hand value", (|| {
        let v = laplace_mcp_approx(1.0, 0.1, 4.0)?;
        Ok(vec![Check::at_most(6, "mcp approx hand value", (v - 0.47700).abs(), 1e-5, format!("L(1) = {v:.7} against 0.47700 (5 decimals)"))])
    })()));
    out
}

/// Criterion 7: low-threshold limit, continuity at T = 1, range and monotonicity.
pub fn limit_checks() -> Vec<Check> {
    let mut out = Vec::new();
    let low = SirThreshold::from_db(-40.0).expect("finite");
    for model in fig1_models() {
        let name = format!("coverage at -40 dB {}", model.kind());
        out.extend(collect(7, &name, (|| {
            let ev = LaplaceEvaluator::for_model(&model, LaplaceVariant::Auto)?;
            let mut worst = 0.0_f64;
            let mut values = Vec::new();
            for (scheme, role) in schemes_and_roles() {
                let v = coverage(&model, scheme, role, low, &ev, 1e-5)?.value;
                worst = worst.max(1.0 - v);
                values.push(format!("{scheme} {role} {v:.5}"));
            }
            Ok(vec![Check::at_most(7, name.clone(), worst, 1e-3, format!("1 - coverage; {}", values.join(", ")))])
        })()));
    }

    out.extend(collect(7, "continuity at T = 1", (|| {
        let below = SirThreshold::new(1.0 - 1e-12)?;
        let above = SirThreshold::new(1.0 + 1e-12)?;
        let evaluators = [
            LaplaceEvaluator::ppp_normalized(4.0)?,
            LaplaceEvaluator::mcp_approx(0.1, 4.0)?,
            LaplaceEvaluator::mcp_exact(0.1, 4.0)?,
        ];
        let pairs = [(0.2, 0.5), (0.5, 0.9), (0.9, 1.0), (0.05, 1.8)];
        let mut worst = 0.0_f64;
        for ev in &evaluators {
            for &(r1, r2) in &pairs {
                let pair = OrderedDistancePair::new(r1, r2)?;
                for (scheme, role) in schemes_and_roles() {
                    let l = conditional_coverage(scheme, role, &ConditionalCoverageInputs::new(pair, below, 4.0, ev)?)?;
                    let r = conditional_coverage(scheme, role, &ConditionalCoverageInputs::new(pair, above, 4.0, ev)?)?;
                    worst = worst.max((l - r).abs());
                }
            }
        }
        Ok(vec![Check::at_most(7, "continuity at T = 1", worst, 1e-9, "conditional coverage at 1 -/+ 1e-12")])
    })()));

    for model in fig1_models() {
        let name = format!("range and monotonicity {}", model.kind());
        out.extend(collect(7, &name, (|| {
            let ev = LaplaceEvaluator::for_model(&model, LaplaceVariant::Auto)?;
            let grid: Vec<SirThreshold> = (-20..=30).map(|d| SirThreshold::from_db(d as f64)).collect::<Result<_>>()?;
            let mut out_of_range = 0.0_f64;
            let mut rise = 0.0_f64;
            for (scheme, role) in schemes_and_roles() {
                let mut prev = f64::INFINITY;
                for t in &grid {
                    let v = coverage(&model, scheme, role, *t, &ev, 1e-4)?.value;
                    out_of_range = out_of_range.max(-v).max(v - 1.0);
                    rise = rise.max(v - prev);
                    prev = v;
                }
            }
            Ok(vec![
                Check::at_most(7, format!("{name} range"), out_of_range, 0.0, "distance outside [0, 1]"),
                Check::at_most(7, format!("{name} non-increasing"), rise, QUADRATURE_SLACK, "largest increase between 1 dB steps"),
            ])
        })()));
    }
    out
}

/// Criterion 8: byte-identical CSV from one and several worker threads.
pub fn determinism_checks(level: Level, threads: usize) -> Vec<Check> {
    collect(8, "determinism across thread counts", (|| {
        let spec = determinism_spec(level)?;
        let n = if threads == 0 {
            std::thread::available_parallelism().map_or(2, |n| n.get()).max(2)
        } else {
            threads.max(2)
        };
        let run = |workers: usize| -> Result<String> {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| Error::Simulation(e.to_string()))?;
            pool.install(|| run_sweep(&spec).map(|rows| to_csv(&rows)))
        };
        let single = run(1)?;
        let multi = run(n)?;
        let differing = single.lines().zip(multi.lines()).filter(|(a, b)| a != b).count()
            + single.lines().count().abs_diff(multi.lines().count());
        Ok(vec![Check::at_most(
            8,
            "determinism across thread counts",
            differing as f64,
            0.0,
            format!("differing CSV lines, 1 vs {n} threads, {} bytes", single.len()),
        )])
    })())
}

fn determinism_spec(level: Level) -> Result<ExperimentSpec> {
    let mut b = SpecBuilder::default();
    b.set("sweep.t_db_step", "5")?;
    b.set("mc.trials", &level.pick(2_000u64, 20_000).to_string())?;
    b.set("mc.seed", "77")?;
    let mut spec = b.build()?;
    spec.engine = Engine::Both;
    Ok(spec)
}
