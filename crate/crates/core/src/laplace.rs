//! Laplace transform of the inter-cell interference, `L(s) = E[exp(-s I)]`.
//!
//! Every evaluator works with the exponent `E(s) = -ln L(s)`, which keeps
//! `L` representable for large `s` and lets the cache interpolate a smooth,
//! monotone quantity.
//!
//! * PPP users: the interferers form a Poisson cluster process whose
//!   parents thin out near the origin with `1 - exp(-(12/5) lambda_b pi x^2)`,
//!   each carrying two co-located users.
//! * MCP users: parents are a PPP, each with two users uniform in a disc of
//!   radius `R`. The exact form is a triple integral; the closed form below
//!   collapses every cluster onto its centre.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, integrate_to_infinity, integrate_with_breaks, QuadOptions};
use crate::spatial::{ModelConfig, ModelKind, UserLayout};

/// Thinning constant of the inter-cell parent intensity for PPP users.
pub const INTER_CELL_THINNING: f64 = 12.0 / 5.0;

/// `lambda_b R^2` at or below which [`LaplaceVariant::Auto`] picks the
/// closed-form MCP approximation.
pub const AUTO_APPROX_MAX_SCALE: f64 = 0.1;

/// Default relative tolerance of the PPP exponent integral.
pub const PPP_QUAD_TOL: f64 = 1e-8;

/// Default tolerance of the nested MCP integrals.
pub const MCP_QUAD_TOL: f64 = 1e-6;

/// Anything that can produce `L(s)` for `s >= 0`.
pub trait Laplace: Sync {
    fn laplace(&self, s: f64) -> Result<f64>;
}

/// Deterministic interference `I`: `L(s) = exp(-s I)`. `I = 0` gives `L = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantInterference(pub f64);

impl Laplace for ConstantInterference {
    fn laplace(&self, s: f64) -> Result<f64> {
        if self.0 == 0.0 {
            return Ok(1.0);
        }
        Ok((-s * self.0).exp())
    }
}

/// Normalized sinc, `sin(pi x) / (pi x)`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

fn check_s(s: f64) -> Result<()> {
    if !(s >= 0.0) || s.is_nan() {
        return Err(invalid("s", format!("must be >= 0, got {s}")));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 2.0) || !alpha.is_finite() {
        return Err(invalid("alpha", format!("must be > 2, got {alpha}")));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(invalid("quad_tol", format!("must lie in (0, 1), got {tol}")));
    }
    Ok(())
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(invalid(name, format!("must be positive, got {v}")));
    }
    Ok(())
}

/// `1 - (1 + s x^-a)^-2` written through `r = s / (x^a + s)` so both ends
/// (`x -> 0` and `x -> inf`) are free of cancellation and overflow.
#[inline]
fn two_user_void(s: f64, x: f64, alpha: f64) -> f64 {
    let r = s / (x.powf(alpha) + s);
    r * (2.0 - r)
}

/// Exponent of the PPP-user transform at BS density `lambda_b`:
/// `2 pi lambda_b int_0^inf (1 - (1 + s x^-a)^-2)(1 - exp(-(12/5) lambda_b pi x^2)) x dx`.
fn ppp_exponent(s: f64, lambda_b: f64, alpha: f64, tol: f64) -> Result<f64> {
    if s == 0.0 {
        return Ok(0.0);
    }
    let k = INTER_CELL_THINNING * lambda_b * PI;
    let integrand = |x: f64| -> Result<f64> {
        let thin = -(-k * x * x).exp_m1();
        Ok(two_user_void(s, x, alpha) * thin * x)
    };
    // Split where either the path-loss knee or the thinning knee sits.
    let split = s.powf(1.0 / alpha).max((PI * lambda_b).sqrt().recip());
    let opts = QuadOptions::relative(tol).with_abs_floor(1e-300);
    let head = integrate(integrand, 0.0, split, &opts)?;
    let tail = integrate_to_infinity(integrand, split, split, &opts)?;
    Ok(2.0 * PI * lambda_b * (head.value + tail.value))
}

/// Probability that one MCP interferer at cluster-centre distance `x`
/// (unit cluster radius) is *not* attenuated away: `1 - E_y[1/(1 + s d^-a)]`.
///
/// Integrated radially around the receiver: the circle of radius `rho`
/// meets the unit cluster disc in an arc of closed-form length. The
/// variable is the offset `u = rho - x`, which keeps the arc angle
/// accurate for distant clusters.
fn mcp_hit_probability(s: f64, x: f64, alpha: f64, tol: f64) -> Result<f64> {
    let arc = |u: f64| -> f64 {
        let rho = x + u;
        if rho <= 0.0 {
            return 0.0;
        }
        if rho <= 1.0 - x {
            return 2.0 * PI * rho;
        }
        // 1 - cos(half angle) = (1 - u^2) / (2 rho x)
        let half_versine = ((1.0 - u) * (1.0 + u) / (4.0 * rho * x)).clamp(0.0, 1.0);
        4.0 * rho * half_versine.sqrt().asin()
    };
    let integrand = |u: f64| {
        let rho = x + u;
        Ok(s / (s + rho.powf(alpha)) * arc(u))
    };
    let opts = QuadOptions::relative(tol * 1e-1).with_abs_floor(1e-300);
    let lo = (-x).max(-1.0);
    let mut cuts = vec![lo, 1.0, 1.0 - 2.0 * x, s.powf(1.0 / alpha) - x];
    cuts.retain(|c| *c >= lo && *c <= 1.0);
    cuts.sort_by(f64::total_cmp);
    let total = integrate_with_breaks(integrand, &cuts, &opts)?.value;
    Ok((total / PI).clamp(0.0, 1.0))
}

/// Exponent of the exact MCP transform with `R = 1` and density `scale`.
fn mcp_exact_exponent(s: f64, scale: f64, alpha: f64, tol: f64) -> Result<f64> {
    if s == 0.0 {
        return Ok(0.0);
    }
    // 1 - g^2 = q (2 - q) with q the single-user hit probability.
    let integrand = |x: f64| -> Result<f64> {
        let q = mcp_hit_probability(s, x, alpha, tol)?;
        Ok(q * (2.0 - q) * x)
    };
    let opts = QuadOptions::relative(tol).with_abs_floor(1e-300);
    let knee = 2.0_f64.max(1.0 + s.powf(1.0 / alpha));
    let near = integrate_with_breaks(integrand, &[0.0, 1.0, 2.0, knee], &opts)?.value;
    let far = integrate_to_infinity(integrand, knee, knee, &opts)?.value;
    Ok(2.0 * PI * scale * (near + far))
}

/// Exponent of the closed-form MCP approximation:
/// `pi scale (1 + delta) / sinc(delta) s^delta`, `delta = 2 / alpha`.
fn mcp_approx_exponent(s: f64, scale: f64, alpha: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    let delta = 2.0 / alpha;
    PI * scale * (1.0 + delta) / sinc(delta) * s.powf(delta)
}

/// `L(s)` for PPP users with `lambda_b = 1/pi`.
pub fn laplace_ppp_normalized(s: f64, alpha: f64, quad_tol: f64) -> Result<f64> {
    check_s(s)?;
    check_alpha(alpha)?;
    check_tol(quad_tol)?;
    Ok((-ppp_exponent(s, 1.0 / PI, alpha, quad_tol)?).exp())
}

/// `L(s)` for PPP users at an arbitrary BS density.
pub fn laplace_ppp_general(s: f64, lambda_b: f64, alpha: f64, quad_tol: f64) -> Result<f64> {
    check_s(s)?;
    check_alpha(alpha)?;
    check_tol(quad_tol)?;
    check_positive("lambda_b", lambda_b)?;
    Ok((-ppp_exponent(s, lambda_b, alpha, quad_tol)?).exp())
}

/// Exact `L(s)` for MCP users with unit cluster radius and `scale = lambda_b R^2`.
pub fn laplace_mcp_exact(s: f64, scale: f64, alpha: f64, quad_tol: f64) -> Result<f64> {
    check_s(s)?;
    check_alpha(alpha)?;
    check_tol(quad_tol)?;
    check_positive("scale", scale)?;
    Ok((-mcp_exact_exponent(s, scale, alpha, quad_tol)?).exp())
}

/// Closed-form MCP approximation, accurate when `lambda_b R^2` is small.
pub fn laplace_mcp_approx(s: f64, scale: f64, alpha: f64) -> Result<f64> {
    check_s(s)?;
    check_alpha(alpha)?;
    check_positive("scale", scale)?;
    Ok((-mcp_approx_exponent(s, scale, alpha)).exp())
}

/// Which interference model an evaluator computes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LaplaceModel {
    /// PPP users, `lambda_b = 1/pi`.
    PppNormalized,
    /// PPP users in raw units.
    PppGeneral { lambda_b: f64 },
    /// MCP users, `R = 1`, triple integral.
    McpExact { scale: f64 },
    /// MCP users, `R = 1`, closed form.
    McpApprox { scale: f64 },
}

impl LaplaceModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            LaplaceModel::PppNormalized | LaplaceModel::PppGeneral { .. } => ModelKind::Ppp,
            LaplaceModel::McpExact { .. } | LaplaceModel::McpApprox { .. } => ModelKind::Mcp,
        }
    }

    /// Short tag used in CSV output.
    pub fn tag(&self) -> &'static str {
        match self {
            LaplaceModel::PppNormalized => "ppp_normalized",
            LaplaceModel::PppGeneral { .. } => "ppp_general",
            LaplaceModel::McpExact { .. } => "exact",
            LaplaceModel::McpApprox { .. } => "approx",
        }
    }
}

/// Requested MCP transform flavour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LaplaceVariant {
    #[default]
    Auto,
    Exact,
    Approx,
}

impl std::str::FromStr for LaplaceVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(Self::Auto),
            "exact" => Ok(Self::Exact),
            "approx" => Ok(Self::Approx),
            other => Err(format!("unknown laplace variant `{other}`")),
        }
    }
}

const MCP_EXACT_S_MIN: f64 = 1e-12;
const MCP_EXACT_S_MAX: f64 = 1e12;

/// Nodes per decade of the geometric `s` grid.
pub const CACHE_NODES_PER_DECADE: i64 = 512;
const CACHE_MIN_DECADE: i64 = -12;
const CACHE_MAX_DECADE: i64 = 12;

/// Lazily filled table of `ln E(s_k)` on `s_k = 10^(k / 512)`, read through
/// monotone cubic (Fritsch–Butland) interpolation.
///
/// Node values depend only on `k`, so concurrent fills and any request order
/// produce identical interpolants.
#[derive(Debug, Default)]
struct ExponentCache {
    nodes: RwLock<HashMap<i64, f64>>,
}

impl ExponentCache {
    fn node<F>(&self, k: i64, exponent: &F) -> Result<f64>
    where
        F: Fn(f64) -> Result<f64>,
    {
        if let Some(v) = self.nodes.read().expect("cache lock poisoned").get(&k) {
            return Ok(*v);
        }
        let s = 10f64.powf(k as f64 / CACHE_NODES_PER_DECADE as f64);
        let v = exponent(s)?.ln();
        self.nodes.write().expect("cache lock poisoned").insert(k, v);
        Ok(v)
    }

    /// Interpolated exponent, or `None` when `s` lies outside the grid.
    fn exponent<F>(&self, s: f64, exponent: &F) -> Result<Option<f64>>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let u = s.log10() * CACHE_NODES_PER_DECADE as f64;
        let k = u.floor();
        let lo = CACHE_MIN_DECADE * CACHE_NODES_PER_DECADE;
        let hi = CACHE_MAX_DECADE * CACHE_NODES_PER_DECADE;
        if !(k - 1.0 >= lo as f64 && k + 2.0 <= hi as f64) {
            return Ok(None);
        }
        let k = k as i64;
        let t = u - k as f64;
        let y = [
            self.node(k - 1, exponent)?,
            self.node(k, exponent)?,
            self.node(k + 1, exponent)?,
            self.node(k + 2, exponent)?,
        ];
        if t == 0.0 {
            return Ok(Some(y[1].exp()));
        }
        let d = [y[1] - y[0], y[2] - y[1], y[3] - y[2]];
        let slope = |a: f64, b: f64| {
            if a * b <= 0.0 {
                0.0
            } else {
                2.0 * a * b / (a + b)
            }
        };
        let m0 = slope(d[0], d[1]);
        let m1 = slope(d[1], d[2]);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let ln_e = h00 * y[1] + h10 * m0 + h01 * y[2] + h11 * m1;
        Ok(Some(ln_e.exp()))
    }

    fn len(&self) -> usize {
        self.nodes.read().expect("cache lock poisoned").len()
    }
}

/// A configured interference transform `s -> L(s)`.
///
/// Immutable after construction; the optional cache is shared between
/// clones and safe for concurrent readers.
#[derive(Debug, Clone)]
pub struct LaplaceEvaluator {
    model: LaplaceModel,
    alpha: f64,
    quad_tol: f64,
    cache: Option<Arc<ExponentCache>>,
}

impl LaplaceEvaluator {
    pub fn new(model: LaplaceModel, alpha: f64, quad_tol: f64) -> Result<Self> {
        check_alpha(alpha)?;
        check_tol(quad_tol)?;
        match model {
            LaplaceModel::PppNormalized => {}
            LaplaceModel::PppGeneral { lambda_b } => check_positive("lambda_b", lambda_b)?,
            LaplaceModel::McpExact { scale } | LaplaceModel::McpApprox { scale } => {
                check_positive("scale", scale)?
            }
        }
        Ok(Self {
            model,
            alpha,
            quad_tol,
            cache: None,
        })
    }

    pub fn ppp_normalized(alpha: f64) -> Result<Self> {
        Self::new(LaplaceModel::PppNormalized, alpha, PPP_QUAD_TOL)
    }

    pub fn ppp_general(lambda_b: f64, alpha: f64) -> Result<Self> {
        Self::new(LaplaceModel::PppGeneral { lambda_b }, alpha, PPP_QUAD_TOL)
    }

    pub fn mcp_exact(scale: f64, alpha: f64) -> Result<Self> {
        Self::new(LaplaceModel::McpExact { scale }, alpha, MCP_QUAD_TOL)
    }

    pub fn mcp_approx(scale: f64, alpha: f64) -> Result<Self> {
        Self::new(LaplaceModel::McpApprox { scale }, alpha, MCP_QUAD_TOL)
    }

    /// Normalized evaluator for a model, cached when it needs quadrature.
    pub fn for_model(model: &ModelConfig, variant: LaplaceVariant) -> Result<Self> {
        model.validate()?;
        let ev = match model.users {
            UserLayout::Ppp { .. } => Self::ppp_normalized(model.alpha)?,
            UserLayout::Mcp { radius } => {
                let scale = model.lambda_b * radius * radius;
                let exact = match variant {
                    LaplaceVariant::Exact => true,
                    LaplaceVariant::Approx => false,
                    LaplaceVariant::Auto => scale > AUTO_APPROX_MAX_SCALE,
                };
                if exact {
                    Self::mcp_exact(scale, model.alpha)?
                } else {
                    Self::mcp_approx(scale, model.alpha)?
                }
            }
        };
        Ok(ev.cached())
    }

    /// Enables the interpolation cache. Closed forms are never cached.
    pub fn cached(mut self) -> Self {
        if !matches!(self.model, LaplaceModel::McpApprox { .. }) && self.cache.is_none() {
            self.cache = Some(Arc::new(ExponentCache::default()));
        }
        self
    }

    pub fn model(&self) -> LaplaceModel {
        self.model
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn quad_tol(&self) -> f64 {
        self.quad_tol
    }

    pub fn is_cached(&self) -> bool {
        self.cache.is_some()
    }

    /// Number of cache nodes filled so far.
    pub fn cache_len(&self) -> usize {
        self.cache.as_ref().map_or(0, |c| c.len())
    }

    /// `delta = 2 / alpha`.
    pub fn delta(&self) -> f64 {
        2.0 / self.alpha
    }

    /// Exponent `-ln L(s)` without the cache.
    pub fn exponent_direct(&self, s: f64) -> Result<f64> {
        check_s(s)?;
        let a = self.alpha;
        let tol = self.quad_tol;
        match self.model {
            LaplaceModel::PppNormalized => ppp_exponent(s, 1.0 / PI, a, tol),
            LaplaceModel::PppGeneral { lambda_b } => ppp_exponent(s, lambda_b, a, tol),
            LaplaceModel::McpExact { scale } => {
                // Both tails scale as s^delta; quadrature out there is slow and
                // contributes nothing measurable to coverage.
                let (lo, hi) = (MCP_EXACT_S_MIN, MCP_EXACT_S_MAX);
                let edge = s.clamp(lo, hi);
                let e = mcp_exact_exponent(edge, scale, a, tol)?;
                Ok(if edge == s { e } else { e * (s / edge).powf(2.0 / a) })
            }
            LaplaceModel::McpApprox { scale } => Ok(mcp_approx_exponent(s, scale, a)),
        }
    }

    /// Exponent `-ln L(s)`, interpolated when the cache is enabled.
    pub fn exponent(&self, s: f64) -> Result<f64> {
        check_s(s)?;
        if s == 0.0 {
            return Ok(0.0);
        }
        if let Some(cache) = &self.cache {
            if let Some(e) = cache.exponent(s, &|x| self.exponent_direct(x))? {
                return Ok(e);
            }
        }
        self.exponent_direct(s)
    }

    /// `L(s)` bypassing the cache.
    pub fn eval_direct(&self, s: f64) -> Result<f64> {
        Ok((-self.exponent_direct(s)?).exp())
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        Ok((-self.exponent(s)?).exp())
    }

    /// Errors unless the evaluator describes `model` in normalized or raw form.
    pub fn check_matches(&self, model: &ModelConfig) -> Result<()> {
        model.validate()?;
        if (self.alpha - model.alpha).abs() > 1e-12 * model.alpha {
            return Err(Error::EvaluatorMismatch(format!(
                "alpha {} vs model alpha {}",
                self.alpha, model.alpha
            )));
        }
        match (self.model, model.users) {
            (LaplaceModel::PppNormalized, UserLayout::Ppp { .. }) => Ok(()),
            (LaplaceModel::PppGeneral { lambda_b }, UserLayout::Ppp { .. }) => {
                if (lambda_b - model.lambda_b).abs() <= 1e-12 * model.lambda_b {
                    Ok(())
                } else {
                    Err(Error::EvaluatorMismatch(format!(
                        "evaluator lambda_b {lambda_b} vs model {}",
                        model.lambda_b
                    )))
                }
            }
            (
                LaplaceModel::McpExact { scale } | LaplaceModel::McpApprox { scale },
                UserLayout::Mcp { radius },
            ) => {
                let want = model.lambda_b * radius * radius;
                if (scale - want).abs() <= 1e-9 * want {
                    Ok(())
                } else {
                    Err(Error::EvaluatorMismatch(format!(
                        "evaluator scale {scale} vs lambda_b R^2 = {want}"
                    )))
                }
            }
            (m, _) => Err(Error::EvaluatorMismatch(format!(
                "{} evaluator used with {} model",
                m.tag(),
                model.kind()
            ))),
        }
    }
}

impl Laplace for LaplaceEvaluator {
    fn laplace(&self, s: f64) -> Result<f64> {
        self.eval(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_convention() {
        assert_eq!(sinc(0.0), 1.0);
        assert!((sinc(0.5) - 2.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn unity_at_zero() {
        assert_eq!(laplace_ppp_normalized(0.0, 4.0, 1e-8).unwrap(), 1.0);
        assert_eq!(laplace_ppp_general(0.0, 1e-3, 4.0, 1e-8).unwrap(), 1.0);
        assert_eq!(laplace_mcp_exact(0.0, 0.1, 4.0, 1e-6).unwrap(), 1.0);
        assert_eq!(laplace_mcp_approx(0.0, 0.1, 4.0).unwrap(), 1.0);
        let ev = LaplaceEvaluator::ppp_normalized(4.0).unwrap().cached();
        assert_eq!(ev.eval(0.0).unwrap(), 1.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(laplace_ppp_normalized(-1.0, 4.0, 1e-8).is_err());
        assert!(laplace_ppp_normalized(1.0, 2.0, 1e-8).is_err());
        assert!(laplace_mcp_approx(1.0, 0.0, 4.0).is_err());
        assert!(laplace_ppp_general(1.0, -1.0, 4.0, 1e-8).is_err());
        assert!(LaplaceEvaluator::new(LaplaceModel::PppNormalized, 4.0, 0.0).is_err());
    }

    #[test]
    fn ppp_monotone_decreasing() {
        let l = |s| laplace_ppp_normalized(s, 4.0, 1e-8).unwrap();
        let (a, b, c) = (l(0.1), l(1.0), l(10.0));
        assert!(c < b && b < a && a < 1.0);
        assert!(c > 0.0);
    }

    #[test]
    fn approx_hand_value() {
        let v = laplace_mcp_approx(1.0, 0.1, 4.0).unwrap();
        // exponent = pi * 0.1 * (3 pi / 4)
        let e = PI * 0.1 * 0.75 * PI;
        assert!((e - 0.74022).abs() < 1e-5);
        assert!((v - 0.47700).abs() < 1e-5, "{v}");
    }

    #[test]
    fn approx_square_root_identity() {
        for s in [0.01, 0.3, 2.0, 50.0] {
            let l1 = laplace_mcp_approx(s, 0.1, 4.0).unwrap();
            let l4 = laplace_mcp_approx(4.0 * s, 0.1, 4.0).unwrap();
            assert!((l4 - l1 * l1).abs() < 1e-14);
        }
    }

    #[test]
    fn general_ppp_matches_normalized() {
        let n = laplace_ppp_normalized(1.7, 4.0, 1e-10).unwrap();
        let g = laplace_ppp_general(1.7, 1.0 / PI, 4.0, 1e-10).unwrap();
        assert!((n - g).abs() < 1e-12);
        // Removing lambda_b: s' = s (pi lambda_b)^(alpha/2).
        let lb = 1e-3;
        let s = 2.5e5;
        let g = laplace_ppp_general(s, lb, 4.0, 1e-10).unwrap();
        let n = laplace_ppp_normalized(s * (PI * lb).powi(2), 4.0, 1e-10).unwrap();
        assert!((n - g).abs() < 1e-9, "{n} vs {g}");
    }

    #[test]
    fn mcp_exact_vanishing_scale() {
        for s in [0.1, 1.0, 10.0] {
            let v = laplace_mcp_exact(s, 1e-9, 4.0, 1e-6).unwrap();
            assert!((v - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn mcp_exact_reference_value() {
        // Independent nested quadrature of the original three-fold integral.
        let v = laplace_mcp_exact(1.0, 0.1, 4.0, 1e-8).unwrap();
        assert!((v - 0.4433).abs() < 1e-4, "{v}");
        let denser = laplace_mcp_exact(1.0, 0.2, 4.0, 1e-8).unwrap();
        assert!(denser < v);
    }

    #[test]
    fn mcp_exact_below_approx() {
        // Spreading users over the cluster disc only adds interference
        // (Jensen on the squared single-user factor).
        for s in [0.05, 1.0, 20.0] {
            let e = laplace_mcp_exact(s, 0.1, 4.0, 1e-6).unwrap();
            let a = laplace_mcp_approx(s, 0.1, 4.0).unwrap();
            assert!(e < a, "s={s}: {e} vs {a}");
        }
    }

    #[test]
    fn cache_matches_direct() {
        let ev = LaplaceEvaluator::ppp_normalized(4.0).unwrap().cached();
        for &s in &[1e-9, 3.3e-5, 0.013, 0.5, 1.0, 7.77, 123.4, 9.9e4] {
            let c = ev.eval(s).unwrap();
            let d = ev.eval_direct(s).unwrap();
            assert!((c - d).abs() < 1e-7, "s={s}: {c} vs {d}");
        }
        assert!(ev.cache_len() > 0);
        // Outside the grid falls back to direct evaluation.
        let far = 1e15;
        assert_eq!(ev.eval(far).unwrap(), ev.eval_direct(far).unwrap());
    }

    #[test]
    fn evaluator_model_matching() {
        let ppp = ModelConfig::ppp(1e-3, 4.0).unwrap();
        let mcp = ModelConfig::mcp(1e-3, 10.0, 4.0).unwrap();
        let e = LaplaceEvaluator::for_model(&mcp, LaplaceVariant::Auto).unwrap();
        assert!(matches!(e.model(), LaplaceModel::McpApprox { .. }));
        assert!(e.check_matches(&mcp).is_ok());
        assert!(e.check_matches(&ppp).is_err());
        let exact = LaplaceEvaluator::for_model(&mcp, LaplaceVariant::Exact).unwrap();
        assert!(matches!(exact.model(), LaplaceModel::McpExact { .. }));
        let big = ModelConfig::mcp(1e-3, 20.0, 4.0).unwrap();
        let e = LaplaceEvaluator::for_model(&big, LaplaceVariant::Auto).unwrap();
        assert!(matches!(e.model(), LaplaceModel::McpExact { .. }));
        let g = LaplaceEvaluator::ppp_general(1e-2, 4.0).unwrap();
        assert!(g.check_matches(&ppp).is_err());
        assert!(LaplaceEvaluator::ppp_general(1e-3, 4.0)
            .unwrap()
            .check_matches(&ppp)
            .is_ok());
        let wrong_alpha = LaplaceEvaluator::ppp_normalized(3.0).unwrap();
        assert!(wrong_alpha.check_matches(&ppp).is_err());
    }
}
