//! Conditional and unconditional SIR coverage of the NOMA pair.
//!
//! Fading is unit-mean exponential, so each decoding event reduces to a
//! product of a fading factor and one Laplace-transform evaluation. With
//! `a = T (r1/r2)^alpha`, `b = T (r2/r1)^alpha` and `beta = (r1/r2)^alpha`:
//!
//! | scheme | near user | far user |
//! |--------|-----------|----------|
//! | ISP    | `L(T r1^a)/(1+a) + L(T r2^a + T r1^a + T^2 r2^a)/(1+b) + [T<1] k3 L(s*)` | `L(T r2^a)/(1+b) + L(T r1^a + T r2^a + T^2 r1^a)/(1+a) + [T<1] k3 L(s*)` |
//! | MSP    | `L(T r1^a)/(1+a)` | `L(T r1^a + T r2^a + T^2 r1^a)/(1+a)` |
//! | MSP-AD | `L(T r1^a)/(1+a) + [T<1] k2 L(s*)` | `L(T r1^a + T r2^a + T^2 r1^a)/(1+a) + [T<1] k2 L(s*)` |
//!
//! where `s* = T/(1-T) (r1^a + r2^a)`, `k3 = 1 - 1/(1+a) - 1/(1+b)` and
//! `k2 = 1/(1+beta) - 1/(1+a)`. Both `k2` and `k3` are non-positive for
//! `T < 1` and must not be clamped.

use crate::error::{invalid, Error, Result};
use crate::estimate::CoverageEstimate;
use crate::laplace::{Laplace, LaplaceEvaluator, LaplaceModel};
use crate::quadrature::{integrate, QuadOptions};
use crate::spatial::{ModelConfig, OrderedDistancePair, SirThreshold, UserLayout, PPP_TRUNCATION_MASS, VORONOI_AREA_CORRECTION};

/// Default absolute tolerance of unconditional coverage values.
pub const DEFAULT_COVERAGE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RankingScheme {
    /// Decode order and user assignment follow instantaneous received power.
    Isp,
    /// Near user assumed strongest when decoding.
    Msp,
    /// As `Msp`, and the first decoded signal is always credited to the near user.
    MspAd,
}

impl RankingScheme {
    pub const ALL: [RankingScheme; 3] = [RankingScheme::Isp, RankingScheme::Msp, RankingScheme::MspAd];

    pub fn as_str(self) -> &'static str {
        match self {
            RankingScheme::Isp => "isp",
            RankingScheme::Msp => "msp",
            RankingScheme::MspAd => "msp_ad",
        }
    }
}

impl std::fmt::Display for RankingScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for RankingScheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "isp" => Ok(Self::Isp),
            "msp" => Ok(Self::Msp),
            "msp_ad" => Ok(Self::MspAd),
            other => Err(format!("unknown ranking scheme `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UserRole {
    Near,
    Far,
}

impl UserRole {
    pub const ALL: [UserRole; 2] = [UserRole::Near, UserRole::Far];

    pub fn as_str(self) -> &'static str {
        match self {
            UserRole::Near => "near",
            UserRole::Far => "far",
        }
    }
}

impl std::fmt::Display for UserRole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for UserRole {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "near" => Ok(Self::Near),
            "far" => Ok(Self::Far),
            other => Err(format!("unknown user role `{other}`")),
        }
    }
}

/// Everything a conditional coverage needs: distances, threshold,
/// path-loss exponent and the interference transform.
#[derive(Clone, Copy)]
pub struct ConditionalCoverageInputs<'a> {
    pub pair: OrderedDistancePair,
    pub t: SirThreshold,
    pub alpha: f64,
    pub laplace: &'a dyn Laplace,
}

impl<'a> ConditionalCoverageInputs<'a> {
    pub fn new(
        pair: OrderedDistancePair,
        t: SirThreshold,
        alpha: f64,
        laplace: &'a dyn Laplace,
    ) -> Result<Self> {
        if pair.r2() <= 0.0 {
            return Err(invalid("pair", "r2 must be positive"));
        }
        if !(alpha > 2.0) || !alpha.is_finite() {
            return Err(invalid("alpha", format!("must be > 2, got {alpha}")));
        }
        Ok(Self {
            pair,
            t,
            alpha,
            laplace,
        })
    }

    /// `(r1/r2)^alpha`.
    pub fn beta(&self) -> f64 {
        (self.pair.r1() / self.pair.r2()).powf(self.alpha)
    }

    /// `T (r1/r2)^alpha`.
    pub fn a(&self) -> f64 {
        self.t.linear() * self.beta()
    }

    /// `T (r2/r1)^alpha`; infinite when `r1 = 0`.
    pub fn b(&self) -> f64 {
        self.t.linear() * (self.pair.r2() / self.pair.r1()).powf(self.alpha)
    }

    fn r1a(&self) -> f64 {
        self.pair.r1().powf(self.alpha)
    }

    fn r2a(&self) -> f64 {
        self.pair.r2().powf(self.alpha)
    }

    fn l(&self, s: f64) -> Result<f64> {
        self.laplace.laplace(s)
    }

    fn below_one(&self) -> bool {
        self.t.linear() < 1.0
    }

    /// Laplace argument shared by the `T < 1` correction terms.
    fn joint_argument(&self) -> f64 {
        let t = self.t.linear();
        t / (1.0 - t) * (self.r1a() + self.r2a())
    }
}

/// `1 - 1/(1+a) - 1/(1+b)`, evaluated as `(T^2 - 1)/((1+a)(1+b))`.
pub fn isp_correction_coefficient(a: f64, b: f64, t: f64) -> f64 {
    if b.is_infinite() {
        return 1.0 - 1.0 / (1.0 + a);
    }
    (t * t - 1.0) / ((1.0 + a) * (1.0 + b))
}

/// `1/(1+beta) - 1/(1+a)` with `a = T beta`, evaluated as
/// `beta (T - 1) / ((1+beta)(1+a))`.
pub fn msp_ad_correction_coefficient(beta: f64, t: f64) -> f64 {
    beta * (t - 1.0) / ((1.0 + beta) * (1.0 + t * beta))
}

fn weighted(coef: f64, laplace: f64) -> f64 {
    if coef == 0.0 {
        0.0
    } else {
        coef * laplace
    }
}

pub fn cond_cov_isp_near(inp: &ConditionalCoverageInputs) -> Result<f64> {
    let t = inp.t.linear();
    let (a, b) = (inp.a(), inp.b());
    let (r1a, r2a) = (inp.r1a(), inp.r2a());
    let mut p = inp.l(t * r1a)? / (1.0 + a);
    p += weighted(1.0 / (1.0 + b), inp.l(t * r2a + t * r1a + t * t * r2a)?);
    if inp.below_one() {
        p += isp_correction_coefficient(a, b, t) * inp.l(inp.joint_argument())?;
    }
    Ok(p.clamp(0.0, 1.0))
}

pub fn cond_cov_isp_far(inp: &ConditionalCoverageInputs) -> Result<f64> {
    let t = inp.t.linear();
    let (a, b) = (inp.a(), inp.b());
    let (r1a, r2a) = (inp.r1a(), inp.r2a());
    let mut p = weighted(1.0 / (1.0 + b), inp.l(t * r2a)?);
    p += inp.l(t * r1a + t * r2a + t * t * r1a)? / (1.0 + a);
    if inp.below_one() {
        p += isp_correction_coefficient(a, b, t) * inp.l(inp.joint_argument())?;
    }
    Ok(p.clamp(0.0, 1.0))
}

pub fn cond_cov_msp_near(inp: &ConditionalCoverageInputs) -> Result<f64> {
    let t = inp.t.linear();
    Ok(inp.l(t * inp.r1a())? / (1.0 + inp.a()))
}

pub fn cond_cov_msp_far(inp: &ConditionalCoverageInputs) -> Result<f64> {
    let t = inp.t.linear();
    let (r1a, r2a) = (inp.r1a(), inp.r2a());
    Ok(inp.l(t * r1a + t * r2a + t * t * r1a)? / (1.0 + inp.a()))
}

pub fn cond_cov_msp_ad_near(inp: &ConditionalCoverageInputs) -> Result<f64> {
    let mut p = cond_cov_msp_near(inp)?;
    if inp.below_one() {
        let k = msp_ad_correction_coefficient(inp.beta(), inp.t.linear());
        p += k * inp.l(inp.joint_argument())?;
    }
    Ok(p.clamp(0.0, 1.0))
}

pub fn cond_cov_msp_ad_far(inp: &ConditionalCoverageInputs) -> Result<f64> {
    let mut p = cond_cov_msp_far(inp)?;
    if inp.below_one() {
        let k = msp_ad_correction_coefficient(inp.beta(), inp.t.linear());
        p += k * inp.l(inp.joint_argument())?;
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Dispatches to the conditional coverage of `scheme` and `role`.
pub fn conditional_coverage(
    scheme: RankingScheme,
    role: UserRole,
    inp: &ConditionalCoverageInputs,
) -> Result<f64> {
    match (scheme, role) {
        (RankingScheme::Isp, UserRole::Near) => cond_cov_isp_near(inp),
        (RankingScheme::Isp, UserRole::Far) => cond_cov_isp_far(inp),
        (RankingScheme::Msp, UserRole::Near) => cond_cov_msp_near(inp),
        (RankingScheme::Msp, UserRole::Far) => cond_cov_msp_far(inp),
        (RankingScheme::MspAd, UserRole::Near) => cond_cov_msp_ad_near(inp),
        (RankingScheme::MspAd, UserRole::Far) => cond_cov_msp_ad_far(inp),
    }
}

/// Serving-distance density and upper bound in the frame the evaluator
/// works in (normalized or raw units).
#[derive(Debug, Clone, Copy)]
struct DistanceFrame {
    /// `f(r) = 2 k r exp(-k r^2)` for PPP, `2 r` on `[0, 1]` for MCP.
    ppp_rate: Option<f64>,
    upper: f64,
}

impl DistanceFrame {
    fn for_evaluator(model: &ModelConfig, laplace: &LaplaceEvaluator) -> Result<Self> {
        laplace.check_matches(model)?;
        let c = VORONOI_AREA_CORRECTION;
        let ppp = |lambda_b: f64| {
            let k = c * std::f64::consts::PI * lambda_b;
            Self {
                ppp_rate: Some(k),
                upper: (-PPP_TRUNCATION_MASS.ln() / k).sqrt(),
            }
        };
        Ok(match (laplace.model(), model.users) {
            (LaplaceModel::PppNormalized, _) => ppp(1.0 / std::f64::consts::PI),
            (LaplaceModel::PppGeneral { .. }, _) => ppp(model.lambda_b),
            (_, UserLayout::Mcp { .. }) => Self {
                ppp_rate: None,
                upper: 1.0,
            },
            (m, _) => {
                return Err(Error::EvaluatorMismatch(format!(
                    "{} evaluator used with {} model",
                    m.tag(),
                    model.kind()
                )))
            }
        })
    }

    fn pdf(&self, r: f64) -> f64 {
        match self.ppp_rate {
            Some(k) => 2.0 * k * r * (-k * r * r).exp(),
            None => 2.0 * r,
        }
    }
}

/// Unconditional coverage: `2 int_0^ub int_0^r2 P(cov | r1, r2) f(r1) f(r2) dr1 dr2`.
///
/// The evaluator fixes the frame: normalized evaluators integrate in
/// normalized units (PPP with `lambda_b = 1/pi`, MCP with `R = 1`), the
/// general PPP evaluator in raw units. `tol` is the absolute error target.
pub fn coverage(
    model: &ModelConfig,
    scheme: RankingScheme,
    role: UserRole,
    t: SirThreshold,
    laplace: &LaplaceEvaluator,
    tol: f64,
) -> Result<CoverageEstimate> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(invalid("tol", format!("must lie in (0, 1), got {tol}")));
    }
    let frame = DistanceFrame::for_evaluator(model, laplace)?;
    let alpha = model.alpha;
    let inner_opts = QuadOptions::absolute(tol / 8.0);
    let outer_opts = QuadOptions::absolute(tol / 4.0);

    let mut inner_error = 0.0_f64;
    let outer = integrate(
        |r2| {
            if r2 <= 0.0 {
                return Ok(0.0);
            }
            let f2 = frame.pdf(r2);
            if f2 == 0.0 {
                return Ok(0.0);
            }
            let inner = integrate(
                |r1| {
                    let f1 = frame.pdf(r1);
                    if f1 == 0.0 {
                        return Ok(0.0);
                    }
                    let pair = OrderedDistancePair::new(r1, r2)?;
                    let inp = ConditionalCoverageInputs::new(pair, t, alpha, laplace)?;
                    Ok(conditional_coverage(scheme, role, &inp)? * f1)
                },
                0.0,
                r2,
                &inner_opts,
            )?;
            inner_error = inner_error.max(inner.abs_error);
            Ok(2.0 * f2 * inner.value)
        },
        0.0,
        frame.upper,
        &outer_opts,
    )?;

    let error = outer.abs_error + 2.0 * inner_error;
    Ok(CoverageEstimate::analytic(outer.value.clamp(0.0, 1.0), error))
}
