//! Spatial models: BS/user point-process parameters, serving-distance laws
//! and the ordered near/far distance pair.

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::quadrature::{integrate, QuadOptions};

/// Correction constant of the Voronoi-cell serving-distance law.
pub const VORONOI_AREA_CORRECTION: f64 = 5.0 / 4.0;

/// Default user-to-BS density ratio of the heavily loaded PPP layout.
pub const DEFAULT_USER_LOAD: f64 = 100.0;

/// Smallest accepted user-to-BS density ratio for the PPP layout.
pub const MIN_USER_LOAD: f64 = 10.0;

/// Mass of the serving-distance law left beyond the PPP truncation radius.
pub const PPP_TRUNCATION_MASS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Ppp,
    Mcp,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Ppp => "ppp",
            ModelKind::Mcp => "mcp",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ppp" => Ok(ModelKind::Ppp),
            "mcp" => Ok(ModelKind::Mcp),
            other => Err(format!("unknown model kind `{other}` (expected ppp or mcp)")),
        }
    }
}

/// How users are placed relative to the BS process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UserLayout {
    /// Homogeneous PPP of users with nearest-BS association.
    Ppp { lambda_u: f64 },
    /// Users uniform in a disc of radius `radius` around their BS.
    Mcp { radius: f64 },
}

/// Network geometry: BS density and user layout, with the path-loss exponent.
///
/// Transmit power is fixed to one; it cancels from every SIR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    pub lambda_b: f64,
    pub alpha: f64,
    pub users: UserLayout,
}

impl ModelConfig {
    /// PPP users at the default load of `100 * lambda_b`.
    pub fn ppp(lambda_b: f64, alpha: f64) -> Result<Self> {
        Self::ppp_with_users(lambda_b, DEFAULT_USER_LOAD * lambda_b, alpha)
    }

    pub fn ppp_with_users(lambda_b: f64, lambda_u: f64, alpha: f64) -> Result<Self> {
        let m = Self {
            lambda_b,
            alpha,
            users: UserLayout::Ppp { lambda_u },
        };
        m.validate()?;
        Ok(m)
    }

    pub fn mcp(lambda_b: f64, radius: f64, alpha: f64) -> Result<Self> {
        let m = Self {
            lambda_b,
            alpha,
            users: UserLayout::Mcp { radius },
        };
        m.validate()?;
        Ok(m)
    }

    pub fn kind(&self) -> ModelKind {
        match self.users {
            UserLayout::Ppp { .. } => ModelKind::Ppp,
            UserLayout::Mcp { .. } => ModelKind::Mcp,
        }
    }

    /// Voronoi correction constant `c` (only meaningful for PPP users).
    pub fn c(&self) -> f64 {
        VORONOI_AREA_CORRECTION
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 2.0) || !self.alpha.is_finite() {
            return Err(invalid("alpha", format!("must be > 2, got {}", self.alpha)));
        }
        if !(self.lambda_b > 0.0) || !self.lambda_b.is_finite() {
            return Err(invalid(
                "lambda_b",
                format!("must be positive, got {}", self.lambda_b),
            ));
        }
        match self.users {
            UserLayout::Ppp { lambda_u } => {
                if !lambda_u.is_finite() || lambda_u < MIN_USER_LOAD * self.lambda_b {
                    return Err(invalid(
                        "lambda_u",
                        format!(
                            "must be >= {MIN_USER_LOAD} * lambda_b = {}, got {lambda_u}",
                            MIN_USER_LOAD * self.lambda_b
                        ),
                    ));
                }
            }
            UserLayout::Mcp { radius } => {
                if !(radius > 0.0) || !radius.is_finite() {
                    return Err(invalid("R", format!("must be positive, got {radius}")));
                }
            }
        }
        Ok(())
    }

    /// Upper integration bound of the serving distance: `R` for MCP, the
    /// radius leaving [`PPP_TRUNCATION_MASS`] uncovered for PPP.
    pub fn distance_upper_bound(&self) -> f64 {
        match self.users {
            UserLayout::Ppp { .. } => {
                (-PPP_TRUNCATION_MASS.ln() / (self.c() * PI * self.lambda_b)).sqrt()
            }
            UserLayout::Mcp { radius } => radius,
        }
    }
}

/// Near/far user distances from the typical BS, `r1 <= r2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderedDistancePair {
    r1: f64,
    r2: f64,
}

impl OrderedDistancePair {
    pub fn new(r1: f64, r2: f64) -> Result<Self> {
        if !r1.is_finite() || !r2.is_finite() || r1 < 0.0 {
            return Err(invalid("pair", format!("distances must be finite, r1 >= 0: ({r1}, {r2})")));
        }
        if r1 > r2 {
            return Err(invalid("pair", format!("requires r1 <= r2, got ({r1}, {r2})")));
        }
        Ok(Self { r1, r2 })
    }

    /// Orders two unordered distances.
    pub fn from_unordered(a: f64, b: f64) -> Result<Self> {
        Self::new(a.min(b), a.max(b))
    }

    pub fn r1(&self) -> f64 {
        self.r1
    }

    pub fn r2(&self) -> f64 {
        self.r2
    }

    pub fn check_against(&self, model: &ModelConfig) -> Result<()> {
        if let UserLayout::Mcp { radius } = model.users {
            if self.r2 > radius {
                return Err(invalid("pair", format!("r2 = {} exceeds R = {radius}", self.r2)));
            }
        }
        Ok(())
    }
}

/// Linear SIR threshold, `T > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SirThreshold(f64);

impl SirThreshold {
    pub fn new(t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(invalid("T", format!("must be positive and finite, got {t}")));
        }
        Ok(Self(t))
    }

    pub fn from_db(t_db: f64) -> Result<Self> {
        Self::new(10f64.powf(t_db / 10.0))
    }

    pub fn linear(self) -> f64 {
        self.0
    }

    pub fn db(self) -> f64 {
        10.0 * self.0.log10()
    }
}

fn check_distance(x: f64) -> Result<()> {
    if !(x >= 0.0) {
        return Err(invalid("x", format!("distance must be >= 0, got {x}")));
    }
    Ok(())
}

/// Serving-distance PDF.
pub fn distance_pdf(model: &ModelConfig, x: f64) -> Result<f64> {
    model.validate()?;
    check_distance(x)?;
    Ok(match model.users {
        UserLayout::Ppp { .. } => {
            let k = model.c() * model.lambda_b * PI;
            2.0 * k * x * (-k * x * x).exp()
        }
        UserLayout::Mcp { radius } => {
            if x <= radius {
                2.0 * x / (radius * radius)
            } else {
                0.0
            }
        }
    })
}

/// Serving-distance CDF.
pub fn distance_cdf(model: &ModelConfig, x: f64) -> Result<f64> {
    model.validate()?;
    check_distance(x)?;
    Ok(match model.users {
        UserLayout::Ppp { .. } => -(-model.c() * model.lambda_b * PI * x * x).exp_m1(),
        UserLayout::Mcp { radius } => (x * x / (radius * radius)).min(1.0),
    })
}

/// Joint PDF of the ordered pair under random selection of two users:
/// `2 f(r1) f(r2)` on `r1 < r2`, zero on the diagonal.
pub fn joint_ordered_pdf(model: &ModelConfig, pair: &OrderedDistancePair) -> Result<f64> {
    if pair.r1 >= pair.r2 {
        model.validate()?;
        return Ok(0.0);
    }
    Ok(2.0 * distance_pdf(model, pair.r1)? * distance_pdf(model, pair.r2)?)
}

/// Inverse-CDF sample of the serving distance from `u in (0, 1)`.
pub fn sample_distance(model: &ModelConfig, u: f64) -> Result<f64> {
    model.validate()?;
    if !(u > 0.0 && u < 1.0) {
        return Err(invalid("u", format!("must lie in (0, 1), got {u}")));
    }
    Ok(match model.users {
        UserLayout::Ppp { .. } => (-(-u).ln_1p() / (model.c() * PI * model.lambda_b)).sqrt(),
        UserLayout::Mcp { radius } => radius * u.sqrt(),
    })
}

/// Probability that the near user is also the stronger one under unit-mean
/// Rayleigh fading: `P(h1 r1^-a > h2 r2^-a) = 1 / (1 + (r1/r2)^a)`.
pub fn ordering_probability_conditional(pair: &OrderedDistancePair, alpha: f64) -> Result<f64> {
    if pair.r2 <= 0.0 {
        return Err(invalid("pair", "r2 = 0 is a degenerate pair"));
    }
    Ok(1.0 / (1.0 + (pair.r1 / pair.r2).powf(alpha)))
}

/// Unconditional ordering probability: the conditional law averaged over
/// the joint ordered distance PDF.
pub fn mean_ordering_probability(model: &ModelConfig, tol: f64) -> Result<f64> {
    model.validate()?;
    let ub = model.distance_upper_bound();
    let inner_opts = QuadOptions::absolute(tol / 8.0);
    let outer_opts = QuadOptions::absolute(tol / 4.0);
    let r = integrate(
        |r2| {
            if r2 <= 0.0 {
                return Ok(0.0);
            }
            let inner = integrate(
                |r1| {
                    let p = ordering_probability_conditional(&OrderedDistancePair { r1, r2 }, model.alpha)?;
                    Ok(p * distance_pdf(model, r1)?)
                },
                0.0,
                r2,
                &inner_opts,
            )?;
            Ok(2.0 * distance_pdf(model, r2)? * inner.value)
        },
        0.0,
        ub,
        &outer_opts,
    )?;
    Ok(r.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ppp_unit() -> ModelConfig {
        ModelConfig::ppp(1.0 / PI, 4.0).unwrap()
    }

    fn mcp(r: f64) -> ModelConfig {
        ModelConfig::mcp(1e-3, r, 4.0).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(ModelConfig::mcp(1e-3, 10.0, 2.0).is_err());
        assert!(ModelConfig::mcp(0.0, 10.0, 4.0).is_err());
        assert!(ModelConfig::mcp(1e-3, 0.0, 4.0).is_err());
        assert!(ModelConfig::ppp_with_users(1.0, 5.0, 4.0).is_err());
        assert!(ModelConfig::ppp_with_users(1.0, 10.0, 4.0).is_ok());
        assert_eq!(ppp_unit().c(), 1.25);
    }

    #[test]
    fn pdf_examples() {
        assert!((distance_pdf(&mcp(10.0), 10.0).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(distance_pdf(&mcp(10.0), 10.5).unwrap(), 0.0);
        let expected = 2.0 * 1.25 * (-1.25f64).exp();
        assert!((distance_pdf(&ppp_unit(), 1.0).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 0.71627).abs() < 1e-5);
        assert!(distance_pdf(&ppp_unit(), -1.0).is_err());
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(distance_cdf(&mcp(10.0), 10.0).unwrap(), 1.0);
        assert_eq!(distance_cdf(&ppp_unit(), 0.0).unwrap(), 0.0);
        let v = distance_cdf(&ppp_unit(), 1.0).unwrap();
        assert!((v - (1.0 - (-1.25f64).exp())).abs() < 1e-15);
        assert!((v - 0.71350).abs() < 1e-5);
    }

    #[test]
    fn pdf_integrates_to_one() {
        for model in [ppp_unit(), ModelConfig::ppp(1e-3, 3.0).unwrap(), mcp(10.0)] {
            let ub = model.distance_upper_bound();
            let r = integrate(
                |x| distance_pdf(&model, x),
                0.0,
                ub,
                &QuadOptions::absolute(1e-12),
            )
            .unwrap();
            let mass = match model.kind() {
                ModelKind::Ppp => 1.0 - PPP_TRUNCATION_MASS,
                ModelKind::Mcp => 1.0,
            };
            assert!((r.value - mass).abs() < 1e-9, "{model:?}: {}", r.value);
            assert!((r.value - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn normalized_ppp_truncation_radius() {
        let ub = ppp_unit().distance_upper_bound();
        assert!((ub - 3.84).abs() < 0.01, "{ub}");
        assert!(distance_cdf(&ppp_unit(), ub).unwrap() >= 1.0 - 1e-8 - 1e-15);
    }

    #[test]
    fn joint_pdf_examples() {
        let m = ModelConfig::mcp(1e-3, 1.0, 4.0).unwrap();
        let p = OrderedDistancePair::new(0.5, 0.8).unwrap();
        assert!((joint_ordered_pdf(&m, &p).unwrap() - 3.2).abs() < 1e-14);
        let d = OrderedDistancePair::new(0.4, 0.4).unwrap();
        assert_eq!(joint_ordered_pdf(&m, &d).unwrap(), 0.0);
    }

    #[test]
    fn joint_pdf_normalizes_over_wedge() {
        for model in [ppp_unit(), mcp(1.0)] {
            let ub = model.distance_upper_bound();
            let r = integrate(
                |r2| {
                    let inner = integrate(
                        |r1| joint_ordered_pdf(&model, &OrderedDistancePair::new(r1, r2)?),
                        0.0,
                        r2,
                        &QuadOptions::absolute(1e-11),
                    )?;
                    Ok(inner.value)
                },
                0.0,
                ub,
                &QuadOptions::absolute(1e-10),
            )
            .unwrap();
            assert!((r.value - 1.0).abs() < 1e-6, "{}", r.value);
        }
    }

    #[test]
    fn sample_distance_examples() {
        assert!((sample_distance(&mcp(10.0), 0.25).unwrap() - 5.0).abs() < 1e-14);
        let u = 1.0 - (-1.25f64).exp();
        assert!((sample_distance(&ppp_unit(), u).unwrap() - 1.0).abs() < 1e-12);
        assert!(sample_distance(&ppp_unit(), 0.0).is_err());
        assert!(sample_distance(&ppp_unit(), 1.0).is_err());
    }

    #[test]
    fn ordering_conditional_examples() {
        let eq = OrderedDistancePair::new(1.3, 1.3).unwrap();
        assert_eq!(ordering_probability_conditional(&eq, 4.0).unwrap(), 0.5);
        let z = OrderedDistancePair::new(0.0, 1.0).unwrap();
        assert_eq!(ordering_probability_conditional(&z, 4.0).unwrap(), 1.0);
        let p = OrderedDistancePair::new(1.0, 2.0).unwrap();
        let v = ordering_probability_conditional(&p, 4.0).unwrap();
        assert!((v - 16.0 / 17.0).abs() < 1e-15);
        let degenerate = OrderedDistancePair::new(0.0, 0.0).unwrap();
        assert!(ordering_probability_conditional(&degenerate, 4.0).is_err());
    }

    #[test]
    fn pair_validation() {
        assert!(OrderedDistancePair::new(2.0, 1.0).is_err());
        assert!(OrderedDistancePair::new(-0.1, 1.0).is_err());
        let p = OrderedDistancePair::new(1.0, 11.0).unwrap();
        assert!(p.check_against(&mcp(10.0)).is_err());
    }

    #[test]
    fn threshold_db_round_trip() {
        let t = SirThreshold::from_db(10.0).unwrap();
        assert!((t.linear() - 10.0).abs() < 1e-12);
        assert!((SirThreshold::from_db(-10.0).unwrap().linear() - 0.1).abs() < 1e-15);
        assert!(SirThreshold::new(0.0).is_err());
    }

    #[test]
    fn unconditional_ordering_probability() {
        // Closed forms: with r^2 exponential (PPP) the ratio v = r1^2/r2^2 has
        // density 2/(1+v)^2, with r^2 uniform (MCP) it is uniform on (0, 1).
        let ppp = mean_ordering_probability(&ppp_unit(), 1e-8).unwrap();
        let mcp_v = mean_ordering_probability(&mcp(1.0), 1e-8).unwrap();
        assert!((mcp_v - PI / 4.0).abs() < 1e-7, "{mcp_v}");
        assert!((ppp - 0.846_573_590_279_97).abs() < 1e-6, "{ppp}");
        assert!((ppp - 0.84).abs() <= 0.01);
        assert!((mcp_v - 0.79).abs() <= 0.01);
    }
}
