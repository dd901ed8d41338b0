//! Monte Carlo network simulator.
//!
//! Every trial draws a full network around a typical BS at the origin and
//! evaluates the raw SIC events for all ranking schemes and roles on the
//! same fading draws. Trial `i` uses ChaCha8 stream `i` of the master seed,
//! so results do not depend on how trials are spread over threads.
//!
//! Draw order inside a trial is fixed: BS positions, typical pair and its
//! fading, then the interferers. The ordering-probability estimator stops
//! after the typical pair and therefore sees exactly the same pairs as the
//! full simulation.

pub mod events;
pub mod geometry;

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;

use crate::coverage::{RankingScheme, UserRole};
use crate::error::{invalid, Error, Result};
use crate::estimate::CoverageEstimate;
use crate::spatial::{ModelConfig, OrderedDistancePair, SirThreshold, UserLayout};

pub use events::{decode_events, fading_oracle, DecodeOutcome, OracleOutcome};
use geometry::{circumscribed_polygon, norm, polygon_area, sample_in_disc, voronoi_cell, Point, PolygonSampler};

/// Window radius in units of the mean BS spacing `1/sqrt(pi lambda_b)`.
pub const WINDOW_SPACINGS: f64 = 10.0;

const WINDOW_SIDES: usize = 64;
const MAX_TYPICAL_REJECTIONS: u32 = 1_000_000;

/// Simulation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub model: ModelConfig,
    pub window_radius: f64,
    pub trials: u64,
    pub master_seed: u64,
    pub t_grid: Vec<SirThreshold>,
    /// Replaces the sampled typical-pair distances (test hook).
    pub fixed_typical_pair: Option<OrderedDistancePair>,
}

impl SimConfig {
    /// Settings with the default window of ten mean BS spacings.
    pub fn new(model: ModelConfig, trials: u64, master_seed: u64, t_grid: Vec<SirThreshold>) -> Result<Self> {
        let cfg = Self {
            model,
            window_radius: default_window_radius(model.lambda_b),
            trials,
            master_seed,
            t_grid,
            fixed_typical_pair: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        let min_window = default_window_radius(self.model.lambda_b);
        if !(self.window_radius >= min_window * (1.0 - 1e-12)) || !self.window_radius.is_finite() {
            return Err(invalid(
                "window_radius",
                format!("must be >= 10/sqrt(pi lambda_b) = {min_window}, got {}", self.window_radius),
            ));
        }
        if self.trials == 0 {
            return Err(invalid("trials", "must be >= 1"));
        }
        if self.t_grid.is_empty() {
            return Err(invalid("t_grid", "must not be empty"));
        }
        if self.t_grid.windows(2).any(|w| w[0].linear() >= w[1].linear()) {
            return Err(invalid("t_grid", "must be strictly increasing"));
        }
        if let Some(pair) = &self.fixed_typical_pair {
            if pair.r2() <= 0.0 {
                return Err(invalid("fixed_typical_pair", "r2 must be positive"));
            }
        }
        Ok(())
    }
}

pub fn default_window_radius(lambda_b: f64) -> f64 {
    WINDOW_SPACINGS / (PI * lambda_b).sqrt()
}

/// Random stream of one trial.
pub fn trial_rng(master_seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interferer {
    /// Distance to the typical BS.
    pub distance: f64,
    pub fading: f64,
}

/// One sampled network as seen from the typical BS.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization {
    pub typical_pair: OrderedDistancePair,
    /// Fading of the near and far user.
    pub fading: (f64, f64),
    pub interferers: Vec<Interferer>,
    /// User-process redraws needed before the typical cell held two users.
    pub typical_cell_rejections: u32,
}

impl NetworkRealization {
    pub fn interference(&self, alpha: f64) -> f64 {
        self.interferers
            .iter()
            .map(|x| x.fading * x.distance.powf(-alpha))
            .sum()
    }

    /// Received powers `(h1 r1^-a, h2 r2^-a)`.
    pub fn signal_powers(&self, alpha: f64) -> (f64, f64) {
        (
            self.fading.0 * self.typical_pair.r1().powf(-alpha),
            self.fading.1 * self.typical_pair.r2().powf(-alpha),
        )
    }
}

fn poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> Result<u64> {
    if mean <= 0.0 {
        return Ok(0);
    }
    let d = Poisson::new(mean).map_err(|e| Error::Simulation(format!("poisson({mean}): {e}")))?;
    Ok(d.sample(rng) as u64)
}

struct TypicalDraw {
    pair: OrderedDistancePair,
    fading: (f64, f64),
    rejections: u32,
    /// BS positions, origin first (empty for MCP).
    sites: Vec<Point>,
}

fn sample_sites<R: Rng + ?Sized>(rng: &mut R, lambda_b: f64, window: f64) -> Result<Vec<Point>> {
    let n = poisson(rng, lambda_b * PI * window * window)?;
    let mut sites = Vec::with_capacity(n as usize + 1);
    sites.push([0.0, 0.0]);
    for _ in 0..n {
        sites.push(sample_in_disc(rng, [0.0, 0.0], window));
    }
    Ok(sites)
}

fn sample_typical<R: Rng + ?Sized>(cfg: &SimConfig, rng: &mut R) -> Result<TypicalDraw> {
    let model = &cfg.model;
    let sites = sample_sites(rng, model.lambda_b, cfg.window_radius)?;
    let (d1, d2, rejections) = match model.users {
        UserLayout::Ppp { lambda_u } => {
            let window = circumscribed_polygon(cfg.window_radius, WINDOW_SIDES);
            let cell = voronoi_cell(&sites, 0, &window);
            let sampler = PolygonSampler::new(&cell);
            let mean = lambda_u * sampler.area();
            let mut rejections = 0;
            while poisson(rng, mean)? < 2 {
                rejections += 1;
                if rejections > MAX_TYPICAL_REJECTIONS {
                    return Err(Error::Simulation(format!(
                        "typical cell of area {} never held two users",
                        sampler.area()
                    )));
                }
            }
            // Two users chosen at random among a Poisson cell population are
            // two independent uniform points of the cell.
            (norm(sampler.sample(rng)), norm(sampler.sample(rng)), rejections)
        }
        UserLayout::Mcp { radius } => (
            norm(sample_in_disc(rng, [0.0, 0.0], radius)),
            norm(sample_in_disc(rng, [0.0, 0.0], radius)),
            0,
        ),
    };
    let h1: f64 = Exp1.sample(rng);
    let h2: f64 = Exp1.sample(rng);
    let pair = match cfg.fixed_typical_pair {
        Some(p) => p,
        None => OrderedDistancePair::from_unordered(d1, d2)?,
    };
    Ok(TypicalDraw {
        pair,
        fading: (h1, h2),
        rejections,
        sites,
    })
}

/// Samples the network of trial `trial_index`.
///
/// PPP users: BSs form a PPP in the window disc plus the typical BS; each
/// cell holds a Poisson number of users with mean `lambda_u * area`, and two
/// of them (or all, if fewer) are scheduled. The typical cell is redrawn
/// until it holds at least two users. MCP users: every BS serves two users
/// uniform in its cluster disc.
pub fn sample_network(cfg: &SimConfig, trial_index: u64) -> Result<NetworkRealization> {
    cfg.validate()?;
    let mut rng = trial_rng(cfg.master_seed, trial_index);
    sample_network_with(cfg, &mut rng)
}

fn sample_network_with<R: Rng + ?Sized>(cfg: &SimConfig, rng: &mut R) -> Result<NetworkRealization> {
    let typical = sample_typical(cfg, rng)?;
    let mut interferers = Vec::with_capacity(2 * typical.sites.len());
    match cfg.model.users {
        UserLayout::Ppp { lambda_u } => {
            let window = circumscribed_polygon(cfg.window_radius, WINDOW_SIDES);
            for j in 1..typical.sites.len() {
                let cell = voronoi_cell(&typical.sites, j, &window);
                if cell.len() < 3 {
                    continue;
                }
                let sampler = PolygonSampler::new(&cell);
                let scheduled = poisson(rng, lambda_u * polygon_area(&cell))?.min(2);
                for _ in 0..scheduled {
                    let p = sampler.sample(rng);
                    interferers.push(Interferer {
                        distance: norm(p),
                        fading: Exp1.sample(rng),
                    });
                }
            }
        }
        UserLayout::Mcp { radius } => {
            for &centre in &typical.sites[1..] {
                for _ in 0..2 {
                    let p = sample_in_disc(rng, centre, radius);
                    interferers.push(Interferer {
                        distance: norm(p),
                        fading: Exp1.sample(rng),
                    });
                }
            }
        }
    }
    Ok(NetworkRealization {
        typical_pair: typical.pair,
        fading: typical.fading,
        interferers,
        typical_cell_rejections: typical.rejections,
    })
}

/// Outcomes of one realization for every threshold of the grid.
pub fn evaluate_events(real: &NetworkRealization, alpha: f64, t_grid: &[SirThreshold]) -> Vec<DecodeOutcome> {
    let (s1, s2) = real.signal_powers(alpha);
    let i = real.interference(alpha);
    t_grid.iter().map(|t| decode_events(s1, s2, i, t.linear())).collect()
}

/// Integer success counts accumulated over trials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimCounts {
    pub trials: u64,
    /// `successes[t][slot]`, slot from [`DecodeOutcome::slot`].
    pub successes: Vec<[u64; DecodeOutcome::SLOTS]>,
    /// Trials where the near user was received stronger.
    pub near_stronger: u64,
    pub typical_cell_rejections: u64,
}

impl SimCounts {
    fn zero(n_t: usize) -> Self {
        Self {
            trials: 0,
            successes: vec![[0; DecodeOutcome::SLOTS]; n_t],
            near_stronger: 0,
            typical_cell_rejections: 0,
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.trials += other.trials;
        for (a, b) in self.successes.iter_mut().zip(&other.successes) {
            for k in 0..DecodeOutcome::SLOTS {
                a[k] += b[k];
            }
        }
        self.near_stronger += other.near_stronger;
        self.typical_cell_rejections += other.typical_cell_rejections;
        self
    }
}

/// Per-T results of a full simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSummary {
    pub config: SimConfig,
    pub counts: SimCounts,
}

impl SimSummary {
    pub fn estimate(&self, scheme: RankingScheme, role: UserRole) -> Vec<CoverageEstimate> {
        let slot = DecodeOutcome::slot(scheme, role);
        self.counts
            .successes
            .iter()
            .map(|s| CoverageEstimate::from_counts(s[slot], self.counts.trials, self.config.master_seed))
            .collect()
    }

    pub fn ordering_probability(&self) -> CoverageEstimate {
        CoverageEstimate::from_counts(self.counts.near_stronger, self.counts.trials, self.config.master_seed)
    }

    pub fn rejection_rate(&self) -> f64 {
        let draws = self.counts.trials + self.counts.typical_cell_rejections;
        self.counts.typical_cell_rejections as f64 / draws as f64
    }
}

/// Runs all trials on the current rayon pool.
pub fn simulate(cfg: &SimConfig) -> Result<SimSummary> {
    cfg.validate()?;
    let n_t = cfg.t_grid.len();
    let alpha = cfg.model.alpha;
    let counts = (0..cfg.trials)
        .into_par_iter()
        .map(|i| -> Result<SimCounts> {
            let mut rng = trial_rng(cfg.master_seed, i);
            let real = sample_network_with(cfg, &mut rng)?;
            let mut c = SimCounts::zero(n_t);
            c.trials = 1;
            c.typical_cell_rejections = u64::from(real.typical_cell_rejections);
            let (s1, s2) = real.signal_powers(alpha);
            c.near_stronger = u64::from(s1 > s2);
            for (k, outcome) in evaluate_events(&real, alpha, &cfg.t_grid).into_iter().enumerate() {
                let bits = outcome.bits();
                for slot in 0..DecodeOutcome::SLOTS {
                    c.successes[k][slot] += u64::from((bits >> slot) & 1);
                }
            }
            Ok(c)
        })
        .try_reduce(|| SimCounts::zero(n_t), |a, b| Ok(a.merge(b)))?;
    Ok(SimSummary {
        config: cfg.clone(),
        counts,
    })
}

/// Coverage estimates for one scheme and role, one per threshold.
pub fn estimate_coverage(cfg: &SimConfig, scheme: RankingScheme, role: UserRole) -> Result<Vec<CoverageEstimate>> {
    Ok(simulate(cfg)?.estimate(scheme, role))
}

/// Typical ordered pair and rejection count of trial `trial_index`, drawn
/// from the same stream prefix as [`sample_network`] without sampling
/// the interferers.
pub fn sample_typical_pair(cfg: &SimConfig, trial_index: u64) -> Result<(OrderedDistancePair, u32)> {
    cfg.validate()?;
    let mut rng = trial_rng(cfg.master_seed, trial_index);
    let d = sample_typical(cfg, &mut rng)?;
    Ok((d.pair, d.rejections))
}

/// Fraction of trials where `h1 r1^-a > h2 r2^-a` for the typical pair.
pub fn estimate_ordering_probability(cfg: &SimConfig) -> Result<CoverageEstimate> {
    cfg.validate()?;
    let alpha = cfg.model.alpha;
    let hits = (0..cfg.trials)
        .into_par_iter()
        .map(|i| -> Result<u64> {
            let mut rng = trial_rng(cfg.master_seed, i);
            let d = sample_typical(cfg, &mut rng)?;
            let s1 = d.fading.0 * d.pair.r1().powf(-alpha);
            let s2 = d.fading.1 * d.pair.r2().powf(-alpha);
            Ok(u64::from(s1 > s2))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(CoverageEstimate::from_counts(hits, cfg.trials, cfg.master_seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<SirThreshold> {
        [-10.0, 0.0, 10.0].iter().map(|&d| SirThreshold::from_db(d).unwrap()).collect()
    }

    #[test]
    fn config_validation() {
        let m = ModelConfig::mcp(1e-3, 10.0, 4.0).unwrap();
        assert!(SimConfig::new(m, 0, 1, grid()).is_err());
        assert!(SimConfig::new(m, 10, 1, vec![]).is_err());
        let mut rev = grid();
        rev.reverse();
        assert!(SimConfig::new(m, 10, 1, rev).is_err());
        let mut c = SimConfig::new(m, 10, 1, grid()).unwrap();
        c.window_radius *= 0.5;
        assert!(c.validate().is_err());
    }

    #[test]
    fn realization_is_reproducible() {
        let m = ModelConfig::ppp(1e-3, 4.0).unwrap();
        let c = SimConfig::new(m, 10, 42, grid()).unwrap();
        let a = sample_network(&c, 7).unwrap();
        let b = sample_network(&c, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_network(&c, 8).unwrap());
        assert!(a.typical_pair.r1() <= a.typical_pair.r2());
        assert!(a.interferers.iter().all(|x| x.distance >= 0.0));
    }

    #[test]
    fn typical_prefix_matches_full_network() {
        for m in [ModelConfig::ppp(1e-3, 4.0).unwrap(), ModelConfig::mcp(1e-3, 10.0, 4.0).unwrap()] {
            let c = SimConfig::new(m, 10, 5, grid()).unwrap();
            for i in 0..5 {
                let full = sample_network(&c, i).unwrap();
                let d = sample_typical(&c, &mut trial_rng(5, i)).unwrap();
                assert_eq!(full.typical_pair, d.pair);
                assert_eq!(full.fading, d.fading);
            }
        }
    }

    #[test]
    fn zero_interference_isp_always_covered() {
        let real = NetworkRealization {
            typical_pair: OrderedDistancePair::new(0.4, 2.0).unwrap(),
            fading: (0.1, 3.0),
            interferers: vec![],
            typical_cell_rejections: 0,
        };
        let t_grid: Vec<_> = [0.1, 0.5, 0.99].iter().map(|&t| SirThreshold::new(t).unwrap()).collect();
        for o in evaluate_events(&real, 4.0, &t_grid) {
            assert!(o.get(RankingScheme::Isp, UserRole::Near));
        }
    }
}
