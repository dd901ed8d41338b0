//! Raw SIC decoding events on received powers, and the fading oracle that
//! averages them over Rayleigh draws at fixed geometry and interference.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::coverage::{RankingScheme, UserRole};
use crate::error::{invalid, Result};
use crate::estimate::binomial_std_error;
use crate::spatial::{OrderedDistancePair, SirThreshold};

/// Success flags of the six (scheme, role) events for one draw and one `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DecodeOutcome(u8);

impl DecodeOutcome {
    pub const SLOTS: usize = 6;

    pub fn slot(scheme: RankingScheme, role: UserRole) -> usize {
        let s = match scheme {
            RankingScheme::Isp => 0,
            RankingScheme::Msp => 1,
            RankingScheme::MspAd => 2,
        };
        let r = match role {
            UserRole::Near => 0,
            UserRole::Far => 1,
        };
        2 * s + r
    }

    pub fn get(self, scheme: RankingScheme, role: UserRole) -> bool {
        self.0 & (1 << Self::slot(scheme, role)) != 0
    }

    fn set(&mut self, scheme: RankingScheme, role: UserRole, ok: bool) {
        if ok {
            self.0 |= 1 << Self::slot(scheme, role);
        }
    }

    pub fn bits(self) -> u8 {
        self.0
    }
}

/// Evaluates every decoding event from received powers `s1 = h1 r1^-a`,
/// `s2 = h2 r2^-a` and interference `i`.
///
/// `SIR > T` is tested as `S > T * (denominator)`, so zero interference
/// counts as infinite SIR.
pub fn decode_events(s1: f64, s2: f64, i: f64, t: f64) -> DecodeOutcome {
    let near_stronger = s1 > s2;
    let far_stronger = s1 < s2;
    // First SIC stage on each candidate order.
    let near_first = s1 > t * (s2 + i);
    let far_first = s2 > t * (s1 + i);
    // Second stage, after the other signal is cancelled.
    let near_alone = s1 > t * i;
    let far_alone = s2 > t * i;

    let mut out = DecodeOutcome::default();
    use RankingScheme::*;
    use UserRole::*;
    out.set(
        Isp,
        Near,
        (near_first && near_stronger) || (far_first && near_alone && far_stronger),
    );
    out.set(
        Isp,
        Far,
        (far_first && far_stronger) || (near_first && far_alone && near_stronger),
    );
    out.set(Msp, Near, near_first);
    out.set(Msp, Far, near_first && far_alone);
    out.set(MspAd, Near, near_first && near_stronger);
    out.set(MspAd, Far, near_first && far_alone && near_stronger);
    out
}

/// Empirical probabilities of the six events at fixed geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutcome {
    pub draws: u64,
    pub successes: [u64; DecodeOutcome::SLOTS],
}

impl OracleOutcome {
    pub fn probability(&self, scheme: RankingScheme, role: UserRole) -> f64 {
        self.successes[DecodeOutcome::slot(scheme, role)] as f64 / self.draws as f64
    }

    pub fn std_error(&self, scheme: RankingScheme, role: UserRole) -> f64 {
        binomial_std_error(self.probability(scheme, role), self.draws)
    }
}

/// Monte Carlo over `(h1, h2)` with deterministic interference `i_const`.
pub fn fading_oracle(
    pair: &OrderedDistancePair,
    alpha: f64,
    t: SirThreshold,
    i_const: f64,
    draws: u64,
    seed: u64,
) -> Result<OracleOutcome> {
    if draws == 0 {
        return Err(invalid("draws", "must be >= 1"));
    }
    if !(i_const >= 0.0) || !i_const.is_finite() {
        return Err(invalid("i_const", format!("must be >= 0, got {i_const}")));
    }
    if !(alpha > 2.0) {
        return Err(invalid("alpha", format!("must be > 2, got {alpha}")));
    }
    let g1 = pair.r1().powf(-alpha);
    let g2 = pair.r2().powf(-alpha);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut successes = [0u64; DecodeOutcome::SLOTS];
    for _ in 0..draws {
        let h1: f64 = Exp1.sample(&mut rng);
        let h2: f64 = Exp1.sample(&mut rng);
        let bits = decode_events(h1 * g1, h2 * g2, i_const, t.linear()).bits();
        for (k, c) in successes.iter_mut().enumerate() {
            *c += u64::from((bits >> k) & 1);
        }
    }
    Ok(OracleOutcome { draws, successes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_interference_isp_always_decodes_below_one() {
        for &(s1, s2) in &[(1.0, 0.3), (0.2, 5.0), (2.0, 1.999)] {
            let o = decode_events(s1, s2, 0.0, 0.9);
            assert!(o.get(RankingScheme::Isp, UserRole::Near));
            assert!(o.get(RankingScheme::Isp, UserRole::Far));
        }
    }

    #[test]
    fn msp_ad_inside_msp() {
        for &(s1, s2, i, t) in &[(1.0, 0.3, 0.1, 0.5), (0.2, 5.0, 0.0, 0.1), (3.0, 1.0, 0.5, 1.2)] {
            let o = decode_events(s1, s2, i, t);
            for role in UserRole::ALL {
                if o.get(RankingScheme::MspAd, role) {
                    assert!(o.get(RankingScheme::Msp, role));
                    assert!(o.get(RankingScheme::Isp, role));
                }
            }
        }
    }

    #[test]
    fn oracle_zero_interference_examples() {
        let pair = OrderedDistancePair::new(1.0, 1.0).unwrap();
        let t = SirThreshold::new(0.5).unwrap();
        let o = fading_oracle(&pair, 4.0, t, 0.0, 200_000, 11).unwrap();
        assert_eq!(o.probability(RankingScheme::Isp, UserRole::Near), 1.0);
        let p = o.probability(RankingScheme::MspAd, UserRole::Near);
        assert!((p - 0.5).abs() < 3.0 * o.std_error(RankingScheme::MspAd, UserRole::Near));
    }

    #[test]
    fn oracle_rejects_bad_inputs() {
        let pair = OrderedDistancePair::new(1.0, 1.0).unwrap();
        let t = SirThreshold::new(0.5).unwrap();
        assert!(fading_oracle(&pair, 4.0, t, 0.0, 0, 1).is_err());
        assert!(fading_oracle(&pair, 4.0, t, -1.0, 10, 1).is_err());
    }
}
