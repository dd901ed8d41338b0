//! Statistical checks of the samplers and the simulator.

use std::f64::consts::PI;

use noma_coverage::sim::{
    default_window_radius, estimate_ordering_probability, sample_network, sample_typical_pair, simulate, SimConfig,
};
use noma_coverage::spatial::{distance_cdf, mean_ordering_probability, sample_distance};
use noma_coverage::{ModelConfig, SirThreshold};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn models() -> [ModelConfig; 2] {
    [ModelConfig::ppp(1e-3, 4.0).unwrap(), ModelConfig::mcp(1e-3, 10.0, 4.0).unwrap()]
}

fn grid() -> Vec<SirThreshold> {
    [-10.0, 0.0, 10.0].iter().map(|&d| SirThreshold::from_db(d).unwrap()).collect()
}

/// Two-sided Kolmogorov-Smirnov distance of a sample against a CDF.
fn ks_distance(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

#[test]
fn distance_sampler_matches_cdf() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for m in models() {
        let xs: Vec<f64> = (0..1_000_000)
            .map(|_| sample_distance(&m, rng.random_range(f64::EPSILON..1.0)).unwrap())
            .collect();
        let d = ks_distance(xs, |x| distance_cdf(&m, x).unwrap());
        assert!(d < 0.002, "{}: KS {d}", m.kind());
    }
}

#[test]
fn mcp_network_pair_follows_order_statistics() {
    let m = ModelConfig::mcp(1e-3, 10.0, 4.0).unwrap();
    let cfg = SimConfig::new(m, 200_000, 9, grid()).unwrap();
    let (mut near, mut far) = (Vec::new(), Vec::new());
    for i in 0..cfg.trials {
        let (pair, _) = sample_typical_pair(&cfg, i).unwrap();
        near.push(pair.r1());
        far.push(pair.r2());
    }
    let f = |x: f64| distance_cdf(&m, x).unwrap();
    let d_near = ks_distance(near, |x| 1.0 - (1.0 - f(x)).powi(2));
    let d_far = ks_distance(far, |x| f(x).powi(2));
    assert!(d_near < 0.005, "near KS {d_near}");
    assert!(d_far < 0.005, "far KS {d_far}");
}

#[test]
fn typical_pair_prefix_matches_full_network() {
    for m in models() {
        let cfg = SimConfig::new(m, 10, 3, grid()).unwrap();
        for i in 0..10 {
            let net = sample_network(&cfg, i).unwrap();
            let (pair, rejections) = sample_typical_pair(&cfg, i).unwrap();
            assert_eq!(pair, net.typical_pair);
            assert_eq!(rejections, net.typical_cell_rejections);
        }
    }
}

#[test]
fn interferer_count_matches_window_population() {
    let realizations = 300;
    for m in models() {
        let cfg = SimConfig::new(m, realizations, 21, grid()).unwrap();
        let counts: Vec<f64> = (0..realizations)
            .map(|i| sample_network(&cfg, i).unwrap().interferers.len() as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / counts.len() as f64;
        let expected = 2.0 * m.lambda_b * PI * cfg.window_radius.powi(2);
        // Other BSs are Poisson with this mean, each serving two users (PPP
        // cells almost always hold two at the default load).
        let se = (2.0 * expected / realizations as f64).sqrt();
        assert!(
            (mean - expected).abs() < 4.0 * se + 0.01 * expected,
            "{}: mean {mean} vs {expected}",
            m.kind()
        );
    }
}

#[test]
fn ppp_typical_cell_rarely_rejected() {
    let cfg = SimConfig::new(models()[0], 20_000, 4, grid()).unwrap();
    let rejected: u64 = (0..cfg.trials)
        .map(|i| u64::from(sample_typical_pair(&cfg, i).unwrap().1))
        .sum();
    let rate = rejected as f64 / (rejected + cfg.trials) as f64;
    assert!(rate < 0.01, "rejection rate {rate}");
}

#[test]
fn results_do_not_depend_on_thread_count() {
    for m in models() {
        let cfg = SimConfig::new(m, 3_000, 17, grid()).unwrap();
        let run = |n: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .unwrap()
                .install(|| simulate(&cfg).unwrap().counts)
        };
        assert_eq!(run(1), run(4), "{}", m.kind());
    }
}

#[test]
fn mcp_ordering_estimate_covers_exact_value() {
    let m = models()[1];
    let exact = mean_ordering_probability(&m, 1e-8).unwrap();
    assert!((exact - PI / 4.0).abs() < 1e-6);
    let cfg = SimConfig::new(m, 100_000, 8, grid()).unwrap();
    let est = estimate_ordering_probability(&cfg).unwrap();
    assert!(
        (est.value - exact).abs() <= 3.0 * est.std_error(),
        "{} vs {exact} (se {})",
        est.value,
        est.std_error()
    );
    assert!(cfg.window_radius >= default_window_radius(m.lambda_b));
}
