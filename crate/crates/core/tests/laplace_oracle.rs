//! PPP transform against an independent trapezoid rule with an analytic tail.

use noma_coverage::laplace::{laplace_mcp_exact, laplace_ppp_normalized};

/// Exponent `2 int_0^inf (1 - (1 + s x^-a)^-2)(1 - exp(-2.4 x^2)) x dx`:
/// trapezoid on (0, 50] plus the two leading tail terms beyond 50.
fn trapezoid_exponent(s: f64, alpha: f64) -> f64 {
    let cut = 50.0;
    let n = 1_000_000;
    let h = cut / n as f64;
    let f = |x: f64| {
        if x == 0.0 {
            return 0.0;
        }
        let u = s * x.powf(-alpha);
        (1.0 - (1.0 + u).powi(-2)) * (1.0 - (-2.4 * x * x).exp()) * x
    };
    let mut sum = 0.5 * (f(0.0) + f(cut));
    for k in 1..n {
        sum += f(k as f64 * h);
    }
    let tail = 2.0 * s * cut.powf(2.0 - alpha) / (alpha - 2.0)
        - 3.0 * s * s * cut.powf(2.0 - 2.0 * alpha) / (2.0 * alpha - 2.0);
    2.0 * (sum * h + tail)
}

#[test]
fn ppp_transform_matches_trapezoid_oracle() {
    for s in [0.01, 0.1, 1.0, 10.0, 100.0] {
        let oracle = (-trapezoid_exponent(s, 4.0)).exp();
        let got = laplace_ppp_normalized(s, 4.0, 1e-10).unwrap();
        assert!(
            ((got - oracle) / oracle).abs() < 1e-6,
            "s = {s}: {got} vs oracle {oracle}"
        );
    }
}

#[test]
fn transforms_are_log_convex() {
    let pts = [0.03, 0.3, 3.0, 30.0];
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        let ppp = |s: f64| laplace_ppp_normalized(s, 4.0, 1e-10).unwrap().ln();
        assert!(ppp(mid) <= 0.5 * (ppp(a) + ppp(b)) + 1e-12);
        let mcp = |s: f64| laplace_mcp_exact(s, 0.1, 4.0, 1e-7).unwrap().ln();
        assert!(mcp(mid) <= 0.5 * (mcp(a) + mcp(b)) + 1e-9);
    }
}
