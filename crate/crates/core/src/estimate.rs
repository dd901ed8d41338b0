/// Which engine produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    MonteCarlo,
    Analytic,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::MonteCarlo => "mc",
            Method::Analytic => "analytic",
        }
    }
}

/// z-score of the two-sided 95% normal interval.
pub const Z95: f64 = 1.96;

/// A coverage (or ordering) probability with its uncertainty.
///
/// For Monte Carlo `ci_halfwidth` is the 95% normal-approximation half
/// width; for analytic values it is the quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageEstimate {
    pub value: f64,
    pub ci_halfwidth: f64,
    pub trials: u64,
    pub method: Method,
    pub seed: Option<u64>,
}

impl CoverageEstimate {
    pub fn from_counts(successes: u64, trials: u64, seed: u64) -> Self {
        let p = if trials == 0 {
            0.0
        } else {
            successes as f64 / trials as f64
        };
        Self {
            value: p,
            ci_halfwidth: Z95 * binomial_std_error(p, trials),
            trials,
            method: Method::MonteCarlo,
            seed: Some(seed),
        }
    }

    pub fn analytic(value: f64, error: f64) -> Self {
        Self {
            value,
            ci_halfwidth: error,
            trials: 0,
            method: Method::Analytic,
            seed: None,
        }
    }

    /// Standard error of a Monte Carlo estimate (zero for analytic ones).
    pub fn std_error(&self) -> f64 {
        match self.method {
            Method::MonteCarlo => binomial_std_error(self.value, self.trials),
            Method::Analytic => 0.0,
        }
    }
}

/// `sqrt(p (1 - p) / n)`.
pub fn binomial_std_error(p: f64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    (p * (1.0 - p) / n as f64).max(0.0).sqrt()
}
