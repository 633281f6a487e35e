//! Testing bands for Q-Q and P-P plots in probability and data scale.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::distributions::{fit, EstimationMethod, ReferenceDistribution};
use crate::ell_one_sided::bounds_from_eta_one_sided;
use crate::ell_two_sided::{
    bounds_from_eta_two_sided, order_statistic_quantiles, FAST_QUANTILE_MIN_N,
};
use crate::error::{domain, Error, Result};
use crate::level_solver::{
    resolve_eta_with, EtaPath, EtaTable, LocalLevelQuery, Policy, ResolveOptions, Side,
};
use crate::numerics::{beta_quantile, beta_quantile_large, kolmogorov_critical, BetaParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Ell,
    Ks,
    Pointwise,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Ell => "ell",
            Method::Ks => "ks",
            Method::Pointwise => "pointwise",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Method::Ell, Method::Ks, Method::Pointwise]
            .into_iter()
            .find(|m| m.name() == name)
    }
}

/// Plotting positions of the expected line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExpectedMode {
    /// `(i - a) / (n + 1 - 2a)`, `a = 3/8` for `n <= 10` and `1/2` otherwise.
    MeanBlom,
    /// `i / (n + 1)`, the means of uniform order statistics.
    MeanUniform,
    /// Medians of `Beta(i, n + 1 - i)`.
    Median,
}

impl ExpectedMode {
    pub fn name(self) -> &'static str {
        match self {
            ExpectedMode::MeanBlom => "mean-blom",
            ExpectedMode::MeanUniform => "mean-uniform",
            ExpectedMode::Median => "median",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            ExpectedMode::MeanBlom,
            ExpectedMode::MeanUniform,
            ExpectedMode::Median,
        ]
        .into_iter()
        .find(|m| m.name() == name)
    }
}

/// Expected probability-scale points for `n` order statistics.
pub fn expected_points(n: usize, mode: ExpectedMode) -> Vec<f64> {
    let nf = n as f64;
    match mode {
        ExpectedMode::MeanUniform => (1..=n).map(|i| i as f64 / (nf + 1.0)).collect(),
        ExpectedMode::MeanBlom => {
            let a = if n <= 10 { 0.375 } else { 0.5 };
            (1..=n)
                .map(|i| (i as f64 - a) / (nf + 1.0 - 2.0 * a))
                .collect()
        }
        ExpectedMode::Median => {
            // the medians are symmetric about 1/2; solve the lower half only
            let half = n.div_ceil(2);
            let mut out = Vec::with_capacity(n);
            for i in 1..=half {
                let params = BetaParams::order_statistic(i, n);
                let m = if n + 1 == 2 * i {
                    0.5
                } else if n > FAST_QUANTILE_MIN_N {
                    beta_quantile_large(0.5, params).expect("valid level")
                } else {
                    beta_quantile(0.5, params).expect("valid level")
                };
                out.push(m);
            }
            for i in half + 1..=n {
                out.push(1.0 - out[n - i]);
            }
            out
        }
    }
}

/// Options controlling band construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandOptions {
    pub alpha: f64,
    pub method: Method,
    pub side: Side,
    pub estimation: EstimationMethod,
    pub expected: ExpectedMode,
    pub policy: Policy,
    pub resolve: ResolveOptions,
}

impl Default for BandOptions {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            method: Method::Ell,
            side: Side::TwoSided,
            estimation: EstimationMethod::MedianSn,
            expected: ExpectedMode::Median,
            policy: Policy::Auto,
            resolve: ResolveOptions::default(),
        }
    }
}

/// A complete testing band.
#[derive(Debug, Clone, PartialEq)]
pub struct TestingBand {
    pub n: usize,
    pub alpha: f64,
    pub method: Method,
    pub side: Side,
    /// Local level, for ELL bands.
    pub eta: Option<f64>,
    /// How `eta` was obtained, for ELL bands.
    pub path: Option<EtaPath>,
    pub prob_lower: Vec<f64>,
    pub prob_upper: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub expected_prob: Vec<f64>,
    pub expected: Vec<f64>,
    pub distribution: ReferenceDistribution,
    pub estimation: EstimationMethod,
    /// Set when the band was built for an effective number of tests rather
    /// than the sample size, so its ranks are decoupled from the data.
    pub effective_n: bool,
}

/// Probability-scale band and local level.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityBand {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub eta: Option<f64>,
    pub path: Option<EtaPath>,
}

/// Builds the probability-scale band for `n` order statistics.
pub fn probability_band(
    n: usize,
    options: &BandOptions,
    tables: &[EtaTable],
) -> Result<ProbabilityBand> {
    let alpha = options.alpha;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain("alpha", alpha));
    }
    if n == 0 {
        return Err(Error::Config("n must be at least 1".to_string()));
    }
    let two = options.side == Side::TwoSided;
    match options.method {
        Method::Ell => {
            let query = LocalLevelQuery::new(n, alpha, options.side).with_policy(options.policy);
            let resolved = resolve_eta_with(&query, tables, &options.resolve)?;
            let (lower, upper) = if two {
                let b = bounds_from_eta_two_sided(n, resolved.eta)?;
                (b.h, b.g)
            } else {
                (
                    bounds_from_eta_one_sided(n, resolved.eta)?.h,
                    alloc::vec![1.0; n],
                )
            };
            Ok(ProbabilityBand {
                lower,
                upper,
                eta: Some(resolved.eta),
                path: Some(resolved.path),
            })
        }
        Method::Ks => {
            let nf = n as f64;
            let (lower, upper) = if two {
                let d = kolmogorov_critical(alpha, n)?;
                (
                    (1..=n)
                        .map(|i| (i as f64 / nf - d).clamp(0.0, 1.0))
                        .collect(),
                    (1..=n)
                        .map(|i| ((i - 1) as f64 / nf + d).clamp(0.0, 1.0))
                        .collect(),
                )
            } else {
                let d = libm::sqrt(-libm::log(alpha) / (2.0 * nf));
                (
                    (1..=n)
                        .map(|i| (i as f64 / nf - d).clamp(0.0, 1.0))
                        .collect(),
                    alloc::vec![1.0; n],
                )
            };
            Ok(ProbabilityBand {
                lower,
                upper,
                eta: None,
                path: None,
            })
        }
        Method::Pointwise => {
            let (lower, upper) = if two {
                let lower = order_statistic_quantiles(n, alpha / 2.0);
                let upper = lower.iter().rev().map(|&x| 1.0 - x).collect();
                (lower, upper)
            } else {
                (order_statistic_quantiles(n, alpha), alloc::vec![1.0; n])
            };
            Ok(ProbabilityBand {
                lower,
                upper,
                eta: None,
                path: None,
            })
        }
    }
}

/// Testing band for a Q-Q plot of `n` observations against `dist`.
///
/// With `data`, `n` is taken from the sample and the distribution is fitted
/// by `options.estimation`; without it the distribution is used as given.
pub fn get_qq_band(
    n: usize,
    data: Option<&[f64]>,
    dist: &ReferenceDistribution,
    options: &BandOptions,
    tables: &[EtaTable],
) -> Result<TestingBand> {
    let (n, fitted) = match data {
        Some(x) => {
            if x.is_empty() {
                return Err(Error::Degenerate("empty sample"));
            }
            (x.len(), fit(dist, x, options.estimation)?)
        }
        None => (n, *dist),
    };
    let estimation = if data.is_some() {
        options.estimation
    } else {
        EstimationMethod::Known
    };
    build(n, fitted, estimation, options, tables, false)
}

/// Band for an effective number of independent tests `neff`, for use when
/// the plotted statistics are correlated.
pub fn band_effective_n(
    neff: usize,
    dist: &ReferenceDistribution,
    options: &BandOptions,
    tables: &[EtaTable],
) -> Result<TestingBand> {
    build(neff, *dist, EstimationMethod::Known, options, tables, true)
}

fn build(
    n: usize,
    distribution: ReferenceDistribution,
    estimation: EstimationMethod,
    options: &BandOptions,
    tables: &[EtaTable],
    effective_n: bool,
) -> Result<TestingBand> {
    let pb = probability_band(n, options, tables)?;
    let lower = pb.lower.iter().map(|&p| distribution.quantile(p)).collect();
    let upper = pb.upper.iter().map(|&p| distribution.quantile(p)).collect();
    let expected_prob = expected_points(n, options.expected);
    let expected = expected_prob
        .iter()
        .map(|&p| distribution.quantile(p))
        .collect();
    Ok(TestingBand {
        n,
        alpha: options.alpha,
        method: options.method,
        side: options.side,
        eta: pb.eta,
        path: pb.path,
        prob_lower: pb.lower,
        prob_upper: pb.upper,
        lower,
        upper,
        expected_prob,
        expected,
        distribution,
        estimation,
        effective_n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Low,
    High,
}

/// Outcome of checking a sample against a band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Inside,
    /// The first order statistic (1-based rank) outside its interval.
    Exited {
        index: usize,
        direction: Direction,
    },
}

impl Verdict {
    pub fn exited(&self) -> bool {
        matches!(self, Verdict::Exited { .. })
    }
}

/// Checks sorted values against open intervals `(lower_i, upper_i)`.
pub fn check_sorted(sorted: &[f64], lower: &[f64], upper: &[f64]) -> Verdict {
    for (i, ((&x, &lo), &hi)) in sorted.iter().zip(lower).zip(upper).enumerate() {
        if !(x > lo) {
            return Verdict::Exited {
                index: i + 1,
                direction: Direction::Low,
            };
        }
        if !(x < hi) {
            return Verdict::Exited {
                index: i + 1,
                direction: Direction::High,
            };
        }
    }
    Verdict::Inside
}

/// Sorts the observations and reports the first exit from the band, if any.
/// A value equal to an endpoint counts as an exit.
pub fn band_check(observations: &[f64], band: &TestingBand) -> Result<Verdict> {
    if observations.len() != band.n {
        return Err(Error::LengthMismatch {
            expected: band.n,
            got: observations.len(),
        });
    }
    let mut x = observations.to_vec();
    x.sort_by(f64::total_cmp);
    Ok(check_sorted(&x, &band.lower, &band.upper))
}
