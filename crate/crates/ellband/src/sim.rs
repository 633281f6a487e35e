//! Monte Carlo studies: null exit rates, ELL vs KS power, and p-values from
//! 2x2 independence tests.
//!
//! Replicate `r` of a study seeded with `s` draws from ChaCha8 stream `r`
//! under key `s`, so results do not depend on how replicates are spread over
//! worker threads.

use std::collections::BTreeMap;

use ellband_core::band::{check_sorted, probability_band, BandOptions, Method};
use ellband_core::distributions::{
    estimate_normal, fit, EstimationMethod, Family, ReferenceDistribution,
};
use ellband_core::level_solver::{EtaTable, Side};
use ellband_core::numerics::{beta_cdf, gamma_inc, BetaParams};
use ellband_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, Exp, Normal, StudentT};
use serde::Serialize;

use crate::error::CliError;

/// Generator for replicate `replicate` of a study seeded with `seed`.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Sums per-replicate counters over `replicates`, split across `workers`
/// threads. Addition is exact on integers, so the total is independent of
/// the split.
pub fn tally<const K: usize, F>(replicates: u64, workers: usize, f: F) -> [u64; K]
where
    F: Fn(u64) -> [u64; K] + Sync,
{
    let workers = workers.max(1).min(replicates.max(1) as usize) as u64;
    let add = |mut acc: [u64; K], x: [u64; K]| {
        for (a, b) in acc.iter_mut().zip(x) {
            *a += b;
        }
        acc
    };
    if workers == 1 {
        return (0..replicates).map(&f).fold([0; K], add);
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let f = &f;
                scope.spawn(move || {
                    (w..replicates)
                        .step_by(workers as usize)
                        .map(f)
                        .fold([0; K], add)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .fold([0; K], add)
    })
}

/// Draws `n` values from `dist`.
pub fn sample<R: Rng>(dist: &ReferenceDistribution, n: usize, rng: &mut R) -> Vec<f64> {
    match *dist {
        ReferenceDistribution::Uniform => (0..n).map(|_| rng.random::<f64>()).collect(),
        ReferenceDistribution::Normal { mu, sigma } => {
            let d = Normal::new(mu, sigma).expect("validated normal");
            d.sample_iter(rng).take(n).collect()
        }
        ReferenceDistribution::ChiSquare { df } => {
            let d = ChiSquared::new(df).expect("validated chi-square");
            d.sample_iter(rng).take(n).collect()
        }
        ReferenceDistribution::StudentT { df } => {
            let d = StudentT::new(df).expect("validated t");
            d.sample_iter(rng).take(n).collect()
        }
        ReferenceDistribution::Exponential { rate } => {
            let d = Exp::new(rate).expect("validated exponential");
            d.sample_iter(rng).take(n).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub scenario: String,
    pub replicates: u64,
    pub rejections: u64,
    pub rejection_rate: f64,
    pub standard_error: f64,
    /// Replicates whose parameter estimate failed; counted as non-rejections.
    pub degenerate: u64,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
}

impl SimReport {
    fn new(
        scenario: &str,
        replicates: u64,
        rejections: u64,
        degenerate: u64,
        seed: u64,
        config: BTreeMap<String, String>,
    ) -> Self {
        let r = rejections as f64 / replicates as f64;
        Self {
            scenario: scenario.to_string(),
            replicates,
            rejections,
            rejection_rate: r,
            standard_error: binomial_se(r, replicates),
            degenerate,
            seed,
            config,
        }
    }
}

pub fn binomial_se(rate: f64, replicates: u64) -> f64 {
    (rate * (1.0 - rate) / replicates as f64).sqrt()
}

fn config_error(msg: &str) -> CliError {
    CliError::Core(Error::Config(msg.to_string()))
}

fn echo(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

/// Band test applied to each simulated sample.
enum Checker {
    /// Data-scale band of a fully specified null.
    Known { lower: Vec<f64>, upper: Vec<f64> },
    /// Standard-normal band applied to standardized data.
    NormalZ {
        lower: Vec<f64>,
        upper: Vec<f64>,
        estimation: EstimationMethod,
    },
    /// Fitted family; endpoints recomputed per sample.
    Fitted {
        dist: ReferenceDistribution,
        estimation: EstimationMethod,
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
}

/// Result of checking one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Inside,
    Rejected,
    Degenerate,
}

impl Checker {
    fn new(
        dist: &ReferenceDistribution,
        estimation: EstimationMethod,
        prob_lower: Vec<f64>,
        prob_upper: Vec<f64>,
    ) -> Self {
        if estimation == EstimationMethod::Known {
            let lower = prob_lower.iter().map(|&p| dist.quantile(p)).collect();
            let upper = prob_upper.iter().map(|&p| dist.quantile(p)).collect();
            Checker::Known { lower, upper }
        } else if dist.family() == Family::Normal && estimation != EstimationMethod::Mle {
            let z = ReferenceDistribution::standard_normal();
            let lower = prob_lower.iter().map(|&p| z.quantile(p)).collect();
            let upper = prob_upper.iter().map(|&p| z.quantile(p)).collect();
            Checker::NormalZ {
                lower,
                upper,
                estimation,
            }
        } else {
            Checker::Fitted {
                dist: *dist,
                estimation,
                lower: prob_lower,
                upper: prob_upper,
            }
        }
    }

    fn check(&self, mut x: Vec<f64>) -> Outcome {
        let verdict = match self {
            Checker::Known { lower, upper } => {
                x.sort_by(f64::total_cmp);
                check_sorted(&x, lower, upper)
            }
            Checker::NormalZ {
                lower,
                upper,
                estimation,
            } => {
                let Ok((mu, sigma)) = estimate_normal(&x, *estimation) else {
                    return Outcome::Degenerate;
                };
                let mut z: Vec<f64> = x.iter().map(|v| (v - mu) / sigma).collect();
                z.sort_by(f64::total_cmp);
                check_sorted(&z, lower, upper)
            }
            Checker::Fitted {
                dist,
                estimation,
                lower,
                upper,
            } => {
                let Ok(fitted) = fit(dist, &x, *estimation) else {
                    return Outcome::Degenerate;
                };
                let lo: Vec<f64> = lower.iter().map(|&p| fitted.quantile(p)).collect();
                let hi: Vec<f64> = upper.iter().map(|&p| fitted.quantile(p)).collect();
                x.sort_by(f64::total_cmp);
                check_sorted(&x, &lo, &hi)
            }
        };
        if verdict.exited() {
            Outcome::Rejected
        } else {
            Outcome::Inside
        }
    }
}

/// Null-hypothesis exit-rate study.
#[derive(Debug, Clone, PartialEq)]
pub struct NullStudy {
    pub n: usize,
    pub dist: ReferenceDistribution,
    pub estimation: EstimationMethod,
    pub alpha: f64,
    pub method: Method,
    pub side: Side,
}

impl NullStudy {
    /// Normal data tested for normality with parameters from `estimation`.
    pub fn type1(n: usize, estimation: EstimationMethod, alpha: f64) -> Self {
        Self {
            n,
            dist: ReferenceDistribution::standard_normal(),
            estimation,
            alpha,
            method: Method::Ell,
            side: Side::TwoSided,
        }
    }
}

pub const MIN_NULL_REPLICATES: u64 = 100;

/// Rate at which samples drawn from the null exit its band.
pub fn null_study(
    study: &NullStudy,
    replicates: u64,
    seed: u64,
    workers: usize,
    tables: &[EtaTable],
) -> Result<SimReport, CliError> {
    if replicates < MIN_NULL_REPLICATES {
        return Err(config_error("null studies need at least 100 replicates"));
    }
    let options = BandOptions {
        alpha: study.alpha,
        method: study.method,
        side: study.side,
        estimation: study.estimation,
        ..BandOptions::default()
    };
    let pb = probability_band(study.n, &options, tables)?;
    let checker = Checker::new(&study.dist, study.estimation, pb.lower, pb.upper);
    let [rej, degenerate] = tally(replicates, workers, |r| {
        let mut rng = replicate_rng(seed, r);
        match checker.check(sample(&study.dist, study.n, &mut rng)) {
            Outcome::Rejected => [1, 0],
            Outcome::Inside => [0, 0],
            Outcome::Degenerate => [0, 1],
        }
    });
    let mut config = echo(&[
        ("n", study.n.to_string()),
        ("alpha", study.alpha.to_string()),
        ("method", study.method.name().to_string()),
        ("side", study.side.as_str().to_string()),
        ("family", study.dist.family().name().to_string()),
        ("estimation", study.estimation.name().to_string()),
    ]);
    if let Some(eta) = pb.eta {
        config.insert("eta".to_string(), eta.to_string());
    }
    Ok(SimReport::new(
        "null", replicates, rej, degenerate, seed, config,
    ))
}

/// Type 1 error of the normality test under `estimation`.
pub fn type1_study(
    n: usize,
    estimation: EstimationMethod,
    alpha: f64,
    replicates: u64,
    seed: u64,
    workers: usize,
    tables: &[EtaTable],
) -> Result<SimReport, CliError> {
    let mut report = null_study(
        &NullStudy::type1(n, estimation, alpha),
        replicates,
        seed,
        workers,
        tables,
    )?;
    report.scenario = "type1".to_string();
    Ok(report)
}

/// Paired rejection counts of the ELL and KS normality tests on the same samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerReport {
    pub ell: SimReport,
    pub ks: SimReport,
    /// Samples rejected by ELL only.
    pub ell_only: u64,
    /// Samples rejected by KS only.
    pub ks_only: u64,
    /// Exact one-sided McNemar p-value for ELL power exceeding KS power.
    pub p_value: f64,
}

/// `P(Bin(m, 1/2) >= k)`.
pub fn binomial_upper_tail_half(k: u64, m: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > m {
        return 0.0;
    }
    let params = BetaParams::new(k as f64, (m - k + 1) as f64).expect("positive shapes");
    beta_cdf(0.5, params).expect("0.5 is in range")
}

/// Power of the ELL and KS two-sided normality tests against `t(df)` data,
/// or against normal data when `df` is `None`.
pub fn power_study(
    df: Option<f64>,
    n: usize,
    alpha: f64,
    estimation: EstimationMethod,
    replicates: u64,
    seed: u64,
    workers: usize,
    tables: &[EtaTable],
) -> Result<PowerReport, CliError> {
    if replicates == 0 {
        return Err(config_error("replicates must be positive"));
    }
    let alt = match df {
        Some(df) => ReferenceDistribution::student_t(df)?,
        None => ReferenceDistribution::standard_normal(),
    };
    let null = ReferenceDistribution::standard_normal();
    let base = BandOptions {
        alpha,
        estimation,
        ..BandOptions::default()
    };
    let ell_pb = probability_band(n, &base, tables)?;
    let ks_pb = probability_band(
        n,
        &BandOptions {
            method: Method::Ks,
            ..base
        },
        tables,
    )?;
    let ell = Checker::new(&null, estimation, ell_pb.lower, ell_pb.upper);
    let ks = Checker::new(&null, estimation, ks_pb.lower, ks_pb.upper);
    let [ell_rej, ks_rej, ell_only, ks_only, degenerate] = tally(replicates, workers, |r| {
        let mut rng = replicate_rng(seed, r);
        let x = sample(&alt, n, &mut rng);
        let a = ell.check(x.clone());
        let b = ks.check(x);
        if a == Outcome::Degenerate || b == Outcome::Degenerate {
            return [0, 0, 0, 0, 1];
        }
        let (a, b) = (a == Outcome::Rejected, b == Outcome::Rejected);
        [a as u64, b as u64, (a && !b) as u64, (b && !a) as u64, 0]
    });
    let config = echo(&[
        ("n", n.to_string()),
        ("alpha", alpha.to_string()),
        (
            "alternative",
            df.map_or("normal".to_string(), |d| format!("t({d})")),
        ),
        ("estimation", estimation.name().to_string()),
    ]);
    let with_method = |m: &str| {
        let mut c = config.clone();
        c.insert("method".to_string(), m.to_string());
        c
    };
    Ok(PowerReport {
        ell: SimReport::new(
            "power",
            replicates,
            ell_rej,
            degenerate,
            seed,
            with_method("ell"),
        ),
        ks: SimReport::new(
            "power",
            replicates,
            ks_rej,
            degenerate,
            seed,
            with_method("ks"),
        ),
        ell_only,
        ks_only,
        p_value: binomial_upper_tail_half(ell_only, ell_only + ks_only),
    })
}

/// Expected cell counts used by the 2x2 chi-square statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChisqExpected {
    /// Textbook Pearson test: expected counts from the observed margins.
    EstimatedMargins,
    /// Expected counts `s * q_ij` from the known cell probabilities.
    FixedNull,
}

impl ChisqExpected {
    pub fn name(self) -> &'static str {
        match self {
            ChisqExpected::EstimatedMargins => "margins",
            ChisqExpected::FixedNull => "fixed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChisqConfig {
    /// Observations per table.
    pub s: usize,
    /// Row-1 probability.
    pub a: f64,
    /// Column-1 probability.
    pub b: f64,
    pub tables: usize,
    pub expected: ChisqExpected,
}

impl ChisqConfig {
    pub fn new(s: usize, a: f64, b: f64, tables: usize) -> Self {
        Self {
            s,
            a,
            b,
            tables,
            expected: ChisqExpected::EstimatedMargins,
        }
    }
}

fn draw_table<R: Rng>(s: usize, cum: &[f64; 3], rng: &mut R) -> [u64; 4] {
    loop {
        let mut x = [0u64; 4];
        for _ in 0..s {
            let u: f64 = rng.random();
            let cell = cum.iter().position(|&c| u < c).unwrap_or(3);
            x[cell] += 1;
        }
        let rows = [x[0] + x[1], x[2] + x[3]];
        let cols = [x[0] + x[2], x[1] + x[3]];
        if rows.iter().chain(&cols).all(|&m| m > 0) {
            return x;
        }
    }
}

fn chisq_statistic(x: &[u64; 4], q: &[f64; 4], expected: ChisqExpected) -> f64 {
    let s = x.iter().sum::<u64>() as f64;
    let e: [f64; 4] = match expected {
        ChisqExpected::FixedNull => q.map(|p| s * p),
        ChisqExpected::EstimatedMargins => {
            let rows = [(x[0] + x[1]) as f64, (x[2] + x[3]) as f64];
            let cols = [(x[0] + x[2]) as f64, (x[1] + x[3]) as f64];
            [
                rows[0] * cols[0] / s,
                rows[0] * cols[1] / s,
                rows[1] * cols[0] / s,
                rows[1] * cols[1] / s,
            ]
        }
    };
    x.iter()
        .zip(e)
        .map(|(&o, e)| (o as f64 - e) * (o as f64 - e) / e)
        .sum()
}

/// P-values of 2x2 independence tests on tables drawn under independence
/// with margins `a` and `b`. Tables with an empty row or column are
/// discarded and redrawn. Each statistic is referred to chi-square with one
/// degree of freedom.
pub fn chisq_calibration_generate(config: &ChisqConfig, seed: u64) -> Result<Vec<f64>, CliError> {
    let ChisqConfig {
        s,
        a,
        b,
        tables,
        expected,
    } = *config;
    if s < 2 {
        return Err(config_error("tables need at least 2 observations"));
    }
    for (name, v) in [("a", a), ("b", b)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(CliError::Core(Error::Domain {
                what: name,
                value: v,
            }));
        }
    }
    let q = [a * b, a * (1.0 - b), (1.0 - a) * b, (1.0 - a) * (1.0 - b)];
    let cum = [q[0], q[0] + q[1], q[0] + q[1] + q[2]];
    Ok((0..tables as u64)
        .map(|t| {
            let mut rng = replicate_rng(seed, t);
            let x = draw_table(s, &cum, &mut rng);
            let stat = chisq_statistic(&x, &q, expected);
            gamma_inc(0.5, stat / 2.0).1
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tally_is_independent_of_workers() {
        let f = |r: u64| {
            let x: u32 = replicate_rng(7, r).random();
            [(x % 3) as u64, 1]
        };
        let one = tally(1000, 1, f);
        assert_eq!(one[1], 1000);
        for w in [2, 3, 8] {
            assert_eq!(tally(1000, w, f), one);
        }
    }

    #[test]
    fn streams_differ() {
        let a: u64 = replicate_rng(1, 0).random();
        let b: u64 = replicate_rng(1, 1).random();
        let c: u64 = replicate_rng(2, 0).random();
        assert!(a != b && a != c);
        assert_eq!(a, replicate_rng(1, 0).random::<u64>());
    }

    #[test]
    fn standard_error_formula() {
        let cfg = BTreeMap::new();
        let r = SimReport::new("x", 400, 20, 0, 0, cfg);
        assert_eq!(r.rejection_rate, 0.05);
        assert_eq!(r.standard_error, (0.05f64 * 0.95 / 400.0).sqrt());
    }

    #[test]
    fn binomial_tail() {
        assert_eq!(binomial_upper_tail_half(0, 5), 1.0);
        assert!((binomial_upper_tail_half(5, 5) - 1.0 / 32.0).abs() < 1e-15);
        assert!((binomial_upper_tail_half(4, 5) - 6.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn chisq_statistic_hand_computed() {
        let q = [0.25; 4];
        let x = [10, 0, 0, 10];
        assert!((chisq_statistic(&x, &q, ChisqExpected::EstimatedMargins) - 20.0).abs() < 1e-12);
        assert!((chisq_statistic(&x, &q, ChisqExpected::FixedNull) - 20.0).abs() < 1e-12);
        let x = [3, 2, 1, 4];
        // margins 5,5 / 4,6: E = 2, 3, 2, 3
        let t = 1.0 / 2.0 + 1.0 / 3.0 + 1.0 / 2.0 + 1.0 / 3.0;
        assert!((chisq_statistic(&x, &q, ChisqExpected::EstimatedMargins) - t).abs() < 1e-12);
    }

    #[test]
    fn chisq_guards_and_redraw() {
        assert!(chisq_calibration_generate(&ChisqConfig::new(1, 0.15, 0.4, 10), 0).is_err());
        assert!(chisq_calibration_generate(&ChisqConfig::new(20, 0.0, 0.4, 10), 0).is_err());
        let p = chisq_calibration_generate(&ChisqConfig::new(2, 0.5, 0.5, 200), 3).unwrap();
        assert_eq!(p.len(), 200);
        assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v) && v.is_finite()));
    }

    #[test]
    fn replicates_guard() {
        assert!(power_study(
            Some(3.0),
            20,
            0.05,
            EstimationMethod::MedianSn,
            0,
            1,
            1,
            &[]
        )
        .is_err());
        assert!(type1_study(20, EstimationMethod::Known, 0.05, 10, 1, 1, &[]).is_err());
    }
}
