//! Reference distributions, robust scale estimators, and the parameter
//! estimation policies used to fit a reference distribution to data.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::numerics::{
    beta_inc, beta_quantile, beta_quantile_upper, gamma_inc, gamma_quantile, ln_gamma, norm_cdf,
    norm_quantile, norm_sf, BetaParams,
};

/// Normal-consistency constant of the median absolute deviation.
pub const MAD_CONSTANT: f64 = 1.4826;
const SN_CONSTANT: f64 = 1.1926;
const QN_CONSTANT: f64 = 2.2219;
const MLE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Uniform,
    Normal,
    ChiSquare,
    StudentT,
    Exponential,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Uniform,
        Family::Normal,
        Family::ChiSquare,
        Family::StudentT,
        Family::Exponential,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Uniform => "uniform",
            Family::Normal => "normal",
            Family::ChiSquare => "chi-square",
            Family::StudentT => "student-t",
            Family::Exponential => "exponential",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|f| f.name() == name)
    }
}

/// A fully specified reference distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceDistribution {
    Uniform,
    Normal { mu: f64, sigma: f64 },
    ChiSquare { df: f64 },
    StudentT { df: f64 },
    Exponential { rate: f64 },
}

impl ReferenceDistribution {
    pub fn standard_normal() -> Self {
        ReferenceDistribution::Normal {
            mu: 0.0,
            sigma: 1.0,
        }
    }

    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(domain("mu", mu));
        }
        positive("sigma", sigma)?;
        Ok(ReferenceDistribution::Normal { mu, sigma })
    }

    pub fn chi_square(df: f64) -> Result<Self> {
        positive("df", df)?;
        Ok(ReferenceDistribution::ChiSquare { df })
    }

    pub fn student_t(df: f64) -> Result<Self> {
        positive("df", df)?;
        Ok(ReferenceDistribution::StudentT { df })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        positive("rate", rate)?;
        Ok(ReferenceDistribution::Exponential { rate })
    }

    pub fn family(&self) -> Family {
        match self {
            ReferenceDistribution::Uniform => Family::Uniform,
            ReferenceDistribution::Normal { .. } => Family::Normal,
            ReferenceDistribution::ChiSquare { .. } => Family::ChiSquare,
            ReferenceDistribution::StudentT { .. } => Family::StudentT,
            ReferenceDistribution::Exponential { .. } => Family::Exponential,
        }
    }

    /// Parameters as `(name, value)` pairs, in a fixed order.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            ReferenceDistribution::Uniform => Vec::new(),
            ReferenceDistribution::Normal { mu, sigma } => {
                alloc::vec![("mu", mu), ("sigma", sigma)]
            }
            ReferenceDistribution::ChiSquare { df } | ReferenceDistribution::StudentT { df } => {
                alloc::vec![("df", df)]
            }
            ReferenceDistribution::Exponential { rate } => alloc::vec![("rate", rate)],
        }
    }

    /// Distribution function.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            ReferenceDistribution::Uniform => x.clamp(0.0, 1.0),
            ReferenceDistribution::Normal { mu, sigma } => norm_cdf((x - mu) / sigma),
            ReferenceDistribution::ChiSquare { df } => gamma_inc(0.5 * df, 0.5 * x).0,
            ReferenceDistribution::StudentT { df } => {
                let tail = t_tail(x, df);
                if x < 0.0 {
                    tail
                } else {
                    1.0 - tail
                }
            }
            ReferenceDistribution::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -libm::expm1(-rate * x)
                }
            }
        }
    }

    /// Upper tail `1 - cdf(x)`, without cancellation.
    pub fn sf(&self, x: f64) -> f64 {
        match *self {
            ReferenceDistribution::Uniform => 1.0 - x.clamp(0.0, 1.0),
            ReferenceDistribution::Normal { mu, sigma } => norm_sf((x - mu) / sigma),
            ReferenceDistribution::ChiSquare { df } => gamma_inc(0.5 * df, 0.5 * x).1,
            ReferenceDistribution::StudentT { df } => {
                let tail = t_tail(x, df);
                if x > 0.0 {
                    tail
                } else {
                    1.0 - tail
                }
            }
            ReferenceDistribution::Exponential { rate } => {
                if x <= 0.0 {
                    1.0
                } else {
                    libm::exp(-rate * x)
                }
            }
        }
    }

    /// Quantile function; `p = 0` and `p = 1` map to the support ends.
    pub fn quantile(&self, p: f64) -> f64 {
        match *self {
            ReferenceDistribution::Uniform => p.clamp(0.0, 1.0),
            ReferenceDistribution::Normal { mu, sigma } => mu + sigma * norm_quantile(p),
            ReferenceDistribution::ChiSquare { df } => {
                2.0 * gamma_quantile(p.clamp(0.0, 1.0), 0.5 * df).unwrap_or(f64::NAN)
            }
            ReferenceDistribution::StudentT { df } => t_quantile(p, df),
            ReferenceDistribution::Exponential { rate } => {
                if p >= 1.0 {
                    f64::INFINITY
                } else {
                    -libm::log1p(-p.max(0.0)) / rate
                }
            }
        }
    }

    /// Log density.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        match *self {
            ReferenceDistribution::Uniform => {
                if (0.0..=1.0).contains(&x) {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            ReferenceDistribution::Normal { mu, sigma } => {
                let z = (x - mu) / sigma;
                -0.5 * z * z - libm::log(sigma) - 0.5 * crate::numerics::LN_2PI
            }
            ReferenceDistribution::ChiSquare { df } => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let k = 0.5 * df;
                (k - 1.0) * libm::log(x) - 0.5 * x - k * core::f64::consts::LN_2 - ln_gamma(k)
            }
            ReferenceDistribution::StudentT { df } => {
                ln_gamma(0.5 * (df + 1.0))
                    - ln_gamma(0.5 * df)
                    - 0.5 * libm::log(df * core::f64::consts::PI)
                    - 0.5 * (df + 1.0) * libm::log1p(x * x / df)
            }
            ReferenceDistribution::Exponential { rate } => {
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    libm::log(rate) - rate * x
                }
            }
        }
    }

    /// Whether the fitted line through a Q-Q plot is the identity after
    /// standardizing by location and scale.
    pub fn location_scale(&self) -> Option<(f64, f64)> {
        match *self {
            ReferenceDistribution::Normal { mu, sigma } => Some((mu, sigma)),
            _ => None,
        }
    }
}

fn positive(what: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(domain(what, v))
    }
}

/// `P(T <= -|x|)` for Student's t with `df` degrees of freedom.
fn t_tail(x: f64, df: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let t2 = x * x;
    if t2 < df {
        // |T| small: use the Beta(1/2, df/2) law of T^2 / (df + T^2)
        let y = t2 / (df + t2);
        0.5 * beta_inc(y, 0.5, 0.5 * df).1
    } else {
        let w = df / (df + t2);
        0.5 * beta_inc(w, 0.5 * df, 0.5).0
    }
}

fn t_quantile(p: f64, df: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p == 0.5 {
        return 0.0;
    }
    let (tail, sign) = if p < 0.5 { (p, -1.0) } else { (1.0 - p, 1.0) };
    // two-sided tail probability 2 * tail
    let two = 2.0 * tail;
    let t2 = if two < 0.5 {
        let w = beta_quantile(two, BetaParams::new(0.5 * df, 0.5).expect("df > 0"))
            .expect("level in range");
        df * (1.0 - w) / w
    } else {
        let y = beta_quantile_upper(two, BetaParams::new(0.5, 0.5 * df).expect("df > 0"))
            .expect("level in range");
        df * y / (1.0 - y)
    };
    sign * libm::sqrt(t2)
}

/// How reference parameters are obtained from data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimationMethod {
    /// Use the parameters of the supplied distribution as given.
    Known,
    MeanSd,
    MedianMad,
    MedianQn,
    MedianSn,
    Mle,
}

impl EstimationMethod {
    pub const ALL: [EstimationMethod; 6] = [
        EstimationMethod::Known,
        EstimationMethod::MeanSd,
        EstimationMethod::MedianMad,
        EstimationMethod::MedianQn,
        EstimationMethod::MedianSn,
        EstimationMethod::Mle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimationMethod::Known => "known",
            EstimationMethod::MeanSd => "mean-sd",
            EstimationMethod::MedianMad => "median-mad",
            EstimationMethod::MedianQn => "median-qn",
            EstimationMethod::MedianSn => "median-sn",
            EstimationMethod::Mle => "mle",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|m| m.name() == name)
    }
}

fn sorted(data: &[f64]) -> Result<Vec<f64>> {
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::Degenerate("sample contains non-finite values"));
    }
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn median(data: &[f64]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Degenerate("empty sample"));
    }
    Ok(median_sorted(&sorted(data)?))
}

fn need_two(data: &[f64]) -> Result<()> {
    if data.len() < 2 {
        return Err(Error::Degenerate("fewer than two observations"));
    }
    Ok(())
}

fn nonzero_scale(s: f64) -> Result<f64> {
    if s > 0.0 && s.is_finite() {
        Ok(s)
    } else {
        Err(Error::Degenerate("scale estimate is zero"))
    }
}

/// Median absolute deviation scaled by [`MAD_CONSTANT`].
pub fn mad(data: &[f64]) -> Result<f64> {
    need_two(data)?;
    let v = sorted(data)?;
    let med = median_sorted(&v);
    let mut dev: Vec<f64> = v.iter().map(|x| libm::fabs(x - med)).collect();
    dev.sort_by(f64::total_cmp);
    nonzero_scale(MAD_CONSTANT * median_sorted(&dev))
}

/// `k`-th smallest (1-based) of the union of two ascending sequences given
/// by accessors.
fn kth_of_two(
    k: usize,
    na: usize,
    a: impl Fn(usize) -> f64,
    nb: usize,
    b: impl Fn(usize) -> f64,
) -> f64 {
    debug_assert!(k >= 1 && k <= na + nb);
    // number of elements taken from `a` lies in [lo, hi]
    let (mut lo, mut hi) = (k.saturating_sub(nb), k.min(na));
    while lo < hi {
        let i = (lo + hi) / 2;
        let j = k - i;
        // too few taken from a if a[i] < b[j - 1]
        if j > 0 && i < na && a(i) < b(j - 1) {
            lo = i + 1;
        } else {
            hi = i;
        }
    }
    let i = lo;
    let j = k - i;
    let from_a = if i > 0 { a(i - 1) } else { f64::NEG_INFINITY };
    let from_b = if j > 0 { b(j - 1) } else { f64::NEG_INFINITY };
    from_a.max(from_b)
}

fn sn_correction(n: usize) -> f64 {
    const SMALL: [f64; 8] = [0.743, 1.851, 0.954, 1.351, 0.993, 1.198, 1.005, 1.131];
    match n {
        2..=9 => SMALL[n - 2],
        _ if n % 2 == 1 => n as f64 / (n as f64 - 0.9),
        _ => 1.0,
    }
}

fn qn_correction(n: usize) -> f64 {
    const SMALL: [f64; 8] = [0.399, 0.994, 0.512, 0.844, 0.611, 0.857, 0.669, 0.872];
    match n {
        2..=9 => SMALL[n - 2],
        _ if n % 2 == 1 => n as f64 / (n as f64 + 1.4),
        _ => n as f64 / (n as f64 + 3.8),
    }
}

/// Rousseeuw-Croux `S_n`: `c * lomed_i himed_j |x_i - x_j|`, with `j`
/// ranging over all observations. Runs in `O(n log n)`.
pub fn robust_scale_sn(data: &[f64]) -> Result<f64> {
    need_two(data)?;
    let x = sorted(data)?;
    let n = x.len();
    let k_hi = n / 2 + 1;
    let mut inner = Vec::with_capacity(n);
    for i in 0..n {
        // distances to the left and right, each ascending; the zero distance
        // to itself is the smallest of all
        let left = |t: usize| x[i] - x[i - 1 - t];
        let right = |t: usize| x[i + 1 + t] - x[i];
        inner.push(kth_of_two(k_hi - 1, i, left, n - 1 - i, right));
    }
    inner.sort_by(f64::total_cmp);
    let lomed = inner[(n + 1) / 2 - 1];
    nonzero_scale(SN_CONSTANT * sn_correction(n) * lomed)
}

/// Rousseeuw-Croux `Q_n`: `d * k`-th smallest pairwise distance with
/// `k = C(h, 2)`, `h = floor(n/2) + 1`.
pub fn robust_scale_qn(data: &[f64]) -> Result<f64> {
    need_two(data)?;
    let x = sorted(data)?;
    let n = x.len();
    let h = n / 2 + 1;
    let k = (h * (h - 1) / 2) as u64;
    // pairs (i < j) with x_j - x_i <= d
    let count = |d: f64| -> u64 {
        let mut c = 0u64;
        let mut i = 0usize;
        for j in 0..n {
            while x[j] - x[i] > d {
                i += 1;
            }
            c += (j - i) as u64;
        }
        c
    };
    // smallest nonnegative double with count >= k, searched over bit patterns
    let (mut lo, mut hi) = (0u64, (x[n - 1] - x[0]).to_bits());
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if count(f64::from_bits(mid)) >= k {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    nonzero_scale(QN_CONSTANT * qn_correction(n) * f64::from_bits(lo))
}

/// Sample mean and standard deviation with divisor `n - 1`.
pub fn mean_sd(data: &[f64]) -> Result<(f64, f64)> {
    need_two(data)?;
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let ss: f64 = data.iter().map(|x| (x - mean) * (x - mean)).sum();
    Ok((mean, nonzero_scale(libm::sqrt(ss / (n - 1.0)))?))
}

/// Normal location and scale under the given method.
pub fn estimate_normal(data: &[f64], method: EstimationMethod) -> Result<(f64, f64)> {
    need_two(data)?;
    match method {
        EstimationMethod::MeanSd => mean_sd(data),
        EstimationMethod::MedianMad => Ok((median(data)?, mad(data)?)),
        EstimationMethod::MedianQn => Ok((median(data)?, robust_scale_qn(data)?)),
        EstimationMethod::MedianSn => Ok((median(data)?, robust_scale_sn(data)?)),
        EstimationMethod::Mle => {
            let (mean, sd) = mean_sd(data)?;
            let n = data.len() as f64;
            Ok((mean, sd * libm::sqrt((n - 1.0) / n)))
        }
        EstimationMethod::Known => Err(Error::Config(
            "known parameters are not estimated".to_string(),
        )),
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> Result<f64> {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..400 {
        if b - a <= MLE_TOL * (1.0 + libm::fabs(c)) {
            return Ok(0.5 * (a + b));
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    Err(Error::NonConvergence("golden-section search"))
}

/// Maximum likelihood fit of a non-uniform family.
pub fn mle_fit(data: &[f64], family: Family) -> Result<ReferenceDistribution> {
    need_two(data)?;
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::Degenerate("sample contains non-finite values"));
    }
    let n = data.len() as f64;
    match family {
        Family::Uniform => Err(Error::Unsupported(
            "the uniform reference has no parameters to fit".to_string(),
        )),
        Family::Normal => {
            let (mu, sigma) = estimate_normal(data, EstimationMethod::Mle)?;
            ReferenceDistribution::normal(mu, sigma)
        }
        Family::Exponential => {
            if data.iter().any(|&x| x < 0.0) {
                return Err(domain(
                    "exponential observation",
                    data.iter().copied().fold(0.0, f64::min),
                ));
            }
            let mean = data.iter().sum::<f64>() / n;
            ReferenceDistribution::exponential(1.0 / nonzero_scale(mean)?)
        }
        Family::ChiSquare => {
            if let Some(&bad) = data.iter().find(|&&x| x <= 0.0) {
                return Err(domain("chi-square observation", bad));
            }
            let sum_log: f64 = data.iter().map(|&x| libm::log(x)).sum();
            let sum: f64 = data.iter().sum();
            let loglik = |df: f64| {
                let k = 0.5 * df;
                (k - 1.0) * sum_log - 0.5 * sum - n * (k * core::f64::consts::LN_2 + ln_gamma(k))
            };
            let upper = (10.0 * sum / n).max(10.0);
            ReferenceDistribution::chi_square(golden_max(loglik, 1e-6, upper)?)
        }
        Family::StudentT => {
            let loglik = |df: f64| {
                let dist = ReferenceDistribution::StudentT { df };
                data.iter().map(|&x| dist.ln_pdf(x)).sum::<f64>()
            };
            ReferenceDistribution::student_t(golden_max(loglik, 1e-3, 1e4)?)
        }
    }
}

/// Fits the reference distribution to data under `method`. `Known` returns
/// `dist` unchanged; the robust and moment methods apply to the normal
/// family only.
pub fn fit(
    dist: &ReferenceDistribution,
    data: &[f64],
    method: EstimationMethod,
) -> Result<ReferenceDistribution> {
    match (method, dist.family()) {
        (EstimationMethod::Known, _) => Ok(*dist),
        (_, Family::Uniform) => Ok(ReferenceDistribution::Uniform),
        (EstimationMethod::Mle, family) => mle_fit(data, family),
        (m, Family::Normal) => {
            let (mu, sigma) = estimate_normal(data, m)?;
            ReferenceDistribution::normal(mu, sigma)
        }
        (m, family) => Err(Error::Unsupported(alloc::format!(
            "estimation method {} applies to the normal family only, not {}",
            m.name(),
            family.name()
        ))),
    }
}
