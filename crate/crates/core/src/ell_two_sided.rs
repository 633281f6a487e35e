//! Two-sided equal-local-level bounds and their exact global level.
//!
//! The global level of a band `h_i < X_(i) <= g_i` is computed by a forward
//! recursion over the bins formed by the merged, sorted endpoints. Row `k`
//! holds `c_j = P(exactly j points in [0, b_k] and no exit so far)` for the
//! admissible counts `l_k <= j <= u_k`. ELL bands are symmetric under
//! `x -> 1 - x`, which lets the recursion stop at the middle and combine two
//! half rows.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::numerics::{
    beta_quantile, beta_quantile_large_z, ln_dbinom_raw, norm_quantile, BetaParams, LARGE_SHAPE_MIN,
};
use crate::recursion::{advance, bin_probability, RecursionStats, Scratch};

/// Largest `n` accepted by the enumeration oracles.
pub const ORACLE_MAX_N: usize = 8;

/// Sample size above which band endpoints switch to the asymptotic beta
/// inversion for order statistics away from the extremes.
pub const FAST_QUANTILE_MIN_N: usize = 20_000;

/// Absolute tolerance of the ELL symmetry check `g_i = 1 - h_{n+1-i}`.
pub const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedBounds {
    pub n: usize,
    pub eta: f64,
    pub h: Vec<f64>,
    pub g: Vec<f64>,
}

/// Lower `eta`-quantiles of `Beta(i, n + 1 - i)` for `i = 1..=n`.
pub(crate) fn order_statistic_quantiles(n: usize, q: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    if n > FAST_QUANTILE_MIN_N {
        let z = norm_quantile(q);
        for i in 1..=n {
            let params = BetaParams::order_statistic(i, n);
            let fast = if params.a().min(params.b()) >= LARGE_SHAPE_MIN {
                beta_quantile_large_z(z, params)
            } else {
                None
            };
            out.push(
                fast.unwrap_or_else(|| beta_quantile(q, params).expect("level checked by caller")),
            );
        }
    } else {
        for i in 1..=n {
            let params = BetaParams::order_statistic(i, n);
            out.push(beta_quantile(q, params).expect("level checked by caller"));
        }
    }
    out
}

/// ELL bounds at local level `eta`: `h_i` and `g_i` are the `eta/2` and
/// `1 - eta/2` quantiles of `Beta(i, n + 1 - i)`.
///
/// Only `h` is solved; `g` is its mirror image, so the symmetry holds exactly.
pub fn bounds_from_eta_two_sided(n: usize, eta: f64) -> Result<TwoSidedBounds> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(domain("eta", eta));
    }
    if n == 0 {
        return Err(Error::Config("n must be at least 1".to_string()));
    }
    let h = order_statistic_quantiles(n, eta / 2.0);
    let g = h.iter().rev().map(|&x| 1.0 - x).collect();
    Ok(TwoSidedBounds { n, eta, h, g })
}

fn validate(h: &[f64], g: &[f64]) -> Result<()> {
    if h.len() != g.len() {
        return Err(Error::LengthMismatch {
            expected: h.len(),
            got: g.len(),
        });
    }
    if h.is_empty() {
        return Err(Error::InvalidBand("band has no points".to_string()));
    }
    for (i, (&lo, &hi)) in h.iter().zip(g).enumerate() {
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) {
            return Err(Error::InvalidBand(alloc::format!(
                "endpoint {} outside [0, 1]",
                i + 1
            )));
        }
        if lo >= hi {
            return Err(Error::InvalidBand(alloc::format!(
                "h[{0}] >= g[{0}]",
                i + 1
            )));
        }
    }
    for w in [h, g] {
        if w.windows(2).any(|p| p[1] < p[0]) {
            return Err(Error::InvalidBand(
                "endpoints must be nondecreasing".to_string(),
            ));
        }
    }
    Ok(())
}

/// Merged endpoints and admissible count ranges of the two-sided recursion.
#[derive(Debug, Clone)]
pub struct TwoSidedRecursionState {
    n: usize,
    /// `b_0 = 0, b_1..b_{2n}, b_{2n+1} = 1`.
    b: Vec<f64>,
    /// `u[k]` for `k = 0..=2n`.
    u: Vec<usize>,
    /// `l[k]` for `k = 0..=2n`.
    l: Vec<usize>,
    k: usize,
    row: Vec<f64>,
    next: Vec<f64>,
    scratch: Scratch,
    stats: RecursionStats,
}

impl TwoSidedRecursionState {
    pub fn new(h: &[f64], g: &[f64]) -> Result<Self> {
        validate(h, g)?;
        let n = h.len();
        let mut b = Vec::with_capacity(2 * n + 2);
        let mut u = Vec::with_capacity(2 * n + 1);
        let mut l = Vec::with_capacity(2 * n + 1);
        b.push(0.0);
        u.push(0);
        l.push(0);
        let (mut hi_idx, mut gi_idx) = (0usize, 0usize);
        while hi_idx < n || gi_idx < n {
            // lower endpoints first on ties; the result does not depend on it
            let take_h = gi_idx == n || (hi_idx < n && h[hi_idx] <= g[gi_idx]);
            u.push(hi_idx);
            if take_h {
                b.push(h[hi_idx]);
                hi_idx += 1;
            } else {
                b.push(g[gi_idx]);
                gi_idx += 1;
            }
            l.push(gi_idx);
        }
        b.push(1.0);
        Ok(Self {
            n,
            b,
            u,
            l,
            k: 0,
            row: vec![1.0],
            next: Vec::new(),
            scratch: Scratch::default(),
            stats: RecursionStats::default(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Merged endpoints `b_0..=b_{2n+1}`.
    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn u(&self) -> &[usize] {
        &self.u
    }

    pub fn l(&self) -> &[usize] {
        &self.l
    }

    /// Index of the current row.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Current row: `c_j^(k)` for `j = l_k..=u_k`.
    pub fn row(&self) -> &[f64] {
        &self.row
    }

    pub fn stats(&self) -> RecursionStats {
        self.stats
    }

    /// Advances from row `k` to row `k + 1`. Panics past row `2n`.
    pub fn step(&mut self) {
        let k = self.k + 1;
        assert!(k <= 2 * self.n, "recursion already complete");
        let p = bin_probability(self.b[k - 1], self.b[k]);
        let ops = advance(
            &self.row,
            self.l[k - 1],
            self.n,
            p,
            self.l[k],
            self.u[k],
            &mut self.next,
            &mut self.scratch,
        );
        core::mem::swap(&mut self.row, &mut self.next);
        self.k = k;
        self.stats.rows += 1;
        self.stats.multiply_adds += ops;
    }

    /// `c_j^(k)` for the current row, zero outside the admissible range.
    pub fn value(&self, j: usize) -> f64 {
        let lo = self.l[self.k];
        if j < lo {
            return 0.0;
        }
        self.row.get(j - lo).copied().unwrap_or(0.0)
    }
}

/// Exact global level of a general two-sided band by the full forward
/// recursion.
pub fn global_level_two_sided(h: &[f64], g: &[f64]) -> Result<f64> {
    global_level_two_sided_with_stats(h, g).map(|(a, _)| a)
}

pub fn global_level_two_sided_with_stats(h: &[f64], g: &[f64]) -> Result<(f64, RecursionStats)> {
    let mut state = TwoSidedRecursionState::new(h, g)?;
    let n = state.n;
    for _ in 0..2 * n {
        state.step();
    }
    let stay = state.value(n);
    Ok(((1.0 - stay).clamp(0.0, 1.0), state.stats))
}

fn check_symmetry(bounds: &TwoSidedBounds) -> Result<()> {
    let n = bounds.h.len();
    if bounds.g.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: bounds.g.len(),
        });
    }
    for i in 0..n {
        let deviation = libm::fabs(bounds.g[i] - (1.0 - bounds.h[n - 1 - i]));
        if !(deviation <= SYMMETRY_TOL) {
            return Err(Error::SymmetryViolation {
                index: i + 1,
                deviation,
            });
        }
    }
    Ok(())
}

/// Exact global level of an ELL-symmetric band, running the recursion only
/// to row `n + 1` and combining it with row `n` through the reflection
/// symmetry.
pub fn global_level_two_sided_symmetric(bounds: &TwoSidedBounds) -> Result<f64> {
    global_level_two_sided_symmetric_with_stats(bounds).map(|(a, _)| a)
}

pub fn global_level_two_sided_symmetric_with_stats(
    bounds: &TwoSidedBounds,
) -> Result<(f64, RecursionStats)> {
    check_symmetry(bounds)?;
    let mut state = TwoSidedRecursionState::new(&bounds.h, &bounds.g)?;
    let n = state.n;
    for _ in 0..n {
        state.step();
    }
    let half = state.row.clone();
    let (lo, hi) = (state.l[n], state.u[n]);
    let bn = state.b[n];
    state.step();
    let mut stay = 0.0;
    for j in lo..=hi {
        let left = half[j - lo];
        let right = state.value(n - j);
        if left <= 0.0 || right <= 0.0 {
            continue;
        }
        let ln_denom = ln_dbinom_raw(j as f64, n as f64, bn, 1.0 - bn);
        stay += libm::exp(libm::log(left) + libm::log(right) - ln_denom);
    }
    Ok(((1.0 - stay).clamp(0.0, 1.0), state.stats))
}

/// Global level by brute-force enumeration of all bin-count vectors.
///
/// Each order statistic is checked directly against its own interval, so
/// this shares nothing with the count bounds used by the recursion.
pub fn multinomial_oracle_two_sided(h: &[f64], g: &[f64]) -> Result<f64> {
    validate(h, g)?;
    let n = h.len();
    if n > ORACLE_MAX_N {
        return Err(Error::TooLarge {
            n,
            max: ORACLE_MAX_N,
        });
    }
    let mut b: Vec<f64> = h.iter().chain(g.iter()).copied().collect();
    b.push(0.0);
    b.push(1.0);
    b.sort_by(|x, y| x.partial_cmp(y).expect("finite endpoints"));
    let widths: Vec<f64> = b.windows(2).map(|w| w[1] - w[0]).collect();
    let mut counts = vec![0usize; widths.len()];
    let mut stay = 0.0;
    enumerate(&mut counts, 0, n, &mut |m| {
        // bin index of each order statistic
        let mut i = 0;
        for (bin, &c) in m.iter().enumerate() {
            for _ in 0..c {
                if !(b[bin] >= h[i] && b[bin + 1] <= g[i]) {
                    return;
                }
                i += 1;
            }
        }
        stay += multinomial_probability(m, &widths);
    });
    Ok((1.0 - stay).clamp(0.0, 1.0))
}

pub(crate) fn enumerate(
    counts: &mut [usize],
    pos: usize,
    remaining: usize,
    f: &mut dyn FnMut(&[usize]),
) {
    if pos + 1 == counts.len() {
        counts[pos] = remaining;
        f(counts);
        counts[pos] = 0;
        return;
    }
    for c in 0..=remaining {
        counts[pos] = c;
        enumerate(counts, pos + 1, remaining - c, f);
    }
    counts[pos] = 0;
}

pub(crate) fn multinomial_probability(counts: &[usize], widths: &[f64]) -> f64 {
    let total: usize = counts.iter().sum();
    let mut prob = (1..=total).map(|k| k as f64).product::<f64>();
    for (&c, &w) in counts.iter().zip(widths) {
        for k in 1..=c {
            prob *= w / k as f64;
        }
    }
    prob
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_examples() {
        let b = bounds_from_eta_two_sided(1, 0.05).unwrap();
        assert!((b.h[0] - 0.025).abs() < 1e-15 && (b.g[0] - 0.975).abs() < 1e-15);
        let b = bounds_from_eta_two_sided(2, 0.1).unwrap();
        assert!((b.h[0] - (1.0 - libm::sqrt(0.95))).abs() < 1e-14);
        assert!((b.g[1] - libm::sqrt(0.95)).abs() < 1e-14);
        let b = bounds_from_eta_two_sided(100, 0.003).unwrap();
        for i in 0..100 {
            assert_eq!(b.g[i], 1.0 - b.h[99 - i]);
            assert!(b.h[i] < b.g[i]);
        }
        assert!(bounds_from_eta_two_sided(5, 0.0).is_err());
        assert!(bounds_from_eta_two_sided(5, 1.0).is_err());
    }

    #[test]
    fn trivial_levels() {
        let n = 4;
        let a = global_level_two_sided(&vec![0.0; n], &vec![1.0; n]).unwrap();
        assert_eq!(a, 0.0);
        let a = global_level_two_sided(&[0.025], &[0.975]).unwrap();
        assert!((a - 0.05).abs() < 1e-15);
        let b = bounds_from_eta_two_sided(1, 0.07).unwrap();
        assert!((global_level_two_sided_symmetric(&b).unwrap() - 0.07).abs() < 1e-15);
    }

    #[test]
    fn invalid_band_rejected() {
        assert!(matches!(
            global_level_two_sided(&[0.5], &[0.5]),
            Err(Error::InvalidBand(_))
        ));
        assert!(matches!(
            global_level_two_sided(&[0.2, 0.1], &[0.8, 0.9]),
            Err(Error::InvalidBand(_))
        ));
        assert!(matches!(
            multinomial_oracle_two_sided(&[0.6], &[0.5]),
            Err(Error::InvalidBand(_))
        ));
    }

    #[test]
    fn recursion_state_invariants() {
        let b = bounds_from_eta_two_sided(30, 0.01).unwrap();
        let mut s = TwoSidedRecursionState::new(&b.h, &b.g).unwrap();
        assert_eq!(s.b()[0], 0.0);
        assert_eq!(*s.b().last().unwrap(), 1.0);
        assert!(s.b().windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(s.u()[60], 30);
        assert_eq!(s.l()[60], 30);
        // l_{n+1} = n - u_n, u_{n+1} = n - l_n
        assert_eq!(s.l()[31], 30 - s.u()[30]);
        assert_eq!(s.u()[31], 30 - s.l()[30]);
        for _ in 0..60 {
            s.step();
            assert!(s.row().iter().all(|&c| (0.0..=1.0).contains(&c)));
            assert!(s.row().iter().sum::<f64>() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn oracle_small_cases() {
        let a = multinomial_oracle_two_sided(&[0.3], &[0.9]).unwrap();
        assert!((a - 0.4).abs() < 1e-15);
        let h = [0.1, 0.2];
        let g = [0.8, 0.9];
        let o = multinomial_oracle_two_sided(&h, &g).unwrap();
        let r = global_level_two_sided(&h, &g).unwrap();
        assert!((o - r).abs() < 1e-14, "{o} {r}");
        // direct integration: P(0.1 < X(1) <= 0.8, 0.2 < X(2) <= 0.9)
        // = 2 * area{0.1 < x < y, x <= 0.8, 0.2 < y <= 0.9}
        let area = {
            // integrate over y in (0.2, 0.9]: length of x in (0.1, min(y, 0.8)]
            let part1 = 0.5 * (0.8f64 * 0.8 - 0.2 * 0.2) - 0.1 * 0.6; // y in (0.2, 0.8]
            let part2 = 0.1 * 0.7; // y in (0.8, 0.9], x in (0.1, 0.8]
            part1 + part2
        };
        assert!((o - (1.0 - 2.0 * area)).abs() < 1e-14);
        assert!(matches!(
            multinomial_oracle_two_sided(&[0.1; 9], &[0.9; 9]),
            Err(Error::TooLarge { n: 9, max: 8 })
        ));
    }

    #[test]
    fn symmetric_requires_symmetry() {
        let mut b = bounds_from_eta_two_sided(5, 0.05).unwrap();
        b.g[1] += 1e-6;
        assert!(matches!(
            global_level_two_sided_symmetric(&b),
            Err(Error::SymmetryViolation { index: 2, .. })
        ));
    }

    #[test]
    fn monotone_in_eta_and_bonferroni() {
        let n = 40;
        let mut last = 0.0;
        for &eta in &[1e-5, 1e-4, 1e-3, 0.01, 0.05, 0.1] {
            let b = bounds_from_eta_two_sided(n, eta).unwrap();
            let a = global_level_two_sided_symmetric(&b).unwrap();
            assert!(a > last);
            assert!(eta <= a && a <= n as f64 * eta, "eta={eta} a={a}");
            last = a;
        }
    }
}
