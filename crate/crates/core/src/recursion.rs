//! Row update shared by the two-sided and one-sided level recursions.

use alloc::vec::Vec;

use crate::numerics::ln_dbinom_raw;

/// Operation counts collected while running a recursion.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RecursionStats {
    /// Number of rows computed.
    pub rows: usize,
    /// Number of `c * pmf` multiply-adds performed.
    pub multiply_adds: u64,
}

/// Binomial terms smaller than this fraction of the largest term in a run
/// are not generated. The discarded mass is below 1e-19 of each
/// contribution, far under the resolution of the row totals.
const PMF_CUTOFF: f64 = 1.0 / 18_446_744_073_709_551_616.0;

/// Conditional probability that a point uniform on `(prev, 1]` lands in
/// `(prev, cur]`.
pub(crate) fn bin_probability(prev: f64, cur: f64) -> f64 {
    if cur >= 1.0 {
        return 1.0;
    }
    let denom = 1.0 - prev;
    if denom <= 0.0 {
        return 0.0;
    }
    ((cur - prev) / denom).clamp(0.0, 1.0)
}

/// Scratch buffers for [`advance`].
#[derive(Debug, Clone, Default)]
pub(crate) struct Scratch {
    pmf: Vec<f64>,
    /// `inv[k] = 1 / k`.
    inv: Vec<f64>,
}

impl Scratch {
    fn ensure_inverses(&mut self, n: usize) {
        if self.inv.len() <= n + 1 {
            self.inv.clear();
            self.inv.push(f64::INFINITY);
            self.inv.extend((1..=n + 1).map(|k| 1.0 / k as f64));
        }
    }

    /// Fills `pmf[t - t0]` with `P(Bin(size, p) = t)` for `t0 <= t <= t1`,
    /// returning the offset of the first generated entry; entries before it
    /// and past the end of `pmf` are negligible.
    ///
    /// The run starts at the mode (clamped into the range) and proceeds by
    /// ratio recurrence in both directions.
    fn binomial_run(&mut self, size: usize, p: f64, t0: usize, t1: usize) -> usize {
        self.pmf.clear();
        let t1 = t1.min(size);
        if t0 > t1 {
            return 0;
        }
        if p <= 0.0 {
            if t0 == 0 {
                self.pmf.push(1.0);
            }
            return 0;
        }
        if p >= 1.0 {
            if t1 == size {
                self.pmf.push(1.0);
                return size - t0;
            }
            return 0;
        }
        let q = 1.0 - p;
        let n = size as f64;
        let mode = libm::floor((n + 1.0) * p).min(n) as usize;
        let anchor = mode.clamp(t0, t1);
        let top = libm::exp(ln_dbinom_raw(anchor as f64, n, p, q));
        let floor = top * PMF_CUTOFF;
        let odds = p / q;
        let inv_odds = q / p;
        let inv = &self.inv;

        // walk down first to find where the run starts
        let mut start = anchor;
        let mut v = top;
        while start > t0 {
            let next = v * start as f64 * inv[size - start + 1] * inv_odds;
            if next < floor {
                break;
            }
            v = next;
            start -= 1;
        }
        self.pmf.resize(anchor - start + 1, 0.0);
        let mut v = top;
        self.pmf[anchor - start] = top;
        let mut t = anchor;
        while t > start {
            v = v * t as f64 * inv[size - t + 1] * inv_odds;
            t -= 1;
            self.pmf[t - start] = v;
        }
        let mut v = top;
        let mut t = anchor;
        while t < t1 {
            v = v * (size - t) as f64 * inv[t + 1] * odds;
            if v < floor {
                break;
            }
            t += 1;
            self.pmf.push(v);
        }
        start - t0
    }
}

/// Computes `next[j - lo] = sum_m prev[m - prev_lo] * P(Bin(n - m, p) = j - m)`
/// for `lo <= j <= hi`.
///
/// Contributions are added in ascending `m`, so dropping leading entries of
/// `prev` can only decrease every entry of `next`, term by term.
#[allow(clippy::too_many_arguments)]
pub(crate) fn advance(
    prev: &[f64],
    prev_lo: usize,
    n: usize,
    p: f64,
    lo: usize,
    hi: usize,
    next: &mut Vec<f64>,
    scratch: &mut Scratch,
) -> u64 {
    next.clear();
    if hi < lo {
        return 0;
    }
    scratch.ensure_inverses(n);
    next.resize(hi - lo + 1, 0.0);
    let mut ops = 0u64;
    for (idx, &c) in prev.iter().enumerate() {
        let m = prev_lo + idx;
        if c == 0.0 || m > hi {
            continue;
        }
        let t0 = lo.saturating_sub(m);
        let offset = scratch.binomial_run(n - m, p, t0, hi - m);
        let base = m + t0 + offset - lo;
        for (slot, &w) in next[base..].iter_mut().zip(scratch.pmf.iter()) {
            *slot += c * w;
        }
        ops += scratch.pmf.len() as u64;
    }
    ops
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::log_binomial_pmf;

    #[test]
    fn binomial_run_matches_direct() {
        let mut s = Scratch::default();
        for &(n, p, t0, t1) in &[
            (40usize, 0.03, 0usize, 40usize),
            (500, 0.4, 150, 260),
            (9, 0.5, 3, 5),
            (300, 0.9, 0, 100),
        ] {
            s.ensure_inverses(n);
            let off = s.binomial_run(n, p, t0, t1);
            let top = (t0..=t1)
                .map(|t| libm::exp(log_binomial_pmf(t as u64, n as u64, p).unwrap()))
                .fold(0.0, f64::max);
            for t in t0..=t1 {
                let want = libm::exp(log_binomial_pmf(t as u64, n as u64, p).unwrap());
                let got = if t >= t0 + off {
                    s.pmf.get(t - t0 - off).copied().unwrap_or(0.0)
                } else {
                    0.0
                };
                if got == 0.0 {
                    assert!(want < top * 1e-18, "n={n} t={t} want={want:e}");
                } else {
                    assert!(
                        (got - want).abs() <= 1e-12 * want,
                        "n={n} t={t} {got:e} {want:e}"
                    );
                }
            }
        }
        s.ensure_inverses(6);
        let off = s.binomial_run(6, 1.0, 0, 6);
        assert_eq!((off, s.pmf.as_slice()), (6, &[1.0][..]));
        let off = s.binomial_run(6, 0.0, 0, 6);
        assert_eq!((off, s.pmf.as_slice()), (0, &[1.0][..]));
    }
}
