//! One-sided equal-local-level bounds, their exact global level, and the
//! term-dropping approximation with a guaranteed relative-error bound.
//!
//! The one-sided band only constrains `X_(i) > h_i`. Row `k` of the recursion
//! holds `c_j = P(exactly j points in [0, h_k] and no exit so far)` for
//! `j <= k - 1`. Late in the recursion the leading entries of each row are
//! negligible; the approximation drops them at scheduled checkpoints while
//! keeping the accumulated error within a relative budget.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::ell_two_sided::{
    enumerate, multinomial_probability, order_statistic_quantiles, ORACLE_MAX_N,
};
use crate::error::{domain, Error, Result};
use crate::recursion::{advance, bin_probability, RecursionStats, Scratch};

#[derive(Debug, Clone, PartialEq)]
pub struct OneSidedBounds {
    pub n: usize,
    pub eta: f64,
    pub h: Vec<f64>,
}

/// One-sided ELL bounds: `h_i` is the `eta` quantile of `Beta(i, n + 1 - i)`.
pub fn bounds_from_eta_one_sided(n: usize, eta: f64) -> Result<OneSidedBounds> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(domain("eta", eta));
    }
    if n == 0 {
        return Err(Error::Config("n must be at least 1".to_string()));
    }
    Ok(OneSidedBounds {
        n,
        eta,
        h: order_statistic_quantiles(n, eta),
    })
}

fn validate(h: &[f64]) -> Result<()> {
    if h.is_empty() {
        return Err(Error::InvalidBand("band has no points".to_string()));
    }
    if h.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::InvalidBand("endpoint outside [0, 1]".to_string()));
    }
    if h.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidBand(
            "lower endpoints must be strictly increasing".to_string(),
        ));
    }
    Ok(())
}

/// Checkpoint schedule and error budget of the approximate recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxConfig {
    pub first_check: usize,
    pub check_interval: usize,
    pub max_rel_err: f64,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        Self {
            first_check: 50,
            check_interval: 50,
            max_rel_err: 1e-4,
        }
    }
}

impl ApproxConfig {
    pub fn with_max_rel_err(max_rel_err: f64) -> Self {
        Self {
            max_rel_err,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.max_rel_err > 0.0) {
            return Err(domain("max_rel_err", self.max_rel_err));
        }
        if self.first_check < 2 {
            return Err(Error::Config("first_check must be at least 2".to_string()));
        }
        if self.check_interval < 1 {
            return Err(Error::Config(
                "check_interval must be at least 1".to_string(),
            ));
        }
        Ok(())
    }

    fn is_checkpoint(&self, k: usize) -> bool {
        k == self.first_check || (k > self.first_check && k % self.check_interval == 0)
    }
}

/// A checkpoint at which terms were dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropPoint {
    /// Row index at which the drop happened.
    pub k: usize,
    /// Largest dropped index after this drop.
    pub t: usize,
    /// Accumulated error bound after this drop.
    pub accumul_err_upper_bnd: f64,
}

/// Running state of the one-sided recursion, exact or approximate.
#[derive(Debug, Clone)]
pub struct OneSidedApproxState {
    n: usize,
    k: usize,
    /// Index of the first retained entry, `skip + 1`.
    lo: usize,
    accumul_err_upper_bnd: f64,
    drop_points: Vec<DropPoint>,
    row: Vec<f64>,
    next: Vec<f64>,
    scratch: Scratch,
    stats: RecursionStats,
}

impl OneSidedApproxState {
    fn new(n: usize) -> Self {
        Self {
            n,
            k: 0,
            lo: 0,
            accumul_err_upper_bnd: 0.0,
            drop_points: Vec::new(),
            row: vec![1.0],
            next: Vec::new(),
            scratch: Scratch::default(),
            stats: RecursionStats::default(),
        }
    }

    /// Largest dropped index, or -1 when nothing has been dropped.
    pub fn skip(&self) -> isize {
        self.lo as isize - 1
    }

    pub fn accumul_err_upper_bnd(&self) -> f64 {
        self.accumul_err_upper_bnd
    }

    pub fn drop_points(&self) -> &[DropPoint] {
        &self.drop_points
    }

    /// Retained entries `c_j` for `j = skip + 1 ..= k - 1`.
    pub fn row(&self) -> &[f64] {
        &self.row
    }

    pub fn stats(&self) -> RecursionStats {
        self.stats
    }

    fn step(&mut self, h: &[f64]) {
        let k = self.k + 1;
        let prev = if k == 1 { 0.0 } else { h[k - 2] };
        let p = bin_probability(prev, h[k - 1]);
        let ops = advance(
            &self.row,
            self.lo,
            self.n,
            p,
            self.lo,
            k - 1,
            &mut self.next,
            &mut self.scratch,
        );
        core::mem::swap(&mut self.row, &mut self.next);
        self.k = k;
        self.stats.rows += 1;
        self.stats.multiply_adds += ops;
    }

    fn checkpoint(&mut self, max_rel_err: f64) {
        let mut available = max_rel_err - (1.0 + max_rel_err) * self.accumul_err_upper_bnd;
        let total: f64 = self.row.iter().sum();
        available -= max_rel_err * total;
        let mut dropped = 0.0;
        let mut count = 0;
        while count < self.row.len() && dropped + self.row[count] <= available {
            dropped += self.row[count];
            count += 1;
        }
        if count == 0 {
            return;
        }
        self.accumul_err_upper_bnd += dropped;
        self.row.drain(..count);
        self.lo += count;
        self.drop_points.push(DropPoint {
            k: self.k,
            t: self.lo - 1,
            accumul_err_upper_bnd: self.accumul_err_upper_bnd,
        });
    }

    fn finish(&self) -> f64 {
        let stay: f64 = self.row.iter().sum();
        (1.0 - stay).clamp(0.0, 1.0)
    }
}

fn run(h: &[f64], config: Option<&ApproxConfig>) -> Result<(f64, OneSidedApproxState)> {
    validate(h)?;
    if let Some(cfg) = config {
        cfg.validate()?;
    }
    let n = h.len();
    let mut state = OneSidedApproxState::new(n);
    for k in 1..=n {
        state.step(h);
        if let Some(cfg) = config {
            if k >= 2 && cfg.is_checkpoint(k) {
                state.checkpoint(cfg.max_rel_err);
            }
        }
    }
    Ok((state.finish(), state))
}

/// Exact global level `P(X_(i) <= h_i for some i)` of a one-sided band.
pub fn global_level_one_sided_exact(h: &[f64]) -> Result<f64> {
    run(h, None).map(|(a, _)| a)
}

pub fn global_level_one_sided_exact_with_stats(h: &[f64]) -> Result<(f64, RecursionStats)> {
    run(h, None).map(|(a, s)| (a, s.stats))
}

/// Approximate global level. The result is never below the exact level and
/// exceeds it by at most `max_rel_err` in relative terms.
pub fn global_level_one_sided_approx(h: &[f64], config: &ApproxConfig) -> Result<f64> {
    run(h, Some(config)).map(|(a, _)| a)
}

/// As [`global_level_one_sided_approx`], also returning the final state.
pub fn global_level_one_sided_approx_detailed(
    h: &[f64],
    config: &ApproxConfig,
) -> Result<(f64, OneSidedApproxState)> {
    run(h, Some(config))
}

/// Global level by brute-force enumeration of bin-count vectors.
pub fn multinomial_oracle_one_sided(h: &[f64]) -> Result<f64> {
    validate(h)?;
    let n = h.len();
    if n > ORACLE_MAX_N {
        return Err(Error::TooLarge {
            n,
            max: ORACLE_MAX_N,
        });
    }
    let mut b = Vec::with_capacity(n + 2);
    b.push(0.0);
    b.extend_from_slice(h);
    b.push(1.0);
    let widths: Vec<f64> = b.windows(2).map(|w| w[1] - w[0]).collect();
    let mut counts = vec![0usize; widths.len()];
    let mut stay = 0.0;
    enumerate(&mut counts, 0, n, &mut |m| {
        let mut i = 0;
        for (bin, &c) in m.iter().enumerate() {
            for _ in 0..c {
                if b[bin] < h[i] {
                    return;
                }
                i += 1;
            }
        }
        stay += multinomial_probability(m, &widths);
    });
    Ok((1.0 - stay).clamp(0.0, 1.0))
}
