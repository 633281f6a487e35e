//! Local level `eta` achieving a requested global level `alpha`: bisection
//! on the exact level, the asymptotic formula, lookup tables, and the policy
//! that chooses among them.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::ell_one_sided::{
    bounds_from_eta_one_sided, global_level_one_sided_approx, global_level_one_sided_exact,
    ApproxConfig,
};
use crate::ell_two_sided::{bounds_from_eta_two_sided, global_level_two_sided_symmetric};
use crate::error::{domain, Error, Result};

/// Relative tolerance on `alpha` used when building tables.
pub const TABLE_TOL: f64 = 1e-6;
/// Relative tolerance on `alpha` used for on-the-fly solves.
pub const ON_THE_FLY_TOL: f64 = 1e-4;
/// Largest `n` solved exactly under the automatic policy.
pub const EXACT_N_CAP: usize = 20_000;
/// Smallest `n` accepted by the asymptotic formula.
pub const ASYMPTOTIC_MIN_N: usize = 100;
const MAX_BISECTIONS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    OneSided,
    TwoSided,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::OneSided => "one-sided",
            Side::TwoSided => "two-sided",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    Exact,
    Table,
    Asymptotic,
    Auto,
}

/// How a local level was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtaPath {
    Table,
    Exact,
    Asymptotic,
}

impl EtaPath {
    pub fn as_str(self) -> &'static str {
        match self {
            EtaPath::Table => "table",
            EtaPath::Exact => "exact",
            EtaPath::Asymptotic => "asymptotic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalLevelQuery {
    pub n: usize,
    pub alpha: f64,
    pub side: Side,
    pub policy: Policy,
}

impl LocalLevelQuery {
    pub fn new(n: usize, alpha: f64, side: Side) -> Self {
        Self {
            n,
            alpha,
            side,
            policy: Policy::Auto,
        }
    }

    pub fn with_policy(self, policy: Policy) -> Self {
        Self { policy, ..self }
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(domain("alpha", self.alpha));
        }
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".to_string()));
        }
        Ok(())
    }
}

/// Exact global level of the ELL band with local level `eta`.
pub fn global_level_for_eta(n: usize, eta: f64, side: Side) -> Result<f64> {
    match side {
        Side::TwoSided => global_level_two_sided_symmetric(&bounds_from_eta_two_sided(n, eta)?),
        Side::OneSided => global_level_one_sided_exact(&bounds_from_eta_one_sided(n, eta)?.h),
    }
}

/// Bisection for `eta` with `|alpha_n(eta) - alpha| / alpha <= tol`.
///
/// The search runs on `log eta` over the Bonferroni bracket
/// `(alpha / n, alpha)`. Two-sided levels use the half recursion; one-sided
/// levels use the term-dropping recursion with a budget of `tol / 10`,
/// except under [`Policy::Exact`].
pub fn solve_local_level(query: &LocalLevelQuery, tol: f64) -> Result<f64> {
    query.validate()?;
    if !(tol > 0.0) {
        return Err(domain("tolerance", tol));
    }
    let (n, alpha) = (query.n, query.alpha);
    if n == 1 {
        return Ok(alpha);
    }
    let approx = ApproxConfig::with_max_rel_err(tol / 10.0);
    let level = |eta: f64| -> Result<f64> {
        match query.side {
            Side::TwoSided => global_level_two_sided_symmetric(&bounds_from_eta_two_sided(n, eta)?),
            Side::OneSided => {
                let h = bounds_from_eta_one_sided(n, eta)?.h;
                if query.policy == Policy::Exact {
                    global_level_one_sided_exact(&h)
                } else {
                    global_level_one_sided_approx(&h, &approx)
                }
            }
        }
    };
    let mut lo = libm::log(alpha / n as f64);
    let mut hi = libm::log(alpha);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let eta = libm::exp(mid);
        let got = level(eta)?;
        if libm::fabs(got - alpha) <= tol * alpha {
            return Ok(eta);
        }
        if got < alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NonConvergence("local level bisection"))
}

/// Calibrated constant of the asymptotic formula, if one exists for `alpha`.
pub fn asymptotic_constant(alpha: f64) -> Option<f64> {
    const CONSTANTS: [(f64, f64); 3] = [(0.01, 1.591), (0.05, 1.3), (0.1, 1.1)];
    CONSTANTS
        .iter()
        .find(|(a, _)| libm::fabs(a - alpha) <= 1e-12)
        .map(|&(_, c)| c)
}

/// Asymptotic two-sided local level with the calibrated constant for `alpha`.
pub fn eta_asymptotic(n: usize, alpha: f64) -> Result<f64> {
    let c = asymptotic_constant(alpha).ok_or(Error::UnsupportedAlpha(alpha))?;
    eta_asymptotic_with_constant(n, alpha, c)
}

/// `-log(1 - alpha) / (2 log log n log n) * (1 - c log log log n / log log n)`.
pub fn eta_asymptotic_with_constant(n: usize, alpha: f64, c: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain("alpha", alpha));
    }
    if n < ASYMPTOTIC_MIN_N {
        return Err(domain("n for asymptotic formula", n as f64));
    }
    let ln_n = libm::log(n as f64);
    let lln = libm::log(ln_n);
    let llln = libm::log(lln);
    Ok(-libm::log1p(-alpha) / (2.0 * lln * ln_n) * (1.0 - c * llln / lln))
}

/// Precomputed `(n, eta)` pairs for one `(alpha, side)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaTable {
    pub alpha: f64,
    pub side: Side,
    pub tol: f64,
    grid: Vec<(usize, f64)>,
}

impl EtaTable {
    /// Checks that `n` is strictly increasing and `eta` strictly decreasing.
    pub fn new(alpha: f64, side: Side, tol: f64, grid: Vec<(usize, f64)>) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::EmptyTable);
        }
        for w in grid.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Config(format!(
                    "table grid not increasing at n = {}",
                    w[1].0
                )));
            }
            if w[1].1 >= w[0].1 {
                return Err(Error::Config(format!(
                    "table eta not decreasing at n = {}",
                    w[1].0
                )));
            }
        }
        if grid
            .iter()
            .any(|&(n, eta)| n == 0 || !(eta > 0.0 && eta < 1.0))
        {
            return Err(Error::Config("table entry out of range".to_string()));
        }
        Ok(Self {
            alpha,
            side,
            tol,
            grid,
        })
    }

    pub fn grid(&self) -> &[(usize, f64)] {
        &self.grid
    }

    pub fn n_min(&self) -> usize {
        self.grid[0].0
    }

    pub fn n_max(&self) -> usize {
        self.grid[self.grid.len() - 1].0
    }

    pub fn covers(&self, alpha: f64, side: Side, n: usize) -> bool {
        self.side == side
            && libm::fabs(self.alpha - alpha) <= 1e-12
            && (self.n_min()..=self.n_max()).contains(&n)
    }
}

/// Solves every grid point at tolerance `tol`.
pub fn table_build(alpha: f64, side: Side, n_grid: &[usize], tol: f64) -> Result<EtaTable> {
    if n_grid.is_empty() {
        return Err(Error::EmptyTable);
    }
    let mut grid = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let eta = solve_local_level(
            &LocalLevelQuery::new(n, alpha, side).with_policy(Policy::Exact),
            tol,
        )?;
        grid.push((n, eta));
    }
    EtaTable::new(alpha, side, tol, grid)
}

/// Linear interpolation of `eta` in `n` between neighbouring grid points.
pub fn table_interpolate(table: &EtaTable, n: usize) -> Result<f64> {
    let grid = table.grid();
    let (lo, hi) = (table.n_min(), table.n_max());
    if n < lo || n > hi {
        return Err(Error::OutOfRange { n, lo, hi });
    }
    match grid.binary_search_by_key(&n, |&(k, _)| k) {
        Ok(i) => Ok(grid[i].1),
        Err(i) => {
            let (n1, e1) = grid[i - 1];
            let (n2, e2) = grid[i];
            let w = (n - n1) as f64 / (n2 - n1) as f64;
            Ok(e1 + w * (e2 - e1))
        }
    }
}

/// A local level together with the path that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedEta {
    pub eta: f64,
    pub path: EtaPath,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolveOptions {
    pub exact_n_cap: usize,
    pub tol: f64,
}

impl Default for ResolveOptions {
    fn default() -> Self {
        Self {
            exact_n_cap: EXACT_N_CAP,
            tol: ON_THE_FLY_TOL,
        }
    }
}

/// [`resolve_eta_with`] under default options.
pub fn resolve_eta(query: &LocalLevelQuery, tables: &[EtaTable]) -> Result<ResolvedEta> {
    resolve_eta_with(query, tables, &ResolveOptions::default())
}

/// Picks the local level according to the query policy. `Auto` prefers a
/// covering table, then an exact solve up to `exact_n_cap`, then the
/// asymptotic formula.
pub fn resolve_eta_with(
    query: &LocalLevelQuery,
    tables: &[EtaTable],
    options: &ResolveOptions,
) -> Result<ResolvedEta> {
    query.validate()?;
    let (n, alpha, side) = (query.n, query.alpha, query.side);
    let from_table = || {
        tables.iter().find(|t| t.covers(alpha, side, n)).map(|t| {
            table_interpolate(t, n).map(|eta| ResolvedEta {
                eta,
                path: EtaPath::Table,
            })
        })
    };
    let exact = || {
        solve_local_level(query, options.tol).map(|eta| ResolvedEta {
            eta,
            path: EtaPath::Exact,
        })
    };
    let asymptotic = || -> Result<ResolvedEta> {
        if side == Side::OneSided {
            return Err(Error::Unsupported(
                "no asymptotic formula for one-sided bands".to_string(),
            ));
        }
        eta_asymptotic(n, alpha).map(|eta| ResolvedEta {
            eta,
            path: EtaPath::Asymptotic,
        })
    };
    match query.policy {
        Policy::Exact => exact(),
        Policy::Asymptotic => asymptotic(),
        Policy::Table => from_table().unwrap_or_else(|| {
            Err(Error::Unsupported(format!(
                "no table for alpha = {alpha}, {}, n = {n}",
                side.as_str()
            )))
        }),
        Policy::Auto => {
            if let Some(found) = from_table() {
                return found;
            }
            if n <= options.exact_n_cap {
                return exact();
            }
            if side == Side::TwoSided
                && asymptotic_constant(alpha).is_some()
                && n >= ASYMPTOTIC_MIN_N
            {
                return asymptotic();
            }
            Err(Error::Unsupported(format!(
                "alpha = {alpha} with n = {n} ({}): no table covers it, n exceeds the exact-solve cap of {}, \
                 and no calibrated asymptotic constant exists; lower n or supply a table",
                side.as_str(),
                options.exact_n_cap
            )))
        }
    }
}
