//! Command-line interface.
//!
//! Exit codes: 0 success, 2 usage or invalid arguments, 3 unsupported
//! `(alpha, n)` combination, 4 unreadable input, 5 `-log10` of a
//! non-positive value.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use ellband_core::band::{
    band_check, band_effective_n, get_qq_band, BandOptions, Direction, ExpectedMode, Method,
    Verdict,
};
use ellband_core::distributions::{EstimationMethod, ReferenceDistribution};
use ellband_core::ell_one_sided::global_level_one_sided_exact;
use ellband_core::ell_two_sided::global_level_two_sided;
use ellband_core::level_solver::{
    resolve_eta_with, solve_local_level, EtaTable, LocalLevelQuery, Policy, ResolveOptions, Side,
    ON_THE_FLY_TOL, TABLE_TOL,
};
use ellband_core::plot::{make_plot, PlotOptions};

use crate::error::CliError;
use crate::input::read_values;
use crate::output::{band_json, band_rows, rows_csv, spec_rows};
use crate::sim::{self, ChisqConfig, ChisqExpected, NullStudy};
use crate::svg::emit_svg;
use crate::table_file::{format_table, load_tables};

#[derive(Debug, Parser)]
#[command(
    name = "ellband",
    version,
    about = "Simultaneous testing bands for Q-Q and P-P plots"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute a testing band.
    Band(BandCmd),
    /// Render a Q-Q or P-P plot with its band as SVG.
    Plot(PlotCmd),
    /// Solve for the local level, or compute the global level of given bounds.
    LocalLevel(LocalLevelCmd),
    /// Build a local-level table.
    Table(TableCmd),
    /// Check whether a sample stays inside its band.
    Check(CheckCmd),
    /// Run a simulation study.
    #[command(subcommand)]
    Simulate(SimulateCmd),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SideArg {
    #[value(alias = "one-sided")]
    One,
    #[value(alias = "two-sided")]
    Two,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Self {
        match s {
            SideArg::One => Side::OneSided,
            SideArg::Two => Side::TwoSided,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Ell,
    Ks,
    Pointwise,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Ell => Method::Ell,
            MethodArg::Ks => Method::Ks,
            MethodArg::Pointwise => Method::Pointwise,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum FamilyArg {
    Uniform,
    Normal,
    #[value(name = "chi-square", alias = "chisq")]
    ChiSquare,
    #[value(name = "student-t", alias = "t")]
    StudentT,
    Exponential,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EstimationArg {
    Known,
    MeanSd,
    MedianMad,
    MedianQn,
    MedianSn,
    Mle,
}

impl From<EstimationArg> for EstimationMethod {
    fn from(e: EstimationArg) -> Self {
        match e {
            EstimationArg::Known => EstimationMethod::Known,
            EstimationArg::MeanSd => EstimationMethod::MeanSd,
            EstimationArg::MedianMad => EstimationMethod::MedianMad,
            EstimationArg::MedianQn => EstimationMethod::MedianQn,
            EstimationArg::MedianSn => EstimationMethod::MedianSn,
            EstimationArg::Mle => EstimationMethod::Mle,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExpectedArg {
    Median,
    MeanBlom,
    MeanUniform,
}

impl From<ExpectedArg> for ExpectedMode {
    fn from(e: ExpectedArg) -> Self {
        match e {
            ExpectedArg::Median => ExpectedMode::Median,
            ExpectedArg::MeanBlom => ExpectedMode::MeanBlom,
            ExpectedArg::MeanUniform => ExpectedMode::MeanUniform,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    Auto,
    Exact,
    Table,
    Asymptotic,
}

impl From<PolicyArg> for Policy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Auto => Policy::Auto,
            PolicyArg::Exact => Policy::Exact,
            PolicyArg::Table => Policy::Table,
            PolicyArg::Asymptotic => Policy::Asymptotic,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ChisqExpectedArg {
    Margins,
    Fixed,
}

fn parse_alpha(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("alpha must lie in (0, 1), got {s}"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be positive, got {s}"))
    }
}

fn parse_count(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".to_string()),
        Ok(v) => Ok(v),
        Err(_) => Err(format!("not a count: {s}")),
    }
}

#[derive(Debug, Clone, Args)]
struct DistArgs {
    /// Reference distribution family.
    #[arg(long, value_enum, default_value = "normal")]
    dist: FamilyArg,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    mu: f64,
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    sigma: f64,
    /// Degrees of freedom (chi-square, student-t).
    #[arg(long, value_parser = parse_positive)]
    df: Option<f64>,
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    rate: f64,
}

impl DistArgs {
    fn reference(&self) -> Result<ReferenceDistribution, CliError> {
        let need_df = || {
            self.df.ok_or_else(|| {
                CliError::Usage(format!("--df is required for --dist {}", self.name()))
            })
        };
        Ok(match self.dist {
            FamilyArg::Uniform => ReferenceDistribution::Uniform,
            FamilyArg::Normal => ReferenceDistribution::normal(self.mu, self.sigma)?,
            FamilyArg::ChiSquare => ReferenceDistribution::chi_square(need_df()?)?,
            FamilyArg::StudentT => ReferenceDistribution::student_t(need_df()?)?,
            FamilyArg::Exponential => ReferenceDistribution::exponential(self.rate)?,
        })
    }

    fn name(&self) -> &'static str {
        match self.dist {
            FamilyArg::Uniform => "uniform",
            FamilyArg::Normal => "normal",
            FamilyArg::ChiSquare => "chi-square",
            FamilyArg::StudentT => "student-t",
            FamilyArg::Exponential => "exponential",
        }
    }
}

#[derive(Debug, Clone, Args)]
struct BandArgs {
    /// Global level.
    #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "ell")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "two")]
    side: SideArg,
    /// Parameter estimation when data are given.
    #[arg(long, value_enum, default_value = "median-sn")]
    estimation: EstimationArg,
    /// Plotting positions of the expected line.
    #[arg(long, value_enum, default_value = "median")]
    expected: ExpectedArg,
    /// How the local level is obtained.
    #[arg(long, value_enum, default_value = "auto")]
    policy: PolicyArg,
    #[command(flatten)]
    dist: DistArgs,
}

impl BandArgs {
    fn options(&self) -> BandOptions {
        BandOptions {
            alpha: self.alpha,
            method: self.method.into(),
            side: self.side.into(),
            estimation: self.estimation.into(),
            expected: self.expected.into(),
            policy: self.policy.into(),
            resolve: ResolveOptions::default(),
        }
    }
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["n", "data", "neff"])))]
struct BandCmd {
    /// Number of order statistics; parameters are taken as known.
    #[arg(long, value_parser = parse_count)]
    n: Option<usize>,
    /// Sample to fit the reference distribution to.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Effective number of independent tests.
    #[arg(long, value_parser = parse_count)]
    neff: Option<usize>,
    /// CSV column (header name or 1-based index) of the data file.
    #[arg(long, requires = "data")]
    col: Option<String>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[command(flatten)]
    band: BandArgs,
}

#[derive(Debug, Args)]
struct PlotCmd {
    /// Sample file, one value per line.
    data: PathBuf,
    #[arg(long)]
    col: Option<String>,
    /// Additional samples drawn on the same axes against the same band.
    #[arg(long)]
    overlay: Vec<PathBuf>,
    /// P-P plot.
    #[arg(long)]
    pp: bool,
    /// Plot observed minus expected.
    #[arg(long)]
    difference: bool,
    /// Both axes on the -log10 scale.
    #[arg(long)]
    log10: bool,
    /// Effective number of independent tests for the band.
    #[arg(long, value_parser = parse_count)]
    neff: Option<usize>,
    #[arg(long, default_value_t = 640)]
    width: u32,
    #[arg(long, default_value_t = 640)]
    height: u32,
    /// Also write the plotted coordinates as CSV.
    #[arg(long)]
    table_out: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[command(flatten)]
    band: BandArgs,
}

#[derive(Debug, Args)]
struct LocalLevelCmd {
    #[arg(long, value_parser = parse_count, required_unless_present = "from_bounds", conflicts_with = "from_bounds")]
    n: Option<usize>,
    #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "two")]
    side: SideArg,
    #[arg(long, value_enum, default_value = "auto")]
    policy: PolicyArg,
    /// Relative tolerance on the global level of solved values.
    #[arg(long, value_parser = parse_positive)]
    tol: Option<f64>,
    /// Global level of explicit bounds: a lower-bound file, plus an
    /// upper-bound file for two-sided bands.
    #[arg(long, num_args = 1..=2, value_names = ["H", "G"])]
    from_bounds: Option<Vec<PathBuf>>,
}

#[derive(Debug, Args)]
struct TableCmd {
    #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "two")]
    side: SideArg,
    /// Linear grid `start:end:step`; repeatable.
    #[arg(long)]
    grid: Vec<String>,
    /// Log-spaced grid `start:end:count`; repeatable.
    #[arg(long)]
    log_grid: Vec<String>,
    #[arg(long, default_value_t = TABLE_TOL, value_parser = parse_positive)]
    tol: f64,
    #[arg(long, default_value_t = 1, value_parser = parse_count)]
    workers: usize,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CheckCmd {
    data: PathBuf,
    #[arg(long)]
    col: Option<String>,
    #[command(flatten)]
    band: BandArgs,
}

#[derive(Debug, Clone, Args)]
struct SimArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1, value_parser = parse_count)]
    workers: usize,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum SimulateCmd {
    /// Type 1 error of the normality test under an estimation method.
    Type1 {
        #[arg(long, default_value_t = 100, value_parser = parse_count)]
        n: usize,
        #[arg(long, value_enum, default_value = "median-sn")]
        estimation: EstimationArg,
        #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
        alpha: f64,
        #[arg(long, default_value_t = 10_000)]
        replicates: u64,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Exit rate of a band under its null distribution.
    Coverage {
        #[arg(long, default_value_t = 100, value_parser = parse_count)]
        n: usize,
        #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
        alpha: f64,
        #[arg(long, value_enum, default_value = "ell")]
        method: MethodArg,
        #[arg(long, value_enum, default_value = "two")]
        side: SideArg,
        #[arg(long, value_enum, default_value = "known")]
        estimation: EstimationArg,
        #[command(flatten)]
        dist: DistArgs,
        #[arg(long, default_value_t = 10_000)]
        replicates: u64,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Power of ELL and KS normality tests against t(df) data.
    Power {
        #[arg(long, default_value_t = 100, value_parser = parse_count)]
        n: usize,
        /// Degrees of freedom of the alternative; normal data when omitted.
        #[arg(long, value_parser = parse_positive)]
        df: Option<f64>,
        #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
        alpha: f64,
        #[arg(long, value_enum, default_value = "median-sn")]
        estimation: EstimationArg,
        #[arg(long, default_value_t = 1000)]
        replicates: u64,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// P-values of chi-square independence tests on simulated 2x2 tables.
    Chisq {
        /// Observations per table.
        #[arg(long, default_value_t = 200)]
        s: usize,
        #[arg(long, default_value_t = 0.15, value_parser = parse_alpha)]
        a: f64,
        #[arg(long, default_value_t = 0.4, value_parser = parse_alpha)]
        b: f64,
        #[arg(long, default_value_t = 1000, value_parser = parse_count)]
        tables: usize,
        /// Expected counts from observed margins or from the known cell probabilities.
        #[arg(long, value_enum, default_value = "margins")]
        expected: ChisqExpectedArg,
        #[command(flatten)]
        sim: SimArgs,
    },
}

/// Parses `args` (including the program name), runs the command, and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Band(c) => cmd_band(c),
        Command::Plot(c) => cmd_plot(c),
        Command::LocalLevel(c) => cmd_local_level(c),
        Command::Table(c) => cmd_table(c),
        Command::Check(c) => cmd_check(c),
        Command::Simulate(c) => cmd_simulate(c),
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

fn report_eta(eta: Option<f64>, path: Option<&str>) {
    if let (Some(eta), Some(path)) = (eta, path) {
        eprintln!("eta={eta} path={path}");
    }
}

fn cmd_band(c: BandCmd) -> Result<(), CliError> {
    let tables = load_tables()?;
    let dist = c.band.dist.reference()?;
    let options = c.band.options();
    let data = c
        .data
        .as_deref()
        .map(|p| read_values(p, c.col.as_deref()))
        .transpose()?;
    let band = match (&data, c.n, c.neff) {
        (Some(x), _, _) => get_qq_band(x.len(), Some(x), &dist, &options, &tables)?,
        (None, Some(n), _) => get_qq_band(n, None, &dist, &options, &tables)?,
        (None, None, Some(neff)) => band_effective_n(neff, &dist, &options, &tables)?,
        (None, None, None) => unreachable!("clap requires a source"),
    };
    report_eta(band.eta, band.path.map(|p| p.as_str()));
    let text = match c.format {
        FormatArg::Json => band_json(&band),
        FormatArg::Csv => rows_csv(&band_rows(&band, data.as_deref())),
    };
    write_out(c.output.as_deref(), &text)
}

fn cmd_plot(c: PlotCmd) -> Result<(), CliError> {
    let tables = load_tables()?;
    let dist = c.band.dist.reference()?;
    let options = c.band.options();
    let x = read_values(&c.data, c.col.as_deref())?;
    let overlays = c
        .overlay
        .iter()
        .map(|p| read_values(p, c.col.as_deref()))
        .collect::<Result<Vec<_>, _>>()?;
    let band = match c.neff {
        Some(neff) => band_effective_n(neff, &dist, &options, &tables)?,
        None => get_qq_band(x.len(), Some(&x), &dist, &options, &tables)?,
    };
    report_eta(band.eta, band.path.map(|p| p.as_str()));
    let mut samples: Vec<&[f64]> = vec![&x];
    samples.extend(overlays.iter().map(Vec::as_slice));
    let labels = std::iter::once(&c.data)
        .chain(&c.overlay)
        .map(|p| p.display().to_string())
        .collect();
    let plot_options = PlotOptions {
        pp: c.pp,
        difference: c.difference,
        log10: c.log10,
        width: c.width,
        height: c.height,
        labels,
    };
    let spec = make_plot(&samples, &band, &plot_options)?;
    if let Some(p) = &c.table_out {
        write_out(Some(p), &rows_csv(&spec_rows(&spec)))?;
    }
    write_out(c.output.as_deref(), &emit_svg(&spec))
}

fn read_bounds(path: &Path) -> Result<Vec<f64>, CliError> {
    read_values(path, None)
}

fn cmd_local_level(c: LocalLevelCmd) -> Result<(), CliError> {
    if let Some(files) = &c.from_bounds {
        let h = read_bounds(&files[0])?;
        let level = match files.get(1) {
            Some(g) => global_level_two_sided(&h, &read_bounds(g)?)?,
            None => global_level_one_sided_exact(&h)?,
        };
        return write_out(None, &format!("{level}\n"));
    }
    let n = c.n.expect("clap requires n without --from-bounds");
    let query = LocalLevelQuery::new(n, c.alpha, c.side.into()).with_policy(c.policy.into());
    let tables = load_tables()?;
    let options = ResolveOptions {
        tol: c.tol.unwrap_or(ON_THE_FLY_TOL),
        ..ResolveOptions::default()
    };
    let resolved = resolve_eta_with(&query, &tables, &options)?;
    eprintln!("path={}", resolved.path.as_str());
    write_out(None, &format!("{}\n", resolved.eta))
}

fn parse_range(spec: &str) -> Result<(usize, usize, usize), CliError> {
    let bad = || CliError::Usage(format!("bad grid {spec:?}, expected start:end:k"));
    let parts: Vec<usize> = spec
        .split(':')
        .map(|s| s.parse().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [a, b, k] if a >= 1 && a <= b && k >= 1 => Ok((a, b, k)),
        _ => Err(bad()),
    }
}

/// Grid points of all ranges, sorted and deduplicated.
fn table_grid(linear: &[String], log: &[String]) -> Result<Vec<usize>, CliError> {
    let mut n = Vec::new();
    for g in linear {
        let (a, b, step) = parse_range(g)?;
        n.extend((a..=b).step_by(step));
    }
    for g in log {
        let (a, b, count) = parse_range(g)?;
        if count == 1 {
            n.push(a);
            continue;
        }
        let (la, lb) = ((a as f64).ln(), (b as f64).ln());
        n.extend((0..count).map(|i| {
            (la + (lb - la) * i as f64 / (count - 1) as f64)
                .exp()
                .round() as usize
        }));
    }
    n.sort_unstable();
    n.dedup();
    if n.is_empty() {
        return Err(CliError::Usage(
            "table needs --grid or --log-grid".to_string(),
        ));
    }
    Ok(n)
}

fn cmd_table(c: TableCmd) -> Result<(), CliError> {
    let grid = table_grid(&c.grid, &c.log_grid)?;
    let side: Side = c.side.into();
    let solve = |n: usize| {
        solve_local_level(
            &LocalLevelQuery::new(n, c.alpha, side).with_policy(Policy::Exact),
            c.tol,
        )
    };
    let workers = c.workers.min(grid.len());
    // largest n first so the slow points start early
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(grid[i]));
    let mut etas = vec![0.0; grid.len()];
    std::thread::scope(|scope| -> Result<(), CliError> {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let order = &order;
                let grid = &grid;
                let solve = &solve;
                scope.spawn(move || {
                    order
                        .iter()
                        .skip(w)
                        .step_by(workers)
                        .map(|&i| solve(grid[i]).map(|e| (i, e)))
                        .collect::<Result<Vec<_>, _>>()
                })
            })
            .collect();
        for h in handles {
            for (i, e) in h.join().expect("table worker panicked")? {
                etas[i] = e;
            }
        }
        Ok(())
    })?;
    let table = EtaTable::new(c.alpha, side, c.tol, grid.into_iter().zip(etas).collect())?;
    write_out(c.output.as_deref(), &format_table(&table))
}

fn cmd_check(c: CheckCmd) -> Result<(), CliError> {
    let tables = load_tables()?;
    let dist = c.band.dist.reference()?;
    let x = read_values(&c.data, c.col.as_deref())?;
    let band = get_qq_band(x.len(), Some(&x), &dist, &c.band.options(), &tables)?;
    report_eta(band.eta, band.path.map(|p| p.as_str()));
    let line = match band_check(&x, &band)? {
        Verdict::Inside => "inside\n".to_string(),
        Verdict::Exited { index, direction } => {
            let d = match direction {
                Direction::Low => "low",
                Direction::High => "high",
            };
            format!("exited index={index} direction={d}\n")
        }
    };
    write_out(None, &line)
}

fn json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn cmd_simulate(c: SimulateCmd) -> Result<(), CliError> {
    match c {
        SimulateCmd::Type1 {
            n,
            estimation,
            alpha,
            replicates,
            sim,
        } => {
            let tables = load_tables()?;
            let r = sim::type1_study(
                n,
                estimation.into(),
                alpha,
                replicates,
                sim.seed,
                sim.workers,
                &tables,
            )?;
            write_out(sim.output.as_deref(), &json(&r))
        }
        SimulateCmd::Coverage {
            n,
            alpha,
            method,
            side,
            estimation,
            dist,
            replicates,
            sim,
        } => {
            let tables = load_tables()?;
            let study = NullStudy {
                n,
                dist: dist.reference()?,
                estimation: estimation.into(),
                alpha,
                method: method.into(),
                side: side.into(),
            };
            let r = sim::null_study(&study, replicates, sim.seed, sim.workers, &tables)?;
            write_out(sim.output.as_deref(), &json(&r))
        }
        SimulateCmd::Power {
            n,
            df,
            alpha,
            estimation,
            replicates,
            sim,
        } => {
            let tables = load_tables()?;
            let r = sim::power_study(
                df,
                n,
                alpha,
                estimation.into(),
                replicates,
                sim.seed,
                sim.workers,
                &tables,
            )?;
            write_out(sim.output.as_deref(), &json(&r))
        }
        SimulateCmd::Chisq {
            s,
            a,
            b,
            tables,
            expected,
            sim,
        } => {
            let expected = match expected {
                ChisqExpectedArg::Margins => ChisqExpected::EstimatedMargins,
                ChisqExpectedArg::Fixed => ChisqExpected::FixedNull,
            };
            let config = ChisqConfig {
                s,
                a,
                b,
                tables,
                expected,
            };
            let p = sim::chisq_calibration_generate(&config, sim.seed)?;
            let mut text = String::with_capacity(24 * p.len());
            for v in p {
                text.push_str(&v.to_string());
                text.push('\n');
            }
            write_out(sim.output.as_deref(), &text)
        }
    }
}
