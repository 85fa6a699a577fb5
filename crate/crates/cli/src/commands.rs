//! The four verbs. Each returns the text it would print so that tests can
//! inspect output without spawning a process.

use std::f64::consts::PI;
use std::path::Path;

use conductance_spectrum::analysis::{b_trajectory, count_extrema, mode_shape, Segment, TrajectoryReport, DEFAULT_PLATEAU_TOL};
use conductance_spectrum::oracle::oracle_eigenvalue;
use conductance_spectrum::shooting::{lowest_modes, solve_eigenvalue};
use conductance_spectrum::{Environment, Ratio, TridiagonalOperator};
use serde::{Deserialize, Serialize};

use crate::args::{Format, GenArgs, SolveArgs, SweepArgs, TrajectoryArgs};
use crate::config::{positive, ConfigFile, DEFAULT_ALPHA, DEFAULT_SWEEP_MODES, DEFAULT_SWEEP_SEEDS, DEFAULT_TOL};
use crate::dist::DistSpec;
use crate::error::{CliError, Result};
use crate::plot::{Chart, Series};
use crate::report::{run_sweep, ConvergenceReport, SweepSettings};
use crate::table::{emit, num, opt, Table};

pub fn load_environment(path: &Path) -> Result<Environment> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Environment::from_json(&text).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn write_plot(dir: &Path, name: &str, chart: &Chart) -> std::result::Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, chart.to_svg()).map_err(|e| format!("{}: {e}", path.display()))
}

/// Plot failures are reported on stderr and never change the exit code.
fn write_plots(dir: &Path, charts: &[(&str, Chart)]) {
    for (name, chart) in charts {
        if let Err(e) = write_plot(dir, name, chart) {
            eprintln!("warning: plot not written: {e}");
        }
    }
}

pub fn cmd_gen(args: &GenArgs) -> Result<String> {
    let env = args
        .dist
        .environment(args.n, args.seed)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut text = env.to_json()?;
    text.push('\n');
    Ok(text)
}

/// One solved mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeRow {
    pub mode: usize,
    pub lambda: f64,
    /// `N²λ_j/(j²π²)`; absent for the constant mode.
    pub lambda_ratio: Option<f64>,
    pub extrema_count: usize,
    pub sup_shape: f64,
    pub sup_deriv: f64,
    pub residual: f64,
    pub terminal_defect: f64,
    /// `|λ_j − λ_j^oracle|`, with `--oracle`.
    pub oracle_dev: Option<f64>,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub n: usize,
    pub label: String,
    pub seed: Option<u64>,
    pub tol: f64,
    pub modes: Vec<ModeRow>,
    pub oracle_max_dev: Option<f64>,
}

impl SpectrumReport {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new([
            "mode",
            "lambda",
            "lambda_ratio",
            "extrema_count",
            "sup_shape",
            "sup_deriv",
            "residual",
            "oracle_dev",
        ]);
        for m in &self.modes {
            t.push(vec![
                m.mode.to_string(),
                num(m.lambda),
                opt(m.lambda_ratio),
                m.extrema_count.to_string(),
                num(m.sup_shape),
                num(m.sup_deriv),
                num(m.residual),
                opt(m.oracle_dev),
            ]);
        }
        t
    }
}

/// The lowest `count` modes (clamped to `N`), optionally checked against the
/// oracle.
pub fn solve_spectrum(env: &Environment, count: usize, tol: f64, plateau_tol: f64, oracle: bool) -> Result<SpectrumReport> {
    let pairs = lowest_modes(env, count, tol)?;
    let nf = env.n() as f64;
    let op = oracle.then(|| TridiagonalOperator::from_environment(env));
    let modes = pairs
        .into_iter()
        .map(|pair| {
            let shape = mode_shape(env, &pair)?;
            let j = pair.mode as f64;
            let oracle_dev = op
                .as_ref()
                .map(|op| (pair.lambda - oracle_eigenvalue(op, pair.mode, tol * op.gershgorin_bound())).abs());
            Ok(ModeRow {
                mode: pair.mode,
                lambda: pair.lambda,
                lambda_ratio: (pair.mode > 0).then(|| nf * nf * pair.lambda / (j * j * PI * PI)),
                extrema_count: count_extrema(&pair.values, plateau_tol).count,
                sup_shape: shape.sup_shape,
                sup_deriv: shape.sup_deriv,
                residual: pair.residual,
                terminal_defect: pair.terminal_defect,
                oracle_dev,
                values: pair.values,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let oracle_max_dev = oracle.then(|| modes.iter().filter_map(|m| m.oracle_dev).fold(0.0, f64::max));
    Ok(SpectrumReport {
        n: env.n(),
        label: env.label().to_string(),
        seed: env.seed(),
        tol,
        modes,
        oracle_max_dev,
    })
}

pub fn cmd_solve(args: &SolveArgs) -> Result<String> {
    let config = ConfigFile::load_optional(args.config.as_deref())?;
    let tol = positive("tol", args.tol.or(config.tol).unwrap_or(DEFAULT_TOL))?;
    let env = load_environment(&args.env)?;
    let count = args.modes.or(config.modes).unwrap_or(env.n());
    let plateau_tol = plateau(config.plateau_tol)?;
    let report = solve_spectrum(&env, count, tol, plateau_tol, args.oracle)?;
    if let Some(dev) = report.oracle_max_dev {
        eprintln!("oracle: max |λ − λ_oracle| = {dev:e}");
    }
    Ok(match args.format {
        Format::Json => serde_json::to_string_pretty(&report).map_err(conductance_spectrum::Error::from)? + "\n",
        Format::Csv => report.to_table().to_csv(),
    })
}

/// Config `plateau_tol`, finite and ≥ 0.
fn plateau(value: Option<f64>) -> Result<f64> {
    match value {
        None => Ok(DEFAULT_PLATEAU_TOL),
        Some(v) if v.is_finite() && v >= 0.0 => Ok(v),
        Some(v) => Err(CliError::Usage(format!("plateau_tol must be finite and ≥ 0, got {v}"))),
    }
}

pub fn resolve_sweep(args: &SweepArgs) -> Result<SweepSettings> {
    let config = ConfigFile::load_optional(args.config.as_deref())?;
    let dist = args.dist.or(config.dist).unwrap_or(DistSpec::Homogeneous);
    let n_list = args
        .n_list
        .clone()
        .or(config.n_list)
        .ok_or_else(|| CliError::Usage("--n-list is required (flag or config)".into()))?;
    if n_list.is_empty() {
        return Err(CliError::Usage("--n-list must not be empty".into()));
    }
    if let Some(&n) = n_list.iter().find(|&&n| n < 2) {
        return Err(CliError::Usage(format!("sweep sizes must be ≥ 2, got {n}")));
    }
    let seeds = args.seeds.or(config.seeds).unwrap_or(DEFAULT_SWEEP_SEEDS);
    if seeds == 0 {
        return Err(CliError::Usage("--seeds must be ≥ 1".into()));
    }
    let modes = args.modes.or(config.modes).unwrap_or(DEFAULT_SWEEP_MODES);
    if modes == 0 {
        return Err(CliError::Usage("--modes must be ≥ 1".into()));
    }
    let jobs = args.jobs.or(config.jobs);
    if jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be ≥ 1".into()));
    }
    Ok(SweepSettings {
        dist,
        n_list,
        seeds,
        modes,
        tol: positive("tol", args.tol.or(config.tol).unwrap_or(DEFAULT_TOL))?,
        plateau_tol: plateau(config.plateau_tol)?,
        jobs,
    })
}

fn sweep_charts(report: &ConvergenceReport) -> Vec<(&'static str, Chart)> {
    let seeds = report.settings.seed_list();
    let per_seed = |f: &dyn Fn(&crate::report::RowMetrics) -> f64| -> Vec<Series> {
        seeds
            .iter()
            .map(|&s| {
                let pts = report
                    .rows
                    .iter()
                    .filter(|r| r.seed == s)
                    .filter_map(|r| r.metrics.as_ref().map(|m| (r.n as f64, f(m))))
                    .collect();
                Series::line(format!("seed {s}"), pts).with_markers()
            })
            .collect()
    };
    let mut gap = per_seed(&|m| m.gap_ratio);
    gap.push(Series::line("limit 1", report.ladder.iter().map(|p| (p.n as f64, 1.0)).collect()).dashed());
    let mut out = vec![
        (
            "gap_ratio.svg",
            Chart {
                title: format!("N²λ₁/π² vs N ({})", report.settings.dist),
                x_label: "N".into(),
                y_label: "N²λ₁/π²".into(),
                log_x: true,
                series: gap,
            },
        ),
        (
            "sup_shape.svg",
            Chart {
                title: format!("sup|g₁ − h| vs N ({})", report.settings.dist),
                x_label: "N".into(),
                y_label: "sup|g₁ − h|".into(),
                log_x: true,
                series: per_seed(&|m| m.sup_shape),
            },
        ),
    ];
    let largest = report.rows.iter().filter(|r| r.metrics.is_some()).map(|r| (r.n, r.seed)).max_by_key(|&(n, s)| (n, std::cmp::Reverse(s)));
    if let Some((n, seed)) = largest {
        let solved = report
            .settings
            .dist
            .environment(n, seed)
            .and_then(|env| solve_eigenvalue(&env, 1, report.settings.tol));
        if let Ok(pair) = solved {
            let h = conductance_spectrum::analysis::cosine_mode(n, 1);
            let u = |x: usize| (x as f64 - 0.5) / n as f64;
            out.push((
                "eigenfunction_overlay.svg",
                Chart {
                    title: format!("g₁ and h at N = {n}, seed {seed}"),
                    x_label: "(x − 1/2)/N".into(),
                    y_label: "value".into(),
                    log_x: false,
                    series: vec![
                        Series::line("g₁", pair.values.iter().enumerate().map(|(i, &v)| (u(i + 1), v)).collect()),
                        Series::line("h", h.iter().enumerate().map(|(i, &v)| (u(i + 1), v)).collect()).dashed(),
                    ],
                },
            ));
        }
    }
    out
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<(String, ConvergenceReport)> {
    let settings = resolve_sweep(args)?;
    let report = run_sweep(&settings);
    for row in report.rows.iter().filter(|r| r.metrics.is_none()) {
        eprintln!(
            "warning: row N={} seed={} failed: {}",
            row.n,
            row.seed,
            row.error.as_deref().unwrap_or("unknown error")
        );
    }
    if report.failed_rows() == report.rows.len() {
        return Err(CliError::AllRowsFailed { rows: report.rows.len() });
    }
    if let Some(slope) = report.gap_slope {
        eprintln!("log-log slope of median λ₁ vs N: {slope:.4}");
    }
    if let Some(path) = &args.report {
        let text = serde_json::to_string_pretty(&report).map_err(conductance_spectrum::Error::from)? + "\n";
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))?;
    }
    if let Some(dir) = &args.plot {
        write_plots(dir, &sweep_charts(&report));
    }
    Ok((report.to_table().to_csv(), report))
}

fn segment_code(s: Segment) -> &'static str {
    match s {
        Segment::First => "1",
        Segment::Second => "2",
        Segment::Third => "3",
        Segment::Outside => "",
    }
}

fn ratio_field(r: Ratio) -> String {
    match r {
        Ratio::Finite(v) => num(v),
        Ratio::Infinity => "inf".into(),
    }
}

/// One CSV row per site `x = 1..=N+1`. The deviation compares `A` with the
/// profile in segment 2 and `B` elsewhere.
pub fn trajectory_table(env: &Environment, report: &TrajectoryReport) -> Table {
    let cumulative = env.cumulative_resistance();
    let mut t = Table::new(["x", "B", "A", "segment", "profile_value", "deviation"]);
    for x in 1..=report.n + 1 {
        let seg = report.segment_of(x);
        let profile = report.profile(seg, x, &cumulative);
        let compared = if seg == Segment::Second { report.avals[x - 1] } else { report.bvals[x - 1] };
        let deviation = profile.map(|p| match compared {
            Ratio::Finite(v) => (v - p).abs(),
            Ratio::Infinity => f64::INFINITY,
        });
        t.push(vec![
            x.to_string(),
            ratio_field(report.bvals[x - 1]),
            ratio_field(report.avals[x - 1]),
            segment_code(seg).into(),
            opt(profile),
            opt(deviation),
        ]);
    }
    t
}

fn trajectory_chart(env: &Environment, report: &TrajectoryReport) -> Chart {
    let cumulative = env.cumulative_resistance();
    let root = report.alpha.sqrt();
    // poles make B unbounded; show a window around the profiles
    let clip = 8.0 * root;
    let nf = report.n as f64;
    let mut measured = [Vec::new(), Vec::new(), Vec::new()];
    let mut profiles = [Vec::new(), Vec::new(), Vec::new()];
    for x in 1..=report.n + 1 {
        let seg = report.segment_of(x);
        let k = match seg {
            Segment::First => 0,
            Segment::Second => 1,
            Segment::Third => 2,
            Segment::Outside => continue,
        };
        let value = if k == 1 { report.avals[x - 1] } else { report.bvals[x - 1] };
        let u = (x - 1) as f64 / nf;
        if let (Ratio::Finite(v), Some(p)) = (value, report.profile(seg, x, &cumulative)) {
            if v.abs() <= clip {
                measured[k].push((u, v));
            }
            if p.abs() <= clip {
                profiles[k].push((u, p));
            }
        }
    }
    let names = ["B, segment 1", "A, segment 2", "B, segment 3"];
    let mut series = Vec::new();
    for k in 0..3 {
        series.push(Series::line(names[k], std::mem::take(&mut measured[k])));
        series.push(Series::line(format!("profile {}", k + 1), std::mem::take(&mut profiles[k])).dashed());
    }
    Chart {
        title: format!("Rescaled trajectory, N = {}, α = {:.4}", report.n, report.alpha),
        x_label: "(x − 1)/N".into(),
        y_label: "B or A".into(),
        log_x: false,
        series,
    }
}

pub fn cmd_trajectory(args: &TrajectoryArgs) -> Result<(String, TrajectoryReport)> {
    let config = ConfigFile::load_optional(args.config.as_deref())?;
    let alpha = positive("alpha", args.alpha.or(config.alpha).unwrap_or(DEFAULT_ALPHA))?;
    let env = load_environment(&args.env)?;
    let report = b_trajectory(&env, alpha)?;
    eprintln!(
        "τ₁={:?} τ₂={:?} τ={:?} τ′={:?}; deviations {} {} {}{}",
        report.tau1,
        report.tau2,
        report.tau,
        report.tau_prime,
        report.sup_dev_seg1,
        report.sup_dev_seg2,
        report.sup_dev_seg3,
        if report.pole_in_segment.iter().any(|&p| p) { " (pole inside a segment)" } else { "" }
    );
    if let Some(dir) = &args.plot {
        write_plots(dir, &[("trajectory.svg", trajectory_chart(&env, &report))]);
    }
    Ok((trajectory_table(&env, &report).to_csv(), report))
}

/// Dispatch a parsed command line and write its primary output.
pub fn run(cli: &crate::args::Cli) -> Result<()> {
    use crate::args::Command;
    match &cli.command {
        Command::Gen(a) => emit(a.out.as_deref(), &cmd_gen(a)?),
        Command::Solve(a) => emit(a.out.as_deref(), &cmd_solve(a)?),
        Command::Sweep(a) => emit(a.out.as_deref(), &cmd_sweep(a)?.0),
        Command::Trajectory(a) => emit(a.out.as_deref(), &cmd_trajectory(a)?.0),
    }
}
