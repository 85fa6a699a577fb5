//! Convergence sweeps over `(N, seed)` and their summary statistics.

use std::f64::consts::PI;
use std::time::Instant;

use conductance_spectrum::analysis::{count_extrema, mode_shape};
use conductance_spectrum::shooting::lowest_modes;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::DistSpec;
use crate::table::{num, opt, Table};

/// One sweep job.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub dist: DistSpec,
    pub n_list: Vec<usize>,
    /// Seeds `0..seeds`; a homogeneous sweep uses seed 0 only.
    pub seeds: u64,
    /// Highest mode `K0` compared with the cosine modes.
    pub modes: usize,
    pub tol: f64,
    /// Relative plateau tolerance of the extremum counts.
    pub plateau_tol: f64,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl SweepSettings {
    pub fn seed_list(&self) -> Vec<u64> {
        if self.dist.depends_on_seed() {
            (0..self.seeds).collect()
        } else {
            vec![0]
        }
    }
}

/// Quantities measured on one environment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowMetrics {
    /// `N²λ₁/π²`.
    pub gap_ratio: f64,
    /// `λ_j` for `j = 1..=K0` (fewer when `N ≤ K0`).
    pub lambdas: Vec<f64>,
    /// `N²λ_j/(j²π²)`.
    pub lambda_j_ratios: Vec<f64>,
    /// `sup|g_j − h_j|` for `j = 1..=K0`.
    pub mode_shapes: Vec<f64>,
    /// Sign changes of `g_j` counted as local extrema.
    pub extrema_counts: Vec<usize>,
    pub sup_shape: f64,
    pub sup_deriv: f64,
    pub delta0: f64,
    pub delta1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub seed: u64,
    /// `None` when the row failed; `error` then holds the reason.
    pub metrics: Option<RowMetrics>,
    pub error: Option<String>,
    /// Seconds spent on the row. Excluded from determinism guarantees.
    pub wall_time: f64,
}

/// Medians over the successful seeds at one `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderPoint {
    pub n: usize,
    pub ok_rows: usize,
    pub median_gap: f64,
    pub median_gap_ratio: f64,
    pub median_abs_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub settings: SweepSettings,
    /// Sorted by `N`, then seed.
    pub rows: Vec<ConvergenceRow>,
    pub ladder: Vec<LadderPoint>,
    /// Least-squares slope of `log median λ₁` against `log N`.
    pub gap_slope: Option<f64>,
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    })
}

/// Ordinary least-squares slope of `y` on `x`; `None` with fewer than two
/// distinct abscissae.
pub fn ls_slope(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn measure(settings: &SweepSettings, n: usize, seed: u64) -> conductance_spectrum::Result<RowMetrics> {
    let (dist, modes, tol) = (&settings.dist, settings.modes, settings.tol);
    let env = dist.environment(n, seed)?;
    let lln = env.lln_diagnostics()?;
    let k0 = modes.min(n - 1);
    let pairs = lowest_modes(&env, k0 + 1, tol)?;
    let nf = n as f64;
    let mut lambdas = Vec::with_capacity(k0);
    let mut ratios = Vec::with_capacity(k0);
    let mut shapes = Vec::with_capacity(k0);
    let mut extrema = Vec::with_capacity(k0);
    let mut sup_shape = f64::NAN;
    let mut sup_deriv = f64::NAN;
    for pair in &pairs[1..] {
        let j = pair.mode as f64;
        let shape = mode_shape(&env, pair)?;
        if pair.mode == 1 {
            sup_shape = shape.sup_shape;
            sup_deriv = shape.sup_deriv;
        }
        lambdas.push(pair.lambda);
        ratios.push(nf * nf * pair.lambda / (j * j * PI * PI));
        shapes.push(shape.sup_shape);
        extrema.push(count_extrema(&pair.values, settings.plateau_tol).count);
    }
    Ok(RowMetrics {
        gap_ratio: ratios.first().copied().unwrap_or(f64::NAN),
        lambdas,
        lambda_j_ratios: ratios,
        mode_shapes: shapes,
        extrema_counts: extrema,
        sup_shape,
        sup_deriv,
        delta0: lln.delta0,
        delta1: lln.delta1,
    })
}

fn run_rows(settings: &SweepSettings) -> Vec<ConvergenceRow> {
    let jobs: Vec<(usize, u64)> = settings
        .n_list
        .iter()
        .flat_map(|&n| settings.seed_list().into_iter().map(move |s| (n, s)))
        .collect();
    let mut rows: Vec<ConvergenceRow> = jobs
        .par_iter()
        .map(|&(n, seed)| {
            let start = Instant::now();
            let result = measure(settings, n, seed);
            let wall_time = start.elapsed().as_secs_f64();
            match result {
                Ok(m) => ConvergenceRow { n, seed, metrics: Some(m), error: None, wall_time },
                Err(e) => ConvergenceRow { n, seed, metrics: None, error: Some(e.to_string()), wall_time },
            }
        })
        .collect();
    rows.sort_by_key(|r| (r.n, r.seed));
    rows
}

/// Run every `(N, seed)` row, in a dedicated pool of `jobs` threads if given.
/// `N < 2` rows fail individually.
pub fn run_sweep(settings: &SweepSettings) -> ConvergenceReport {
    let rows = match settings.jobs {
        Some(j) => match rayon::ThreadPoolBuilder::new().num_threads(j).build() {
            Ok(pool) => pool.install(|| run_rows(settings)),
            Err(_) => run_rows(settings),
        },
        None => run_rows(settings),
    };
    let mut ns: Vec<usize> = settings.n_list.clone();
    ns.sort_unstable();
    ns.dedup();
    let ladder: Vec<LadderPoint> = ns
        .iter()
        .filter_map(|&n| {
            let ok: Vec<&RowMetrics> = rows.iter().filter(|r| r.n == n).filter_map(|r| r.metrics.as_ref()).collect();
            let mut gaps: Vec<f64> = ok.iter().filter_map(|m| m.lambdas.first().copied()).collect();
            let mut ratios: Vec<f64> = ok.iter().map(|m| m.gap_ratio).collect();
            let mut devs: Vec<f64> = ok.iter().map(|m| (m.gap_ratio - 1.0).abs()).collect();
            Some(LadderPoint {
                n,
                ok_rows: ok.len(),
                median_gap: median(&mut gaps)?,
                median_gap_ratio: median(&mut ratios)?,
                median_abs_deviation: median(&mut devs)?,
            })
        })
        .collect();
    let fit: Vec<(f64, f64)> = ladder
        .iter()
        .filter(|p| p.median_gap > 0.0)
        .map(|p| ((p.n as f64).ln(), p.median_gap.ln()))
        .collect();
    ConvergenceReport {
        settings: settings.clone(),
        rows,
        ladder,
        gap_slope: ls_slope(&fit),
    }
}

impl ConvergenceReport {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.metrics.is_none()).count()
    }

    /// One line per row; per-mode columns run over `j = 1..=K0`.
    pub fn to_table(&self) -> Table {
        let k0 = self.settings.modes;
        let mut header: Vec<String> = ["n", "seed", "status", "gap_ratio"].map(String::from).to_vec();
        header.extend((1..=k0).map(|j| format!("lambda_ratio_{j}")));
        header.extend((1..=k0).map(|j| format!("sup_shape_{j}")));
        header.extend(["sup_shape", "sup_deriv", "delta0", "delta1", "wall_time"].map(String::from));
        let mut t = Table::new(header);
        for r in &self.rows {
            let mut row = vec![r.n.to_string(), r.seed.to_string()];
            match &r.metrics {
                Some(m) => {
                    row.push("ok".into());
                    row.push(num(m.gap_ratio));
                    row.extend((0..k0).map(|i| opt(m.lambda_j_ratios.get(i).copied())));
                    row.extend((0..k0).map(|i| opt(m.mode_shapes.get(i).copied())));
                    row.extend([num(m.sup_shape), num(m.sup_deriv), num(m.delta0), num(m.delta1)]);
                }
                None => {
                    row.push("failed".into());
                    row.extend(std::iter::repeat_n(String::new(), 1 + 2 * k0 + 4));
                }
            }
            row.push(num(r.wall_time));
            t.push(row);
        }
        t
    }
}
