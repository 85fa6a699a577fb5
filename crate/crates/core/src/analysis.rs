//! Diagnostics on computed eigenpairs: local-extrema counting, comparison
//! with the homogeneous cosine modes, and the rescaled ratio trajectory
//! `B(x) = N·b(λ, x)` at `λ = α/N²` against its tangent profiles.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::environment::Environment;
use crate::error::{Error, Result};
use crate::shooting::{EigenPair, Ratio};

/// Default relative plateau tolerance for [`count_extrema`].
pub const DEFAULT_PLATEAU_TOL: f64 = 1e-9;

/// Distance kept from `π/2` when comparing the first segment.
pub const SEGMENT1_MARGIN: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Max,
    Min,
}

/// A local extremum on the plateau `⟦start, end⟧` (1-based sites).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extremum {
    pub start: usize,
    pub end: usize,
    pub kind: ExtremumKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtremaReport {
    pub extrema: Vec<Extremum>,
    pub count: usize,
    /// `count + 1`; a function with `count = 0` is strictly monotone.
    pub monotone_degree: usize,
}

/// Local extrema of `f` in `⟦2, N−1⟧`.
///
/// `f` admits a local maximum on `⟦b, c⟧` if it is constant there with
/// `f(b−1) < f(b)` and `f(c) > f(c+1)` (minimum: reversed). Neighbours are
/// equal when `|f(x+1) − f(x)| ≤ plateau_tol · max(|f(x)|, |f(x+1)|)`;
/// plateaus are the maximal runs of equal neighbours. The scale is local so
/// that exponentially small tails of localised modes keep their sign pattern.
pub fn count_extrema(f: &[f64], plateau_tol: f64) -> ExtremaReport {
    let n = f.len();
    let tol = plateau_tol.max(0.0);
    let equal = |a: f64, b: f64| (b - a).abs() <= tol * a.abs().max(b.abs());
    let mut extrema = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end + 1 < n && equal(f[end], f[end + 1]) {
            end += 1;
        }
        if start > 0 && end + 1 < n {
            let rises_in = f[start - 1] < f[start];
            let falls_out = f[end] > f[end + 1];
            let kind = match (rises_in, falls_out) {
                (true, true) => Some(ExtremumKind::Max),
                (false, false) => Some(ExtremumKind::Min),
                _ => None,
            };
            if let Some(kind) = kind {
                extrema.push(Extremum {
                    start: start + 1,
                    end: end + 1,
                    kind,
                });
            }
        }
        start = end + 1;
    }
    let count = extrema.len();
    ExtremaReport {
        extrema,
        count,
        monotone_degree: count + 1,
    }
}

/// `h_j(x) = cos(jπ(x − 1/2)/N)` for `x = 1..=N`.
pub fn cosine_mode(n: usize, j: usize) -> Vec<f64> {
    (1..=n)
        .map(|x| (j as f64 * PI * (x as f64 - 0.5) / n as f64).cos())
        .collect()
}

/// `2(1 − cos(jπ/N))`, the eigenvalues of the homogeneous chain, evaluated
/// as `4 sin²(jπ/2N)` to avoid cancellation for small `j/N`.
pub fn homogeneous_eigenvalue(n: usize, j: usize) -> f64 {
    let s = (j as f64 * PI / (2.0 * n as f64)).sin();
    4.0 * s * s
}

/// Weighted gradient `(c∇g)(x) = c(x−1,x)(g(x) − g(x−1))` for
/// `x = 1..=N+1`, zero at both ends.
pub fn weighted_gradient(env: &Environment, g: &[f64]) -> Vec<f64> {
    let n = g.len();
    (1..=n + 1)
        .map(|x| {
            if x == 1 || x == n + 1 {
                0.0
            } else {
                env.conductance(x - 1) * (g[x - 1] - g[x - 2])
            }
        })
        .collect()
}

/// Shape statistics of one mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeShape {
    pub mode: usize,
    /// `sup_x |g_j(x) − h_j(x)|` with `g_j(1) = 1` and no rescaling.
    pub sup_shape: f64,
    /// `sup_x |g_j(x)·h_j(1) − h_j(x)|`: the same distance after matching
    /// the normalisation of `h_j`.
    pub sup_shape_normalized: f64,
    /// `sup_x |N(c∇g_j)(x) − N(∇h_j)(x)|`.
    pub sup_deriv: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeReport {
    pub n: usize,
    pub modes: Vec<ModeShape>,
}

impl ShapeReport {
    pub fn mode(&self, j: usize) -> Option<&ModeShape> {
        self.modes.iter().find(|m| m.mode == j)
    }

    /// Principal-mode shape distance (0 when mode 1 is absent).
    pub fn sup_shape(&self) -> f64 {
        self.mode(1).map_or(0.0, |m| m.sup_shape)
    }

    pub fn sup_deriv(&self) -> f64 {
        self.mode(1).map_or(0.0, |m| m.sup_deriv)
    }
}

/// Compare one eigenpair with `h_j`.
pub fn mode_shape(env: &Environment, pair: &EigenPair) -> Result<ModeShape> {
    let n = env.n();
    if pair.values.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: pair.values.len(),
        });
    }
    let j = pair.mode;
    let h = cosine_mode(n, j);
    let g = &pair.values;
    let sup = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0_f64, f64::max);
    let sup_shape = sup(&mut g.iter().zip(&h).map(|(a, b)| (a - b).abs()));
    let h1 = h[0];
    let sup_shape_normalized = sup(&mut g.iter().zip(&h).map(|(a, b)| (a * h1 - b).abs()));
    let nf = n as f64;
    let grad = weighted_gradient(env, g);
    let sup_deriv = sup(&mut (2..=n).map(|x| {
        let dh = h[x - 1] - h[x - 2];
        (nf * grad[x - 1] - nf * dh).abs()
    }));
    Ok(ModeShape {
        mode: j,
        sup_shape,
        sup_shape_normalized,
        sup_deriv,
    })
}

/// Shape statistics for every pair with `mode ≤ k0`.
pub fn shape_report(env: &Environment, pairs: &[EigenPair], k0: usize) -> Result<ShapeReport> {
    let n = env.n();
    if k0 >= n {
        return Err(Error::InvalidParameter {
            field: "k0",
            reason: format!("highest compared mode must be < n = {n}, got {k0}"),
        });
    }
    let modes = pairs
        .iter()
        .filter(|p| p.mode <= k0)
        .map(|p| mode_shape(env, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(ShapeReport { n, modes })
}

/// `g(x) = [1 − r(x−1,x)·B(x)/N]·g(x−1)`, `g(1) = 1`, from a rescaled ratio
/// trajectory `B(1..=N)` (extra trailing entries are ignored). Returns
/// `None` if some `B(x)` is `∞̄`.
pub fn eigenfunction_from_ratios(env: &Environment, b: &[Ratio]) -> Option<Vec<f64>> {
    let n = env.n();
    let nf = n as f64;
    let mut g = Vec::with_capacity(n);
    g.push(1.0);
    for x in 2..=n {
        let bx = b.get(x - 1)?.finite()?;
        let prev = g[x - 2];
        g.push((1.0 - env.resistance(x - 1) * bx / nf) * prev);
    }
    Some(g)
}

/// Deterministic twin of the ratio trajectory for the homogeneous chain at
/// `λ̄ = 2(1 − cos(π/N))`: `B̄(1) = 0`, `B̄(x+1) = B̄(x)/(1 − B̄(x)/N) + Nλ̄`,
/// for `x = 1..=N+1`.
pub fn reference_ratio_trajectory(n: usize) -> Vec<Ratio> {
    let nf = n as f64;
    let shift = nf * homogeneous_eigenvalue(n, 1);
    let mut out = Vec::with_capacity(n + 1);
    let mut b = Ratio::Finite(0.0);
    out.push(b);
    for _ in 1..=n {
        b = rescaled_step(b, 1.0, nf, shift);
        out.push(b);
    }
    out
}

/// `B ↦ B / (1 − r·B/N) + shift` on `ℝ ∪ {∞̄}`.
fn rescaled_step(b: Ratio, r: f64, nf: f64, shift: f64) -> Ratio {
    match b {
        Ratio::Infinity => Ratio::Finite(-nf / r + shift),
        Ratio::Finite(v) => {
            let denom = 1.0 - r * v / nf;
            if denom == 0.0 {
                Ratio::Infinity
            } else {
                let out = v / denom + shift;
                if out.is_finite() {
                    Ratio::Finite(out)
                } else {
                    Ratio::Infinity
                }
            }
        }
    }
}

/// Which segment a site belongs to in a [`TrajectoryReport`] (first match
/// wins where segments share an endpoint).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Segment {
    First,
    Second,
    Third,
    Outside,
}

/// Rescaled trajectory and its comparison with the tangent profiles
/// `√α·tan(√α·u)`, `α^{−1/2}·tan(π/2 − (x−1)√α/N)` and
/// `√α·tan(√α·r(1,x−1)/N)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub n: usize,
    pub alpha: f64,
    /// `B(x)` for `x = 1..=N+1` (index `x − 1`).
    pub bvals: Vec<Ratio>,
    /// `A(x) = 1/B(x)`.
    pub avals: Vec<Ratio>,
    /// First `x` with `√α·r(1,x)/N ≥ π/4`.
    pub tau1: Option<usize>,
    /// Last `x` with `√α·r(1,x)/N ≤ 3π/4`.
    pub tau2: Option<usize>,
    /// One before the first `x` with `A(x) ≤ −2α^{−1/2}`.
    pub tau: Option<usize>,
    /// Last `x ∈ ⟦τ₂, N+1⟧` with `B(x) ≤ 2√α`.
    pub tau_prime: Option<usize>,
    pub sup_dev_seg1: f64,
    pub sup_dev_seg2: f64,
    pub sup_dev_seg3: f64,
    /// Whether each segment contained at least one compared site.
    pub segment_defined: [bool; 3],
    /// `B` (segments 1 and 3) or `A` (segment 2) hit `∞̄` inside a segment;
    /// the deviation of that segment is then `∞`.
    pub pole_in_segment: [bool; 3],
}

impl TrajectoryReport {
    /// `b(λ, N+1) = B(N+1)/N`.
    pub fn terminal_ratio(&self) -> Ratio {
        match self.bvals[self.n] {
            Ratio::Finite(v) => Ratio::Finite(v / self.n as f64),
            Ratio::Infinity => Ratio::Infinity,
        }
    }

    fn seg1_range(&self) -> Option<(usize, usize)> {
        let tau1 = self.tau1?;
        let root = self.alpha.sqrt();
        let limit = FRAC_PI_2 - SEGMENT1_MARGIN;
        let last = (1..=tau1)
            .take_while(|&x| root * (x - 1) as f64 / self.n as f64 <= limit)
            .last()?;
        Some((1, last))
    }

    fn seg2_range(&self) -> Option<(usize, usize)> {
        let start = self.tau1?;
        let mut end = self.tau2?;
        if let Some(t) = self.tau {
            end = end.min(t);
        }
        (start <= end).then_some((start, end))
    }

    fn seg3_range(&self) -> Option<(usize, usize)> {
        let start = self.tau2?;
        let end = self.tau_prime?;
        (start <= end).then_some((start, end))
    }

    /// Segment membership of site `x ∈ ⟦1, N+1⟧`.
    pub fn segment_of(&self, x: usize) -> Segment {
        let inside = |r: Option<(usize, usize)>| r.is_some_and(|(a, b)| a <= x && x <= b);
        if inside(self.seg1_range()) {
            Segment::First
        } else if inside(self.seg2_range()) {
            Segment::Second
        } else if inside(self.seg3_range()) {
            Segment::Third
        } else {
            Segment::Outside
        }
    }

    /// Profile value compared at site `x` in the given segment.
    pub fn profile(&self, segment: Segment, x: usize, cumulative: &[f64]) -> Option<f64> {
        let root = self.alpha.sqrt();
        let nf = self.n as f64;
        match segment {
            Segment::First => Some(root * (root * (x - 1) as f64 / nf).tan()),
            Segment::Second => Some((FRAC_PI_2 - (x - 1) as f64 * root / nf).tan() / root),
            Segment::Third => {
                let r = if x >= 2 { cumulative[x - 2] } else { 0.0 };
                Some(root * (root * r / nf).tan())
            }
            Segment::Outside => None,
        }
    }
}

/// Run `B(1) = 0`, `B(x+1) = B(x)/(1 − r(x−1,x)·B(x)/N) + α/N` and compare it
/// with the three tangent profiles.
pub fn b_trajectory(env: &Environment, alpha: f64) -> Result<TrajectoryReport> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidParameter {
            field: "alpha",
            reason: format!("α must be finite and > 0, got {alpha}"),
        });
    }
    let n = env.n();
    if n < 2 {
        return Err(Error::TooFewSites {
            what: "trajectory",
            min: 2,
            n,
        });
    }
    let nf = n as f64;
    let root = alpha.sqrt();
    let shift = alpha / nf;

    let mut bvals = Vec::with_capacity(n + 1);
    let mut b = Ratio::Finite(0.0);
    bvals.push(b);
    for x in 1..=n {
        // r(0,1) is arbitrary; B(1) = 0 makes it irrelevant.
        let r = if x == 1 { 1.0 } else { env.resistance(x - 1) };
        b = rescaled_step(b, r, nf, shift);
        bvals.push(b);
    }
    let avals: Vec<Ratio> = bvals.iter().map(|b| b.recip()).collect();

    // cumulative[x-1] = r(1, x)
    let cumulative = env.cumulative_resistance();
    let scaled = |x: usize| root * cumulative[x - 1] / nf;
    let tau1 = (1..=n).find(|&x| scaled(x) >= FRAC_PI_4);
    let tau2 = (1..=n).rev().find(|&x| scaled(x) <= 3.0 * FRAC_PI_4);
    let a_floor = -2.0 / root;
    let tau = (1..=n)
        .find(|&x| matches!(avals[x - 1], Ratio::Finite(a) if a <= a_floor))
        .map(|x| x - 1);
    let tau_prime = tau2.and_then(|t2| {
        (t2..=n + 1)
            .rev()
            .find(|&x| matches!(bvals[x - 1], Ratio::Finite(v) if v <= 2.0 * root))
    });

    let mut report = TrajectoryReport {
        n,
        alpha,
        bvals,
        avals,
        tau1,
        tau2,
        tau,
        tau_prime,
        sup_dev_seg1: 0.0,
        sup_dev_seg2: 0.0,
        sup_dev_seg3: 0.0,
        segment_defined: [false; 3],
        pole_in_segment: [false; 3],
    };

    let ranges = [report.seg1_range(), report.seg2_range(), report.seg3_range()];
    let segments = [Segment::First, Segment::Second, Segment::Third];
    let mut devs = [0.0_f64; 3];
    for k in 0..3 {
        let Some((a, b)) = ranges[k] else { continue };
        report.segment_defined[k] = true;
        for x in a..=b {
            let value = if k == 1 { report.avals[x - 1] } else { report.bvals[x - 1] };
            let profile = report
                .profile(segments[k], x, &cumulative)
                .expect("segment is defined");
            match value {
                Ratio::Finite(v) => devs[k] = devs[k].max((v - profile).abs()),
                Ratio::Infinity => {
                    report.pole_in_segment[k] = true;
                    devs[k] = f64::INFINITY;
                }
            }
        }
    }
    report.sup_dev_seg1 = devs[0];
    report.sup_dev_seg2 = devs[1];
    report.sup_dev_seg3 = devs[2];
    Ok(report)
}
