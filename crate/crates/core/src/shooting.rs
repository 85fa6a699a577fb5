//! Angle recursion for the eigenproblem `Δ^(c) g = −λ g` and the bisection
//! solver built on it.
//!
//! For `λ > 0` let `f^λ` solve the eigen-equation from the left with
//! `f(0) = f(1) = 1`. The ratio `b(λ, x) = −(c∇f)(x) / f(x−1)` obeys the
//! Möbius step
//!
//! ```text
//! b(λ, x+1) = Ξ^{c(x−1,x)}(λ, b(λ, x)),   Ξ^c(λ, b) = b / (1 − b/c) + λ,
//! ```
//!
//! started from `b(λ, 1) = 0`, with `b = ∞̄` whenever `f(x−1) = 0`. Lifting
//! `b` to an angle `θ` with `tan θ = b` that never decreases gives a phase
//! which is continuous and strictly increasing in `λ`; `λ` is the `k`-th
//! eigenvalue exactly when `θ(λ, N+1) = kπ`.
//!
//! The angle is stored as `(b, branch)` with `θ = branch·π + arctan b`
//! (`arctan ∞̄ = π/2`), so it is never formed as a float during the solve.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::environment::Environment;
use crate::error::{Error, Result};
use crate::operator::{apply_generator, TridiagonalOperator};

/// Relative bisection tolerance used when none is given.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Bisection gives up after this many halvings.
pub const MAX_BISECTION_ITERATIONS: usize = 200;

/// A point of the one-point compactification `ℝ ∪ {∞̄}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Ratio {
    Finite(f64),
    Infinity,
}

impl Ratio {
    /// `arctan b ∈ (−π/2, π/2)`, or `π/2` for `∞̄`.
    pub fn angle(self) -> f64 {
        match self {
            Ratio::Finite(b) => b.atan(),
            Ratio::Infinity => FRAC_PI_2,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Ratio::Finite(b) => Some(b),
            Ratio::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Ratio::Infinity)
    }

    /// `1/b` with `1/0 = ∞̄` and `1/∞̄ = 0`.
    pub fn recip(self) -> Ratio {
        match self {
            Ratio::Infinity => Ratio::Finite(0.0),
            Ratio::Finite(0.0) => Ratio::Infinity,
            Ratio::Finite(b) => Ratio::Finite(1.0 / b),
        }
    }

    fn from_float(v: f64) -> Ratio {
        if v.is_finite() {
            Ratio::Finite(v)
        } else {
            Ratio::Infinity
        }
    }
}

/// `θ = branch·π + arctan(ratio)`, so `θ ∈ (branch·π − π/2, branch·π + π/2]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleState {
    pub ratio: Ratio,
    pub branch: u64,
}

impl AngleState {
    /// `θ = 0`.
    pub const ORIGIN: AngleState = AngleState {
        ratio: Ratio::Finite(0.0),
        branch: 0,
    };

    pub fn new(ratio: Ratio, branch: u64) -> Self {
        AngleState { ratio, branch }
    }

    /// The angle as a float. Only for reporting.
    pub fn theta(&self) -> f64 {
        self.branch as f64 * PI + self.ratio.angle()
    }

    /// Whether `θ ≥ k·π`, decided without forming `θ`.
    pub fn at_least_multiple_of_pi(&self, k: u64) -> bool {
        match self.branch.cmp(&k) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => match self.ratio {
                Ratio::Infinity => true,
                Ratio::Finite(b) => b >= 0.0,
            },
        }
    }

    /// Number of positive integers `m` with `m·π < θ`.
    pub fn multiples_of_pi_below(&self) -> u64 {
        let above_branch_base = match self.ratio {
            Ratio::Infinity => true,
            Ratio::Finite(b) => b > 0.0,
        };
        if above_branch_base {
            self.branch
        } else {
            self.branch.saturating_sub(1)
        }
    }
}

fn check_conductance(c: f64) -> Result<()> {
    if c.is_finite() && c > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            field: "c",
            reason: format!("conductance must be finite and > 0, got {c}"),
        })
    }
}

fn check_positive_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            field: "lambda",
            reason: format!("λ must be finite and > 0, got {lambda}"),
        })
    }
}

/// The Möbius step without argument checks. Returns the image and whether
/// `b` lies strictly beyond the pole (`b > c` or `b = ∞̄`), i.e. whether the
/// underlying solution changes sign across the step.
#[inline]
fn xi_raw(c: f64, lambda: f64, b: Ratio) -> (Ratio, bool) {
    match b {
        Ratio::Infinity => (Ratio::Finite(lambda - c), true),
        Ratio::Finite(b) => {
            // c − b has the exact sign of c − b in IEEE arithmetic.
            let slack = c - b;
            if slack == 0.0 {
                (Ratio::Infinity, false)
            } else {
                (Ratio::from_float(b / (slack / c) + lambda), slack < 0.0)
            }
        }
    }
}

/// `Ξ^c(λ, b) = b / (1 − b/c) + λ` on `ℝ ∪ {∞̄}`: the pole `b = c` maps to
/// `∞̄` and `∞̄` maps to `λ − c`.
pub fn xi_step(c: f64, lambda: f64, b: Ratio) -> Result<Ratio> {
    check_conductance(c)?;
    Ok(xi_raw(c, lambda, b).0)
}

/// Closed interval of fixed points of `b ↦ Ξ^c(λ, b)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedInterval {
    pub lo: f64,
    pub hi: f64,
}

impl FixedInterval {
    pub fn contains(&self, b: Ratio) -> bool {
        matches!(b, Ratio::Finite(v) if self.lo <= v && v <= self.hi)
    }
}

/// Fixed points of `Ξ^c(λ, ·)`: the roots of `b² − λb + λc`. Empty for
/// `0 < λ < 4c`, the single point `λ/2` at `λ = 4c`, and `[0, 0]` at `λ = 0`.
pub fn fixed_interval(c: f64, lambda: f64) -> Result<Option<FixedInterval>> {
    check_conductance(c)?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidParameter {
            field: "lambda",
            reason: format!("λ must be finite and ≥ 0, got {lambda}"),
        });
    }
    if lambda == 0.0 {
        return Ok(Some(FixedInterval { lo: 0.0, hi: 0.0 }));
    }
    let disc = lambda * lambda - 4.0 * lambda * c;
    if disc < 0.0 {
        return Ok(None);
    }
    let root = disc.sqrt();
    let hi = 0.5 * (lambda + root);
    // product of the roots is λc
    let lo = if root == 0.0 { hi } else { lambda * c / hi };
    Ok(Some(FixedInterval { lo, hi }))
}

/// One step of the angle map: the smallest `θ′ ≥ θ + π·1{tan θ ∈ I(λ,c)}`
/// with `tan θ′ = Ξ^c(λ, tan θ)`.
///
/// Between the fixed points `Ξ(b) ≥ b`, and beyond the pole but outside them
/// `Ξ(b) < b`; either way the branch advances exactly once when `b > c` or
/// `b = ∞̄`, and stays put otherwise. The branch is therefore decided by the
/// sign of `c − b` alone.
pub fn phi_step(c: f64, lambda: f64, state: AngleState) -> Result<AngleState> {
    check_conductance(c)?;
    check_positive_lambda(lambda)?;
    Ok(phi_raw(c, lambda, state))
}

#[inline]
fn phi_raw(c: f64, lambda: f64, state: AngleState) -> AngleState {
    let (ratio, crossed) = xi_raw(c, lambda, state.ratio);
    AngleState {
        ratio,
        branch: state.branch + u64::from(crossed),
    }
}

/// Conductance used by the step from `x` to `x + 1`: `c(x−1, x)`, with the
/// arbitrary first-step value `c(0, 1) = 1`.
#[inline]
fn step_conductance(env: &Environment, x: usize) -> f64 {
    if x == 1 {
        1.0
    } else {
        env.conductance(x - 1)
    }
}

/// `θ(λ, x)` for `x = 1..=N+1`, starting from `θ(λ, 1) = 0`.
pub fn angle_trajectory(env: &Environment, lambda: f64) -> Result<Vec<AngleState>> {
    check_positive_lambda(lambda)?;
    let n = env.n();
    let mut out = Vec::with_capacity(n + 1);
    let mut state = AngleState::ORIGIN;
    out.push(state);
    for x in 1..=n {
        state = phi_raw(step_conductance(env, x), lambda, state);
        out.push(state);
    }
    Ok(out)
}

/// `θ(λ, N+1)` together with the number of eigenvalues in `(0, λ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerminalAngle {
    pub state: AngleState,
    pub count: usize,
}

impl TerminalAngle {
    pub fn theta(&self) -> f64 {
        self.state.theta()
    }
}

fn terminal_state(env: &Environment, lambda: f64) -> AngleState {
    (1..=env.n()).fold(AngleState::ORIGIN, |state, x| {
        phi_raw(step_conductance(env, x), lambda, state)
    })
}

pub fn terminal_angle(env: &Environment, lambda: f64) -> Result<TerminalAngle> {
    check_positive_lambda(lambda)?;
    let state = terminal_state(env, lambda);
    Ok(TerminalAngle {
        state,
        count: state.multiples_of_pi_below() as usize,
    })
}

/// An eigenpair of `−Δ^(c)` with `g(1) = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub mode: usize,
    pub lambda: f64,
    pub values: Vec<f64>,
    /// `‖Δg + λg‖∞`.
    pub residual: f64,
    /// `|b(λ, N+1)|`, the distance of `tan θ(λ, N+1)` from zero at the
    /// returned `λ` (`∞` if the terminal ratio is `∞̄`).
    pub terminal_defect: f64,
}

/// The solution of the eigen-equation with `g(1) = 1` at parameter `λ`,
/// propagated from the left through the weighted gradient
/// `(c∇g)(x+1) = −λ Σ_{k≤x} g(k)`.
///
/// Exact in exact arithmetic, but rounding is amplified wherever `λ` exceeds
/// the local `4c`; [`solve_eigenvalue`] uses [`twisted_eigenfunction`].
pub fn reconstruct_eigenfunction(env: &Environment, lambda: f64) -> Vec<f64> {
    let n = env.n();
    let mut g = Vec::with_capacity(n);
    g.push(1.0);
    let mut mass = 0.0;
    for x in 1..n {
        mass += g[x - 1];
        let flux = -lambda * mass;
        g.push(g[x - 1] + env.resistance(x) * flux);
    }
    g
}

/// Eigenvector assembled from the ratio recursion run from both ends.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistedVector {
    /// `g(1..=N)` with `g(1) = 1`.
    pub values: Vec<f64>,
    /// Site `k` where the two halves meet.
    pub twist: usize,
    /// `γ_k = b(k+1) + b̂(k) − λ`, the residual of the eigen-equation at `k`
    /// when `g(k) = 1`.
    pub mismatch: f64,
}

/// Left ratios `b(x)`, `x = 1..=N+1`, and right ratios `b̂(x)`, `x = 1..=N+1`.
///
/// `b̂(x) = (c∇v)(x)/v(x)` for the solution `v` that is reflecting at `N`;
/// it obeys the mirrored step `b̂(x) = Ξ^{c(x,x+1)}(λ, b̂(x+1))` from
/// `b̂(N+1) = 0`.
fn two_sided_ratios(env: &Environment, lambda: f64) -> (Vec<Ratio>, Vec<Ratio>) {
    let n = env.n();
    let mut left = Vec::with_capacity(n + 1);
    let mut b = Ratio::Finite(0.0);
    left.push(b);
    for x in 1..=n {
        b = xi_raw(step_conductance(env, x), lambda, b).0;
        left.push(b);
    }
    let mut right = vec![Ratio::Finite(0.0); n + 1];
    for x in (1..=n).rev() {
        let c = if x == n { 1.0 } else { env.conductance(x) };
        right[x - 1] = xi_raw(c, lambda, right[x]).0;
    }
    (left, right)
}

/// Eigenvector at (an approximation of) an eigenvalue `λ`.
///
/// Left of the twist `k` the vector follows `g(x) = [1 − r(x−1,x) b(x)] g(x−1)`,
/// right of it the mirrored recursion; both are evaluated outward from `k`, so
/// every entry is a product of independently computed ratios and no error is
/// amplified. A near-zero entry is stepped over with a two-site product.
/// `k` minimises `|γ_k|`, the only equation the vector can violate.
/// Returns `None` if some factor vanishes (an exact zero entry) or `g(1) = 0`.
pub fn twisted_eigenfunction(env: &Environment, lambda: f64) -> Option<TwistedVector> {
    let n = env.n();
    let (left, right) = two_sided_ratios(env, lambda);
    let (twist, mismatch) = (1..=n)
        .filter_map(|k| match (left[k], right[k - 1]) {
            (Ratio::Finite(a), Ratio::Finite(b)) => Some((k, a + b - lambda)),
            _ => None,
        })
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))?;
    // factor(r, b) = 1 − r·b, infinite at b = ∞̄ (the next entry vanishes)
    let factor = |r: f64, b: Ratio| match b {
        Ratio::Finite(b) => 1.0 - r * b,
        Ratio::Infinity => f64::INFINITY,
    };
    let mut w = vec![0.0; n];
    w[twist - 1] = 1.0;
    // Leftward with ρ(x) = w(x)/w(x−1) = 1 − r(x−1,x) b(x). Across a dip at
    // x−1 the tiny w(x−1) carries an absolute error that ρ(x−1) would
    // magnify, so w(x−2) comes from ρ(x−1)ρ(x) = ρ(x−1)(1 − λr(x−1,x)) −
    // r(x−1,x) b(x−1) instead.
    let mut x = twist;
    while x >= 2 {
        let rho = factor(env.resistance(x - 1), left[x - 1]);
        if x >= 3 {
            let prev = factor(env.resistance(x - 2), left[x - 2]);
            if let Ratio::Finite(b_prev) = left[x - 2] {
                if rho.abs() > 1.0 && prev.abs() < 1.0 {
                    let r = env.resistance(x - 1);
                    w[x - 2] = w[x - 1] / rho;
                    w[x - 3] = w[x - 1] / (prev * (1.0 - lambda * r) - r * b_prev);
                    x -= 2;
                    continue;
                }
            }
        }
        w[x - 2] = w[x - 1] / rho;
        x -= 1;
    }
    // Rightward with σ(x) = w(x)/w(x+1) = 1 − r(x,x+1) b̂(x+1), mirrored.
    let mut x = twist;
    while x < n {
        let sigma = factor(env.resistance(x), right[x]);
        if x + 1 < n {
            let next = factor(env.resistance(x + 1), right[x + 1]);
            if let Ratio::Finite(b_next) = right[x + 1] {
                if sigma.abs() > 1.0 && next.abs() < 1.0 {
                    let r = env.resistance(x);
                    w[x] = w[x - 1] / sigma;
                    w[x + 1] = w[x - 1] / (next * (1.0 - lambda * r) - r * b_next);
                    x += 2;
                    continue;
                }
            }
        }
        w[x] = w[x - 1] / sigma;
        x += 1;
    }
    let first = w[0];
    if first == 0.0 || !w.iter().all(|v| v.is_finite()) {
        return None;
    }
    w.iter_mut().for_each(|v| *v /= first);
    // a mode localised far from x = 1 can overflow once g(1) = 1
    if !w.iter().all(|v| v.is_finite()) {
        return None;
    }
    Some(TwistedVector {
        values: w,
        twist,
        mismatch,
    })
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            field: "tol",
            reason: format!("tolerance must be finite and > 0, got {tol}"),
        })
    }
}

fn residual_of(env: &Environment, lambda: f64, g: &[f64]) -> f64 {
    let dg = apply_generator(env, g).expect("length matches by construction");
    dg.iter()
        .zip(g)
        .map(|(d, v)| (d + lambda * v).abs())
        .fold(0.0, f64::max)
}

/// `λ_j` by bisection on `θ(λ, N+1) ≥ jπ` over `(0, Gershgorin bound]`,
/// followed by eigenvector reconstruction at the converged value
/// ([`twisted_eigenfunction`], falling back to the one-sided recursion).
pub fn solve_eigenvalue(env: &Environment, mode: usize, tol: f64) -> Result<EigenPair> {
    check_tol(tol)?;
    let n = env.n();
    if mode == 0 || mode >= n {
        return Err(Error::ModeOutOfRange { mode, n });
    }
    let target = mode as u64;
    let mut hi = TridiagonalOperator::from_environment(env).gershgorin_bound();
    let top = terminal_state(env, hi);
    if !top.at_least_multiple_of_pi(target) {
        return Err(Error::Bracket {
            mode,
            lambda: hi,
            theta: top.theta(),
        });
    }
    let mut lo = 0.0_f64;
    let mut iterations = 0;
    while hi - lo > tol * hi {
        if iterations == MAX_BISECTION_ITERATIONS {
            return Err(Error::BisectionLimit {
                mode,
                iterations,
                lo,
                hi,
            });
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if terminal_state(env, mid).at_least_multiple_of_pi(target) {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    let lambda = 0.5 * (lo + hi);
    let values = twisted_eigenfunction(env, lambda)
        .map(|t| t.values)
        .unwrap_or_else(|| reconstruct_eigenfunction(env, lambda));
    let residual = residual_of(env, lambda, &values);
    let terminal_defect = terminal_state(env, lambda)
        .ratio
        .finite()
        .map_or(f64::INFINITY, f64::abs);
    Ok(EigenPair {
        mode,
        lambda,
        values,
        residual,
        terminal_defect,
    })
}

/// Mode 0: `λ_0 = 0`, `g_0 ≡ 1`.
pub fn ground_state(env: &Environment) -> EigenPair {
    EigenPair {
        mode: 0,
        lambda: 0.0,
        values: vec![1.0; env.n()],
        residual: 0.0,
        terminal_defect: 0.0,
    }
}

/// Modes `0..count` (clamped to `N`), solved in parallel, in mode order.
pub fn lowest_modes(env: &Environment, count: usize, tol: f64) -> Result<Vec<EigenPair>> {
    check_tol(tol)?;
    let count = count.min(env.n());
    if count == 0 {
        return Ok(Vec::new());
    }
    let mut pairs = vec![ground_state(env)];
    let rest: Result<Vec<EigenPair>> = (1..count)
        .into_par_iter()
        .map(|j| solve_eigenvalue(env, j, tol))
        .collect();
    pairs.extend(rest?);
    Ok(pairs)
}

/// All `N` eigenpairs, strictly increasing in `λ`.
pub fn full_spectrum(env: &Environment, tol: f64) -> Result<Vec<EigenPair>> {
    lowest_modes(env, env.n(), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::ResistanceLaw;

    /// `θ′ = inf{θ′ ≥ θ + π·1_I(tan θ) : tan θ′ = Ξ(tan θ)}` evaluated with
    /// floats directly from the definition.
    fn phi_by_definition(c: f64, lambda: f64, theta: f64) -> f64 {
        let b = theta.tan();
        let jump = fixed_interval(c, lambda)
            .unwrap()
            .is_some_and(|i| i.lo <= b && b <= i.hi);
        let lower = theta + if jump { PI } else { 0.0 };
        let target = (b / (1.0 - b / c) + lambda).atan();
        // smallest target + kπ ≥ lower
        let k = ((lower - target) / PI).ceil();
        target + k * PI
    }

    #[test]
    fn xi_examples() {
        assert_eq!(xi_step(1.0, 0.0, Ratio::Finite(0.0)).unwrap(), Ratio::Finite(0.0));
        assert_eq!(xi_step(1.0, 4.0, Ratio::Finite(2.0)).unwrap(), Ratio::Finite(2.0));
        assert_eq!(xi_step(1.0, 1.0, Ratio::Finite(1.0)).unwrap(), Ratio::Infinity);
        assert_eq!(xi_step(2.0, 0.5, Ratio::Infinity).unwrap(), Ratio::Finite(-1.5));
        assert!(xi_step(0.0, 1.0, Ratio::Finite(0.0)).is_err());
        assert!(xi_step(-1.0, 1.0, Ratio::Finite(0.0)).is_err());
    }

    #[test]
    fn fixed_interval_examples() {
        assert_eq!(fixed_interval(1.0, 3.0).unwrap(), None);
        assert_eq!(fixed_interval(1.0, 4.0).unwrap(), Some(FixedInterval { lo: 2.0, hi: 2.0 }));
        let i = fixed_interval(1.0, 5.0).unwrap().unwrap();
        let s5 = 5f64.sqrt();
        assert!((i.lo - (5.0 - s5) / 2.0).abs() < 1e-15);
        assert!((i.hi - (5.0 + s5) / 2.0).abs() < 1e-15);
        assert_eq!(fixed_interval(1.0, 0.0).unwrap(), Some(FixedInterval { lo: 0.0, hi: 0.0 }));
        assert!(fixed_interval(0.0, 1.0).is_err());
        assert!(fixed_interval(1.0, -1.0).is_err());
    }

    #[test]
    fn fixed_points_are_fixed() {
        for (c, lambda) in [(1.0, 4.5), (0.3, 7.0), (2.0, 8.0), (0.5, 30.0)] {
            let i = fixed_interval(c, lambda).unwrap().unwrap();
            for b in [i.lo, i.hi] {
                let image = xi_step(c, lambda, Ratio::Finite(b)).unwrap().finite().unwrap();
                assert!((image - b).abs() <= 1e-12 * b, "c={c} λ={lambda}");
            }
            assert!(i.lo > c);
        }
    }

    #[test]
    fn phi_examples() {
        for (c, lambda) in [(1.0, 0.3), (5.0, 2.0), (0.2, 10.0)] {
            let s = phi_step(c, lambda, AngleState::ORIGIN).unwrap();
            assert_eq!(s.branch, 0);
            assert!((s.theta() - lambda.atan()).abs() < 1e-15);
        }
        let s = phi_step(1.0, 4.0, AngleState::new(Ratio::Finite(2.0), 0)).unwrap();
        assert_eq!(s, AngleState::new(Ratio::Finite(2.0), 1));
        assert!((s.theta() - (PI + 2f64.atan())).abs() < 1e-15);

        let s = phi_step(1.0, 0.1, AngleState::new(Ratio::Infinity, 0)).unwrap();
        assert_eq!(s.branch, 1);
        assert!((s.ratio.finite().unwrap() + 0.9).abs() < 1e-15);
        assert!((s.theta() - (PI + (-0.9f64).atan())).abs() < 1e-15);

        assert!(phi_step(1.0, 0.0, AngleState::ORIGIN).is_err());
        assert!(phi_step(1.0, -2.0, AngleState::ORIGIN).is_err());
    }

    #[test]
    fn phi_matches_its_definition() {
        let mut rng = crate::environment::edge_rng(2024, 0);
        use rand::Rng;
        let mut checked = 0;
        for _ in 0..20_000 {
            let c: f64 = rng.random_range(0.05..3.0);
            let lambda: f64 = rng.random_range(0.01..12.0);
            let a: f64 = rng.random_range(-1.55..1.55);
            let branch: u64 = rng.random_range(0..5);
            let state = AngleState::new(Ratio::Finite(a.tan()), branch);
            let b = a.tan();
            // stay away from the pole and the fixed points, where the float
            // version of the definition is ill-conditioned
            if (b - c).abs() < 1e-6 {
                continue;
            }
            if let Some(i) = fixed_interval(c, lambda).unwrap() {
                if (b - i.lo).abs() < 1e-6 || (b - i.hi).abs() < 1e-6 {
                    continue;
                }
            }
            let got = phi_step(c, lambda, state).unwrap().theta();
            let want = phi_by_definition(c, lambda, state.theta());
            assert!((got - want).abs() < 1e-9, "c={c} λ={lambda} b={b}: {got} vs {want}");
            checked += 1;
        }
        assert!(checked > 19_000);
    }

    #[test]
    fn counting_helpers() {
        let s = AngleState::new(Ratio::Finite(0.0), 2);
        assert!(s.at_least_multiple_of_pi(2));
        assert!(!s.at_least_multiple_of_pi(3));
        assert_eq!(s.multiples_of_pi_below(), 1);
        let s = AngleState::new(Ratio::Finite(-0.5), 2);
        assert!(!s.at_least_multiple_of_pi(2));
        assert_eq!(s.multiples_of_pi_below(), 1);
        let s = AngleState::new(Ratio::Infinity, 2);
        assert!(s.at_least_multiple_of_pi(2));
        assert_eq!(s.multiples_of_pi_below(), 2);
        assert_eq!(AngleState::ORIGIN.multiples_of_pi_below(), 0);
    }

    #[test]
    fn terminal_angle_examples() {
        let env = Environment::homogeneous(8).unwrap();
        let lam1 = 2.0 * (1.0 - (PI / 8.0).cos());
        let t = terminal_angle(&env, lam1).unwrap();
        assert!((t.theta() - PI).abs() < 1e-9, "{}", t.theta());

        let lam = |i: f64| 2.0 * (1.0 - (i * PI / 8.0).cos());
        let t = terminal_angle(&env, 0.5 * (lam(2.0) + lam(3.0))).unwrap();
        assert_eq!(t.count, 2);

        let env = Environment::iid(30, ResistanceLaw::Uniform { low: 0.5, high: 1.5 }, 4).unwrap();
        let hi = TridiagonalOperator::from_environment(&env).gershgorin_bound();
        assert_eq!(terminal_angle(&env, 1e-15 * hi).unwrap().count, 0);
        assert_eq!(terminal_angle(&env, hi).unwrap().count, 29);
        assert!(terminal_angle(&env, 0.0).is_err());
    }

    #[test]
    fn angle_trajectory_starts_at_origin() {
        let env = Environment::homogeneous(5).unwrap();
        let traj = angle_trajectory(&env, 0.7).unwrap();
        assert_eq!(traj.len(), 6);
        assert_eq!(traj[0], AngleState::ORIGIN);
        assert_eq!(traj[1].ratio, Ratio::Finite(0.7));
        assert_eq!(traj[5], terminal_angle(&env, 0.7).unwrap().state);
    }

    #[test]
    fn two_site_eigenpair() {
        let env = Environment::homogeneous(2).unwrap();
        let p = solve_eigenvalue(&env, 1, DEFAULT_TOL).unwrap();
        assert!((p.lambda - 2.0).abs() < 1e-11);
        assert_eq!(p.values[0], 1.0);
        assert!((p.values[1] + 1.0).abs() < 1e-11);
    }

    #[test]
    fn three_site_characteristic_polynomial() {
        // −Δ = [[1,−1,0],[−1,3,−2],[0,−2,2]]; det(A − λI) = −λ(λ² − 6λ + 6)
        let env = Environment::from_conductances(vec![1.0, 2.0]).unwrap();
        let s3 = 3f64.sqrt();
        let roots = [3.0 - s3, 3.0 + s3];
        for (j, root) in roots.iter().enumerate() {
            let p = solve_eigenvalue(&env, j + 1, DEFAULT_TOL).unwrap();
            assert!((p.lambda - root).abs() <= 1e-11 * root, "{} vs {root}", p.lambda);
            assert!(p.residual < 1e-10);
        }
    }

    #[test]
    fn homogeneous_principal_mode() {
        let n = 16;
        let env = Environment::homogeneous(n).unwrap();
        let p = solve_eigenvalue(&env, 1, DEFAULT_TOL).unwrap();
        let exact = 2.0 * (1.0 - (PI / n as f64).cos());
        assert!((p.lambda - exact).abs() <= 1e-10 * exact);
        let scale = (PI / (2.0 * n as f64)).cos();
        for (i, g) in p.values.iter().enumerate() {
            let h = (PI * (i as f64 + 0.5) / n as f64).cos() / scale;
            assert!((g - h).abs() < 1e-8);
        }
        assert!(p.terminal_defect < 1e-9);
    }

    #[test]
    fn homogeneous_four_site_spectrum() {
        let env = Environment::homogeneous(4).unwrap();
        let spec = full_spectrum(&env, DEFAULT_TOL).unwrap();
        let s2 = 2f64.sqrt();
        let want = [0.0, 2.0 - s2, 2.0, 2.0 + s2];
        assert_eq!(spec.len(), 4);
        for (p, w) in spec.iter().zip(want) {
            assert!((p.lambda - w).abs() <= 1e-11 * w.max(1.0));
        }
        assert_eq!(spec[0].values, vec![1.0; 4]);
        assert_eq!(spec[0].residual, 0.0);
    }

    #[test]
    fn single_site_spectrum() {
        let env = Environment::homogeneous(1).unwrap();
        let spec = full_spectrum(&env, DEFAULT_TOL).unwrap();
        assert_eq!(spec.len(), 1);
        assert_eq!(spec[0].lambda, 0.0);
        assert_eq!(spec[0].values, vec![1.0]);
    }

    #[test]
    fn argument_errors() {
        let env = Environment::homogeneous(5).unwrap();
        assert!(matches!(solve_eigenvalue(&env, 0, 1e-12), Err(Error::ModeOutOfRange { .. })));
        assert!(matches!(solve_eigenvalue(&env, 5, 1e-12), Err(Error::ModeOutOfRange { .. })));
        assert!(solve_eigenvalue(&env, 1, 0.0).is_err());
        assert!(full_spectrum(&env, -1.0).is_err());
    }

    #[test]
    fn reconstruction_solves_interior_equations() {
        let env = Environment::iid(20, ResistanceLaw::LogNormal { mu: 0.0, sigma: 1.0 }, 8).unwrap();
        let lambda = 0.37;
        let g = reconstruct_eigenfunction(&env, lambda);
        let dg = apply_generator(&env, &g).unwrap();
        for x in 0..19 {
            assert!((dg[x] + lambda * g[x]).abs() < 1e-10 * (1.0 + g[x].abs()));
        }
    }
}
