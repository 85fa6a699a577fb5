//! Reference eigensolver for `−Δ^(c)` that shares nothing with the angle
//! recursion: Sturm-sequence counts on the tridiagonal matrix, bisection for
//! the eigenvalues, inverse iteration for the eigenvectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::environment::Environment;
use crate::error::{Error, Result};
use crate::operator::TridiagonalOperator;

/// Pivots smaller than `PIVOT_GUARD · (1 + |λ| + ‖A‖)` are replaced by
/// `−PIVOT_GUARD · (1 + |λ| + ‖A‖)` in the Sturm recurrence.
pub const PIVOT_GUARD: f64 = f64::EPSILON * f64::EPSILON;

/// Upper limit on inverse-iteration sweeps per eigenvector.
pub const MAX_INVERSE_ITERATIONS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SturmCount {
    pub lambda: f64,
    /// Eigenvalues strictly below `lambda`.
    pub negcount: usize,
}

/// Number of negative pivots of the `LDLᵀ` factorisation of `A − λI`.
pub fn sturm_count(op: &TridiagonalOperator, lambda: f64) -> SturmCount {
    let diag = op.diag();
    let off = op.offdiag();
    let scale = 1.0 + lambda.abs() + op.gershgorin_bound();
    let guard = PIVOT_GUARD * scale;
    let mut negcount = 0;
    let mut d = 0.0_f64;
    for i in 0..diag.len() {
        d = if i == 0 {
            diag[0] - lambda
        } else {
            (diag[i] - lambda) - off[i - 1] * off[i - 1] / d
        };
        if d.abs() < guard {
            d = -guard;
        }
        if d < 0.0 {
            negcount += 1;
        }
    }
    SturmCount { lambda, negcount }
}

/// Eigenvalue and eigenvector (normalised so that the first entry is 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OraclePair {
    pub lambda: f64,
    pub vector: Vec<f64>,
}

/// The `index`-th smallest eigenvalue (0-based) by bisection on the count,
/// to absolute width `abs_tol`.
pub fn oracle_eigenvalue(op: &TridiagonalOperator, index: usize, abs_tol: f64) -> f64 {
    let bound = op.gershgorin_bound();
    let mut lo = -1e-3 * bound - f64::MIN_POSITIVE;
    let mut hi = bound * (1.0 + 1e-12) + f64::MIN_POSITIVE;
    while hi - lo > abs_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(op, mid).negcount > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// LU factors of a shifted tridiagonal matrix with partial pivoting; the
/// upper factor has up to two superdiagonals.
struct TridiagonalLu {
    lower: Vec<f64>,
    d: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    fn factor(op: &TridiagonalOperator, shift: f64, tiny: f64) -> Self {
        let n = op.n();
        let mut d: Vec<f64> = op.diag().iter().map(|v| v - shift).collect();
        let mut du: Vec<f64> = op.offdiag().to_vec();
        let dl: Vec<f64> = op.offdiag().to_vec();
        let mut u2 = vec![0.0; n.saturating_sub(2)];
        let mut lower = vec![0.0; n.saturating_sub(1)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let m = dl[i] / d[i];
                lower[i] = m;
                d[i + 1] -= m * du[i];
            } else {
                // swap rows i and i+1
                let m = d[i] / dl[i];
                lower[i] = m;
                swapped[i] = true;
                d[i] = dl[i];
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - m * d[i + 1];
                if i + 2 < n {
                    u2[i] = du[i + 1];
                    du[i + 1] *= -m;
                }
            }
        }
        if let Some(last) = d.last_mut() {
            if *last == 0.0 {
                *last = tiny;
            }
        }
        TridiagonalLu {
            lower,
            d,
            u1: du,
            u2,
            swapped,
        }
    }

    fn solve(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                rhs.swap(i, i + 1);
                rhs[i + 1] -= self.lower[i] * rhs[i];
            } else {
                rhs[i + 1] -= self.lower[i] * rhs[i];
            }
        }
        for i in (0..n).rev() {
            let mut v = rhs[i];
            if i + 1 < n {
                v -= self.u1[i] * rhs[i + 1];
            }
            if i + 2 < n {
                v -= self.u2[i] * rhs[i + 2];
            }
            rhs[i] = v / self.d[i];
        }
    }
}

fn normalize_inf(v: &mut [f64]) {
    let m = v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    if m > 0.0 {
        v.iter_mut().for_each(|x| *x /= m);
    }
}

fn residual_inf(op: &TridiagonalOperator, lambda: f64, v: &[f64]) -> f64 {
    let av = op.apply(v).expect("same length");
    av.iter()
        .zip(v)
        .map(|(a, x)| (a - lambda * x).abs())
        .fold(0.0, f64::max)
}

/// Inverse iteration at shift `lambda`, returning a vector with `‖v‖∞ = 1`
/// once `‖Av − λv‖∞ ≤ (tol + 64·N·ε)·‖A‖`, where `tol` is the relative
/// accuracy of the shift.
pub fn inverse_iteration(
    op: &TridiagonalOperator,
    index: usize,
    lambda: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    let n = op.n();
    if n == 1 {
        return Ok(vec![1.0]);
    }
    let norm = op.gershgorin_bound().max(f64::MIN_POSITIVE);
    let tiny = f64::EPSILON * norm;
    let lu = TridiagonalLu::factor(op, lambda, tiny);
    let target = (tol + 64.0 * n as f64 * f64::EPSILON) * norm;

    // alternating-sign ramp
    let mut v: Vec<f64> = (0..n)
        .map(|i| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            s * (1.0 + i as f64 / n as f64)
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(index as u64);
    let mut last = f64::INFINITY;
    for _ in 0..MAX_INVERSE_ITERATIONS {
        lu.solve(&mut v);
        if v.iter().any(|x| !x.is_finite()) {
            v = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            continue;
        }
        normalize_inf(&mut v);
        let res = residual_inf(op, lambda, &v);
        if res <= target {
            return Ok(v);
        }
        if res >= 0.5 * last {
            // stagnating: restart from a random vector
            v = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            last = f64::INFINITY;
        } else {
            last = res;
        }
    }
    Err(Error::InverseIteration {
        index,
        lambda,
        iterations: MAX_INVERSE_ITERATIONS,
    })
}

/// All `N` eigenpairs; eigenvalues to `tol · λ_max` where `λ_max` is the
/// Gershgorin bound.
pub fn oracle_spectrum(env: &Environment, tol: f64) -> Result<Vec<OraclePair>> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParameter {
            field: "tol",
            reason: format!("tolerance must be finite and > 0, got {tol}"),
        });
    }
    let op = TridiagonalOperator::from_environment(env);
    let n = op.n();
    if n == 1 {
        return Ok(vec![OraclePair {
            lambda: 0.0,
            vector: vec![1.0],
        }]);
    }
    let abs_tol = tol * op.gershgorin_bound();
    (0..n)
        .into_par_iter()
        .map(|index| {
            let lambda = oracle_eigenvalue(&op, index, abs_tol);
            let mut vector = inverse_iteration(&op, index, lambda, tol)?;
            let first = vector[0];
            vector.iter_mut().for_each(|x| *x /= first);
            Ok(OraclePair { lambda, vector })
        })
        .collect()
}
