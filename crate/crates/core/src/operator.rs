//! The generator `Δ^(c)` with reflecting boundary, its Dirichlet form, and
//! the symmetric tridiagonal matrix of `−Δ^(c)`.
//!
//! Inner products are taken in `L²(μ_N)` with the uniform weight `1/N`.

use crate::environment::Environment;
use crate::error::{Error, Result};
use crate::sum::ordered_sum;

/// The matrix of `−Δ^(c)`: `diag(x) = c(x−1,x) + c(x,x+1)` (boundary
/// conductances zero) and `offdiag(x) = −c(x,x+1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TridiagonalOperator {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl TridiagonalOperator {
    pub fn from_environment(env: &Environment) -> Self {
        let n = env.n();
        let diag = (1..=n)
            .map(|x| env.conductance(x - 1) + env.conductance(x))
            .collect();
        let offdiag = env.conductances().iter().map(|c| -c).collect();
        TridiagonalOperator { diag, offdiag }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// Upper bound on the spectrum: the largest Gershgorin row radius,
    /// `max_x diag(x) + |offdiag(x−1)| + |offdiag(x)| = 2·max_x diag(x)`.
    pub fn gershgorin_bound(&self) -> f64 {
        (0..self.n())
            .map(|i| {
                let left = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 };
                let right = self.offdiag.get(i).map_or(0.0, |v| v.abs());
                self.diag[i] + left + right
            })
            .fold(0.0, f64::max)
    }

    /// Matrix-vector product `(−Δ^(c)) f`.
    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n(), f)?;
        let n = self.n();
        Ok((0..n)
            .map(|i| {
                let mut acc = self.diag[i] * f[i];
                if i > 0 {
                    acc += self.offdiag[i - 1] * f[i - 1];
                }
                if i + 1 < n {
                    acc += self.offdiag[i] * f[i + 1];
                }
                acc
            })
            .collect())
    }
}

fn check_len(n: usize, f: &[f64]) -> Result<()> {
    if f.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: f.len(),
        });
    }
    Ok(())
}

/// `(Δ^(c) f)(x) = (c∇f)(x+1) − (c∇f)(x)` with `(c∇f)(1) = (c∇f)(N+1) = 0`.
pub fn apply_generator(env: &Environment, f: &[f64]) -> Result<Vec<f64>> {
    let n = env.n();
    check_len(n, f)?;
    // flux[x] = (c∇f)(x) for x = 1..=N+1, stored at index x - 1
    let flux: Vec<f64> = (1..=n + 1)
        .map(|x| {
            if x == 1 || x == n + 1 {
                0.0
            } else {
                env.conductance(x - 1) * (f[x - 1] - f[x - 2])
            }
        })
        .collect();
    Ok((0..n).map(|i| flux[i + 1] - flux[i]).collect())
}

/// `⟨f, g⟩_{μ_N} = (1/N) Σ f(x) g(x)`.
pub fn inner_product(f: &[f64], g: &[f64]) -> Result<f64> {
    check_len(f.len(), g)?;
    let n = f.len();
    if n == 0 {
        return Ok(0.0);
    }
    Ok(ordered_sum(f.iter().zip(g).map(|(a, b)| a * b), n) / n as f64)
}

/// `Var_{μ_N}(f) = ⟨f, f⟩ − ⟨f, 1⟩²`, evaluated as the centred second moment.
pub fn variance(f: &[f64]) -> f64 {
    let n = f.len();
    if n == 0 {
        return 0.0;
    }
    let mean = ordered_sum(f.iter().copied(), n) / n as f64;
    ordered_sum(f.iter().map(|v| (v - mean) * (v - mean)), n) / n as f64
}

/// `E_N(f) = (1/N) Σ_{x<N} c(x,x+1) (f(x+1) − f(x))²`.
pub fn dirichlet_form(env: &Environment, f: &[f64]) -> Result<f64> {
    let n = env.n();
    check_len(n, f)?;
    let terms = env
        .conductances()
        .iter()
        .zip(f.windows(2))
        .map(|(c, w)| c * (w[1] - w[0]) * (w[1] - w[0]));
    Ok(ordered_sum(terms, n.saturating_sub(1)) / n as f64)
}

/// `E_N(f) / Var_{μ_N}(f)`; an upper bound for the spectral gap.
pub fn rayleigh_quotient(env: &Environment, f: &[f64]) -> Result<f64> {
    let energy = dirichlet_form(env, f)?;
    let var = variance(f);
    if var <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(energy / var)
}
