//! Conductance environments on the segment `⟦1, N⟧`.
//!
//! An [`Environment`] stores the `N − 1` edge conductances `c(x, x+1)`;
//! resistances `r(x, x+1) = 1 / c(x, x+1)` are derived on demand. The
//! invariant measure is uniform (`μ_N(x) = 1/N`) and never stored.
//!
//! # Random environments
//!
//! [`Environment::iid`] draws the resistances independently and inverts them.
//! Every edge owns its own ChaCha20 stream: edge `x` (1-based) is drawn from
//! `ChaCha20Rng::seed_from_u64(seed)` with `set_stream(x)`, consuming words
//! from the start of that stream. Environments with the same seed therefore
//! share their first edges regardless of `N`, and the output does not depend
//! on platform or on how many edges precede a given one.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, LogNormal, Open01, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Law of the IID resistances `r(x, x+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "lowercase")]
pub enum ResistanceLaw {
    /// Uniform on `[low, high]`, `0 < low ≤ high`.
    Uniform { low: f64, high: f64 },
    /// `exp(N(mu, sigma²))`, `sigma > 0`.
    LogNormal { mu: f64, sigma: f64 },
    /// `r = U^(−1/alpha)` with `U` uniform on `(0, 1)`, `alpha ∈ (0, 1)`.
    /// The mean is infinite, so these environments are outside the LLN regime.
    Pareto { alpha: f64 },
}

impl ResistanceLaw {
    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason: String| Err(Error::InvalidParameter { field, reason });
        match *self {
            ResistanceLaw::Uniform { low, high } => {
                if !(low.is_finite() && low > 0.0) {
                    return bad("a", format!("lower bound must be finite and > 0, got {low}"));
                }
                if !(high.is_finite() && high >= low) {
                    return bad("b", format!("upper bound must be finite and ≥ a = {low}, got {high}"));
                }
            }
            ResistanceLaw::LogNormal { mu, sigma } => {
                if !mu.is_finite() {
                    return bad("m", format!("location must be finite, got {mu}"));
                }
                if !(sigma.is_finite() && sigma > 0.0) {
                    return bad("s", format!("scale must be finite and > 0, got {sigma}"));
                }
            }
            ResistanceLaw::Pareto { alpha } => {
                if !(alpha > 0.0 && alpha < 1.0) {
                    return bad("alpha", format!("tail index must lie in (0, 1), got {alpha}"));
                }
            }
        }
        Ok(())
    }

    /// Draw one resistance.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ResistanceLaw::Uniform { low, high } => {
                if low == high {
                    low
                } else {
                    Uniform::new_inclusive(low, high)
                        .expect("validated bounds")
                        .sample(rng)
                }
            }
            ResistanceLaw::LogNormal { mu, sigma } => LogNormal::new(mu, sigma)
                .expect("validated scale")
                .sample(rng),
            ResistanceLaw::Pareto { alpha } => {
                let u: f64 = Open01.sample(rng);
                u.powf(-1.0 / alpha)
            }
        }
    }
}

impl fmt::Display for ResistanceLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResistanceLaw::Uniform { low, high } => write!(f, "uniform({low},{high})"),
            ResistanceLaw::LogNormal { mu, sigma } => write!(f, "lognormal({mu},{sigma})"),
            ResistanceLaw::Pareto { alpha } => write!(f, "pareto({alpha})"),
        }
    }
}

/// The random-number stream that generates edge `edge` (1-based) of an IID
/// environment with the given seed.
pub fn edge_rng(seed: u64, edge: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(edge as u64);
    rng
}

/// Positive conductances `c(x, x+1)`, `1 ≤ x < N`, plus provenance.
///
/// Immutable after construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnvironmentFile", into = "EnvironmentFile")]
pub struct Environment {
    n: usize,
    conductances: Vec<f64>,
    label: String,
    seed: Option<u64>,
}

/// On-disk layout: `{"n", "conductances", "label", "seed"}`.
#[derive(Serialize, Deserialize)]
struct EnvironmentFile {
    n: usize,
    conductances: Vec<f64>,
    label: String,
    seed: Option<u64>,
}

impl TryFrom<EnvironmentFile> for Environment {
    type Error = Error;

    fn try_from(file: EnvironmentFile) -> Result<Self> {
        if file.n == 0 {
            return Err(Error::EmptySegment);
        }
        if file.conductances.len() != file.n - 1 {
            return Err(Error::ConductanceCount {
                n: file.n,
                expected: file.n - 1,
                got: file.conductances.len(),
            });
        }
        Environment::new(file.conductances, file.label, file.seed)
    }
}

impl From<Environment> for EnvironmentFile {
    fn from(env: Environment) -> Self {
        EnvironmentFile {
            n: env.n,
            conductances: env.conductances,
            label: env.label,
            seed: env.seed,
        }
    }
}

impl Environment {
    /// Build from `N − 1` conductances; `N = conductances.len() + 1`.
    pub fn new(conductances: Vec<f64>, label: impl Into<String>, seed: Option<u64>) -> Result<Self> {
        if let Some((i, &value)) = conductances
            .iter()
            .enumerate()
            .find(|(_, c)| !(c.is_finite() && **c > 0.0))
        {
            return Err(Error::InvalidConductance { edge: i + 1, value });
        }
        Ok(Environment {
            n: conductances.len() + 1,
            conductances,
            label: label.into(),
            seed,
        })
    }

    pub fn from_conductances(conductances: Vec<f64>) -> Result<Self> {
        Self::new(conductances, "explicit", None)
    }

    /// Build from resistances `r(x, x+1)`, inverting each one.
    pub fn from_resistances(resistances: &[f64]) -> Result<Self> {
        if let Some((i, &value)) = resistances
            .iter()
            .enumerate()
            .find(|(_, r)| !(r.is_finite() && **r > 0.0))
        {
            return Err(Error::InvalidParameter {
                field: "resistance",
                reason: format!("r({},{}) = {value} must be finite and > 0", i + 1, i + 2),
            });
        }
        Self::new(resistances.iter().map(|r| 1.0 / r).collect(), "explicit", None)
    }

    /// `c(x, x+1) ≡ 1`.
    pub fn homogeneous(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySegment);
        }
        Self::new(vec![1.0; n - 1], "homogeneous", None)
    }

    /// IID resistances drawn from `law`, deterministic in `(n, law, seed)`.
    /// Non-mean-one laws are used as given (no rescaling).
    pub fn iid(n: usize, law: ResistanceLaw, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySegment);
        }
        law.validate()?;
        let resistances: Vec<f64> = (1..n)
            .map(|edge| law.sample(&mut edge_rng(seed, edge)))
            .collect();
        let mut env = Self::from_resistances(&resistances)?;
        env.label = law.to_string();
        env.seed = Some(seed);
        Ok(env)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// `conductances()[x - 1] = c(x, x+1)`.
    pub fn conductances(&self) -> &[f64] {
        &self.conductances
    }

    /// `c(x, x+1)` for `1 ≤ x < N`; the missing boundary edges `c(0,1)` and
    /// `c(N,N+1)` are zero.
    pub fn conductance(&self, x: usize) -> f64 {
        if x == 0 || x >= self.n {
            0.0
        } else {
            self.conductances[x - 1]
        }
    }

    /// `r(x, x+1) = 1 / c(x, x+1)` for `1 ≤ x < N`.
    pub fn resistance(&self, x: usize) -> f64 {
        1.0 / self.conductances[x - 1]
    }

    pub fn resistances(&self) -> Vec<f64> {
        self.conductances.iter().map(|c| 1.0 / c).collect()
    }

    /// Largest conductance, or 0 when there are no edges.
    pub fn max_conductance(&self) -> f64 {
        self.conductances.iter().copied().fold(0.0, f64::max)
    }

    /// Cumulative resistances `r(1, x) = Σ_{y<x} r(y, y+1)` for `x = 1..=N`
    /// (`r(1, 1) = 0`).
    pub fn cumulative_resistance(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n);
        let mut acc = 0.0;
        out.push(acc);
        for c in &self.conductances {
            acc += 1.0 / c;
            out.push(acc);
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Law-of-large-numbers diagnostics of the resistance sequence.
    ///
    /// `δ⁽⁰⁾ = (1/N) max_{n<m} |r(n,m) − (m−n)|` is the range of the prefix
    /// sums of `r − 1` divided by `N`; `δ⁽¹⁾ = max r / N`.
    pub fn lln_diagnostics(&self) -> Result<LlnDiagnostics> {
        if self.n < 2 {
            return Err(Error::TooFewSites {
                what: "LLN diagnostics",
                min: 2,
                n: self.n,
            });
        }
        let n = self.n as f64;
        // prefix[k] = Σ_{x=1}^{k} (r(x,x+1) − 1), so r(n,m) − (m−n) = prefix[m−1] − prefix[n−1].
        let mut prefix = 0.0;
        let (mut lo, mut lo_at) = (0.0, 0usize);
        let (mut hi, mut hi_at) = (0.0, 0usize);
        let mut r_max = 0.0_f64;
        for (k, c) in self.conductances.iter().enumerate() {
            let r = 1.0 / c;
            r_max = r_max.max(r);
            prefix += r - 1.0;
            if prefix < lo {
                lo = prefix;
                lo_at = k + 1;
            }
            if prefix > hi {
                hi = prefix;
                hi_at = k + 1;
            }
        }
        let (a, b) = if lo_at <= hi_at { (lo_at, hi_at) } else { (hi_at, lo_at) };
        let window = if a == b { (1, 2) } else { (a + 1, b + 1) };
        Ok(LlnDiagnostics {
            delta0: (hi - lo) / n,
            delta1: r_max / n,
            argmax_window: window,
        })
    }
}

/// `δ_N⁽⁰⁾`, `δ_N⁽¹⁾` and the window `(n, m)` attaining `δ_N⁽⁰⁾`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LlnDiagnostics {
    pub delta0: f64,
    pub delta1: f64,
    pub argmax_window: (usize, usize),
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_delta0(env: &Environment) -> f64 {
        let r = env.resistances();
        let n = env.n();
        let mut best = 0.0_f64;
        for a in 1..n {
            for b in (a + 1)..=n {
                let sum: f64 = r[a - 1..b - 1].iter().sum();
                best = best.max((sum - (b - a) as f64).abs());
            }
        }
        best / n as f64
    }

    #[test]
    fn homogeneous_examples() {
        assert_eq!(Environment::homogeneous(5).unwrap().conductances(), &[1.0; 4]);
        assert!(Environment::homogeneous(1).unwrap().conductances().is_empty());
        assert_eq!(Environment::homogeneous(2).unwrap().conductances(), &[1.0]);
        assert_eq!(Environment::homogeneous(3).unwrap().label(), "homogeneous");
        assert!(matches!(Environment::homogeneous(0), Err(Error::EmptySegment)));
    }

    #[test]
    fn invalid_conductances_are_rejected() {
        assert!(Environment::from_conductances(vec![1.0, 0.0]).is_err());
        assert!(Environment::from_conductances(vec![-1.0]).is_err());
        assert!(Environment::from_conductances(vec![f64::NAN]).is_err());
        assert!(Environment::from_conductances(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn iid_is_reproducible() {
        let law = ResistanceLaw::Uniform { low: 0.5, high: 1.5 };
        let a = Environment::iid(4, law, 7).unwrap();
        let b = Environment::iid(4, law, 7).unwrap();
        assert_eq!(a.n(), 4);
        assert_eq!(a.conductances().len(), 3);
        assert!(a.conductances().iter().all(|&c| c > 0.0));
        assert_eq!(
            a.conductances().iter().map(|c| c.to_bits()).collect::<Vec<_>>(),
            b.conductances().iter().map(|c| c.to_bits()).collect::<Vec<_>>()
        );
        assert_eq!(a.seed(), Some(7));
        let c = Environment::iid(4, law, 8).unwrap();
        assert_ne!(a.conductances(), c.conductances());
    }

    #[test]
    fn iid_streams_are_nested_in_n() {
        let law = ResistanceLaw::LogNormal { mu: 0.0, sigma: 0.5 };
        let small = Environment::iid(10, law, 3).unwrap();
        let large = Environment::iid(100, law, 3).unwrap();
        assert_eq!(small.conductances(), &large.conductances()[..9]);
    }

    #[test]
    fn pareto_is_inverse_cdf_of_stream_uniforms() {
        let env = Environment::iid(3, ResistanceLaw::Pareto { alpha: 0.5 }, 1).unwrap();
        let r = env.resistances();
        for edge in 1..=2 {
            let u: f64 = Open01.sample(&mut edge_rng(1, edge));
            assert!(u > 0.0 && u < 1.0);
            let expected = 1.0 / u / u;
            assert!((r[edge - 1] - expected).abs() <= 1e-12 * expected, "{} vs {}", r[edge - 1], expected);
            assert!(r[edge - 1] > 1.0);
        }
    }

    #[test]
    fn degenerate_uniform_is_exact() {
        let env = Environment::iid(2, ResistanceLaw::Uniform { low: 1.0, high: 1.0 }, 0).unwrap();
        assert_eq!(env.conductances(), &[1.0]);
    }

    #[test]
    fn bad_parameters_name_the_field() {
        let cases = [
            (ResistanceLaw::Uniform { low: 0.0, high: 1.0 }, "`a`"),
            (ResistanceLaw::Uniform { low: 1.0, high: 0.5 }, "`b`"),
            (ResistanceLaw::LogNormal { mu: 0.0, sigma: 0.0 }, "`s`"),
            (ResistanceLaw::Pareto { alpha: 1.0 }, "`alpha`"),
            (ResistanceLaw::Pareto { alpha: 0.0 }, "`alpha`"),
        ];
        for (law, field) in cases {
            let msg = Environment::iid(5, law, 0).unwrap_err().to_string();
            assert!(msg.contains(field), "{msg}");
        }
    }

    #[test]
    fn lln_examples() {
        let d = Environment::homogeneous(10).unwrap().lln_diagnostics().unwrap();
        assert_eq!(d.delta0, 0.0);
        assert_eq!(d.delta1, 0.1);

        let env = Environment::from_resistances(&[2.0, 0.5]).unwrap();
        let d = env.lln_diagnostics().unwrap();
        assert!((d.delta0 - 1.0 / 3.0).abs() < 1e-15);
        assert!((d.delta1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(d.argmax_window, (1, 2));

        let d = Environment::homogeneous(2).unwrap().lln_diagnostics().unwrap();
        assert_eq!((d.delta0, d.delta1), (0.0, 0.5));

        assert!(Environment::homogeneous(1).unwrap().lln_diagnostics().is_err());
    }

    #[test]
    fn lln_window_attains_delta0() {
        let env = Environment::iid(40, ResistanceLaw::Uniform { low: 0.2, high: 1.8 }, 11).unwrap();
        let d = env.lln_diagnostics().unwrap();
        let (a, b) = d.argmax_window;
        let r = env.resistances();
        let window: f64 = r[a - 1..b - 1].iter().sum();
        let dev = (window - (b - a) as f64).abs() / env.n() as f64;
        assert!((dev - d.delta0).abs() < 1e-12);
    }

    #[test]
    fn tight_uniform_has_zero_delta0() {
        let tight = Environment::iid(50, ResistanceLaw::Uniform { low: 1.0, high: 1.0 }, 2).unwrap();
        assert_eq!(tight.lln_diagnostics().unwrap().delta0, 0.0);
    }

    #[test]
    fn json_round_trip() {
        let env = Environment::iid(17, ResistanceLaw::LogNormal { mu: 0.1, sigma: 0.7 }, 99).unwrap();
        let text = env.to_json().unwrap();
        let back = Environment::from_json(&text).unwrap();
        assert_eq!(back, env);

        let bad = r#"{"n": 3, "conductances": [1.0], "label": "x", "seed": null}"#;
        assert!(matches!(Environment::from_json(bad), Err(Error::Json(_))));
        let zero = r#"{"n": 0, "conductances": [], "label": "x", "seed": null}"#;
        assert!(Environment::from_json(zero).is_err());
    }

    proptest! {
        #[test]
        fn prefix_delta0_matches_brute_force(rs in prop::collection::vec(0.01f64..5.0, 1..64)) {
            let env = Environment::from_resistances(&rs).unwrap();
            let d = env.lln_diagnostics().unwrap();
            let brute = brute_delta0(&env);
            prop_assert!((d.delta0 - brute).abs() <= 1e-12 * (1.0 + brute), "{} vs {}", d.delta0, brute);
            prop_assert!(d.delta1 <= 1.0 / env.n() as f64 + d.delta0 + 1e-12);
        }

        #[test]
        fn prefix_delta0_is_exact_on_dyadic_resistances(ks in prop::collection::vec(-3i32..=2, 1..64)) {
            // powers of two invert exactly, and every partial sum is exact in f64
            let rs: Vec<f64> = ks.iter().map(|&k| 2f64.powi(k)).collect();
            let env = Environment::from_resistances(&rs).unwrap();
            prop_assert_eq!(env.lln_diagnostics().unwrap().delta0, brute_delta0(&env));
        }

        #[test]
        fn json_round_trip_is_bit_exact(cs in prop::collection::vec(1e-300f64..1e300, 0..32), seed in any::<Option<u64>>()) {
            let env = Environment::new(cs, "prop", seed).unwrap();
            let back = Environment::from_json(&env.to_json().unwrap()).unwrap();
            prop_assert_eq!(back.n(), env.n());
            prop_assert_eq!(back.seed(), env.seed());
            prop_assert_eq!(back.label(), env.label());
            for (a, b) in back.conductances().iter().zip(env.conductances()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
