//! Spectral analysis of the nearest-neighbour random walk on the segment
//! `⟦1, N⟧` with (possibly random) edge conductances.
//!
//! The crate is organised bottom-up:
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`environment`] | conductance sequences, IID generation, LLN diagnostics, JSON files |
//! | [`operator`] | the generator `Δ^(c)`, Dirichlet form, Rayleigh quotient |
//! | [`shooting`] | angle (Prüfer-type) recursion and the bisection eigensolver |
//! | [`oracle`] | independent Sturm-count / inverse-iteration eigensolver |
//! | [`analysis`] | extrema counting, cosine-shape comparisons, rescaled trajectories |
//!
//! Sites are 1-based in all documentation (`x ∈ ⟦1, N⟧`), while slices are
//! 0-based: `values[x - 1]` holds `g(x)` and `conductances[x - 1]` holds
//! `c(x, x+1)`.

pub mod analysis;
pub mod environment;
mod error;
pub mod operator;
pub mod oracle;
pub mod shooting;
mod sum;

pub use environment::{Environment, LlnDiagnostics, ResistanceLaw};
pub use error::{Error, Result};
pub use operator::TridiagonalOperator;
pub use shooting::{AngleState, EigenPair, Ratio};
