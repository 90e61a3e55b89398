//! Abstract tubes for polyhedra `K = {x : Aᵀx ≤ b}` and the Gaussian
//! probabilities `Pr(x ∈ K)`, `x ~ N(0, I_n)`, they make computable.
//!
//! Pipeline: [`polyhedron`] holds the system, [`lexlp`] decides membership of
//! each candidate index set under a lexicographic right-hand-side
//! perturbation, [`tube`] sweeps the candidates in [`subsets`] order, and
//! [`prob`] sums signed Gaussian tail probabilities from [`mvn`] over the
//! members. [`identity`] checks the underlying indicator identity exactly,
//! and [`srange`] applies everything to the studentized range.
//!
//! Arithmetic that must be reproducible exactly ([`eps`], [`lexlp`]) is
//! generic over [`Scalar`], implemented for `f64` and for arbitrary
//! precision rationals.

pub mod eps;
pub mod error;
pub mod exact;
pub mod identity;
pub mod lexlp;
pub mod mvn;
pub mod polyhedron;
pub mod prob;
pub mod scalar;
pub mod srange;
pub mod subsets;
pub mod tube;

pub use error::{Result, TubeError};
pub use polyhedron::{IndexSet, Polyhedron};
pub use prob::{prob, prob_mc_oracle, ProbConfig, ProbabilityResult};
pub use scalar::{Rational, Scalar, Sign, SignTolerance};
pub use tube::{build_tube, build_unperturbed_complex, AbstractTube, TubeOptions};

pub type EpsPoly64 = eps::EpsPoly<f64>;
pub type ExactEpsPoly = eps::EpsPoly<Rational>;
pub type Tableau64 = lexlp::Tableau<f64>;
pub type ExactTableau = lexlp::Tableau<Rational>;
