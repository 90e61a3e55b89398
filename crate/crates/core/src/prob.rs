//! `P(K) = Pr(x ∈ K)` for `x ~ N(0, I_n)` by the reduced inclusion-exclusion
//! over the members of an abstract tube:
//!
//! ```text
//! 1 - P(K) = Σ_{J} (-1)^{|J|-1} Pr(a_iᵀx > b_i, i ∈ J)
//! ```
//!
//! Each term is a Gaussian tail probability with covariance `A_JᵀA_J` and
//! thresholds `b_J`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, TubeError};
use crate::mvn::{proportion, tail_prob_estimate, QuadratureConfig, TailProblem};
use crate::polyhedron::{IndexSet, Polyhedron};
use crate::tube::AbstractTube;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbConfig {
    /// Total absolute error allowed for `P(K)`, shared equally by the terms.
    pub abs_tol: f64,
    pub radius: f64,
    pub max_intervals: usize,
}

impl Default for ProbConfig {
    fn default() -> Self {
        let q = QuadratureConfig::default();
        ProbConfig {
            abs_tol: 1e-6,
            radius: q.radius,
            max_intervals: q.max_intervals,
        }
    }
}

impl ProbConfig {
    pub fn with_tolerance(abs_tol: f64) -> Self {
        ProbConfig {
            abs_tol,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Term {
    pub subset: IndexSet,
    /// `(-1)^{|J|-1}`.
    pub sign: i32,
    pub probability: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbabilityResult {
    /// `raw` clamped to `[0, 1]`.
    pub p_k: f64,
    /// `1 - Σ sign · probability`, unclamped.
    pub raw: f64,
    /// Terms in member order.
    pub terms: Vec<Term>,
    /// Sum of the per-term tolerances.
    pub error_budget: f64,
    /// Sum of the per-term error estimates.
    pub error_estimate: f64,
    pub warnings: Vec<String>,
}

/// Evaluates every member's tail probability and combines them.
///
/// Terms are computed in parallel and summed in a fixed order, largest `|J|`
/// first and by decreasing rank within a cardinality, with compensated
/// summation.
pub fn prob(p: &Polyhedron, t: &AbstractTube, cfg: &ProbConfig) -> Result<ProbabilityResult> {
    t.check_matches(p)?;
    if cfg.abs_tol.is_nan() || cfg.abs_tol <= 0.0 {
        return Err(TubeError::InvalidParameter(
            "abs_tol must be positive".into(),
        ));
    }
    let per_term = cfg.abs_tol / t.len().max(1) as f64;
    let quad = QuadratureConfig {
        abs_tol: per_term,
        radius: cfg.radius,
        max_intervals: cfg.max_intervals,
    };
    let terms: Vec<Term> = t
        .members
        .par_iter()
        .map(|j| term(p, j, &quad))
        .collect::<Result<_>>()?;

    let mut warnings = Vec::new();
    for tm in &terms {
        if tm.probability <= 0.0 {
            warnings.push(format!("term {} has zero probability", tm.subset));
        }
    }

    // Members arrive in rank order, so reversing gives largest |J| first.
    let mut acc = Neumaier::default();
    for tm in terms.iter().rev() {
        acc.add(f64::from(tm.sign) * tm.probability);
    }
    let raw = 1.0 - acc.sum();
    let error_estimate = terms.iter().map(|tm| tm.error).sum();
    Ok(ProbabilityResult {
        p_k: raw.clamp(0.0, 1.0),
        raw,
        terms,
        error_budget: per_term * t.len() as f64,
        error_estimate,
        warnings,
    })
}

fn term(p: &Polyhedron, j: &IndexSet, quad: &QuadratureConfig) -> Result<Term> {
    let wrap = |e: TubeError| TubeError::Term {
        subset: j.clone(),
        source: Box::new(e),
    };
    let cone = p.cone_term(j).map_err(wrap)?;
    let tail = TailProblem::new(cone.gram, cone.rhs).map_err(wrap)?;
    let est = tail_prob_estimate(&tail, quad).map_err(wrap)?;
    if est.error > quad.abs_tol {
        return Err(wrap(TubeError::ToleranceNotMet {
            estimate: est.error,
            tolerance: quad.abs_tol,
        }));
    }
    Ok(Term {
        subset: j.clone(),
        sign: j.sign(),
        probability: est.value,
        error: est.error,
    })
}

/// Kahan–Babuška compensated sum.
#[derive(Default)]
struct Neumaier {
    sum: f64,
    carry: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn sum(&self) -> f64 {
        self.sum + self.carry
    }
}

const MC_CHUNK: usize = 1 << 16;

/// Fraction of `N(0, I_n)` draws with `Aᵀx ≤ b`, and its standard error.
///
/// Draws are split into fixed chunks, each with its own ChaCha stream, so
/// the estimate does not depend on the thread count.
pub fn prob_mc_oracle(p: &Polyhedron, samples: usize, seed: u64) -> (f64, f64) {
    let chunks = samples.div_ceil(MC_CHUNK);
    let hits: usize = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut x = vec![0.0f64; p.n()];
            let mut hits = 0usize;
            for _ in 0..count {
                for xi in x.iter_mut() {
                    *xi = StandardNormal.sample(&mut rng);
                }
                if p.contains(&x) {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    proportion(hits, samples)
}
