//! Pointwise check of the inclusion-exclusion identity
//!
//! ```text
//! 1[x ∉ K] = Σ_{J ∈ complex} (-1)^{|J|-1} Π_{i∈J} 1[a_iᵀx > b_i]
//! ```
//!
//! in exact rational arithmetic, so that points lying exactly on facets are
//! classified correctly.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::exact::{solve_with_free, violation_mask, Row};
use crate::polyhedron::{IndexSet, Polyhedron};
use crate::scalar::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PointClass {
    Interior,
    Boundary,
    Exterior,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub point: Vec<String>,
    pub lhs: i64,
    pub rhs: i64,
    pub classification: PointClass,
}

impl IdentityReport {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

/// Precomputed exact rows and member masks for repeated evaluation.
pub struct IdentityChecker {
    rows: Vec<Row>,
    members: Vec<(u128, i64)>,
}

impl IdentityChecker {
    pub fn new(p: &Polyhedron, complex: &[IndexSet]) -> Self {
        IdentityChecker {
            rows: (0..p.m()).map(|i| Row::from_constraint(p, i)).collect(),
            members: complex
                .iter()
                .map(|j| (j.mask(), j.sign() as i64))
                .collect(),
        }
    }

    pub fn check(&self, x: &[Rational]) -> IdentityReport {
        let (outside, on) = violation_mask(&self.rows, x);
        let lhs = i64::from(outside != 0);
        let rhs = self
            .members
            .iter()
            .filter(|(mask, _)| outside & mask == *mask)
            .map(|(_, s)| s)
            .sum();
        let classification = if outside != 0 {
            PointClass::Exterior
        } else if on != 0 {
            PointClass::Boundary
        } else {
            PointClass::Interior
        };
        IdentityReport {
            point: x.iter().map(ToString::to_string).collect(),
            lhs,
            rhs,
            classification,
        }
    }
}

/// Evaluates both sides of the identity at `x`.
pub fn check_identity(p: &Polyhedron, complex: &[IndexSet], x: &[Rational]) -> IdentityReport {
    IdentityChecker::new(p, complex).check(x)
}

#[derive(Clone, Debug)]
pub struct SamplerConfig {
    pub samples: usize,
    pub seed: u64,
    /// Coordinates of free points are drawn from `[-box_half_width, box_half_width]`.
    pub box_half_width: i64,
    /// Denominator of the random rational coordinates.
    pub denominator: i64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            samples: 10_000,
            seed: 42,
            box_half_width: 4,
            denominator: 16,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct FuzzStats {
    pub samples: usize,
    pub violations: usize,
    pub interior: usize,
    pub boundary: usize,
    pub exterior: usize,
    pub first_violation: Option<IdentityReport>,
}

/// Samples free points, points on a single hyperplane and points on
/// intersections of several hyperplanes, in equal proportion, and counts
/// identity failures.
pub fn fuzz_identity(p: &Polyhedron, complex: &[IndexSet], cfg: &SamplerConfig) -> FuzzStats {
    let checker = IdentityChecker::new(p, complex);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut stats = FuzzStats {
        samples: cfg.samples,
        ..Default::default()
    };
    let n = p.n();
    let m = p.m();
    let random_point = |rng: &mut ChaCha8Rng| -> Vec<Rational> {
        let lim = cfg.box_half_width * cfg.denominator;
        (0..n)
            .map(|_| {
                Rational::new(
                    BigInt::from(rng.gen_range(-lim..=lim)),
                    BigInt::from(cfg.denominator),
                )
            })
            .collect()
    };

    for k in 0..cfg.samples {
        let free = random_point(&mut rng);
        let x = match k % 3 {
            0 => free,
            kind => {
                let widest = n.min(m);
                let size = if kind == 1 || widest < 2 {
                    1
                } else {
                    rng.gen_range(2..=widest)
                };
                let mut chosen: Vec<usize> = (0..m).collect();
                for i in 0..size {
                    let swap = rng.gen_range(i..m);
                    chosen.swap(i, swap);
                }
                let eqs: Vec<Row> = chosen[..size]
                    .iter()
                    .map(|&i| checker.rows[i].clone())
                    .collect();
                solve_with_free(&eqs, &free).unwrap_or(free)
            }
        };
        let report = checker.check(&x);
        match report.classification {
            PointClass::Interior => stats.interior += 1,
            PointClass::Boundary => stats.boundary += 1,
            PointClass::Exterior => stats.exterior += 1,
        }
        if !report.holds() {
            stats.violations += 1;
            if stats.first_violation.is_none() {
                stats.first_violation = Some(report);
            }
        }
    }
    stats
}
