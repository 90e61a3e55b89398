//! The studentized range `T(X) = max_{i<j} |X_i - X_j| / √(σ_i² + σ_j²)` for
//! independent `X_i ~ N(0, σ_i²)`, and its distribution function
//! `F_k(σ; c) = Pr(T(X) ≤ c)` as a polyhedron probability.
//!
//! Writing `X_i = σ_i x_i` with `x ~ N(0, I_k)`, the event `T(X) ≤ c` is the
//! polyhedron with one constraint per ordered pair `i ≠ j`:
//! `(σ_i x_i - σ_j x_j) / √(σ_i² + σ_j²) ≤ c`, listed lexicographically.
//! Its normals are orthogonal to `(1/σ_1, …, 1/σ_k)`, so the rank is `k - 1`.
//!
//! The polyhedron's shape does not depend on `c > 0`, so a tube built once
//! serves every threshold with the same variances.
//!
//! Tubes are built on the equivalent system in `X`-space,
//! `X_i - X_j ≤ √(σ_i² + σ_j²)` scaled to unit maximal right-hand side.
//! Its normals are exact integers, so the linear dependencies among pairs
//! (`(i,j)`, `(j,l)`, `(i,l)`) survive rounding. The map `X = diag(σ)x` and
//! positive row scaling leave the perturbed face complex unchanged.

use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Result, TubeError};
use crate::polyhedron::Polyhedron;
use crate::prob::{prob, ProbConfig};
use crate::tube::{build_tube, AbstractTube, TubeOptions};

#[derive(Clone, Debug, PartialEq)]
pub struct StudentizedRangeSpec {
    k: usize,
    variances: Vec<f64>,
    c: f64,
}

impl StudentizedRangeSpec {
    pub fn new(variances: Vec<f64>, c: f64) -> Result<Self> {
        let k = variances.len();
        if k < 2 {
            return Err(TubeError::InvalidParameter(format!(
                "k = {k}, need at least 2 means"
            )));
        }
        if variances.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(TubeError::InvalidParameter(
                "variances must be positive and finite".into(),
            ));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(TubeError::InvalidParameter(format!(
                "threshold c = {c} must be positive"
            )));
        }
        Ok(StudentizedRangeSpec { k, variances, c })
    }

    /// All variances one.
    pub fn equal(k: usize, c: f64) -> Result<Self> {
        Self::new(vec![1.0; k], c)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn with_c(&self, c: f64) -> Result<Self> {
        Self::new(self.variances.clone(), c)
    }

    /// `k(k - 1)`.
    pub fn m(&self) -> usize {
        self.k * (self.k - 1)
    }
}

pub fn studentized_polyhedron(spec: &StudentizedRangeSpec) -> Polyhedron {
    let k = spec.k;
    let sd: Vec<f64> = spec.variances.iter().map(|v| v.sqrt()).collect();
    let mut normals = Vec::with_capacity(spec.m());
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let scale = (spec.variances[i] + spec.variances[j]).sqrt();
            let mut a = vec![0.0; k];
            a[i] = sd[i] / scale;
            a[j] = -sd[j] / scale;
            normals.push(a);
        }
    }
    let rhs = vec![spec.c; normals.len()];
    Polyhedron::new(k, normals, rhs).expect("studentized range constraints are well formed")
}

/// `X_i - X_j ≤ √(σ_i² + σ_j²) / max_{i≠j} √(σ_i² + σ_j²)`, same constraint order
/// as [`studentized_polyhedron`].
pub fn unwhitened_polyhedron(spec: &StudentizedRangeSpec) -> Polyhedron {
    let k = spec.k;
    let mut normals = Vec::with_capacity(spec.m());
    let mut rhs = Vec::with_capacity(spec.m());
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let mut a = vec![0.0; k];
            a[i] = 1.0;
            a[j] = -1.0;
            normals.push(a);
            rhs.push((spec.variances[i] + spec.variances[j]).sqrt());
        }
    }
    let top = rhs.iter().cloned().fold(0.0, f64::max);
    rhs.iter_mut().for_each(|b| *b /= top);
    Polyhedron::new(k, normals, rhs).expect("studentized range constraints are well formed")
}

/// Tube of the studentized-range polyhedron for `spec`'s variances, valid
/// for every threshold.
pub fn studentized_tube(spec: &StudentizedRangeSpec) -> Result<AbstractTube> {
    build_tube(&unwhitened_polyhedron(spec), &TubeOptions::pruned())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CensusRow {
    pub k: usize,
    pub m: usize,
    pub terms: usize,
}

/// `|F(0+)|` for equal variances and each `k` in `ks`.
pub fn table1_census(ks: impl IntoIterator<Item = usize>) -> Result<Vec<CensusRow>> {
    ks.into_iter()
        .map(|k| {
            let spec = StudentizedRangeSpec::equal(k, 1.0)?;
            let t = studentized_tube(&spec)?;
            Ok(CensusRow {
                k,
                m: spec.m(),
                terms: t.len(),
            })
        })
        .collect()
}

/// `F_k(σ; c)` using a tube built for the same variances at any threshold.
pub fn distribution_function(
    spec: &StudentizedRangeSpec,
    tube: &AbstractTube,
    cfg: &ProbConfig,
) -> Result<f64> {
    Ok(prob(&studentized_polyhedron(spec), tube, cfg)?.p_k)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Calibration {
    pub c: f64,
    pub f: f64,
    pub iterations: usize,
}

/// Bisection on `c ∈ [lo, hi]` until `|F(c) - target| ≤ tol`.
pub fn calibrate_c(
    variances: &[f64],
    target: f64,
    tol: f64,
    bracket: (f64, f64),
    cfg: &ProbConfig,
) -> Result<Calibration> {
    let base = StudentizedRangeSpec::new(variances.to_vec(), 1.0)?;
    let tube = studentized_tube(&base)?;
    let eval = |c: f64| distribution_function(&base.with_c(c)?, &tube, cfg);
    let (mut lo, mut hi) = bracket;
    if !(0.0 < lo && lo < hi) {
        return Err(TubeError::InvalidParameter(format!(
            "bad bracket [{lo}, {hi}]"
        )));
    }
    let (f_lo, f_hi) = (eval(lo)?, eval(hi)?);
    if !(f_lo <= target && target <= f_hi) {
        return Err(TubeError::InvalidParameter(format!(
            "target {target} outside [F({lo}), F({hi})] = [{f_lo}, {f_hi}]"
        )));
    }
    for iterations in 1..=200 {
        let mid = 0.5 * (lo + hi);
        let f = eval(mid)?;
        if (f - target).abs() <= tol {
            return Ok(Calibration {
                c: mid,
                f,
                iterations,
            });
        }
        if f < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(TubeError::ToleranceNotMet {
        estimate: hi - lo,
        tolerance: tol,
    })
}

/// `σ_i² = (10^s)^{(i-1)/(k-1)}`, `i = 1..k`.
pub fn tukey_kramer_variances(k: usize, s: f64) -> Vec<f64> {
    (0..k)
        .map(|i| 10f64.powf(s * i as f64 / (k - 1) as f64))
        .collect()
}

/// `points` equispaced values over `[-5, 5]`.
pub fn sweep_grid(points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..points)
            .map(|i| -5.0 + 10.0 * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub s: f64,
    #[serde(rename = "F")]
    pub f: f64,
}

/// `F_k(σ(s); c)` at each `s`, rebuilding the tube for every variance pattern.
pub fn tukey_kramer_sweep(
    k: usize,
    grid: &[f64],
    c: f64,
    cfg: &ProbConfig,
) -> Result<Vec<SweepPoint>> {
    grid.iter()
        .map(|&s| {
            let spec = StudentizedRangeSpec::new(tukey_kramer_variances(k, s), c)?;
            let tube = studentized_tube(&spec)?;
            Ok(SweepPoint {
                s,
                f: distribution_function(&spec, &tube, cfg)?,
            })
        })
        .collect()
}

/// `|F(0+)|` under `trials` random constraint orders (equal variances).
pub fn census_under_orders(k: usize, trials: usize, seed: u64) -> Result<Vec<usize>> {
    let p = unwhitened_polyhedron(&StudentizedRangeSpec::equal(k, 1.0)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|_| {
            let mut order: Vec<usize> = (1..=p.m()).collect();
            order.shuffle(&mut rng);
            Ok(build_tube(&p, &TubeOptions::pruned().with_order(order))?.len())
        })
        .collect()
}

/// `|F(0+)|` for `trials` random variance patterns with `log10 σ_i²`
/// uniform on `[-1, 1]`.
pub fn census_under_variances(k: usize, trials: usize, seed: u64) -> Result<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|_| {
            let v = (0..k)
                .map(|_| 10f64.powf(rng.gen_range(-1.0..=1.0)))
                .collect();
            Ok(studentized_tube(&StudentizedRangeSpec::new(v, 1.0)?)?.len())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mvn::std_normal_cdf;
    use crate::prob::prob_mc_oracle;

    #[test]
    fn polyhedron_layout() {
        let p = studentized_polyhedron(&StudentizedRangeSpec::equal(3, 2.0).unwrap());
        assert_eq!((p.n(), p.m(), p.rank()), (3, 6, 2));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let close = |a: &[f64], b: [f64; 3]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15);
        assert!(close(p.normal(0), [h, -h, 0.0]));
        assert!(close(p.normal(2), [-h, h, 0.0]));
        assert_eq!(p.rhs(), &[2.0; 6][..]);
        for k in 2..=6 {
            let p = studentized_polyhedron(&StudentizedRangeSpec::equal(k, 1.0).unwrap());
            assert_eq!(p.m(), k * (k - 1));
            assert_eq!(p.rank(), k - 1);
        }
        let q =
            studentized_polyhedron(&StudentizedRangeSpec::new(vec![1.0, 4.0, 9.0], 1.0).unwrap());
        assert_eq!(q.rank(), 2);
    }

    #[test]
    fn unwhitened_tube_matches_whitened() {
        for v in [vec![1.0; 4], vec![1.0, 2.0, 0.5, 1.5]] {
            let spec = StudentizedRangeSpec::new(v, 1.3).unwrap();
            let direct =
                build_tube(&studentized_polyhedron(&spec), &TubeOptions::pruned()).unwrap();
            assert_eq!(studentized_tube(&spec).unwrap().members, direct.members);
        }
    }

    #[test]
    fn spec_validation() {
        assert!(StudentizedRangeSpec::equal(1, 1.0).is_err());
        assert!(StudentizedRangeSpec::equal(3, 0.0).is_err());
        assert!(StudentizedRangeSpec::new(vec![1.0, -1.0], 1.0).is_err());
    }

    #[test]
    fn small_census() {
        let rows = table1_census(2..=4).unwrap();
        let terms: Vec<usize> = rows.iter().map(|r| r.terms).collect();
        assert_eq!(terms, vec![2, 12, 62]);
        assert_eq!(rows[2].m, 12);
    }

    #[test]
    fn two_means_closed_form() {
        let spec = StudentizedRangeSpec::new(vec![2.0, 0.5], 1.0).unwrap();
        let tube = studentized_tube(&spec).unwrap();
        for c in [0.3, 1.0, 1.959_963_984_540_054, 3.0] {
            let f = distribution_function(
                &spec.with_c(c).unwrap(),
                &tube,
                &ProbConfig::with_tolerance(1e-9),
            )
            .unwrap();
            assert!(
                (f - (2.0 * std_normal_cdf(c) - 1.0)).abs() < 1e-8,
                "c = {c}"
            );
        }
    }

    #[test]
    fn tube_reuse_across_thresholds() {
        let spec = StudentizedRangeSpec::new(vec![1.0, 2.0, 0.5, 1.5], 1.0).unwrap();
        let tube = studentized_tube(&spec).unwrap();
        for c in [0.5, 2.5] {
            let s = spec.with_c(c).unwrap();
            assert_eq!(studentized_tube(&s).unwrap().members, tube.members);
            let reused = distribution_function(&s, &tube, &ProbConfig::default()).unwrap();
            let rebuilt =
                distribution_function(&s, &studentized_tube(&s).unwrap(), &ProbConfig::default())
                    .unwrap();
            assert_eq!(reused, rebuilt);
        }
    }

    #[test]
    fn three_means_against_mc() {
        let spec = StudentizedRangeSpec::equal(3, 2.344).unwrap();
        let tube = studentized_tube(&spec).unwrap();
        let f = distribution_function(&spec, &tube, &ProbConfig::default()).unwrap();
        assert!((f - 0.95).abs() < 1e-3);
        let (est, se) = prob_mc_oracle(&studentized_polyhedron(&spec), 400_000, 9);
        assert!((f - est).abs() <= 3.0 * se, "{f} vs {est} ± {se}");
    }

    #[test]
    fn small_threshold_vanishes() {
        let spec = StudentizedRangeSpec::equal(3, 1e-3).unwrap();
        let tube = studentized_tube(&spec).unwrap();
        assert!(distribution_function(&spec, &tube, &ProbConfig::default()).unwrap() < 1e-4);
    }

    #[test]
    fn calibration_hits_target() {
        let cal = calibrate_c(&[1.0; 3], 0.95, 1e-5, (0.1, 10.0), &ProbConfig::default()).unwrap();
        assert!((cal.f - 0.95).abs() <= 1e-5);
        assert!((cal.c - 2.3434).abs() < 2e-3, "{}", cal.c);
    }

    #[test]
    fn grid_and_variances() {
        let g = sweep_grid(41);
        assert_eq!(g.len(), 41);
        assert_eq!((g[0], g[20], g[40]), (-5.0, 0.0, 5.0));
        assert_eq!(g[1], -4.75);
        let v = tukey_kramer_variances(5, 4.0);
        assert_eq!(v[0], 1.0);
        assert!((v[4] - 1e4).abs() < 1e-9);
        assert_eq!(tukey_kramer_variances(5, 0.0), vec![1.0; 5]);
    }
}
