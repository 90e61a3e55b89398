//! Gaussian tail probabilities `Pr(y > lower)` for `y ~ N(0, Σ)`.
//!
//! With `Σ = CCᵀ` (`C` lower triangular) and `y = Cz`, the event `y > lower`
//! becomes the nested region
//!
//! ```text
//! z_i > l_i(z_1..z_{i-1}) = (lower_i - Σ_{k<i} C_ik z_k) / C_ii
//! ```
//!
//! and the probability is an iterated integral over standard normal
//! densities. The innermost coordinate is integrated in closed form with the
//! normal survival function; every outer coordinate is integrated by
//! globally adaptive 15-point Gauss–Kronrod quadrature on `[l_i, R]`, where
//! `R` is the truncation radius.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, TubeError};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Diagonal entries of the Cholesky factor below this fraction of the
/// largest variance mean `Σ` is numerically singular.
pub const CHOLESKY_RELATIVE_TOLERANCE: f64 = 1e-12;

/// `Φ(u)`.
pub fn std_normal_cdf(u: f64) -> f64 {
    0.5 * libm::erfc(-u * std::f64::consts::FRAC_1_SQRT_2)
}

/// `1 - Φ(u)`, accurate in the upper tail.
pub fn std_normal_sf(u: f64) -> f64 {
    0.5 * libm::erfc(u * std::f64::consts::FRAC_1_SQRT_2)
}

pub fn std_normal_pdf(u: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * u * u).exp()
}

/// `Pr(y_i > lower_i ∀i)` for `y ~ N(0, sigma)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TailProblem {
    sigma: DMatrix<f64>,
    lower: Vec<f64>,
}

impl TailProblem {
    pub fn new(sigma: DMatrix<f64>, lower: Vec<f64>) -> Result<Self> {
        let d = lower.len();
        if d == 0 || sigma.nrows() != d || sigma.ncols() != d {
            return Err(TubeError::ShapeMismatch(format!(
                "covariance is {}x{} but there are {d} thresholds",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        if sigma.iter().any(|x| !x.is_finite()) {
            return Err(TubeError::NonFinite("sigma"));
        }
        if lower.iter().any(|x| x.is_nan()) {
            return Err(TubeError::NonFinite("lower"));
        }
        let scale = sigma.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        for i in 0..d {
            for j in 0..i {
                if (sigma[(i, j)] - sigma[(j, i)]).abs() > 1e-12 * scale {
                    return Err(TubeError::InvalidParameter(
                        "covariance is not symmetric".into(),
                    ));
                }
            }
        }
        Ok(TailProblem { sigma, lower })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    /// Rescales to unit variances: `Pr(y > l) = Pr(D⁻¹y > D⁻¹l)`.
    fn standardized(&self) -> Result<(DMatrix<f64>, Vec<f64>)> {
        let d = self.dim();
        let mut sd = Vec::with_capacity(d);
        for i in 0..d {
            let v = self.sigma[(i, i)];
            if v.is_nan() || v <= 0.0 {
                return Err(TubeError::NotPositiveDefinite { index: i });
            }
            sd.push(v.sqrt());
        }
        let corr = DMatrix::from_fn(d, d, |i, j| self.sigma[(i, j)] / (sd[i] * sd[j]));
        let lower = self.lower.iter().zip(&sd).map(|(l, s)| l / s).collect();
        Ok((corr, lower))
    }
}

/// Plain (unpivoted) Cholesky factor; fails when a pivot drops below
/// `CHOLESKY_RELATIVE_TOLERANCE` times the largest diagonal entry.
pub fn cholesky(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = sigma.nrows();
    let max_diag = (0..d).map(|i| sigma[(i, i)]).fold(0.0f64, f64::max);
    let mut c = DMatrix::zeros(d, d);
    for j in 0..d {
        let mut diag = sigma[(j, j)];
        for k in 0..j {
            diag -= c[(j, k)] * c[(j, k)];
        }
        if diag.is_nan() || diag <= CHOLESKY_RELATIVE_TOLERANCE * max_diag {
            return Err(TubeError::NotPositiveDefinite { index: j });
        }
        let cjj = diag.sqrt();
        c[(j, j)] = cjj;
        for i in j + 1..d {
            let mut s = sigma[(i, j)];
            for k in 0..j {
                s -= c[(i, k)] * c[(j, k)];
            }
            c[(i, j)] = s / cjj;
        }
    }
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig {
    /// Target absolute error of the probability.
    pub abs_tol: f64,
    /// Standard normal coordinates beyond `±radius` are ignored.
    pub radius: f64,
    /// Cap on the number of subintervals per one-dimensional integral.
    pub max_intervals: usize,
}

impl QuadratureConfig {
    /// `1e-8` for `d ≤ 4`, `1e-6` above.
    pub fn for_dimension(d: usize) -> Self {
        QuadratureConfig {
            abs_tol: if d <= 4 { 1e-8 } else { 1e-6 },
            ..Default::default()
        }
    }

    pub fn with_tolerance(abs_tol: f64) -> Self {
        QuadratureConfig {
            abs_tol,
            ..Default::default()
        }
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-8,
            radius: 8.5,
            max_intervals: 200,
        }
    }
}

/// Value with its error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// `Pr(y > lower)` within `cfg.abs_tol`.
pub fn tail_prob(tp: &TailProblem, cfg: &QuadratureConfig) -> Result<f64> {
    let est = tail_prob_estimate(tp, cfg)?;
    if est.error > cfg.abs_tol {
        return Err(TubeError::ToleranceNotMet {
            estimate: est.error,
            tolerance: cfg.abs_tol,
        });
    }
    Ok(est.value)
}

/// Like [`tail_prob`] but returns the error estimate instead of failing on it.
pub fn tail_prob_estimate(tp: &TailProblem, cfg: &QuadratureConfig) -> Result<Estimate> {
    if cfg.abs_tol.is_nan() || cfg.abs_tol <= 0.0 {
        return Err(TubeError::InvalidParameter(
            "abs_tol must be positive".into(),
        ));
    }
    let (corr, lower) = tp.standardized()?;
    let chol = cholesky(&corr)?;
    let d = lower.len();
    if d == 1 {
        return Ok(Estimate {
            value: std_normal_sf(lower[0]),
            error: 0.0,
        });
    }
    let nested = Nested {
        chol: &chol,
        lower: &lower,
        radius: cfg.radius,
        level_tol: cfg.abs_tol / (d - 1) as f64,
        max_intervals: cfg.max_intervals,
    };
    let mut z = [0.0f64; MAX_DIM];
    if d > MAX_DIM {
        return Err(TubeError::InvalidParameter(format!(
            "dimension {d} exceeds the supported maximum {MAX_DIM}"
        )));
    }
    let est = nested.level(0, &mut z);
    Ok(Estimate {
        value: est.value.clamp(0.0, 1.0),
        error: est.error,
    })
}

const MAX_DIM: usize = 16;

struct Nested<'a> {
    chol: &'a DMatrix<f64>,
    lower: &'a [f64],
    radius: f64,
    level_tol: f64,
    max_intervals: usize,
}

impl Nested<'_> {
    fn limit(&self, i: usize, z: &[f64]) -> f64 {
        let mut s = self.lower[i];
        for (k, zk) in z.iter().enumerate().take(i) {
            s -= self.chol[(i, k)] * zk;
        }
        s / self.chol[(i, i)]
    }

    /// Conditional probability of the constraints `i..d` given `z[..i]`.
    fn level(&self, i: usize, z: &mut [f64; MAX_DIM]) -> Estimate {
        let lim = self.limit(i, &z[..i]);
        let d = self.lower.len();
        if i == d - 1 {
            return Estimate {
                value: std_normal_sf(lim),
                error: 0.0,
            };
        }
        if lim >= self.radius {
            return Estimate {
                value: 0.0,
                error: 0.0,
            };
        }
        let a = lim.max(-self.radius);
        let mut f = |t: f64| {
            z[i] = t;
            let inner = self.level(i + 1, z);
            let w = std_normal_pdf(t);
            (w * inner.value, w * inner.error)
        };
        adaptive_gk15(&mut f, a, self.radius, self.level_tol, self.max_intervals)
    }
}

// 15-point Kronrod nodes and weights with the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    /// Discretization error estimate.
    error: f64,
    /// Error inherited from the integrand's own inexact evaluation.
    inherited: f64,
}

/// One Gauss–Kronrod panel; `f` returns (value, value error).
fn gk15(f: &mut impl FnMut(f64) -> (f64, f64), a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let (fc, ec) = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.abs() * WGK[7];
    let mut inherited = ec * WGK[7];
    let mut samples = [0.0f64; 15];
    samples[7] = fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let (f1, e1) = f(center - dx);
        let (f2, e2) = f(center + dx);
        samples[j] = f1;
        samples[14 - j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        inherited += WGK[j] * (e1 + e2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = kronrod * 0.5;
    let mut asc = WGK[7] * (samples[7] - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((samples[j] - mean).abs() + (samples[14 - j] - mean).abs());
    }
    let value = kronrod * half;
    let asc = asc * half.abs();
    let abs_sum = abs_sum * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    error = error.max(50.0 * f64::EPSILON * abs_sum);
    Panel {
        a,
        b,
        value,
        error,
        inherited: inherited * half.abs(),
    }
}

/// Globally adaptive bisection until the summed discretization error is
/// within `tol` or `max_intervals` panels are in use.
fn adaptive_gk15(
    f: &mut impl FnMut(f64) -> (f64, f64),
    a: f64,
    b: f64,
    tol: f64,
    max_intervals: usize,
) -> Estimate {
    let mut panels = vec![gk15(f, a, b)];
    loop {
        let error: f64 = panels.iter().map(|p| p.error).sum();
        if error <= tol || panels.len() >= max_intervals {
            break;
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        panels.push(gk15(f, p.a, mid));
        panels.push(gk15(f, mid, p.b));
    }
    // Sum small panels first.
    panels.sort_by(|x, y| x.value.abs().total_cmp(&y.value.abs()));
    Estimate {
        value: panels.iter().map(|p| p.value).sum(),
        error: panels.iter().map(|p| p.error + p.inherited).sum(),
    }
}

/// Monte Carlo estimate of `Pr(y > lower)` and its standard error, with
/// `y = Cz` for a (semi-definite) Cholesky factor `C`.
pub fn mc_oracle(tp: &TailProblem, samples: usize, seed: u64) -> (f64, f64) {
    let factor = semidefinite_factor(tp.sigma());
    let lower = tp.lower();
    let d = lower.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = vec![0.0f64; d];
    let mut hits = 0usize;
    for _ in 0..samples {
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(&mut rng);
        }
        let inside = (0..d).all(|i| {
            let y: f64 = (0..=i).map(|k| factor[(i, k)] * z[k]).sum();
            y > lower[i]
        });
        if inside {
            hits += 1;
        }
    }
    proportion(hits, samples)
}

/// Sample proportion and its binomial standard error.
pub fn proportion(hits: usize, samples: usize) -> (f64, f64) {
    if samples == 0 {
        return (f64::NAN, f64::NAN);
    }
    let p = hits as f64 / samples as f64;
    (p, (p * (1.0 - p) / samples as f64).sqrt())
}

/// Cholesky factor tolerating zero pivots (the column is dropped).
fn semidefinite_factor(sigma: &DMatrix<f64>) -> DMatrix<f64> {
    let d = sigma.nrows();
    let max_diag = (0..d).map(|i| sigma[(i, i)]).fold(0.0f64, f64::max);
    let mut c = DMatrix::zeros(d, d);
    for j in 0..d {
        let mut diag = sigma[(j, j)];
        for k in 0..j {
            diag -= c[(j, k)] * c[(j, k)];
        }
        if diag <= CHOLESKY_RELATIVE_TOLERANCE * max_diag {
            continue;
        }
        let cjj = diag.sqrt();
        c[(j, j)] = cjj;
        for i in j + 1..d {
            let mut s = sigma[(i, j)];
            for k in 0..j {
                s -= c[(i, k)] * c[(j, k)];
            }
            c[(i, j)] = s / cjj;
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tp(d: usize, sigma: &[f64], lower: &[f64]) -> TailProblem {
        TailProblem::new(DMatrix::from_row_slice(d, d, sigma), lower.to_vec()).unwrap()
    }

    fn orthant(rho: f64) -> f64 {
        0.25 + rho.asin() / (2.0 * std::f64::consts::PI)
    }

    #[test]
    fn normal_cdf_values() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        assert!((1.0 - std_normal_cdf(8.5)).abs() <= 1e-15);
        assert!((std_normal_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-15);
        assert!((std_normal_sf(-1.959_963_984_540_054) - 0.975).abs() < 1e-15);
        // Upper tail keeps relative accuracy.
        let q = std_normal_sf(10.0);
        assert!((q / 7.619_853_024_160_527e-24 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_symmetry() {
        let v = tail_prob(&tp(1, &[4.0], &[0.0]), &QuadratureConfig::default()).unwrap();
        assert_eq!(v, 0.5);
    }

    #[test]
    fn bivariate_orthant_closed_form() {
        for rho in [-0.9, -0.5, 0.0, 0.5, 0.9] {
            let v = tail_prob(
                &tp(2, &[1.0, rho, rho, 1.0], &[0.0, 0.0]),
                &QuadratureConfig::default(),
            )
            .unwrap();
            assert!(
                (v - orthant(rho)).abs() < 1e-8,
                "rho {rho}: {v} vs {}",
                orthant(rho)
            );
        }
    }

    #[test]
    fn trivariate_orthant_closed_form() {
        // Pr(all > 0) = 1/8 + (asin ρ12 + asin ρ13 + asin ρ23) / (4π).
        let (a, b, c) = (0.3, -0.2, 0.5);
        let want =
            0.125 + (f64::asin(a) + f64::asin(b) + f64::asin(c)) / (4.0 * std::f64::consts::PI);
        let v = tail_prob(
            &tp(3, &[1.0, a, b, a, 1.0, c, b, c, 1.0], &[0.0; 3]),
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert!((v - want).abs() < 1e-8, "{v} vs {want}");
    }

    #[test]
    fn independent_coordinates_factorize() {
        let lower = [0.3, -1.2, 2.0, 0.0];
        let want: f64 = lower.iter().map(|&l| std_normal_sf(l)).product();
        let mut sigma = DMatrix::identity(4, 4);
        sigma[(0, 0)] = 9.0;
        let scaled = [0.9, -1.2, 2.0, 0.0];
        let v = tail_prob(
            &TailProblem::new(sigma, scaled.to_vec()).unwrap(),
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert!((v - want).abs() < 1e-8);
    }

    #[test]
    fn monte_carlo_agrees() {
        let cases = [
            tp(1, &[1.0], &[0.0]),
            tp(3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0], &[0.0; 3]),
            tp(2, &[1.0, 0.5, 0.5, 1.0], &[0.0, 0.0]),
            tp(2, &[3.0, 1.0, 1.0, 3.0], &[1.0, 1.0]),
        ];
        for (k, c) in cases.iter().enumerate() {
            let exact = tail_prob(c, &QuadratureConfig::default()).unwrap();
            let (est, se) = mc_oracle(c, 200_000, 7 + k as u64);
            assert!(
                (est - exact).abs() <= 3.0 * se + 1e-12,
                "case {k}: {est} ± {se} vs {exact}"
            );
        }
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let c = tp(2, &[1.0, 0.5, 0.5, 1.0], &[0.0, 0.0]);
        assert_eq!(mc_oracle(&c, 1000, 3), mc_oracle(&c, 1000, 3));
    }

    #[test]
    fn rejects_singular_and_malformed() {
        let singular = tp(2, &[1.0, 1.0, 1.0, 1.0], &[0.0, 0.0]);
        assert!(matches!(
            tail_prob(&singular, &QuadratureConfig::default()),
            Err(TubeError::NotPositiveDefinite { index: 1 })
        ));
        assert!(TailProblem::new(DMatrix::identity(2, 2), vec![0.0]).is_err());
        assert!(TailProblem::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.3, 1.0]),
            vec![0.0, 0.0]
        )
        .is_err());
    }

    #[test]
    fn unattainable_tolerance_is_reported() {
        let c = tp(2, &[1.0, 0.99, 0.99, 1.0], &[0.0, 0.0]);
        let cfg = QuadratureConfig {
            abs_tol: 1e-15,
            max_intervals: 1,
            ..Default::default()
        };
        assert!(matches!(
            tail_prob(&c, &cfg),
            Err(TubeError::ToleranceNotMet { .. })
        ));
    }

    #[test]
    fn far_thresholds() {
        let c = tp(2, &[1.0, 0.3, 0.3, 1.0], &[9.0, 0.0]);
        assert!(tail_prob(&c, &QuadratureConfig::default()).unwrap() < 1e-15);
        let c = tp(2, &[1.0, 0.3, 0.3, 1.0], &[-9.0, -9.0]);
        assert!((tail_prob(&c, &QuadratureConfig::default()).unwrap() - 1.0).abs() < 1e-8);
    }
}
