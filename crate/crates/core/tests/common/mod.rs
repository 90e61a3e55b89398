#![allow(dead_code)]

use abstract_tube::polyhedron::fixtures::{pyramid, redundant};
use abstract_tube::srange::{studentized_polyhedron, StudentizedRangeSpec};
use abstract_tube::{IndexSet, Polyhedron};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn set(s: &str) -> IndexSet {
    IndexSet::parse(s).unwrap()
}

/// Members written as digit strings, e.g. "1 2 13".
pub fn digits(list: &str) -> Vec<IndexSet> {
    list.split_whitespace()
        .map(|w| {
            IndexSet::new(
                w.chars()
                    .map(|c| c.to_digit(10).unwrap() as usize)
                    .collect(),
            )
            .unwrap()
        })
        .collect()
}

/// Small systems shipped with the crate and the docs.
pub fn bundled() -> Vec<(&'static str, Polyhedron)> {
    vec![
        ("pyramid", pyramid()),
        ("redundant", redundant()),
        (
            "half-space",
            Polyhedron::new(2, vec![vec![1.0, 0.0]], vec![0.0]).unwrap(),
        ),
        (
            "slab",
            Polyhedron::new(1, vec![vec![1.0], vec![-1.0]], vec![1.0, 1.0]).unwrap(),
        ),
        (
            "studentized k=3",
            studentized_polyhedron(&StudentizedRangeSpec::equal(3, 2.0).unwrap()),
        ),
        (
            "studentized k=4",
            studentized_polyhedron(&StudentizedRangeSpec::equal(4, 2.0).unwrap()),
        ),
    ]
}

/// Integer system with `n ∈ [1, n_max]`, `m ∈ [1, m_max]`, nonzero normals with
/// entries in `[-coef, coef]` and right-hand sides in `[b_lo, b_hi]`.
pub fn random_system(
    rng: &mut ChaCha8Rng,
    n_max: usize,
    m_max: usize,
    coef: i64,
    b_lo: i64,
    b_hi: i64,
) -> Polyhedron {
    let n = rng.gen_range(1..=n_max);
    let m = rng.gen_range(1..=m_max);
    let normals = (0..m)
        .map(|_| loop {
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-coef..=coef) as f64).collect();
            if a.iter().any(|&x| x != 0.0) {
                break a;
            }
        })
        .collect();
    let rhs = (0..m).map(|_| rng.gen_range(b_lo..=b_hi) as f64).collect();
    Polyhedron::new(n, normals, rhs).unwrap()
}

/// Every nonempty subset of `{1..m}` of size at most `r`, sorted by size and
/// then lexicographically.
pub fn brute_force_order(m: usize, r: usize) -> Vec<IndexSet> {
    let mut all: Vec<Vec<usize>> = (1u32..(1 << m))
        .map(|mask| {
            (1..=m)
                .filter(|i| mask >> (i - 1) & 1 == 1)
                .collect::<Vec<_>>()
        })
        .filter(|v| v.len() <= r)
        .collect();
    all.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    all.into_iter().map(|v| IndexSet::new(v).unwrap()).collect()
}

pub type Q = BigRational;

pub fn q(x: f64) -> Q {
    BigRational::from_float(x).unwrap()
}

/// `ε^k` as an exact rational, `ε = 10^{-e}`.
pub fn eps_pow(e: u32, k: usize) -> Q {
    Q::new(BigInt::one(), BigInt::from(10).pow(e * k as u32))
}

/// Some solution of `rows · x = rhs`, with free variables at zero; `None`
/// when inconsistent.
pub fn solve_equalities(rows: &[Vec<Q>], rhs: &[Q], n: usize) -> Option<Vec<Q>> {
    let mut aug: Vec<Vec<Q>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut v = r.clone();
            v.push(b.clone());
            v
        })
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..aug.len()).find(|&i| !aug[i][col].is_zero()) else {
            continue;
        };
        aug.swap(row, p);
        let lead = aug[row][col].clone();
        for v in aug[row].iter_mut() {
            *v /= &lead;
        }
        for i in 0..aug.len() {
            if i != row && !aug[i][col].is_zero() {
                let f = aug[i][col].clone();
                let pivot_row = aug[row].clone();
                for (t, v) in aug[i].iter_mut().zip(&pivot_row) {
                    *t -= &f * v;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if aug[row..].iter().any(|r| !r[n].is_zero()) {
        return None;
    }
    let mut x = vec![Q::zero(); n];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = aug[i][n].clone();
    }
    Some(x)
}

/// Membership of `subset` in the perturbed complex at a fixed small `ε`:
/// the face is nonempty iff some `S ⊇ J` pins down a minimal face, i.e. the
/// equalities on `S` have a solution satisfying every constraint.
pub fn brute_force_feasible(
    p: &Polyhedron,
    subset: &IndexSet,
    order: &[usize],
    eps_exp: u32,
) -> bool {
    let m = p.m();
    let n = p.n();
    let a: Vec<Vec<Q>> = (0..m)
        .map(|i| p.normal(i).iter().map(|&x| q(x)).collect())
        .collect();
    let b: Vec<Q> = (0..m)
        .map(|i| q(p.rhs()[i]) + eps_pow(eps_exp, order[i]))
        .collect();
    let base = subset.mask();
    (0u32..(1 << m))
        .filter(|s| (*s as u128) & base == base)
        .any(|s| {
            let idx: Vec<usize> = (0..m).filter(|i| s >> i & 1 == 1).collect();
            let rows: Vec<Vec<Q>> = idx.iter().map(|&i| a[i].clone()).collect();
            let rhs: Vec<Q> = idx.iter().map(|&i| b[i].clone()).collect();
            match solve_equalities(&rows, &rhs, n) {
                Some(x) => (0..m).all(|i| {
                    let v: Q = a[i].iter().zip(&x).map(|(u, w)| u * w).sum();
                    !(v - &b[i]).is_positive()
                }),
                None => false,
            }
        })
}
