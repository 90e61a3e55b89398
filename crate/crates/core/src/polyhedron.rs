//! The input inequality system `Aᵀx ≤ b` and the sub-systems built from it.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TubeError};

/// Singular values below this fraction of the largest one count as zero.
pub const RANK_RELATIVE_TOLERANCE: f64 = 1e-10;

/// Closed convex polyhedron `{x ∈ Rⁿ : a_iᵀx ≤ b_i, i = 1..m}`.
///
/// Serialized as `{"n":..,"m":..,"A":[[..]..],"b":[..]}` where row `i` of
/// `A` holds the normal `a_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolyhedron", into = "RawPolyhedron")]
pub struct Polyhedron {
    n: usize,
    normals: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawPolyhedron {
    n: usize,
    m: usize,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

impl TryFrom<RawPolyhedron> for Polyhedron {
    type Error = TubeError;

    fn try_from(raw: RawPolyhedron) -> Result<Self> {
        if raw.a.len() != raw.m {
            return Err(TubeError::ShapeMismatch(format!(
                "\"m\" is {} but \"A\" has {} rows",
                raw.m,
                raw.a.len()
            )));
        }
        Polyhedron::new(raw.n, raw.a, raw.b)
    }
}

impl From<Polyhedron> for RawPolyhedron {
    fn from(p: Polyhedron) -> Self {
        RawPolyhedron {
            n: p.n,
            m: p.m(),
            a: p.normals,
            b: p.rhs,
        }
    }
}

impl Polyhedron {
    /// Builds and validates a polyhedron from its normals (one per constraint)
    /// and right-hand side.
    pub fn new(n: usize, normals: Vec<Vec<f64>>, rhs: Vec<f64>) -> Result<Self> {
        let p = Polyhedron { n, normals, rhs };
        p.validate()?;
        Ok(p)
    }

    /// Checks every structural invariant; `new` already calls this.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(TubeError::ShapeMismatch("n must be at least 1".into()));
        }
        if self.normals.is_empty() {
            return Err(TubeError::ShapeMismatch("m must be at least 1".into()));
        }
        if self.rhs.len() != self.normals.len() {
            return Err(TubeError::ShapeMismatch(format!(
                "{} normals but {} right-hand sides",
                self.normals.len(),
                self.rhs.len()
            )));
        }
        for (i, a) in self.normals.iter().enumerate() {
            if a.len() != self.n {
                return Err(TubeError::ShapeMismatch(format!(
                    "normal {} has {} entries, expected {}",
                    i + 1,
                    a.len(),
                    self.n
                )));
            }
            if a.iter().any(|x| !x.is_finite()) {
                return Err(TubeError::NonFinite("A"));
            }
            if a.iter().all(|&x| x == 0.0) {
                return Err(TubeError::ZeroNormal(i + 1));
            }
        }
        if self.rhs.iter().any(|x| !x.is_finite()) {
            return Err(TubeError::NonFinite("b"));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.normals.len()
    }

    /// Normal of constraint `i` (0-based).
    pub fn normal(&self, i: usize) -> &[f64] {
        &self.normals[i]
    }

    pub fn normals(&self) -> &[Vec<f64>] {
        &self.normals
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// `A` as an `n × m` matrix whose columns are the normals.
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.m(), |r, c| self.normals[c][r])
    }

    /// Numerical rank of `A`.
    pub fn rank(&self) -> usize {
        let svd = self.matrix().svd(false, false);
        let max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        if max == 0.0 {
            return 0;
        }
        svd.singular_values
            .iter()
            .filter(|&&s| s > RANK_RELATIVE_TOLERANCE * max)
            .count()
    }

    /// Sub-system indexed by `subset`, with its Gram matrix `A_JᵀA_J`.
    pub fn cone_term(&self, subset: &IndexSet) -> Result<ConeTerm> {
        subset.check_within(self.m())?;
        let normals: Vec<Vec<f64>> = subset
            .zero_based()
            .map(|i| self.normals[i].clone())
            .collect();
        let rhs = subset.zero_based().map(|i| self.rhs[i]).collect();
        let d = normals.len();
        let gram = DMatrix::from_fn(d, d, |r, c| dot(&normals[r], &normals[c]));
        Ok(ConeTerm {
            subset: subset.clone(),
            normals,
            rhs,
            gram,
        })
    }

    /// Same constraints with the perturbation exponents reassigned, i.e. the
    /// polyhedron whose identity perturbation equals `order` on `self`.
    /// `order[i]` is the 1-based position constraint `i + 1` moves to.
    pub fn permuted(&self, order: &[usize]) -> Result<Polyhedron> {
        check_permutation(order, self.m())?;
        let mut normals = vec![Vec::new(); self.m()];
        let mut rhs = vec![0.0; self.m()];
        for (i, &pos) in order.iter().enumerate() {
            normals[pos - 1] = self.normals[i].clone();
            rhs[pos - 1] = self.rhs[i];
        }
        Polyhedron::new(self.n, normals, rhs)
    }

    /// Embeds the system in `Rⁿ⁺ᵏ` by appending `extra` zero coordinates to
    /// every normal.
    pub fn with_extra_dimensions(&self, extra: usize) -> Polyhedron {
        let normals = self
            .normals
            .iter()
            .map(|a| {
                let mut a = a.clone();
                a.resize(self.n + extra, 0.0);
                a
            })
            .collect();
        Polyhedron {
            n: self.n + extra,
            normals,
            rhs: self.rhs.clone(),
        }
    }

    /// Whether `x` satisfies every inequality.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.normals
            .iter()
            .zip(&self.rhs)
            .all(|(a, &b)| dot(a, x) <= b)
    }
}

/// Validates a 1-based permutation of `1..=m`.
pub fn check_permutation(order: &[usize], m: usize) -> Result<()> {
    if order.len() != m {
        return Err(TubeError::InvalidOrder(format!(
            "expected {m} entries, got {}",
            order.len()
        )));
    }
    let mut seen = vec![false; m];
    for &o in order {
        if o == 0 || o > m || seen[o - 1] {
            return Err(TubeError::InvalidOrder(format!(
                "{order:?} is not a permutation of 1..={m}"
            )));
        }
        seen[o - 1] = true;
    }
    Ok(())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Strictly increasing list of 1-based constraint indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    /// Accepts any order; rejects zero and duplicates.
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        if indices.contains(&0) {
            return Err(TubeError::InvalidIndexSet("indices are 1-based".into()));
        }
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(TubeError::InvalidIndexSet(format!(
                "duplicate index in {indices:?}"
            )));
        }
        Ok(IndexSet(indices))
    }

    pub(crate) fn from_sorted_unchecked(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        IndexSet(indices)
    }

    /// From 0-based positions.
    pub fn from_zero_based(iter: impl IntoIterator<Item = usize>) -> Result<Self> {
        Self::new(iter.into_iter().map(|i| i + 1).collect())
    }

    /// Parses `"1,3,4"`.
    pub fn parse(s: &str) -> Result<Self> {
        let indices = s
            .split(',')
            .map(|t| t.trim())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| TubeError::InvalidIndexSet(format!("bad index {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn zero_based(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|i| i - 1)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn is_subset_of(&self, other: &IndexSet) -> bool {
        self.0.iter().all(|&i| other.contains(i))
    }

    /// Bit `i - 1` set for each member `i`.
    pub fn mask(&self) -> u128 {
        self.0
            .iter()
            .fold(0u128, |acc, &i| acc | (1u128 << (i - 1)))
    }

    pub fn from_mask(mask: u128) -> Self {
        IndexSet(
            (0..128)
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| b + 1)
                .collect(),
        )
    }

    pub(crate) fn check_within(&self, m: usize) -> Result<()> {
        if self.0.is_empty() {
            return Err(TubeError::InvalidIndexSet("empty index set".into()));
        }
        match self.0.last() {
            Some(&last) if last > m => Err(TubeError::IndexOutOfRange { index: last, m }),
            _ => Ok(()),
        }
    }

    /// Every subset obtained by dropping one element.
    pub fn facets(&self) -> impl Iterator<Item = IndexSet> + '_ {
        (0..self.0.len()).map(move |skip| {
            IndexSet(
                self.0
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != skip)
                    .map(|(_, &i)| i)
                    .collect(),
            )
        })
    }

    /// Sign `(-1)^{|J|-1}` of the term in the inclusion-exclusion sum.
    pub fn sign(&self) -> i32 {
        if self.0.len() % 2 == 1 {
            1
        } else {
            -1
        }
    }
}

impl TryFrom<Vec<usize>> for IndexSet {
    type Error = TubeError;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        IndexSet::new(v)
    }
}

impl From<IndexSet> for Vec<usize> {
    fn from(s: IndexSet) -> Self {
        s.0
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// One inclusion-exclusion term `∩_{i∈J} {a_iᵀx > b_i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeTerm {
    pub subset: IndexSet,
    /// `a_i` for `i ∈ J`, in index order.
    pub normals: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    /// `A_JᵀA_J`.
    pub gram: DMatrix<f64>,
}

impl ConeTerm {
    pub fn is_positive_definite(&self) -> bool {
        self.gram.clone().cholesky().is_some()
            && self.gram.symmetric_eigenvalues().iter().all(|&e| e > 0.0)
    }
}

/// Fixture systems used throughout the tests and the CLI.
pub mod fixtures {
    use super::Polyhedron;

    /// Four facets through the apex `(0,0,1)`.
    pub fn pyramid() -> Polyhedron {
        Polyhedron::new(
            3,
            vec![
                vec![-1.0, -1.0, 1.0],
                vec![-1.0, 1.0, 1.0],
                vec![1.0, 1.0, 1.0],
                vec![1.0, -1.0, 1.0],
            ],
            vec![1.0; 4],
        )
        .expect("valid pyramid")
    }

    /// Three lines through the origin in the `x₁x₂` plane, the third redundant.
    pub fn redundant() -> Polyhedron {
        Polyhedron::new(
            3,
            vec![
                vec![1.0, -1.0, 0.0],
                vec![-1.0, -1.0, 0.0],
                vec![0.0, -1.0, 0.0],
            ],
            vec![0.0; 3],
        )
        .expect("valid redundant system")
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn single_halfspace_is_valid() {
        let p = Polyhedron::new(2, vec![vec![1.0, 0.0]], vec![0.0]).unwrap();
        assert_eq!((p.n(), p.m()), (2, 1));
        assert_eq!(p.rank(), 1);
    }

    #[test]
    fn zero_normal_rejected() {
        let err = Polyhedron::new(2, vec![vec![1.0, 0.0], vec![0.0, 0.0]], vec![0.0, 1.0]);
        assert_eq!(err.unwrap_err(), TubeError::ZeroNormal(2));
    }

    #[test]
    fn shape_mismatch_rejected() {
        assert!(matches!(
            Polyhedron::new(2, vec![vec![1.0, 0.0]], vec![0.0, 1.0]),
            Err(TubeError::ShapeMismatch(_))
        ));
        assert!(matches!(
            Polyhedron::new(3, vec![vec![1.0, 0.0]], vec![0.0]),
            Err(TubeError::ShapeMismatch(_))
        ));
        assert!(matches!(
            Polyhedron::new(0, vec![], vec![]),
            Err(TubeError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn ranks_of_fixtures() {
        assert_eq!(pyramid().rank(), 3);
        assert_eq!(redundant().rank(), 2);
        for n in 1..6 {
            let eye = (0..n)
                .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect();
            assert_eq!(Polyhedron::new(n, eye, vec![1.0; n]).unwrap().rank(), n);
        }
    }

    #[test]
    fn gram_matrices() {
        let t = pyramid()
            .cone_term(&IndexSet::parse("1,2").unwrap())
            .unwrap();
        assert_eq!(t.gram, DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 3.0]));
        assert!(t.is_positive_definite());

        let t = pyramid().cone_term(&IndexSet::parse("4").unwrap()).unwrap();
        assert_eq!(t.gram, DMatrix::from_element(1, 1, 3.0));

        let t = redundant()
            .cone_term(&IndexSet::parse("1,2,3").unwrap())
            .unwrap();
        assert!(t.gram.determinant().abs() < 1e-12);
        assert!(!t.is_positive_definite());
    }

    #[test]
    fn cone_term_index_errors() {
        let p = pyramid();
        assert_eq!(
            p.cone_term(&IndexSet::parse("2,5").unwrap()).unwrap_err(),
            TubeError::IndexOutOfRange { index: 5, m: 4 }
        );
        assert!(p.cone_term(&IndexSet::new(vec![]).unwrap()).is_err());
    }

    #[test]
    fn json_round_trip_and_layout() {
        let p = pyramid();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.starts_with(r#"{"n":3,"m":4,"A":[[-1.0,-1.0,1.0]"#));
        let q: Polyhedron = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);

        let bad = r#"{"n":2,"m":2,"A":[[1,0],[0,0]],"b":[0,0]}"#;
        assert!(serde_json::from_str::<Polyhedron>(bad).is_err());
        let bad_m = r#"{"n":2,"m":3,"A":[[1,0],[0,1]],"b":[0,0]}"#;
        assert!(serde_json::from_str::<Polyhedron>(bad_m).is_err());
    }

    #[test]
    fn index_sets() {
        let j = IndexSet::new(vec![4, 1, 2]).unwrap();
        assert_eq!(j.indices(), &[1, 2, 4]);
        assert_eq!(j.to_string(), "{1,2,4}");
        assert_eq!(IndexSet::from_mask(j.mask()), j);
        assert_eq!(j.sign(), 1);
        assert_eq!(j.facets().count(), 3);
        assert!(IndexSet::new(vec![1, 1]).is_err());
        assert!(IndexSet::new(vec![0]).is_err());
        assert!(IndexSet::parse("1,x").is_err());
    }

    #[test]
    fn permutation_moves_constraints() {
        let p = redundant().permuted(&[2, 3, 1]).unwrap();
        assert_eq!(p.normal(0), redundant().normal(2));
        assert_eq!(p.normal(1), redundant().normal(0));
        assert!(redundant().permuted(&[1, 1, 2]).is_err());
    }
}
