//! Ranking and unranking of the candidate family
//! `J_{r,m} = { J ⊆ {1..m} : 0 < |J| ≤ r }` under the order that compares
//! cardinality first and then the sorted index tuples lexicographically.
//!
//! Ranks are 1-based and held in `u128`, which is exact for every `m ≤ 127`.

use crate::error::{Result, TubeError};
use crate::polyhedron::IndexSet;

/// Largest `m` whose family sizes fit in a `u128`.
pub const MAX_M: usize = 127;

/// Binomial coefficient `C(n, k)`, zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    // Each intermediate value is C(n - k + i, i); dividing out the common
    // factor first keeps the product within range up to the final value.
    (1..=k as u128).fold(1u128, |acc, i| {
        let g = gcd(acc, i);
        (acc / g) * ((n as u128 - k as u128 + i) / (i / g))
    })
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `J_{r,m}` for fixed `m` and maximal cardinality `r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CandidateFamily {
    m: usize,
    r: usize,
}

impl CandidateFamily {
    pub fn new(m: usize, r: usize) -> Result<Self> {
        if m > MAX_M {
            return Err(TubeError::FamilyTooLarge { m, max: MAX_M });
        }
        if r > m {
            return Err(TubeError::InvalidParameter(format!(
                "r = {r} exceeds m = {m}"
            )));
        }
        Ok(CandidateFamily { m, r })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// `|J_{r,m}|`.
    pub fn size(&self) -> u128 {
        family_size(self.m, self.r)
    }

    /// Ranks of the members of cardinality `l`, as the half-open range
    /// `[|J_{l-1,m}| + 1, |J_{l,m}| + 1)`.
    pub fn level(&self, l: usize) -> std::ops::Range<u128> {
        family_size(self.m, l - 1) + 1..family_size(self.m, l) + 1
    }

    /// Position `L` of `subset`, via
    /// `L = 1 + |J_{l-1,m}| + Σ_{j=1..l} Σ_{k=d_{j-1}+1..d_j-1} C(m-k, l-j)`
    /// with `d_0 = 0`.
    pub fn rank(&self, subset: &IndexSet) -> Result<u128> {
        let d = subset.indices();
        let l = d.len();
        if l == 0 || l > self.r || d[l - 1] > self.m {
            return Err(TubeError::NotInFamily {
                subset: subset.clone(),
                m: self.m,
                r: self.r,
            });
        }
        let mut rank = 1 + family_size(self.m, l - 1);
        let mut prev = 0;
        for (j, &dj) in d.iter().enumerate() {
            for k in prev + 1..dj {
                rank += binomial(self.m - k, l - (j + 1));
            }
            prev = dj;
        }
        Ok(rank)
    }

    /// Inverse of [`rank`](Self::rank):
    /// `l = max{l ≥ 1 : |J_{l-1,m}| < L}`, then each `d_j` is the largest
    /// value keeping the partial sum below `L - |J_{l-1,m}|`.
    pub fn unrank(&self, rank: u128) -> Result<IndexSet> {
        let size = self.size();
        if rank == 0 || rank > size {
            return Err(TubeError::RankOutOfRange { rank, size });
        }
        let l = (1..=self.r)
            .filter(|&l| family_size(self.m, l - 1) < rank)
            .max()
            .expect("rank >= 1 implies l = 1 qualifies");
        let target = rank - family_size(self.m, l - 1);
        let mut d = Vec::with_capacity(l);
        let mut prev = 0;
        let mut partial = 0u128;
        for j in 1..=l {
            // Raising d_j from prev + 1 adds C(m - k, l - j) for each skipped k.
            let mut dj = prev + 1;
            loop {
                let step = binomial(self.m - dj, l - j);
                if partial + step < target {
                    partial += step;
                    dj += 1;
                } else {
                    break;
                }
            }
            d.push(dj);
            prev = dj;
        }
        Ok(IndexSet::from_sorted_unchecked(d))
    }

    /// Members with ranks in `range`, in order.
    pub fn members(&self, range: std::ops::Range<u128>) -> impl Iterator<Item = IndexSet> + '_ {
        range.map(move |l| self.unrank(l).expect("rank within family"))
    }
}

/// `|J_{r,m}| = Σ_{j=1..r} C(m, j)`.
pub fn family_size(m: usize, r: usize) -> u128 {
    (1..=r).map(|j| binomial(m, j)).sum()
}
