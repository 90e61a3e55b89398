//! Construction of the perturbed complex `F(0+)` and the unperturbed face
//! complex `F`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TubeError};
use crate::exact::face_nonempty;
use crate::lexlp::{feasible, identity_order, LpOptions};
use crate::polyhedron::{check_permutation, IndexSet, Polyhedron};
use crate::subsets::CandidateFamily;

/// Default cap on `m` for the exhaustive unperturbed complex.
pub const UNPERTURBED_MAX_M: usize = 20;

/// The simplicial complex `F(0+)` of a perturbed polyhedron.
///
/// Serialized as `{"m":..,"n":..,"r":..,"order":[..],"members":[[1],[2],..]}`
/// with 1-based index lists, members in candidate-rank order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractTube {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    /// `order[i]` is the ε exponent assigned to constraint `i + 1`.
    pub order: Vec<usize>,
    pub members: Vec<IndexSet>,
}

impl AbstractTube {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, subset: &IndexSet) -> bool {
        self.members.contains(subset)
    }

    /// Checks `m` and `n` against `p`.
    pub fn check_matches(&self, p: &Polyhedron) -> Result<()> {
        if self.m != p.m() || self.n != p.n() {
            return Err(TubeError::TubeMismatch(format!(
                "tube has m = {}, n = {} but polyhedron has m = {}, n = {}",
                self.m,
                self.n,
                p.m(),
                p.n()
            )));
        }
        if let Some(bad) = self.members.iter().find(|j| j.check_within(p.m()).is_err()) {
            return Err(TubeError::TubeMismatch(format!(
                "member {bad} out of range"
            )));
        }
        Ok(())
    }

    pub fn stats(&self) -> TubeStats {
        tube_stats(&self.members)
    }
}

#[derive(Clone, Debug, Default)]
pub struct TubeOptions {
    pub lp: LpOptions,
    /// Skip candidates containing a known infeasible subset.
    pub prune: bool,
}

impl TubeOptions {
    pub fn pruned() -> Self {
        TubeOptions {
            prune: true,
            ..Default::default()
        }
    }

    pub fn with_order(mut self, order: Vec<usize>) -> Self {
        self.lp.order = Some(order);
        self
    }
}

/// Minimal infeasible subsets found so far, as bit masks.
#[derive(Default)]
struct InfeasibleStore {
    masks: Vec<u128>,
}

impl InfeasibleStore {
    fn blocks(&self, candidate: u128) -> bool {
        self.masks.iter().any(|&known| known & !candidate == 0)
    }
}

/// Sweeps `J_{r,m}` one cardinality at a time and keeps the subsets whose
/// perturbed face system is feasible.
pub fn build_tube(p: &Polyhedron, opts: &TubeOptions) -> Result<AbstractTube> {
    let m = p.m();
    let order = match &opts.lp.order {
        Some(o) => {
            check_permutation(o, m)?;
            o.clone()
        }
        None => identity_order(m),
    };
    let r = p.rank();
    let family = CandidateFamily::new(m, r)?;
    let mut members = Vec::new();
    let mut store = InfeasibleStore::default();

    for level in 1..=r {
        let candidates: Vec<IndexSet> = family
            .members(family.level(level))
            .filter(|j| !opts.prune || !store.blocks(j.mask()))
            .collect();
        if candidates.is_empty() {
            break;
        }
        let verdicts: Vec<Result<bool>> = candidates
            .par_iter()
            .map(|j| feasible(p, j, &opts.lp))
            .collect();
        let mut found = false;
        for (j, verdict) in candidates.into_iter().zip(verdicts) {
            match verdict {
                Ok(true) => {
                    members.push(j);
                    found = true;
                }
                Ok(false) => store.masks.push(j.mask()),
                Err(TubeError::IterationLimitExceeded { .. }) => {
                    return Err(TubeError::IterationLimitAt { subset: j })
                }
                Err(e) => return Err(e),
            }
        }
        if opts.prune && !found {
            break;
        }
    }

    Ok(AbstractTube {
        m,
        n: p.n(),
        r,
        order,
        members,
    })
}

/// The face complex `F = {J ≠ ∅ : ∩_{i∈J} F_i ≠ ∅}`, decided in exact
/// arithmetic. Subsets of every cardinality up to `m` are considered.
pub fn build_unperturbed_complex(p: &Polyhedron, max_m: usize) -> Result<Vec<IndexSet>> {
    let m = p.m();
    if m > max_m {
        return Err(TubeError::SizeLimitExceeded { m, cap: max_m });
    }
    let family = CandidateFamily::new(m, m)?;
    let mut members = Vec::new();
    let mut store = InfeasibleStore::default();
    for level in 1..=m {
        let candidates: Vec<IndexSet> = family
            .members(family.level(level))
            .filter(|j| !store.blocks(j.mask()))
            .collect();
        let verdicts: Vec<bool> = candidates.par_iter().map(|j| face_nonempty(p, j)).collect();
        for (j, ok) in candidates.into_iter().zip(verdicts) {
            if ok {
                members.push(j);
            } else {
                store.masks.push(j.mask());
            }
        }
    }
    Ok(members)
}

/// Census of a complex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TubeStats {
    pub total: usize,
    /// `by_cardinality[l - 1]` members have `|J| = l`.
    pub by_cardinality: Vec<usize>,
    pub max_cardinality: usize,
}

pub fn tube_stats(members: &[IndexSet]) -> TubeStats {
    let max_cardinality = members.iter().map(IndexSet::len).max().unwrap_or(0);
    let mut by_cardinality = vec![0; max_cardinality];
    for j in members {
        by_cardinality[j.len() - 1] += 1;
    }
    TubeStats {
        total: members.len(),
        by_cardinality,
        max_cardinality,
    }
}

/// Whether every nonempty subset of a member is a member.
pub fn is_downward_closed(members: &[IndexSet]) -> bool {
    let set: std::collections::HashSet<&IndexSet> = members.iter().collect();
    members
        .iter()
        .filter(|j| j.len() > 1)
        .all(|j| j.facets().all(|f| set.contains(&f)))
}
