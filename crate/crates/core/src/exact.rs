//! Exact rational linear algebra: Gaussian elimination and Fourier–Motzkin
//! feasibility for small systems.

use std::collections::HashSet;

use num_traits::{Signed, Zero};

use crate::polyhedron::{IndexSet, Polyhedron};
use crate::scalar::{Rational, Scalar};

/// Linear form `coeffs · x` compared with `rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Row {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
}

impl Row {
    pub fn new(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Row { coeffs, rhs }
    }

    /// Lifts constraint `i` of `p` exactly.
    pub fn from_constraint(p: &Polyhedron, i: usize) -> Self {
        Row {
            coeffs: p.normal(i).iter().map(|&x| Rational::from_f64(x)).collect(),
            rhs: Rational::from_f64(p.rhs()[i]),
        }
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .zip(x)
            .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
    }

    fn is_constant(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Divides by the magnitude of the first nonzero coefficient so that
    /// parallel inequalities with equal offsets compare equal.
    fn normalized(mut self) -> Self {
        if let Some(lead) = self.coeffs.iter().find(|c| !c.is_zero()).map(|c| c.abs()) {
            for c in &mut self.coeffs {
                *c /= &lead;
            }
            self.rhs /= lead;
        }
        self
    }

    /// `self - factor * other`.
    fn minus_multiple(&self, factor: &Rational, other: &Row) -> Row {
        Row {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - factor * b)
                .collect(),
            rhs: &self.rhs - factor * &other.rhs,
        }
    }
}

/// Result of eliminating a set of equalities.
struct Elimination {
    /// Equalities in echelon form; `pivots[k]` is the variable row `k` solves for.
    rows: Vec<Row>,
    pivots: Vec<usize>,
}

/// Reduces `eqs` to echelon form; `None` when they are inconsistent.
fn eliminate(eqs: &[Row]) -> Option<Elimination> {
    let mut rows: Vec<Row> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for eq in eqs {
        let mut r = eq.clone();
        for (row, &p) in rows.iter().zip(pivots.iter()) {
            if !r.coeffs[p].is_zero() {
                let f = &r.coeffs[p] / &row.coeffs[p];
                r = r.minus_multiple(&f, row);
            }
        }
        match r.coeffs.iter().position(|c| !c.is_zero()) {
            Some(p) => {
                // Keep earlier rows free of the new pivot variable.
                for row in rows.iter_mut() {
                    if !row.coeffs[p].is_zero() {
                        let f = &row.coeffs[p] / &r.coeffs[p];
                        *row = row.minus_multiple(&f, &r);
                    }
                }
                rows.push(r);
                pivots.push(p);
            }
            None if r.rhs.is_zero() => {}
            None => return None,
        }
    }
    Some(Elimination { rows, pivots })
}

/// A solution of the equalities `eqs` whose free coordinates take the values
/// in `free` (indexed by variable; pivot entries are ignored). `None` when the
/// system is inconsistent.
pub fn solve_with_free(eqs: &[Row], free: &[Rational]) -> Option<Vec<Rational>> {
    let elim = eliminate(eqs)?;
    let mut x = free.to_vec();
    for &p in &elim.pivots {
        x[p] = Rational::zero();
    }
    // Reduced rows mention only their own pivot among pivot variables.
    let values: Vec<Rational> = elim
        .rows
        .iter()
        .zip(&elim.pivots)
        .map(|(row, &p)| (&row.rhs - row.eval(&x)) / &row.coeffs[p])
        .collect();
    for (&p, v) in elim.pivots.iter().zip(values) {
        x[p] = v;
    }
    Some(x)
}

/// Whether `{x : eqs hold, ineqs (≤) hold}` is nonempty, by substituting the
/// equalities and running Fourier–Motzkin elimination on the rest.
pub fn system_feasible(dim: usize, eqs: &[Row], ineqs: &[Row]) -> bool {
    let Some(elim) = eliminate(eqs) else {
        return false;
    };
    let mut rows: Vec<Row> = ineqs
        .iter()
        .map(|ineq| {
            let mut r = ineq.clone();
            for (eq, &p) in elim.rows.iter().zip(&elim.pivots) {
                if !r.coeffs[p].is_zero() {
                    let f = &r.coeffs[p] / &eq.coeffs[p];
                    r = r.minus_multiple(&f, eq);
                }
            }
            r
        })
        .collect();

    for var in 0..dim {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let mut rest: HashSet<Row> = HashSet::new();
        for r in rows {
            if r.is_constant() {
                if r.rhs.is_negative() {
                    return false;
                }
                continue;
            }
            let c = r.coeffs[var].clone();
            if c.is_positive() {
                pos.push(r);
            } else if c.is_negative() {
                neg.push(r);
            } else {
                rest.insert(r.normalized());
            }
        }
        for p in &pos {
            for q in &neg {
                // p/c_p + q/|c_q| cancels `var`.
                let cp = p.coeffs[var].clone();
                let cq = -q.coeffs[var].clone();
                let combined = Row {
                    coeffs: p
                        .coeffs
                        .iter()
                        .zip(&q.coeffs)
                        .map(|(a, b)| a / &cp + b / &cq)
                        .collect(),
                    rhs: &p.rhs / &cp + &q.rhs / &cq,
                };
                rest.insert(combined.normalized());
            }
        }
        rows = rest.into_iter().collect();
    }
    rows.iter().all(|r| !r.rhs.is_negative())
}

/// Whether the unperturbed face `{x ∈ K : a_iᵀx = b_i, i ∈ J}` is nonempty.
pub fn face_nonempty(p: &Polyhedron, subset: &IndexSet) -> bool {
    let all: Vec<Row> = (0..p.m()).map(|i| Row::from_constraint(p, i)).collect();
    let eqs: Vec<Row> = subset.zero_based().map(|i| all[i].clone()).collect();
    system_feasible(p.n(), &eqs, &all)
}

/// `x ↦ Aᵀx - b` sign pattern: bit `i` set iff `a_iᵀx > b_i`, evaluated exactly.
pub fn violation_mask(rows: &[Row], x: &[Rational]) -> (u128, u128) {
    let mut outside = 0u128;
    let mut on = 0u128;
    for (i, r) in rows.iter().enumerate() {
        let v = r.eval(x);
        if v > r.rhs {
            outside |= 1 << i;
        } else if v == r.rhs {
            on |= 1 << i;
        }
    }
    (outside, on)
}
