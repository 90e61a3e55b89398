//! Feasibility of the perturbed face system
//!
//! ```text
//! a_iᵀx = b_i + ε^{e_i}   (i ∈ J)
//! a_iᵀx ≤ b_i + ε^{e_i}   (i ∉ J)
//! ```
//!
//! for infinitesimal `ε > 0`, decided by pivoting on the tableau
//!
//! ```text
//! [  Aᵀ     -Aᵀ    -b(ε)  ]
//! [ -A_Jᵀ    A_Jᵀ   b_J(ε) ]
//! [  1ᵀ      1ᵀ     0      ]
//! ```
//!
//! where `x - y` splits the free vector into nonnegative parts. Each row
//! expresses its row variable as `Σ_j t_ij w_j + t_iN` over the column
//! variables `w_j`. The initial rows hold the negated slacks `-u_i`, `-v_j`.
//! A pivot exchanges a row and a column variable in place, so a variable keeps
//! its orientation (held as `v` or as `-v`) wherever it moves; the pivot rules
//! read that orientation from the row and column labels. Only the last column
//! carries ε-polynomials, and it is never a pivot column, so every pivot
//! element is a plain scalar.

use std::collections::HashMap;
use std::sync::Arc;

use crate::eps::EpsPoly;
use crate::error::{Result, TubeError};
use crate::polyhedron::{check_permutation, IndexSet, Polyhedron};
use crate::scalar::{Rational, Scalar, Sign, SignTolerance};

/// A nonnegative LP variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variable {
    /// `u_i`, slack of inequality `i` (0-based).
    Slack(usize),
    /// `v_j`, slack of the reversed inequality for `j ∈ J` (0-based).
    Surplus(usize),
    /// `x_k`.
    Plus(usize),
    /// `y_k`.
    Minus(usize),
    /// The bottom row, `Σ x_k + Σ y_k`.
    Objective,
}

/// Which variable a row or column holds, and whether it is held negated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Label {
    pub var: Variable,
    pub negated: bool,
}

impl Label {
    fn orient(self, s: Sign) -> Sign {
        if self.negated {
            s.flip()
        } else {
            s
        }
    }
}

/// Pivoting tableau; every column but the last holds scalars, the last holds
/// ε-polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct Tableau<S> {
    rows: usize,
    width: usize,
    body: Vec<S>,
    rhs: Vec<EpsPoly<S>>,
    row_labels: Vec<Label>,
    col_labels: Vec<Label>,
    /// The tableau before any pivot, for recomputing the current one.
    initial: Option<Arc<Initial<S>>>,
}

#[derive(Debug, PartialEq)]
struct Initial<S> {
    body: Vec<S>,
    rhs: Vec<EpsPoly<S>>,
    row_vars: Vec<Variable>,
    col_vars: Vec<Variable>,
}

/// Identity perturbation: constraint `i` receives `ε^i`.
pub fn identity_order(m: usize) -> Vec<usize> {
    (1..=m).collect()
}

impl<S: Scalar> Tableau<S> {
    /// Initial tableau for `subset`, perturbing constraint `i` by
    /// `ε^{order[i]}`.
    pub fn build(p: &Polyhedron, subset: &IndexSet, order: &[usize]) -> Result<Self> {
        subset.check_within(p.m())?;
        check_permutation(order, p.m())?;
        let (n, m) = (p.n(), p.m());
        let rows = m + subset.len() + 1;
        let width = 2 * n;
        let mut body = Vec::with_capacity(rows * width);
        let mut rhs = Vec::with_capacity(rows);
        let mut row_labels = Vec::with_capacity(rows);

        let normal = |i: usize| p.normal(i).iter().map(|&x| S::from_f64(x));
        let perturbed = |i: usize| EpsPoly::shifted_constant(m, S::from_f64(p.rhs()[i]), order[i]);

        for i in 0..m {
            body.extend(normal(i));
            body.extend(normal(i).map(|x| -x));
            let mut r = perturbed(i);
            r.negate();
            rhs.push(r);
            row_labels.push(Label {
                var: Variable::Slack(i),
                negated: true,
            });
        }
        for j in subset.zero_based() {
            body.extend(normal(j).map(|x| -x));
            body.extend(normal(j));
            rhs.push(perturbed(j));
            row_labels.push(Label {
                var: Variable::Surplus(j),
                negated: true,
            });
        }
        body.extend(std::iter::repeat_n(S::one(), width));
        rhs.push(EpsPoly::zero(m));
        row_labels.push(Label {
            var: Variable::Objective,
            negated: false,
        });

        let col_labels = (0..n)
            .map(Variable::Plus)
            .chain((0..n).map(Variable::Minus))
            .map(|var| Label {
                var,
                negated: false,
            })
            .collect();

        Ok(Tableau {
            rows,
            width,
            body,
            rhs,
            row_labels,
            col_labels,
            initial: None,
        }
        .remember())
    }

    fn remember(mut self) -> Self {
        self.initial = Some(Arc::new(Initial {
            body: self.body.clone(),
            rhs: self.rhs.clone(),
            row_vars: self.row_labels.iter().map(|l| l.var).collect(),
            col_vars: self.col_labels.iter().map(|l| l.var).collect(),
        }));
        self
    }

    /// Tableau from raw parts, with placeholder labels: `body` is row-major
    /// `rows × (N-1)`, `rhs` the last column.
    pub fn from_parts(body: Vec<Vec<S>>, rhs: Vec<EpsPoly<S>>) -> Result<Self> {
        let rows = body.len();
        let width = body.first().map_or(0, Vec::len);
        if rhs.len() != rows || body.iter().any(|r| r.len() != width) {
            return Err(TubeError::ShapeMismatch("ragged tableau".into()));
        }
        if let Some(first) = rhs.first() {
            if rhs.iter().any(|r| r.degree_bound() != first.degree_bound()) {
                return Err(TubeError::DegreeMismatch(first.degree_bound(), 0));
            }
        }
        Ok(Tableau {
            rows,
            width,
            body: body.into_iter().flatten().collect(),
            rhs,
            row_labels: (0..rows)
                .map(|i| Label {
                    var: Variable::Slack(i),
                    negated: false,
                })
                .collect(),
            col_labels: (0..width)
                .map(|j| Label {
                    var: Variable::Plus(j),
                    negated: false,
                })
                .collect(),
            initial: None,
        }
        .remember())
    }

    /// `M`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// `N`, counting the ε-polynomial column.
    pub fn cols(&self) -> usize {
        self.width + 1
    }

    /// Scalar entry at 0-based `(row, col)` with `col < N - 1`.
    pub fn entry(&self, row: usize, col: usize) -> &S {
        &self.body[row * self.width + col]
    }

    /// Last-column entry of `row`.
    pub fn rhs(&self, row: usize) -> &EpsPoly<S> {
        &self.rhs[row]
    }

    pub fn row_label(&self, row: usize) -> Label {
        self.row_labels[row]
    }

    pub fn col_label(&self, col: usize) -> Label {
        self.col_labels[col]
    }

    /// Exchanges row `i0` with column `j0` (0-based, `j0 < N - 1`):
    ///
    /// ```text
    /// t_ij   := t_ij - t_ij0 t_i0j / t_i0j0
    /// t_ij0  := t_ij0 / t_i0j0
    /// t_i0j  := -t_i0j / t_i0j0
    /// t_i0j0 := 1 / t_i0j0
    /// ```
    pub fn pivot(&mut self, i0: usize, j0: usize) -> Result<()> {
        if i0 >= self.rows || j0 >= self.width {
            return Err(TubeError::ShapeMismatch(format!(
                "pivot ({i0}, {j0}) outside {}x{} scalar block",
                self.rows, self.width
            )));
        }
        let w = self.width;
        let pivot = self.body[i0 * w + j0].clone();
        if pivot.is_zero() {
            return Err(TubeError::ZeroPivot { row: i0, col: j0 });
        }
        let pivot_row: Vec<S> = self.body[i0 * w..(i0 + 1) * w].to_vec();
        let pivot_rhs = self.rhs[i0].clone();

        for i in 0..self.rows {
            if i == i0 {
                continue;
            }
            let factor = self.body[i * w + j0].clone() / pivot.clone();
            if factor.is_zero() {
                continue;
            }
            let row = &mut self.body[i * w..(i + 1) * w];
            for (j, t) in row.iter_mut().enumerate() {
                if j != j0 && !pivot_row[j].is_zero() {
                    *t -= &(factor.clone() * pivot_row[j].clone());
                }
            }
            row[j0] = factor.clone();
            self.rhs[i].axpy(&-factor, &pivot_rhs)?;
        }

        let row = &mut self.body[i0 * w..(i0 + 1) * w];
        for (j, t) in row.iter_mut().enumerate() {
            if j != j0 {
                *t = -t.clone() / pivot.clone();
            }
        }
        row[j0] = S::one() / pivot.clone();
        self.rhs[i0] = pivot_rhs.scale(&(-S::one() / pivot));

        std::mem::swap(&mut self.row_labels[i0], &mut self.col_labels[j0]);
        Ok(())
    }

    /// Row choice: the first non-objective row whose variable is negative at the
    /// current basic solution.
    fn violated_row(&self, tol: SignTolerance) -> Option<usize> {
        (0..self.rows - 1)
            .find(|&i| self.row_labels[i].orient(self.rhs[i].sign(tol)) == Sign::Negative)
    }

    /// Column choice: among columns whose variable can grow to repair row `i0`, the
    /// one maximizing `t_Mj / |t_i0j|` (objective coefficient oriented to the
    /// column variable); ties go to the smallest column.
    fn entering_column(&self, i0: usize, tol: SignTolerance) -> Option<usize> {
        let w = self.width;
        let row_label = self.row_labels[i0];
        let objective = (self.rows - 1) * w;
        let mut best: Option<(usize, S, S)> = None;
        for j in 0..w {
            let t = &self.body[i0 * w + j];
            let col_label = self.col_labels[j];
            if col_label.orient(row_label.orient(t.sign_tol(tol))) != Sign::Positive {
                continue;
            }
            let reduced = self.body[objective + j].clone();
            let reduced = if col_label.negated { -reduced } else { reduced };
            let denom = t.abs();
            let better = match &best {
                None => true,
                Some((_, c, d)) => exceeds(
                    &(reduced.clone() * d.clone()),
                    &(c.clone() * denom.clone()),
                    tol,
                ),
            };
            if better {
                best = Some((j, reduced, denom));
            }
        }
        best.map(|(j, _, _)| j)
    }

    /// Recomputes every entry from the initial tableau for the current
    /// basis, discarding the roundoff accumulated over earlier pivots.
    ///
    /// Let `I` be the initial rows whose variables now sit in columns and
    /// `J` the initial columns whose variables now sit in rows. Writing the
    /// initial rows as `y_I = A w_J + B w_rest + r_I` with `A` square and
    /// nonsingular, the current rows follow from `w_J = A⁻¹(y_I - B w_rest - r_I)`.
    /// Returns `false`, leaving the tableau alone, when `A` is numerically
    /// singular.
    pub fn refactor(&mut self) -> bool {
        let Some(init) = self.initial.clone() else {
            return false;
        };
        let w = self.width;
        // Current position of every variable: (in a row?, index).
        let mut at: HashMap<Variable, (bool, usize)> = HashMap::with_capacity(self.rows + w);
        for (i, l) in self.row_labels.iter().enumerate() {
            at.insert(l.var, (true, i));
        }
        for (j, l) in self.col_labels.iter().enumerate() {
            at.insert(l.var, (false, j));
        }
        let ex_rows: Vec<usize> = (0..self.rows)
            .filter(|&i| !at[&init.row_vars[i]].0)
            .collect();
        let ex_cols: Vec<usize> = (0..w).filter(|&j| at[&init.col_vars[j]].0).collect();
        let k = ex_rows.len();
        debug_assert_eq!(k, ex_cols.len());
        let t0 = |i: usize, j: usize| init.body[i * w + j].clone();

        // Gauss-Jordan with partial pivoting on [A | I | T0[I, :] | r_I].
        let mut a: Vec<Vec<S>> = ex_rows
            .iter()
            .map(|&i| ex_cols.iter().map(|&j| t0(i, j)).collect())
            .collect();
        let mut g: Vec<Vec<S>> = (0..k)
            .map(|r| {
                (0..k)
                    .map(|c| if r == c { S::one() } else { S::zero() })
                    .collect()
            })
            .collect();
        let mut h: Vec<Vec<S>> = ex_rows
            .iter()
            .map(|&i| init.body[i * w..(i + 1) * w].to_vec())
            .collect();
        let mut hr: Vec<EpsPoly<S>> = ex_rows.iter().map(|&i| init.rhs[i].clone()).collect();
        for c in 0..k {
            let Some(p) =
                (c..k).max_by(|&x, &y| a[x][c].to_f64().abs().total_cmp(&a[y][c].to_f64().abs()))
            else {
                return false;
            };
            if a[p][c].is_zero() || !a[p][c].to_f64().is_finite() {
                return false;
            }
            a.swap(c, p);
            g.swap(c, p);
            h.swap(c, p);
            hr.swap(c, p);
            let inv = S::one() / a[c][c].clone();
            for v in a[c]
                .iter_mut()
                .chain(g[c].iter_mut())
                .chain(h[c].iter_mut())
            {
                *v = v.clone() * inv.clone();
            }
            hr[c] = hr[c].scale(&inv);
            for r in 0..k {
                let f = a[r][c].clone();
                if r == c || f.is_zero() {
                    continue;
                }
                for q in 0..k {
                    let d = f.clone() * a[c][q].clone();
                    a[r][q] -= &d;
                    let d = f.clone() * g[c][q].clone();
                    g[r][q] -= &d;
                }
                let (pivot_h, target_h) = if r < c {
                    let (lo, hi) = h.split_at_mut(c);
                    (&hi[0], &mut lo[r])
                } else {
                    let (lo, hi) = h.split_at_mut(r);
                    (&lo[c], &mut hi[0])
                };
                for (t, v) in target_h.iter_mut().zip(pivot_h) {
                    let d = f.clone() * v.clone();
                    *t -= &d;
                }
                let pivot_rhs = hr[c].clone();
                if hr[r].axpy(&-f, &pivot_rhs).is_err() {
                    return false;
                }
            }
        }

        // Column position of each exchanged initial row, and of each initial
        // column still in a column.
        let y_col: Vec<usize> = ex_rows.iter().map(|&i| at[&init.row_vars[i]].1).collect();
        let c_col: Vec<Option<usize>> = (0..w)
            .map(|j| match at[&init.col_vars[j]] {
                (false, q) => Some(q),
                (true, _) => None,
            })
            .collect();

        let mut body = vec![S::zero(); self.rows * w];
        let mut rhs = self.rhs.clone();
        // Rows now holding an initial column variable: w_J = G y_I - H w_rest - h.
        for (a_idx, &j) in ex_cols.iter().enumerate() {
            let p = at[&init.col_vars[j]].1;
            let row = &mut body[p * w..(p + 1) * w];
            for (b, &q) in y_col.iter().enumerate() {
                row[q] = g[a_idx][b].clone();
            }
            for (c, q) in c_col.iter().enumerate() {
                if let Some(q) = q {
                    row[*q] = -h[a_idx][c].clone();
                }
            }
            let mut r = hr[a_idx].clone();
            r.negate();
            rhs[p] = r;
        }
        // Rows still holding an initial row variable: substitute w_J.
        for z in 0..self.rows {
            let (in_row, p) = at[&init.row_vars[z]];
            if !in_row {
                continue;
            }
            let coupling: Vec<S> = ex_cols.iter().map(|&j| t0(z, j)).collect();
            let row = &mut body[p * w..(p + 1) * w];
            for (b, &q) in y_col.iter().enumerate() {
                let mut v = S::zero();
                for (a_idx, t) in coupling.iter().enumerate() {
                    v += &(t.clone() * g[a_idx][b].clone());
                }
                row[q] = v;
            }
            for (c, q) in c_col.iter().enumerate() {
                if let Some(q) = q {
                    let mut v = t0(z, c);
                    for (a_idx, t) in coupling.iter().enumerate() {
                        v -= &(t.clone() * h[a_idx][c].clone());
                    }
                    row[*q] = v;
                }
            }
            let mut r = init.rhs[z].clone();
            for (a_idx, t) in coupling.iter().enumerate() {
                if r.axpy(&-t.clone(), &hr[a_idx]).is_err() {
                    return false;
                }
            }
            rhs[p] = r;
        }
        self.body = body;
        self.rhs = rhs;
        true
    }

    /// Largest absolute entry, ε-coefficients included.
    fn magnitude(&self) -> f64 {
        let body = self.body.iter().map(|x| x.to_f64().abs());
        let rhs = self
            .rhs
            .iter()
            .flat_map(|r| r.coeffs().iter().map(|x| x.to_f64().abs()));
        body.chain(rhs).fold(0.0, f64::max)
    }

    /// Runs the pivoting loop to completion. For floating-point scalars the
    /// sign threshold is `tol` times the largest magnitude seen so far (at
    /// least one), and the tableau is recomputed by [`Tableau::refactor`]
    /// every few pivots and before any verdict, so a verdict always rests on
    /// freshly computed entries.
    pub fn solve(&mut self, tol: SignTolerance) -> Result<Outcome> {
        const REFACTOR_EVERY: usize = 8;
        let limit = 10 * self.rows * self.cols();
        let mut scale = 1.0f64;
        let mut stale = 0usize;
        let mut pivots = 0usize;
        while pivots <= limit {
            // Roundoff grows with the largest magnitude the tableau has held.
            let tol = if S::is_exact() {
                tol
            } else {
                scale = scale.max(self.magnitude());
                SignTolerance::new(tol.value() * scale).unwrap_or(tol)
            };
            let step = self
                .violated_row(tol)
                .map(|i0| (i0, self.entering_column(i0, tol)));
            let concluding = !matches!(step, Some((_, Some(_))));
            if stale > 0 && (concluding || stale >= REFACTOR_EVERY) {
                stale = 0;
                if self.refactor() {
                    continue;
                }
            }
            let (i0, j0) = match step {
                None => {
                    return Ok(Outcome {
                        feasible: true,
                        pivots,
                    })
                }
                Some((_, None)) => {
                    return Ok(Outcome {
                        feasible: false,
                        pivots,
                    })
                }
                Some((i0, Some(j0))) => (i0, j0),
            };
            self.pivot(i0, j0)?;
            pivots += 1;
            if !S::is_exact() {
                stale += 1;
            }
        }
        Err(TubeError::IterationLimitExceeded { limit })
    }
}

/// `a > b`, with floating-point near-ties counted as ties so that they fall
/// to the smallest column as they would in exact arithmetic.
fn exceeds<S: Scalar>(a: &S, b: &S, tol: SignTolerance) -> bool {
    if S::is_exact() {
        a > b
    } else {
        let (x, y) = (a.to_f64(), b.to_f64());
        x - y > tol.value() * (x.abs() + y.abs())
    }
}

/// Result of [`Tableau::solve`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub feasible: bool,
    pub pivots: usize,
}

/// Arithmetic used for the pivoting.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Backend {
    /// `f64` with tolerance-based sign tests.
    #[default]
    Float,
    /// Arbitrary-precision rationals; the tolerance is ignored.
    Exact,
}

/// Options for a feasibility query.
#[derive(Clone, Debug, Default)]
pub struct LpOptions {
    pub tol: SignTolerance,
    pub backend: Backend,
    /// `order[i]` is the ε exponent given to constraint `i + 1`; identity when
    /// `None`.
    pub order: Option<Vec<usize>>,
}

/// Whether `subset` belongs to the perturbed complex `F(0+)`.
pub fn feasible(p: &Polyhedron, subset: &IndexSet, opts: &LpOptions) -> Result<bool> {
    let order = match &opts.order {
        Some(o) => o.clone(),
        None => identity_order(p.m()),
    };
    let outcome = match opts.backend {
        Backend::Float => Tableau::<f64>::build(p, subset, &order)?.solve(opts.tol),
        Backend::Exact => Tableau::<Rational>::build(p, subset, &order)?.solve(opts.tol),
    }?;
    Ok(outcome.feasible)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyhedron::fixtures::{pyramid, redundant};
    use crate::scalar::int;
    use num_traits::Zero;

    fn set(s: &str) -> IndexSet {
        IndexSet::parse(s).unwrap()
    }

    fn both(p: &Polyhedron, j: &str, order: Option<Vec<usize>>) -> bool {
        let f = feasible(
            p,
            &set(j),
            &LpOptions {
                order: order.clone(),
                ..Default::default()
            },
        )
        .unwrap();
        let e = feasible(
            p,
            &set(j),
            &LpOptions {
                order,
                backend: Backend::Exact,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(f, e, "backends disagree on {j}");
        f
    }

    #[test]
    fn redundant_singleton_tableau_layout() {
        let t = Tableau::<Rational>::build(&redundant(), &set("3"), &identity_order(3)).unwrap();
        assert_eq!((t.rows(), t.cols()), (5, 7));
        let eps_power = |k: usize, sign: i64| {
            let mut c = vec![int(0); 4];
            c[k] = int(sign);
            EpsPoly::from_coeffs(c)
        };
        assert_eq!(t.rhs(0), &eps_power(1, -1));
        assert_eq!(t.rhs(1), &eps_power(2, -1));
        assert_eq!(t.rhs(2), &eps_power(3, -1));
        assert_eq!(t.rhs(3), &eps_power(3, 1));
        assert_eq!(t.rhs(4), &EpsPoly::zero(3));
        assert_eq!(t.entry(4, 6 - 1), &int(1));
    }

    #[test]
    fn middle_block_negates_top_row() {
        let p = pyramid();
        let t = Tableau::<f64>::build(&p, &set("1"), &identity_order(4)).unwrap();
        for j in 0..6 {
            assert_eq!(*t.entry(4, j), -*t.entry(0, j));
        }
        let mut r = t.rhs(0).clone();
        r.negate();
        assert_eq!(t.rhs(4), &r);
    }

    #[test]
    fn pyramid_tableau_shape() {
        let t = Tableau::<f64>::build(&pyramid(), &set("1,3"), &identity_order(4)).unwrap();
        assert_eq!((t.rows(), t.cols()), (7, 7));
    }

    #[test]
    fn pivot_rules_by_hand() {
        let c = |x: f64| EpsPoly::from_coeffs(vec![x]);
        let mut t = Tableau::from_parts(vec![vec![2.0], vec![1.0]], vec![c(4.0), c(3.0)]).unwrap();
        t.pivot(0, 0).unwrap();
        assert_eq!(*t.entry(0, 0), 0.5);
        assert_eq!(t.rhs(0), &c(-2.0));
        assert_eq!(*t.entry(1, 0), 0.5);
        assert_eq!(t.rhs(1), &c(1.0));
    }

    #[test]
    fn pivot_is_an_involution() {
        let orig = Tableau::<Rational>::build(&pyramid(), &set("2,4"), &identity_order(4)).unwrap();
        let mut t = orig.clone();
        t.pivot(1, 2).unwrap();
        assert_ne!(t, orig);
        t.pivot(1, 2).unwrap();
        assert_eq!(t, orig);
    }

    #[test]
    fn zero_rhs_row_leaves_other_rhs_alone() {
        let z = |x: f64, y: f64| EpsPoly::from_coeffs(vec![x, y]);
        let mut t = Tableau::from_parts(
            vec![vec![2.0, 1.0], vec![1.0, 5.0], vec![-3.0, 1.0]],
            vec![z(0.0, 0.0), z(1.0, 2.0), z(-1.0, 4.0)],
        )
        .unwrap();
        t.pivot(0, 0).unwrap();
        assert_eq!(t.rhs(1), &z(1.0, 2.0));
        assert_eq!(t.rhs(2), &z(-1.0, 4.0));
    }

    #[test]
    fn refactor_reproduces_pivoted_tableau() {
        let mut t =
            Tableau::<Rational>::build(&pyramid(), &set("1,2"), &identity_order(4)).unwrap();
        for step in 0..8 {
            let i = (3 * step) % t.rows();
            let Some(j) = (0..t.cols() - 1)
                .map(|j| (j + step) % (t.cols() - 1))
                .find(|&j| !t.entry(i, j).is_zero())
            else {
                continue;
            };
            t.pivot(i, j).unwrap();
            let mut r = t.clone();
            assert!(r.refactor());
            assert_eq!(r, t, "after pivot ({i}, {j})");
        }
    }

    #[test]
    fn refactor_without_pivots_is_identity() {
        let t = Tableau::<f64>::build(&redundant(), &set("1,3"), &identity_order(3)).unwrap();
        let mut r = t.clone();
        assert!(r.refactor());
        assert_eq!(r, t);
    }

    #[test]
    fn zero_pivot_rejected() {
        let c = |x: f64| EpsPoly::from_coeffs(vec![x]);
        let mut t = Tableau::from_parts(vec![vec![0.0], vec![1.0]], vec![c(1.0), c(1.0)]).unwrap();
        assert_eq!(
            t.pivot(0, 0).unwrap_err(),
            TubeError::ZeroPivot { row: 0, col: 0 }
        );
    }

    #[test]
    fn pyramid_memberships() {
        let p = pyramid();
        assert!(!both(&p, "1,3", None));
        assert!(both(&p, "1,2,4", None));
        assert!(both(&p, "2,3,4", None));
        assert!(!both(&p, "1,2,3", None));
    }

    #[test]
    fn redundant_memberships_depend_on_order() {
        let p = redundant();
        assert!(!both(&p, "1,2", None));
        assert!(both(&p, "1,3", None));
        assert!(both(&p, "1,2", Some(vec![2, 3, 1])));
        assert!(!both(&p, "1,3", Some(vec![2, 3, 1])));
    }

    #[test]
    fn bad_inputs() {
        let p = pyramid();
        assert!(matches!(
            feasible(&p, &set("5"), &LpOptions::default()),
            Err(TubeError::IndexOutOfRange { .. })
        ));
        let opts = LpOptions {
            order: Some(vec![1, 2, 3]),
            ..Default::default()
        };
        assert!(matches!(
            feasible(&p, &set("1"), &opts),
            Err(TubeError::InvalidOrder(_))
        ));
    }
}
