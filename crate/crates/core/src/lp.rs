//! Exact rational linear programming: dense two-phase tableau simplex with
//! Bland's anti-cycling rule.
//!
//! Program variables are free (sign-unrestricted); each one is split into a
//! difference of two non-negative columns before entering the tableau.

use num_traits::{One, Signed, Zero};

use crate::expr::{AffineExpr, AffineInequality, Point, Relation};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpResult {
    pub status: LpStatus,
    /// Optimal objective value; `Some` iff `status == Optimal`.
    pub value: Option<Rational>,
    /// Optimal point over all variables; `Some` iff `status == Optimal`.
    pub witness: Option<Point>,
}

impl LpResult {
    fn without_solution(status: LpStatus) -> Self {
        LpResult {
            status,
            value: None,
            witness: None,
        }
    }
}

/// `maximize objective` subject to `constraints`, where the objective is a
/// single distinguished variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpInstance {
    pub variables: Vec<String>,
    pub objective: String,
    pub constraints: Vec<AffineInequality>,
}

pub fn simplex_solve(lp: &LpInstance) -> LpResult {
    maximize(&lp.variables, &lp.constraints, &AffineExpr::var(&lp.objective))
}

/// Maximizes an affine objective over free variables subject to affine
/// constraints. Every variable mentioned anywhere must be in `variables`.
pub fn maximize(
    variables: &[String],
    constraints: &[AffineInequality],
    objective: &AffineExpr,
) -> LpResult {
    let n = variables.len();
    let index_of = |name: &str| {
        variables
            .iter()
            .position(|v| v == name)
            .unwrap_or_else(|| panic!("variable `{name}` not declared in LP"))
    };

    // Rows `a . x (rel) b` with b >= 0 after sign normalization.
    let mut rows: Vec<(Vec<Rational>, Relation, Rational)> = Vec::with_capacity(constraints.len());
    for c in constraints {
        let (diff, mut rel) = c.normalized();
        let mut a = vec![Rational::zero(); n];
        for (name, coeff) in diff.terms() {
            a[index_of(name)] = coeff.clone();
        }
        let mut b = -diff.constant_term().clone();
        if b.is_negative() {
            a.iter_mut().for_each(|x| *x = -x.clone());
            b = -b;
            rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
        if a.iter().all(Zero::is_zero) {
            // constant row: 0 (rel) b with b >= 0
            let ok = match rel {
                Relation::Le => true,
                Relation::Eq | Relation::Ge => b.is_zero(),
            };
            if !ok {
                return LpResult::without_solution(LpStatus::Infeasible);
            }
            continue;
        }
        rows.push((a, rel, b));
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let slack_start = 2 * n;
    let art_start = slack_start + n_slack;
    let width = art_start + n_art;

    let mut tab = Tableau {
        rows: Vec::with_capacity(m),
        rhs: Vec::with_capacity(m),
        basis: Vec::with_capacity(m),
        obj: vec![Rational::zero(); width],
        obj_value: Rational::zero(),
        allowed: width,
    };
    let (mut next_slack, mut next_art) = (slack_start, art_start);
    for (a, rel, b) in rows {
        let mut row = vec![Rational::zero(); width];
        for (j, coeff) in a.into_iter().enumerate() {
            row[2 * j + 1] = -coeff.clone();
            row[2 * j] = coeff;
        }
        let basic = match rel {
            Relation::Le => {
                row[next_slack] = Rational::one();
                next_slack += 1;
                next_slack - 1
            }
            Relation::Ge => {
                row[next_slack] = -Rational::one();
                next_slack += 1;
                row[next_art] = Rational::one();
                next_art += 1;
                next_art - 1
            }
            Relation::Eq => {
                row[next_art] = Rational::one();
                next_art += 1;
                next_art - 1
            }
        };
        tab.rows.push(row);
        tab.rhs.push(b);
        tab.basis.push(basic);
    }

    // Phase 1: maximize -(sum of artificials).
    if n_art > 0 {
        let mut cost = vec![Rational::zero(); width];
        cost[art_start..].iter_mut().for_each(|c| *c = -Rational::one());
        tab.set_objective(&cost);
        let status = tab.run();
        debug_assert_eq!(status, LpStatus::Optimal, "phase 1 is bounded");
        if tab.obj_value.is_negative() {
            return LpResult::without_solution(LpStatus::Infeasible);
        }
        tab.drive_out_artificials(art_start);
        tab.allowed = art_start;
    }

    // Phase 2.
    let mut cost = vec![Rational::zero(); width];
    for (name, coeff) in objective.terms() {
        let j = index_of(name);
        cost[2 * j] = coeff.clone();
        cost[2 * j + 1] = -coeff.clone();
    }
    tab.set_objective(&cost);
    if tab.run() == LpStatus::Unbounded {
        return LpResult::without_solution(LpStatus::Unbounded);
    }

    let mut column_values = vec![Rational::zero(); width];
    for (r, &b) in tab.basis.iter().enumerate() {
        column_values[b] = tab.rhs[r].clone();
    }
    let witness: Point = variables
        .iter()
        .enumerate()
        .map(|(j, name)| (name.clone(), &column_values[2 * j] - &column_values[2 * j + 1]))
        .collect();
    let value = objective
        .eval(&witness)
        .expect("witness assigns every variable");
    LpResult {
        status: LpStatus::Optimal,
        value: Some(value),
        witness: Some(witness),
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    /// Reduced costs `c_B B^-1 A_j - c_j`; a negative entry may enter.
    obj: Vec<Rational>,
    /// Current objective value `c_B B^-1 b`.
    obj_value: Rational,
    /// Columns `>= allowed` never enter the basis.
    allowed: usize,
}

impl Tableau {
    fn set_objective(&mut self, cost: &[Rational]) {
        self.obj = cost.iter().map(|c| -c.clone()).collect();
        self.obj_value = Rational::zero();
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (o, a) in self.obj.iter_mut().zip(&self.rows[r]) {
                if !a.is_zero() {
                    *o += cb * a;
                }
            }
            self.obj_value += cb * &self.rhs[r];
        }
    }

    fn run(&mut self) -> LpStatus {
        loop {
            // Bland: lowest-index improving column ...
            let Some(col) = (0..self.allowed).find(|&j| self.obj[j].is_negative()) else {
                return LpStatus::Optimal;
            };
            // ... and among minimum-ratio rows, the lowest-index basic variable.
            let mut best: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[r] / a;
                let better = match &best {
                    None => true,
                    Some((br, bratio)) => {
                        ratio < *bratio || (ratio == *bratio && self.basis[r] < self.basis[*br])
                    }
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            let Some((row, _)) = best else {
                return LpStatus::Unbounded;
            };
            self.pivot(row, col);
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.rows[row][col].recip();
        for x in self.rows[row].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        self.rhs[row] *= &inv;
        let nonzero: Vec<usize> = (0..self.rows[row].len())
            .filter(|&j| !self.rows[row][j].is_zero())
            .collect();
        let pivot_row = self.rows[row].clone();
        let pivot_rhs = self.rhs[row].clone();
        for r in 0..self.rows.len() {
            if r == row || self.rows[r][col].is_zero() {
                continue;
            }
            let f = self.rows[r][col].clone();
            for &j in &nonzero {
                let delta = &f * &pivot_row[j];
                self.rows[r][j] -= delta;
            }
            self.rhs[r] -= &f * &pivot_rhs;
        }
        if !self.obj[col].is_zero() {
            let f = self.obj[col].clone();
            for &j in &nonzero {
                let delta = &f * &pivot_row[j];
                self.obj[j] -= delta;
            }
            self.obj_value -= &f * &pivot_rhs;
        }
        self.basis[row] = col;
    }

    /// After a feasible phase 1, every basic artificial sits at zero. Pivot it
    /// out on any non-artificial column; if the row has none, it is redundant.
    fn drive_out_artificials(&mut self, art_start: usize) {
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] < art_start {
                r += 1;
                continue;
            }
            match (0..art_start).find(|&j| !self.rows[r][j].is_zero()) {
                Some(j) => {
                    self.pivot(r, j);
                    r += 1;
                }
                None => {
                    self.rows.remove(r);
                    self.rhs.remove(r);
                    self.basis.remove(r);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn le(lhs: AffineExpr, rhs: AffineExpr) -> AffineInequality {
        AffineInequality::new(lhs, Relation::Le, rhs)
    }
    fn ge(lhs: AffineExpr, rhs: AffineExpr) -> AffineInequality {
        AffineInequality::new(lhs, Relation::Ge, rhs)
    }
    fn x() -> AffineExpr {
        AffineExpr::var("x")
    }
    fn t() -> AffineExpr {
        AffineExpr::var("t")
    }
    fn c(v: i64) -> AffineExpr {
        AffineExpr::constant(int(v))
    }
    fn instance(constraints: Vec<AffineInequality>) -> LpInstance {
        LpInstance {
            variables: vec!["x".into(), "t".into()],
            objective: "t".into(),
            constraints,
        }
    }

    #[test]
    fn tent_optimum() {
        let r = simplex_solve(&instance(vec![
            le(t(), x()),
            le(t(), c(2).sub(&x())),
            ge(x(), c(0)),
            le(x(), c(2)),
        ]));
        assert_eq!(r.status, LpStatus::Optimal);
        assert_eq!(r.value, Some(int(1)));
        assert_eq!(r.witness.unwrap()["x"], int(1));
    }

    #[test]
    fn infeasible_box() {
        let r = simplex_solve(&instance(vec![le(t(), x()), le(x(), c(-1)), ge(x(), c(0))]));
        assert_eq!(r.status, LpStatus::Infeasible);
        assert!(r.value.is_none());
    }

    #[test]
    fn unbounded_ray() {
        let r = simplex_solve(&instance(vec![le(t(), x()), ge(x(), c(0))]));
        assert_eq!(r.status, LpStatus::Unbounded);
    }

    #[test]
    fn negative_optimum_with_equalities() {
        // max t s.t. t <= y - 1, y == x/2, 0 <= x <= 1  ->  t = -1/2
        let y = AffineExpr::var("y");
        let r = maximize(
            &["x".into(), "y".into(), "t".into()],
            &[
                le(t(), y.sub(&c(1))),
                AffineInequality::new(y.clone(), Relation::Eq, x().scale(&rat(1, 2))),
                ge(x(), c(0)),
                le(x(), c(1)),
            ],
            &t(),
        );
        assert_eq!(r.value, Some(rat(-1, 2)));
        let w = r.witness.unwrap();
        assert_eq!(w["x"], int(1));
        assert_eq!(w["y"], rat(1, 2));
    }

    #[test]
    fn redundant_equalities_are_tolerated() {
        let r = maximize(
            &["x".into()],
            &[
                AffineInequality::new(x(), Relation::Eq, c(3)),
                AffineInequality::new(x().scale(&int(2)), Relation::Eq, c(6)),
            ],
            &x(),
        );
        assert_eq!(r.value, Some(int(3)));
    }

    #[test]
    fn constant_rows() {
        let ok = maximize(&["x".into()], &[le(c(0), c(1)), le(x(), c(1))], &x());
        assert_eq!(ok.value, Some(int(1)));
        let bad = maximize(&["x".into()], &[le(c(1), c(0)), le(x(), c(1))], &x());
        assert_eq!(bad.status, LpStatus::Infeasible);
    }

    #[test]
    fn degenerate_vertex_terminates() {
        // Several constraints meet at the optimum (0, 0); Bland's rule must not cycle.
        let y = AffineExpr::var("y");
        let r = maximize(
            &["x".into(), "y".into()],
            &[
                le(x().add(&y), c(0)),
                le(x().sub(&y), c(0)),
                le(x().scale(&int(2)).add(&y), c(0)),
                le(x().scale(&int(3)).sub(&y.scale(&int(2))), c(0)),
                ge(x(), c(-1)),
            ],
            &x().add(&y.scale(&rat(1, 3))),
        );
        assert_eq!(r.status, LpStatus::Optimal);
        assert_eq!(r.value, Some(int(0)));
    }
}
