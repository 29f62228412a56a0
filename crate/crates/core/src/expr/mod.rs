//! Piecewise-linear maximin programs: affine expressions, `max`/`min`/`if`
//! bound trees, and the program container with its exact evaluator.
//!
//! A program maximizes, over a bounded polytope, the minimum of its bounds.
//! Each bound is a tree whose leaves are affine expressions in the declared
//! variables. All values are exact rationals.

mod display;
mod parse;
mod witness;

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::rational::Rational;

pub use parse::{parse_program, ParseError};
pub use witness::{parse_witness, Witness};

/// Assignment of rational values to variable names.
pub type Point = BTreeMap<String, Rational>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no value assigned to variable `{0}`")]
    MissingVariable(String),
}

/// `constant + sum(coefficient * variable)`. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct AffineExpr {
    constant: Rational,
    coeffs: BTreeMap<String, Rational>,
}

impl AffineExpr {
    pub fn constant(value: Rational) -> Self {
        AffineExpr {
            constant: value,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn var(name: &str) -> Self {
        Self::term(name, Rational::from_integer(1.into()))
    }

    pub fn term(name: &str, coeff: Rational) -> Self {
        let mut coeffs = BTreeMap::new();
        if !coeff.is_zero() {
            coeffs.insert(name.to_string(), coeff);
        }
        AffineExpr {
            constant: Rational::zero(),
            coeffs,
        }
    }

    pub fn constant_term(&self) -> &Rational {
        &self.constant
    }

    pub fn coefficient(&self, name: &str) -> Option<&Rational> {
        self.coeffs.get(name)
    }

    /// Non-zero coefficients in variable-name order.
    pub fn terms(&self) -> impl Iterator<Item = (&str, &Rational)> {
        self.coeffs.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &AffineExpr) -> AffineExpr {
        let mut out = self.clone();
        out.constant += &other.constant;
        for (name, c) in &other.coeffs {
            let entry = out.coeffs.entry(name.clone()).or_insert_with(Rational::zero);
            *entry += c;
            if entry.is_zero() {
                out.coeffs.remove(name);
            }
        }
        out
    }

    pub fn sub(&self, other: &AffineExpr) -> AffineExpr {
        self.add(&other.scale(&-Rational::from_integer(1.into())))
    }

    pub fn scale(&self, factor: &Rational) -> AffineExpr {
        if factor.is_zero() {
            return AffineExpr::default();
        }
        AffineExpr {
            constant: &self.constant * factor,
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, v)| (k.clone(), v * factor))
                .collect(),
        }
    }

    pub fn eval(&self, point: &Point) -> Result<Rational, EvalError> {
        let mut acc = self.constant.clone();
        for (name, c) in &self.coeffs {
            let v = point
                .get(name)
                .ok_or_else(|| EvalError::MissingVariable(name.clone()))?;
            acc += c * v;
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "==",
            Relation::Ge => ">=",
        }
    }
}

/// `lhs (<=|==|>=) rhs`, all non-strict.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffineInequality {
    pub lhs: AffineExpr,
    pub relation: Relation,
    pub rhs: AffineExpr,
}

impl AffineInequality {
    pub fn new(lhs: AffineExpr, relation: Relation, rhs: AffineExpr) -> Self {
        AffineInequality { lhs, relation, rhs }
    }

    /// `(lhs - rhs, relation)`, i.e. the constraint `difference relation 0`.
    pub fn normalized(&self) -> (AffineExpr, Relation) {
        (self.lhs.sub(&self.rhs), self.relation)
    }

    /// Non-strict complement used for the failing polarity of an `if`:
    /// `lhs <= rhs` becomes `lhs >= rhs` (and vice versa). Equalities are kept.
    pub fn complement(&self) -> AffineInequality {
        let relation = match self.relation {
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            Relation::Eq => Relation::Eq,
        };
        AffineInequality::new(self.lhs.clone(), relation, self.rhs.clone())
    }

    pub fn holds(&self, point: &Point) -> Result<bool, EvalError> {
        let (diff, rel) = self.normalized();
        let v = diff.eval(point)?;
        Ok(match rel {
            Relation::Le => !v.is_positive(),
            Relation::Eq => v.is_zero(),
            Relation::Ge => !v.is_negative(),
        })
    }
}

/// Bound tree. `Max`/`Min` carry at least two children; `If` conditions are
/// single non-strict inequalities and the then-branch is taken when the
/// condition holds.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BoundExpr {
    Affine(AffineExpr),
    Max(Vec<BoundExpr>),
    Min(Vec<BoundExpr>),
    If {
        condition: AffineInequality,
        then: Box<BoundExpr>,
        otherwise: Box<BoundExpr>,
    },
}

impl BoundExpr {
    pub fn eval(&self, point: &Point) -> Result<Rational, EvalError> {
        match self {
            BoundExpr::Affine(a) => a.eval(point),
            BoundExpr::Max(children) => fold_children(children, point, |a, b| a.max(b)),
            BoundExpr::Min(children) => fold_children(children, point, |a, b| a.min(b)),
            BoundExpr::If {
                condition,
                then,
                otherwise,
            } => {
                if condition.holds(point)? {
                    then.eval(point)
                } else {
                    otherwise.eval(point)
                }
            }
        }
    }

    pub fn as_affine(&self) -> Option<&AffineExpr> {
        match self {
            BoundExpr::Affine(a) => Some(a),
            _ => None,
        }
    }

    /// Sum of two trees, pushed down to the leaves so the result only uses
    /// the four node kinds.
    pub(crate) fn plus(&self, other: &BoundExpr) -> BoundExpr {
        match (self, other) {
            (BoundExpr::Affine(a), BoundExpr::Affine(b)) => BoundExpr::Affine(a.add(b)),
            (BoundExpr::Affine(_), _) => other.plus(self),
            (BoundExpr::Max(cs), _) => BoundExpr::Max(cs.iter().map(|c| c.plus(other)).collect()),
            (BoundExpr::Min(cs), _) => BoundExpr::Min(cs.iter().map(|c| c.plus(other)).collect()),
            (
                BoundExpr::If {
                    condition,
                    then,
                    otherwise,
                },
                _,
            ) => BoundExpr::If {
                condition: condition.clone(),
                then: Box::new(then.plus(other)),
                otherwise: Box::new(otherwise.plus(other)),
            },
        }
    }

    /// Multiplication by a rational; a negative factor swaps max and min.
    pub(crate) fn times(&self, factor: &Rational) -> BoundExpr {
        if factor.is_zero() {
            return BoundExpr::Affine(AffineExpr::default());
        }
        let flip = factor.is_negative();
        match self {
            BoundExpr::Affine(a) => BoundExpr::Affine(a.scale(factor)),
            BoundExpr::Max(cs) | BoundExpr::Min(cs) => {
                let scaled = cs.iter().map(|c| c.times(factor)).collect();
                match (self, flip) {
                    (BoundExpr::Max(_), false) | (BoundExpr::Min(_), true) => BoundExpr::Max(scaled),
                    _ => BoundExpr::Min(scaled),
                }
            }
            BoundExpr::If {
                condition,
                then,
                otherwise,
            } => BoundExpr::If {
                condition: condition.clone(),
                then: Box::new(then.times(factor)),
                otherwise: Box::new(otherwise.times(factor)),
            },
        }
    }

    /// Pre-order visit of every node, including both arms of every `If`.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a BoundExpr)) {
        f(self);
        match self {
            BoundExpr::Affine(_) => {}
            BoundExpr::Max(cs) | BoundExpr::Min(cs) => cs.iter().for_each(|c| c.visit(f)),
            BoundExpr::If { then, otherwise, .. } => {
                then.visit(f);
                otherwise.visit(f);
            }
        }
    }
}

fn fold_children(
    children: &[BoundExpr],
    point: &Point,
    pick: impl Fn(Rational, Rational) -> Rational,
) -> Result<Rational, EvalError> {
    let mut iter = children.iter();
    let first = iter
        .next()
        .expect("max/min nodes have at least two children")
        .eval(point)?;
    iter.try_fold(first, |acc, c| Ok(pick(acc, c.eval(point)?)))
}

/// Result of [`Program::check_feasible`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Feasibility {
    pub feasible: bool,
    /// Indices into [`Program::constraints`] of the violated constraints.
    pub violated: Vec<usize>,
}

/// Maximize, over the polytope cut out by `constraints`, the minimum of `bounds`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub(crate) variables: Vec<String>,
    pub(crate) constants: BTreeMap<String, Rational>,
    pub(crate) constraints: Vec<AffineInequality>,
    pub(crate) bounds: Vec<BoundExpr>,
}

impl Program {
    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn constants(&self) -> &BTreeMap<String, Rational> {
        &self.constants
    }

    pub fn constraints(&self) -> &[AffineInequality] {
        &self.constraints
    }

    pub fn bounds(&self) -> &[BoundExpr] {
        &self.bounds
    }

    /// Objective value: the minimum over all bounds. Feasibility is not checked.
    pub fn eval(&self, point: &Point) -> Result<Rational, EvalError> {
        fold_children(&self.bounds, point, |a, b| a.min(b))
    }

    pub fn check_feasible(&self, point: &Point) -> Result<Feasibility, EvalError> {
        let mut violated = Vec::new();
        for (i, c) in self.constraints.iter().enumerate() {
            if !c.holds(point)? {
                violated.push(i);
            }
        }
        Ok(Feasibility {
            feasible: violated.is_empty(),
            violated,
        })
    }

    /// Copy of the program with bound `index` removed. Returns `None` when
    /// the index is out of range or the program would be left without bounds.
    pub fn without_bound(&self, index: usize) -> Option<Program> {
        if index >= self.bounds.len() || self.bounds.len() == 1 {
            return None;
        }
        let mut out = self.clone();
        out.bounds.remove(index);
        Some(out)
    }

    /// Bounds whose `if` else-branches are not constants. Closed-cell branch
    /// enumeration is only guaranteed exact when this list is empty.
    pub fn nonconstant_else_branches(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, b) in self.bounds.iter().enumerate() {
            let mut bad = false;
            b.visit(&mut |node| {
                if let BoundExpr::If { otherwise, .. } = node {
                    if !matches!(otherwise.as_affine(), Some(a) if a.is_constant()) {
                        bad = true;
                    }
                }
            });
            if bad {
                out.push(i);
            }
        }
        out
    }
}
