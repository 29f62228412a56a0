//! Exact global maximization of `min(bounds)` over a bounded polytope.
//!
//! Every `max` node and every `if` node of every bound is a branching point.
//! A [`BranchSelection`] fixes one child per `max` node and one polarity per
//! `if` node; with those choices fixed the objective `min(bounds) >= t`
//! becomes a conjunction of affine constraints `t <= leaf`, which one exact
//! simplex run maximizes.
//!
//! Why the maximum over all branches is the exact optimum:
//!
//! * Upper bound. Take any feasible point `x`. Select, at every `max` node,
//!   a child attaining the maximum at `x`, and at every `if` node the
//!   polarity that actually holds at `x`. Under that selection every active
//!   leaf evaluates at `x` to at least the tree value it feeds, `min` nodes
//!   contribute all children, so `t = objective(x)` is feasible for that
//!   branch LP. Hence no point beats the best branch.
//! * Lower bound. At any point feasible for a branch LP the selected leaf of
//!   a `max` node is at most the `max`, and an `if` whose polarity
//!   constraint holds evaluates to the selected arm, so `t <= objective`.
//!
//! The one gap is the failing polarity of an `if`: the LP uses the closed
//! complement `lhs >= rhs` while evaluation takes the else-arm only when
//! `lhs > rhs`. For the winning branch we therefore search for an optimal
//! point that satisfies each failing condition strictly. If none exists the
//! optimum is a supremum that is not attained, and the result says so.

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::expr::{AffineExpr, AffineInequality, BoundExpr, EvalError, Point, Program, Relation};
use crate::lp::{self, LpInstance, LpResult, LpStatus};
use crate::rational::Rational;

/// Kind of a branching node, in pre-order across all bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchNode {
    Max { arity: usize },
    If,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Choice {
    /// Selected child of a `max` node.
    Child(usize),
    ConditionHolds,
    ConditionFails,
}

/// One choice per branching node of a program, in pre-order across bounds.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct BranchSelection {
    pub choices: Vec<Choice>,
}

/// All `max` and `if` nodes of `program`, including those nested inside
/// `if` arms and unselected `max` children.
pub fn branch_nodes(program: &Program) -> Vec<BranchNode> {
    let mut out = Vec::new();
    for b in program.bounds() {
        b.visit(&mut |node| match node {
            BoundExpr::Max(cs) => out.push(BranchNode::Max { arity: cs.len() }),
            BoundExpr::If { .. } => out.push(BranchNode::If),
            _ => {}
        });
    }
    out
}

/// Product of `max` arities times `2^(number of if nodes)`.
pub fn branch_count(nodes: &[BranchNode]) -> u128 {
    nodes
        .iter()
        .map(|n| match n {
            BranchNode::Max { arity } => *arity as u128,
            BranchNode::If => 2,
        })
        .product()
}

/// Decodes `index` as a mixed-radix number, first node least significant.
pub fn selection_from_index(nodes: &[BranchNode], mut index: u128) -> BranchSelection {
    let choices = nodes
        .iter()
        .map(|n| match n {
            BranchNode::Max { arity } => {
                let a = *arity as u128;
                let c = (index % a) as usize;
                index /= a;
                Choice::Child(c)
            }
            BranchNode::If => {
                let c = if index % 2 == 0 {
                    Choice::ConditionHolds
                } else {
                    Choice::ConditionFails
                };
                index /= 2;
                c
            }
        })
        .collect();
    BranchSelection { choices }
}

/// Name for the auxiliary objective variable that avoids the program's names.
fn fresh_name(program: &Program, base: &str) -> String {
    let mut name = base.to_string();
    while program.variables().contains(&name) {
        name.push('_');
    }
    name
}

/// A lowered branch together with the parts of the selection that matter.
struct Lowered {
    lp: LpInstance,
    /// `(node index, choice)` for every node reached along selected arms.
    active: Vec<(usize, Choice)>,
    /// `if` conditions taken with the failing polarity.
    failing: Vec<AffineInequality>,
}

fn lower(program: &Program, selection: &BranchSelection) -> Lowered {
    let t_name = fresh_name(program, "t");
    let t = AffineExpr::var(&t_name);
    let mut constraints = program.constraints().to_vec();
    let mut active = Vec::new();
    let mut failing = Vec::new();
    let mut cursor = 0usize;

    fn walk(
        node: &BoundExpr,
        live: bool,
        cursor: &mut usize,
        selection: &BranchSelection,
        t: &AffineExpr,
        constraints: &mut Vec<AffineInequality>,
        active: &mut Vec<(usize, Choice)>,
        failing: &mut Vec<AffineInequality>,
    ) {
        match node {
            BoundExpr::Affine(leaf) => {
                if live {
                    constraints.push(AffineInequality::new(t.clone(), Relation::Le, leaf.clone()));
                }
            }
            BoundExpr::Min(cs) => {
                for c in cs {
                    walk(c, live, cursor, selection, t, constraints, active, failing);
                }
            }
            BoundExpr::Max(cs) => {
                let me = *cursor;
                *cursor += 1;
                let Choice::Child(pick) = selection.choices[me] else {
                    panic!("branch selection does not match program: node {me} is a max node");
                };
                if live {
                    active.push((me, Choice::Child(pick)));
                }
                for (i, c) in cs.iter().enumerate() {
                    walk(c, live && i == pick, cursor, selection, t, constraints, active, failing);
                }
            }
            BoundExpr::If {
                condition,
                then,
                otherwise,
            } => {
                let me = *cursor;
                *cursor += 1;
                let holds = match selection.choices[me] {
                    Choice::ConditionHolds => true,
                    Choice::ConditionFails => false,
                    Choice::Child(_) => {
                        panic!("branch selection does not match program: node {me} is an if node")
                    }
                };
                if live {
                    active.push((me, selection.choices[me]));
                    if holds {
                        constraints.push(condition.clone());
                    } else {
                        constraints.push(condition.complement());
                        failing.push(condition.clone());
                    }
                }
                walk(then, live && holds, cursor, selection, t, constraints, active, failing);
                walk(otherwise, live && !holds, cursor, selection, t, constraints, active, failing);
            }
        }
    }

    for b in program.bounds() {
        walk(
            b,
            true,
            &mut cursor,
            selection,
            &t,
            &mut constraints,
            &mut active,
            &mut failing,
        );
    }
    assert_eq!(
        cursor,
        selection.choices.len(),
        "branch selection does not match program"
    );

    let mut variables = program.variables().to_vec();
    variables.push(t_name.clone());
    Lowered {
        lp: LpInstance {
            variables,
            objective: t_name,
            constraints,
        },
        active,
        failing,
    }
}

/// LP for one branch: the program constraints, the `if` conditions with
/// their selected polarity (closed complement for failing), and `t <= leaf`
/// for every leaf reached through selected `max` children, all `min`
/// children and selected `if` arms.
pub fn lower_branch(program: &Program, selection: &BranchSelection) -> LpInstance {
    lower(program, selection).lp
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimizeResult {
    pub optimum: Rational,
    /// Point over the program variables.
    pub witness: Point,
    pub branch: BranchSelection,
    /// False when the optimum is a supremum approached only through points
    /// where a failing `if` condition would become tight.
    pub attained: bool,
    pub branches_total: u128,
    /// Distinct branch LPs actually solved (selections that differ only in
    /// unreachable nodes share one LP).
    pub branches_solved: usize,
    pub branches_infeasible: u128,
    /// Bounds with a non-constant `if` else-arm; see
    /// [`Program::nonconstant_else_branches`].
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OptimizeError {
    #[error("every branch is infeasible (empty constraint polytope)")]
    AllBranchesInfeasible,
    #[error("branch {0:?} is unbounded; the polytope must be bounded")]
    UnboundedBranch(BranchSelection),
    #[error("too many branches to enumerate ({0})")]
    TooManyBranches(u128),
    #[error("internal error: witness evaluates to {value} but the optimum is {optimum}")]
    WitnessMismatch { value: Rational, optimum: Rational },
}

const MAX_BRANCHES: u128 = 1 << 24;

pub fn maximin_optimize(program: &Program) -> Result<OptimizeResult, OptimizeError> {
    let nodes = branch_nodes(program);
    let total = branch_count(&nodes);
    if total > MAX_BRANCHES {
        return Err(OptimizeError::TooManyBranches(total));
    }

    // Solve each distinct reachable selection once.
    let mut cache: HashMap<Vec<(usize, Choice)>, usize> = HashMap::new();
    let mut solved: Vec<(BranchSelection, Lowered, LpResult)> = Vec::new();
    let mut infeasible = 0u128;
    for index in 0..total {
        let selection = selection_from_index(&nodes, index);
        let lowered = lower(program, &selection);
        let slot = match cache.get(&lowered.active) {
            Some(&slot) => slot,
            None => {
                let result = lp::simplex_solve(&lowered.lp);
                if result.status == LpStatus::Unbounded {
                    return Err(OptimizeError::UnboundedBranch(selection));
                }
                cache.insert(lowered.active.clone(), solved.len());
                solved.push((selection, lowered, result));
                solved.len() - 1
            }
        };
        if solved[slot].2.status == LpStatus::Infeasible {
            infeasible += 1;
        }
    }

    let best = solved
        .iter()
        .filter_map(|(_, _, r)| r.value.as_ref())
        .max()
        .cloned()
        .ok_or(OptimizeError::AllBranchesInfeasible)?;

    // Among optimal branches (in enumeration order) find one whose optimum is
    // attained with every failing condition strict.
    let mut fallback = None;
    let mut chosen = None;
    for (selection, lowered, result) in &solved {
        if result.value.as_ref() != Some(&best) {
            continue;
        }
        let lp_witness = result.witness.as_ref().expect("optimal LP has a witness");
        if lowered.failing.is_empty() || strictly_fails(&lowered.failing, lp_witness) {
            chosen = Some((selection.clone(), lp_witness.clone()));
            break;
        }
        if let Some(w) = interior_witness(lowered, &best) {
            chosen = Some((selection.clone(), w));
            break;
        }
        if fallback.is_none() {
            fallback = Some((selection.clone(), lp_witness.clone()));
        }
    }

    let (attained, (branch, mut witness)) = match chosen {
        Some(c) => (true, c),
        None => (false, fallback.expect("at least one optimal branch")),
    };
    witness.retain(|k, _| program.variables().contains(k));

    if attained {
        let value = program.eval(&witness).expect("witness assigns every variable");
        if value != best {
            return Err(OptimizeError::WitnessMismatch {
                value,
                optimum: best,
            });
        }
    }

    let warnings = program
        .nonconstant_else_branches()
        .into_iter()
        .map(|i| format!("bound {} has a non-constant if else-branch; closed-cell branching may overshoot", i + 1))
        .collect();

    Ok(OptimizeResult {
        optimum: best,
        witness,
        branch,
        attained,
        branches_total: total,
        branches_solved: solved.len(),
        branches_infeasible: infeasible,
        warnings,
    })
}

fn strictly_fails(conditions: &[AffineInequality], point: &Point) -> bool {
    conditions.iter().all(|c| {
        let (diff, rel) = c.normalized();
        let v = diff.eval(point).expect("witness assigns every variable");
        match rel {
            Relation::Le => v.is_positive(),
            Relation::Ge => v.is_negative(),
            Relation::Eq => !v.is_zero(),
        }
    })
}

/// Maximizes the smallest violation margin of the failing conditions over the
/// optimal face of a branch. Returns a point with positive margin if one exists.
fn interior_witness(lowered: &Lowered, optimum: &Rational) -> Option<Point> {
    let lp = &lowered.lp;
    let mut margin = "margin".to_string();
    while lp.variables.contains(&margin) {
        margin.push('_');
    }
    let z = AffineExpr::var(&margin);
    let mut constraints = lp.constraints.clone();
    constraints.push(AffineInequality::new(
        AffineExpr::var(&lp.objective),
        Relation::Ge,
        AffineExpr::constant(optimum.clone()),
    ));
    constraints.push(AffineInequality::new(
        z.clone(),
        Relation::Le,
        AffineExpr::constant(Rational::one()),
    ));
    for c in &lowered.failing {
        // a failing `lhs <= rhs` means lhs - rhs > 0
        let (diff, rel) = c.normalized();
        let slack = match rel {
            Relation::Le => diff,
            Relation::Ge => diff.scale(&-Rational::one()),
            Relation::Eq => return None,
        };
        constraints.push(AffineInequality::new(z.clone(), Relation::Le, slack));
    }
    let mut variables = lp.variables.clone();
    variables.push(margin.clone());
    let r = lp::maximize(&variables, &constraints, &z);
    match (r.status, r.value) {
        (LpStatus::Optimal, Some(v)) if v.is_positive() => {
            let mut w = r.witness.expect("optimal LP has a witness");
            w.remove(&margin);
            Some(w)
        }
        _ => None,
    }
}

/// Outcome of checking a claimed optimum and point against a program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub feasible: bool,
    pub violated: Vec<usize>,
    pub value: Rational,
    pub claimed: Rational,
    pub attains: bool,
}

pub fn certify(program: &Program, claimed: &Rational, point: &Point) -> Result<Certificate, EvalError> {
    let feasibility = program.check_feasible(point)?;
    let value = program.eval(point)?;
    Ok(Certificate {
        feasible: feasibility.feasible,
        violated: feasibility.violated,
        attains: value == *claimed,
        value,
        claimed: claimed.clone(),
    })
}
