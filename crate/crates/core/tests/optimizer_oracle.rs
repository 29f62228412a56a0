//! Random small maximin programs against a brute-force arrangement oracle.
//!
//! The objective is affine on every face of the arrangement cut out by the
//! constraint planes, the `if` conditions and the planes where two leaves
//! agree, and a maximum attained inside a face makes the objective constant
//! on that face. So evaluating at every vertex, and at a point of every face
//! next to each vertex, finds the attained maximum exactly.

use std::collections::BTreeSet;

use exlab_core::expr::{parse_program, Point, Program};
use exlab_core::optimize::maximin_optimize;
use exlab_core::rational::{int, rat, Rational};
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `coeffs . x + constant`.
#[derive(Clone, Debug)]
struct Affine {
    coeffs: Vec<i64>,
    constant: Rational,
}

impl Affine {
    fn random(rng: &mut ChaCha8Rng, dim: usize) -> Self {
        Affine {
            coeffs: (0..dim).map(|_| rng.gen_range(-2..=2)).collect(),
            constant: rat(rng.gen_range(-4..=4), 2),
        }
    }

    fn text(&self) -> String {
        let mut out = format!("({})", self.constant);
        for (i, c) in self.coeffs.iter().enumerate() {
            out.push_str(&format!(" + ({c})*x{i}"));
        }
        out
    }

    fn minus(&self, other: &Affine) -> Affine {
        Affine {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
            constant: &self.constant - &other.constant,
        }
    }
}

struct Generated {
    text: String,
    dim: usize,
    /// Planes `coeffs . x + constant = 0`.
    planes: Vec<Affine>,
    has_if: bool,
}

struct TreeGen<'a> {
    rng: &'a mut ChaCha8Rng,
    dim: usize,
    budget: usize,
    allow_if: bool,
    leaves: Vec<Affine>,
    conditions: Vec<Affine>,
}

impl TreeGen<'_> {
    fn leaf(&mut self) -> String {
        let a = Affine::random(self.rng, self.dim);
        let t = a.text();
        self.leaves.push(a);
        t
    }

    fn tree(&mut self, depth: usize) -> String {
        if depth >= 3 || self.leaves.len() >= 7 || !self.rng.gen_bool(0.6) {
            return self.leaf();
        }
        match self.rng.gen_range(0..3) {
            0 if self.budget > 0 => {
                self.budget -= 1;
                let k = self.rng.gen_range(2..=3);
                let kids: Vec<String> = (0..k).map(|_| self.tree(depth + 1)).collect();
                format!("max({})", kids.join(", "))
            }
            1 if self.budget > 0 && self.allow_if => {
                self.budget -= 1;
                let lhs = Affine::random(self.rng, self.dim);
                let rhs = Affine::random(self.rng, self.dim);
                self.conditions.push(lhs.minus(&rhs));
                let then = self.tree(depth + 1);
                format!("if({} <= {}; {then}; 10)", lhs.text(), rhs.text())
            }
            _ => {
                let a = self.tree(depth + 1);
                let b = self.tree(depth + 1);
                format!("min({a}, {b})")
            }
        }
    }
}

fn generate(seed: u64) -> Generated {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = rng.gen_range(1..=3);
    let allow_if = dim <= 2;
    let vars: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    let mut text = format!("vars {}\n", vars.join(" "));
    let mut planes = Vec::new();
    for i in 0..dim {
        text.push_str(&format!("constraint 0 <= x{i}\nconstraint x{i} <= 1\n"));
        let mut unit = vec![0; dim];
        unit[i] = 1;
        planes.push(Affine { coeffs: unit.clone(), constant: int(0) });
        planes.push(Affine { coeffs: unit, constant: int(-1) });
    }
    for _ in 0..rng.gen_range(0..=2) {
        let a = Affine { coeffs: (0..dim).map(|_| rng.gen_range(-2..=2)).collect(), constant: int(0) };
        let b = rng.gen_range(0..=3);
        text.push_str(&format!("constraint {} <= {b}\n", a.text()));
        planes.push(Affine { coeffs: a.coeffs, constant: int(-b) });
    }
    let mut g = TreeGen { rng: &mut rng, dim, budget: 4, allow_if, leaves: Vec::new(), conditions: Vec::new() };
    let bounds = g.rng.gen_range(1..=3);
    for _ in 0..bounds {
        let t = g.tree(0);
        text.push_str(&format!("bound {t}\n"));
    }
    let has_if = !g.conditions.is_empty();
    planes.extend(g.conditions.iter().cloned());
    for i in 0..g.leaves.len() {
        for j in i + 1..g.leaves.len() {
            planes.push(g.leaves[i].minus(&g.leaves[j]));
        }
    }
    planes.retain(|p| p.coeffs.iter().any(|&c| c != 0));
    Generated { text, dim, planes, has_if }
}

/// Solves the square system given by the chosen planes, if it is regular.
fn intersect(planes: &[&Affine], dim: usize) -> Option<Vec<Rational>> {
    let mut m: Vec<Vec<Rational>> = planes
        .iter()
        .map(|p| {
            let mut row: Vec<Rational> = p.coeffs.iter().map(|&c| int(c)).collect();
            row.push(-p.constant.clone());
            row
        })
        .collect();
    for col in 0..dim {
        let pivot = (col..dim).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        for r in 0..dim {
            if r != col && !m[r][col].is_zero() {
                let f = &m[r][col] / &m[col][col];
                for c in col..=dim {
                    let v = &m[col][c] * &f;
                    m[r][c] -= v;
                }
            }
        }
    }
    Some((0..dim).map(|i| &m[i][dim] / &m[i][i]).collect())
}

fn point(x: &[Rational]) -> Point {
    x.iter().enumerate().map(|(i, v)| (format!("x{i}"), v.clone())).collect()
}

fn on_plane(p: &Affine, x: &[Rational]) -> bool {
    let v = p.coeffs.iter().zip(x).fold(p.constant.clone(), |acc, (&c, xi)| acc + int(c) * xi);
    v.is_zero()
}

/// Points in every face of the arrangement that touches `v`.
fn nearby(v: &[Rational], planes: &[Affine]) -> Vec<Vec<Rational>> {
    let eps = rat(1, 1_000_000);
    let mut dirs: Vec<(Rational, Rational)> = Vec::new();
    if v.len() == 1 {
        return vec![vec![&v[0] + &eps], vec![&v[0] - &eps]];
    }
    for p in planes.iter().filter(|p| on_plane(p, v)) {
        let d = (int(-p.coeffs[1]), int(p.coeffs[0]));
        dirs.push((-d.0.clone(), -d.1.clone()));
        dirs.push(d);
    }
    let angle = |d: &(Rational, Rational)| d.1.to_f64().unwrap().atan2(d.0.to_f64().unwrap());
    dirs.sort_by(|a, b| angle(a).total_cmp(&angle(b)));
    dirs.dedup_by(|a, b| (angle(a) - angle(b)).abs() < 1e-12);
    let mut out = Vec::new();
    for i in 0..dirs.len() {
        let (a, b) = (&dirs[i], &dirs[(i + 1) % dirs.len()]);
        out.push(vec![&v[0] + &eps * &a.0, &v[1] + &eps * &a.1]);
        let mid = (&a.0 + &b.0, &a.1 + &b.1);
        if !(mid.0.is_zero() && mid.1.is_zero()) {
            out.push(vec![&v[0] + &eps * &mid.0, &v[1] + &eps * &mid.1]);
        }
    }
    out
}

fn oracle(program: &Program, g: &Generated) -> Rational {
    let mut vertices: BTreeSet<Vec<Rational>> = BTreeSet::new();
    let n = g.planes.len();
    let mut idx: Vec<usize> = (0..g.dim).collect();
    loop {
        let chosen: Vec<&Affine> = idx.iter().map(|&i| &g.planes[i]).collect();
        if let Some(x) = intersect(&chosen, g.dim) {
            if program.check_feasible(&point(&x)).unwrap().feasible {
                vertices.insert(x);
            }
        }
        // next combination in lexicographic order
        let Some(pos) = (0..g.dim).rev().find(|&k| idx[k] < n - g.dim + k) else { break };
        idx[pos] += 1;
        for k in pos + 1..g.dim {
            idx[k] = idx[k - 1] + 1;
        }
    }
    let mut candidates: Vec<Vec<Rational>> = vertices.iter().cloned().collect();
    if g.has_if {
        for v in &vertices {
            candidates.extend(nearby(v, &g.planes));
        }
    }
    candidates
        .iter()
        .map(|x| point(x))
        .filter(|p| program.check_feasible(p).unwrap().feasible)
        .map(|p| program.eval(&p).unwrap())
        .max()
        .expect("the origin is feasible")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn optimizer_matches_arrangement_oracle(seed in any::<u64>()) {
        let g = generate(seed);
        let program = parse_program(&g.text).unwrap();
        let result = maximin_optimize(&program).unwrap();
        let best = oracle(&program, &g);
        prop_assert!(result.optimum >= best, "optimum {} below a feasible value {best}\n{}", result.optimum, g.text);
        if result.attained {
            prop_assert_eq!(&result.optimum, &best, "\n{}", g.text);
            prop_assert_eq!(program.eval(&result.witness).unwrap(), result.optimum.clone());
            prop_assert!(program.check_feasible(&result.witness).unwrap().feasible);
        }
    }

    #[test]
    fn display_round_trips(seed in any::<u64>()) {
        let program = parse_program(&generate(seed).text).unwrap();
        prop_assert_eq!(parse_program(&program.to_string()).unwrap(), program);
    }
}

#[test]
fn unattained_supremum_is_bounded_by_oracle() {
    // the else arm wins on x > 1/2, where the objective 1 - x/2 tends to 3/4
    let text = "vars x0\nconstraint 0 <= x0\nconstraint x0 <= 1\nbound min(if((x0) <= (1/2); (0); 10), (1) + (-1/2)*x0)\n";
    let program = parse_program(text).unwrap();
    let g = Generated {
        text: text.into(),
        dim: 1,
        planes: vec![
            Affine { coeffs: vec![1], constant: int(0) },
            Affine { coeffs: vec![1], constant: int(-1) },
            Affine { coeffs: vec![1], constant: rat(-1, 2) },
        ],
        has_if: true,
    };
    let r = maximin_optimize(&program).unwrap();
    assert_eq!(r.optimum, rat(3, 4));
    assert!(!r.attained);
    let best = oracle(&program, &g);
    assert!(best < r.optimum && best > rat(3, 4) - rat(1, 1_000_000));
}
