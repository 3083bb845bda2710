//! Independent oracles and random instance generators shared by the
//! integration tests. Nothing here calls the library's deduction, consistency
//! or remainder code; only syntax, lattices and base containers are reused.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fuzzrev::lattice::Rational;
use fuzzrev::logics::{Logic, TableSemantics};
use fuzzrev::{Degree, DeductionSystem, DegreeLattice, Formula, FuzzyBase, GradedFormula};

pub const U0: &str = "x : 0.75\nx -> y : 0.75\nz : 0.25";
pub const CRISP_BASE: &str = "x : 1\nx -> y : 1\nz : 1";

pub fn f(text: &str) -> Formula {
    Formula::parse(text).unwrap()
}

pub fn q(n: i64, d: i64) -> Degree {
    Degree::rational(n, d).unwrap()
}

// ---------------------------------------------------------------------------
// Classical and Łukasiewicz evaluation.

pub fn vars_of<'a>(fs: impl IntoIterator<Item = &'a Formula>) -> Vec<String> {
    let mut out: Vec<String> = fs.into_iter().flat_map(|f| f.variables()).collect();
    out.sort();
    out.dedup();
    out
}

pub fn truth(phi: &Formula, w: &BTreeMap<String, bool>) -> bool {
    match phi {
        Formula::Atom(a) => w[a],
        Formula::Not(a) => !truth(a, w),
        Formula::And(a, b) => truth(a, w) && truth(b, w),
        Formula::Or(a, b) => truth(a, w) || truth(b, w),
        Formula::Implies(a, b) => !truth(a, w) || truth(b, w),
    }
}

pub fn worlds(vars: &[String]) -> Vec<BTreeMap<String, bool>> {
    (0..1u32 << vars.len())
        .map(|bits| vars.iter().enumerate().map(|(i, v)| (v.clone(), bits >> i & 1 == 1)).collect())
        .collect()
}

/// Value in steps of `1/k`.
pub fn luk(phi: &Formula, v: &BTreeMap<String, i64>, k: i64) -> i64 {
    match phi {
        Formula::Atom(a) => v[a],
        Formula::Not(a) => k - luk(a, v, k),
        Formula::And(a, b) => luk(a, v, k).min(luk(b, v, k)),
        Formula::Or(a, b) => luk(a, v, k).max(luk(b, v, k)),
        Formula::Implies(a, b) => (k - luk(a, v, k) + luk(b, v, k)).min(k),
    }
}

fn grid_valuations(vars: &[String], k: i64) -> Vec<BTreeMap<String, i64>> {
    let mut out = vec![BTreeMap::new()];
    for v in vars {
        out = out
            .into_iter()
            .flat_map(|m| {
                (0..=k).map(move |s| {
                    let mut m = m.clone();
                    m.insert(v.clone(), s);
                    m
                })
            })
            .collect();
    }
    out
}

fn steps(d: &Degree, k: i64) -> i64 {
    let r = d.as_rational().unwrap() * Rational::from_integer(k);
    assert!(r.is_integer());
    r.to_integer()
}

// ---------------------------------------------------------------------------
// Probability: lower envelopes by vertex enumeration.

type Q = num_rational::Ratio<i128>;

fn wide(r: Rational) -> Q {
    Q::new(i128::from(*r.numer()), i128::from(*r.denom()))
}

fn to_big(r: &Q) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// Solves `a x = b` exactly; `None` unless the solution is unique.
fn solve(mut a: Vec<Vec<Q>>, mut b: Vec<Q>) -> Option<Vec<Q>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col] / a[col][col];
                let pivot_row = a[col].clone();
                for (x, p) in a[r].iter_mut().zip(&pivot_row).skip(col) {
                    *x -= factor * p;
                }
                let delta = factor * b[col];
                b[r] -= delta;
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Vertices of `{p >= 0, Σ p = 1, P(θ) >= u(θ)}` over the worlds of the
/// variables of `u` and `extra`; with `first_only`, stops at the first one.
fn vertices(u: &FuzzyBase, extra: &[&Formula], first_only: bool) -> (Vec<String>, Vec<Vec<Q>>) {
    let vars = vars_of(u.support().chain(extra.iter().copied()));
    let ws = worlds(&vars);
    let n = ws.len();
    // Inequalities as (row, rhs) meaning row·p >= rhs.
    let mut ineq: Vec<(Vec<Q>, Q)> = Vec::new();
    for i in 0..n {
        let mut row = vec![Q::zero(); n];
        row[i] = Q::one();
        ineq.push((row, Q::zero()));
    }
    for (theta, d) in u.entries() {
        let row = ws
            .iter()
            .map(|w| if truth(theta, w) { Q::one() } else { Q::zero() })
            .collect();
        ineq.push((row, wide(d.as_rational().unwrap())));
    }
    let mut found: Vec<Vec<Q>> = Vec::new();
    for active in combinations(ineq.len(), n - 1) {
        let mut a = vec![vec![Q::one(); n]];
        let mut b = vec![Q::one()];
        for &i in &active {
            a.push(ineq[i].0.clone());
            b.push(ineq[i].1);
        }
        let Some(p) = solve(a, b) else { continue };
        let feasible = ineq.iter().all(|(row, rhs)| {
            let lhs: Q = row.iter().zip(&p).map(|(r, x)| r * x).sum();
            lhs >= *rhs
        });
        if feasible && !found.contains(&p) {
            found.push(p);
            if first_only {
                break;
            }
        }
    }
    (vars, found)
}

pub fn probability_feasible(u: &FuzzyBase) -> bool {
    !vertices(u, &[], true).1.is_empty()
}

/// `min P(φ)` over the constraint polytope, `None` when it is empty.
pub fn lower_envelope(u: &FuzzyBase, phi: &Formula) -> Option<BigRational> {
    let (vars, vs) = vertices(u, &[phi], false);
    let ws = worlds(&vars);
    vs.iter()
        .map(|p| ws.iter().zip(p).filter(|(w, _)| truth(phi, w)).map(|(_, x)| *x).sum::<Q>())
        .min()
        .map(|x| to_big(&x))
}

// ---------------------------------------------------------------------------
// Oracle consistency and deduction per logic.

fn support_sat(u: &FuzzyBase) -> bool {
    let vars = vars_of(u.support());
    worlds(&vars).iter().any(|w| u.support().all(|t| truth(t, w)))
}

fn entails(premises: &[&Formula], phi: &Formula) -> bool {
    let vars = vars_of(premises.iter().copied().chain([phi]));
    worlds(&vars)
        .iter()
        .all(|w| !premises.iter().all(|p| truth(p, w)) || truth(phi, w))
}

pub fn consistent(sys: &DeductionSystem, u: &FuzzyBase) -> bool {
    let l = sys.lattice();
    match sys.logic() {
        Logic::Crisp | Logic::Necessity => support_sat(u),
        Logic::Lukasiewicz => {
            let k = l.chain_k().unwrap() as i64;
            let vars = vars_of(u.support());
            grid_valuations(&vars, k)
                .iter()
                .any(|v| u.entries().all(|(t, d)| luk(t, v, k) >= steps(d, k)))
        }
        Logic::Probability => probability_feasible(u),
        Logic::Table(t) => (0..t.model_count()).any(|i| u.leq(&t.model(i)).unwrap()),
    }
}

/// Necessity deduction as the supremum, over sub-bases entailing `φ`, of the
/// meet of their degrees.
pub fn necessity_sup_of_meets(l: &DegreeLattice, u: &FuzzyBase, phi: &Formula) -> Degree {
    if !support_sat(u) {
        return l.top().clone();
    }
    let entries: Vec<(&Formula, &Degree)> = u.entries().collect();
    let mut best = l.bottom().clone();
    for mask in 0..1u32 << entries.len() {
        let chosen: Vec<_> = (0..entries.len()).filter(|i| mask >> i & 1 == 1).map(|i| entries[i]).collect();
        let premises: Vec<&Formula> = chosen.iter().map(|(t, _)| *t).collect();
        if entails(&premises, phi) {
            let meet = l.inf(chosen.iter().map(|(_, d)| *d)).unwrap();
            best = l.join(&best, &meet).unwrap();
        }
    }
    best
}

pub fn deduce(sys: &DeductionSystem, u: &FuzzyBase, phi: &Formula) -> Degree {
    let l = sys.lattice();
    if !consistent(sys, u) {
        return l.top().clone();
    }
    match sys.logic() {
        Logic::Crisp => {
            let premises: Vec<&Formula> = u.support().collect();
            if entails(&premises, phi) {
                l.top().clone()
            } else {
                l.bottom().clone()
            }
        }
        Logic::Necessity => necessity_sup_of_meets(l, u, phi),
        Logic::Lukasiewicz => {
            let k = l.chain_k().unwrap() as i64;
            let vars = vars_of(u.support().chain([phi]));
            let min = grid_valuations(&vars, k)
                .iter()
                .filter(|v| u.entries().all(|(t, d)| luk(t, v, k) >= steps(d, k)))
                .map(|v| luk(phi, v, k))
                .min()
                .unwrap();
            Degree::rational(min, k).unwrap()
        }
        Logic::Probability => {
            let k = l.chain_k().unwrap() as i64;
            let value = lower_envelope(u, phi).unwrap();
            let floor = (value * BigRational::from_integer(BigInt::from(k))).floor().to_integer();
            Degree::rational(i64::try_from(floor).unwrap(), k).unwrap()
        }
        Logic::Table(t) => {
            let pos = t.universe().iter().position(|g| g == phi).unwrap();
            let mut acc = l.top().clone();
            for i in 0..t.model_count() {
                let m = t.model(i);
                if u.leq(&m).unwrap() {
                    acc = l.meet(&acc, m.degree_of(&t.universe()[pos])).unwrap();
                }
            }
            acc
        }
    }
}

// ---------------------------------------------------------------------------
// Remainders straight from the definition, with oracle consistency.

/// Every `v ⊑ u` over the lattice.
pub fn down_set(u: &FuzzyBase) -> Vec<FuzzyBase> {
    let l = u.lattice();
    let mut out = vec![FuzzyBase::empty(l.clone())];
    for (t, d) in u.entries() {
        let below: Vec<&Degree> = l.elements().iter().filter(|e| l.leq(e, d).unwrap()).collect();
        out = out
            .into_iter()
            .flat_map(|b| {
                below.iter().map(move |e| {
                    let mut b = b.clone();
                    b.set(t.clone(), (*e).clone()).unwrap();
                    b
                })
            })
            .collect();
    }
    out
}

pub fn remainders(sys: &DeductionSystem, u: &FuzzyBase, g: &GradedFormula) -> Vec<FuzzyBase> {
    let ok: Vec<FuzzyBase> = down_set(u)
        .into_iter()
        .filter(|v| consistent(sys, &v.join_graded(g).unwrap()))
        .collect();
    ok.iter()
        .filter(|v| !ok.iter().any(|w| w != *v && v.leq(w).unwrap()))
        .cloned()
        .collect()
}

pub fn same_set(a: &[FuzzyBase], b: &[FuzzyBase]) -> bool {
    a.len() == b.len() && a.iter().all(|x| b.contains(x))
}

// ---------------------------------------------------------------------------
// Random instances.

pub const ATOMS: [&str; 3] = ["x", "y", "z"];

#[derive(Clone)]
pub struct Instance {
    pub label: String,
    pub system: DeductionSystem,
    pub base: FuzzyBase,
    pub input: GradedFormula,
}

impl std::fmt::Debug for Instance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} [{}] {} with ({})", self.label, self.system.name(), self.base, self.input)
    }
}

pub struct Gen {
    pub rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn formula(&mut self, depth: u32) -> Formula {
        if depth == 0 || self.rng.gen_bool(0.3) {
            return Formula::atom(*ATOMS.choose(&mut self.rng).unwrap());
        }
        let a = self.formula(depth - 1);
        match self.rng.gen_range(0..4) {
            0 => Formula::not(a),
            1 => Formula::and(a, self.formula(depth - 1)),
            2 => Formula::or(a, self.formula(depth - 1)),
            _ => Formula::implies(a, self.formula(depth - 1)),
        }
    }

    pub fn degree(&mut self, l: &DegreeLattice, allow_bottom: bool) -> Degree {
        let choices: Vec<&Degree> = l.elements().iter().filter(|d| allow_bottom || *d != l.bottom()).collect();
        (*choices.choose(&mut self.rng).unwrap()).clone()
    }

    fn item(&mut self, sys: &DeductionSystem) -> Formula {
        match sys.logic() {
            Logic::Table(t) => t.universe().choose(&mut self.rng).unwrap().clone(),
            _ => {
                let depth = self.rng.gen_range(1..=2);
                self.formula(depth)
            }
        }
    }

    pub fn base(&mut self, sys: &DeductionSystem, max_support: usize) -> FuzzyBase {
        let l = sys.lattice().clone();
        let n = self.rng.gen_range(max_support.min(2)..=max_support);
        let mut u = FuzzyBase::empty(l.clone());
        for _ in 0..n {
            let t = self.item(sys);
            let d = self.degree(&l, false);
            u.set(t, d).unwrap();
        }
        u
    }

    /// Mostly inputs that clash with the base, so remainder sets are
    /// non-trivial.
    pub fn input(&mut self, sys: &DeductionSystem, u: &FuzzyBase) -> GradedFormula {
        let l = sys.lattice().clone();
        if let Logic::Table(t) = sys.logic() {
            // A degree some model reaches keeps the input itself consistent.
            let theta = t.universe().choose(&mut self.rng).unwrap().clone();
            let reached: Vec<Degree> = (0..t.model_count())
                .map(|m| t.model(m).degree_of(&theta).clone())
                .filter(|d| d != l.bottom())
                .collect();
            let degree = match reached.choose(&mut self.rng) {
                Some(d) if self.rng.gen_bool(0.9) => d.clone(),
                _ => self.degree(&l, false),
            };
            return GradedFormula::new(theta, degree);
        }
        let support: Vec<Formula> = u.support().cloned().collect();
        let pick = |rng: &mut ChaCha8Rng| support.choose(rng).unwrap().clone();
        let formula = match self.rng.gen_range(0..4) {
            0 => Formula::not(pick(&mut self.rng)),
            1 => Formula::not(Formula::and(pick(&mut self.rng), pick(&mut self.rng))),
            2 => Formula::not(Formula::and(pick(&mut self.rng), self.formula(1))),
            _ => self.formula(2),
        };
        GradedFormula::new(formula, self.degree(&l, false))
    }

    pub fn table(&mut self) -> TableSemantics {
        let lattice = if self.rng.gen_bool(0.5) {
            DegreeLattice::chain(2).unwrap()
        } else {
            square()
        };
        let lattice = Arc::new(lattice);
        let pool = ["p", "q", "r", "p & q", "!p"];
        let size = self.rng.gen_range(1..=3);
        let mut universe: Vec<Formula> = Vec::new();
        while universe.len() < size {
            let c = f(pool.choose(&mut self.rng).unwrap());
            if !universe.contains(&c) {
                universe.push(c);
            }
        }
        let count = self.rng.gen_range(1..=4);
        let mut models = Vec::new();
        while models.len() < count {
            let row: Vec<Degree> = universe.iter().map(|_| self.degree(&lattice, true)).collect();
            if row.iter().any(|d| d != lattice.top()) {
                models.push(row);
            }
        }
        TableSemantics::new(lattice, universe, models).unwrap()
    }

    pub fn system(&mut self, logic: &str) -> DeductionSystem {
        let k = self.rng.gen_range(1..=4);
        match logic {
            "crisp" => DeductionSystem::crisp(),
            "luk" => DeductionSystem::lukasiewicz(k).unwrap(),
            "nec" => DeductionSystem::necessity(k).unwrap(),
            "prob" => DeductionSystem::probability(k).unwrap(),
            "table" => DeductionSystem::table(self.table()),
            other => panic!("unknown logic {other}"),
        }
    }

    pub fn instance(&mut self, logic: &str, index: usize) -> Instance {
        let system = self.system(logic);
        let base = self.base(&system, 4);
        let input = self.input(&system, &base);
        Instance {
            label: format!("{logic}#{index}"),
            system,
            base,
            input,
        }
    }
}

pub const LOGICS: [&str; 5] = ["crisp", "luk", "nec", "prob", "table"];

/// The 2×2 Boolean lattice `00 < 01, 10 < 11`.
pub fn square() -> DegreeLattice {
    DegreeLattice::validate_explicit(
        &["00", "01", "10", "11"],
        &[("00", "01"), ("00", "10"), ("01", "11"), ("10", "11")],
    )
    .unwrap()
}

/// The worked examples: crisp, Łukasiewicz, necessity and probability.
pub fn golden() -> Vec<Instance> {
    let mk = |label: &str, system: DeductionSystem, base: &str, input: &str| {
        let b = system.parse_base(base).unwrap();
        let g = system.parse_input(input).unwrap();
        Instance {
            label: label.to_string(),
            system,
            base: b,
            input: g,
        }
    };
    vec![
        mk("crisp", DeductionSystem::crisp(), CRISP_BASE, "!(y & z) : 1"),
        mk("luk:k=4", DeductionSystem::lukasiewicz(4).unwrap(), U0, "!(y & z) : 1"),
        mk("nec:k=4", DeductionSystem::necessity(4).unwrap(), U0, "!(y & z) : 0.25"),
        mk("prob:k=20", DeductionSystem::probability(20).unwrap(), U0, "!y : 0.75"),
    ]
}
