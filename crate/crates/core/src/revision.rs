//! Partial meet revision: remainder sets, selection, revision.
//!
//! `u ⋆γ (φ/a) = (⊓ γ(u ⊥ (φ/a))) ⊔ (φ/a)` where `u ⊥ (φ/a)` is the set of
//! maximal `u' ⊑ u` with `u' ⊔ (φ/a)` consistent.
//!
//! Sub-bases of `u` are handled as degree-index vectors over `Supp(u)` in base
//! order. The remainder search descends from `u` through lower covers, only
//! ever expanding inconsistent nodes: every strict superset of a remainder is
//! inconsistent, so each remainder is reached through a chain of inconsistent
//! nodes, and a consistent node is a remainder iff all of its upper covers
//! (below `u`) are inconsistent.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::base::{BaseError, FuzzyBase, GradedFormula};
use crate::formula::Formula;
use crate::lattice::{Degree, DegreeLattice, LatticeError};
use crate::logics::{DeductionSystem, Logic, LogicError};

/// Default bound on the number of candidate sub-bases an exhaustive
/// enumeration may visit.
pub const DEFAULT_ENUM_CAP: u128 = 2_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RevisionError {
    #[error(transparent)]
    Base(#[from] BaseError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("base and input must live over the logic's degree lattice")]
    LatticeMismatch,
    #[error("enumeration of {size} candidate bases exceeds the cap of {cap}")]
    CapExceeded { size: u128, cap: u128 },
    #[error("selection violates the selection-function contract: {0}")]
    StrategyViolation(String),
    #[error("invalid strategy: {0}")]
    Strategy(String),
}

/// `u ⊥ (φ/a)` in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RemainderSet {
    base: FuzzyBase,
    input: GradedFormula,
    elements: Vec<FuzzyBase>,
}

impl RemainderSet {
    pub fn base(&self) -> &FuzzyBase {
        &self.base
    }

    pub fn input(&self) -> &GradedFormula {
        &self.input
    }

    pub fn elements(&self) -> &[FuzzyBase] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn position(&self, b: &FuzzyBase) -> Option<usize> {
        self.elements.iter().position(|e| e == b)
    }

    /// Equality of element sets, ignoring order.
    pub fn same_elements(&self, other: &RemainderSet) -> bool {
        self.len() == other.len() && self.elements.iter().all(|e| other.position(e).is_some())
    }
}

impl fmt::Display for RemainderSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}

/// `Supp(u)` in base order with the degree ceilings of `u`.
pub(crate) struct Frame {
    pub lattice: Arc<DegreeLattice>,
    pub formulas: Vec<Formula>,
    pub ceiling: Vec<usize>,
}

impl Frame {
    pub fn new(u: &FuzzyBase) -> Result<Self, RevisionError> {
        let lattice = u.lattice().clone();
        let mut formulas = Vec::with_capacity(u.len());
        let mut ceiling = Vec::with_capacity(u.len());
        for (f, d) in u.entries() {
            formulas.push(f.clone());
            ceiling.push(lattice.index_of(d)?);
        }
        Ok(Frame {
            lattice,
            formulas,
            ceiling,
        })
    }

    pub fn to_base(&self, degrees: &[usize]) -> FuzzyBase {
        let mut b = FuzzyBase::empty(self.lattice.clone());
        for (f, &d) in self.formulas.iter().zip(degrees) {
            b.set(f.clone(), self.lattice.degree(d).clone())
                .expect("index from this lattice");
        }
        b
    }

    /// Size of the product of per-entry down-sets.
    pub fn down_set_size(&self) -> u128 {
        self.ceiling
            .iter()
            .map(|&c| self.lattice.down_set_idx(c).len() as u128)
            .fold(1u128, |acc, n| acc.saturating_mul(n))
    }

    /// Every degree vector below `ceiling`, in odometer order.
    pub fn down_set(&self) -> Vec<Vec<usize>> {
        let choices: Vec<Vec<usize>> = self
            .ceiling
            .iter()
            .map(|&c| self.lattice.down_set_idx(c))
            .collect();
        product(&choices)
    }

    /// Canonical order: lexicographic by degree rank, descending.
    pub fn sort_key(&self, v: &[usize]) -> Vec<std::cmp::Reverse<usize>> {
        v.iter()
            .map(|&d| std::cmp::Reverse(self.lattice.rank_idx(d)))
            .collect()
    }
}

pub(crate) fn product(choices: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::with_capacity(choices.len())];
    for options in choices {
        let mut next = Vec::with_capacity(out.len() * options.len());
        for prefix in &out {
            for &o in options {
                let mut v = prefix.clone();
                v.push(o);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Memoised "is `v ⊔ (φ/a)` consistent" over degree vectors.
struct InputOracle<'a> {
    system: &'a DeductionSystem,
    frame: &'a Frame,
    input: &'a GradedFormula,
    memo: HashMap<Vec<usize>, bool>,
}

impl<'a> InputOracle<'a> {
    fn new(system: &'a DeductionSystem, frame: &'a Frame, input: &'a GradedFormula) -> Self {
        InputOracle {
            system,
            frame,
            input,
            memo: HashMap::new(),
        }
    }

    fn consistent(&mut self, v: &[usize]) -> Result<bool, RevisionError> {
        if let Some(&c) = self.memo.get(v) {
            return Ok(c);
        }
        let b = self.frame.to_base(v).join_graded(self.input)?;
        let c = self.system.is_consistent(&b)?;
        self.memo.insert(v.to_vec(), c);
        Ok(c)
    }
}

fn check_inputs(system: &DeductionSystem, u: &FuzzyBase, g: &GradedFormula) -> Result<(), RevisionError> {
    let l = system.lattice();
    if !(Arc::ptr_eq(u.lattice(), l) || **u.lattice() == **l) {
        return Err(RevisionError::LatticeMismatch);
    }
    l.index_of(&g.degree)?;
    Ok(())
}

fn finish(frame: &Frame, u: &FuzzyBase, g: &GradedFormula, mut found: Vec<Vec<usize>>) -> RemainderSet {
    found.sort_by_key(|v| frame.sort_key(v));
    found.dedup();
    RemainderSet {
        base: u.clone(),
        input: g.clone(),
        elements: found.iter().map(|v| frame.to_base(v)).collect(),
    }
}

/// `u ⊥ (φ/a)` by pruned descent.
pub fn remainders(system: &DeductionSystem, u: &FuzzyBase, g: &GradedFormula) -> Result<RemainderSet, RevisionError> {
    check_inputs(system, u, g)?;
    let frame = Frame::new(u)?;
    if !system.input_consistent(g)? {
        return Ok(finish(&frame, u, g, Vec::new()));
    }
    let mut oracle = InputOracle::new(system, &frame, g);
    if oracle.consistent(&frame.ceiling)? {
        return Ok(finish(&frame, u, g, vec![frame.ceiling.clone()]));
    }
    let found = match system.logic() {
        // Consistency depends only on the support here, so maximal elements
        // keep each entry at full degree or drop it.
        Logic::Crisp | Logic::Necessity => descend(&frame, &mut oracle, |frame, v, i| {
            if v[i] == frame.lattice.bottom_idx() {
                Vec::new()
            } else {
                vec![frame.lattice.bottom_idx()]
            }
        }, |frame, v, i| {
            if v[i] == frame.lattice.bottom_idx() {
                vec![frame.ceiling[i]]
            } else {
                Vec::new()
            }
        })?,
        _ => descend(
            &frame,
            &mut oracle,
            |frame, v, i| frame.lattice.lower_covers_idx(v[i]),
            |frame, v, i| {
                frame
                    .lattice
                    .upper_covers_idx(v[i])
                    .into_iter()
                    .filter(|&b| frame.lattice.leq_idx(b, frame.ceiling[i]))
                    .collect()
            },
        )?,
    };
    Ok(finish(&frame, u, g, found))
}

/// Depth-first descent from the ceiling. `down(v, i)` lists the next lower
/// values of coordinate `i`, `up(v, i)` the next higher ones within `u`.
fn descend<D, U>(frame: &Frame, oracle: &mut InputOracle<'_>, down: D, up: U) -> Result<Vec<Vec<usize>>, RevisionError>
where
    D: Fn(&Frame, &[usize], usize) -> Vec<usize>,
    U: Fn(&Frame, &[usize], usize) -> Vec<usize>,
{
    let n = frame.ceiling.len();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut stack = vec![frame.ceiling.clone()];
    seen.insert(frame.ceiling.clone());
    let mut found = Vec::new();
    while let Some(v) = stack.pop() {
        if oracle.consistent(&v)? {
            let mut maximal = true;
            'covers: for i in 0..n {
                for b in up(frame, &v, i) {
                    let mut w = v.clone();
                    w[i] = b;
                    if oracle.consistent(&w)? {
                        maximal = false;
                        break 'covers;
                    }
                }
            }
            if maximal {
                found.push(v);
            }
            continue;
        }
        for i in 0..n {
            for b in down(frame, &v, i) {
                let mut w = v.clone();
                w[i] = b;
                if seen.insert(w.clone()) {
                    stack.push(w);
                }
            }
        }
    }
    Ok(found)
}

/// `u ⊥ (φ/a)` straight from the definition: enumerate every `u' ⊑ u`, keep
/// the input-consistent ones, keep those with no input-consistent strict
/// extension below `u`. Used as the test oracle for [`remainders`].
pub fn remainders_bruteforce(
    system: &DeductionSystem,
    u: &FuzzyBase,
    g: &GradedFormula,
    cap: u128,
) -> Result<RemainderSet, RevisionError> {
    check_inputs(system, u, g)?;
    let frame = Frame::new(u)?;
    let size = frame.down_set_size();
    if size > cap {
        return Err(RevisionError::CapExceeded { size, cap });
    }
    let mut consistent = Vec::new();
    for v in frame.down_set() {
        let b = frame.to_base(&v).join_graded(g)?;
        if system.is_consistent(&b)? {
            consistent.push(v);
        }
    }
    let l = &frame.lattice;
    let strictly_below = |a: &[usize], b: &[usize]| a != b && a.iter().zip(b).all(|(&x, &y)| l.leq_idx(x, y));
    let maximal = consistent
        .iter()
        .filter(|v| !consistent.iter().any(|w| strictly_below(v, w)))
        .cloned()
        .collect();
    Ok(finish(&frame, u, g, maximal))
}

/// A selection function `γ`, consulted only on non-empty remainder sets.
pub trait Selection {
    /// Positions into `remainders.elements()` of the chosen remainders.
    fn choose(&self, base: &FuzzyBase, remainders: &RemainderSet) -> Result<Vec<usize>, RevisionError>;
}

/// Adapter turning a closure into a [`Selection`].
pub struct FnSelection<F>(pub F);

impl<F> Selection for FnSelection<F>
where
    F: Fn(&FuzzyBase, &RemainderSet) -> Vec<usize>,
{
    fn choose(&self, base: &FuzzyBase, remainders: &RemainderSet) -> Result<Vec<usize>, RevisionError> {
        Ok((self.0)(base, remainders))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    AtLeast,
    Exactly,
}

/// `formula >= degree` or `formula = degree`, tested against a remainder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeConstraint {
    pub formula: Formula,
    pub bound: Bound,
    pub degree: Degree,
}

impl fmt::Display for DegreeConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.bound {
            Bound::AtLeast => ">=",
            Bound::Exactly => "=",
        };
        write!(f, "{}{op}{}", self.formula, self.degree)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SelectionStrategy {
    /// Every remainder.
    FullMeet,
    /// Remainders keeping the highest-degree entries of `u` intact, compared
    /// lexicographically (ties between equal degrees by base order).
    DegreePriority,
    /// Like `DegreePriority` with an explicit priority list; entries of `u`
    /// missing from the list follow in base order.
    RankFile(Vec<Formula>),
    /// Remainders meeting every constraint; an empty choice is an error.
    Predicate(Vec<DegreeConstraint>),
    /// The first `DegreePriority` winner in canonical order.
    Maxichoice,
}

impl SelectionStrategy {
    /// Parses a strategy selector: `full-meet`, `degree-priority`,
    /// `maxichoice`, `rank:<file>`, `pred:<f>=<d>,<f>>=<d>,...`. `load` reads
    /// a rank file.
    pub fn from_selector<L>(selector: &str, lattice: &DegreeLattice, load: L) -> Result<Self, RevisionError>
    where
        L: FnOnce(&str) -> Result<String, String>,
    {
        let bad = |m: String| RevisionError::Strategy(m);
        match selector {
            "full-meet" => return Ok(SelectionStrategy::FullMeet),
            "degree-priority" => return Ok(SelectionStrategy::DegreePriority),
            "maxichoice" => return Ok(SelectionStrategy::Maxichoice),
            _ => {}
        }
        if let Some(path) = selector.strip_prefix("rank:") {
            let text = load(path).map_err(|e| bad(format!("{path}: {e}")))?;
            return Self::rank_from_text(&text);
        }
        if let Some(spec) = selector.strip_prefix("pred:") {
            return Self::predicate_from_text(spec, lattice);
        }
        Err(bad(format!("unknown strategy `{selector}`")))
    }

    /// One formula per line, highest priority first.
    pub fn rank_from_text(text: &str) -> Result<Self, RevisionError> {
        let mut order = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = crate::base::strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let f = Formula::parse(line)
                .map_err(|e| RevisionError::Strategy(format!("rank file line {}: {e}", i + 1)))?;
            order.push(f);
        }
        Ok(SelectionStrategy::RankFile(order))
    }

    /// `f1=d1,f2>=d2,...`.
    pub fn predicate_from_text(spec: &str, lattice: &DegreeLattice) -> Result<Self, RevisionError> {
        let mut constraints = Vec::new();
        for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (lhs, degree) = part
                .rsplit_once('=')
                .ok_or_else(|| RevisionError::Strategy(format!("expected `formula=degree` in `{part}`")))?;
            let (formula, bound) = match lhs.strip_suffix('>') {
                Some(f) => (f, Bound::AtLeast),
                None => (lhs, Bound::Exactly),
            };
            let formula = Formula::parse(formula).map_err(|e| RevisionError::Strategy(format!("`{part}`: {e}")))?;
            let degree = lattice.parse_degree(degree)?;
            constraints.push(DegreeConstraint {
                formula,
                bound,
                degree,
            });
        }
        if constraints.is_empty() {
            return Err(RevisionError::Strategy("empty predicate".into()));
        }
        Ok(SelectionStrategy::Predicate(constraints))
    }

    /// Entries of `u` in priority order for the greedy strategies.
    fn priority(&self, u: &FuzzyBase) -> Vec<Formula> {
        let l = u.lattice();
        match self {
            SelectionStrategy::RankFile(order) => {
                let mut out: Vec<Formula> = Vec::new();
                for f in order {
                    if u.degree_of(f) != l.bottom() && !out.contains(f) {
                        out.push(f.clone());
                    }
                }
                for f in u.support() {
                    if !out.contains(f) {
                        out.push(f.clone());
                    }
                }
                out
            }
            _ => {
                let mut entries: Vec<(usize, &Formula, usize)> = u
                    .entries()
                    .enumerate()
                    .map(|(pos, (f, d))| (pos, f, l.rank_idx(l.index_of(d).expect("own degree"))))
                    .collect();
                entries.sort_by_key(|&(pos, _, rank)| (std::cmp::Reverse(rank), pos));
                entries.into_iter().map(|(_, f, _)| f.clone()).collect()
            }
        }
    }

    /// Positions of the remainders whose "kept at full degree" profile over
    /// the priority list is lexicographically best.
    fn greedy(&self, u: &FuzzyBase, r: &RemainderSet) -> Vec<usize> {
        let order = self.priority(u);
        let profile = |e: &FuzzyBase| -> Vec<bool> { order.iter().map(|f| e.degree_of(f) == u.degree_of(f)).collect() };
        let profiles: Vec<Vec<bool>> = r.elements().iter().map(profile).collect();
        let Some(best) = profiles.iter().max() else {
            return Vec::new();
        };
        (0..profiles.len()).filter(|&i| &profiles[i] == best).collect()
    }
}

impl Selection for SelectionStrategy {
    fn choose(&self, u: &FuzzyBase, r: &RemainderSet) -> Result<Vec<usize>, RevisionError> {
        Ok(match self {
            SelectionStrategy::FullMeet => (0..r.len()).collect(),
            SelectionStrategy::DegreePriority | SelectionStrategy::RankFile(_) => self.greedy(u, r),
            SelectionStrategy::Maxichoice => SelectionStrategy::DegreePriority
                .greedy(u, r)
                .into_iter()
                .take(1)
                .collect(),
            SelectionStrategy::Predicate(constraints) => {
                let l = u.lattice();
                let mut chosen = Vec::new();
                for (i, e) in r.elements().iter().enumerate() {
                    let mut ok = true;
                    for c in constraints {
                        let have = e.degree_of(&c.formula);
                        ok &= match c.bound {
                            Bound::AtLeast => l.leq(&c.degree, have)?,
                            Bound::Exactly => *have == c.degree,
                        };
                    }
                    if ok {
                        chosen.push(i);
                    }
                }
                if chosen.is_empty() {
                    let list: Vec<String> = constraints.iter().map(ToString::to_string).collect();
                    return Err(RevisionError::StrategyViolation(format!(
                        "predicate `{}` selects no remainder",
                        list.join(",")
                    )));
                }
                chosen
            }
        })
    }
}

/// `γ(u ⊥ (φ/a))`: `{u}` on an empty remainder set, otherwise the strategy's
/// non-empty choice.
pub fn select(gamma: &dyn Selection, u: &FuzzyBase, r: &RemainderSet) -> Result<Vec<FuzzyBase>, RevisionError> {
    if r.is_empty() {
        return Ok(vec![u.clone()]);
    }
    let mut idx = gamma.choose(u, r)?;
    idx.sort_unstable();
    idx.dedup();
    if idx.is_empty() {
        return Err(RevisionError::StrategyViolation(
            "empty selection from a non-empty remainder set".into(),
        ));
    }
    if let Some(&bad) = idx.iter().find(|&&i| i >= r.len()) {
        return Err(RevisionError::StrategyViolation(format!(
            "position {bad} is outside a remainder set of size {}",
            r.len()
        )));
    }
    Ok(idx.into_iter().map(|i| r.elements()[i].clone()).collect())
}

/// Every intermediate of one revision step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RevisionOutcome {
    pub remainders: RemainderSet,
    pub selected: Vec<FuzzyBase>,
    /// `⊓ γ(u ⊥ (φ/a))`.
    pub core: FuzzyBase,
    pub result: FuzzyBase,
}

pub fn revise_detailed(
    system: &DeductionSystem,
    gamma: &dyn Selection,
    u: &FuzzyBase,
    g: &GradedFormula,
) -> Result<RevisionOutcome, RevisionError> {
    let remainders = remainders(system, u, g)?;
    let selected = select(gamma, u, &remainders)?;
    let core = FuzzyBase::meet_all(&selected)?;
    let result = core.join_graded(g)?;
    Ok(RevisionOutcome {
        remainders,
        selected,
        core,
        result,
    })
}

/// `u ⋆γ (φ/a)`.
pub fn revise(
    system: &DeductionSystem,
    gamma: &dyn Selection,
    u: &FuzzyBase,
    g: &GradedFormula,
) -> Result<FuzzyBase, RevisionError> {
    Ok(revise_detailed(system, gamma, u, g)?.result)
}

/// `⊓ γ(u ⊥ (φ/a))`, which equals `u ⊓ (u ⋆γ (φ/a))`.
pub fn contract_core(
    system: &DeductionSystem,
    gamma: &dyn Selection,
    u: &FuzzyBase,
    g: &GradedFormula,
) -> Result<FuzzyBase, RevisionError> {
    Ok(revise_detailed(system, gamma, u, g)?.core)
}
