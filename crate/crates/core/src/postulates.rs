//! Conformance checks for the revision postulates.
//!
//! (F1) Success, (F2) Consistency, (F3) Inclusion, (F4) Relevance and
//! (F5) Uniformity characterise partial meet revision; (F6)–(F10) follow from
//! them. An operator is anything implementing [`RevisionOracle`] for a fixed
//! base `u`. Exhaustive mode decides each postulate over the finite instance;
//! sampled mode searches seeded random candidates and confirms any apparent
//! failure exhaustively before reporting it.
//!
//! Every failure carries a [`Counterexample`] that [`Counterexample::replay`]
//! re-checks from the definitions.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::base::{strip_comment, BaseError, FuzzyBase, GradedFormula};
use crate::formula::Formula;
use crate::lattice::{Degree, DegreeLattice};
use crate::logics::{DeductionSystem, Logic, LogicError};
use crate::revision::{self, product, Frame, RemainderSet, RevisionError, Selection, DEFAULT_ENUM_CAP};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PostulateError {
    #[error(transparent)]
    Revision(#[from] RevisionError),
    #[error("operator has no output for input `{0}`")]
    NotInTable(GradedFormula),
    #[error("operator violates {0}; no selection function reproduces it")]
    PreconditionFailed(Postulate),
    #[error("no remainder lies above the retained part of the output for `{0}`")]
    ExtractionFailed(GradedFormula),
    #[error("oracle file line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl From<LogicError> for PostulateError {
    fn from(e: LogicError) -> Self {
        PostulateError::Revision(e.into())
    }
}

impl From<BaseError> for PostulateError {
    fn from(e: BaseError) -> Self {
        PostulateError::Revision(e.into())
    }
}

/// A revision operator for a fixed base.
pub trait RevisionOracle {
    fn revise(&self, input: &GradedFormula) -> Result<FuzzyBase, PostulateError>;
}

/// `u ⋆γ ·` for a selection `γ`.
pub struct PartialMeet<'a> {
    pub system: &'a DeductionSystem,
    pub selection: &'a dyn Selection,
    pub base: &'a FuzzyBase,
}

impl RevisionOracle for PartialMeet<'_> {
    fn revise(&self, input: &GradedFormula) -> Result<FuzzyBase, PostulateError> {
        Ok(revision::revise(self.system, self.selection, self.base, input)?)
    }
}

/// Adapter turning a closure into a [`RevisionOracle`].
pub struct FnOracle<F>(pub F);

impl<F> RevisionOracle for FnOracle<F>
where
    F: Fn(&GradedFormula) -> Result<FuzzyBase, PostulateError>,
{
    fn revise(&self, input: &GradedFormula) -> Result<FuzzyBase, PostulateError> {
        (self.0)(input)
    }
}

/// An explicit input → output table.
///
/// File format: a line `> <formula> : <degree>` opens the entry for that
/// input; the following base-file lines are its output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableOracle {
    entries: Vec<(GradedFormula, FuzzyBase)>,
}

impl TableOracle {
    pub fn new(entries: Vec<(GradedFormula, FuzzyBase)>) -> Self {
        TableOracle { entries }
    }

    pub fn inputs(&self) -> impl Iterator<Item = &GradedFormula> {
        self.entries.iter().map(|(g, _)| g)
    }

    pub fn parse(text: &str, system: &DeductionSystem) -> Result<Self, PostulateError> {
        let lattice = system.lattice();
        let mut entries: Vec<(GradedFormula, FuzzyBase)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let located = |e: BaseError| match e {
                BaseError::Syntax { column, message, .. } => PostulateError::Parse {
                    line: line_no,
                    message: format!("column {column}: {message}"),
                },
                other => PostulateError::Parse {
                    line: line_no,
                    message: other.to_string(),
                },
            };
            if let Some(input) = line.strip_prefix('>') {
                let g = GradedFormula::parse(input, lattice).map_err(located)?;
                if entries.iter().any(|(h, _)| *h == g) {
                    return Err(PostulateError::Parse {
                        line: line_no,
                        message: format!("input `{g}` listed twice"),
                    });
                }
                entries.push((g, FuzzyBase::empty(lattice.clone())));
            } else {
                let entry = GradedFormula::parse(line, lattice).map_err(located)?;
                let (_, out) = entries.last_mut().ok_or_else(|| PostulateError::Parse {
                    line: line_no,
                    message: "base entry before the first `>` input line".into(),
                })?;
                out.insert(entry.formula, entry.degree).map_err(located)?;
            }
        }
        Ok(TableOracle { entries })
    }
}

impl RevisionOracle for TableOracle {
    fn revise(&self, input: &GradedFormula) -> Result<FuzzyBase, PostulateError> {
        self.entries
            .iter()
            .find(|(g, _)| g == input)
            .map(|(_, out)| out.clone())
            .ok_or_else(|| PostulateError::NotInTable(input.clone()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Postulate {
    /// `F1` … `F10`.
    F(u8),
    /// `[u ⋆ (φ/a)](φ) = u(φ) ∨ a` for consistent `u` over a chain.
    ChainCorollary,
    /// Every input-consistent `v ⊑ u` extends to a remainder.
    Extension,
    /// `u ⊓ (u ⋆γ g) = ⊓ γ(u ⊥ g)`.
    Identity,
    /// No remainder lies below another.
    Antichain,
    /// Revising with an extracted selection reproduces the operator.
    RoundTrip,
}

impl fmt::Display for Postulate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Postulate::F(k) => write!(f, "F{k}"),
            Postulate::ChainCorollary => f.write_str("F7+F8-chain"),
            Postulate::Extension => f.write_str("P5-extension"),
            Postulate::Identity => f.write_str("P6-identity"),
            Postulate::Antichain => f.write_str("antichain"),
            Postulate::RoundTrip => f.write_str("round-trip"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMode {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckConfig {
    pub mode: CheckMode,
    /// Bound on enumerated candidate bases.
    pub cap: u128,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            mode: CheckMode::Exhaustive,
            cap: DEFAULT_ENUM_CAP,
        }
    }
}

impl CheckConfig {
    pub fn sampled(samples: usize, seed: u64) -> Self {
        CheckConfig {
            mode: CheckMode::Sampled { samples, seed },
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    None,
    /// `(θ/b)`: F4.
    Entry { formula: Formula, degree: Degree },
    /// A second input and the operator's output on it: F5, F10.
    Pair { input: GradedFormula, output: FuzzyBase },
    /// The base the output should have equalled.
    Expected(FuzzyBase),
    /// The degree the output should assign to a formula.
    Value { formula: Formula, expected: Degree },
    /// A sub-base of `u` with no remainder above it.
    SubBase(FuzzyBase),
    /// Two remainders with `lower ⊑ upper`.
    Dominated { lower: FuzzyBase, upper: FuzzyBase },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::None => f.write_str("-"),
            Witness::Entry { formula, degree } => write!(f, "θ={formula} b={degree}"),
            Witness::Pair { input, output } => write!(f, "input'=({input}) output'={output}"),
            Witness::Expected(b) => write!(f, "expected={b}"),
            Witness::Value { formula, expected } => write!(f, "{formula} should be {expected}"),
            Witness::SubBase(v) => write!(f, "v={v}"),
            Witness::Dominated { lower, upper } => write!(f, "{lower} ⊑ {upper}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub postulate: Postulate,
    pub base: FuzzyBase,
    pub input: GradedFormula,
    pub output: FuzzyBase,
    pub witness: Witness,
}

impl Counterexample {
    /// Base-file sections separated by `---`: the base, the output and, where
    /// the witness is a base, the witness. Metadata sits in comments.
    pub fn dump(&self) -> String {
        let mut s = format!(
            "# postulate: {}\n# input: {}\n# witness: {}\n# base\n{}",
            self.postulate,
            self.input,
            self.witness,
            self.base.render()
        );
        s.push_str("---\n# output\n");
        s.push_str(&self.output.render());
        let extra = match &self.witness {
            Witness::Pair { output, .. } => Some(("output'", output)),
            Witness::Expected(b) => Some(("expected", b)),
            Witness::SubBase(v) => Some(("v", v)),
            Witness::Dominated { upper, .. } => Some(("upper", upper)),
            _ => None,
        };
        if let Some((label, b)) = extra {
            s.push_str(&format!("---\n# {label}\n"));
            s.push_str(&b.render());
        }
        s
    }

    /// Re-evaluates the violation from the definitions with a fresh operator
    /// call. `true` iff the counterexample still fails.
    pub fn replay(&self, system: &DeductionSystem, op: &dyn RevisionOracle, cap: u128) -> Result<bool, PostulateError> {
        let ctx = Ctx::new(system, &self.base, cap)?;
        let out = op.revise(&self.input)?;
        if out != self.output {
            return Ok(false);
        }
        let g = &self.input;
        Ok(match (self.postulate, &self.witness) {
            (Postulate::F(1), _) => ctx.f1(g, &out)?,
            (Postulate::F(2), _) => ctx.f2(g, &out)?,
            (Postulate::F(3), _) => ctx.f3(g, &out)?,
            (Postulate::F(4), Witness::Entry { formula, degree }) => {
                let entry = GradedFormula::new(formula.clone(), degree.clone());
                let applies = ctx.f4_antecedent(&out, &entry)?;
                let candidates = ctx.f4_candidates(g, &out, None)?;
                applies && !ctx.f4_has_witness(&candidates, &entry)?
            }
            (Postulate::F(5), Witness::Pair { input, output }) => {
                let out2 = op.revise(input)?;
                let vs = ctx.down_set()?;
                out2 == *output
                    && ctx.signature(g, &vs)? == ctx.signature(input, &vs)?
                    && self.base.meet(&out)? != self.base.meet(&out2)?
            }
            (Postulate::F(6), _) => ctx.f6(g, &out)?,
            (Postulate::F(7), _) => ctx.f7(g, &out)?,
            (Postulate::F(8), _) => ctx.f8(g, &out)?,
            (Postulate::F(9), _) => ctx.f9(g, &out)?,
            (Postulate::F(10), Witness::Pair { input, output }) => {
                let out2 = op.revise(input)?;
                out2 == *output
                    && ctx.same_closure(g, input)?
                    && self.base.meet(&out)? != self.base.meet(&out2)?
            }
            (Postulate::ChainCorollary, _) => ctx.corollary(g, &out)?,
            (Postulate::Extension, Witness::SubBase(v)) => {
                let r = revision::remainders(system, &self.base, g)?;
                ctx.consistent(&v.join_graded(g)?)? && !extends(&r, v)?
            }
            (Postulate::Identity, Witness::Expected(core)) => self.base.meet(&out)? != *core,
            (Postulate::RoundTrip, Witness::Expected(expected)) => out != *expected,
            (Postulate::Antichain, Witness::Dominated { lower, upper }) => lower != upper && lower.leq(upper)?,
            _ => false,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(Box<Counterexample>),
    /// A sampled search found no witness and the instance is too large to
    /// confirm exhaustively.
    Inconclusive(String),
    /// The property does not apply to this instance.
    Skipped(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coverage {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

impl fmt::Display for Coverage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coverage::Exhaustive => f.write_str("exhaustive"),
            Coverage::Sampled { samples, seed } => write!(f, "sampled n={samples} seed={seed}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PostulateReport {
    pub postulate: Postulate,
    pub verdict: Verdict,
    pub coverage: Coverage,
}

impl PostulateReport {
    pub fn failed(&self) -> bool {
        matches!(self.verdict, Verdict::Fail(_))
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        match &self.verdict {
            Verdict::Fail(c) => Some(c),
            _ => None,
        }
    }
}

impl fmt::Display for PostulateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.verdict {
            Verdict::Pass => write!(f, "{}: PASS ({})", self.postulate, self.coverage),
            Verdict::Fail(c) => write!(f, "{}: FAIL input=({}) witness={}", self.postulate, c.input, c.witness),
            Verdict::Inconclusive(why) => write!(f, "{}: INCONCLUSIVE ({}): {why}", self.postulate, self.coverage),
            Verdict::Skipped(why) => write!(f, "{}: SKIPPED ({why})", self.postulate),
        }
    }
}

fn coverage(mode: CheckMode) -> Coverage {
    match mode {
        CheckMode::Exhaustive => Coverage::Exhaustive,
        CheckMode::Sampled { samples, seed } => Coverage::Sampled { samples, seed },
    }
}

/// Shared state of one check run: the instance plus a consistency memo.
struct Ctx<'a> {
    system: &'a DeductionSystem,
    u: &'a FuzzyBase,
    frame: Frame,
    cap: u128,
    memo: RefCell<HashMap<Vec<(Formula, Degree)>, bool>>,
}

impl<'a> Ctx<'a> {
    fn new(system: &'a DeductionSystem, u: &'a FuzzyBase, cap: u128) -> Result<Self, PostulateError> {
        if **u.lattice() != **system.lattice() {
            return Err(RevisionError::LatticeMismatch.into());
        }
        Ok(Ctx {
            system,
            u,
            frame: Frame::new(u)?,
            cap,
            memo: RefCell::new(HashMap::new()),
        })
    }

    fn lattice(&self) -> &DegreeLattice {
        self.system.lattice()
    }

    fn consistent(&self, b: &FuzzyBase) -> Result<bool, PostulateError> {
        let key = b.canonical_key();
        if let Some(&c) = self.memo.borrow().get(&key) {
            return Ok(c);
        }
        let c = self.system.is_consistent(b)?;
        self.memo.borrow_mut().insert(key, c);
        Ok(c)
    }

    fn down_set(&self) -> Result<Vec<FuzzyBase>, PostulateError> {
        let size = self.frame.down_set_size();
        if size > self.cap {
            return Err(RevisionError::CapExceeded { size, cap: self.cap }.into());
        }
        Ok(self.frame.down_set().iter().map(|v| self.frame.to_base(v)).collect())
    }

    fn sample_down_set(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<FuzzyBase> {
        let choices: Vec<Vec<usize>> = self
            .frame
            .ceiling
            .iter()
            .map(|&c| self.lattice().down_set_idx(c))
            .collect();
        let mut out = vec![self.u.clone(), self.system.empty_base()];
        for _ in 0..n {
            let v: Vec<usize> = choices.iter().map(|c| c[rng.gen_range(0..c.len())]).collect();
            out.push(self.frame.to_base(&v));
        }
        out
    }

    fn f1(&self, g: &GradedFormula, out: &FuzzyBase) -> Result<bool, PostulateError> {
        Ok(!self.lattice().leq(&g.degree, out.degree_of(&g.formula)).map_err(RevisionError::from)?)
    }

    fn f2(&self, g: &GradedFormula, out: &FuzzyBase) -> Result<bool, PostulateError> {
        Ok(self.system.input_consistent(g)? && !self.consistent(out)?)
    }

    fn f3(&self, g: &GradedFormula, out: &FuzzyBase) -> Result<bool, PostulateError> {
        Ok(!out.leq(&self.u.join_graded(g)?)?)
    }

    /// `b ≤ u(θ)` and `b ≰ out(θ)`.
    fn f4_antecedent(&self, out: &FuzzyBase, entry: &GradedFormula) -> Result<bool, PostulateError> {
        let l = self.lattice();
        let leq = |a: &Degree, b: &Degree| l.leq(a, b).map_err(RevisionError::from);
        Ok(leq(&entry.degree, self.u.degree_of(&entry.formula))? && !leq(&entry.degree, out.degree_of(&entry.formula))?)
    }

    /// Consistent bases `u'` with `out ⊑ u' ⊑ u ⊔ g`: all of them, or a
    /// seeded sample plus both ends of the interval.
    fn f4_candidates(
        &self,
        g: &GradedFormula,
        out: &FuzzyBase,
        sample: Option<(usize, &mut ChaCha8Rng)>,
    ) -> Result<Vec<FuzzyBase>, PostulateError> {
        let l = self.lattice();
        let top = self.u.join_graded(g)?;
        if !out.leq(&top)? {
            return Ok(Vec::new());
        }
        let top_frame = Frame::new(&top)?;
        let mut choices = Vec::with_capacity(top_frame.formulas.len());
        for (f, &hi) in top_frame.formulas.iter().zip(&top_frame.ceiling) {
            let lo = l.index_of(out.degree_of(f)).map_err(RevisionError::from)?;
            let mut interval = l.interval_idx(lo, hi);
            interval.sort_by_key(|&d| std::cmp::Reverse(l.rank_idx(d)));
            choices.push(interval);
        }
        let vectors = match sample {
            None => {
                let size = choices.iter().fold(1u128, |acc, c| acc.saturating_mul(c.len() as u128));
                if size > self.cap {
                    return Err(RevisionError::CapExceeded { size, cap: self.cap }.into());
                }
                product(&choices)
            }
            Some((n, rng)) => {
                let mut vs = vec![top_frame.ceiling.clone()];
                vs.push(choices.iter().map(|c| *c.last().expect("non-empty interval")).collect());
                for _ in 0..n {
                    vs.push(choices.iter().map(|c| c[rng.gen_range(0..c.len())]).collect());
                }
                vs
            }
        };
        let mut out = Vec::new();
        for v in vectors {
            let b = top_frame.to_base(&v);
            if self.consistent(&b)? {
                out.push(b);
            }
        }
        Ok(out)
    }

    fn f4_has_witness(&self, candidates: &[FuzzyBase], entry: &GradedFormula) -> Result<bool, PostulateError> {
        for c in candidates {
            if !self.consistent(&c.join_graded(entry)?)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// `(θ/b)` pairs satisfying F4's antecedent, `θ ∈ Supp(u)`, grid `b`.
    fn f4_entries(&self, out: &FuzzyBase) -> Result<Vec<GradedFormula>, PostulateError> {
        let l = self.lattice();
        let mut order: Vec<usize> = (0..l.len()).collect();
        order.sort_by_key(|&d| l.rank_idx(d));
        let mut entries = Vec::new();
        for f in self.u.support() {
            for &d in &order {
                let entry = GradedFormula::new(f.clone(), l.degree(d).clone());
                if self.f4_antecedent(out, &entry)? {
                    entries.push(entry);
                }
            }
        }
        Ok(entries)
    }

    fn signature(&self, g: &GradedFormula, vs: &[FuzzyBase]) -> Result<Vec<bool>, PostulateError> {
        vs.iter().map(|v| self.consistent(&v.join_graded(g)?)).collect()
    }

    fn f6(&self, g: &GradedFormula, out: &FuzzyBase) -> Result<bool, PostulateError> {
        let joined = self.u.join_graded(g)?;
        Ok(self.consistent(&joined)? && *out != joined)
    }

    fn f7(&self, g: &GradedFormula, out: &FuzzyBase) -> Result<bool, PostulateError> {
        let believed = self
            .lattice()
            .leq(&g.degree, self.u.degree_of(&g.formula))
            .map_err(RevisionError::from)?;
        Ok(believed && self.consistent(self.u)? && out != self.u)
    }

    fn f8(&self, g: &GradedFormula, out: &FuzzyBase) -> Result<bool, PostulateError> {
        let below = self
            .lattice()
            .leq(self.u.degree_of(&g.formula), &g.degree)
            .map_err(RevisionError::from)?;
        Ok(below && *out.degree_of(&g.formula) != g.degree)
    }

    fn f9(&self, g: &GradedFormula, out: &FuzzyBase) -> Result<bool, PostulateError> {
        Ok(!self.system.input_consistent(g)? && *out != self.u.join_graded(g)?)
    }

    fn corollary_expected(&self, g: &GradedFormula) -> Result<Degree, PostulateError> {
        Ok(self
            .lattice()
            .join(self.u.degree_of(&g.formula), &g.degree)
            .map_err(RevisionError::from)?)
    }

    fn corollary(&self, g: &GradedFormula, out: &FuzzyBase) -> Result<bool, PostulateError> {
        Ok(self.lattice().is_linear()
            && self.consistent(self.u)?
            && *out.degree_of(&g.formula) != self.corollary_expected(g)?)
    }

    /// `D(g) = D(g')` on the probe set `Supp(u) ∪ {φ, φ'}`.
    fn same_closure(&self, g: &GradedFormula, h: &GradedFormula) -> Result<bool, PostulateError> {
        let lattice = self.system.lattice().clone();
        let bg = FuzzyBase::from_graded(lattice.clone(), g)?;
        let bh = FuzzyBase::from_graded(lattice, h)?;
        let probes = self.u.support().chain([&g.formula, &h.formula]);
        for p in probes {
            if self.system.deduce(&bg, p)? != self.system.deduce(&bh, p)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn extends(r: &RemainderSet, v: &FuzzyBase) -> Result<bool, PostulateError> {
    for w in r.elements() {
        if v.leq(w)? {
            return Ok(true);
        }
    }
    Ok(false)
}

fn outputs(op: &dyn RevisionOracle, inputs: &[GradedFormula]) -> Result<Vec<(GradedFormula, FuzzyBase)>, PostulateError> {
    let mut seen: Vec<(GradedFormula, FuzzyBase)> = Vec::with_capacity(inputs.len());
    for g in inputs {
        if !seen.iter().any(|(h, _)| h == g) {
            seen.push((g.clone(), op.revise(g)?));
        }
    }
    Ok(seen)
}

/// Default input probe set: `(θ/1)` and `(¬θ/1)` for `θ ∈ Supp(u)`; under
/// table semantics every universe item at every non-bottom degree.
pub fn probe_inputs(system: &DeductionSystem, u: &FuzzyBase) -> Vec<GradedFormula> {
    let l = system.lattice();
    let mut out: Vec<GradedFormula> = Vec::new();
    let mut push = |g: GradedFormula| {
        if !out.contains(&g) {
            out.push(g);
        }
    };
    match system.logic() {
        Logic::Table(t) => {
            for f in t.universe() {
                for d in l.elements() {
                    if d != l.bottom() {
                        push(GradedFormula::new(f.clone(), d.clone()));
                    }
                }
            }
        }
        _ => {
            for f in u.support() {
                push(GradedFormula::new(f.clone(), l.top().clone()));
                push(GradedFormula::new(Formula::not(f.clone()), l.top().clone()));
            }
        }
    }
    out
}

fn simple_report<F>(
    postulate: Postulate,
    u: &FuzzyBase,
    outs: &[(GradedFormula, FuzzyBase)],
    violated: F,
    witness: impl Fn(&GradedFormula, &FuzzyBase) -> Witness,
) -> Result<PostulateReport, PostulateError>
where
    F: Fn(&GradedFormula, &FuzzyBase) -> Result<bool, PostulateError>,
{
    for (g, out) in outs {
        if violated(g, out)? {
            return Ok(PostulateReport {
                postulate,
                verdict: Verdict::Fail(Box::new(Counterexample {
                    postulate,
                    base: u.clone(),
                    input: g.clone(),
                    output: out.clone(),
                    witness: witness(g, out),
                })),
                coverage: Coverage::Exhaustive,
            });
        }
    }
    Ok(PostulateReport {
        postulate,
        verdict: Verdict::Pass,
        coverage: Coverage::Exhaustive,
    })
}

/// (F1)–(F5) over the given inputs.
pub fn check(
    system: &DeductionSystem,
    u: &FuzzyBase,
    op: &dyn RevisionOracle,
    inputs: &[GradedFormula],
    config: &CheckConfig,
) -> Result<Vec<PostulateReport>, PostulateError> {
    let ctx = Ctx::new(system, u, config.cap)?;
    let outs = outputs(op, inputs)?;
    let none = |_: &GradedFormula, _: &FuzzyBase| Witness::None;
    let mut reports = vec![
        simple_report(Postulate::F(1), u, &outs, |g, o| ctx.f1(g, o), none)?,
        simple_report(Postulate::F(2), u, &outs, |g, o| ctx.f2(g, o), none)?,
        simple_report(Postulate::F(3), u, &outs, |g, o| ctx.f3(g, o), |g, _| {
            Witness::Expected(u.join_graded(g).expect("same lattice"))
        })?,
    ];
    reports.push(check_f4(&ctx, &outs, config.mode)?);
    reports.push(check_f5(&ctx, &outs, config.mode)?);
    Ok(reports)
}

fn check_f4(ctx: &Ctx<'_>, outs: &[(GradedFormula, FuzzyBase)], mode: CheckMode) -> Result<PostulateReport, PostulateError> {
    let postulate = Postulate::F(4);
    let mut rng = match mode {
        CheckMode::Sampled { seed, .. } => Some(ChaCha8Rng::seed_from_u64(seed)),
        CheckMode::Exhaustive => None,
    };
    let mut inconclusive = None;
    for (g, out) in outs {
        let entries = ctx.f4_entries(out)?;
        if entries.is_empty() {
            continue;
        }
        let candidates = match (&mut rng, mode) {
            (Some(rng), CheckMode::Sampled { samples, .. }) => ctx.f4_candidates(g, out, Some((samples, rng)))?,
            _ => ctx.f4_candidates(g, out, None)?,
        };
        for entry in entries {
            if ctx.f4_has_witness(&candidates, &entry)? {
                continue;
            }
            if rng.is_some() {
                // Confirm exhaustively before reporting.
                match ctx.f4_candidates(g, out, None) {
                    Ok(all) => {
                        if ctx.f4_has_witness(&all, &entry)? {
                            continue;
                        }
                    }
                    Err(PostulateError::Revision(RevisionError::CapExceeded { .. })) => {
                        inconclusive.get_or_insert_with(|| format!("input ({g}), θ={} b={}", entry.formula, entry.degree));
                        continue;
                    }
                    Err(e) => return Err(e),
                }
            }
            return Ok(PostulateReport {
                postulate,
                verdict: Verdict::Fail(Box::new(Counterexample {
                    postulate,
                    base: ctx.u.clone(),
                    input: g.clone(),
                    output: out.clone(),
                    witness: Witness::Entry {
                        formula: entry.formula,
                        degree: entry.degree,
                    },
                })),
                coverage: coverage(mode),
            });
        }
    }
    Ok(PostulateReport {
        postulate,
        verdict: match inconclusive {
            None => Verdict::Pass,
            Some(why) => Verdict::Inconclusive(why),
        },
        coverage: coverage(mode),
    })
}

fn check_f5(ctx: &Ctx<'_>, outs: &[(GradedFormula, FuzzyBase)], mode: CheckMode) -> Result<PostulateReport, PostulateError> {
    let postulate = Postulate::F(5);
    let vs = match mode {
        CheckMode::Exhaustive => ctx.down_set()?,
        CheckMode::Sampled { samples, seed } => ctx.sample_down_set(samples, &mut ChaCha8Rng::seed_from_u64(seed)),
    };
    let mut full: Option<Vec<FuzzyBase>> = None;
    let mut inconclusive = None;
    let signatures = outs
        .iter()
        .map(|(g, _)| ctx.signature(g, &vs))
        .collect::<Result<Vec<_>, _>>()?;
    for i in 0..outs.len() {
        for j in i + 1..outs.len() {
            if signatures[i] != signatures[j] {
                continue;
            }
            let (g, out) = &outs[i];
            let (h, out2) = &outs[j];
            if ctx.u.meet(out)? == ctx.u.meet(out2)? {
                continue;
            }
            if matches!(mode, CheckMode::Sampled { .. }) {
                if full.is_none() {
                    match ctx.down_set() {
                        Ok(all) => full = Some(all),
                        Err(PostulateError::Revision(RevisionError::CapExceeded { .. })) => {
                            inconclusive.get_or_insert_with(|| format!("inputs ({g}) and ({h})"));
                            continue;
                        }
                        Err(e) => return Err(e),
                    }
                }
                let all = full.as_ref().expect("set above");
                if ctx.signature(g, all)? != ctx.signature(h, all)? {
                    continue;
                }
            }
            return Ok(PostulateReport {
                postulate,
                verdict: Verdict::Fail(Box::new(Counterexample {
                    postulate,
                    base: ctx.u.clone(),
                    input: g.clone(),
                    output: out.clone(),
                    witness: Witness::Pair {
                        input: h.clone(),
                        output: out2.clone(),
                    },
                })),
                coverage: coverage(mode),
            });
        }
    }
    Ok(PostulateReport {
        postulate,
        verdict: match inconclusive {
            None => Verdict::Pass,
            Some(why) => Verdict::Inconclusive(why),
        },
        coverage: coverage(mode),
    })
}

/// (F6)–(F10) and, over chains, the corollary of (F7)+(F8).
pub fn check_derived(
    system: &DeductionSystem,
    u: &FuzzyBase,
    op: &dyn RevisionOracle,
    inputs: &[GradedFormula],
    config: &CheckConfig,
) -> Result<Vec<PostulateReport>, PostulateError> {
    let ctx = Ctx::new(system, u, config.cap)?;
    let outs = outputs(op, inputs)?;
    let joined = |g: &GradedFormula, _: &FuzzyBase| Witness::Expected(u.join_graded(g).expect("same lattice"));
    let mut reports = vec![
        simple_report(Postulate::F(6), u, &outs, |g, o| ctx.f6(g, o), joined)?,
        simple_report(Postulate::F(7), u, &outs, |g, o| ctx.f7(g, o), |_, _| Witness::Expected(u.clone()))?,
        simple_report(Postulate::F(8), u, &outs, |g, o| ctx.f8(g, o), |g, _| Witness::Value {
            formula: g.formula.clone(),
            expected: g.degree.clone(),
        })?,
        simple_report(Postulate::F(9), u, &outs, |g, o| ctx.f9(g, o), joined)?,
    ];

    let mut f10 = PostulateReport {
        postulate: Postulate::F(10),
        verdict: Verdict::Pass,
        coverage: Coverage::Exhaustive,
    };
    'pairs: for i in 0..outs.len() {
        for j in i + 1..outs.len() {
            let (g, out) = &outs[i];
            let (h, out2) = &outs[j];
            if u.meet(out)? != u.meet(out2)? && ctx.same_closure(g, h)? {
                f10.verdict = Verdict::Fail(Box::new(Counterexample {
                    postulate: Postulate::F(10),
                    base: u.clone(),
                    input: g.clone(),
                    output: out.clone(),
                    witness: Witness::Pair {
                        input: h.clone(),
                        output: out2.clone(),
                    },
                }));
                break 'pairs;
            }
        }
    }
    reports.push(f10);

    if system.lattice().is_linear() {
        reports.push(simple_report(
            Postulate::ChainCorollary,
            u,
            &outs,
            |g, o| ctx.corollary(g, o),
            |g, _| Witness::Value {
                formula: g.formula.clone(),
                expected: ctx.corollary_expected(g).expect("same lattice"),
            },
        )?);
    } else {
        reports.push(PostulateReport {
            postulate: Postulate::ChainCorollary,
            verdict: Verdict::Skipped("non-linear lattice".into()),
            coverage: Coverage::Exhaustive,
        });
    }
    Ok(reports)
}

/// Every input-consistent `v ⊑ u` lies below some remainder.
pub fn check_extension(
    system: &DeductionSystem,
    u: &FuzzyBase,
    g: &GradedFormula,
    cap: u128,
) -> Result<PostulateReport, PostulateError> {
    let ctx = Ctx::new(system, u, cap)?;
    let r = revision::remainders(system, u, g)?;
    let mut verdict = Verdict::Pass;
    for v in ctx.down_set()? {
        if ctx.consistent(&v)? && ctx.consistent(&v.join_graded(g)?)? && !extends(&r, &v)? {
            verdict = Verdict::Fail(Box::new(Counterexample {
                postulate: Postulate::Extension,
                base: u.clone(),
                input: g.clone(),
                output: system.empty_base(),
                witness: Witness::SubBase(v),
            }));
            break;
        }
    }
    Ok(PostulateReport {
        postulate: Postulate::Extension,
        verdict,
        coverage: Coverage::Exhaustive,
    })
}

/// `u ⊓ (u ⋆γ g) = ⊓ γ(u ⊥ g)`.
pub fn check_identity(
    system: &DeductionSystem,
    selection: &dyn Selection,
    u: &FuzzyBase,
    g: &GradedFormula,
) -> Result<PostulateReport, PostulateError> {
    let outcome = revision::revise_detailed(system, selection, u, g)?;
    let verdict = if u.meet(&outcome.result)? == outcome.core {
        Verdict::Pass
    } else {
        Verdict::Fail(Box::new(Counterexample {
            postulate: Postulate::Identity,
            base: u.clone(),
            input: g.clone(),
            output: outcome.result,
            witness: Witness::Expected(outcome.core),
        }))
    };
    Ok(PostulateReport {
        postulate: Postulate::Identity,
        verdict,
        coverage: Coverage::Exhaustive,
    })
}

/// No element of `r` lies below another.
pub fn check_antichain(r: &RemainderSet) -> Result<PostulateReport, PostulateError> {
    let mut verdict = Verdict::Pass;
    'outer: for (i, a) in r.elements().iter().enumerate() {
        for (j, b) in r.elements().iter().enumerate() {
            if i != j && a.leq(b)? {
                verdict = Verdict::Fail(Box::new(Counterexample {
                    postulate: Postulate::Antichain,
                    base: r.base().clone(),
                    input: r.input().clone(),
                    output: r.base().clone(),
                    witness: Witness::Dominated {
                        lower: a.clone(),
                        upper: b.clone(),
                    },
                }));
                break 'outer;
            }
        }
    }
    Ok(PostulateReport {
        postulate: Postulate::Antichain,
        verdict,
        coverage: Coverage::Exhaustive,
    })
}

/// A per-input selection table recovered from an operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractedSelection {
    entries: Vec<(GradedFormula, Vec<FuzzyBase>)>,
}

impl ExtractedSelection {
    /// Selected remainders for `g`; empty when the remainder set is empty.
    pub fn get(&self, g: &GradedFormula) -> Option<&[FuzzyBase]> {
        self.entries.iter().find(|(h, _)| h == g).map(|(_, s)| s.as_slice())
    }

    pub fn entries(&self) -> &[(GradedFormula, Vec<FuzzyBase>)] {
        &self.entries
    }
}

impl Selection for ExtractedSelection {
    fn choose(&self, _base: &FuzzyBase, r: &RemainderSet) -> Result<Vec<usize>, RevisionError> {
        let chosen = self
            .get(r.input())
            .ok_or_else(|| RevisionError::StrategyViolation(format!("no extracted choice for `{}`", r.input())))?;
        chosen
            .iter()
            .map(|b| {
                r.position(b)
                    .ok_or_else(|| RevisionError::StrategyViolation(format!("`{b}` is not a remainder")))
            })
            .collect()
    }
}

/// `γ(u ⊥ g) = {u' ∈ u ⊥ g : u ⊓ op(g) ⊑ u'}` for every probed `g`, after
/// confirming (F1)–(F5) on the same inputs.
pub fn extract_selection(
    system: &DeductionSystem,
    u: &FuzzyBase,
    op: &dyn RevisionOracle,
    inputs: &[GradedFormula],
    config: &CheckConfig,
) -> Result<ExtractedSelection, PostulateError> {
    for report in check(system, u, op, inputs, config)? {
        if report.failed() {
            return Err(PostulateError::PreconditionFailed(report.postulate));
        }
    }
    let mut entries = Vec::new();
    for (g, out) in outputs(op, inputs)? {
        let r = revision::remainders(system, u, &g)?;
        let retained = u.meet(&out)?;
        let mut chosen = Vec::new();
        for w in r.elements() {
            if retained.leq(w)? {
                chosen.push(w.clone());
            }
        }
        if chosen.is_empty() && !r.is_empty() {
            return Err(PostulateError::ExtractionFailed(g));
        }
        entries.push((g, chosen));
    }
    Ok(ExtractedSelection { entries })
}

/// Revising with `selection` reproduces `op` on every input.
pub fn check_round_trip(
    system: &DeductionSystem,
    u: &FuzzyBase,
    op: &dyn RevisionOracle,
    selection: &dyn Selection,
    inputs: &[GradedFormula],
) -> Result<PostulateReport, PostulateError> {
    let mut verdict = Verdict::Pass;
    for (g, expected) in outputs(op, inputs)? {
        let got = revision::revise(system, selection, u, &g)?;
        if got != expected {
            verdict = Verdict::Fail(Box::new(Counterexample {
                postulate: Postulate::RoundTrip,
                base: u.clone(),
                input: g,
                output: got,
                witness: Witness::Expected(expected),
            }));
            break;
        }
    }
    Ok(PostulateReport {
        postulate: Postulate::RoundTrip,
        verdict,
        coverage: Coverage::Exhaustive,
    })
}
