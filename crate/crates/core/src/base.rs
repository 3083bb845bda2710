//! Fuzzy belief bases: finite-support maps from formulas to degrees.
//!
//! Entries never store `0_W`, so two bases are equal exactly when their entry
//! maps are. Insertion order is kept and is the "base-file order" used for
//! tie-breaking and rendering.

use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;
use thiserror::Error;

use crate::formula::Formula;
use crate::lattice::{Degree, DegreeLattice, LatticeError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BaseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: {source}")]
    OffLattice { line: usize, source: LatticeError },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("bases live over different degree lattices")]
    LatticeMismatch,
    #[error("meet of an empty family of bases is not representable")]
    EmptyMeet,
}

/// The pair `(φ/a)`: the information that φ holds to degree at least `a`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GradedFormula {
    pub formula: Formula,
    pub degree: Degree,
}

impl GradedFormula {
    pub fn new(formula: Formula, degree: Degree) -> Self {
        GradedFormula { formula, degree }
    }

    /// Parses `<formula> : <degree>`.
    pub fn parse(text: &str, lattice: &DegreeLattice) -> Result<Self, BaseError> {
        parse_entry(text, 1, lattice)
    }
}

impl fmt::Display for GradedFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {}", self.formula, self.degree)
    }
}

#[derive(Clone, Debug)]
pub struct FuzzyBase {
    lattice: Arc<DegreeLattice>,
    entries: IndexMap<Formula, Degree>,
}

impl PartialEq for FuzzyBase {
    fn eq(&self, other: &Self) -> bool {
        // IndexMap equality ignores insertion order.
        self.entries == other.entries
            && (Arc::ptr_eq(&self.lattice, &other.lattice) || self.lattice == other.lattice)
    }
}

impl Eq for FuzzyBase {}

impl FuzzyBase {
    /// The empty base `u_⊤`.
    pub fn empty(lattice: Arc<DegreeLattice>) -> Self {
        FuzzyBase {
            lattice,
            entries: IndexMap::new(),
        }
    }

    pub fn from_graded(lattice: Arc<DegreeLattice>, g: &GradedFormula) -> Result<Self, BaseError> {
        let mut u = FuzzyBase::empty(lattice);
        u.insert(g.formula.clone(), g.degree.clone())?;
        Ok(u)
    }

    pub fn from_entries<I>(lattice: Arc<DegreeLattice>, entries: I) -> Result<Self, BaseError>
    where
        I: IntoIterator<Item = (Formula, Degree)>,
    {
        let mut u = FuzzyBase::empty(lattice);
        for (f, d) in entries {
            u.insert(f, d)?;
        }
        Ok(u)
    }

    pub fn lattice(&self) -> &Arc<DegreeLattice> {
        &self.lattice
    }

    /// Raises `f` to at least `d` (join with any existing degree).
    pub fn insert(&mut self, f: Formula, d: Degree) -> Result<(), BaseError> {
        let di = self.lattice.index_of(&d)?;
        let joined = match self.entries.get(&f) {
            Some(old) => self.lattice.join_idx(self.lattice.index_of(old)?, di),
            None => di,
        };
        self.store(f, joined);
        Ok(())
    }

    /// Sets `f` to exactly `d`; `0_W` removes the entry.
    pub fn set(&mut self, f: Formula, d: Degree) -> Result<(), BaseError> {
        let di = self.lattice.index_of(&d)?;
        self.store(f, di);
        Ok(())
    }

    fn store(&mut self, f: Formula, idx: usize) {
        if idx == self.lattice.bottom_idx() {
            self.entries.shift_remove(&f);
        } else {
            let d = self.lattice.degree(idx).clone();
            match self.entries.get_mut(&f) {
                Some(slot) => *slot = d,
                None => {
                    self.entries.insert(f, d);
                }
            }
        }
    }

    pub fn degree_of(&self, f: &Formula) -> &Degree {
        self.entries.get(f).unwrap_or_else(|| self.lattice.bottom())
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Formula, &Degree)> {
        self.entries.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Formula> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn same_lattice(&self, other: &FuzzyBase) -> bool {
        Arc::ptr_eq(&self.lattice, &other.lattice) || self.lattice == other.lattice
    }

    fn check_lattice(&self, other: &FuzzyBase) -> Result<(), BaseError> {
        if self.same_lattice(other) {
            Ok(())
        } else {
            Err(BaseError::LatticeMismatch)
        }
    }

    /// `self ⊑ other`.
    pub fn leq(&self, other: &FuzzyBase) -> Result<bool, BaseError> {
        self.check_lattice(other)?;
        for (f, d) in &self.entries {
            if !self.lattice.leq(d, other.degree_of(f))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn join(&self, other: &FuzzyBase) -> Result<FuzzyBase, BaseError> {
        self.check_lattice(other)?;
        let mut out = self.clone();
        for (f, d) in &other.entries {
            out.insert(f.clone(), d.clone())?;
        }
        Ok(out)
    }

    pub fn meet(&self, other: &FuzzyBase) -> Result<FuzzyBase, BaseError> {
        self.check_lattice(other)?;
        let mut out = FuzzyBase::empty(self.lattice.clone());
        for (f, d) in &self.entries {
            if let Some(e) = other.entries.get(f) {
                let m = self.lattice.meet(d, e)?;
                out.set(f.clone(), m)?;
            }
        }
        Ok(out)
    }

    pub fn join_graded(&self, g: &GradedFormula) -> Result<FuzzyBase, BaseError> {
        let mut out = self.clone();
        out.insert(g.formula.clone(), g.degree.clone())?;
        Ok(out)
    }

    /// Meet of a non-empty family.
    pub fn meet_all<'a, I>(bases: I) -> Result<FuzzyBase, BaseError>
    where
        I: IntoIterator<Item = &'a FuzzyBase>,
    {
        let mut it = bases.into_iter();
        let mut acc = it.next().ok_or(BaseError::EmptyMeet)?.clone();
        for b in it {
            acc = acc.meet(b)?;
        }
        Ok(acc)
    }

    /// Entries sorted by formula; a hashable identity for the base.
    pub fn canonical_key(&self) -> Vec<(Formula, Degree)> {
        let mut v: Vec<_> = self
            .entries
            .iter()
            .map(|(f, d)| (f.clone(), d.clone()))
            .collect();
        v.sort();
        v
    }

    /// Renders in the base-file format, one `formula : degree` line per entry.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for (f, d) in &self.entries {
            s.push_str(&format!("{f} : {d}\n"));
        }
        s
    }

    /// Parses the base-file format: `formula : degree` per line, `#` comments,
    /// blank lines ignored. Duplicate formulas are joined, zero degrees dropped.
    pub fn parse(text: &str, lattice: Arc<DegreeLattice>) -> Result<FuzzyBase, BaseError> {
        let mut u = FuzzyBase::empty(lattice);
        for (i, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.trim().is_empty() {
                continue;
            }
            let g = parse_entry(line, i + 1, &u.lattice)?;
            u.insert(g.formula, g.degree)?;
        }
        Ok(u)
    }
}

pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_entry(line: &str, line_no: usize, lattice: &DegreeLattice) -> Result<GradedFormula, BaseError> {
    let Some((lhs, rhs)) = line.rsplit_once(':') else {
        return Err(BaseError::Syntax {
            line: line_no,
            column: line.chars().count() + 1,
            message: "expected `<formula> : <degree>`".into(),
        });
    };
    let formula = Formula::parse(lhs).map_err(|e| BaseError::Syntax {
        line: line_no,
        column: e.column,
        message: e.message,
    })?;
    let degree = lattice.parse_degree(rhs).map_err(|source| BaseError::OffLattice {
        line: line_no,
        source,
    })?;
    Ok(GradedFormula { formula, degree })
}

impl fmt::Display for FuzzyBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (phi, d)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({phi}/{d})")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c4() -> Arc<DegreeLattice> {
        Arc::new(DegreeLattice::chain(4).unwrap())
    }

    fn base(text: &str, l: &Arc<DegreeLattice>) -> FuzzyBase {
        FuzzyBase::parse(text, l.clone()).unwrap()
    }

    fn q(n: i64, d: i64) -> Degree {
        Degree::rational(n, d).unwrap()
    }

    #[test]
    fn parses_u0() {
        let l = c4();
        let u0 = base("x : 3/4\nx -> y : 0.75\nz : 1/4", &l);
        let expected = FuzzyBase::from_entries(
            l.clone(),
            [
                (Formula::parse("x").unwrap(), q(3, 4)),
                (Formula::parse("x -> y").unwrap(), q(3, 4)),
                (Formula::parse("z").unwrap(), q(1, 4)),
            ],
        )
        .unwrap();
        assert_eq!(u0, expected);
        assert_eq!(u0.render(), "x : 3/4\nx -> y : 3/4\nz : 1/4\n");
        assert_eq!(u0.to_string(), "{(x/3/4), (x -> y/3/4), (z/1/4)}");
    }

    #[test]
    fn parse_edge_cases() {
        let l = c4();
        assert!(base("", &l).is_empty());
        assert!(base("# only a comment\n\n   \n", &l).is_empty());
        assert_eq!(base("x : 0.5\nx : 0.75", &l), base("x : 3/4", &l));
        assert_eq!(base("x : 0.75\nx : 0.5", &l), base("x : 3/4", &l));
        assert!(base("x : 0\ny : 1/4", &l).len() == 1);
        assert_eq!(base("a <-> b : 1", &l), base("(a -> b) & (b -> a) : 1", &l));
        assert_eq!(base("x : 1 # trailing comment", &l), base("x:1", &l));

        let err = FuzzyBase::parse("x : 1\ny & : 1", l.clone()).unwrap_err();
        assert!(matches!(err, BaseError::Syntax { line: 2, column: 5, .. }), "{err:?}");
        let err = FuzzyBase::parse("x 1", l.clone()).unwrap_err();
        assert!(matches!(err, BaseError::Syntax { line: 1, .. }));
        let err = FuzzyBase::parse("x : 1\n\ny : 0.3", l.clone()).unwrap_err();
        assert!(matches!(err, BaseError::OffLattice { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn order() {
        let l = c4();
        let u0 = base("x : 3/4\nx -> y : 3/4\nz : 1/4", &l);
        assert!(FuzzyBase::empty(l.clone()).leq(&u0).unwrap());
        assert!(base("x : 1/4", &l).leq(&u0).unwrap());
        assert!(!base("x : 3/4\ny : 1/4", &l).leq(&u0).unwrap());
        let other = Arc::new(DegreeLattice::chain(2).unwrap());
        assert_eq!(
            FuzzyBase::empty(other).leq(&u0),
            Err(BaseError::LatticeMismatch)
        );
    }

    #[test]
    fn join_and_meet() {
        let l = c4();
        let a = base("x : 3/4\nx -> y : 3/4", &l);
        let b = base("x : 3/4\nx -> y : 1/4\nz : 1/4", &l);
        assert_eq!(a.meet(&b).unwrap(), base("x : 3/4\nx -> y : 1/4", &l));

        let u0 = base("x : 3/4\nx -> y : 3/4\nz : 1/4", &l);
        let g = GradedFormula::parse("!(y & z) : 1", &l).unwrap();
        assert_eq!(
            u0.join_graded(&g).unwrap(),
            base("x : 3/4\nx -> y : 3/4\nz : 1/4\n!(y & z) : 1", &l)
        );
        let top = FuzzyBase::empty(l.clone());
        assert_eq!(u0.meet(&top).unwrap(), top);
        assert_eq!(u0.join(&top).unwrap(), u0);
        assert_eq!(
            FuzzyBase::meet_all(std::iter::empty()).unwrap_err(),
            BaseError::EmptyMeet
        );
    }

    #[test]
    fn explicit_lattice_meet_drops_bottom() {
        let sq = Arc::new(
            DegreeLattice::validate_explicit(
                &["00", "01", "10", "11"],
                &[("00", "01"), ("00", "10"), ("01", "11"), ("10", "11")],
            )
            .unwrap(),
        );
        let a = base("p : 01\nq : 11", &sq);
        let b = base("p : 10\nq : 10", &sq);
        assert_eq!(a.meet(&b).unwrap(), base("q : 10", &sq));
        assert_eq!(a.join(&b).unwrap(), base("p : 11\nq : 11", &sq));
    }
}
