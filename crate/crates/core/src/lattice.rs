//! Finite complete distributive lattices of truth-degrees.
//!
//! Two representations are supported: chains `{0, 1/k, ..., 1}` of exact
//! rationals, and explicit lattices given by an element list and an order
//! relation. Explicit lattices are validated on construction (partial order,
//! boundedness, existence of binary joins and meets, distributivity) and carry
//! precomputed join/meet tables.
//!
//! Internally every degree has an index in `0..len()`. The index-level API
//! (`*_idx`) is what the search code uses; the [`Degree`]-level API checks
//! membership and reports foreign elements.

use std::collections::HashMap;
use std::fmt;

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational used for chain degrees.
pub type Rational = Ratio<i64>;

/// A truth-degree: either a point of a rational chain or a named element of
/// an explicit lattice.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Degree {
    Rational(Rational),
    Element(String),
}

impl Degree {
    /// Builds a reduced rational degree in `[0, 1]`.
    pub fn rational(num: i64, den: i64) -> Result<Self, LatticeError> {
        if den == 0 {
            return Err(LatticeError::BadLiteral(format!("{num}/{den}")));
        }
        let r = Ratio::new(num, den);
        if r.is_negative() || r > Rational::one() {
            return Err(LatticeError::BadLiteral(format!("{num}/{den}")));
        }
        Ok(Degree::Rational(r))
    }

    pub fn zero() -> Self {
        Degree::Rational(Rational::zero())
    }

    pub fn one() -> Self {
        Degree::Rational(Rational::one())
    }

    pub fn element(id: impl Into<String>) -> Self {
        Degree::Element(id.into())
    }

    pub fn as_rational(&self) -> Option<Rational> {
        match self {
            Degree::Rational(r) => Some(*r),
            Degree::Element(_) => None,
        }
    }

    /// Human-readable form: the canonical literal, followed by a decimal
    /// approximation for non-integral rationals.
    pub fn human(&self) -> String {
        match self {
            Degree::Rational(r) if !r.is_integer() => {
                let approx = r.to_f64().unwrap_or(f64::NAN);
                format!("{self} ({})", trim_decimal(approx))
            }
            _ => self.to_string(),
        }
    }
}

fn trim_decimal(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0');
    s.trim_end_matches('.').to_string()
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::Rational(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Degree::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Degree::Element(id) => f.write_str(id),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("a chain lattice needs k >= 1")]
    EmptyChain,
    #[error("lattice has no elements")]
    NoElements,
    #[error("invalid element identifier `{0}`")]
    BadIdentifier(String),
    #[error("duplicate element `{0}`")]
    DuplicateElement(String),
    #[error("unknown element `{0}` in order relation")]
    UnknownElement(String),
    #[error("order relation is not antisymmetric: `{0}` <= `{1}` and `{1}` <= `{0}`")]
    NotAPartialOrder(String, String),
    #[error("order has no unique bottom and top element")]
    Unbounded,
    #[error("`{a}` and `{b}` have no unique {bound}")]
    NotALattice {
        a: String,
        b: String,
        bound: &'static str,
    },
    #[error("not distributive: {a} meet ({b} join {c}) != ({a} meet {b}) join ({a} meet {c})")]
    NotDistributive { a: String, b: String, c: String },
    #[error("degree `{0}` is not an element of this lattice")]
    Foreign(Degree),
    #[error("invalid degree literal `{0}`")]
    BadLiteral(String),
    #[error("degree `{0}` is not below `{1}`")]
    NotBelow(Degree, Degree),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LatticeKind {
    /// `{0, 1/k, ..., 1}`; `Chain { k: 1 }` is the two-element Boolean lattice.
    Chain { k: u32 },
    Explicit,
}

#[derive(Clone, Debug)]
struct Tables {
    leq: Vec<Vec<bool>>,
    join: Vec<Vec<usize>>,
    meet: Vec<Vec<usize>>,
    upper_covers: Vec<Vec<usize>>,
    lower_covers: Vec<Vec<usize>>,
    rank: Vec<usize>,
    bottom: usize,
    top: usize,
}

/// A finite complete distributive lattice of truth-degrees.
#[derive(Clone, Debug)]
pub struct DegreeLattice {
    kind: LatticeKind,
    elements: Vec<Degree>,
    index: HashMap<Degree, usize>,
    tables: Option<Tables>,
}

impl PartialEq for DegreeLattice {
    fn eq(&self, other: &Self) -> bool {
        match (&self.tables, &other.tables) {
            (None, None) => self.kind == other.kind,
            (Some(a), Some(b)) => self.elements == other.elements && a.leq == b.leq,
            _ => false,
        }
    }
}

impl Eq for DegreeLattice {}

impl DegreeLattice {
    /// The chain `{i/k : 0 <= i <= k}`.
    pub fn chain(k: u32) -> Result<Self, LatticeError> {
        if k == 0 {
            return Err(LatticeError::EmptyChain);
        }
        let elements: Vec<Degree> = (0..=k)
            .map(|i| Degree::Rational(Ratio::new(i64::from(i), i64::from(k))))
            .collect();
        let index = elements
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, d)| (d, i))
            .collect();
        Ok(DegreeLattice {
            kind: LatticeKind::Chain { k },
            elements,
            index,
            tables: None,
        })
    }

    /// The two-element lattice `{0, 1}` of crisp logic.
    pub fn boolean() -> Self {
        Self::chain(1).expect("k = 1 is a valid chain")
    }

    /// Validates an explicit order and builds its lattice.
    ///
    /// `order_pairs` lists `(a, b)` meaning `a <= b`; the reflexive-transitive
    /// closure is taken, so a Hasse diagram is enough.
    #[allow(clippy::needless_range_loop)]
    pub fn validate_explicit<S, P>(elements: &[S], order_pairs: &[(P, P)]) -> Result<Self, LatticeError>
    where
        S: AsRef<str>,
        P: AsRef<str>,
    {
        if elements.is_empty() {
            return Err(LatticeError::NoElements);
        }
        let mut index = HashMap::new();
        let mut degrees = Vec::with_capacity(elements.len());
        for (i, e) in elements.iter().enumerate() {
            let id = e.as_ref();
            if !is_element_id(id) {
                return Err(LatticeError::BadIdentifier(id.to_string()));
            }
            let d = Degree::Element(id.to_string());
            if index.insert(d.clone(), i).is_some() {
                return Err(LatticeError::DuplicateElement(id.to_string()));
            }
            degrees.push(d);
        }
        let n = degrees.len();
        let lookup = |id: &str| {
            index
                .get(&Degree::Element(id.to_string()))
                .copied()
                .ok_or_else(|| LatticeError::UnknownElement(id.to_string()))
        };

        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for (a, b) in order_pairs {
            leq[lookup(a.as_ref())?][lookup(b.as_ref())?] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if leq[i][k] {
                    for j in 0..n {
                        if leq[k][j] {
                            leq[i][j] = true;
                        }
                    }
                }
            }
        }
        let name = |i: usize| elements[i].as_ref().to_string();
        for i in 0..n {
            for j in (i + 1)..n {
                if leq[i][j] && leq[j][i] {
                    return Err(LatticeError::NotAPartialOrder(name(i), name(j)));
                }
            }
        }

        let bottom = (0..n).find(|&i| (0..n).all(|j| leq[i][j]));
        let top = (0..n).find(|&i| (0..n).all(|j| leq[j][i]));
        let (bottom, top) = match (bottom, top) {
            (Some(b), Some(t)) => (b, t),
            _ => return Err(LatticeError::Unbounded),
        };

        let mut join = vec![vec![0; n]; n];
        let mut meet = vec![vec![0; n]; n];
        for a in 0..n {
            for b in 0..n {
                let upper: Vec<usize> = (0..n).filter(|&c| leq[a][c] && leq[b][c]).collect();
                join[a][b] = upper
                    .iter()
                    .copied()
                    .find(|&c| upper.iter().all(|&d| leq[c][d]))
                    .ok_or_else(|| LatticeError::NotALattice {
                        a: name(a),
                        b: name(b),
                        bound: "least upper bound",
                    })?;
                let lower: Vec<usize> = (0..n).filter(|&c| leq[c][a] && leq[c][b]).collect();
                meet[a][b] = lower
                    .iter()
                    .copied()
                    .find(|&c| lower.iter().all(|&d| leq[d][c]))
                    .ok_or_else(|| LatticeError::NotALattice {
                        a: name(a),
                        b: name(b),
                        bound: "greatest lower bound",
                    })?;
            }
        }

        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let lhs = meet[a][join[b][c]];
                    let rhs = join[meet[a][b]][meet[a][c]];
                    let lhs_dual = join[a][meet[b][c]];
                    let rhs_dual = meet[join[a][b]][join[a][c]];
                    if lhs != rhs || lhs_dual != rhs_dual {
                        return Err(LatticeError::NotDistributive {
                            a: name(a),
                            b: name(b),
                            c: name(c),
                        });
                    }
                }
            }
        }

        let strictly = |i: usize, j: usize| i != j && leq[i][j];
        let mut upper_covers = vec![Vec::new(); n];
        let mut lower_covers = vec![Vec::new(); n];
        for a in 0..n {
            for b in 0..n {
                if strictly(a, b) && !(0..n).any(|c| strictly(a, c) && strictly(c, b)) {
                    upper_covers[a].push(b);
                    lower_covers[b].push(a);
                }
            }
        }

        // Linear extension: strictly larger elements have strictly larger down-sets.
        let down_size: Vec<usize> = (0..n).map(|i| (0..n).filter(|&j| leq[j][i]).count()).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| (down_size[i], i));
        let mut rank = vec![0; n];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }

        Ok(DegreeLattice {
            kind: LatticeKind::Explicit,
            elements: degrees,
            index,
            tables: Some(Tables {
                leq,
                join,
                meet,
                upper_covers,
                lower_covers,
                rank,
                bottom,
                top,
            }),
        })
    }

    pub fn kind(&self) -> &LatticeKind {
        &self.kind
    }

    /// `Some(k)` for chain lattices.
    pub fn chain_k(&self) -> Option<u32> {
        match self.kind {
            LatticeKind::Chain { k } => Some(k),
            LatticeKind::Explicit => None,
        }
    }

    pub fn is_chain(&self) -> bool {
        self.chain_k().is_some()
    }

    /// True when the order is total. Chains always are; an explicit lattice
    /// may happen to be linear too.
    pub fn is_linear(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| (0..n).all(|j| self.leq_idx(i, j) || self.leq_idx(j, i)))
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Degree] {
        &self.elements
    }

    pub fn contains(&self, d: &Degree) -> bool {
        self.index.contains_key(d)
    }

    pub fn index_of(&self, d: &Degree) -> Result<usize, LatticeError> {
        self.index
            .get(d)
            .copied()
            .ok_or_else(|| LatticeError::Foreign(d.clone()))
    }

    pub fn degree(&self, idx: usize) -> &Degree {
        &self.elements[idx]
    }

    pub fn bottom(&self) -> &Degree {
        &self.elements[self.bottom_idx()]
    }

    pub fn top(&self) -> &Degree {
        &self.elements[self.top_idx()]
    }

    pub fn bottom_idx(&self) -> usize {
        match &self.tables {
            None => 0,
            Some(t) => t.bottom,
        }
    }

    pub fn top_idx(&self) -> usize {
        match &self.tables {
            None => self.elements.len() - 1,
            Some(t) => t.top,
        }
    }

    pub fn leq_idx(&self, a: usize, b: usize) -> bool {
        match &self.tables {
            None => a <= b,
            Some(t) => t.leq[a][b],
        }
    }

    pub fn join_idx(&self, a: usize, b: usize) -> usize {
        match &self.tables {
            None => a.max(b),
            Some(t) => t.join[a][b],
        }
    }

    pub fn meet_idx(&self, a: usize, b: usize) -> usize {
        match &self.tables {
            None => a.min(b),
            Some(t) => t.meet[a][b],
        }
    }

    /// Position in a fixed linear extension of the order. Used for
    /// deterministic lexicographic orderings, never for lattice reasoning.
    pub fn rank_idx(&self, a: usize) -> usize {
        match &self.tables {
            None => a,
            Some(t) => t.rank[a],
        }
    }

    pub fn upper_covers_idx(&self, a: usize) -> Vec<usize> {
        match &self.tables {
            None if a + 1 < self.elements.len() => vec![a + 1],
            None => Vec::new(),
            Some(t) => t.upper_covers[a].clone(),
        }
    }

    pub fn lower_covers_idx(&self, a: usize) -> Vec<usize> {
        match &self.tables {
            None if a > 0 => vec![a - 1],
            None => Vec::new(),
            Some(t) => t.lower_covers[a].clone(),
        }
    }

    /// Every element `<=` the given one, in index order.
    pub fn down_set_idx(&self, a: usize) -> Vec<usize> {
        (0..self.len()).filter(|&b| self.leq_idx(b, a)).collect()
    }

    /// Every element between `lo` and `hi` inclusive, in index order.
    pub fn interval_idx(&self, lo: usize, hi: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&b| self.leq_idx(lo, b) && self.leq_idx(b, hi))
            .collect()
    }

    pub fn leq(&self, a: &Degree, b: &Degree) -> Result<bool, LatticeError> {
        Ok(self.leq_idx(self.index_of(a)?, self.index_of(b)?))
    }

    pub fn join(&self, a: &Degree, b: &Degree) -> Result<Degree, LatticeError> {
        let j = self.join_idx(self.index_of(a)?, self.index_of(b)?);
        Ok(self.elements[j].clone())
    }

    pub fn meet(&self, a: &Degree, b: &Degree) -> Result<Degree, LatticeError> {
        let m = self.meet_idx(self.index_of(a)?, self.index_of(b)?);
        Ok(self.elements[m].clone())
    }

    /// Least upper bound; `sup(∅) = 0_W`.
    pub fn sup<'a, I>(&self, degrees: I) -> Result<Degree, LatticeError>
    where
        I: IntoIterator<Item = &'a Degree>,
    {
        let mut acc = self.bottom_idx();
        for d in degrees {
            acc = self.join_idx(acc, self.index_of(d)?);
        }
        Ok(self.elements[acc].clone())
    }

    /// Greatest lower bound; `inf(∅) = 1_W`.
    pub fn inf<'a, I>(&self, degrees: I) -> Result<Degree, LatticeError>
    where
        I: IntoIterator<Item = &'a Degree>,
    {
        let mut acc = self.top_idx();
        for d in degrees {
            acc = self.meet_idx(acc, self.index_of(d)?);
        }
        Ok(self.elements[acc].clone())
    }

    /// All `b` with `a < b <= ceiling` and nothing strictly between `a` and `b`.
    pub fn covers_above(&self, a: &Degree, ceiling: &Degree) -> Result<Vec<Degree>, LatticeError> {
        let ai = self.index_of(a)?;
        let ci = self.index_of(ceiling)?;
        if !self.leq_idx(ai, ci) {
            return Err(LatticeError::NotBelow(a.clone(), ceiling.clone()));
        }
        Ok(self
            .upper_covers_idx(ai)
            .into_iter()
            .filter(|&b| self.leq_idx(b, ci))
            .map(|b| self.elements[b].clone())
            .collect())
    }

    /// Parses a degree literal: a decimal (`0.75`) or fraction (`3/4`) on a
    /// chain, a bare element identifier on an explicit lattice.
    pub fn parse_degree(&self, text: &str) -> Result<Degree, LatticeError> {
        let text = text.trim();
        let d = match self.kind {
            LatticeKind::Chain { .. } => Degree::Rational(parse_rational(text)?),
            LatticeKind::Explicit => Degree::Element(text.to_string()),
        };
        if self.contains(&d) {
            Ok(d)
        } else {
            Err(LatticeError::Foreign(d))
        }
    }
}

fn is_element_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses `0.75`, `.5`, `1`, or `3/4` into an exact rational in `[0, 1]`.
pub fn parse_rational(text: &str) -> Result<Rational, LatticeError> {
    let bad = || LatticeError::BadLiteral(text.to_string());
    let text = text.trim();
    let r = if let Some((n, d)) = text.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d <= 0 {
            return Err(bad());
        }
        Ratio::new(n, d)
    } else if let Some((int, frac)) = text.split_once('.') {
        if frac.is_empty() && int.is_empty() {
            return Err(bad());
        }
        if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        // Trailing zeros carry no value and only risk overflow.
        let frac = frac.trim_end_matches('0');
        if frac.len() > 17 {
            return Err(bad());
        }
        let int: i64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let scale = 10i64.pow(frac.len() as u32);
        let frac: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        Ratio::new(int.checked_mul(scale).ok_or_else(bad)? + frac, scale)
    } else {
        if !text.chars().all(|c| c.is_ascii_digit()) || text.is_empty() {
            return Err(bad());
        }
        Ratio::from_integer(text.parse().map_err(|_| bad())?)
    };
    if r.is_negative() || r > Rational::one() {
        return Err(bad());
    }
    Ok(r)
}
