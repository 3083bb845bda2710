//! Deduction systems: the operator `D`, queried pointwise, plus consistency.
//!
//! Five instances share one interface:
//!
//! * `Crisp`: classical consequence on `{0, 1}`.
//! * `Lukasiewicz`: the finitely-valued Łukasiewicz logic on `chain(k)`,
//!   semantics = all grid valuations.
//! * `Necessity`: possibilistic logic; consistency is classical consistency
//!   of the support, deduction is the best cut entailing the query.
//! * `Probability`: lower envelopes of probability functions, computed by an
//!   exact rational linear program.
//! * `Table`: an explicit finite list of models over a finite universe of
//!   formulas, on any finite distributive lattice.
//!
//! An inconsistent base deduces `1_W` for every formula.

pub mod classical;
mod lukasiewicz;
mod necessity;
mod probability;
mod table;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::BigRational;
use thiserror::Error;

use crate::base::{BaseError, FuzzyBase, GradedFormula};
use crate::formula::Formula;
use crate::lattice::{Degree, DegreeLattice, LatticeError};

pub use lukasiewicz::MAX_GRID_VALUATIONS;
pub use probability::MAX_PROBABILITY_VARS;
pub use table::TableSemantics;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("base is over a different degree lattice than the logic")]
    LatticeMismatch,
    #[error("formula `{0}` is outside the table universe")]
    OutsideUniverse(Formula),
    #[error("{count} variables exceed the enumeration limit of {limit}")]
    TooManyVariables { count: usize, limit: usize },
    #[error("operation needs the {0} logic")]
    WrongLogic(&'static str),
    #[error("invalid table: {0}")]
    Table(String),
    #[error("invalid logic selector `{0}`")]
    Selector(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Base(#[from] BaseError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Logic {
    Crisp,
    Lukasiewicz,
    Necessity,
    Probability,
    Table(TableSemantics),
}

/// Evidence that a base is consistent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Valuation(BTreeMap<String, bool>),
    GradedValuation(BTreeMap<String, Degree>),
    /// Truth assignments carrying positive probability mass.
    Distribution(Vec<(BTreeMap<String, bool>, BigRational)>),
    Model(usize),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn world(v: &BTreeMap<String, bool>) -> String {
            v.iter()
                .map(|(k, b)| format!("{k}={}", u8::from(*b)))
                .collect::<Vec<_>>()
                .join(" ")
        }
        match self {
            Witness::Valuation(v) => f.write_str(&world(v)),
            Witness::GradedValuation(v) => {
                let parts: Vec<String> = v.iter().map(|(k, d)| format!("{k}={d}")).collect();
                f.write_str(&parts.join(" "))
            }
            Witness::Distribution(ws) => {
                let parts: Vec<String> = ws
                    .iter()
                    .map(|(v, p)| format!("[{}]:{}", world(v), p))
                    .collect();
                f.write_str(&parts.join(" "))
            }
            Witness::Model(i) => write!(f, "model #{i}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConsistencyVerdict {
    pub consistent: bool,
    pub witness: Option<Witness>,
}

impl ConsistencyVerdict {
    fn consistent(witness: Witness) -> Self {
        ConsistencyVerdict {
            consistent: true,
            witness: Some(witness),
        }
    }

    fn inconsistent() -> Self {
        ConsistencyVerdict {
            consistent: false,
            witness: None,
        }
    }
}

/// A degree lattice paired with a deduction operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeductionSystem {
    lattice: Arc<DegreeLattice>,
    logic: Logic,
}

impl DeductionSystem {
    pub fn crisp() -> Self {
        DeductionSystem {
            lattice: Arc::new(DegreeLattice::boolean()),
            logic: Logic::Crisp,
        }
    }

    pub fn lukasiewicz(k: u32) -> Result<Self, LogicError> {
        Ok(DeductionSystem {
            lattice: Arc::new(DegreeLattice::chain(k)?),
            logic: Logic::Lukasiewicz,
        })
    }

    pub fn necessity(k: u32) -> Result<Self, LogicError> {
        Ok(DeductionSystem {
            lattice: Arc::new(DegreeLattice::chain(k)?),
            logic: Logic::Necessity,
        })
    }

    pub fn probability(k: u32) -> Result<Self, LogicError> {
        Ok(DeductionSystem {
            lattice: Arc::new(DegreeLattice::chain(k)?),
            logic: Logic::Probability,
        })
    }

    pub fn table(semantics: TableSemantics) -> Self {
        DeductionSystem {
            lattice: semantics.lattice().clone(),
            logic: Logic::Table(semantics),
        }
    }

    pub fn lattice(&self) -> &Arc<DegreeLattice> {
        &self.lattice
    }

    pub fn logic(&self) -> &Logic {
        &self.logic
    }

    /// Selector-style name, e.g. `luk:k=4`.
    pub fn name(&self) -> String {
        let k = self.lattice.chain_k().unwrap_or(0);
        match &self.logic {
            Logic::Crisp => "crisp".into(),
            Logic::Lukasiewicz => format!("luk:k={k}"),
            Logic::Necessity => format!("nec:k={k}"),
            Logic::Probability => format!("prob:k={k}"),
            Logic::Table(_) => "table".into(),
        }
    }

    pub fn empty_base(&self) -> FuzzyBase {
        FuzzyBase::empty(self.lattice.clone())
    }

    pub fn parse_base(&self, text: &str) -> Result<FuzzyBase, BaseError> {
        FuzzyBase::parse(text, self.lattice.clone())
    }

    pub fn parse_input(&self, text: &str) -> Result<GradedFormula, BaseError> {
        GradedFormula::parse(text, &self.lattice)
    }

    fn check(&self, u: &FuzzyBase) -> Result<(), LogicError> {
        if Arc::ptr_eq(u.lattice(), &self.lattice) || **u.lattice() == *self.lattice {
            Ok(())
        } else {
            Err(LogicError::LatticeMismatch)
        }
    }

    fn check_degree(&self, d: &Degree) -> Result<(), LogicError> {
        self.lattice.index_of(d)?;
        Ok(())
    }

    pub fn consistent(&self, u: &FuzzyBase) -> Result<ConsistencyVerdict, LogicError> {
        self.check(u)?;
        match &self.logic {
            Logic::Crisp | Logic::Necessity => Ok(match classical::find_model(u.support())? {
                Some(v) => ConsistencyVerdict::consistent(Witness::Valuation(v)),
                None => ConsistencyVerdict::inconsistent(),
            }),
            Logic::Lukasiewicz => lukasiewicz::consistent(&self.lattice, u),
            Logic::Probability => probability::consistent(u),
            Logic::Table(t) => t.consistent(u),
        }
    }

    pub fn is_consistent(&self, u: &FuzzyBase) -> Result<bool, LogicError> {
        Ok(self.consistent(u)?.consistent)
    }

    /// Whether `(φ/a)` on its own is consistent.
    pub fn input_consistent(&self, g: &GradedFormula) -> Result<bool, LogicError> {
        let u = FuzzyBase::from_graded(self.lattice.clone(), g)?;
        self.is_consistent(&u)
    }

    /// `D(u)(φ)`.
    pub fn deduce(&self, u: &FuzzyBase, phi: &Formula) -> Result<Degree, LogicError> {
        self.check(u)?;
        let top = self.lattice.top().clone();
        match &self.logic {
            Logic::Crisp => {
                if !classical::satisfiable(u.support())? || classical::entails(u.support(), phi)? {
                    Ok(top)
                } else {
                    Ok(self.lattice.bottom().clone())
                }
            }
            Logic::Lukasiewicz => lukasiewicz::deduce(&self.lattice, u, phi),
            Logic::Necessity => necessity::deduce(&self.lattice, u, phi),
            Logic::Probability => probability::deduce(&self.lattice, u, phi),
            Logic::Table(t) => t.deduce(u, phi),
        }
    }

    /// The exact lower envelope `min p(φ)` over probability functions
    /// dominating `u`, or `None` when `u` is inconsistent. `deduce` rounds
    /// this down onto the chain.
    pub fn lower_envelope(&self, u: &FuzzyBase, phi: &Formula) -> Result<Option<BigRational>, LogicError> {
        self.check(u)?;
        match self.logic {
            Logic::Probability => probability::lower_envelope(u, phi),
            _ => Err(LogicError::WrongLogic("probability")),
        }
    }

    /// The Łukasiewicz test `D(u)(¬φ) > 1 − a`, which predicts
    /// inconsistency of `u ⊔ (φ/a)`.
    pub fn luk_inconsistency_criterion(&self, u: &FuzzyBase, g: &GradedFormula) -> Result<bool, LogicError> {
        if self.logic != Logic::Lukasiewicz {
            return Err(LogicError::WrongLogic("Łukasiewicz"));
        }
        self.check_degree(&g.degree)?;
        let neg = Formula::not(g.formula.clone());
        let d = self.deduce(u, &neg)?;
        let a = g.degree.as_rational().expect("chain degree");
        let d = d.as_rational().expect("chain degree");
        Ok(d > num_rational::Ratio::from_integer(1) - a)
    }
}

/// Parsed `--logic` selector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LogicSelector {
    Crisp,
    Lukasiewicz { k: u32 },
    /// `k = None` lets the caller pick a chain fine enough for its degrees.
    Necessity { k: Option<u32> },
    Probability { k: Option<u32> },
    Table { path: String },
}

impl FromStr for LogicSelector {
    type Err = LogicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || LogicError::Selector(s.to_string());
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        let parse_k = |rest: Option<&str>| -> Result<Option<u32>, LogicError> {
            match rest {
                None => Ok(None),
                Some(r) => {
                    let k = r.strip_prefix("k=").ok_or_else(bad)?;
                    let k: u32 = k.parse().map_err(|_| bad())?;
                    if k == 0 {
                        return Err(bad());
                    }
                    Ok(Some(k))
                }
            }
        };
        match head {
            "crisp" if rest.is_none() => Ok(LogicSelector::Crisp),
            "luk" => Ok(LogicSelector::Lukasiewicz {
                k: parse_k(rest)?.ok_or_else(bad)?,
            }),
            "nec" => Ok(LogicSelector::Necessity { k: parse_k(rest)? }),
            "prob" => Ok(LogicSelector::Probability { k: parse_k(rest)? }),
            "table" => match rest {
                Some(p) if !p.is_empty() => Ok(LogicSelector::Table { path: p.to_string() }),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }
}

impl LogicSelector {
    /// Builds the deduction system. An unspecified chain `k` is the least
    /// common denominator of the rational `degrees` (1 when there are none);
    /// literals that are not rationals are ignored here. `load` reads a table
    /// file.
    pub fn build<'a, I, L>(&self, degrees: I, load: L) -> Result<DeductionSystem, LogicError>
    where
        I: IntoIterator<Item = &'a str>,
        L: FnOnce(&str) -> Result<String, String>,
    {
        let fitted = |degrees: I| -> Result<u32, LogicError> {
            let mut k: i64 = 1;
            for d in degrees {
                if let Ok(r) = crate::lattice::parse_rational(d.trim()) {
                    k = num_integer::Integer::lcm(&k, r.denom());
                }
            }
            u32::try_from(k).map_err(|_| LogicError::Selector(format!("chain of {k} steps is too large")))
        };
        match self {
            LogicSelector::Crisp => Ok(DeductionSystem::crisp()),
            LogicSelector::Lukasiewicz { k } => DeductionSystem::lukasiewicz(*k),
            LogicSelector::Necessity { k } => DeductionSystem::necessity(match k {
                Some(k) => *k,
                None => fitted(degrees)?,
            }),
            LogicSelector::Probability { k } => DeductionSystem::probability(match k {
                Some(k) => *k,
                None => fitted(degrees)?,
            }),
            LogicSelector::Table { path } => {
                let text = load(path).map_err(|e| LogicError::Table(format!("{path}: {e}")))?;
                Ok(DeductionSystem::table(TableSemantics::parse(&text)?))
            }
        }
    }
}

/// Degree literals of a base file: the text after the last `:` of each entry
/// line.
pub fn degree_literals(text: &str) -> impl Iterator<Item = &str> {
    text.lines().filter_map(|line| {
        let line = crate::base::strip_comment(line);
        line.rsplit_once(':').map(|(_, d)| d.trim())
    })
}
