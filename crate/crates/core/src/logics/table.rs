//! Table semantics: an explicit list of models over a finite universe.
//!
//! Formulas in the universe are opaque items; no connective is interpreted.
//! `D(u)(φ)` is the meet of `m(φ)` over the listed models `m ⊒ u`.
//!
//! File format:
//!
//! ```text
//! elements: 00 01 10 11        # explicit lattice (or `chain: <k>`)
//! order: 00<01, 00<10, 01<11, 10<11
//! universe: p, q, p -> q
//! m: p=01, q=11, p -> q=11
//! m: p=10, q=00, p -> q=10
//! ```
//!
//! Without `elements:`/`chain:` lines the lattice is the coarsest chain that
//! contains every degree used by the models.

use std::collections::HashMap;
use std::sync::Arc;

use num_integer::Integer;

use super::{ConsistencyVerdict, LogicError, Witness};
use crate::base::{strip_comment, FuzzyBase};
use crate::formula::Formula;
use crate::lattice::{parse_rational, Degree, DegreeLattice};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableSemantics {
    lattice: Arc<DegreeLattice>,
    universe: Vec<Formula>,
    /// Degree indices, one row per model, one column per universe item.
    models: Vec<Vec<usize>>,
}

impl TableSemantics {
    pub fn new(
        lattice: Arc<DegreeLattice>,
        universe: Vec<Formula>,
        models: Vec<Vec<Degree>>,
    ) -> Result<Self, LogicError> {
        let bad = |m: String| Err(LogicError::Table(m));
        if universe.is_empty() {
            return bad("empty universe".into());
        }
        for (i, f) in universe.iter().enumerate() {
            if universe[..i].contains(f) {
                return bad(format!("`{f}` listed twice in the universe"));
            }
        }
        if models.is_empty() {
            return bad("no models".into());
        }
        let mut rows = Vec::with_capacity(models.len());
        for (i, m) in models.iter().enumerate() {
            if m.len() != universe.len() {
                return bad(format!("model #{i} does not cover the universe"));
            }
            let row = m
                .iter()
                .map(|d| lattice.index_of(d))
                .collect::<Result<Vec<_>, _>>()?;
            if row.iter().all(|&d| d == lattice.top_idx()) {
                return bad(format!("model #{i} assigns the top degree everywhere"));
            }
            rows.push(row);
        }
        Ok(TableSemantics {
            lattice,
            universe,
            models: rows,
        })
    }

    pub fn lattice(&self) -> &Arc<DegreeLattice> {
        &self.lattice
    }

    pub fn universe(&self) -> &[Formula] {
        &self.universe
    }

    pub fn model_count(&self) -> usize {
        self.models.len()
    }

    /// Model `i` as a base.
    pub fn model(&self, i: usize) -> FuzzyBase {
        let entries = self
            .universe
            .iter()
            .cloned()
            .zip(self.models[i].iter().map(|&d| self.lattice.degree(d).clone()));
        FuzzyBase::from_entries(self.lattice.clone(), entries).expect("validated degrees")
    }

    fn position(&self, f: &Formula) -> Result<usize, LogicError> {
        self.universe
            .iter()
            .position(|g| g == f)
            .ok_or_else(|| LogicError::OutsideUniverse(f.clone()))
    }

    fn constraints(&self, u: &FuzzyBase) -> Result<Vec<(usize, usize)>, LogicError> {
        u.entries()
            .map(|(f, d)| Ok((self.position(f)?, self.lattice.index_of(d)?)))
            .collect()
    }

    fn models_of<'a>(&'a self, cons: &'a [(usize, usize)]) -> impl Iterator<Item = (usize, &'a Vec<usize>)> + 'a {
        self.models
            .iter()
            .enumerate()
            .filter(move |(_, m)| cons.iter().all(|&(pos, d)| self.lattice.leq_idx(d, m[pos])))
    }

    pub(super) fn consistent(&self, u: &FuzzyBase) -> Result<ConsistencyVerdict, LogicError> {
        let cons = self.constraints(u)?;
        let first = self.models_of(&cons).next().map(|(i, _)| i);
        Ok(match first {
            Some(i) => ConsistencyVerdict::consistent(Witness::Model(i)),
            None => ConsistencyVerdict::inconsistent(),
        })
    }

    pub(super) fn deduce(&self, u: &FuzzyBase, phi: &Formula) -> Result<Degree, LogicError> {
        let cons = self.constraints(u)?;
        let pos = self.position(phi)?;
        let value = self
            .models_of(&cons)
            .fold(self.lattice.top_idx(), |acc, (_, m)| self.lattice.meet_idx(acc, m[pos]));
        Ok(self.lattice.degree(value).clone())
    }

    /// Parses the table file format described in the module docs.
    pub fn parse(text: &str) -> Result<Self, LogicError> {
        let err = |line: usize, msg: &str| LogicError::Table(format!("line {line}: {msg}"));
        let mut elements: Option<(usize, Vec<String>)> = None;
        let mut order: Vec<(String, String)> = Vec::new();
        let mut chain: Option<u32> = None;
        let mut universe: Option<Vec<Formula>> = None;
        let mut raw_models: Vec<(usize, Vec<(Formula, String)>)> = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| err(line_no, "expected `<key>: <value>`"))?;
            let value = value.trim();
            match key.trim() {
                "elements" => {
                    let ids = value
                        .split(|c: char| c == ',' || c.is_whitespace())
                        .filter(|s| !s.is_empty())
                        .map(str::to_string)
                        .collect();
                    elements = Some((line_no, ids));
                }
                "order" => {
                    for pair in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                        let (a, b) = pair
                            .split_once("<=")
                            .or_else(|| pair.split_once('<'))
                            .ok_or_else(|| err(line_no, "expected `a<b` pairs"))?;
                        order.push((a.trim().to_string(), b.trim().to_string()));
                    }
                }
                "chain" => {
                    let k = value
                        .parse()
                        .map_err(|_| err(line_no, "expected `chain: <k>`"))?;
                    chain = Some(k);
                }
                "universe" => {
                    let fs = value
                        .split(',')
                        .map(|s| Formula::parse(s).map_err(|e| err(line_no, &e.to_string())))
                        .collect::<Result<Vec<_>, _>>()?;
                    universe = Some(fs);
                }
                "m" => {
                    let mut assigns = Vec::new();
                    for part in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                        let (f, d) = part
                            .rsplit_once('=')
                            .ok_or_else(|| err(line_no, "expected `formula=degree`"))?;
                        let f = Formula::parse(f).map_err(|e| err(line_no, &e.to_string()))?;
                        assigns.push((f, d.trim().to_string()));
                    }
                    raw_models.push((line_no, assigns));
                }
                other => return Err(err(line_no, &format!("unknown key `{other}`"))),
            }
        }

        let lattice = match (elements, chain) {
            (Some(_), Some(_)) => return Err(LogicError::Table("both `elements` and `chain` given".into())),
            (Some((_, ids)), None) => DegreeLattice::validate_explicit(&ids, &order)?,
            (None, Some(k)) => DegreeLattice::chain(k)?,
            (None, None) => {
                let mut k: i64 = 1;
                for (line_no, assigns) in &raw_models {
                    for (_, d) in assigns {
                        let r = parse_rational(d).map_err(|e| err(*line_no, &e.to_string()))?;
                        k = k.lcm(r.denom());
                    }
                }
                let k = u32::try_from(k).map_err(|_| LogicError::Table("degree denominators too large".into()))?;
                DegreeLattice::chain(k)?
            }
        };
        let universe = universe.ok_or_else(|| LogicError::Table("missing `universe:` line".into()))?;
        let mut models = Vec::with_capacity(raw_models.len());
        for (line_no, assigns) in raw_models {
            let mut row: Vec<Option<Degree>> = vec![None; universe.len()];
            let index: HashMap<&Formula, usize> = universe.iter().enumerate().map(|(i, f)| (f, i)).collect();
            for (f, d) in assigns {
                let pos = *index
                    .get(&f)
                    .ok_or_else(|| err(line_no, &format!("`{f}` is not in the universe")))?;
                let d = lattice.parse_degree(&d).map_err(|e| err(line_no, &e.to_string()))?;
                row[pos] = Some(d);
            }
            let row = row
                .into_iter()
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| err(line_no, "model does not cover the universe"))?;
            models.push(row);
        }
        TableSemantics::new(Arc::new(lattice), universe, models)
    }
}
