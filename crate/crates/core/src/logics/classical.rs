//! Truth-table decision procedures for classical propositional logic.

use std::collections::{BTreeMap, BTreeSet};

use super::LogicError;
use crate::formula::{CompiledFormula, Formula};

/// Above this many atoms truth-table enumeration is refused.
pub const MAX_CLASSICAL_VARS: usize = 24;

/// Premises and an optional conclusion compiled over a shared variable list.
pub(crate) struct Problem {
    pub vars: Vec<String>,
    pub premises: Vec<CompiledFormula>,
}

impl Problem {
    pub fn new<'a, I>(formulas: I) -> Result<Self, LogicError>
    where
        I: IntoIterator<Item = &'a Formula>,
    {
        let formulas: Vec<&Formula> = formulas.into_iter().collect();
        let vars = collect_vars(formulas.iter().copied());
        if vars.len() > MAX_CLASSICAL_VARS {
            return Err(LogicError::TooManyVariables {
                count: vars.len(),
                limit: MAX_CLASSICAL_VARS,
            });
        }
        let premises = formulas
            .iter()
            .map(|f| CompiledFormula::new(f, &vars))
            .collect();
        Ok(Problem { vars, premises })
    }

    pub fn assignments(&self) -> impl Iterator<Item = u64> {
        0..(1u64 << self.vars.len())
    }

    pub fn valuation(&self, assignment: u64) -> BTreeMap<String, bool> {
        self.vars
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), assignment >> i & 1 == 1))
            .collect()
    }
}

pub(crate) fn collect_vars<'a, I>(formulas: I) -> Vec<String>
where
    I: IntoIterator<Item = &'a Formula>,
{
    let mut set = BTreeSet::new();
    for f in formulas {
        set.extend(f.variables());
    }
    set.into_iter().collect()
}

/// A classical valuation satisfying every premise, if one exists.
pub fn find_model<'a, I>(premises: I) -> Result<Option<BTreeMap<String, bool>>, LogicError>
where
    I: IntoIterator<Item = &'a Formula>,
{
    let problem = Problem::new(premises)?;
    let mut scratch = Vec::new();
    for a in problem.assignments() {
        if problem.premises.iter().all(|f| f.eval_bool(a, &mut scratch)) {
            return Ok(Some(problem.valuation(a)));
        }
    }
    Ok(None)
}

pub fn satisfiable<'a, I>(premises: I) -> Result<bool, LogicError>
where
    I: IntoIterator<Item = &'a Formula>,
{
    Ok(find_model(premises)?.is_some())
}

/// `premises ⊨ conclusion`.
pub fn entails<'a, I>(premises: I, conclusion: &Formula) -> Result<bool, LogicError>
where
    I: IntoIterator<Item = &'a Formula>,
{
    let mut all: Vec<&Formula> = premises.into_iter().collect();
    let n = all.len();
    all.push(conclusion);
    let problem = Problem::new(all)?;
    let (premises, conclusion) = problem.premises.split_at(n);
    let conclusion = &conclusion[0];
    let mut scratch = Vec::new();
    for a in problem.assignments() {
        if premises.iter().all(|f| f.eval_bool(a, &mut scratch)) && !conclusion.eval_bool(a, &mut scratch) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn tautology(f: &Formula) -> Result<bool, LogicError> {
    entails(std::iter::empty(), f)
}
