//! Probability logic of lower envelopes.
//!
//! A probability function over the occurring atoms is a distribution over
//! their truth assignments ("worlds"). A base `u` constrains it by
//! `P(θ) >= u(θ)` for every supported `θ`; consistency is feasibility of that
//! linear program and `D(u)(φ)` is the minimum of `P(φ)` over it.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive, Zero};

use super::classical::{self, Problem};
use super::{ConsistencyVerdict, LogicError, Witness};
use crate::base::FuzzyBase;
use crate::formula::Formula;
use crate::lattice::{Degree, DegreeLattice};
use crate::simplex::{LinearProgram, LpOutcome, Relation};

/// Upper bound on atoms; the program has `2^n` columns.
pub const MAX_PROBABILITY_VARS: usize = 10;

fn to_big(r: Ratio<i64>) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

struct Program {
    problem: Problem,
    lp: LinearProgram,
}

/// Builds the constraint system for `u`; the last compiled formula of
/// `problem` is the query when one is given.
fn program(u: &FuzzyBase, query: Option<&Formula>) -> Result<Program, LogicError> {
    let problem = Problem::new(u.support().chain(query))?;
    if problem.vars.len() > MAX_PROBABILITY_VARS {
        return Err(LogicError::TooManyVariables {
            count: problem.vars.len(),
            limit: MAX_PROBABILITY_VARS,
        });
    }
    let worlds = 1usize << problem.vars.len();
    let mut lp = LinearProgram::new(worlds);
    lp.add(vec![BigRational::one(); worlds], Relation::Eq, BigRational::one());
    let mut scratch = Vec::new();
    for ((_, d), f) in u.entries().zip(&problem.premises) {
        let rhs = to_big(d.as_rational().ok_or(LogicError::WrongLogic("chain-valued"))?);
        let row = (0..worlds as u64)
            .map(|w| {
                if f.eval_bool(w, &mut scratch) {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            })
            .collect();
        lp.add(row, Relation::Ge, rhs);
    }
    Ok(Program { problem, lp })
}

fn distribution(problem: &Problem, point: &[BigRational]) -> Witness {
    Witness::Distribution(
        point
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(w, p)| (problem.valuation(w as u64), p.clone()))
            .collect(),
    )
}

pub(super) fn consistent(u: &FuzzyBase) -> Result<ConsistencyVerdict, LogicError> {
    // A point mass on a classical model meets every lower bound.
    if let Some(v) = classical::find_model(u.support())? {
        return Ok(ConsistencyVerdict::consistent(Witness::Distribution(vec![(
            v,
            BigRational::one(),
        )])));
    }
    let prog = program(u, None)?;
    Ok(match prog.lp.feasible_point() {
        Some(point) => ConsistencyVerdict::consistent(distribution(&prog.problem, &point)),
        None => ConsistencyVerdict::inconsistent(),
    })
}

pub(super) fn lower_envelope(u: &FuzzyBase, phi: &Formula) -> Result<Option<BigRational>, LogicError> {
    let prog = program(u, Some(phi))?;
    let query = prog.problem.premises.last().expect("query is compiled last");
    let mut scratch = Vec::new();
    let objective: Vec<BigRational> = (0..prog.lp.num_vars() as u64)
        .map(|w| {
            if query.eval_bool(w, &mut scratch) {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        })
        .collect();
    Ok(match prog.lp.minimize(&objective) {
        LpOutcome::Optimal { value, .. } => Some(value),
        LpOutcome::Infeasible => None,
        LpOutcome::Unbounded => unreachable!("probabilities are bounded"),
    })
}

/// The lower envelope rounded down onto the chain.
pub(super) fn deduce(lattice: &DegreeLattice, u: &FuzzyBase, phi: &Formula) -> Result<Degree, LogicError> {
    let k = lattice.chain_k().ok_or(LogicError::WrongLogic("chain-valued"))?;
    let Some(value) = lower_envelope(u, phi)? else {
        return Ok(lattice.top().clone());
    };
    let steps = (value * BigRational::from_integer(BigInt::from(k)))
        .floor()
        .to_integer()
        .to_usize()
        .expect("probability in [0, 1]");
    Ok(lattice.degree(steps).clone())
}
