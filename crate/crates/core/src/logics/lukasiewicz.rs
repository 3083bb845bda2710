//! Finitely-valued Łukasiewicz logic on `chain(k)`: models are all grid
//! valuations of the occurring atoms.

use std::collections::BTreeMap;

use super::classical::{self, collect_vars};
use super::{ConsistencyVerdict, LogicError, Witness};
use crate::base::FuzzyBase;
use crate::formula::{CompiledFormula, Formula};
use crate::lattice::{Degree, DegreeLattice};

/// Refuse to enumerate more grid valuations than this.
pub const MAX_GRID_VALUATIONS: u64 = 50_000_000;

struct Grid {
    vars: Vec<String>,
    k: u32,
    /// Support formulas with their thresholds (numerators over `k`).
    premises: Vec<(CompiledFormula, u32)>,
}

impl Grid {
    fn new(lattice: &DegreeLattice, u: &FuzzyBase, extra: Option<&Formula>) -> Result<Self, LogicError> {
        let k = lattice.chain_k().ok_or(LogicError::WrongLogic("chain-valued"))?;
        let vars = collect_vars(u.support().chain(extra));
        let count = u64::from(k + 1)
            .checked_pow(vars.len() as u32)
            .filter(|&c| c <= MAX_GRID_VALUATIONS);
        if count.is_none() {
            return Err(LogicError::TooManyVariables {
                count: vars.len(),
                limit: (MAX_GRID_VALUATIONS as f64).log(f64::from(k + 1)) as usize,
            });
        }
        let mut premises = Vec::with_capacity(u.len());
        for (f, d) in u.entries() {
            premises.push((CompiledFormula::new(f, &vars), lattice.index_of(d)? as u32));
        }
        Ok(Grid { vars, k, premises })
    }

    /// Calls `visit` on every grid model of the premises until it returns false.
    fn for_each_model(&self, mut visit: impl FnMut(&[u32]) -> bool) {
        let n = self.vars.len();
        let mut steps = vec![0u32; n];
        let mut scratch = Vec::new();
        loop {
            if self
                .premises
                .iter()
                .all(|(f, t)| f.eval_grid(&steps, self.k, &mut scratch) >= *t)
                && !visit(&steps)
            {
                return;
            }
            // Odometer increment.
            let mut i = 0;
            loop {
                if i == n {
                    return;
                }
                if steps[i] < self.k {
                    steps[i] += 1;
                    break;
                }
                steps[i] = 0;
                i += 1;
            }
        }
    }

    fn witness(&self, lattice: &DegreeLattice, steps: &[u32]) -> Witness {
        Witness::GradedValuation(
            self.vars
                .iter()
                .zip(steps)
                .map(|(v, &s)| (v.clone(), lattice.degree(s as usize).clone()))
                .collect(),
        )
    }
}

pub(super) fn consistent(lattice: &DegreeLattice, u: &FuzzyBase) -> Result<ConsistencyVerdict, LogicError> {
    // A classical model is a {0,1}-valued Łukasiewicz model giving every
    // support formula the value 1.
    if let Some(v) = classical::find_model(u.support())? {
        let graded: BTreeMap<String, Degree> = v
            .into_iter()
            .map(|(k, b)| (k, if b { lattice.top().clone() } else { lattice.bottom().clone() }))
            .collect();
        return Ok(ConsistencyVerdict::consistent(Witness::GradedValuation(graded)));
    }
    let grid = Grid::new(lattice, u, None)?;
    let mut found = None;
    grid.for_each_model(|steps| {
        found = Some(steps.to_vec());
        false
    });
    Ok(match found {
        Some(steps) => ConsistencyVerdict::consistent(grid.witness(lattice, &steps)),
        None => ConsistencyVerdict::inconsistent(),
    })
}

pub(super) fn deduce(lattice: &DegreeLattice, u: &FuzzyBase, phi: &Formula) -> Result<Degree, LogicError> {
    let grid = Grid::new(lattice, u, Some(phi))?;
    let query = CompiledFormula::new(phi, &grid.vars);
    let mut scratch = Vec::new();
    let mut best: Option<u32> = None;
    grid.for_each_model(|steps| {
        let v = query.eval_grid(steps, grid.k, &mut scratch);
        best = Some(best.map_or(v, |b| b.min(v)));
        v > 0
    });
    Ok(match best {
        Some(v) => lattice.degree(v as usize).clone(),
        None => lattice.top().clone(),
    })
}
