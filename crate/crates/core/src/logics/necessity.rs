//! Necessity (possibilistic) logic on a chain.

use super::classical;
use super::LogicError;
use crate::base::FuzzyBase;
use crate::formula::Formula;
use crate::lattice::{Degree, DegreeLattice};

/// Largest degree `a` of `u` whose cut `{θ : a <= u(θ)}` classically entails
/// `φ`, or `0` if none does. Tautologies and inconsistent bases give `1`.
pub(super) fn deduce(lattice: &DegreeLattice, u: &FuzzyBase, phi: &Formula) -> Result<Degree, LogicError> {
    if !classical::satisfiable(u.support())? || classical::tautology(phi)? {
        return Ok(lattice.top().clone());
    }
    let mut levels: Vec<usize> = u
        .entries()
        .map(|(_, d)| lattice.index_of(d))
        .collect::<Result<_, _>>()?;
    levels.sort_unstable();
    levels.dedup();
    for &level in levels.iter().rev() {
        let cut = u
            .entries()
            .filter(|(_, d)| lattice.index_of(d).is_ok_and(|i| lattice.leq_idx(level, i)))
            .map(|(f, _)| f);
        if classical::entails(cut, phi)? {
            return Ok(lattice.degree(level).clone());
        }
    }
    Ok(lattice.bottom().clone())
}
