//! Dense two-phase simplex over exact rationals with Bland's rule.
//!
//! Sized for the small programs produced by probabilistic entailment (one
//! variable per truth assignment of a handful of atoms). Every variable is
//! implicitly non-negative.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<BigRational>,
    pub relation: Relation,
    pub rhs: BigRational,
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    num_vars: usize,
    constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal {
        value: BigRational,
        point: Vec<BigRational>,
    },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn add(&mut self, coeffs: Vec<BigRational>, relation: Relation, rhs: BigRational) {
        assert_eq!(coeffs.len(), self.num_vars, "coefficient row has wrong width");
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    /// A feasible point, if any.
    pub fn feasible_point(&self) -> Option<Vec<BigRational>> {
        let zero = vec![BigRational::zero(); self.num_vars];
        match self.minimize(&zero) {
            LpOutcome::Optimal { point, .. } => Some(point),
            _ => None,
        }
    }

    pub fn minimize(&self, objective: &[BigRational]) -> LpOutcome {
        assert_eq!(objective.len(), self.num_vars, "objective has wrong width");
        Tableau::build(self).solve(objective)
    }
}

struct Tableau {
    /// Rows of `[coefficients..., rhs]`.
    rows: Vec<Vec<BigRational>>,
    basis: Vec<usize>,
    num_vars: usize,
    /// First artificial column; artificials occupy the tail.
    first_artificial: usize,
    width: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.constraints.len();
        let num_slack = lp
            .constraints
            .iter()
            .filter(|c| c.relation != Relation::Eq)
            .count();
        let first_artificial = lp.num_vars + num_slack;
        let width = first_artificial + m;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut slack = lp.num_vars;
        for (i, c) in lp.constraints.iter().enumerate() {
            let mut row = vec![BigRational::zero(); width + 1];
            row[..lp.num_vars].clone_from_slice(&c.coeffs);
            match c.relation {
                Relation::Le => {
                    row[slack] = BigRational::one();
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -BigRational::one();
                    slack += 1;
                }
                Relation::Eq => {}
            }
            row[width] = c.rhs.clone();
            if row[width].is_negative() {
                for v in row.iter_mut() {
                    *v = -v.clone();
                }
            }
            row[first_artificial + i] = BigRational::one();
            basis.push(first_artificial + i);
            rows.push(row);
        }
        Tableau {
            rows,
            basis,
            num_vars: lp.num_vars,
            first_artificial,
            width,
        }
    }

    fn solve(mut self, objective: &[BigRational]) -> LpOutcome {
        // Phase 1: drive the artificials to zero.
        let mut phase1 = vec![BigRational::zero(); self.width];
        for c in phase1.iter_mut().skip(self.first_artificial) {
            *c = BigRational::one();
        }
        if !self.optimize(&phase1, self.width) {
            unreachable!("phase 1 is bounded below by zero");
        }
        if !self.objective_value(&phase1).is_zero() {
            return LpOutcome::Infeasible;
        }
        self.evict_artificials();

        let mut phase2 = vec![BigRational::zero(); self.width];
        phase2[..self.num_vars].clone_from_slice(objective);
        if !self.optimize(&phase2, self.first_artificial) {
            return LpOutcome::Unbounded;
        }
        let mut point = vec![BigRational::zero(); self.num_vars];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < self.num_vars {
                point[b] = row[self.width].clone();
            }
        }
        LpOutcome::Optimal {
            value: self.objective_value(&phase2),
            point,
        }
    }

    fn objective_value(&self, cost: &[BigRational]) -> BigRational {
        self.rows
            .iter()
            .zip(&self.basis)
            .fold(BigRational::zero(), |acc, (row, &b)| acc + &cost[b] * &row[self.width])
    }

    /// Runs simplex iterations over columns `< allowed`. Returns false when
    /// the objective is unbounded.
    fn optimize(&mut self, cost: &[BigRational], allowed: usize) -> bool {
        loop {
            // Bland: lowest-index column with negative reduced cost enters.
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let reduced = self
                    .rows
                    .iter()
                    .zip(&self.basis)
                    .fold(cost[j].clone(), |acc, (row, &b)| acc - &cost[b] * &row[j]);
                reduced.is_negative()
            });
            let Some(col) = entering else {
                return true;
            };
            // Minimum ratio; ties go to the lowest-index basic variable.
            let mut leave: Option<(usize, BigRational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[col].is_positive() {
                    let ratio = &row[self.width] / &row[col];
                    let better = match &leave {
                        None => true,
                        Some((li, best)) => {
                            ratio < *best || (ratio == *best && self.basis[i] < self.basis[*li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((row, _)) = leave else {
                return false;
            };
            self.pivot(row, col);
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col].clone();
        for v in self.rows[row].iter_mut() {
            *v = &*v / &p;
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let factor = r[col].clone();
            for (v, pv) in r.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        }
        self.basis[row] = col;
    }

    /// After a zero-cost phase 1, pivots remaining (zero-valued) artificials
    /// out of the basis, dropping rows that turn out to be redundant.
    fn evict_artificials(&mut self) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= self.first_artificial {
                match (0..self.first_artificial).find(|&j| !self.rows[i][j].is_zero()) {
                    Some(j) => self.pivot(i, j),
                    None => {
                        self.rows.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }
}

/// `n/d` as a big rational.
pub fn big(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
