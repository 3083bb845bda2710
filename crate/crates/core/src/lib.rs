//! Partial meet revision of fuzzy belief bases.
//!
//! A fuzzy belief base assigns truth-degrees from a finite distributive
//! lattice to propositional formulas, each read as a lower bound. Revising a
//! base by a graded formula `(φ/a)` keeps the maximal sub-bases consistent
//! with the input (the remainder set), lets a selection strategy pick some of
//! them, takes their meet and joins the input on top.
//!
//! * [`lattice`]: degree lattices (rational chains and explicit lattices).
//! * [`formula`]: propositional syntax and evaluation.
//! * [`base`]: fuzzy bases and their order, join and meet.
//! * [`logics`]: deduction systems: crisp, Łukasiewicz, necessity,
//!   probability and table semantics.
//! * [`revision`]: remainder sets, selection strategies, revision.
//! * [`postulates`]: conformance checks for the revision postulates and
//!   selection extraction.

pub mod base;
pub mod formula;
pub mod lattice;
pub mod logics;
pub mod postulates;
pub mod revision;
pub mod simplex;

pub use base::{BaseError, FuzzyBase, GradedFormula};
pub use formula::Formula;
pub use lattice::{Degree, DegreeLattice};
pub use logics::{DeductionSystem, LogicError};
