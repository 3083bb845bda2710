//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Values are compared exactly; the only tolerances are the time
//! budgets and sample counts below.

mod common;

use std::error::Error;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use fuzzrev::lattice::{DegreeLattice, LatticeError};
use fuzzrev::logics::Logic;
use fuzzrev::postulates::{self, CheckConfig, FnOracle, PartialMeet, PostulateReport, Verdict};
use fuzzrev::revision::{self, FnSelection, RemainderSet, Selection, SelectionStrategy, DEFAULT_ENUM_CAP};
use fuzzrev::{Degree, DeductionSystem, Formula, FuzzyBase, GradedFormula};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN_BUDGET: Duration = Duration::from_secs(10);
const ORACLE_BUDGET: Duration = Duration::from_secs(60);
/// Shared by the brute-force and postulate criteria.
const RANDOM_SEED: u64 = 2024;
const ORACLE_INSTANCES: usize = 200;
const EXTENSION_INSTANCES: usize = 100;
const CRITERION_SAMPLES: usize = 500;
const ROUND_TRIP_INSTANCES: usize = 50;
const TARSKI_SAMPLES: usize = 500;
const CUT_BASES: usize = 100;

type Outcome = Result<String, Box<dyn Error>>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+).into());
        }
    };
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("golden values", golden_values),
        ("remainders match brute force", oracle_equivalence),
        ("postulates F1-F10", postulate_suite),
        ("extension, identity, antichain", extension_identity),
        ("lukasiewicz criterion (*)", lukasiewicz_criterion),
        ("round trip", round_trip),
        ("framework invariants", framework_invariants),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panic: {msg}").into())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name} ({detail}; {secs:.1}s)", i + 1),
            Err(e) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {e} ({secs:.1}s)", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn base(sys: &DeductionSystem, text: &str) -> Result<FuzzyBase, Box<dyn Error>> {
    Ok(sys.parse_base(text)?)
}

fn input(sys: &DeductionSystem, text: &str) -> Result<GradedFormula, Box<dyn Error>> {
    Ok(sys.parse_input(text)?)
}

fn clean(reports: &[PostulateReport], label: &str) -> Result<(), Box<dyn Error>> {
    for r in reports {
        let ok = match &r.verdict {
            Verdict::Pass => true,
            Verdict::Skipped(_) => r.postulate == postulates::Postulate::ChainCorollary,
            _ => false,
        };
        ensure!(ok, "{label}: {r}");
    }
    Ok(())
}

fn golden_values() -> Outcome {
    let start = Instant::now();
    let luk = DeductionSystem::lukasiewicz(4)?;
    let nec = DeductionSystem::necessity(4)?;
    let prob = DeductionSystem::probability(20)?;
    let crisp = DeductionSystem::crisp();
    let mut checked = 0;

    for (sys, y, yz) in [(&luk, q(1, 2), q(1, 4)), (&nec, q(3, 4), q(1, 4)), (&prob, q(1, 2), q(0, 1))] {
        let u = base(sys, U0)?;
        ensure!(sys.deduce(&u, &f("y"))? == y, "{} D(u0)(y)", sys.name());
        ensure!(sys.deduce(&u, &f("y & z"))? == yz, "{} D(u0)(y & z)", sys.name());
        checked += 2;
    }

    let u = base(&luk, U0)?;
    for b in 1..=4 {
        let g = input(&luk, &format!("!(y & z) : {b}/4"))?;
        let consistent = luk.is_consistent(&u.join_graded(&g)?)?;
        ensure!(consistent == (b <= 3), "luk u0 with !(y & z) at {b}/4");
        checked += 1;
    }

    let u = base(&crisp, CRISP_BASE)?;
    let g = input(&crisp, "!(y & z) : 1")?;
    let r = revision::remainders(&crisp, &u, &g)?;
    let want: Vec<FuzzyBase> = ["x : 1\nx -> y : 1", "x : 1\nz : 1", "x -> y : 1\nz : 1"]
        .iter()
        .map(|t| base(&crisp, t))
        .collect::<Result<_, _>>()?;
    ensure!(r.elements() == want.as_slice(), "crisp remainders {r}");
    let x = f("x");
    let keep_x = FnSelection(|_: &FuzzyBase, r: &RemainderSet| {
        r.elements()
            .iter()
            .enumerate()
            .filter(|(_, w)| w.degree_of(&x) == &Degree::one())
            .map(|(i, _)| i)
            .collect()
    });
    let revised = revision::revise(&crisp, &keep_x, &u, &g)?;
    ensure!(revised == base(&crisp, "x : 1\n!(y & z) : 1")?, "crisp revision {revised}");
    checked += 2;

    let cases: [(&DeductionSystem, SelectionStrategy, &str, &str); 3] = [
        (
            &luk,
            SelectionStrategy::predicate_from_text("x>=3/4", luk.lattice())?,
            "!(y & z) : 1",
            "x : 3/4\nx -> y : 1/4\n!(y & z) : 1",
        ),
        (
            &nec,
            SelectionStrategy::DegreePriority,
            "!(y & z) : 1/4",
            "x : 3/4\nx -> y : 3/4\n!(y & z) : 1/4",
        ),
        (
            &prob,
            SelectionStrategy::predicate_from_text("x>=3/5", prob.lattice())?,
            "!y : 3/4",
            "x : 3/5\nx -> y : 1/2\nz : 1/4\n!y : 3/4",
        ),
    ];
    for (sys, strategy, g, want) in cases {
        let u = base(sys, U0)?;
        let out = revision::revise(sys, &strategy, &u, &input(sys, g)?)?;
        ensure!(out == base(sys, want)?, "{} revision gave {out}", sys.name());
        checked += 1;
    }

    let elapsed = start.elapsed();
    ensure!(elapsed < GOLDEN_BUDGET, "took {elapsed:?}, budget {GOLDEN_BUDGET:?}");
    Ok(format!("{checked} values exact"))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut gen = Gen::new(RANDOM_SEED);
    let mut conflicts = 0;
    for logic in LOGICS {
        for i in 0..ORACLE_INSTANCES {
            let inst = gen.instance(logic, i);
            let fast = revision::remainders(&inst.system, &inst.base, &inst.input)?;
            let slow = revision::remainders_bruteforce(&inst.system, &inst.base, &inst.input, DEFAULT_ENUM_CAP)?;
            ensure!(
                same_set(fast.elements(), slow.elements()),
                "{} {}: {} vs {}",
                inst.label,
                inst.base,
                fast,
                slow
            );
            conflicts += usize::from(!inst.system.is_consistent(&inst.base.join_graded(&inst.input)?)?);
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < ORACLE_BUDGET, "took {elapsed:?}, budget {ORACLE_BUDGET:?}");
    Ok(format!(
        "{} instances, {conflicts} with a conflicting input",
        ORACLE_INSTANCES * LOGICS.len()
    ))
}

fn strategies(rng: &mut ChaCha8Rng, u: &FuzzyBase) -> Vec<SelectionStrategy> {
    let mut ranking: Vec<Formula> = u.support().cloned().collect();
    ranking.shuffle(rng);
    vec![
        SelectionStrategy::FullMeet,
        SelectionStrategy::DegreePriority,
        SelectionStrategy::Maxichoice,
        SelectionStrategy::RankFile(ranking),
    ]
}

fn run_suite(inst: &Instance, strategy: &SelectionStrategy, inputs: &[GradedFormula]) -> Result<(), Box<dyn Error>> {
    let op = PartialMeet {
        system: &inst.system,
        selection: strategy,
        base: &inst.base,
    };
    let config = CheckConfig::default();
    let label = format!("{} {strategy:?}", inst.label);
    clean(&postulates::check(&inst.system, &inst.base, &op, inputs, &config)?, &label)?;
    clean(&postulates::check_derived(&inst.system, &inst.base, &op, inputs, &config)?, &label)?;
    Ok(())
}

fn postulate_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut runs = 0;
    for inst in golden() {
        let mut inputs = postulates::probe_inputs(&inst.system, &inst.base);
        inputs.push(inst.input.clone());
        for strategy in strategies(&mut rng, &inst.base) {
            run_suite(&inst, &strategy, &inputs)?;
            runs += 1;
        }
    }
    // Predicate selections are partial: they only cover inputs whose
    // remainders satisfy the constraint.
    for (i, pred) in [(1, "x>=3/4"), (3, "x>=3/5")] {
        let inst = &golden()[i];
        let strategy = SelectionStrategy::predicate_from_text(pred, inst.system.lattice())?;
        run_suite(inst, &strategy, std::slice::from_ref(&inst.input))?;
        runs += 1;
    }

    let mut gen = Gen::new(RANDOM_SEED);
    for logic in LOGICS {
        for i in 0..ORACLE_INSTANCES {
            let inst = gen.instance(logic, i);
            let mut inputs = postulates::probe_inputs(&inst.system, &inst.base);
            inputs.push(inst.input.clone());
            for strategy in strategies(&mut rng, &inst.base) {
                run_suite(&inst, &strategy, &inputs)?;
                runs += 1;
            }
        }
    }

    // Deliberately broken operators on the necessity example.
    let nec = &golden()[2];
    let (sys, u) = (&nec.system, &nec.base);
    let join = FnOracle(|g: &GradedFormula| Ok(u.join_graded(g)?));
    let reports = postulates::check(sys, u, &join, std::slice::from_ref(&nec.input), &CheckConfig::default())?;
    let cex = reports[1].counterexample().ok_or("join operator passes F2")?;
    ensure!(cex.replay(sys, &join, DEFAULT_ENUM_CAP)?, "F2 counterexample does not replay");

    let forget = FnOracle(|g: &GradedFormula| Ok(FuzzyBase::from_graded(u.lattice().clone(), g)?));
    let g = input(sys, "!y : 1")?;
    let reports = postulates::check(sys, u, &forget, &[g], &CheckConfig::default())?;
    let cex = reports[3].counterexample().ok_or("input-only operator passes F4")?;
    ensure!(cex.replay(sys, &forget, DEFAULT_ENUM_CAP)?, "F4 counterexample does not replay");

    Ok(format!("{runs} operator runs clean, broken operators fail F2 and F4"))
}

fn extension_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut gen = Gen::new(99);
    let mut instances = golden();
    for logic in LOGICS {
        for i in 0..EXTENSION_INSTANCES {
            instances.push(gen.instance(logic, i));
        }
    }
    for inst in &instances {
        let (sys, u, g) = (&inst.system, &inst.base, &inst.input);
        let r = postulates::check_extension(sys, u, g, DEFAULT_ENUM_CAP)?;
        ensure!(r.verdict == Verdict::Pass, "{}: {r}", inst.label);
        let remainders = revision::remainders(sys, u, g)?;
        let r = postulates::check_antichain(&remainders)?;
        ensure!(r.verdict == Verdict::Pass, "{}: {r}", inst.label);
        for strategy in strategies(&mut rng, u) {
            let r = postulates::check_identity(sys, &strategy, u, g)?;
            ensure!(r.verdict == Verdict::Pass, "{} {strategy:?}: {r}", inst.label);
        }
    }
    Ok(format!("{} instances", instances.len()))
}

fn lukasiewicz_criterion() -> Outcome {
    let sys = DeductionSystem::lukasiewicz(4)?;
    let one = fuzzrev::lattice::Rational::from_integer(1);
    let mut gen = Gen::new(500);
    let mut inconsistent = 0;
    for _ in 0..CRITERION_SAMPLES {
        let u = gen.base(&sys, 3);
        let phi = gen.formula(2);
        // a = 0 is excluded: an inconsistent u stays inconsistent while
        // D(u)(¬φ) = 1 is not above 1.
        let a = gen.degree(sys.lattice(), false);
        let g = GradedFormula::new(phi.clone(), a.clone());
        let clash = !sys.is_consistent(&u.join_graded(&g)?)?;
        let d = sys.deduce(&u, &Formula::not(phi.clone()))?;
        let above = d.as_rational().ok_or("off grid")? > one - a.as_rational().ok_or("off grid")?;
        ensure!(clash == above, "u = {u}, φ = {phi}, a = {a}: inconsistent {clash}, D(u)(¬φ) = {d}");
        ensure!(sys.luk_inconsistency_criterion(&u, &g)? == clash, "criterion API disagrees on {u} / {g}");
        ensure!(consistent(&sys, &u.join_graded(&g)?) != clash, "oracle disagrees on {u} / {g}");
        inconsistent += usize::from(clash);
    }
    Ok(format!("{CRITERION_SAMPLES} samples, {inconsistent} inconsistent"))
}

/// Keeps the remainders with an even support size, else the last one.
fn parity(_: &FuzzyBase, r: &RemainderSet) -> Vec<usize> {
    let even: Vec<usize> = (0..r.len()).filter(|&i| r.elements()[i].len().is_multiple_of(2)).collect();
    if even.is_empty() {
        vec![r.len() - 1]
    } else {
        even
    }
}

fn round_trip() -> Outcome {
    let mut gen = Gen::new(6);
    let mut nontrivial = 0;
    for i in 0..ROUND_TRIP_INSTANCES {
        let inst = gen.instance(LOGICS[i % LOGICS.len()], i);
        let (sys, u) = (&inst.system, &inst.base);
        let gamma = FnSelection(parity);
        let op = PartialMeet {
            system: sys,
            selection: &gamma,
            base: u,
        };
        let mut inputs = postulates::probe_inputs(sys, u);
        inputs.push(inst.input.clone());
        let config = CheckConfig::default();
        let extracted = postulates::extract_selection(sys, u, &op, &inputs, &config)?;
        let report = postulates::check_round_trip(sys, u, &op, &extracted, &inputs)?;
        ensure!(report.verdict == Verdict::Pass, "{}: {report}", inst.label);
        for g in &inputs {
            let direct = revision::revise(sys, &gamma, u, g)?;
            let replayed = revision::revise(sys, &extracted, u, g)?;
            ensure!(direct == replayed, "{} on {g}: {direct} vs {replayed}", inst.label);
            let r = revision::remainders(sys, u, g)?;
            if !r.is_empty() {
                nontrivial += usize::from(gamma.choose(u, &r)?.len() < r.len());
            }
        }
    }
    Ok(format!("{ROUND_TRIP_INSTANCES} instances, {nontrivial} proper selections"))
}

fn query(gen: &mut Gen, rng: &mut ChaCha8Rng, sys: &DeductionSystem, u: &FuzzyBase) -> Formula {
    if let Logic::Table(t) = sys.logic() {
        return t.universe().choose(rng).unwrap().clone();
    }
    if rng.gen_bool(0.5) {
        let support: Vec<&Formula> = u.support().collect();
        (*support.choose(rng).unwrap()).clone()
    } else {
        gen.formula(2)
    }
}

fn framework_invariants() -> Outcome {
    let mut gen = Gen::new(7);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for logic in LOGICS {
        for _ in 0..TARSKI_SAMPLES {
            let sys = gen.system(logic);
            let u = gen.base(&sys, 3);
            let v = u.join(&gen.base(&sys, 2))?;
            let phi = query(&mut gen, &mut rng, &sys, &u);
            let l = sys.lattice();
            let du = sys.deduce(&u, &phi)?;
            ensure!(l.leq(&du, &sys.deduce(&v, &phi)?)?, "{logic}: monotony fails for {u} ⊑ {v} on {phi}");
            ensure!(l.leq(u.degree_of(&phi), &du)?, "{logic}: reflexivity fails for {u} on {phi}");
        }
    }

    let mut bases = 0;
    while bases < CUT_BASES {
        let sys = gen.system("nec");
        let u = gen.base(&sys, 4);
        if !sys.is_consistent(&u)? {
            continue;
        }
        bases += 1;
        let phi = query(&mut gen, &mut rng, &sys, &u);
        let want = necessity_sup_of_meets(sys.lattice(), &u, &phi);
        ensure!(sys.deduce(&u, &phi)? == want, "cut formula differs on {u} ⊢ {phi}");
    }

    let m3 = DegreeLattice::validate_explicit(
        &["0", "a", "b", "c", "1"],
        &[("0", "a"), ("0", "b"), ("0", "c"), ("a", "1"), ("b", "1"), ("c", "1")],
    );
    let n5 = DegreeLattice::validate_explicit(
        &["0", "a", "b", "c", "1"],
        &[("0", "a"), ("a", "b"), ("b", "1"), ("0", "c"), ("c", "1")],
    );
    for (name, result) in [("M3", m3), ("N5", n5)] {
        ensure!(
            matches!(result, Err(LatticeError::NotDistributive { .. })),
            "{name} accepted: {result:?}"
        );
    }
    Ok(format!(
        "{} Tarski samples, {CUT_BASES} cut bases, M3 and N5 rejected",
        TARSKI_SAMPLES * LOGICS.len()
    ))
}
