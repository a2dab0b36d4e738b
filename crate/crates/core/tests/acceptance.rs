//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use il_decide::corpus::{self, CorpusConfig, Entry, Expect};
use il_decide::{
    build_from_sat_trace, certify, decide_sat, decide_valid, enumerate_mcs, oracle_sat,
    ClosureSets, DecideOptions, Formula, Sign, SignedSet,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_917;
const RANDOM_FORMULAS: usize = 600;
const ORACLE_WORLDS: usize = 3;

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn random_corpus() -> Vec<Formula> {
    corpus::random_entries(RANDOM_FORMULAS, SEED, corpus::RandomConfig::default())
        .into_iter()
        .map(|e| e.formula)
        .collect()
}

/// Satisfiability target of an entry: the formula itself, or its negation
/// when validity is asked.
fn target(e: &Entry) -> Formula {
    match e.expect {
        Expect::Sat => e.formula.clone(),
        Expect::Valid | Expect::Invalid => Formula::not(e.formula.clone()),
    }
}

fn axiom_validity() -> Outcome {
    let axioms = corpus::axiom_instances();
    let start = Instant::now();
    let mut failures = Vec::new();
    for e in &axioms {
        match decide_valid(&e.formula, DecideOptions::default()) {
            Ok(run) if run.is_valid() => {}
            Ok(_) => failures.push(format!("{} decided INVALID", e.name)),
            Err(err) => failures.push(format!("{}: {err}", e.name)),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = failures.is_empty() && axioms.len() >= 100 && secs < 60.0;
    outcome(
        pass,
        format!(
            "{}/{} schema instances VALID in {secs:.2}s{}",
            axioms.len() - failures.len(),
            axioms.len(),
            failures.first().map(|f| format!("; first failure: {f}")).unwrap_or_default()
        ),
    )
}

fn non_theorems() -> Outcome {
    let mut problems = Vec::new();
    let entries = corpus::non_theorems();
    for e in &entries {
        let negation = Formula::not(e.formula.clone());
        let run = match decide_valid(&e.formula, DecideOptions::default()) {
            Ok(run) => run,
            Err(err) => {
                problems.push(format!("{}: {err}", e.name));
                continue;
            }
        };
        let Some(trace) = &run.negation.trace else {
            problems.push(format!("{} decided VALID", e.name));
            continue;
        };
        match build_from_sat_trace(trace, &run.negation.closure) {
            Ok(w) => {
                if let Err(r) = certify(&w.model, &negation) {
                    problems.push(format!("{}: countermodel rejected: {r}", e.name));
                }
            }
            Err(err) => problems.push(format!("{}: {err}", e.name)),
        }
        match oracle_sat(&negation, ORACLE_WORLDS) {
            Ok(Some(m)) if certify(&m, &negation).is_ok() => {}
            Ok(Some(_)) => problems.push(format!("{}: oracle model fails certification", e.name)),
            Ok(None) => problems.push(format!("{}: oracle found no countermodel", e.name)),
            Err(err) => problems.push(format!("{}: {err}", e.name)),
        }
    }
    outcome(
        problems.is_empty(),
        format!(
            "{}/{} INVALID with certified and oracle countermodels{}",
            entries.len() - problems.len().min(entries.len()),
            entries.len(),
            problems.first().map(|p| format!("; {p}")).unwrap_or_default()
        ),
    )
}

fn witness_soundness(formulas: &[Formula]) -> Outcome {
    let mut sat = 0;
    let mut bad = Vec::new();
    for f in formulas {
        let run = match decide_sat(f, DecideOptions::default()) {
            Ok(run) => run,
            Err(err) => {
                bad.push(format!("{f}: {err}"));
                continue;
            }
        };
        let Some(trace) = &run.trace else { continue };
        sat += 1;
        let w = match build_from_sat_trace(trace, &run.closure) {
            Ok(w) => w,
            Err(err) => {
                bad.push(format!("{f}: {err}"));
                continue;
            }
        };
        // frame conditions and forcing checked separately here
        let frame = w.model.frame_check();
        if !frame.is_empty() {
            bad.push(format!("{f}: {}", frame[0]));
        } else if !w.model.model_check(w.root, f).unwrap_or(false) {
            bad.push(format!("{f}: root does not force the formula"));
        }
    }
    outcome(
        bad.is_empty() && formulas.len() >= 500,
        format!(
            "{}/{sat} SAT answers certified over {} random formulas{}",
            sat - bad.len().min(sat),
            formulas.len(),
            bad.first().map(|b| format!("; {b}")).unwrap_or_default()
        ),
    )
}

fn oracle_completeness(formulas: &[Formula]) -> Outcome {
    let mut found = 0;
    let mut missed = Vec::new();
    for f in formulas {
        let Ok(Some(model)) = oracle_sat(f, ORACLE_WORLDS) else {
            continue;
        };
        found += 1;
        assert!(certify(&model, f).is_ok(), "oracle returned a non-model for {f}");
        match decide_sat(f, DecideOptions::default()) {
            Ok(run) if run.is_sat() => {}
            _ => missed.push(f.to_string()),
        }
    }
    outcome(
        missed.is_empty(),
        format!(
            "{} oracle models (<= {ORACLE_WORLDS} worlds), {} answered UNSAT{}",
            found,
            missed.len(),
            missed.first().map(|m| format!("; first: {m}")).unwrap_or_default()
        ),
    )
}

fn depth_bound(targets: &[Formula]) -> Outcome {
    let mut worst_sat = 0.0f64;
    let mut worst_mcs = 0.0f64;
    let mut bad = Vec::new();
    for f in targets {
        match decide_sat(f, DecideOptions::default()) {
            Ok(run) => {
                let n = run.closure.gamma_rhd_i().len();
                let (d, m) = (run.stats.max_sat_depth, run.stats.max_mcs_nesting);
                worst_sat = worst_sat.max(d as f64 / (n + 2) as f64);
                worst_mcs = worst_mcs.max(m as f64 / (n + 1) as f64);
                if d > n + 2 || m > n + 1 {
                    bad.push(format!("{f}: depth {d}, (2)-nesting {m}, |Γ▷ᴵ| = {n}"));
                }
            }
            // budget overruns and growth failures both surface as errors
            Err(err) => bad.push(format!("{f}: {err}")),
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{} runs, max depth/(|Γ▷ᴵ|+2) = {worst_sat:.2}, max (2)-nesting/(|Γ▷ᴵ|+1) = {worst_mcs:.2}{}",
            targets.len(),
            bad.first().map(|b| format!("; {b}")).unwrap_or_default()
        ),
    )
}

/// Classical value of a closure member once every atom and every `▷`-node
/// has been assigned.
fn eval(f: &Formula, atoms: &HashMap<&Formula, bool>) -> bool {
    match f {
        Formula::Bottom => false,
        Formula::Implies(a, b) => !eval(a, atoms) || eval(b, atoms),
        Formula::Atom(_) | Formula::Rhd(..) => atoms[f],
    }
}

/// All total signings of the closure that are Boolean-consistent and
/// extend `delta`, by trying every assignment to atoms and `▷`-nodes.
fn brute_force_mcs(closure: &ClosureSets, delta: &SignedSet) -> BTreeSet<Vec<bool>> {
    let members = closure.gamma_pure();
    let atoms: Vec<&Formula> = members
        .iter()
        .filter(|f| matches!(f, Formula::Atom(_) | Formula::Rhd(..)))
        .collect();
    let mut out = BTreeSet::new();
    for bits in 0u32..(1 << atoms.len()) {
        let assign: HashMap<&Formula, bool> = atoms
            .iter()
            .enumerate()
            .map(|(k, &a)| (a, bits >> k & 1 == 1))
            .collect();
        let values: Vec<bool> = members.iter().map(|f| eval(f, &assign)).collect();
        if delta.iter().all(|(i, s)| values[i] == s.is_pos()) {
            out.insert(values);
        }
    }
    out
}

fn mcs_equivalence(targets: &[Formula]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut closures = 0;
    let mut inputs = 0;
    let mut bad = Vec::new();
    let mut seen = BTreeSet::new();
    for f in targets {
        if !seen.insert(f.clone()) {
            continue;
        }
        let c = ClosureSets::new(f);
        let atoms = c.vars().len() + c.gamma_rhd_i().len();
        if atoms > 12 {
            continue;
        }
        closures += 1;
        let mut deltas = vec![
            SignedSet::empty(&c),
            SignedSet::from_literals(&c, [(c.root(), Sign::Pos)]).unwrap(),
            SignedSet::from_literals(&c, [(c.root(), Sign::Neg)]).unwrap(),
        ];
        for _ in 0..3 {
            let lits: Vec<(usize, Sign)> = (0..rng.gen_range(1..=3))
                .map(|_| (rng.gen_range(0..c.len()), Sign::from_bool(rng.gen_bool(0.5))))
                .collect();
            if let Some(s) = SignedSet::from_literals(&c, lits) {
                deltas.push(s);
            }
        }
        for delta in &deltas {
            inputs += 1;
            let got: BTreeSet<Vec<bool>> = enumerate_mcs(delta, &c)
                .map(|m| (0..c.len()).map(|i| m.holds(i)).collect())
                .collect();
            if got != brute_force_mcs(&c, delta) {
                bad.push(format!("{f} with {}", delta.render(&c)));
            }
        }
    }
    outcome(
        bad.is_empty() && closures > 0,
        format!(
            "{closures} closures, {inputs} partial signings, {} mismatches{}",
            bad.len(),
            bad.first().map(|b| format!("; first: {b}")).unwrap_or_default()
        ),
    )
}

fn gl_regression() -> Outcome {
    let mut wrong = Vec::new();
    for &(text, valid) in corpus::GL_REGRESSION.iter() {
        let f = il_decide::parse(text).unwrap();
        match decide_valid(&f, DecideOptions::default()) {
            Ok(run) if run.is_valid() == valid => {}
            Ok(_) => wrong.push(text.to_string()),
            Err(err) => wrong.push(format!("{text}: {err}")),
        }
    }
    outcome(
        wrong.is_empty(),
        format!(
            "{}/{} curated GL formulas agree{}",
            corpus::GL_REGRESSION.len() - wrong.len(),
            corpus::GL_REGRESSION.len(),
            wrong.first().map(|w| format!("; first: {w}")).unwrap_or_default()
        ),
    )
}

fn determinism() -> Outcome {
    let config = CorpusConfig {
        random: RANDOM_FORMULAS,
        seed: SEED,
        max_worlds: ORACLE_WORLDS,
        ..CorpusConfig::default()
    };
    let a = corpus::run_corpus(&config);
    let b = corpus::run_corpus(&config);
    let same = a.to_json() == b.to_json() && a.render() == b.render();
    outcome(
        same && a.exit_code() == 0,
        format!(
            "{} entries, {} bytes of JSON, identical: {same}, corpus exit code {}",
            a.rows.len(),
            a.to_json().len(),
            a.exit_code()
        ),
    )
}

fn main() {
    let random = random_corpus();
    let mut all_targets: Vec<Formula> = corpus::axiom_instances()
        .iter()
        .chain(&corpus::non_theorems())
        .chain(&corpus::gl_regression())
        .map(target)
        .collect();
    all_targets.extend(random.iter().cloned());

    let criteria: Vec<Criterion> = vec![
        ("axiom validity suite", Box::new(axiom_validity)),
        ("non-theorem suite", Box::new(non_theorems)),
        ("witness soundness", Box::new(|| witness_soundness(&random))),
        ("one-sided oracle completeness", Box::new(|| oracle_completeness(&random))),
        ("depth bound and monotone growth", Box::new(|| depth_bound(&all_targets))),
        ("maximal set enumeration vs brute force", Box::new(|| mcs_equivalence(&all_targets))),
        ("GL fragment regression", Box::new(gl_regression)),
        ("determinism", Box::new(determinism)),
    ];

    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {} [{}] {name}: {}",
            k + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
