//! Test corpora and the cross-checking corpus runner.
//!
//! Three built-in suites: instances of the IL and GL axiom schemata (all
//! valid), a handful of known non-theorems, and a curated list of
//! `□`/`◇`-only formulas with known GL status. On top of those comes a
//! seeded random family.
//!
//! Random formulas are drawn with `ChaCha8Rng::seed_from_u64(seed)` by
//! [`RandomFormulas`]: with probability 1/2 a body of at most `budget - 2`
//! nodes is drawn and negated, otherwise a body of at most `budget` nodes.
//! A body of budget `b` is a leaf if `b < 3` or with probability 0.2, else a
//! binary node (`▷` with probability `rhd_prob`, `→` otherwise) whose left
//! child gets `gen_range(1..=b-2)` nodes and right child the rest. A leaf is
//! `⊥` with probability 0.15, else a uniformly chosen variable.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::decide::{decide_sat, DecideError, DecideOptions};
use crate::formula::{parse, Formula};
use crate::semantics::oracle_sat;
use crate::witness::{build_from_sat_trace, certify};

/// Version tag written into every JSON report.
pub const REPORT_VERSION: &str = "1.0";

const VAR_NAMES: [&str; 3] = ["p", "q", "r"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Axiom,
    NonTheorem,
    Gl,
    Random,
    File,
}

impl Kind {
    fn label(self) -> &'static str {
        match self {
            Kind::Axiom => "axiom",
            Kind::NonTheorem => "nonthm",
            Kind::Gl => "gl",
            Kind::Random => "random",
            Kind::File => "file",
        }
    }
}

/// What a corpus entry is checked for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Expect {
    Valid,
    Invalid,
    /// No expectation: decide satisfiability and cross-check.
    Sat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub kind: Kind,
    pub name: String,
    pub formula: Formula,
    pub expect: Expect,
}

/// The instantiation set for schema letters: `p`, `q`, `p→q`, `p▷q`, `◇p`.
pub fn instantiation_set() -> Vec<Formula> {
    let p = Formula::atom("p");
    let q = Formula::atom("q");
    vec![
        p.clone(),
        q.clone(),
        Formula::implies(p.clone(), q.clone()),
        Formula::rhd(p.clone(), q),
        Formula::diamond(p),
    ]
}

type Schema = (&'static str, usize, fn(&[Formula]) -> Formula);

/// The five IL schemata and three GL schemata (with `A → (B → A)` standing
/// in for classical tautologies).
pub fn schemata() -> Vec<Schema> {
    fn a(xs: &[Formula], i: usize) -> Formula {
        xs[i].clone()
    }
    vec![
        ("GL-taut", 2, |x| Formula::implies(a(x, 0), Formula::implies(a(x, 1), a(x, 0)))),
        ("GL-K", 2, |x| {
            Formula::implies(
                Formula::boxed(Formula::implies(a(x, 0), a(x, 1))),
                Formula::implies(Formula::boxed(a(x, 0)), Formula::boxed(a(x, 1))),
            )
        }),
        ("GL-L", 1, |x| {
            Formula::implies(
                Formula::boxed(Formula::implies(Formula::boxed(a(x, 0)), a(x, 0))),
                Formula::boxed(a(x, 0)),
            )
        }),
        ("J1", 2, |x| {
            Formula::implies(
                Formula::boxed(Formula::implies(a(x, 0), a(x, 1))),
                Formula::rhd(a(x, 0), a(x, 1)),
            )
        }),
        ("J2", 3, |x| {
            Formula::implies(
                Formula::and(Formula::rhd(a(x, 0), a(x, 1)), Formula::rhd(a(x, 1), a(x, 2))),
                Formula::rhd(a(x, 0), a(x, 2)),
            )
        }),
        ("J3", 3, |x| {
            Formula::implies(
                Formula::and(Formula::rhd(a(x, 0), a(x, 2)), Formula::rhd(a(x, 1), a(x, 2))),
                Formula::rhd(Formula::or(a(x, 0), a(x, 1)), a(x, 2)),
            )
        }),
        ("J4", 2, |x| {
            Formula::implies(
                Formula::rhd(a(x, 0), a(x, 1)),
                Formula::implies(Formula::diamond(a(x, 0)), Formula::diamond(a(x, 1))),
            )
        }),
        ("J5", 1, |x| Formula::rhd(Formula::diamond(a(x, 0)), a(x, 0))),
    ]
}

fn tuples(n: usize, arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

/// Every schema instance over [`instantiation_set`], deduplicated.
pub fn axiom_instances() -> Vec<Entry> {
    let set = instantiation_set();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for (name, arity, build) in schemata() {
        for t in tuples(set.len(), arity) {
            let args: Vec<Formula> = t.iter().map(|&i| set[i].clone()).collect();
            let f = build(&args);
            if seen.insert(f.clone()) {
                let letters: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                out.push(Entry {
                    kind: Kind::Axiom,
                    name: format!("{name}[{}]", letters.join("; ")),
                    formula: f,
                    expect: Expect::Valid,
                });
            }
        }
    }
    out
}

/// Formulas that are not IL theorems.
pub fn non_theorems() -> Vec<Entry> {
    [
        "box p -> p",
        "p -> box p",
        "(p |> q) -> box (p -> q)",
        "dia true",
        "p |> q -> q |> p",
    ]
    .iter()
    .map(|s| Entry {
        kind: Kind::NonTheorem,
        name: s.to_string(),
        formula: parse(s).expect("built-in formula parses"),
        expect: Expect::Invalid,
    })
    .collect()
}

/// `□`/`◇`-only formulas with their known GL status.
pub const GL_REGRESSION: [(&str, bool); 20] = [
    ("box (box p -> p) -> box p", true),
    ("box (p -> q) -> (box p -> box q)", true),
    ("box p -> box box p", true),
    ("box false | dia true", true),
    ("dia p -> dia (p & box ~p)", true),
    ("dia true -> dia box false", true),
    ("box (p & q) <-> (box p & box q)", true),
    ("box p & dia q -> dia (p & q)", true),
    ("dia dia p -> dia p", true),
    ("box (p <-> ~box p) -> box (p <-> ~box false)", true),
    ("box p -> p", false),
    ("p -> box p", false),
    ("dia true", false),
    ("box false", false),
    ("dia p -> box dia p", false),
    ("box (box p -> p)", false),
    ("box p | box ~p", false),
    ("dia p -> dia dia p", false),
    ("box box p -> box p", false),
    ("box (p | q) -> box p | box q", false),
];

pub fn gl_regression() -> Vec<Entry> {
    GL_REGRESSION
        .iter()
        .map(|&(s, valid)| Entry {
            kind: Kind::Gl,
            name: s.to_string(),
            formula: parse(s).expect("built-in formula parses"),
            expect: if valid { Expect::Valid } else { Expect::Invalid },
        })
        .collect()
}

/// Parameters of the random formula family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomConfig {
    pub vars: usize,
    pub node_budget: usize,
    pub rhd_prob: f64,
}

impl Default for RandomConfig {
    fn default() -> Self {
        RandomConfig {
            vars: 3,
            node_budget: 12,
            rhd_prob: 0.35,
        }
    }
}

/// Endless seeded stream of random core formulas.
pub struct RandomFormulas {
    rng: ChaCha8Rng,
    config: RandomConfig,
}

impl RandomFormulas {
    pub fn new(seed: u64, config: RandomConfig) -> Self {
        assert!((1..=VAR_NAMES.len()).contains(&config.vars));
        RandomFormulas {
            rng: ChaCha8Rng::seed_from_u64(seed),
            config,
        }
    }

    fn leaf(&mut self) -> Formula {
        if self.rng.gen_bool(0.15) {
            Formula::Bottom
        } else {
            Formula::atom(VAR_NAMES[self.rng.gen_range(0..self.config.vars)])
        }
    }

    fn body(&mut self, budget: usize) -> Formula {
        if budget < 3 || self.rng.gen_bool(0.2) {
            return self.leaf();
        }
        let rhd = self.rng.gen_bool(self.config.rhd_prob);
        let left = self.rng.gen_range(1..=budget - 2);
        let l = self.body(left);
        let r = self.body(budget - 1 - left);
        if rhd {
            Formula::rhd(l, r)
        } else {
            Formula::implies(l, r)
        }
    }
}

impl Iterator for RandomFormulas {
    type Item = Formula;

    fn next(&mut self) -> Option<Formula> {
        let budget = self.config.node_budget;
        if budget >= 3 && self.rng.gen_bool(0.5) {
            Some(Formula::not(self.body(budget - 2)))
        } else {
            Some(self.body(budget))
        }
    }
}

pub fn random_entries(count: usize, seed: u64, config: RandomConfig) -> Vec<Entry> {
    RandomFormulas::new(seed, config)
        .take(count)
        .enumerate()
        .map(|(i, f)| Entry {
            kind: Kind::Random,
            name: format!("random#{i}"),
            formula: f,
            expect: Expect::Sat,
        })
        .collect()
}

/// Reads one formula per line; blank lines and `#` comments are skipped.
pub fn parse_formula_file(text: &str) -> Result<Vec<Formula>, (usize, crate::formula::ParseError)> {
    text.lines()
        .enumerate()
        .map(|(n, line)| (n + 1, line.split('#').next().unwrap_or("").trim()))
        .filter(|(_, line)| !line.is_empty())
        .map(|(n, line)| parse(line).map_err(|e| (n, e)))
        .collect()
}

#[derive(Debug, Clone)]
pub struct CorpusConfig {
    pub builtin: bool,
    pub random: usize,
    pub seed: u64,
    pub max_worlds: usize,
    pub options: DecideOptions,
    pub random_config: RandomConfig,
    pub extra: Vec<Formula>,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            builtin: true,
            random: 500,
            seed: 0,
            max_worlds: 3,
            options: DecideOptions::default(),
            random_config: RandomConfig::default(),
            extra: Vec::new(),
        }
    }
}

impl CorpusConfig {
    pub fn entries(&self) -> Vec<Entry> {
        let mut out = Vec::new();
        if self.builtin {
            out.extend(axiom_instances());
            out.extend(non_theorems());
            out.extend(gl_regression());
        }
        out.extend(self.extra.iter().enumerate().map(|(i, f)| Entry {
            kind: Kind::File,
            name: format!("file#{i}"),
            formula: f.clone(),
            expect: Expect::Sat,
        }));
        out.extend(random_entries(self.random, self.seed, self.random_config));
        out
    }
}

/// How an entry's check went.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Ok,
    /// Decision contradicts the expected status or the oracle.
    Disagreement,
    /// A witness failed certification.
    CertificationFailure,
    /// The search reported a broken internal invariant.
    InternalError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Row {
    pub index: usize,
    pub kind: Kind,
    pub name: String,
    pub formula: String,
    pub expect: Expect,
    /// `SAT`/`UNSAT` for satisfiability entries, `VALID`/`INVALID` otherwise.
    pub decision: String,
    pub witness_worlds: Option<usize>,
    pub oracle: String,
    pub max_depth: usize,
    pub max_mcs_nesting: usize,
    pub budget: usize,
    pub gamma_rhd_i: usize,
    pub verdict: Verdict,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub ok: usize,
    pub disagreements: usize,
    pub certification_failures: usize,
    pub internal_errors: usize,
    pub sat: usize,
    pub unsat: usize,
    pub max_depth: usize,
    pub max_budget: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusReport {
    pub spec_version: &'static str,
    pub seed: u64,
    pub random: usize,
    pub max_worlds: usize,
    pub rows: Vec<Row>,
    pub summary: Summary,
}

impl CorpusReport {
    /// Process exit status: 0 clean, 2 internal error, 3 certification
    /// failure, 4 disagreement.
    pub fn exit_code(&self) -> i32 {
        let s = &self.summary;
        if s.internal_errors > 0 {
            2
        } else if s.certification_failures > 0 {
            3
        } else if s.disagreements > 0 {
            4
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            out.push_str(&format!(
                "{:>4} {:<6} {:<7} depth {}/{} {:<13} {}{}\n",
                r.index,
                r.kind.label(),
                r.decision,
                r.max_depth,
                r.budget,
                verdict_label(r.verdict),
                r.formula,
                if r.detail.is_empty() {
                    String::new()
                } else {
                    format!("  [{}]", r.detail)
                },
            ));
        }
        let s = &self.summary;
        out.push_str(&format!(
            "total {}  ok {}  disagreements {}  certification failures {}  internal errors {}\n",
            s.total, s.ok, s.disagreements, s.certification_failures, s.internal_errors
        ));
        out.push_str(&format!(
            "sat {}  unsat {}  max depth {}  max budget {}  seed {}  oracle bound {}\n",
            s.sat, s.unsat, s.max_depth, s.max_budget, self.seed, self.max_worlds
        ));
        out
    }
}

fn verdict_label(v: Verdict) -> &'static str {
    match v {
        Verdict::Ok => "ok",
        Verdict::Disagreement => "DISAGREE",
        Verdict::CertificationFailure => "CERT-FAIL",
        Verdict::InternalError => "INTERNAL",
    }
}

/// Decides one entry and cross-checks it against the witness certifier and
/// the small-model oracle.
pub fn check_entry(index: usize, entry: &Entry, max_worlds: usize, options: DecideOptions) -> Row {
    // validity questions are satisfiability of the negation
    let target = match entry.expect {
        Expect::Sat => entry.formula.clone(),
        Expect::Valid | Expect::Invalid => Formula::not(entry.formula.clone()),
    };
    let mut row = Row {
        index,
        kind: entry.kind,
        name: entry.name.clone(),
        formula: entry.formula.to_string(),
        expect: entry.expect,
        decision: String::new(),
        witness_worlds: None,
        oracle: String::new(),
        max_depth: 0,
        max_mcs_nesting: 0,
        budget: 0,
        gamma_rhd_i: 0,
        verdict: Verdict::Ok,
        detail: String::new(),
    };

    let run = match decide_sat(&target, options) {
        Ok(run) => run,
        Err(e) => {
            row.decision = "ERROR".into();
            row.verdict = Verdict::InternalError;
            row.detail = e.to_string();
            return row;
        }
    };
    row.max_depth = run.stats.max_sat_depth;
    row.max_mcs_nesting = run.stats.max_mcs_nesting;
    row.budget = run.closure.depth_budget();
    row.gamma_rhd_i = run.closure.gamma_rhd_i().len();
    let sat = run.is_sat();
    row.decision = match (entry.expect, sat) {
        (Expect::Sat, true) => "SAT",
        (Expect::Sat, false) => "UNSAT",
        (_, true) => "INVALID",
        (_, false) => "VALID",
    }
    .into();

    if let Some(trace) = &run.trace {
        match build_from_sat_trace(trace, &run.closure) {
            Ok(w) => {
                row.witness_worlds = Some(w.model.len());
                if let Err(report) = certify(&w.model, &target) {
                    row.verdict = Verdict::CertificationFailure;
                    row.detail = report.to_string();
                    return row;
                }
            }
            Err(e) => {
                row.verdict = Verdict::CertificationFailure;
                row.detail = e.to_string();
                return row;
            }
        }
    }

    let oracle = match oracle_sat(&target, max_worlds) {
        Ok(found) => found,
        Err(e) => {
            row.oracle = format!("skipped: {e}");
            None
        }
    };
    if row.oracle.is_empty() {
        row.oracle = match &oracle {
            Some(m) => format!("model({})", m.len()),
            None => format!("NOT_FOUND({max_worlds})"),
        };
    }

    if oracle.is_some() && !sat {
        row.verdict = Verdict::Disagreement;
        row.detail = "oracle found a model, decider answered no".into();
        return row;
    }
    let expected_sat = match entry.expect {
        Expect::Sat => None,
        Expect::Valid => Some(false),
        Expect::Invalid => Some(true),
    };
    if let Some(want) = expected_sat {
        if want != sat {
            row.verdict = Verdict::Disagreement;
            row.detail = "decision contradicts the known status".into();
            return row;
        }
        if entry.expect == Expect::Invalid && oracle.is_none() {
            row.verdict = Verdict::Disagreement;
            row.detail = format!("oracle found no countermodel within {max_worlds} worlds");
        }
    }
    row
}

/// Runs the whole corpus. Entries are checked in parallel; rows come back in
/// input order, so the report only depends on the configuration.
pub fn run_corpus(config: &CorpusConfig) -> CorpusReport {
    let entries = config.entries();
    let rows: Vec<Row> = entries
        .par_iter()
        .enumerate()
        .map(|(i, e)| check_entry(i, e, config.max_worlds, config.options))
        .collect();
    let count = |v: Verdict| rows.iter().filter(|r| r.verdict == v).count();
    let summary = Summary {
        total: rows.len(),
        ok: count(Verdict::Ok),
        disagreements: count(Verdict::Disagreement),
        certification_failures: count(Verdict::CertificationFailure),
        internal_errors: count(Verdict::InternalError),
        sat: rows
            .iter()
            .filter(|r| matches!(r.decision.as_str(), "SAT" | "INVALID"))
            .count(),
        unsat: rows
            .iter()
            .filter(|r| matches!(r.decision.as_str(), "UNSAT" | "VALID"))
            .count(),
        max_depth: rows.iter().map(|r| r.max_depth).max().unwrap_or(0),
        max_budget: rows.iter().map(|r| r.budget).max().unwrap_or(0),
    };
    CorpusReport {
        spec_version: REPORT_VERSION,
        seed: config.seed,
        random: config.random,
        max_worlds: config.max_worlds,
        rows,
        summary,
    }
}

/// Timing of one node budget in a bench run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub node_budget: usize,
    pub formulas: usize,
    pub sat: usize,
    pub mean_micros: f64,
    pub max_micros: f64,
    pub max_depth: usize,
    /// Largest `|Γ▷ᴵ|+2` among this budget's formulas.
    pub max_budget: usize,
    /// Largest `depth / budget` ratio observed.
    pub max_depth_ratio: f64,
}

/// Times `decide_sat` on `per_size` random formulas for each node budget in
/// `sizes`. Formulas of one size run in parallel, each timed on its own.
pub fn bench(
    sizes: impl IntoIterator<Item = usize>,
    per_size: usize,
    seed: u64,
    options: DecideOptions,
) -> Result<Vec<BenchRow>, DecideError> {
    let mut rows = Vec::new();
    for size in sizes {
        let config = RandomConfig {
            node_budget: size,
            ..RandomConfig::default()
        };
        let formulas: Vec<Formula> = RandomFormulas::new(seed ^ size as u64, config)
            .take(per_size)
            .collect();
        let runs = formulas
            .par_iter()
            .map(|f| {
                let start = std::time::Instant::now();
                let run = decide_sat(f, options)?;
                let micros = start.elapsed().as_secs_f64() * 1e6;
                Ok((micros, run.is_sat(), run.stats.max_sat_depth, run.closure.depth_budget()))
            })
            .collect::<Result<Vec<_>, DecideError>>()?;
        let n = runs.len().max(1) as f64;
        rows.push(BenchRow {
            node_budget: size,
            formulas: runs.len(),
            sat: runs.iter().filter(|r| r.1).count(),
            mean_micros: runs.iter().map(|r| r.0).sum::<f64>() / n,
            max_micros: runs.iter().map(|r| r.0).fold(0.0, f64::max),
            max_depth: runs.iter().map(|r| r.2).max().unwrap_or(0),
            max_budget: runs.iter().map(|r| r.3).max().unwrap_or(0),
            max_depth_ratio: runs
                .iter()
                .map(|r| r.2 as f64 / r.3 as f64)
                .fold(0.0, f64::max),
        });
    }
    Ok(rows)
}
