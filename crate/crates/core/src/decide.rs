//! The recursive satisfiability procedure.
//!
//! Three mutually recursive procedures run over one fixed closure:
//!
//! 1. [`Decider::sat_set`]: a signed set is satisfiable iff one of its
//!    maximal Boolean consistent extensions is.
//! 2. [`Decider::check_mcs`]: a maximal set is satisfiable iff every
//!    negated `▷`-formula `ζ ∈ Δ⁻` can be refuted in a model of `Δ⁺`.
//! 3. [`Decider::refute_rhd`]: `ζ = χ▷η` fails in a model of `Δ⁺` iff some
//!    `(Σ,Θ)` pair passes two families of calls back into (1).
//!
//! (1) only calls (2), (2) only calls (3) and (3) only calls (1). Every
//! signed set built during the recursion uses formulas of the ambient
//! `Γpure`, so the search never leaves the closure computed up front. The
//! positively signed `φ▷⊥` formulas grow strictly along nested calls of (2),
//! which bounds the recursion by `|Γ▷ᴵ| + 2`; both facts are checked at
//! run time and reported as [`DecideError`]s if they ever fail.

use std::collections::HashMap;

use thiserror::Error;

use crate::closure::{ClosureSets, Node};
use crate::formula::Formula;
use crate::mcs::{enumerate_splits, MaxConsistentSet, Sign, SignedSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error("recursion depth {depth} exceeds the budget {budget}")]
    BudgetExceeded { depth: usize, budget: usize },
    #[error("nested maximal-set check at depth {depth} did not add a new positive φ▷⊥")]
    MonotoneGrowth { depth: usize },
    #[error("malformed closure: {0}")]
    MalformedClosure(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DecideOptions {
    /// Cache results of (1) by signed set. Trades polynomial space for speed.
    pub memoize: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub sat_calls: u64,
    pub mcs_checks: u64,
    pub refute_calls: u64,
    pub pairs_tried: u64,
    pub memo_hits: u64,
    /// Deepest nesting of (1) observed, counting the top-level call as 1.
    pub max_sat_depth: usize,
    /// Deepest nesting of (2) observed.
    pub max_mcs_nesting: usize,
}

/// `Δ⁺` and `Δ⁻`: the `Γ▷ᴵ` members signed `+` and `−` by a maximal set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaSplit {
    pub plus: Vec<usize>,
    pub minus: Vec<usize>,
}

impl DeltaSplit {
    pub fn of(mcs: &MaxConsistentSet, closure: &ClosureSets) -> DeltaSplit {
        let (plus, minus) = closure
            .gamma_rhd_i()
            .iter()
            .partition(|&&i| mcs.holds(i));
        DeltaSplit { plus, minus }
    }
}

/// A `(Σ,Θ)` pair over `Γ▷`. Pairs built here partition `Γ▷`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaThetaPair {
    pub sigma: Vec<usize>,
    pub theta: Vec<usize>,
}

/// Accepting run of (1): the chosen extension and its (2)-run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatTrace {
    pub input: SignedSet,
    pub chosen: McsTrace,
}

/// Accepting run of (2): one refutation per `ζ ∈ Δ⁻`, in `Δ⁻` order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McsTrace {
    pub mcs: MaxConsistentSet,
    pub split: DeltaSplit,
    pub refutations: Vec<RefuteTrace>,
}

/// Accepting run of (3): the pair found, check (a) and one check (b) per `θ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefuteTrace {
    pub delta_plus: Vec<usize>,
    pub zeta: usize,
    pub pair: SigmaThetaPair,
    pub check_a: SatTrace,
    pub check_b: Vec<(usize, SatTrace)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecisionTrace {
    Sat(SatTrace),
    Mcs(McsTrace),
    Refute(RefuteTrace),
}

impl DecisionTrace {
    /// Structural sanity of an accepting run; see [`check_trace`].
    pub fn check(&self, closure: &ClosureSets) -> Result<(), String> {
        match self {
            DecisionTrace::Sat(t) => check_sat(t, closure, 0),
            DecisionTrace::Mcs(t) => check_mcs_trace(t, closure, 0),
            DecisionTrace::Refute(t) => check_refute(t, closure, 0),
        }
    }
}

/// Checks that every (3)-node has `1 + |Θ|` children, every chosen set
/// extends its input, and (2)-nodes nest at most `|Γ▷ᴵ| + 1` deep.
pub fn check_trace(t: &SatTrace, closure: &ClosureSets) -> Result<(), String> {
    check_sat(t, closure, 0)
}

fn check_sat(t: &SatTrace, closure: &ClosureSets, nesting: usize) -> Result<(), String> {
    if !t.chosen.mcs.extends(&t.input) {
        return Err("chosen maximal set does not extend the input".into());
    }
    check_mcs_trace(&t.chosen, closure, nesting)
}

fn check_mcs_trace(t: &McsTrace, closure: &ClosureSets, nesting: usize) -> Result<(), String> {
    let nesting = nesting + 1;
    if nesting > closure.gamma_rhd_i().len() + 1 {
        return Err(format!("(2)-nodes nest {nesting} deep"));
    }
    t.mcs.check_invariants(closure)?;
    if t.split != DeltaSplit::of(&t.mcs, closure) {
        return Err("recorded split does not match the maximal set".into());
    }
    if t.refutations.len() != t.split.minus.len()
        || t.refutations.iter().zip(&t.split.minus).any(|(r, &z)| r.zeta != z)
    {
        return Err("refutations do not match Δ⁻".into());
    }
    for r in &t.refutations {
        if r.delta_plus != t.split.plus {
            return Err("refutation ran against a different Δ⁺".into());
        }
        check_refute(r, closure, nesting)?;
    }
    Ok(())
}

fn check_refute(t: &RefuteTrace, closure: &ClosureSets, nesting: usize) -> Result<(), String> {
    if t.check_b.len() != t.pair.theta.len()
        || t.check_b.iter().zip(&t.pair.theta).any(|((a, _), b)| a != b)
    {
        return Err("(3)-node does not carry one check per θ".into());
    }
    check_sat(&t.check_a, closure, nesting)?;
    for (_, sub) in &t.check_b {
        check_sat(sub, closure, nesting)?;
    }
    Ok(())
}

/// One decision run over a fixed closure.
pub struct Decider<'c> {
    closure: &'c ClosureSets,
    options: DecideOptions,
    stats: SearchStats,
    memo: HashMap<SignedSet, Option<SatTrace>>,
    // positive φ▷⊥ formulas of each active (2), outermost first
    growth: Vec<Vec<usize>>,
    depth: usize,
}

impl<'c> Decider<'c> {
    pub fn new(closure: &'c ClosureSets, options: DecideOptions) -> Self {
        Decider {
            closure,
            options,
            stats: SearchStats::default(),
            memo: HashMap::new(),
            growth: Vec::new(),
            depth: 0,
        }
    }

    pub fn stats(&self) -> &SearchStats {
        &self.stats
    }

    pub fn into_stats(self) -> SearchStats {
        self.stats
    }

    /// Procedure (1).
    pub fn sat_set(&mut self, delta_pure: &SignedSet) -> Result<Option<SatTrace>, DecideError> {
        self.enter_sat()?;
        let out = self.sat_inner(delta_pure);
        self.depth -= 1;
        out
    }

    /// Procedure (2).
    pub fn check_mcs(&mut self, mcs: &MaxConsistentSet) -> Result<Option<McsTrace>, DecideError> {
        let split = DeltaSplit::of(mcs, self.closure);
        let grown = self.positive_box_bots(&split);
        if let Some(prev) = self.growth.last() {
            let strictly_larger =
                grown.len() > prev.len() && prev.iter().all(|i| grown.binary_search(i).is_ok());
            if !strictly_larger {
                return Err(DecideError::MonotoneGrowth { depth: self.depth });
            }
        }
        let nesting = self.growth.len() + 1;
        let limit = self.closure.gamma_rhd_i().len() + 1;
        if nesting > limit {
            return Err(DecideError::BudgetExceeded {
                depth: nesting,
                budget: limit,
            });
        }
        self.stats.mcs_checks += 1;
        self.stats.max_mcs_nesting = self.stats.max_mcs_nesting.max(nesting);

        self.growth.push(grown);
        let out = self.check_mcs_inner(mcs, split);
        self.growth.pop();
        out
    }

    /// Procedure (3): refute `ζ = χ▷η` in a model of `Δ⁺`.
    pub fn refute_rhd(
        &mut self,
        delta_plus: &[usize],
        zeta: usize,
    ) -> Result<Option<RefuteTrace>, DecideError> {
        let closure = self.closure;
        let Node::Rhd(chi, eta) = *closure.node(zeta) else {
            return Err(DecideError::MalformedClosure(format!(
                "{} is not a ▷-formula",
                closure.formula(zeta)
            )));
        };
        let chi_bb = self.box_bot(chi)?;
        self.stats.refute_calls += 1;

        let bottom = closure.bottom();
        // φ▷⊥ ∈ Δ⁺ forces φ ∈ Σ since ⊥ ∉ Θ
        let mut forced: Vec<usize> = delta_plus
            .iter()
            .filter_map(|&i| match *closure.node(i) {
                Node::Rhd(a, b) if b == bottom => Some(a),
                _ => None,
            })
            .collect();
        forced.sort_unstable();
        let candidates: Vec<usize> = closure
            .gamma_rhd()
            .iter()
            .copied()
            .filter(|&x| x != eta && x != bottom && forced.binary_search(&x).is_err())
            .collect();

        for theta_pos in Combinations::new(candidates.len()) {
            let theta: Vec<usize> = theta_pos.iter().map(|&k| candidates[k]).collect();
            let sigma: Vec<usize> = closure
                .gamma_rhd()
                .iter()
                .copied()
                .filter(|x| !theta.contains(x))
                .collect();
            let covered = delta_plus.iter().all(|&i| match *closure.node(i) {
                Node::Rhd(phi, psi) => sigma.contains(&phi) || theta.contains(&psi),
                _ => false,
            });
            if !covered {
                continue;
            }
            self.stats.pairs_tried += 1;

            let mut base = Vec::with_capacity(2 * sigma.len() + 2);
            for &s in &sigma {
                base.push((s, Sign::Neg));
                base.push((self.box_bot(s)?, Sign::Pos));
            }

            let mut lits = base.clone();
            lits.push((chi, Sign::Pos));
            lits.push((chi_bb, Sign::Pos));
            let Some(check_a) = self.sat_literals(lits)? else {
                continue;
            };

            let mut check_b = Vec::with_capacity(theta.len());
            for &t in &theta {
                let mut lits = base.clone();
                lits.push((t, Sign::Pos));
                lits.push((self.box_bot(t)?, Sign::Pos));
                match self.sat_literals(lits)? {
                    Some(sub) => check_b.push((t, sub)),
                    None => break,
                }
            }
            if check_b.len() < theta.len() {
                continue;
            }

            return Ok(Some(RefuteTrace {
                delta_plus: delta_plus.to_vec(),
                zeta,
                pair: SigmaThetaPair { sigma, theta },
                check_a,
                check_b,
            }));
        }
        Ok(None)
    }

    fn enter_sat(&mut self) -> Result<(), DecideError> {
        self.depth += 1;
        let budget = self.closure.depth_budget();
        if self.depth > budget {
            let depth = self.depth;
            self.depth -= 1;
            return Err(DecideError::BudgetExceeded { depth, budget });
        }
        self.stats.sat_calls += 1;
        self.stats.max_sat_depth = self.stats.max_sat_depth.max(self.depth);
        Ok(())
    }

    /// (1) on a literal list; a clashing list is an inconsistent input and
    /// fails without recursing.
    fn sat_literals(&mut self, lits: Vec<(usize, Sign)>) -> Result<Option<SatTrace>, DecideError> {
        match SignedSet::from_literals(self.closure, lits) {
            Some(s) => self.sat_set(&s),
            None => {
                self.enter_sat()?;
                self.depth -= 1;
                Ok(None)
            }
        }
    }

    fn sat_inner(&mut self, delta_pure: &SignedSet) -> Result<Option<SatTrace>, DecideError> {
        if self.options.memoize {
            if let Some(hit) = self.memo.get(delta_pure) {
                self.stats.memo_hits += 1;
                return Ok(hit.clone());
            }
        }
        let mut found = None;
        for mcs in enumerate_splits(delta_pure, self.closure) {
            if let Some(chosen) = self.check_mcs(&mcs)? {
                found = Some(SatTrace {
                    input: delta_pure.clone(),
                    chosen,
                });
                break;
            }
        }
        if self.options.memoize {
            self.memo.insert(delta_pure.clone(), found.clone());
        }
        Ok(found)
    }

    fn check_mcs_inner(
        &mut self,
        mcs: &MaxConsistentSet,
        split: DeltaSplit,
    ) -> Result<Option<McsTrace>, DecideError> {
        let mut refutations = Vec::with_capacity(split.minus.len());
        for &zeta in &split.minus {
            match self.refute_rhd(&split.plus, zeta)? {
                Some(r) => refutations.push(r),
                None => return Ok(None),
            }
        }
        Ok(Some(McsTrace {
            mcs: mcs.clone(),
            split,
            refutations,
        }))
    }

    fn positive_box_bots(&self, split: &DeltaSplit) -> Vec<usize> {
        let bottom = self.closure.bottom();
        split
            .plus
            .iter()
            .copied()
            .filter(|&i| matches!(*self.closure.node(i), Node::Rhd(_, b) if b == bottom))
            .collect()
    }

    fn box_bot(&self, i: usize) -> Result<usize, DecideError> {
        self.closure.box_bot(i).ok_or_else(|| {
            DecideError::MalformedClosure(format!(
                "({}) |> false is missing from the closure",
                self.closure.formula(i)
            ))
        })
    }
}

/// Subsets of `0..n` in increasing size, lexicographic within a size.
struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    fn new(n: usize) -> Self {
        Combinations {
            n,
            current: Some(Vec::new()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let n = self.n;
        let k = out.len();
        let mut next = out.clone();
        // rightmost position that can still move
        let movable = (0..k).rev().find(|&i| next[i] < n - k + i);
        self.current = match movable {
            Some(i) => {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                Some(next)
            }
            None if k < n => Some((0..k + 1).collect()),
            None => None,
        };
        Some(out)
    }
}

/// Outcome of deciding satisfiability of one formula.
#[derive(Debug, Clone)]
pub struct SatRun {
    pub formula: Formula,
    pub closure: ClosureSets,
    pub trace: Option<SatTrace>,
    pub stats: SearchStats,
}

impl SatRun {
    pub fn is_sat(&self) -> bool {
        self.trace.is_some()
    }
}

/// Decides whether some rooted Veltman model forces `δ`.
pub fn decide_sat(delta: &Formula, options: DecideOptions) -> Result<SatRun, DecideError> {
    let closure = ClosureSets::new(delta);
    let input = SignedSet::from_literals(&closure, [(closure.root(), Sign::Pos)])
        .expect("a single literal never clashes");
    let mut decider = Decider::new(&closure, options);
    let trace = decider.sat_set(&input)?;
    let stats = decider.into_stats();
    Ok(SatRun {
        formula: delta.clone(),
        closure,
        trace,
        stats,
    })
}

/// Outcome of deciding validity: the satisfiability run on `¬δ`.
#[derive(Debug, Clone)]
pub struct ValidityRun {
    pub formula: Formula,
    pub negation: SatRun,
}

impl ValidityRun {
    pub fn is_valid(&self) -> bool {
        !self.negation.is_sat()
    }
}

/// `δ` is valid iff `δ → ⊥` has no rooted model.
pub fn decide_valid(delta: &Formula, options: DecideOptions) -> Result<ValidityRun, DecideError> {
    let negation = decide_sat(&Formula::not(delta.clone()), options)?;
    Ok(ValidityRun {
        formula: delta.clone(),
        negation,
    })
}
