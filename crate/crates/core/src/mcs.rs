//! Propositional reasoning over `Γpure` with `▷`-formulas as opaque atoms.
//!
//! Every propositional variable of `Γpure` and every member of `Γ▷ᴵ` is an
//! abstract atom. A truth assignment to the atoms fixes the truth value of
//! every formula of `Γpure`, so maximal Boolean consistent subsets of `Γ±`
//! correspond one-to-one to assignments satisfying the given signed
//! constraints. Both are enumerated by depth-first backtracking with
//! three-valued propagation; nothing but the current branch is kept.

use std::fmt;

use crate::closure::{ClosureSets, Node};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn from_bool(b: bool) -> Sign {
        if b {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }

    pub fn is_pos(self) -> bool {
        self == Sign::Pos
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.is_pos() { "+" } else { "-" })
    }
}

/// A partial signing of `Γpure`: `(φ,+)` stands for `φ`, `(φ,−)` for `¬φ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignedSet {
    signs: Vec<Option<Sign>>,
}

impl SignedSet {
    pub fn empty(closure: &ClosureSets) -> SignedSet {
        SignedSet {
            signs: vec![None; closure.len()],
        }
    }

    /// Builds a signed set, or `None` if some formula would get both signs.
    pub fn from_literals(
        closure: &ClosureSets,
        literals: impl IntoIterator<Item = (usize, Sign)>,
    ) -> Option<SignedSet> {
        let mut s = SignedSet::empty(closure);
        for (i, sign) in literals {
            if !s.insert(i, sign) {
                return None;
            }
        }
        Some(s)
    }

    /// Adds a literal. Returns `false`, leaving the set unchanged, if the
    /// formula already carries the opposite sign.
    pub fn insert(&mut self, i: usize, sign: Sign) -> bool {
        match self.signs[i] {
            Some(s) if s != sign => false,
            _ => {
                self.signs[i] = Some(sign);
                true
            }
        }
    }

    pub fn get(&self, i: usize) -> Option<Sign> {
        self.signs[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Sign)> + '_ {
        self.signs
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|s| (i, s)))
    }

    pub fn len(&self) -> usize {
        self.signs.iter().filter(|s| s.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn render(&self, closure: &ClosureSets) -> String {
        let items: Vec<String> = self
            .iter()
            .map(|(i, s)| match s {
                Sign::Pos => closure.formula(i).to_string(),
                Sign::Neg => format!("¬({})", closure.formula(i)),
            })
            .collect();
        format!("{{{}}}", items.join(", "))
    }
}

/// A total, propositionally consistent signing of `Γpure`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MaxConsistentSet {
    values: Vec<bool>,
}

impl MaxConsistentSet {
    pub fn sign(&self, i: usize) -> Sign {
        Sign::from_bool(self.values[i])
    }

    pub fn holds(&self, i: usize) -> bool {
        self.values[i]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Variables signed `+`.
    pub fn true_vars<'c>(&self, closure: &'c ClosureSets) -> Vec<&'c str> {
        closure
            .vars()
            .iter()
            .filter(|&&i| self.values[i])
            .filter_map(|&i| match closure.node(i) {
                Node::Var(name) => Some(name.as_str()),
                _ => None,
            })
            .collect()
    }

    pub fn extends(&self, s: &SignedSet) -> bool {
        s.iter().all(|(i, sign)| self.sign(i) == sign)
    }

    /// Checks totality, `⊥` negative and Boolean coherence of implications.
    pub fn check_invariants(&self, closure: &ClosureSets) -> Result<(), String> {
        if self.values.len() != closure.len() {
            return Err(format!(
                "signing covers {} formulas, closure has {}",
                self.values.len(),
                closure.len()
            ));
        }
        if self.values[closure.bottom()] {
            return Err("⊥ is signed +".into());
        }
        for i in 0..closure.len() {
            if let Node::Implies(a, b) = *closure.node(i) {
                if self.values[i] != (!self.values[a] || self.values[b]) {
                    return Err(format!("incoherent sign on {}", closure.formula(i)));
                }
            }
        }
        Ok(())
    }
}

/// The abstraction alphabet: variables first, then `Γ▷ᴵ`, in index order.
pub fn abstract_atoms(closure: &ClosureSets) -> Vec<usize> {
    closure
        .vars()
        .iter()
        .chain(closure.gamma_rhd_i())
        .copied()
        .collect()
}

/// Kleene evaluation of `Γpure` under a partial assignment to the atoms.
/// Entries of `assign` at non-atom positions are ignored.
fn eval_partial(closure: &ClosureSets, assign: &[Option<bool>], out: &mut [Option<bool>]) {
    for i in 0..closure.len() {
        out[i] = match *closure.node(i) {
            Node::Var(_) | Node::Rhd(..) => assign[i],
            Node::Bottom => Some(false),
            Node::Implies(a, b) => match (out[a], out[b]) {
                (Some(false), _) | (_, Some(true)) => Some(true),
                (Some(true), Some(false)) => Some(false),
                _ => None,
            },
        };
    }
}

fn violates(values: &[Option<bool>], constraints: &[(usize, bool)]) -> bool {
    constraints
        .iter()
        .any(|&(i, want)| values[i] == Some(!want))
}

/// Lazy depth-first enumeration of the assignments to `order` that do not
/// falsify any constraint, branching `true` before `false`.
struct AssignmentSearch<'c> {
    closure: &'c ClosureSets,
    constraints: Vec<(usize, bool)>,
    order: Vec<usize>,
    assign: Vec<Option<bool>>,
    scratch: Vec<Option<bool>>,
    trail: Vec<bool>,
    descend: bool,
    done: bool,
}

impl<'c> AssignmentSearch<'c> {
    fn new(
        closure: &'c ClosureSets,
        constraints: Vec<(usize, bool)>,
        order: Vec<usize>,
        assign: Vec<Option<bool>>,
    ) -> Self {
        AssignmentSearch {
            closure,
            constraints,
            order,
            assign,
            scratch: vec![None; closure.len()],
            trail: Vec::new(),
            descend: true,
            done: false,
        }
    }

    /// Advances to the next surviving leaf; the leaf assignment is left in
    /// `self.assign` and its evaluation in `self.scratch`.
    fn advance(&mut self) -> bool {
        loop {
            if self.done {
                return false;
            }
            if self.descend {
                eval_partial(self.closure, &self.assign, &mut self.scratch);
                if violates(&self.scratch, &self.constraints) {
                    self.descend = false;
                    continue;
                }
                let level = self.trail.len();
                if level == self.order.len() {
                    self.descend = false;
                    return true;
                }
                self.assign[self.order[level]] = Some(true);
                self.trail.push(true);
            } else {
                match self.trail.pop() {
                    None => {
                        self.done = true;
                        return false;
                    }
                    Some(true) => {
                        let atom = self.order[self.trail.len()];
                        self.assign[atom] = Some(false);
                        self.trail.push(false);
                        self.descend = true;
                    }
                    Some(false) => {
                        let atom = self.order[self.trail.len()];
                        self.assign[atom] = None;
                    }
                }
            }
        }
    }

    fn current(&self) -> MaxConsistentSet {
        MaxConsistentSet {
            values: self
                .scratch
                .iter()
                .map(|v| v.expect("total assignment evaluates every formula"))
                .collect(),
        }
    }
}

fn constraints_of(s: &SignedSet) -> Vec<(usize, bool)> {
    s.iter().map(|(i, sign)| (i, sign.is_pos())).collect()
}

/// True iff some assignment to the abstract atoms satisfies every literal.
pub fn is_prop_consistent(s: &SignedSet, closure: &ClosureSets) -> bool {
    let mut search = AssignmentSearch::new(
        closure,
        constraints_of(s),
        abstract_atoms(closure),
        vec![None; closure.len()],
    );
    search.advance()
}

/// Stream of all maximal Boolean consistent extensions of a signed set.
pub struct McsStream<'c> {
    search: AssignmentSearch<'c>,
}

impl Iterator for McsStream<'_> {
    type Item = MaxConsistentSet;

    fn next(&mut self) -> Option<MaxConsistentSet> {
        if !self.search.advance() {
            return None;
        }
        let mcs = self.search.current();
        #[cfg(debug_assertions)]
        if let Err(e) = mcs.check_invariants(self.search.closure) {
            panic!("emitted signing violates invariants: {e}");
        }
        Some(mcs)
    }
}

/// Enumerates every maximal Boolean consistent extension of `delta_pure`.
///
/// Every atom is itself a member of `Γpure`, so distinct assignments give
/// distinct signings and no deduplication is needed.
pub fn enumerate_mcs<'c>(delta_pure: &SignedSet, closure: &'c ClosureSets) -> McsStream<'c> {
    McsStream {
        search: AssignmentSearch::new(
            closure,
            constraints_of(delta_pure),
            abstract_atoms(closure),
            vec![None; closure.len()],
        ),
    }
}

/// Stream of consistent extensions, one per distinct signing of `Γ▷ᴵ`.
///
/// Branches on the `Γ▷ᴵ` atoms first and completes each surviving branch
/// with the first consistent choice of variables. Extensions that agree on
/// `Γ▷ᴵ` have the same `Δ⁺`/`Δ⁻` split, so the search only needs one of them.
pub struct SplitStream<'c> {
    outer: AssignmentSearch<'c>,
}

impl Iterator for SplitStream<'_> {
    type Item = MaxConsistentSet;

    fn next(&mut self) -> Option<MaxConsistentSet> {
        while self.outer.advance() {
            let closure = self.outer.closure;
            let mut inner = AssignmentSearch::new(
                closure,
                self.outer.constraints.clone(),
                closure.vars().to_vec(),
                self.outer.assign.clone(),
            );
            if inner.advance() {
                let mcs = inner.current();
                #[cfg(debug_assertions)]
                if let Err(e) = mcs.check_invariants(closure) {
                    panic!("emitted signing violates invariants: {e}");
                }
                return Some(mcs);
            }
        }
        None
    }
}

pub fn enumerate_splits<'c>(delta_pure: &SignedSet, closure: &'c ClosureSets) -> SplitStream<'c> {
    SplitStream {
        outer: AssignmentSearch::new(
            closure,
            constraints_of(delta_pure),
            closure.gamma_rhd_i().to_vec(),
            vec![None; closure.len()],
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::compute_closure;
    use crate::formula::{parse, Formula};
    use std::collections::BTreeSet;

    fn closure(s: &str) -> ClosureSets {
        compute_closure(&parse(s).unwrap())
    }

    fn ix(c: &ClosureSets, s: &str) -> usize {
        c.index_of(&parse(s).unwrap()).unwrap()
    }

    /// Brute force over all 2^n atom assignments, evaluated classically.
    fn brute_force(s: &SignedSet, c: &ClosureSets) -> BTreeSet<MaxConsistentSet> {
        let atoms = abstract_atoms(c);
        let mut out = BTreeSet::new();
        for bits in 0u64..(1 << atoms.len()) {
            let mut values = vec![false; c.len()];
            let mut atom_pos = 0;
            for i in 0..c.len() {
                values[i] = match *c.node(i) {
                    Node::Var(_) | Node::Rhd(..) => {
                        let k = atoms.iter().position(|&a| a == i).unwrap();
                        atom_pos += 1;
                        bits >> k & 1 == 1
                    }
                    Node::Bottom => false,
                    Node::Implies(a, b) => !values[a] || values[b],
                };
            }
            assert_eq!(atom_pos, atoms.len());
            if s.iter().all(|(i, sign)| values[i] == sign.is_pos()) {
                out.insert(MaxConsistentSet { values });
            }
        }
        out
    }

    #[test]
    fn abstraction_alphabet() {
        let c = closure("p |> q");
        let atoms: BTreeSet<Formula> = abstract_atoms(&c)
            .into_iter()
            .map(|i| c.formula(i).clone())
            .collect();
        let expected: BTreeSet<Formula> = ["p", "q", "p |> q", "p |> false", "q |> false"]
            .iter()
            .map(|s| parse(s).unwrap())
            .collect();
        assert_eq!(atoms, expected);

        assert_eq!(abstract_atoms(&closure("p")).len(), 1);
        // the repeated ▷-subformula is one atom
        let atoms: BTreeSet<Formula> = {
            let c = closure("(p |> q) -> (p |> q)");
            abstract_atoms(&c).into_iter().map(|i| c.formula(i).clone()).collect()
        };
        assert_eq!(atoms, expected);
    }

    #[test]
    fn consistency_examples() {
        let c = closure("p |> q");
        let bot = SignedSet::from_literals(&c, [(c.bottom(), Sign::Pos)]).unwrap();
        assert!(!is_prop_consistent(&bot, &c));

        let s = SignedSet::from_literals(&c, [(ix(&c, "p"), Sign::Pos), (ix(&c, "p |> q"), Sign::Neg)])
            .unwrap();
        assert!(is_prop_consistent(&s, &c));

        let c = closure("~p");
        let s = SignedSet::from_literals(&c, [(ix(&c, "~p"), Sign::Pos), (ix(&c, "p"), Sign::Pos)])
            .unwrap();
        assert!(!is_prop_consistent(&s, &c));
    }

    #[test]
    fn clashing_literals_are_rejected() {
        let c = closure("p");
        let p = ix(&c, "p");
        assert!(SignedSet::from_literals(&c, [(p, Sign::Pos), (p, Sign::Neg)]).is_none());
        let mut s = SignedSet::empty(&c);
        assert!(s.insert(p, Sign::Neg));
        assert!(s.insert(p, Sign::Neg));
        assert!(!s.insert(p, Sign::Pos));
        assert_eq!(s.get(p), Some(Sign::Neg));
    }

    #[test]
    fn enumeration_examples() {
        let c = closure("p");
        let s = SignedSet::from_literals(&c, [(ix(&c, "p"), Sign::Pos)]).unwrap();
        let all: Vec<_> = enumerate_mcs(&s, &c).collect();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].sign(ix(&c, "p")), Sign::Pos);
        assert_eq!(all[0].sign(c.bottom()), Sign::Neg);

        let s = SignedSet::from_literals(&c, [(c.bottom(), Sign::Pos)]).unwrap();
        assert_eq!(enumerate_mcs(&s, &c).count(), 0);

        // 16 = free signs for p, q, p▷⊥, q▷⊥ (brute force over 2^5, filtered)
        let c = closure("p |> q");
        let s = SignedSet::from_literals(&c, [(ix(&c, "p |> q"), Sign::Pos)]).unwrap();
        let oracle = brute_force(&s, &c);
        assert_eq!(oracle.len(), 16);
        let streamed: Vec<_> = enumerate_mcs(&s, &c).collect();
        assert_eq!(streamed.len(), 16);
        assert_eq!(streamed.into_iter().collect::<BTreeSet<_>>(), oracle);
    }

    #[test]
    fn enumeration_order_is_plus_first() {
        let c = closure("p -> q");
        let first = enumerate_mcs(&SignedSet::empty(&c), &c).next().unwrap();
        assert!(first.holds(ix(&c, "p")) && first.holds(ix(&c, "q")));
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for text in [
            "p",
            "false",
            "true",
            "~(p |> q)",
            "(p |> q) & (q |> r) -> p |> r",
            "box (box p -> p) -> box p",
            "dia p & box ~p",
            "p & ~p",
            "(p -> q) |> (dia q -> r)",
        ] {
            let c = closure(text);
            for sign in [Sign::Pos, Sign::Neg] {
                let s = SignedSet::from_literals(&c, [(c.root(), sign)]).unwrap();
                let oracle = brute_force(&s, &c);
                let streamed: Vec<_> = enumerate_mcs(&s, &c).collect();
                assert_eq!(streamed.len(), oracle.len(), "{text} {sign}");
                assert_eq!(streamed.into_iter().collect::<BTreeSet<_>>(), oracle);
                assert_eq!(is_prop_consistent(&s, &c), !oracle.is_empty());
            }
        }
    }

    #[test]
    fn splits_cover_every_rhd_signing_once() {
        for text in ["(p |> q) & (q |> r) -> p |> r", "dia p -> box (p | q)", "p & q"] {
            let c = closure(text);
            let s = SignedSet::from_literals(&c, [(c.root(), Sign::Neg)]).unwrap();
            let project = |m: &MaxConsistentSet| -> Vec<bool> {
                c.gamma_rhd_i().iter().map(|&i| m.holds(i)).collect()
            };
            let full: BTreeSet<Vec<bool>> = enumerate_mcs(&s, &c).map(|m| project(&m)).collect();
            let splits: Vec<MaxConsistentSet> = enumerate_splits(&s, &c).collect();
            let projected: BTreeSet<Vec<bool>> = splits.iter().map(project).collect();
            assert_eq!(projected.len(), splits.len());
            assert_eq!(projected, full);
            assert!(splits.iter().all(|m| m.extends(&s)));
        }
    }

    #[test]
    fn every_emission_is_maximal() {
        // Emissions are total; flipping a non-atom breaks coherence, so no
        // consistent proper superset exists.
        let c = closure("(p |> q) -> dia (p -> q)");
        let s = SignedSet::from_literals(&c, [(c.root(), Sign::Pos)]).unwrap();
        for m in enumerate_mcs(&s, &c) {
            assert_eq!(m.len(), c.len());
            for i in 0..c.len() {
                if matches!(c.node(i), Node::Var(_) | Node::Rhd(..)) {
                    continue;
                }
                let mut flipped = m.clone();
                flipped.values[i] = !flipped.values[i];
                assert!(flipped.check_invariants(&c).is_err());
            }
        }
    }
}
