//! Closure sets of an input formula.
//!
//! For an input `δ` this computes
//!
//! * `Γ▷`    – every formula occurring as an argument of a `▷`-subformula,
//! * `Γpure` – `Sub(δ) ∪ {⊥} ∪ {φ▷⊥ : φ ∈ Γ▷}`,
//! * `Γ▷ᴵ`   – the `▷`-formulas of `Γpure`.
//!
//! The signed closure `Γ±` is never materialized; it is the set of signed
//! indices into `Γpure` (see [`crate::mcs`]).
//!
//! `Γpure` is stored as a DAG in index order: formulas are sorted by size,
//! then by printed form, so every child index is smaller than its parent's.

use std::collections::HashMap;

use serde::Serialize;

use crate::formula::Formula;

/// One entry of `Γpure`, with children as indices into the same table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Var(String),
    Bottom,
    Implies(usize, usize),
    Rhd(usize, usize),
}

#[derive(Debug, Clone)]
pub struct ClosureSets {
    root: usize,
    pure: Vec<Formula>,
    nodes: Vec<Node>,
    index: HashMap<Formula, usize>,
    rhd_args: Vec<usize>,
    rhd_i: Vec<usize>,
    vars: Vec<usize>,
    bottom: usize,
    // `box_bot[i]` is the index of `φ▷⊥` for `φ = pure[i]`, when present.
    box_bot: Vec<Option<usize>>,
}

/// Serialized form of the closure, formulas rendered in surface syntax.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClosureDump {
    pub gamma_rhd: Vec<String>,
    pub gamma_pure: Vec<String>,
    pub gamma_rhd_i: Vec<String>,
}

fn sort_key(f: &Formula) -> (usize, String) {
    (f.size(), f.to_string())
}

impl ClosureSets {
    pub fn new(delta: &Formula) -> ClosureSets {
        let sub = delta.subformulas();

        let mut args: Vec<Formula> = Vec::new();
        for f in &sub {
            if let Formula::Rhd(a, b) = f {
                args.push((**a).clone());
                args.push((**b).clone());
            }
        }
        args.sort_by_cached_key(sort_key);
        args.dedup();

        let mut pure: Vec<Formula> = sub.iter().cloned().collect();
        pure.push(Formula::Bottom);
        for a in &args {
            pure.push(Formula::rhd(a.clone(), Formula::Bottom));
        }
        pure.sort_by_cached_key(sort_key);
        pure.dedup();

        let index: HashMap<Formula, usize> =
            pure.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect();

        let nodes: Vec<Node> = pure
            .iter()
            .map(|f| match f {
                Formula::Atom(p) => Node::Var(p.clone()),
                Formula::Bottom => Node::Bottom,
                Formula::Implies(a, b) => Node::Implies(index[&**a], index[&**b]),
                Formula::Rhd(a, b) => Node::Rhd(index[&**a], index[&**b]),
            })
            .collect();

        let rhd_args: Vec<usize> = args.iter().map(|a| index[a]).collect();
        let rhd_i: Vec<usize> = (0..pure.len())
            .filter(|&i| matches!(nodes[i], Node::Rhd(..)))
            .collect();
        let vars: Vec<usize> = (0..pure.len())
            .filter(|&i| matches!(nodes[i], Node::Var(_)))
            .collect();
        let bottom = index[&Formula::Bottom];

        let mut box_bot = vec![None; pure.len()];
        for &i in &rhd_i {
            if let Node::Rhd(a, b) = nodes[i] {
                if b == bottom {
                    box_bot[a] = Some(i);
                }
            }
        }

        ClosureSets {
            root: index[delta],
            pure,
            nodes,
            index,
            rhd_args,
            rhd_i,
            vars,
            bottom,
            box_bot,
        }
    }

    /// Index of the input formula `δ`.
    pub fn root(&self) -> usize {
        self.root
    }

    pub fn formula(&self, i: usize) -> &Formula {
        &self.pure[i]
    }

    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    pub fn len(&self) -> usize {
        self.pure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pure.is_empty()
    }

    pub fn index_of(&self, f: &Formula) -> Option<usize> {
        self.index.get(f).copied()
    }

    /// `Γpure`, in index order.
    pub fn gamma_pure(&self) -> &[Formula] {
        &self.pure
    }

    /// `Γ▷` as indices into `Γpure`.
    pub fn gamma_rhd(&self) -> &[usize] {
        &self.rhd_args
    }

    /// `Γ▷ᴵ` as indices into `Γpure`.
    pub fn gamma_rhd_i(&self) -> &[usize] {
        &self.rhd_i
    }

    /// Indices of the propositional variables in `Γpure`.
    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    /// Index of `φ▷⊥` for the formula at index `i`.
    pub fn box_bot(&self, i: usize) -> Option<usize> {
        self.box_bot[i]
    }

    /// Recursion budget for the decision procedure: `|Γ▷ᴵ| + 2`.
    pub fn depth_budget(&self) -> usize {
        self.rhd_i.len() + 2
    }

    pub fn dump(&self) -> ClosureDump {
        let render = |ix: &[usize]| ix.iter().map(|&i| self.pure[i].to_string()).collect();
        ClosureDump {
            gamma_rhd: render(&self.rhd_args),
            gamma_pure: self.pure.iter().map(|f| f.to_string()).collect(),
            gamma_rhd_i: render(&self.rhd_i),
        }
    }
}

/// `compute_closure(δ)`.
pub fn compute_closure(delta: &Formula) -> ClosureSets {
    ClosureSets::new(delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use std::collections::BTreeSet;

    fn set(items: &[&str]) -> BTreeSet<Formula> {
        items.iter().map(|s| parse(s).unwrap()).collect()
    }

    fn collect(c: &ClosureSets, ix: &[usize]) -> BTreeSet<Formula> {
        ix.iter().map(|&i| c.formula(i).clone()).collect()
    }

    #[test]
    fn closure_of_plain_rhd() {
        let c = compute_closure(&parse("p |> q").unwrap());
        assert_eq!(collect(&c, c.gamma_rhd()), set(&["p", "q"]));
        assert_eq!(
            c.gamma_pure().iter().cloned().collect::<BTreeSet<_>>(),
            set(&["p", "q", "p |> q", "false", "p |> false", "q |> false"])
        );
        assert_eq!(
            collect(&c, c.gamma_rhd_i()),
            set(&["p |> q", "p |> false", "q |> false"])
        );
        assert_eq!(c.depth_budget(), 5);
    }

    #[test]
    fn closure_of_atom() {
        let c = compute_closure(&parse("p").unwrap());
        assert!(c.gamma_rhd().is_empty());
        assert_eq!(c.gamma_pure().len(), 2);
        assert!(c.gamma_rhd_i().is_empty());
        assert_eq!(c.formula(c.root()), &parse("p").unwrap());
    }

    #[test]
    fn bottom_as_rhd_argument() {
        let c = compute_closure(&parse("dia p").unwrap());
        assert_eq!(collect(&c, c.gamma_rhd()), set(&["p", "false"]));
        assert_eq!(
            c.gamma_pure().iter().cloned().collect::<BTreeSet<_>>(),
            set(&["p", "false", "p |> false", "dia p", "false |> false"])
        );
        assert_eq!(
            collect(&c, c.gamma_rhd_i()),
            set(&["p |> false", "false |> false"])
        );
    }

    #[test]
    fn indices_are_topological_and_deterministic() {
        let f = parse("(p |> q) & box (q -> p) -> dia r").unwrap();
        let a = compute_closure(&f);
        let b = compute_closure(&f);
        assert_eq!(a.gamma_pure(), b.gamma_pure());
        for i in 0..a.len() {
            match *a.node(i) {
                Node::Implies(l, r) | Node::Rhd(l, r) => assert!(l < i && r < i),
                _ => {}
            }
        }
        for &x in a.gamma_rhd() {
            assert!(a.box_bot(x).is_some());
        }
    }

    #[test]
    fn dump_renders_formulas() {
        let c = compute_closure(&parse("p |> q").unwrap());
        let d = c.dump();
        assert_eq!(d.gamma_rhd, vec!["p", "q"]);
        assert_eq!(d.gamma_pure[0], "false");
        let json = serde_json::to_string(&d).unwrap();
        assert!(json.starts_with("{\"gamma_rhd\":[\"p\",\"q\"],\"gamma_pure\":["));
    }
}
