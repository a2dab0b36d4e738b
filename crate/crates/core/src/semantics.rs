//! Finite Veltman models: frame conditions, forcing, JSON encoding and an
//! exhaustive small-model enumerator used as an independent oracle.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::Formula;

/// Largest model size [`enumerate_models`] accepts.
pub const MAX_ORACLE_WORLDS: usize = 4;

/// A finite Veltman model. Worlds are `0..len()`, with display names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VeltmanModel {
    names: Vec<String>,
    root: Option<usize>,
    succ: Vec<BTreeSet<usize>>,
    s: Vec<BTreeSet<(usize, usize)>>,
    valuation: Vec<BTreeSet<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown world {0}")]
    UnknownWorld(String),
    #[error("duplicate world name {0:?}")]
    DuplicateWorld(String),
    #[error("malformed model JSON: {0}")]
    Json(String),
}

impl VeltmanModel {
    pub fn new() -> VeltmanModel {
        VeltmanModel {
            names: Vec::new(),
            root: None,
            succ: Vec::new(),
            s: Vec::new(),
            valuation: Vec::new(),
        }
    }

    /// Adds a world and returns its id.
    pub fn add_world(&mut self, name: impl Into<String>) -> usize {
        self.names.push(name.into());
        self.succ.push(BTreeSet::new());
        self.s.push(BTreeSet::new());
        self.valuation.push(BTreeSet::new());
        self.names.len() - 1
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, w: usize) -> &str {
        &self.names[w]
    }

    pub fn world(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn root(&self) -> Option<usize> {
        self.root
    }

    pub fn set_root(&mut self, w: usize) {
        self.root = Some(w);
    }

    pub fn add_r(&mut self, x: usize, y: usize) {
        self.succ[x].insert(y);
    }

    pub fn r(&self, x: usize, y: usize) -> bool {
        self.succ[x].contains(&y)
    }

    pub fn successors(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        self.succ[x].iter().copied()
    }

    pub fn add_s(&mut self, x: usize, u: usize, v: usize) {
        self.s[x].insert((u, v));
    }

    pub fn s(&self, x: usize, u: usize, v: usize) -> bool {
        self.s[x].contains(&(u, v))
    }

    /// `S_x`-successors of `u`.
    pub fn s_successors(&self, x: usize, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.s[x].range((u, 0)..=(u, usize::MAX)).map(|&(_, v)| v)
    }

    pub fn s_pairs(&self, x: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.s[x].iter().copied()
    }

    pub fn set_true(&mut self, w: usize, atom: impl Into<String>) {
        self.valuation[w].insert(atom.into());
    }

    pub fn valuation(&self, w: usize) -> &BTreeSet<String> {
        &self.valuation[w]
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(|s| s.len()).sum()
    }

    /// Checks the frame conditions; an empty list means the frame is sound.
    pub fn frame_check(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.len();
        for x in 0..n {
            if self.r(x, x) {
                out.push(Violation::Reflexive { x });
            }
            for u in self.successors(x) {
                for v in self.successors(u) {
                    if !self.r(x, v) {
                        out.push(Violation::NotTransitive { x, u, v });
                    }
                    if !self.s(x, u, v) {
                        out.push(Violation::MissingForcedS { x, u, v });
                    }
                }
                if !self.s(x, u, u) {
                    out.push(Violation::SNotReflexive { x, u });
                }
            }
            for (u, v) in self.s_pairs(x) {
                if !self.r(x, u) || !self.r(x, v) {
                    out.push(Violation::SOutsideCone { x, u, v });
                    continue;
                }
                for w in self.s_successors(x, v) {
                    if !self.s(x, u, w) {
                        out.push(Violation::SNotTransitive { x, u, v, w });
                    }
                }
            }
        }
        if let Some(root) = self.root {
            for w in 0..n {
                if w != root && !self.r(root, w) {
                    out.push(Violation::RootMissesWorld { root, w });
                }
            }
        }
        out
    }

    /// Truth value of `φ` at every world, computed bottom-up.
    pub fn truth_table(&self, formula: &Formula) -> Vec<bool> {
        let n = self.len();
        match formula {
            Formula::Atom(p) => (0..n).map(|w| self.valuation[w].contains(p)).collect(),
            Formula::Bottom => vec![false; n],
            Formula::Implies(a, b) => {
                let a = self.truth_table(a);
                let b = self.truth_table(b);
                a.iter().zip(&b).map(|(&a, &b)| !a || b).collect()
            }
            Formula::Rhd(a, b) => {
                let a = self.truth_table(a);
                let b = self.truth_table(b);
                (0..n)
                    .map(|x| {
                        self.successors(x)
                            .filter(|&u| a[u])
                            .all(|u| self.s_successors(x, u).any(|v| b[v]))
                    })
                    .collect()
            }
        }
    }

    /// `M, x ⊩ φ`.
    pub fn model_check(&self, x: usize, formula: &Formula) -> Result<bool, ModelError> {
        if x >= self.len() {
            return Err(ModelError::UnknownWorld(x.to_string()));
        }
        Ok(self.truth_table(formula)[x])
    }

    pub fn to_json_value(&self) -> ModelJson {
        let name = |w: usize| self.names[w].clone();
        ModelJson {
            worlds: self.names.clone(),
            root: self.root.map(name),
            r: (0..self.len())
                .flat_map(|x| self.successors(x).map(move |y| [name(x), name(y)]))
                .collect(),
            s: (0..self.len())
                .map(|x| {
                    let pairs = self.s_pairs(x).map(|(u, v)| [name(u), name(v)]).collect();
                    (name(x), pairs)
                })
                .collect(),
            valuation: (0..self.len())
                .map(|w| (name(w), self.valuation[w].iter().cloned().collect()))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("model serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("model serializes")
    }

    pub fn from_json_value(json: &ModelJson) -> Result<VeltmanModel, ModelError> {
        let mut m = VeltmanModel::new();
        let mut ids: HashMap<&str, usize> = HashMap::new();
        for name in &json.worlds {
            if ids.insert(name, m.add_world(name.clone())).is_some() {
                return Err(ModelError::DuplicateWorld(name.clone()));
            }
        }
        let lookup = |name: &str| {
            ids.get(name)
                .copied()
                .ok_or_else(|| ModelError::UnknownWorld(name.to_string()))
        };
        if let Some(root) = &json.root {
            m.root = Some(lookup(root)?);
        }
        for [x, y] in &json.r {
            m.add_r(lookup(x)?, lookup(y)?);
        }
        for (x, pairs) in &json.s {
            let x = lookup(x)?;
            for [u, v] in pairs {
                m.add_s(x, lookup(u)?, lookup(v)?);
            }
        }
        for (w, atoms) in &json.valuation {
            let w = lookup(w)?;
            for a in atoms {
                m.set_true(w, a.clone());
            }
        }
        Ok(m)
    }

    pub fn from_json(text: &str) -> Result<VeltmanModel, ModelError> {
        let json: ModelJson =
            serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
        VeltmanModel::from_json_value(&json)
    }
}

impl Default for VeltmanModel {
    fn default() -> Self {
        VeltmanModel::new()
    }
}

/// Wire format of a model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelJson {
    pub worlds: Vec<String>,
    #[serde(default)]
    pub root: Option<String>,
    #[serde(rename = "R")]
    pub r: Vec<[String; 2]>,
    #[serde(rename = "S")]
    pub s: IndexMap<String, Vec<[String; 2]>>,
    pub valuation: IndexMap<String, Vec<String>>,
}

/// A violated frame condition, with the offending worlds.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    /// `xRx`: `R` is not converse well-founded.
    Reflexive { x: usize },
    NotTransitive { x: usize, u: usize, v: usize },
    /// Condition a: `uS_xv` without `xRu` and `xRv`.
    SOutsideCone { x: usize, u: usize, v: usize },
    /// Condition b: `S_x` is not reflexive on the cone of `x`.
    SNotReflexive { x: usize, u: usize },
    /// Condition b: `S_x` is not transitive.
    SNotTransitive { x: usize, u: usize, v: usize, w: usize },
    /// Condition c: `xRuRv` without `uS_xv`.
    MissingForcedS { x: usize, u: usize, v: usize },
    RootMissesWorld { root: usize, w: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::Reflexive { x } => write!(f, "R is reflexive at {x}"),
            Violation::NotTransitive { x, u, v } => {
                write!(f, "R not transitive: {x}R{u}R{v} but not {x}R{v}")
            }
            Violation::SOutsideCone { x, u, v } => {
                write!(f, "condition a: {u} S_{x} {v} outside the R-cone of {x}")
            }
            Violation::SNotReflexive { x, u } => {
                write!(f, "condition b: S_{x} not reflexive at {u}")
            }
            Violation::SNotTransitive { x, u, v, w } => {
                write!(f, "condition b: {u} S_{x} {v} S_{x} {w} but not {u} S_{x} {w}")
            }
            Violation::MissingForcedS { x, u, v } => {
                write!(f, "condition c: {x}R{u}R{v} but not {u} S_{x} {v}")
            }
            Violation::RootMissesWorld { root, w } => {
                write!(f, "root {root} does not see {w}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("max_worlds {0} outside 1..={MAX_ORACLE_WORLDS}")]
    CapExceeded(usize),
    #[error("{0} atoms is too many for exhaustive valuations")]
    TooManyAtoms(usize),
}

/// Strict partial orders on `1..n`, each as a list of edges.
fn inner_orders(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (1..n)
        .flat_map(|a| (1..n).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect();
    let mut out = Vec::new();
    for bits in 0u32..(1 << pairs.len()) {
        let rel: BTreeSet<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(k, _)| bits >> k & 1 == 1)
            .map(|(_, &p)| p)
            .collect();
        let transitive = rel.iter().all(|&(a, b)| {
            rel.iter()
                .filter(|&&(c, _)| c == b)
                .all(|&(_, d)| a != d && rel.contains(&(a, d)))
        });
        if transitive {
            out.push(rel.into_iter().collect());
        }
    }
    out
}

/// Every admissible `S_x` for a frame `R`: supersets of the forced core
/// inside the cone of `x`, filtered to transitive relations.
fn s_options(n: usize, r: &BTreeSet<(usize, usize)>, x: usize) -> Vec<Vec<(usize, usize)>> {
    let cone: Vec<usize> = (0..n).filter(|&u| r.contains(&(x, u))).collect();
    let mut forced: BTreeSet<(usize, usize)> = cone.iter().map(|&u| (u, u)).collect();
    for &u in &cone {
        for &v in &cone {
            if r.contains(&(u, v)) {
                forced.insert((u, v));
            }
        }
    }
    let free: Vec<(usize, usize)> = cone
        .iter()
        .flat_map(|&u| cone.iter().map(move |&v| (u, v)))
        .filter(|p| !forced.contains(p))
        .collect();
    let mut out = Vec::new();
    for bits in 0u32..(1 << free.len()) {
        let mut rel = forced.clone();
        for (k, &p) in free.iter().enumerate() {
            if bits >> k & 1 == 1 {
                rel.insert(p);
            }
        }
        let transitive = rel.iter().all(|&(a, b)| {
            rel.range((b, 0)..=(b, usize::MAX))
                .all(|&(_, c)| rel.contains(&(a, c)))
        });
        if transitive {
            out.push(rel.into_iter().collect());
        }
    }
    out
}

/// Lazy stream of every rooted model up to a size bound; see
/// [`enumerate_models`].
pub struct ModelStream {
    atoms: Vec<String>,
    max_worlds: usize,
    n: usize,
    orders: Vec<Vec<(usize, usize)>>,
    order_ix: usize,
    // per world, the admissible S_x for the current R
    s_choices: Vec<Vec<Vec<(usize, usize)>>>,
    s_ix: Vec<usize>,
    valuation_bits: u64,
    started: bool,
}

impl ModelStream {
    fn load_size(&mut self, n: usize) {
        self.n = n;
        self.orders = inner_orders(n);
        self.order_ix = 0;
        self.load_frame();
    }

    fn load_frame(&mut self) {
        let n = self.n;
        let mut r: BTreeSet<(usize, usize)> = self.orders[self.order_ix].iter().copied().collect();
        for w in 1..n {
            r.insert((0, w));
        }
        self.s_choices = (0..n).map(|x| s_options(n, &r, x)).collect();
        self.s_ix = vec![0; n];
        self.valuation_bits = 0;
    }

    fn build(&self) -> VeltmanModel {
        let mut m = VeltmanModel::new();
        for w in 0..self.n {
            m.add_world(format!("w{w}"));
        }
        m.set_root(0);
        for w in 1..self.n {
            m.add_r(0, w);
        }
        for &(a, b) in &self.orders[self.order_ix] {
            m.add_r(a, b);
        }
        for x in 0..self.n {
            for &(u, v) in &self.s_choices[x][self.s_ix[x]] {
                m.add_s(x, u, v);
            }
        }
        for w in 0..self.n {
            for (k, atom) in self.atoms.iter().enumerate() {
                if self.valuation_bits >> (w * self.atoms.len() + k) & 1 == 1 {
                    m.set_true(w, atom.clone());
                }
            }
        }
        m
    }

    // Odometer step: valuation fastest, then S choices, then R, then size.
    fn step(&mut self) -> bool {
        let val_bits = self.n * self.atoms.len();
        if self.valuation_bits + 1 < 1u64 << val_bits {
            self.valuation_bits += 1;
            return true;
        }
        self.valuation_bits = 0;
        for x in 0..self.n {
            if self.s_ix[x] + 1 < self.s_choices[x].len() {
                self.s_ix[x] += 1;
                return true;
            }
            self.s_ix[x] = 0;
        }
        if self.order_ix + 1 < self.orders.len() {
            self.order_ix += 1;
            self.load_frame();
            return true;
        }
        if self.n < self.max_worlds {
            self.load_size(self.n + 1);
            return true;
        }
        false
    }
}

impl Iterator for ModelStream {
    type Item = VeltmanModel;

    fn next(&mut self) -> Option<VeltmanModel> {
        if self.started {
            if !self.step() {
                return None;
            }
        } else {
            self.started = true;
        }
        Some(self.build())
    }
}

/// Every rooted Veltman model with `1..=max_worlds` worlds over `atoms`,
/// root `w0`, without isomorphism reduction.
pub fn enumerate_models(
    max_worlds: usize,
    atoms: &BTreeSet<String>,
) -> Result<ModelStream, OracleError> {
    if max_worlds == 0 || max_worlds > MAX_ORACLE_WORLDS {
        return Err(OracleError::CapExceeded(max_worlds));
    }
    if max_worlds * atoms.len() >= 64 {
        return Err(OracleError::TooManyAtoms(atoms.len()));
    }
    let mut stream = ModelStream {
        atoms: atoms.iter().cloned().collect(),
        max_worlds,
        n: 0,
        orders: Vec::new(),
        order_ix: 0,
        s_choices: Vec::new(),
        s_ix: Vec::new(),
        valuation_bits: 0,
        started: false,
    };
    stream.load_size(1);
    Ok(stream)
}

/// First enumerated model whose root forces `φ`. `None` only means no model
/// exists up to the bound.
pub fn oracle_sat(formula: &Formula, max_worlds: usize) -> Result<Option<VeltmanModel>, OracleError> {
    let atoms = formula.vars();
    Ok(enumerate_models(max_worlds, &atoms)?.find(|m| m.truth_table(formula)[0]))
}
