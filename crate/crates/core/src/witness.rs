//! Countermodel extraction from accepting decision traces.
//!
//! Models are assembled bottom-up:
//!
//! * a (3)-node takes the disjoint union of its check (a) model and its
//!   check (b) models, adds a fresh root that `R`-sees every world, and lets
//!   `S` of the new root relate every pair of the old worlds;
//! * a (2)-node builds one such model per refuted `ζ` and merges all their
//!   roots into a single world valued by the chosen maximal set;
//! * a (1)-node is its (2)-node's model.
//!
//! `R` never crosses between merged components, so forcing inside each
//! component is unchanged by the merge.

use thiserror::Error;

use crate::closure::ClosureSets;
use crate::decide::{DecisionTrace, McsTrace, RefuteTrace, SatTrace};
use crate::formula::Formula;
use crate::semantics::{VeltmanModel, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessError {
    #[error("malformed trace: {0}")]
    MalformedTrace(String),
}

/// A built model together with the trace node each world came from.
#[derive(Debug, Clone)]
pub struct WitnessBuild {
    pub model: VeltmanModel,
    pub root: usize,
    pub provenance: Vec<String>,
}

struct Builder<'c> {
    closure: &'c ClosureSets,
    model: VeltmanModel,
    provenance: Vec<String>,
}

impl Builder<'_> {
    fn world(&mut self, name: String, origin: String) -> usize {
        self.provenance.push(origin);
        self.model.add_world(name)
    }

    fn sat(&mut self, t: &SatTrace, path: &str) -> Result<usize, WitnessError> {
        self.mcs(&t.chosen, path)
    }

    fn mcs(&mut self, t: &McsTrace, path: &str) -> Result<usize, WitnessError> {
        if t.refutations.len() != t.split.minus.len() {
            return Err(WitnessError::MalformedTrace(format!(
                "{path}: {} refutations for {} negated ▷-formulas",
                t.refutations.len(),
                t.split.minus.len()
            )));
        }
        let w = self.world(path.to_string(), format!("(2) at {path}"));
        for atom in t.mcs.true_vars(self.closure) {
            self.model.set_true(w, atom);
        }
        for (k, r) in t.refutations.iter().enumerate() {
            let (start, end) = self.refute_component(r, &format!("{path}.z{k}"))?;
            self.attach(w, start, end);
        }
        Ok(w)
    }

    /// Builds the worlds strictly above the root of a (3)-model and returns
    /// their id range.
    fn refute_component(
        &mut self,
        t: &RefuteTrace,
        path: &str,
    ) -> Result<(usize, usize), WitnessError> {
        if t.check_b.len() != t.pair.theta.len() {
            return Err(WitnessError::MalformedTrace(format!(
                "{path}: {} checks for |Θ| = {}",
                t.check_b.len(),
                t.pair.theta.len()
            )));
        }
        let start = self.model.len();
        self.sat(&t.check_a, &format!("{path}.a"))?;
        for (k, (_, sub)) in t.check_b.iter().enumerate() {
            self.sat(sub, &format!("{path}.b{k}"))?;
        }
        Ok((start, self.model.len()))
    }

    /// Makes `root` see every world in `start..end` and relate all of them
    /// pairwise under `S_root`.
    fn attach(&mut self, root: usize, start: usize, end: usize) {
        for u in start..end {
            self.model.add_r(root, u);
            for v in start..end {
                self.model.add_s(root, u, v);
            }
        }
    }
}

/// Rebuilds a rooted Veltman model from an accepting trace.
pub fn build_from_trace(
    trace: &DecisionTrace,
    closure: &ClosureSets,
) -> Result<WitnessBuild, WitnessError> {
    let mut b = Builder {
        closure,
        model: VeltmanModel::new(),
        provenance: Vec::new(),
    };
    let root = match trace {
        DecisionTrace::Sat(t) => b.sat(t, "w")?,
        DecisionTrace::Mcs(t) => b.mcs(t, "w")?,
        DecisionTrace::Refute(t) => {
            // fresh root, all variables false
            let h = b.world("h".to_string(), "(3) root".to_string());
            let (start, end) = b.refute_component(t, "h")?;
            b.attach(h, start, end);
            h
        }
    };
    b.model.set_root(root);
    Ok(WitnessBuild {
        model: b.model,
        root,
        provenance: b.provenance,
    })
}

/// Convenience for the common case of a (1)-trace.
pub fn build_from_sat_trace(
    trace: &SatTrace,
    closure: &ClosureSets,
) -> Result<WitnessBuild, WitnessError> {
    build_from_trace(&DecisionTrace::Sat(trace.clone()), closure)
}

/// Why a model failed certification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CounterexampleReport {
    NoRoot,
    Frame(Vec<Violation>),
    RootRefutes { root: String, formula: String },
}

impl std::fmt::Display for CounterexampleReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CounterexampleReport::NoRoot => write!(f, "model has no root"),
            CounterexampleReport::Frame(v) => {
                write!(f, "{} frame violation(s)", v.len())?;
                if let Some(first) = v.first() {
                    write!(f, ", first: {first}")?;
                }
                Ok(())
            }
            CounterexampleReport::RootRefutes { root, formula } => {
                write!(f, "root {root} does not force {formula}")
            }
        }
    }
}

/// Frame check followed by forcing of `δ` at the root.
pub fn certify(model: &VeltmanModel, delta: &Formula) -> Result<(), CounterexampleReport> {
    let Some(root) = model.root() else {
        return Err(CounterexampleReport::NoRoot);
    };
    let violations = model.frame_check();
    if !violations.is_empty() {
        return Err(CounterexampleReport::Frame(violations));
    }
    if !model.truth_table(delta)[root] {
        return Err(CounterexampleReport::RootRefutes {
            root: model.name(root).to_string(),
            formula: delta.to_string(),
        });
    }
    Ok(())
}
