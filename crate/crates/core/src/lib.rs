//! Decision procedure for the interpretability logic IL.
//!
//! Formulas are decided by a polynomial-space recursive search over the
//! closure of the input. Satisfiable inputs yield an accepting trace, from
//! which an explicit finite Veltman model is rebuilt and independently
//! certified by a model checker. A brute-force enumerator of small models
//! serves as a second, independent oracle.
//!
//! ```
//! use il_decide::{decide_valid, parse, DecideOptions};
//!
//! let axiom = parse("box (p -> q) -> (p |> q)").unwrap();
//! assert!(decide_valid(&axiom, DecideOptions::default()).unwrap().is_valid());
//! ```

pub mod closure;
pub mod corpus;
pub mod decide;
pub mod formula;
pub mod mcs;
pub mod semantics;
pub mod witness;

pub use closure::{compute_closure, ClosureSets};
pub use decide::{
    decide_sat, decide_valid, DecideError, DecideOptions, DecisionTrace, Decider, SatRun,
    SatTrace, SearchStats, ValidityRun,
};
pub use formula::{parse, print, Formula, ParseError};
pub use mcs::{enumerate_mcs, is_prop_consistent, MaxConsistentSet, Sign, SignedSet};
pub use semantics::{enumerate_models, oracle_sat, VeltmanModel};
pub use witness::{build_from_sat_trace, build_from_trace, certify, WitnessBuild};
