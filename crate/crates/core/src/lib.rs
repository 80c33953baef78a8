//! Generalized Lagrange coded computing (GLCC) over prime fields.
//!
//! Evaluates a multivariate polynomial over a batch of inputs on `N`
//! untrusted workers, tolerating stragglers and up to `A` adversarial
//! workers while keeping the inputs information-theoretically private
//! against any `T` colluders. Each worker gets `GL` encoded inputs and
//! returns `L` sub-responses; the grouping knob `G` and the sub-response
//! knob `L` trade upload cost against the recovery threshold.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, simulation and
//! the command-line tool live in the `glcc` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod field;
pub mod glcc;
pub mod poly;
pub mod program;
pub mod seed;

pub use field::{batch_inverse, FieldElement, FieldError, PrimeModulus};
pub use glcc::{
    build_domain, cost_report, decode, encode, privacy_certificate, recovery_threshold, worker_respond, CollectionMode,
    Dimensions, DomainLayout, EvaluationDomain, GlccError, GlccParams, SubResponse, WorkerShare,
};
pub use poly::{DensePoly, EvalSet, PolyError};
pub use program::{PolyProgram, ProgramError, ProgramInput};
