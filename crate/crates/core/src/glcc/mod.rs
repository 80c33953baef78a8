//! Generalized Lagrange coded computing.
//!
//! The dataset `X_1..X_M` is split into `G` groups of `R = M/G` inputs.
//! Group `g` is Lagrange-encoded together with `LT` uniform noise vectors
//! into a polynomial `f_g` of degree `R + LT - 1`, and worker `n` receives
//! `f_g(alpha_{n,l})` for every `g` and `l < L`. Each worker returns `L`
//! sub-responses
//!
//! ```text
//! Y_{n,l} = sum_g phi(f_g(alpha_{n,l})) * prod_{g' != g} prod_{r < R} (alpha_{n,l} - beta_{g',r})
//! ```
//!
//! which are evaluations of one response polynomial `h` of degree
//! `D(R + LT - 1) + (G - 1)R`. The master Reed-Solomon decodes `h` (fixing
//! up to `AL` bad sub-responses) and reads `phi(X_{g,r})` off
//! `h(beta_{g,r})` after dividing out the interference constant.

mod cost;
mod decode;
mod domain;
mod encode;
mod params;
mod privacy;
mod worker;

pub use cost::{cost_report, CostReport, OpCounts};
pub use decode::{decode, CollectionMode, DecodeOutcome, Decoder};
pub use domain::{build_domain, DomainLayout, EvaluationDomain};
pub use encode::{encode, Encoder, WorkerShare};
pub use params::{recovery_threshold, Dimensions, GlccParams};
pub use privacy::{masking_decomposition, privacy_certificate, MaskingMatrix};
pub use worker::{interference_coeff, worker_respond, SubResponse, Worker};

use crate::field::FieldError;
use crate::poly::PolyError;
use crate::program::ProgramError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GlccError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("G={groups} does not divide M={inputs}")]
    GroupsDontDivide { inputs: usize, groups: usize },
    #[error("field of size {q} cannot hold {need} distinct evaluation points")]
    FieldTooSmall { q: u64, need: u128 },
    #[error("N={workers} is below the recovery threshold K={threshold}")]
    TooFewWorkers { workers: usize, threshold: usize },
    #[error("evaluation point {0} appears more than once")]
    RepeatedPoint(u64),
    #[error("domain does not match the parameters")]
    DomainMismatch,
    #[error("expected {expected} inputs, got {got}")]
    DatasetSize { expected: usize, got: usize },
    #[error("input {index} has {got} coordinates, expected {expected}")]
    InputWidth { index: usize, expected: usize, got: usize },
    #[error("values belong to a different field than the parameters")]
    ModulusMismatch,
    #[error("no worker with id {0}")]
    UnknownWorker(usize),
    #[error("share for worker {0} has the wrong shape")]
    MalformedShare(usize),
    #[error("sub-response ({worker}, {index}) is out of range")]
    UnknownSubResponse { worker: usize, index: usize },
    #[error("sub-response ({worker}, {index}) received twice")]
    DuplicateResponse { worker: usize, index: usize },
    #[error("worker {worker} sent {got} output coordinates, expected {expected}")]
    ResponseLength { worker: usize, expected: usize, got: usize },
    #[error("need {need} responses to decode, have {have}")]
    InsufficientResponses { have: usize, need: usize },
    #[error("too many corrupted sub-responses to decode output coordinate {coordinate}")]
    DecodeFailure { coordinate: usize },
    #[error("colluding set has {got} workers, expected T={expected}")]
    SubsetSize { expected: usize, got: usize },
}
