//! RNS-CKKS key switching under four dataflow schedules, with an analytical
//! GPU cycle model that ranks them.

pub mod ckks;
pub mod dataflow;
pub mod harness;
pub mod model;
pub mod rns;

pub use ckks::{Ciphertext, CkksError, CkksParams, EvaluationKey, ParamShape, Plaintext, SecretKey};
pub use dataflow::{DataflowKind, ExecutionTrace, KernelKind, KernelLaunch, ScheduleSpec};
pub use rns::{Domain, PrimeModulus, RnsBasis, RnsPolynomial};
