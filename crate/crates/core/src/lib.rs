//! Closed multiple testing with e-values.
//!
//! An [`ECollection`] assigns an e-value `e_S` to every nonempty set of
//! hypotheses. Its closure at level α for a loss `f` is the family of
//! discovery sets `R` with `e_S ≥ f_S(R)/α` for every `S`. The [`engine`]
//! decides this by enumeration, [`shortcuts`] in polynomial time for the
//! common collections, and [`procedures`] wraps both into one-call methods.

pub mod calibrators;
pub mod collections;
pub mod compare;
pub mod engine;
pub mod error;
pub mod loss;
pub mod procedures;
pub mod randomization;
pub mod serde_ext;
pub mod shortcuts;
pub mod subset;
pub mod values;

pub use collections::{ECollection, Feasibility, Flags};
pub use compare::ComparePolicy;
pub use engine::{AuditStep, Engine, MembershipCertificate, PostHocAudit};
pub use error::{Error, Result};
pub use loss::LossFunction;
pub use procedures::{Method, ProcedureResult, RunOptions};
pub use subset::{SetCollection, Subset};
pub use values::{ValueKind, ValueVector};
