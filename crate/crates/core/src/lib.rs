//! Sequencings and t-weak sequencings of subsets of `Z_k`.

pub mod dissociation;
pub mod error;
pub mod exec;
pub mod mc;
pub mod oracle;
pub mod pipeline;
pub mod pn;
pub mod rectification;
pub mod structure;
pub mod verify;
pub mod zk;

pub use error::{Error, Result};
pub use exec::Execution;
pub use verify::{Goal, Interval, Ordering, Verdict};
pub use zk::{GroundSet, Modulus};
