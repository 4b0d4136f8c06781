use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure modes shared by every module in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid modulus {k}: must be at least 2")]
    InvalidModulus { k: u64 },

    #[error("residue {value} is outside [0, {k})")]
    ResidueOutOfRange { value: u64, k: u64 },

    #[error("element {value} appears more than once")]
    DuplicateElement { value: u64 },

    #[error("0 is not allowed in the ground set")]
    ZeroElement,

    #[error("modulus mismatch: expected Z_{expected}, found Z_{found}")]
    ModulusMismatch { expected: u64, found: u64 },

    #[error("dilation by {lambda} is not invertible in Z_{k}")]
    NonUnitDilation { lambda: u64, k: u64 },

    #[error("{what}: size {size} exceeds limit {limit}")]
    SizeLimit {
        what: &'static str,
        size: u128,
        limit: u128,
    },

    #[error("rectification infeasible: no box collision among {pigeons} dilates with {box_count} boxes per coordinate")]
    RectificationInfeasible { box_count: u64, pigeons: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("construction failed at {stage}: {reason}{}", if *.out_of_regime { " (out of regime)" } else { "" })]
    ConstructionFailed {
        stage: &'static str,
        reason: String,
        out_of_regime: bool,
    },

    #[error("search exhausted after {nodes} nodes")]
    SearchExhausted { nodes: u64 },

    #[error("assembly error: {0}")]
    Assembly(String),
}

impl Error {
    pub(crate) fn size_limit(what: &'static str, size: impl Into<u128>, limit: impl Into<u128>) -> Self {
        Error::SizeLimit {
            what,
            size: size.into(),
            limit: limit.into(),
        }
    }

    pub(crate) fn construction(stage: &'static str, reason: impl Into<String>, out_of_regime: bool) -> Self {
        Error::ConstructionFailed {
            stage,
            reason: reason.into(),
            out_of_regime,
        }
    }

    pub fn is_out_of_regime(&self) -> bool {
        matches!(
            self,
            Error::ConstructionFailed {
                out_of_regime: true,
                ..
            }
        )
    }
}
