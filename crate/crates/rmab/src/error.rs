//! Error type shared across the crate.

/// Everything that can go wrong while validating chains, configuring
/// policies, or running experiments.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A transition row does not sum to one within tolerance.
    #[error("transition row {row} sums to {sum}, expected 1 within 1e-12")]
    NonStochasticRow { row: usize, sum: f64 },

    /// A transition entry is outside [0, 1] or not finite.
    #[error("transition entry ({row}, {col}) = {value} is outside [0, 1]")]
    EntryOutOfRange { row: usize, col: usize, value: f64 },

    /// Reward list and transition matrix dimensions disagree, or the matrix
    /// is not square.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A state reward is zero, negative, or not finite.
    #[error("state {state} has reward {value}; rewards must be strictly positive")]
    NonPositiveReward { state: usize, value: f64 },

    /// Two states share the same reward value, so observations could not
    /// identify the state.
    #[error("states {a} and {b} share reward {value}; rewards must be distinct per arm")]
    DuplicateReward { a: usize, b: usize, value: f64 },

    /// The support graph of the transition matrix is not a single strongly
    /// connected component.
    #[error("chain is not irreducible: state {state} is not mutually reachable with state 0")]
    NotIrreducible { state: usize },

    /// The chain is periodic (gcd of cycle lengths > 1).
    #[error("chain is periodic with period {period}; an aperiodic chain is required")]
    Periodic { period: usize },

    /// Detailed balance fails, so the chain is not reversible.
    #[error(
        "chain is not reversible: detailed-balance residual {residual:.3e} at ({x}, {y}) exceeds 1e-10"
    )]
    NotReversible { x: usize, y: usize, residual: f64 },

    /// An error attributable to a specific arm of a scenario.
    #[error("arm {index}: {source}")]
    Arm {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    /// Invalid experiment or policy configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// An observed reward is not one of the arm's state rewards.
    #[error("model mismatch: arm {arm} cannot produce reward {reward}")]
    ModelMismatch { arm: usize, reward: f64 },

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine failed in a way that should be impossible for
    /// validated inputs.
    #[error("internal numeric failure: {0}")]
    Numeric(String),

    /// Unknown scenario preset name.
    #[error("unknown scenario preset '{0}' and no such file exists")]
    UnknownScenario(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Attach the arm index to an error raised while validating one arm of a
    /// multi-arm scenario.
    pub fn for_arm(self, index: usize) -> Error {
        Error::Arm {
            index,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
