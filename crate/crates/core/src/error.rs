use thiserror::Error;

use crate::analysis::Certificate;
use crate::dsl::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid modulus {0}: expected a prime no larger than 251")]
    InvalidPrime(u32),

    #[error("precision must be at least 1")]
    ZeroPrecision,

    #[error("digit {digit} is out of range for p={p}")]
    DigitOutOfRange { digit: u32, p: u32 },

    #[error("operand mismatch: p={left_p}, n={left_n} against p={right_p}, n={right_n}")]
    Mismatch {
        left_p: u32,
        left_n: usize,
        right_p: u32,
        right_n: usize,
    },

    #[error("arity mismatch: expected {expected} components, found {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("a vector needs at least one component")]
    EmptyVector,

    #[error("cannot change precision {from} to {to}")]
    BadPrecision { from: usize, to: usize },

    #[error("bitwise operators require p=2, got p={0}")]
    BitwiseRequiresBinary(u32),

    #[error("precision {precision} is not divisible by {k}")]
    NotDivisible { precision: usize, k: usize },

    #[error("state space {p}^{exponent} exceeds the enumeration bound 2^{limit_log2}")]
    StateSpaceTooLarge {
        p: u32,
        exponent: usize,
        limit_log2: u32,
    },

    #[error("precision {requested} exceeds the table's maximum precision {max}")]
    BeyondTable { requested: usize, max: usize },

    #[error("map is not bijective modulo p^{level}: {detail}")]
    NotBijective { level: usize, detail: String },

    #[error("map is not transitive on the residue space: {0}")]
    NotTransitive(String),

    #[error("twist parameter k={k} is not a multiple of the map arity {arity}")]
    BadTwistParameter { k: usize, arity: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("precondition failed: {what}")]
    Precondition {
        what: String,
        certificate: Box<Certificate>,
    },

    #[error("{0}")]
    Parse(#[from] ParseError),

    #[error("malformed input: {0}")]
    Syntax(String),

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
}
