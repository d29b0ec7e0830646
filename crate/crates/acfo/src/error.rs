use thiserror::Error;

/// Crate-wide error type. Variants map one-to-one onto the stable error
/// codes reported by the CLI (see [`Error::code`]).
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("size cap exceeded: {0}")]
    SizeCapExceeded(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different field contexts")]
    ContextMismatch,
    #[error("argument is zero")]
    ZeroArgument,
    #[error("{m} does not divide the ambient degree {l}")]
    NotADivisor { m: u32, l: u32 },
    #[error("{l_new} is not a multiple of the current degree {l}")]
    NotAMultiple { l_new: u32, l: u32 },
    #[error("coherent extension search exhausted (arithmetic bug)")]
    CoherentExtensionSearchExhausted,
    #[error("circle points have different characteristics ({0} vs {1})")]
    CharMismatch(u64, u64),
    #[error("cover element outside the truncation window (winding part must be 0)")]
    NotInTruncationWindow,
    #[error("denominator {den} does not divide the group order at this level; extend the ambient field")]
    NotRepresentedAtThisLevel { den: String },
    #[error("cyclotomic factor sequence is not coherent: {0}")]
    IncoherentSequence(String),
    #[error("no root of the top-level factor is compatible with the sequence (bug for coherent input)")]
    NoCompatibleRoot,
    #[error("variety has no points on the torus at this level")]
    EmptyTorusPart,
    #[error("point has a zero coordinate")]
    ZeroCoordinate,
    #[error("unsupported representation for dependence-pattern input")]
    UnsupportedRepresentation,
    #[error("polynomial is zero (or vanishes identically mod p)")]
    ZeroPolynomial,
    #[error("a factor of the polynomial generates an unsupported number field: {0}")]
    UnsupportedNumberField(String),
    #[error("syntax error at byte {pos}: {msg}")]
    SyntaxError { pos: usize, msg: String },
    #[error("arity error: {0}")]
    ArityError(String),
    #[error("Weyl exponent vector must be nonzero")]
    ZeroVectorL,
    #[error("bad box: {0}")]
    BadBox(String),
    #[error("invalid circle point: {0}")]
    BadCirclePoint(String),
    #[error("invalid polynomial: {0}")]
    BadPolynomial(String),
    #[error("invalid input: {0}")]
    BadInput(String),
}

impl Error {
    /// Stable machine-readable code for CLI error mapping.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotPrime(_) => "not-prime",
            Error::SizeCapExceeded(_) => "size-cap-exceeded",
            Error::DivisionByZero => "division-by-zero",
            Error::ContextMismatch => "context-mismatch",
            Error::ZeroArgument => "zero-argument",
            Error::NotADivisor { .. } => "not-a-divisor",
            Error::NotAMultiple { .. } => "not-a-multiple",
            Error::CoherentExtensionSearchExhausted => "coherent-extension-search-exhausted",
            Error::CharMismatch(_, _) => "char-mismatch",
            Error::NotInTruncationWindow => "not-in-truncation-window",
            Error::NotRepresentedAtThisLevel { .. } => "not-represented-at-this-level",
            Error::IncoherentSequence(_) => "incoherent-sequence",
            Error::NoCompatibleRoot => "no-compatible-root",
            Error::EmptyTorusPart => "empty-torus-part",
            Error::ZeroCoordinate => "zero-coordinate",
            Error::UnsupportedRepresentation => "unsupported-representation",
            Error::ZeroPolynomial => "zero-polynomial",
            Error::UnsupportedNumberField(_) => "unsupported-number-field",
            Error::SyntaxError { .. } => "syntax-error",
            Error::ArityError(_) => "arity-error",
            Error::ZeroVectorL => "zero-vector-l",
            Error::BadBox(_) => "bad-box",
            Error::BadCirclePoint(_) => "bad-circle-point",
            Error::BadPolynomial(_) => "bad-polynomial",
            Error::BadInput(_) => "bad-input",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
