use thiserror::Error;

/// Errors produced by the simulator core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid channel parameter `{field}`: {reason}")]
    InvalidChannel {
        field: &'static str,
        reason: &'static str,
    },
    #[error("invalid mechanism parameter `{field}`: {reason}")]
    InvalidMechanism {
        field: &'static str,
        reason: &'static str,
    },
    #[error("input {value} outside the domain [1, {k}]")]
    DomainViolation { value: u32, k: u32 },
    #[error("expected {expected} bits, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("report index {index} outside [0, {size})")]
    IndexOutOfRange { index: u64, size: u64 },
    #[error("report space of {len} digits in base {base} does not fit in 64 bits")]
    IndexOverflow { base: u64, len: usize },
    #[error("codebook of {size} words exceeds the limit of {limit}")]
    CodebookTooLarge { size: u64, limit: u64 },
    #[error("report does not belong to a {expected} mechanism")]
    ReportMismatch { expected: &'static str },
    #[error("empty input")]
    EmptyInput,
    #[error("invalid experiment parameter `{field}`: {reason}")]
    InvalidExperiment {
        field: &'static str,
        reason: &'static str,
    },
}
