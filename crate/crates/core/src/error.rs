use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("enumeration cap {cap} exceeded: {seen} cliques already emitted")]
    EnumerationCap { cap: u64, seen: u64 },

    #[error("index cap {cap} exceeded: {refs} clique-edge references required")]
    IndexCap { cap: u64, refs: u64 },

    #[error("brute-force guard exceeded: C({n},{k}) = {subsets} > {guard}")]
    BruteForceGuard {
        n: u64,
        k: u64,
        subsets: u64,
        guard: u64,
    },

    #[error("clique id {id} is dead or unknown")]
    BadCliqueId { id: u64 },

    #[error("paranoid recount mismatch at step {step}: {detail}")]
    ParanoidMismatch { step: u64, detail: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("schedule (len {schedule_len}) shorter than trace (len {trace_len})")]
    ScheduleTooShort {
        schedule_len: usize,
        trace_len: usize,
    },

    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
