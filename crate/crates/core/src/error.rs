use thiserror::Error;

/// Errors raised by coefficient computations, solvers and I/O.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CcnError {
    #[error("wavenumber ({k}, {l}) outside existence disc (k^2 + l^2 = {q2} >= 1)")]
    OutsideExistence { k: f64, l: f64, q2: f64 },

    #[error("complex characteristics (D_plus): delta_zz = {delta_zz} >= 0")]
    ComplexCharacteristics { delta_zz: f64 },

    #[error("degenerate leading coefficient A_l = {a_l}")]
    DegenerateLeading { a_l: f64 },

    #[error("coalescing characteristics: |delta_zz| = {delta_zz_abs} below threshold")]
    CoalescingCharacteristics { delta_zz_abs: f64 },

    #[error("not a characteristic: solvability obstruction {obstruction} exceeds tolerance")]
    NotCharacteristic { obstruction: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("singular linear system")]
    Singular,

    #[error("degenerate reduction: {0}")]
    DegenerateReduction(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("ill-posed problem: {0}")]
    IllPosed(String),

    #[error("solution diverged (non-finite value) at t = {t}")]
    Divergence { t: f64 },

    #[error("phase singularity present: min |psi| = {min_amplitude}")]
    DefectPresent { min_amplitude: f64 },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("format error: {0}")]
    Format(String),
}

impl From<std::io::Error> for CcnError {
    fn from(e: std::io::Error) -> Self {
        CcnError::Io(e.to_string())
    }
}

impl From<csv::Error> for CcnError {
    fn from(e: csv::Error) -> Self {
        CcnError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CcnError>;
