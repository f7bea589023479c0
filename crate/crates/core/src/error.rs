use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-homogeneous term: degree {found} but p+1 = {expected}")]
    NonHomogeneous { found: u32, expected: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("nontrivial potential required")]
    EmptyPotential,

    #[error("unknown preset: {0}")]
    UnknownPreset(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("initial guess outside P (P(psi0) <= 0)")]
    InitialGuessOutsideP,

    #[error("ground-state iteration did not converge: {0}")]
    NotConverged(String),

    #[error("pseudo-conformal transform requires p = 1 + 4/n (L2-critical)")]
    NotL2Critical,

    #[error("pseudo-conformal transform requires the mass-resonance condition")]
    NotMassResonant,

    #[error("time {t} outside [0, T) with T = {blowup_time}")]
    TimeOutOfRange { t: f64, blowup_time: f64 },

    #[error("non-radial input: {0}")]
    NonRadial(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("invalid field file: {0}")]
    BadFieldFile(String),
}
