use thiserror::Error;

#[derive(Debug, Error)]
pub enum AcxError {
    #[error("degenerate sample grid: {0}")]
    DegenerateGrid(String),
    #[error("boundary data not holomorphically matchable: negative-mode mass {negative_mass:.3e} of {total_mass:.3e}")]
    NotHolomorphicallyMatchable { negative_mass: f64, total_mass: f64 },
    #[error("point outside the chart domain: {0}")]
    ChartDomain(String),
    #[error("pole at the origin")]
    Pole,
    #[error("frame construction failed: {0}")]
    Frame(String),
    #[error("not a complex structure: {0}")]
    NotComplexStructure(String),
    #[error("input is not radial: angular mass {0:.3e}")]
    NonRadial(f64),
    #[error("radial boundary obstruction: boundary trace carries {0:.6e} ζ̄, not matchable by k(ζ² − 1)")]
    RadialObstruction(f64),
    #[error("solver did not converge after {iterations} iterations (last update {last_update:.3e})")]
    NonConvergence { iterations: usize, last_update: f64 },
    #[error("boundary system rank deficient: {0}")]
    RankDeficient(String),
    #[error("unsupported dimension n = {0}: {1}")]
    Dimension(usize, String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, AcxError>;
