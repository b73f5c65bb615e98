use hecke_core::arith::ArithError;

#[derive(Debug, thiserror::Error)]
pub enum ClassicalError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed fixture {0}: {1}")]
    Parse(String, String),
    #[error("parity violation: chi(-1) = {chi_minus_one} but weight is {weight}")]
    Parity { chi_minus_one: i32, weight: u32 },
    #[error("character data in {0} does not match its Conrey label")]
    CharacterMismatch(String),
    #[error("precision {have} is below the required {need}")]
    Precision { have: usize, need: usize },
    #[error("basis is numerically dependent (relative smallest singular value {0:e})")]
    Dependent(f64),
    #[error("point with Im = {0} lies below the floor {1}")]
    BelowFloor(f64, f64),
    #[error("{p}^{n} does not exactly divide {level}")]
    NotExact { p: u64, n: u32, level: u64 },
    #[error("r = {r} is below the conductor exponent {c}")]
    BelowConductor { r: u32, c: u32 },
    #[error("missing fixture {0}")]
    MissingFixture(String),
    #[error("operator {0} is poisoned: residual {1:e}, conditioning {2:e}")]
    Poisoned(String, f64, f64),
    #[error("no usable sample points above the floor")]
    NoPoints,
    #[error(transparent)]
    Arith(#[from] ArithError),
}

pub type Result<T> = std::result::Result<T, ClassicalError>;
