use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid coupling at displacement {displacement:?}: {reason}")]
    InvalidCoupling {
        displacement: Vec<usize>,
        reason: String,
    },

    #[error(
        "couplings not symmetric: value {value} at displacement {displacement:?} \
         but {mirror_value} at {mirror:?}"
    )]
    AsymmetricCoupling {
        displacement: Vec<usize>,
        mirror: Vec<usize>,
        value: f64,
        mirror_value: f64,
    },

    #[error("Fourier transform of couplings has imaginary residue {residue:e} at k={k:?}")]
    NonRealFourier { k: Vec<usize>, residue: f64 },

    #[error("unstable model: lambda - D+_k - |D-_k| = {margin:e} at k={k:?}")]
    Unstable { k: Vec<usize>, margin: f64 },

    #[error("even-odd partition needs even sizes along every axis, got {0:?}")]
    OddLatticeSize(Vec<usize>),

    #[error("invalid subsystem: {0}")]
    InvalidSelector(String),

    #[error("symplectic spectrum: {0}")]
    NumericalDegeneracy(String),

    #[error("value outside domain: {0}")]
    Domain(String),

    #[error("too few points for fit: need at least 3, got {0}")]
    TooFewPoints(usize),

    #[error("invalid spin model: {0}")]
    InvalidSpinModel(String),

    #[error("field |B| = {field} is within the critical window of B_c = {critical}")]
    CriticalField { field: f64, critical: f64 },

    #[error("unsupported model: {0}")]
    Unsupported(String),

    #[error("Hilbert space dimension {required} exceeds the cap {cap}")]
    DimensionCap { required: usize, cap: usize },

    #[error("eigensolver did not converge: residual {residual:e} after {iterations} iterations")]
    NotConverged { residual: f64, iterations: usize },

    #[error("Fock cutoff not converged: |S(N) - S(N/2)| = {difference:e} > {tolerance:e}")]
    CutoffNotConverged { difference: f64, tolerance: f64 },
}
