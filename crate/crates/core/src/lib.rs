//! Ground-state entanglement of translationally invariant quadratic boson
//! lattices, the spin-s XY models that bosonize onto them, and exact
//! diagonalization oracles for both.

pub mod asymptotics;
pub mod eigen;
pub mod elliptic;
pub mod error;
pub mod exact_spin;
pub mod fock_oracle;
pub mod gaussian;
pub mod lattice;
pub mod product_space;
pub mod spin_rpa;

pub use asymptotics::{
    critical_divergence_law, geometric_alpha, weak_coupling_predictions_1d, weak_coupling_predictions_dd,
    xy_block_entropy_infinite, GeometricAlpha, LinearFit, WeakCouplingPrediction,
};
pub use error::{Error, Result};
pub use exact_spin::{
    build_spin_hamiltonian, ground_state_definite_parity, reduced_entropy_exact, GroundStateResult, SpinBasis,
    SpinHamiltonian,
};
pub use fock_oracle::{truncated_ground_state_entropy, FockOracleResult};
pub use gaussian::{
    entropy_h, even_mutual_entropy, even_odd_entropy_folded, mode_contractions, subsystem_contraction_matrix,
    subsystem_entropy, symplectic_spectrum, ContractionMatrix, EntropyResult, LogBase, ModeContractions, Selector,
};
pub use lattice::{CouplingModel, Couplings, CriticalPoint, Lattice, ModeData};
pub use spin_rpa::{factorized_side_limits, rpa_boson_map, rpa_entropy, RpaEntropy, RpaMap, RpaRegime, SideLimits, SpinModel};
