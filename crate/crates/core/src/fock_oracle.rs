//! Brute-force ground states of the quadratic boson Hamiltonian
//! `H = sum_i lambda (n_i + 1/2) - sum_{i!=j} D+(i-j) b+_i b_j
//!      - 1/2 sum_{i!=j} D-(i-j) (b+_i b+_j + b_j b_i)`
//! in a truncated occupation-number basis, for a handful of modes.

use crate::eigen::{lowest_dense, lowest_lanczos_from, LanczosOptions, SparseSymmetric};
use crate::error::{Error, Result};
use crate::gaussian::{LogBase, Selector};
use crate::lattice::CouplingModel;
use crate::product_space::ProductSpace;

pub const MAX_MODES: usize = 3;
pub const MIN_CUTOFF: usize = 8;
pub const MAX_CUTOFF: usize = 40;
const DENSE_LIMIT: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct FockOracleResult {
    pub cutoff: usize,
    pub entropy: f64,
    /// Same quantity at cutoff `cutoff / 2`.
    pub entropy_half_cutoff: f64,
    pub ground_energy: f64,
    pub ground_energy_half_cutoff: f64,
    pub base: LogBase,
}

impl FockOracleResult {
    pub fn cutoff_difference(&self) -> f64 {
        (self.entropy - self.entropy_half_cutoff).abs()
    }

    pub fn require_converged(self, tolerance: f64) -> Result<Self> {
        let difference = self.cutoff_difference();
        if difference > tolerance {
            return Err(Error::CutoffNotConverged { difference, tolerance });
        }
        Ok(self)
    }
}

/// Ground state of the even total-occupation sector at one cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct FockGroundState {
    pub cutoff: usize,
    pub energy: f64,
    pub state: Vec<f64>,
    pub space: ProductSpace,
}

impl FockGroundState {
    /// The same amplitudes in the occupation basis of a larger cutoff.
    fn embed(&self, target: &ProductSpace) -> Vec<f64> {
        let mut out = vec![0.0; target.dim()];
        for (idx, &x) in self.state.iter().enumerate() {
            if x != 0.0 {
                let j = self
                    .space
                    .digits(idx)
                    .iter()
                    .fold(0, |acc, &d| acc * target.local() + d);
                out[j] = x;
            }
        }
        out
    }
}

/// Ground state at a single cutoff, optionally seeded from a smaller one.
pub fn truncated_ground_state(model: &CouplingModel, cutoff: usize, seed: Option<&FockGroundState>) -> Result<FockGroundState> {
    // stability also guarantees the truncated problem is bounded below
    model.dispersion()?;
    let lattice = model.lattice();
    let n = lattice.num_sites();
    if n > MAX_MODES {
        return Err(Error::Unsupported(format!("Fock oracle handles at most {MAX_MODES} modes, got {n}")));
    }
    let space = ProductSpace::new(n, cutoff + 1, usize::MAX)?;
    let c = &model.couplings;
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = lattice.difference(i, j);
            let (p, m) = (c.plus_at(d), c.minus_at(d));
            if p != 0.0 || m != 0.0 {
                pairs.push((i, j, p, m));
            }
        }
    }
    // the ground state lives in the even total-occupation sector
    let keep: Vec<usize> = (0..space.dim()).filter(|&i| space.digit_sum(i) % 2 == 0).collect();
    let mut position = vec![usize::MAX; space.dim()];
    for (k, &i) in keep.iter().enumerate() {
        position[i] = k;
    }
    let lambda = model.lambda;
    let mut triplets = Vec::new();
    for (row, &idx) in keep.iter().enumerate() {
        let occ = space.digits(idx);
        let diag: f64 = occ.iter().map(|&k| lambda * (k as f64 + 0.5)).sum();
        triplets.push((row, row, diag));
        for &(i, j, p, m) in &pairs {
            let (ni, nj) = (occ[i], occ[j]);
            let (si, sj) = (space.stride(i), space.stride(j));
            // b+_i b_j + b+_j b_i
            if p != 0.0 {
                if nj > 0 && ni < cutoff {
                    let v = -p * ((ni + 1) as f64 * nj as f64).sqrt();
                    triplets.push((position[idx + si - sj], row, v));
                }
                if ni > 0 && nj < cutoff {
                    let v = -p * ((nj + 1) as f64 * ni as f64).sqrt();
                    triplets.push((position[idx - si + sj], row, v));
                }
            }
            // b+_i b+_j + b_i b_j
            if m != 0.0 {
                if ni < cutoff && nj < cutoff {
                    let v = -m * ((ni + 1) as f64 * (nj + 1) as f64).sqrt();
                    triplets.push((position[idx + si + sj], row, v));
                }
                if ni > 0 && nj > 0 {
                    let v = -m * (ni as f64 * nj as f64).sqrt();
                    triplets.push((position[idx - si - sj], row, v));
                }
            }
        }
    }
    let h = SparseSymmetric::from_triplets(keep.len(), triplets);
    let pair = if keep.len() <= DENSE_LIMIT {
        lowest_dense(&h)?
    } else {
        let start: Option<Vec<f64>> = seed
            .filter(|s| s.cutoff <= cutoff && s.space.sites() == n)
            .map(|s| {
                let full = s.embed(&space);
                keep.iter().map(|&i| full[i]).collect()
            });
        let options = LanczosOptions {
            krylov: 120,
            max_restarts: 400,
            tol: 1e-12,
        };
        lowest_lanczos_from(&h, &options, start.as_deref())?
    };
    let mut state = vec![0.0; space.dim()];
    for (&i, &x) in keep.iter().zip(&pair.vector) {
        state[i] = x;
    }
    Ok(FockGroundState {
        cutoff,
        energy: pair.value,
        state,
        space,
    })
}

pub fn truncated_ground_state_entropy(
    model: &CouplingModel,
    cutoff: usize,
    selector: &Selector,
    base: LogBase,
) -> Result<FockOracleResult> {
    let mut out = truncated_ground_state_entropies(model, cutoff, std::slice::from_ref(selector), base)?;
    Ok(out.remove(0))
}

/// One ground-state computation per cutoff shared by all `selectors`.
pub fn truncated_ground_state_entropies(
    model: &CouplingModel,
    cutoff: usize,
    selectors: &[Selector],
    base: LogBase,
) -> Result<Vec<FockOracleResult>> {
    if !(MIN_CUTOFF..=MAX_CUTOFF).contains(&cutoff) {
        return Err(Error::Domain(format!(
            "cutoff must lie in {MIN_CUTOFF}..={MAX_CUTOFF}, got {cutoff}"
        )));
    }
    let sites = selectors
        .iter()
        .map(|s| s.sites(model.lattice()))
        .collect::<Result<Vec<_>>>()?;
    let half = truncated_ground_state(model, cutoff / 2, None)?;
    let full = truncated_ground_state(model, cutoff, Some(&half))?;
    sites
        .iter()
        .map(|a| {
            Ok(FockOracleResult {
                cutoff,
                entropy: full.space.entanglement_entropy(&full.state, a, base)?,
                entropy_half_cutoff: half.space.entanglement_entropy(&half.state, a, base)?,
                ground_energy: full.energy,
                ground_energy_half_cutoff: half.energy,
                base,
            })
        })
        .collect()
}
