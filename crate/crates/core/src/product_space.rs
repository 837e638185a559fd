//! Tensor-product Hilbert spaces of `n` sites with a common local
//! dimension, and reduced-state entropies of real pure states on them.
//!
//! Basis states are mixed-radix integers with site 0 as the most
//! significant digit.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::gaussian::LogBase;

/// Eigenvalues of a density matrix below this are treated as rounding.
const NEG_EIGEN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductSpace {
    sites: usize,
    local: usize,
    dim: usize,
}

impl ProductSpace {
    /// Fails with [`Error::DimensionCap`] if `local^sites` exceeds `cap`.
    pub fn new(sites: usize, local: usize, cap: usize) -> Result<Self> {
        if sites == 0 || local < 2 {
            return Err(Error::Domain(format!(
                "product space needs at least one site and local dimension >= 2, got {sites} x {local}"
            )));
        }
        let mut dim: usize = 1;
        for _ in 0..sites {
            dim = match dim.checked_mul(local) {
                Some(d) if d <= cap => d,
                _ => {
                    let required = (local as f64).powi(sites as i32).min(usize::MAX as f64) as usize;
                    return Err(Error::DimensionCap { required, cap });
                }
            };
        }
        Ok(Self { sites, local, dim })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn local(&self) -> usize {
        self.local
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Place value of `site` in a basis index.
    pub fn stride(&self, site: usize) -> usize {
        self.local.pow((self.sites - 1 - site) as u32)
    }

    pub fn digit(&self, index: usize, site: usize) -> usize {
        (index / self.stride(site)) % self.local
    }

    pub fn digits(&self, index: usize) -> Vec<usize> {
        (0..self.sites).map(|s| self.digit(index, s)).collect()
    }

    pub fn digit_sum(&self, mut index: usize) -> usize {
        let mut sum = 0;
        while index > 0 {
            sum += index % self.local;
            index /= self.local;
        }
        sum
    }

    /// Product state `psi_0 (x) psi_1 (x) ...` from per-site amplitudes.
    pub fn product_state(&self, local_states: &[Vec<f64>]) -> Vec<f64> {
        assert_eq!(local_states.len(), self.sites);
        let mut state = vec![1.0];
        for local in local_states {
            assert_eq!(local.len(), self.local);
            let mut next = Vec::with_capacity(state.len() * self.local);
            for &a in &state {
                next.extend(local.iter().map(|&b| a * b));
            }
            state = next;
        }
        state
    }

    /// Reduced density matrix of `state` on the sorted, distinct `sites`.
    pub fn reduced_density_matrix(&self, state: &[f64], sites: &[usize]) -> Result<DMatrix<f64>> {
        let (m, _) = self.bipartite_matrix(state, sites)?;
        Ok(&m * m.transpose())
    }

    /// `psi` reshaped to a `dim_A x dim_B` matrix.
    fn bipartite_matrix(&self, state: &[f64], sites: &[usize]) -> Result<(DMatrix<f64>, usize)> {
        if state.len() != self.dim {
            return Err(Error::Domain(format!(
                "state length {} does not match dimension {}",
                state.len(),
                self.dim
            )));
        }
        if sites.is_empty() || sites.len() >= self.sites {
            return Err(Error::InvalidSelector("subsystem must be a non-empty strict subset".into()));
        }
        if sites.windows(2).any(|w| w[0] >= w[1]) || sites[sites.len() - 1] >= self.sites {
            return Err(Error::InvalidSelector(format!("sites {sites:?} not sorted, distinct and in range")));
        }
        let mut in_a = vec![false; self.sites];
        for &s in sites {
            in_a[s] = true;
        }
        let dim_a = self.local.pow(sites.len() as u32);
        let dim_b = self.dim / dim_a;
        let mut m = DMatrix::zeros(dim_a, dim_b);
        for (idx, &amp) in state.iter().enumerate() {
            if amp == 0.0 {
                continue;
            }
            let (mut ia, mut ib) = (0, 0);
            for (s, &a) in in_a.iter().enumerate() {
                let d = self.digit(idx, s);
                if a {
                    ia = ia * self.local + d;
                } else {
                    ib = ib * self.local + d;
                }
            }
            m[(ia, ib)] = amp;
        }
        Ok((m, dim_a))
    }

    /// Eigenvalues of the reduced density matrix on `sites`, descending.
    /// Computed from whichever of `M M^T`, `M^T M` is smaller.
    pub fn schmidt_probabilities(&self, state: &[f64], sites: &[usize]) -> Result<Vec<f64>> {
        let (m, _) = self.bipartite_matrix(state, sites)?;
        let gram = if m.nrows() <= m.ncols() {
            &m * m.transpose()
        } else {
            m.transpose() * &m
        };
        let mut p: Vec<f64> = SymmetricEigen::new(gram).eigenvalues.iter().copied().collect();
        for x in &mut p {
            if *x < 0.0 {
                if *x < -NEG_EIGEN_TOL {
                    return Err(Error::NumericalDegeneracy(format!("negative density eigenvalue {x:e}")));
                }
                *x = 0.0;
            }
        }
        p.sort_by(|a, b| b.total_cmp(a));
        Ok(p)
    }

    /// von Neumann entropy `-sum p ln p` of the reduced state on `sites`.
    pub fn entanglement_entropy(&self, state: &[f64], sites: &[usize], base: LogBase) -> Result<f64> {
        let p = self.schmidt_probabilities(state, sites)?;
        Ok(base.from_nats(von_neumann(&p)))
    }
}

/// `-sum p ln p` over positive entries.
pub fn von_neumann(probabilities: &[f64]) -> f64 {
    probabilities.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

    #[test]
    fn digits_round_trip() {
        let ps = ProductSpace::new(4, 3, 1 << 20).unwrap();
        assert_eq!(ps.dim(), 81);
        assert_eq!(ps.digits(5), vec![0, 0, 1, 2]);
        assert_eq!(ps.digit_sum(80), 8);
    }

    #[test]
    fn cap_enforced() {
        assert!(matches!(ProductSpace::new(21, 2, 1 << 20), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn product_state_unentangled() {
        let ps = ProductSpace::new(3, 2, 64).unwrap();
        let local = vec![vec![0.6, 0.8]; 3];
        let psi = ps.product_state(&local);
        assert!(ps.entanglement_entropy(&psi, &[1], LogBase::Natural).unwrap().abs() < 1e-12);
        assert!(ps.entanglement_entropy(&psi, &[0, 2], LogBase::Natural).unwrap().abs() < 1e-12);
    }

    #[test]
    fn bell_pair() {
        let ps = ProductSpace::new(2, 2, 64).unwrap();
        let psi = vec![FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2];
        assert!((ps.entanglement_entropy(&psi, &[0], LogBase::Natural).unwrap() - LN_2).abs() < 1e-14);
        let rho = ps.reduced_density_matrix(&psi, &[1]).unwrap();
        assert!((rho[(0, 0)] - 0.5).abs() < 1e-15 && rho[(0, 1)].abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_subsets() {
        let ps = ProductSpace::new(3, 2, 64).unwrap();
        let psi = vec![0.0; 8];
        assert!(ps.schmidt_probabilities(&psi, &[]).is_err());
        assert!(ps.schmidt_probabilities(&psi, &[0, 1, 2]).is_err());
        assert!(ps.schmidt_probabilities(&psi, &[1, 0]).is_err());
    }
}
