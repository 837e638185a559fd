//! Exact diagonalization of finite XY spin-s lattices in the product basis.
//!
//! Local basis index `a = m + s` runs from the fully down state `m = -s`
//! (index 0) upwards. The `S_z` parity `P_z = (-1)^{sum_i a_i}` is diagonal,
//! so each parity sector is a principal submatrix of `H`.

use crate::eigen::{lowest_dense, lowest_lanczos, LanczosOptions, SparseSymmetric};
use crate::error::{Error, Result};
use crate::gaussian::{LogBase, Selector};
use crate::lattice::Lattice;
use crate::product_space::ProductSpace;
use crate::spin_rpa::SpinModel;

pub const DEFAULT_DIMENSION_CAP: usize = 1 << 20;
/// Total dimensions up to this use dense sector diagonalization.
pub const DENSE_LIMIT: usize = 4096;
/// Relative energy gap below which two sector ground states count as crossing.
pub const CROSSING_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SpinBasis {
    lattice: Lattice,
    two_s: u32,
    space: ProductSpace,
}

impl SpinBasis {
    pub fn new(lattice: &Lattice, two_s: u32, cap: usize) -> Result<Self> {
        let space = ProductSpace::new(lattice.num_sites(), two_s as usize + 1, cap)?;
        Ok(Self {
            lattice: lattice.clone(),
            two_s,
            space,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn space(&self) -> &ProductSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// `+1` or `-1`.
    pub fn parity(&self, index: usize) -> i8 {
        if self.space.digit_sum(index) % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn sector(&self, parity: i8) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.parity(i) == parity).collect()
    }

    /// `P_z psi`.
    pub fn apply_parity(&self, state: &[f64]) -> Vec<f64> {
        state
            .iter()
            .enumerate()
            .map(|(i, &x)| if self.parity(i) == 1 { x } else { -x })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinHamiltonian {
    pub basis: SpinBasis,
    pub matrix: SparseSymmetric,
}

/// `<m+1| s_+ |m>` for local index `a = m + s`.
fn raise(two_s: u32, a: usize) -> f64 {
    let s = two_s as f64 / 2.0;
    let m = a as f64 - s;
    (s * (s + 1.0) - m * (m + 1.0)).sqrt()
}

pub fn build_spin_hamiltonian(spin: &SpinModel, cap: usize) -> Result<SpinHamiltonian> {
    let lattice = spin.lattice();
    let basis = SpinBasis::new(lattice, spin.two_s(), cap)?;
    let space = basis.space();
    let n = lattice.num_sites();
    let two_s = spin.two_s();
    let local = space.local();
    let s = spin.spin();

    // unordered pairs with the ordered-sum couplings J(i-j) + J(j-i) folded in
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let (dij, dji) = (lattice.difference(i, j), lattice.difference(j, i));
            let jx = spin.jx_at(dij) + spin.jx_at(dji);
            let jy = spin.jy_at(dij) + spin.jy_at(dji);
            if jx != 0.0 || jy != 0.0 {
                // -(1/2s) (jx sx sx + jy sy sy)
                //   = -(1/8s) [(jx - jy)(s+s+ + s-s-) + (jx + jy)(s+s- + s-s+)]
                let same = -(jx - jy) / (8.0 * s);
                let mixed = -(jx + jy) / (8.0 * s);
                pairs.push((i, j, same, mixed));
            }
        }
    }

    let mut triplets = Vec::new();
    for idx in 0..space.dim() {
        let digits = space.digits(idx);
        let diag: f64 = digits.iter().map(|&a| spin.field() * (a as f64 - s)).sum();
        triplets.push((idx, idx, diag));
        for &(i, j, same, mixed) in &pairs {
            let (ai, aj) = (digits[i], digits[j]);
            let (si, sj) = (space.stride(i), space.stride(j));
            let up_i = ai + 1 < local;
            let up_j = aj + 1 < local;
            let dn_i = ai > 0;
            let dn_j = aj > 0;
            if up_i && up_j && same != 0.0 {
                triplets.push((idx + si + sj, idx, same * raise(two_s, ai) * raise(two_s, aj)));
            }
            if dn_i && dn_j && same != 0.0 {
                triplets.push((idx - si - sj, idx, same * raise(two_s, ai - 1) * raise(two_s, aj - 1)));
            }
            if up_i && dn_j && mixed != 0.0 {
                triplets.push((idx + si - sj, idx, mixed * raise(two_s, ai) * raise(two_s, aj - 1)));
            }
            if dn_i && up_j && mixed != 0.0 {
                triplets.push((idx - si + sj, idx, mixed * raise(two_s, ai - 1) * raise(two_s, aj)));
            }
        }
    }
    let matrix = SparseSymmetric::from_triplets(space.dim(), triplets);
    Ok(SpinHamiltonian { basis, matrix })
}

impl SpinHamiltonian {
    /// `max |<i|[H, P_z]|j>|`, zero by construction.
    pub fn parity_commutator_norm(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.matrix.dim() {
            let pr = self.basis.parity(r) as f64;
            for (c, v) in self.matrix.row(r) {
                let pc = self.basis.parity(c) as f64;
                worst = worst.max((v * (pc - pr)).abs());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorGroundState {
    pub parity: i8,
    pub energy: f64,
    /// Normalized, in the full product basis.
    pub vector: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateResult {
    /// Positive parity first.
    pub sectors: [SectorGroundState; 2],
    pub ground_parity: i8,
    /// `E(-) - E(+)`.
    pub gap: f64,
    pub crossing: bool,
}

impl GroundStateResult {
    pub fn sector(&self, parity: i8) -> &SectorGroundState {
        if parity >= 0 {
            &self.sectors[0]
        } else {
            &self.sectors[1]
        }
    }

    pub fn ground(&self) -> &SectorGroundState {
        self.sector(self.ground_parity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    /// Dense up to [`DENSE_LIMIT`], Lanczos above.
    #[default]
    Auto,
    Dense,
    Lanczos,
}

pub fn ground_state_definite_parity(h: &SpinHamiltonian) -> Result<GroundStateResult> {
    ground_state_with(h, Solver::Auto)
}

pub fn ground_state_with(h: &SpinHamiltonian, solver: Solver) -> Result<GroundStateResult> {
    let scale = h.matrix.norm_bound().max(1.0);
    let dense = match solver {
        Solver::Auto => h.basis.dim() <= DENSE_LIMIT,
        Solver::Dense => true,
        Solver::Lanczos => false,
    };
    let solve = |parity: i8| -> Result<SectorGroundState> {
        let keep = h.basis.sector(parity);
        let block = h.matrix.restrict(&keep);
        let pair = if dense {
            lowest_dense(&block)?
        } else {
            lowest_lanczos(&block, &LanczosOptions::default())?
        };
        if pair.residual > 1e-9 * scale {
            return Err(Error::NotConverged {
                residual: pair.residual,
                iterations: 0,
            });
        }
        let mut vector = vec![0.0; h.basis.dim()];
        for (&k, &x) in keep.iter().zip(&pair.vector) {
            vector[k] = x;
        }
        Ok(SectorGroundState {
            parity,
            energy: pair.value,
            vector,
            residual: pair.residual,
        })
    };
    let plus = solve(1)?;
    let minus = solve(-1)?;
    let gap = minus.energy - plus.energy;
    Ok(GroundStateResult {
        ground_parity: if gap >= 0.0 { 1 } else { -1 },
        crossing: gap.abs() < CROSSING_TOL * scale,
        gap,
        sectors: [plus, minus],
    })
}

/// Exact entanglement entropy of `state` for the sites picked by `selector`.
pub fn reduced_entropy_exact(basis: &SpinBasis, state: &[f64], selector: &Selector, base: LogBase) -> Result<f64> {
    let sites = selector.sites(basis.lattice())?;
    basis.space().entanglement_entropy(state, &sites, base)
}

/// Amplitudes of `exp(-i theta s_y)|m = -s>` on local indices `a = 0..=2s`:
/// `(-1)^a sqrt(C(2s, a)) cos^{2s-a}(theta/2) sin^a(theta/2)`.
pub fn tilted_local_state(two_s: u32, theta: f64) -> Vec<f64> {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let n = two_s as i32;
    let mut binom = 1.0;
    (0..=n)
        .map(|a| {
            if a > 0 {
                binom *= (n - a + 1) as f64 / a as f64;
            }
            let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
            sign * binom.sqrt() * c.powi(n - a) * s.powi(a)
        })
        .collect()
}

/// Mean-field product state `|Theta>` on every site.
pub fn tilted_product_state(basis: &SpinBasis, theta: f64) -> Vec<f64> {
    let local = tilted_local_state(basis.two_s, theta);
    basis.space().product_state(&vec![local; basis.lattice().num_sites()])
}

/// Normalized definite-parity combinations `|Theta> +- P_z|Theta>`,
/// positive parity first. `P_z|Theta> = |-Theta>`.
pub fn parity_projected_tilted_states(basis: &SpinBasis, theta: f64) -> (Vec<f64>, Vec<f64>) {
    let t = tilted_product_state(basis, theta);
    let pt = basis.apply_parity(&t);
    let combine = |sign: f64| {
        let v: Vec<f64> = t.iter().zip(&pt).map(|(a, b)| a + sign * b).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / norm).collect::<Vec<f64>>()
    };
    (combine(1.0), combine(-1.0))
}

/// `|<a|b>|^2` for normalized real states.
pub fn fidelity(a: &[f64], b: &[f64]) -> f64 {
    let o: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    o * o
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn chain(n: usize, two_s: u32, field: f64, jx: f64, jy: f64) -> SpinModel {
        SpinModel::first_neighbor(Lattice::chain(n).unwrap(), two_s, field, &[jx], &[jy]).unwrap()
    }

    #[test]
    fn free_spins_align() {
        let h = build_spin_hamiltonian(&chain(4, 2, 0.7, 0.0, 0.0), DEFAULT_DIMENSION_CAP).unwrap();
        let g = ground_state_definite_parity(&h).unwrap();
        assert!((g.ground().energy + 4.0 * 0.7 * 1.0).abs() < 1e-12);
        assert_eq!(g.ground_parity, 1);
    }

    #[test]
    fn commutes_with_parity() {
        let h = build_spin_hamiltonian(&chain(5, 3, 0.3, 1.0, 0.4), DEFAULT_DIMENSION_CAP).unwrap();
        assert!(h.parity_commutator_norm() < 1e-12);
        assert!(h.matrix.asymmetry() < 1e-12);
    }

    fn pauli_kron(ops: &[&DMatrix<f64>]) -> DMatrix<f64> {
        ops.iter().skip(1).fold(ops[0].clone(), |acc, m| acc.kronecker(m))
    }

    /// `H` for s = 1/2 first-neighbor rings from explicit Kronecker products.
    /// Local basis (down, up); `s_x s_x = X X / 4`, `s_y s_y = -Y' Y' / 4`
    /// with the real `Y' = i sigma_y`.
    fn kron_hamiltonian(n: usize, b: f64, jx: f64, jy: f64) -> DMatrix<f64> {
        let id = DMatrix::<f64>::identity(2, 2);
        let x = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let yr = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let z = DMatrix::from_row_slice(2, 2, &[-0.5, 0.0, 0.0, 0.5]);
        let dim = 1 << n;
        let mut h = DMatrix::zeros(dim, dim);
        let site_op = |ops: Vec<(usize, &DMatrix<f64>)>| {
            let mut list: Vec<&DMatrix<f64>> = vec![&id; n];
            for (s, o) in ops {
                list[s] = o;
            }
            pauli_kron(&list)
        };
        for i in 0..n {
            h += site_op(vec![(i, &z)]) * b;
        }
        // ordered pairs with J(+-1) = J/2 folded per displacement
        let mut coupling = vec![vec![(0.0, 0.0); n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j && ((i + 1) % n == j || (j + 1) % n == i) {
                    let mult = if n == 2 { 2.0 } else { 1.0 };
                    coupling[i][j] = (mult * jx / 2.0, mult * jy / 2.0);
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let (cx, cy) = coupling[i][j];
                if cx == 0.0 && cy == 0.0 {
                    continue;
                }
                let xx = site_op(vec![(i, &x), (j, &x)]) * 0.25;
                let yy = site_op(vec![(i, &yr), (j, &yr)]) * -0.25;
                h -= (xx * cx + yy * cy) * 1.0; // 1/(2s) = 1
            }
        }
        h
    }

    #[test]
    fn matches_kronecker_construction() {
        for (n, b, jx, jy) in [(4, 0.0, 1.0, 0.0), (4, 0.3, 1.0, 0.5), (2, 0.2, 1.0, 0.3), (3, 0.1, 0.8, -0.2)] {
            let h = build_spin_hamiltonian(&chain(n, 1, b, jx, jy), DEFAULT_DIMENSION_CAP).unwrap();
            let reference = kron_hamiltonian(n, b, jx, jy);
            let diff = (h.matrix.to_dense() - &reference).abs().max();
            assert!(diff < 1e-14, "n={n}: {diff}");
        }
    }

    #[test]
    fn two_site_ring_by_hand() {
        // n = 2: J(1) = J(-1) = J, ordered sum gives -(2J) s_x s_x with 1/(2s) = 1
        let h = build_spin_hamiltonian(&chain(2, 1, 0.0, 1.0, 0.0), DEFAULT_DIMENSION_CAP).unwrap();
        let m = h.matrix.to_dense();
        // -(2/4) X X: couples |00>,|11> and |01>,|10> with -1/2
        assert!((m[(0, 3)] + 0.5).abs() < 1e-15);
        assert!((m[(1, 2)] + 0.5).abs() < 1e-15);
        assert_eq!(m[(0, 0)], 0.0);
    }

    #[test]
    fn dense_ground_energy_oracle() {
        let h = build_spin_hamiltonian(&chain(4, 1, 0.0, 1.0, 0.0), DEFAULT_DIMENSION_CAP).unwrap();
        let g = ground_state_definite_parity(&h).unwrap();
        let full = nalgebra::SymmetricEigen::new(h.matrix.to_dense()).eigenvalues.min();
        assert!((g.ground().energy - full).abs() < 1e-12);
        // Ising ring at zero field: both parities degenerate
        assert!(g.crossing);
    }

    #[test]
    fn lanczos_path_agrees_with_dense() {
        let h = build_spin_hamiltonian(&chain(9, 1, 0.4, 1.0, 0.5), DEFAULT_DIMENSION_CAP).unwrap();
        let d = ground_state_with(&h, Solver::Dense).unwrap();
        let l = ground_state_with(&h, Solver::Lanczos).unwrap();
        for p in [1, -1] {
            assert!((d.sector(p).energy - l.sector(p).energy).abs() < 1e-9);
            assert!(fidelity(&d.sector(p).vector, &l.sector(p).vector) > 1.0 - 1e-9);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let m = chain(10, 2, 0.0, 1.0, 0.5);
        assert!(matches!(build_spin_hamiltonian(&m, 1000), Err(Error::DimensionCap { .. })));
    }

    fn expm_minus_i_theta_sy(two_s: u32, theta: f64) -> DMatrix<f64> {
        // -i s_y = (s_- - s_+) / 2 is real
        let d = two_s as usize + 1;
        let mut g = DMatrix::zeros(d, d);
        for a in 0..two_s as usize {
            let r = raise(two_s, a);
            g[(a + 1, a)] -= 0.5 * r;
            g[(a, a + 1)] += 0.5 * r;
        }
        let g = g * theta;
        let mut term = DMatrix::identity(d, d);
        let mut sum = term.clone();
        for k in 1..60 {
            term = &term * &g / k as f64;
            sum += &term;
        }
        sum
    }

    #[test]
    fn tilted_state_matches_rotation() {
        for two_s in 1..=4 {
            for theta in [0.3, 1.1, 2.5] {
                let r = expm_minus_i_theta_sy(two_s, theta);
                let v = tilted_local_state(two_s, theta);
                for a in 0..=two_s as usize {
                    assert!((r[(a, 0)] - v[a]).abs() < 1e-13, "2s={two_s} theta={theta} a={a}");
                }
            }
        }
    }

    #[test]
    fn tilted_overlap_is_cos_power() {
        let basis = SpinBasis::new(&Lattice::chain(3).unwrap(), 3, 1 << 20).unwrap();
        let t = tilted_product_state(&basis, 0.9);
        let o: f64 = t.iter().zip(basis.apply_parity(&t)).map(|(a, b)| a * b).sum();
        assert!((o - 0.9f64.cos().powi(9)).abs() < 1e-13);
    }

    #[test]
    fn product_state_has_no_entanglement() {
        let basis = SpinBasis::new(&Lattice::chain(6).unwrap(), 1, 1 << 20).unwrap();
        let t = tilted_product_state(&basis, 0.7);
        for sel in [Selector::EvenComb, Selector::chain_block(3), Selector::SingleSite(vec![2])] {
            assert!(reduced_entropy_exact(&basis, &t, &sel, LogBase::Two).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn complement_symmetry() {
        let h = build_spin_hamiltonian(&chain(8, 1, 0.3, 1.0, 0.5), DEFAULT_DIMENSION_CAP).unwrap();
        let g = ground_state_definite_parity(&h).unwrap();
        let lattice = h.basis.lattice().clone();
        for sel in [Selector::EvenComb, Selector::chain_block(3), Selector::Explicit(vec![vec![0], vec![5]])] {
            let a = reduced_entropy_exact(&h.basis, &g.ground().vector, &sel, LogBase::Natural).unwrap();
            let b = reduced_entropy_exact(&h.basis, &g.ground().vector, &sel.complement(&lattice).unwrap(), LogBase::Natural)
                .unwrap();
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn strong_field_ground_parity_positive() {
        let h = build_spin_hamiltonian(&chain(6, 1, 10.0, 1.0, 0.5), DEFAULT_DIMENSION_CAP).unwrap();
        assert_eq!(ground_state_definite_parity(&h).unwrap().ground_parity, 1);
    }

    #[test]
    fn factorizing_field_ground_states_are_tilted_products() {
        let m = chain(6, 1, 0.0, 1.0, 0.5);
        let bs = m.factorizing_field().unwrap();
        let m = m.with_field(bs);
        let h = build_spin_hamiltonian(&m, DEFAULT_DIMENSION_CAP).unwrap();
        let g = ground_state_definite_parity(&h).unwrap();
        let (plus, minus) = parity_projected_tilted_states(&h.basis, m.theta());
        assert!(fidelity(&g.sector(1).vector, &plus) > 1.0 - 1e-10);
        assert!(fidelity(&g.sector(-1).vector, &minus) > 1.0 - 1e-10);
        assert!(g.crossing);
    }
}
