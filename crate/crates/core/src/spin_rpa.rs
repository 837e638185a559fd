//! Random-phase bosonization of the anisotropic XY spin-s model
//! `H = B sum_i s_iz - (1/2s) sum_{i != j} (Jx(i-j) s_ix s_jx + Jy(i-j) s_iy s_jy)`.
//!
//! For `|B| > B_c` the fluctuations around the aligned state map onto the
//! quadratic boson model with `lambda = |B|`, `D+-(l) = (Jx(l) +- Jy(l)) / 2`.
//! Below `B_c` the expansion is taken around the tilted mean-field states
//! `|+-Theta>` (`cos theta = |B| / B_c`), giving `lambda = B_c` and
//! `D+-(l) = (Jx(l) cos^2 theta +- Jy(l)) / 2`. A definite-parity
//! superposition of the two adds `ln 2` to the bosonic entropy whenever the
//! mean-field overlaps are negligible.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gaussian::{mode_contractions, subsystem_entropy, EntropyResult, LogBase, Selector};
use crate::lattice::{CouplingModel, Couplings, Lattice};

/// `||B| - B_c| < CRITICAL_WINDOW * B_c` is refused.
pub const CRITICAL_WINDOW: f64 = 1e-6;
/// `|B| - B_s` within this fraction of `B_c` counts as the factorizing field.
pub const FACTORIZED_TOL: f64 = 1e-9;
/// Default largest mean-field overlap for which the parity shift is applied.
pub const DEFAULT_OVERLAP_THRESHOLD: f64 = 0.1;

const ANISOTROPY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SpinModel {
    lattice: Lattice,
    two_s: u32,
    field: f64,
    jx: BTreeMap<usize, f64>,
    jy: BTreeMap<usize, f64>,
    b_c: f64,
}

impl SpinModel {
    /// Builds a spin model from `(displacement, value)` exchange entries.
    /// `two_s` is twice the spin.
    pub fn new<X, Y>(lattice: Lattice, two_s: u32, field: f64, jx: X, jy: Y) -> Result<Self>
    where
        X: IntoIterator<Item = (Vec<usize>, f64)>,
        Y: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        // reuse the displacement validation of boson couplings
        let c = Couplings::from_entries(lattice, jx, jy)?;
        Self::from_couplings(c, two_s, field)
    }

    /// First-neighbor exchange `J(+-e_i) = J_i / 2`.
    pub fn first_neighbor(lattice: Lattice, two_s: u32, field: f64, jx: &[f64], jy: &[f64]) -> Result<Self> {
        let c = Couplings::first_neighbor(lattice, jx, jy)?;
        Self::from_couplings(c, two_s, field)
    }

    fn from_couplings(c: Couplings, two_s: u32, field: f64) -> Result<Self> {
        if two_s == 0 {
            return Err(Error::InvalidSpinModel("spin must be at least 1/2".into()));
        }
        if !field.is_finite() {
            return Err(Error::InvalidSpinModel(format!("field {field} is not finite")));
        }
        let jx: BTreeMap<usize, f64> = c.plus_entries().collect();
        let jy: BTreeMap<usize, f64> = c.minus_entries().collect();
        let b_c = jx.values().sum();
        Ok(Self {
            lattice: c.lattice().clone(),
            two_s,
            field,
            jx,
            jy,
            b_c,
        })
    }

    pub fn with_field(&self, field: f64) -> Self {
        Self { field, ..self.clone() }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn two_s(&self) -> u32 {
        self.two_s
    }

    pub fn spin(&self) -> f64 {
        self.two_s as f64 / 2.0
    }

    pub fn field(&self) -> f64 {
        self.field
    }

    pub fn jx_at(&self, l: usize) -> f64 {
        self.jx.get(&l).copied().unwrap_or(0.0)
    }

    pub fn jy_at(&self, l: usize) -> f64 {
        self.jy.get(&l).copied().unwrap_or(0.0)
    }

    /// Displacements carrying any exchange, ascending.
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.jx.keys().chain(self.jy.keys()).copied().collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// `B_c = sum_l Jx(l)`.
    pub fn critical_field(&self) -> f64 {
        self.b_c
    }

    /// Common ratio `chi = Jy(l) / Jx(l)`, when it is the same on every bond.
    pub fn anisotropy(&self) -> Option<f64> {
        let mut chi: Option<f64> = None;
        for l in self.support() {
            let (x, y) = (self.jx_at(l), self.jy_at(l));
            if x == 0.0 {
                return None;
            }
            let r = y / x;
            match chi {
                None => chi = Some(r),
                Some(c) if (c - r).abs() > ANISOTROPY_TOL * c.abs().max(1.0) => return None,
                _ => {}
            }
        }
        chi
    }

    /// `B_s = B_c sqrt(chi)`, defined for `chi` in (0, 1).
    pub fn factorizing_field(&self) -> Option<f64> {
        self.anisotropy()
            .filter(|&chi| chi > 0.0 && chi < 1.0)
            .map(|chi| self.b_c * chi.sqrt())
    }

    /// Mean-field angle with `cos theta = min(|B| / B_c, 1)`.
    pub fn theta(&self) -> f64 {
        (self.field.abs() / self.b_c).min(1.0).acos()
    }

    /// `<-Theta|Theta>` restricted to `sites` sites: `cos^{2 sites s} theta`.
    pub fn overlap(&self, sites: usize) -> f64 {
        (self.field.abs() / self.b_c).min(1.0).powi((sites as u32 * self.two_s) as i32)
    }

    pub fn regime(&self) -> Result<RpaRegime> {
        if !(self.b_c > 0.0) {
            return Err(Error::Unsupported(format!(
                "B_c = sum Jx = {} must be positive (ferromagnetic-type exchange)",
                self.b_c
            )));
        }
        let b = self.field.abs();
        if (b - self.b_c).abs() < CRITICAL_WINDOW * self.b_c {
            return Err(Error::CriticalField {
                field: self.field,
                critical: self.b_c,
            });
        }
        if b > self.b_c {
            return Ok(RpaRegime::Normal);
        }
        let theta = self.theta();
        match self.factorizing_field() {
            Some(bs) if (b - bs).abs() <= FACTORIZED_TOL * self.b_c => Ok(RpaRegime::Factorized { theta }),
            _ => Ok(RpaRegime::Broken { theta }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RpaRegime {
    Normal,
    Broken { theta: f64 },
    Factorized { theta: f64 },
}

impl RpaRegime {
    pub fn label(&self) -> &'static str {
        match self {
            RpaRegime::Normal => "normal",
            RpaRegime::Broken { .. } => "broken",
            RpaRegime::Factorized { .. } => "factorized",
        }
    }

    pub fn is_parity_breaking(&self) -> bool {
        !matches!(self, RpaRegime::Normal)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RpaMap {
    pub model: CouplingModel,
    pub regime: RpaRegime,
}

/// Boson parameters `(lambda, D+, D-)` around a mean field tilted by `theta`.
/// `theta = 0` with `lambda = |B|` is the normal map.
fn boson_parameters(spin: &SpinModel, lambda: f64, cos2: f64) -> Result<(f64, Couplings)> {
    let lattice = &spin.lattice;
    let support = spin.support();
    let plus = support
        .iter()
        .map(|&l| (lattice.coords(l), 0.5 * (spin.jx_at(l) * cos2 + spin.jy_at(l))));
    let minus = support
        .iter()
        .map(|&l| (lattice.coords(l), 0.5 * (spin.jx_at(l) * cos2 - spin.jy_at(l))));
    Ok((lambda, Couplings::from_entries(lattice.clone(), plus, minus)?))
}

pub fn rpa_boson_map(spin: &SpinModel) -> Result<RpaMap> {
    let regime = spin.regime()?;
    let (lambda, couplings) = match regime {
        RpaRegime::Normal => boson_parameters(spin, spin.field.abs(), 1.0)?,
        RpaRegime::Broken { theta } | RpaRegime::Factorized { theta } => {
            if let Some(l) = spin.support().into_iter().find(|&l| spin.jy_at(l).abs() > spin.jx_at(l)) {
                return Err(Error::Unsupported(format!(
                    "broken-phase map needs |Jy| <= Jx, violated at displacement {:?}",
                    spin.lattice.coords(l)
                )));
            }
            let c = theta.cos();
            boson_parameters(spin, spin.b_c, c * c)?
        }
    };
    Ok(RpaMap {
        model: CouplingModel::new(couplings, lambda)?,
        regime,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RpaOptions {
    pub overlap_threshold: f64,
}

impl Default for RpaOptions {
    fn default() -> Self {
        Self {
            overlap_threshold: DEFAULT_OVERLAP_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RpaEntropy {
    /// Bosonic result; `entropy` includes `shift`.
    pub result: EntropyResult,
    pub regime: RpaRegime,
    /// `(O_A, O_complement)` for parity-breaking regimes.
    pub overlaps: Option<(f64, f64)>,
}

impl RpaEntropy {
    pub fn shift_applied(&self) -> bool {
        self.result.shift != 0.0
    }
}

pub fn rpa_entropy(spin: &SpinModel, selector: &Selector, base: LogBase) -> Result<RpaEntropy> {
    rpa_entropy_with(spin, selector, base, &RpaOptions::default())
}

pub fn rpa_entropy_with(spin: &SpinModel, selector: &Selector, base: LogBase, options: &RpaOptions) -> Result<RpaEntropy> {
    let map = rpa_boson_map(spin)?;
    let n_a = selector.sites(&spin.lattice)?.len();
    let n = spin.lattice.num_sites();
    let contractions = mode_contractions(&map.model)?;
    let mut result = subsystem_entropy(&contractions, selector, base)?;
    let overlaps = map
        .regime
        .is_parity_breaking()
        .then(|| (spin.overlap(n_a), spin.overlap(n - n_a)));
    let shift = match (map.regime, overlaps) {
        (RpaRegime::Factorized { .. }, _) => true,
        (RpaRegime::Broken { .. }, Some((a, b))) => a.max(b) < options.overlap_threshold,
        _ => false,
    };
    if shift {
        result.shift = base.ln2();
        result.entropy += result.shift;
    }
    Ok(RpaEntropy {
        result,
        regime: map.regime,
        overlaps,
    })
}

/// Exact entropies of the definite-parity ground states approached from
/// below (`minus`) and above (`plus`) the factorizing field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideLimits {
    pub minus: f64,
    pub plus: f64,
    pub overlap: f64,
    pub overlap_complement: f64,
}

/// Side limits in terms of the subsystem and complement overlaps.
pub fn side_limits_from_overlaps(o_a: f64, o_b: f64, base: LogBase) -> SideLimits {
    let entropy = |sign: f64| {
        let mut s = 0.0;
        for nu in [1.0, -1.0] {
            let q = (1.0 + nu * o_a) * (1.0 + sign * nu * o_b) / (2.0 * (1.0 + sign * o_a * o_b));
            if q > 0.0 {
                s -= q * q.ln();
            }
        }
        base.from_nats(s)
    };
    SideLimits {
        minus: entropy(-1.0),
        plus: entropy(1.0),
        overlap: o_a,
        overlap_complement: o_b,
    }
}

pub fn factorized_side_limits(spin: &SpinModel, selector: &Selector, base: LogBase) -> Result<SideLimits> {
    let chi = spin
        .anisotropy()
        .filter(|&c| c > 0.0 && c < 1.0)
        .ok_or_else(|| Error::Domain("no factorizing field: anisotropy must lie in (0, 1)".into()))?;
    let n_a = selector.sites(&spin.lattice)?.len();
    let n_b = spin.lattice.num_sites() - n_a;
    let o = |m: usize| chi.sqrt().powi((m as u32 * spin.two_s) as i32);
    Ok(side_limits_from_overlaps(o(n_a), o(n_b), base))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn chain(n: usize, two_s: u32, b_over_bc: f64, chi: f64) -> SpinModel {
        let m = SpinModel::first_neighbor(Lattice::chain(n).unwrap(), two_s, 0.0, &[1.0], &[chi]).unwrap();
        let bc = m.critical_field();
        m.with_field(b_over_bc * bc)
    }

    #[test]
    fn derived_fields() {
        let m = chain(8, 1, 0.3, 0.5);
        assert!((m.critical_field() - 1.0).abs() < 1e-15);
        assert_eq!(m.anisotropy(), Some(0.5));
        assert!((m.factorizing_field().unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((m.theta().cos() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn normal_map() {
        let map = rpa_boson_map(&chain(8, 1, 2.0, 0.5)).unwrap();
        assert_eq!(map.regime, RpaRegime::Normal);
        assert!((map.model.lambda - 2.0).abs() < 1e-15);
        assert!((map.model.couplings.plus_at(1) - 0.375).abs() < 1e-15);
        assert!((map.model.couplings.minus_at(1) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn zero_field_map() {
        let map = rpa_boson_map(&chain(8, 1, 0.0, 0.5)).unwrap();
        assert!((map.model.lambda - 1.0).abs() < 1e-15);
        assert!((map.model.couplings.plus_at(1) - 0.125).abs() < 1e-15);
        assert!((map.model.couplings.minus_at(1) + 0.125).abs() < 1e-15);
    }

    #[test]
    fn maps_agree_at_critical_field() {
        let m = chain(6, 1, 1.0, 0.4);
        let (l1, normal) = boson_parameters(&m, m.field().abs(), 1.0).unwrap();
        let (l2, broken) = boson_parameters(&m, m.critical_field(), 1.0).unwrap();
        assert_eq!((l1, &normal), (l2, &broken));
        assert!(matches!(rpa_boson_map(&m), Err(Error::CriticalField { .. })));
    }

    #[test]
    fn pairing_vanishes_at_factorizing_field() {
        let m = SpinModel::new(
            Lattice::chain(10).unwrap(),
            1,
            0.0,
            vec![(vec![1], 0.6), (vec![9], 0.6), (vec![2], 0.2), (vec![8], 0.2)],
            vec![(vec![1], 0.18), (vec![9], 0.18), (vec![2], 0.06), (vec![8], 0.06)],
        )
        .unwrap();
        let m = m.with_field(m.factorizing_field().unwrap());
        let map = rpa_boson_map(&m).unwrap();
        assert!(matches!(map.regime, RpaRegime::Factorized { .. }));
        for (_, v) in map.model.couplings.minus_entries() {
            assert!(v.abs() < 1e-15);
        }
        let e = rpa_entropy(&m, &Selector::chain_block(3), LogBase::Two).unwrap();
        assert!(e.result.raw().abs() < 1e-12);
        assert!((e.result.entropy - 1.0).abs() < 1e-12);
    }

    #[test]
    fn map_is_spin_independent() {
        for b in [0.4, 2.5] {
            let a = rpa_boson_map(&chain(8, 1, b, 0.5)).unwrap();
            let c = rpa_boson_map(&chain(8, 4, b, 0.5)).unwrap();
            assert_eq!(a, c);
        }
    }

    #[test]
    fn shift_bookkeeping() {
        let strong = rpa_entropy(&chain(8, 1, 3.0, 0.5), &Selector::EvenComb, LogBase::Two).unwrap();
        assert!(!strong.shift_applied() && strong.overlaps.is_none());
        let weak = rpa_entropy(&chain(8, 1, 0.5, 0.5), &Selector::EvenComb, LogBase::Two).unwrap();
        assert!(weak.shift_applied());
        assert!((weak.result.entropy - weak.result.raw() - 1.0).abs() < 1e-15);
        // large overlaps just below B_c: no shift
        let near = rpa_entropy(&chain(8, 1, 0.95, 0.5), &Selector::EvenComb, LogBase::Two).unwrap();
        assert!(!near.shift_applied());
    }

    #[test]
    fn ferro_condition_enforced() {
        let m = chain(6, 1, 0.5, 1.5);
        assert!(matches!(rpa_boson_map(&m), Err(Error::Unsupported(_))));
    }

    #[test]
    fn side_limit_example() {
        let m = chain(4, 1, 0.0, 0.5);
        let s = factorized_side_limits(&m, &Selector::chain_block(2), LogBase::Natural).unwrap();
        let expect = -(0.9f64 * 0.9f64.ln() + 0.1 * 0.1f64.ln());
        assert!((s.plus - expect).abs() < 1e-14);
        assert!((s.overlap - 0.5).abs() < 1e-15);
        assert!(s.minus > s.plus && s.minus <= LN_2 + 1e-15);
    }

    #[test]
    fn side_limits_vanishing_and_full_overlap() {
        let s = side_limits_from_overlaps(0.0, 0.0, LogBase::Natural);
        assert!((s.plus - LN_2).abs() < 1e-15 && (s.minus - LN_2).abs() < 1e-15);
        let s = side_limits_from_overlaps(1.0, 1.0, LogBase::Natural);
        assert!(s.plus.abs() < 1e-15);
    }

    #[test]
    fn odd_exponent_overlap() {
        // n_A s = 3/2: O = cos^3 theta
        let m = chain(6, 1, 0.0, 0.5);
        let s = factorized_side_limits(&m, &Selector::EvenComb, LogBase::Natural).unwrap();
        assert!((s.overlap - 0.5f64.powf(1.5)).abs() < 1e-15);
    }
}
