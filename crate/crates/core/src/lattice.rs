//! Cyclic d-dimensional lattices carrying translationally invariant quadratic
//! boson couplings, and their k-space representation.
//!
//! Sites, displacements and wave vectors all share one flat indexing: the
//! lexicographic order of `(x_1, ..., x_d)` with the last axis fastest.
//! Couplings are stored as sparse maps from displacement to value, so the
//! Fourier sums run over the coupling support only.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Relative stability margin: a model is stable only when
/// `min_k (lambda - D+_k - |D-_k|) > STABILITY_MARGIN * |lambda|`.
pub const STABILITY_MARGIN: f64 = 1e-10;

/// Relative tolerance for `D(l) = D(-l)` and for the imaginary residue of
/// the Fourier sums.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Lattice {
    sizes: Vec<usize>,
    strides: Vec<usize>,
}

impl Lattice {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidLattice("need at least one axis".into()));
        }
        if let Some(&n) = sizes.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidLattice(format!(
                "every axis needs at least 2 sites, got {n} in {sizes:?}"
            )));
        }
        let mut strides = vec![1; sizes.len()];
        for axis in (0..sizes.len() - 1).rev() {
            strides[axis] = strides[axis + 1] * sizes[axis + 1];
        }
        Ok(Self { sizes, strides })
    }

    pub fn chain(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn dims(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn num_sites(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_even(&self) -> bool {
        self.sizes.iter().all(|n| n % 2 == 0)
    }

    pub fn require_even(&self) -> Result<()> {
        if self.is_even() {
            Ok(())
        } else {
            Err(Error::OddLatticeSize(self.sizes.clone()))
        }
    }

    /// Flat index of a coordinate vector; components are reduced modulo the
    /// axis sizes.
    pub fn index(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.dims());
        coords
            .iter()
            .zip(&self.sizes)
            .zip(&self.strides)
            .map(|((&c, &n), &s)| (c % n) * s)
            .sum()
    }

    pub fn coords(&self, index: usize) -> Vec<usize> {
        self.sizes
            .iter()
            .zip(&self.strides)
            .map(|(&n, &s)| (index / s) % n)
            .collect()
    }

    pub fn contains(&self, coords: &[usize]) -> bool {
        coords.len() == self.dims() && coords.iter().zip(&self.sizes).all(|(&c, &n)| c < n)
    }

    /// Index of `i - j` (componentwise modulo the sizes).
    pub fn difference(&self, i: usize, j: usize) -> usize {
        let mut out = 0;
        for (&n, &s) in self.sizes.iter().zip(&self.strides) {
            let a = (i / s) % n;
            let b = (j / s) % n;
            out += ((a + n - b) % n) * s;
        }
        out
    }

    /// Index of `i + j`.
    pub fn sum(&self, i: usize, j: usize) -> usize {
        let mut out = 0;
        for (&n, &s) in self.sizes.iter().zip(&self.strides) {
            out += (((i / s) % n + (j / s) % n) % n) * s;
        }
        out
    }

    /// Index of `-l`, i.e. componentwise `n_i - l_i`.
    pub fn negate(&self, index: usize) -> usize {
        self.difference(0, index)
    }

    /// Index of `k + n/2` (componentwise, modulo the sizes). Only meaningful
    /// for even sizes.
    pub fn shift_half(&self, index: usize) -> usize {
        let mut out = 0;
        for (&n, &s) in self.sizes.iter().zip(&self.strides) {
            out += (((index / s) % n + n / 2) % n) * s;
        }
        out
    }

    /// Coordinate sum parity: `true` for sites with `(-1)^{x_1+...+x_d} = +1`.
    pub fn is_even_site(&self, index: usize) -> bool {
        let total: usize = self.coords(index).iter().sum();
        total % 2 == 0
    }

    /// `2 pi k~ . l` with `k~_i = k_i / n_i`, reduced so the phase is exact
    /// for rational multiples of the period.
    pub fn phase(&self, k: usize, l: usize) -> f64 {
        let mut frac = 0.0;
        for (&n, &s) in self.sizes.iter().zip(&self.strides) {
            let ki = (k / s) % n;
            let li = (l / s) % n;
            frac += ((ki * li) % n) as f64 / n as f64;
        }
        2.0 * PI * frac
    }

    /// Unit displacement along `axis`.
    pub fn unit(&self, axis: usize) -> usize {
        self.strides[axis]
    }
}

/// Translationally invariant couplings `D+(l)`, `D-(l)` on a lattice, with
/// `D(0)` excluded and `D(l) = D(-l)` enforced at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Couplings {
    lattice: Lattice,
    plus: BTreeMap<usize, f64>,
    minus: BTreeMap<usize, f64>,
}

/// Per-k Fourier couplings `D+_k`, `D-_k` in flat k order.
#[derive(Debug, Clone, PartialEq)]
pub struct KCouplings {
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

impl Couplings {
    /// Builds couplings from `(displacement, value)` entries. Entries that
    /// name the same displacement are added together, which is how the two
    /// bonds `+e_i` and `-e_i` of a two-site axis fold onto one displacement.
    pub fn from_entries<P, M>(lattice: Lattice, plus: P, minus: M) -> Result<Self>
    where
        P: IntoIterator<Item = (Vec<usize>, f64)>,
        M: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        let plus = collect_entries(&lattice, plus)?;
        let minus = collect_entries(&lattice, minus)?;
        let couplings = Self {
            lattice,
            plus,
            minus,
        };
        couplings.check_symmetric(&couplings.plus)?;
        couplings.check_symmetric(&couplings.minus)?;
        Ok(couplings)
    }

    /// First-neighbor couplings `D(+-e_i) = D_i / 2` per axis.
    pub fn first_neighbor(lattice: Lattice, plus_per_axis: &[f64], minus_per_axis: &[f64]) -> Result<Self> {
        let d = lattice.dims();
        if plus_per_axis.len() != d || minus_per_axis.len() != d {
            return Err(Error::InvalidLattice(format!(
                "need one first-neighbor coupling per axis ({d}), got {} and {}",
                plus_per_axis.len(),
                minus_per_axis.len()
            )));
        }
        let bonds = |values: &[f64]| {
            let mut out = Vec::with_capacity(2 * d);
            for (axis, &v) in values.iter().enumerate() {
                let mut fwd = vec![0; d];
                fwd[axis] = 1;
                let mut bwd = vec![0; d];
                bwd[axis] = lattice.sizes()[axis] - 1;
                out.push((fwd, 0.5 * v));
                out.push((bwd, 0.5 * v));
            }
            out
        };
        let plus = bonds(plus_per_axis);
        let minus = bonds(minus_per_axis);
        Self::from_entries(lattice.clone(), plus, minus)
    }

    pub fn zero(lattice: Lattice) -> Self {
        Self {
            lattice,
            plus: BTreeMap::new(),
            minus: BTreeMap::new(),
        }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// `D+(l)` for a flat displacement index.
    pub fn plus_at(&self, l: usize) -> f64 {
        self.plus.get(&l).copied().unwrap_or(0.0)
    }

    pub fn minus_at(&self, l: usize) -> f64 {
        self.minus.get(&l).copied().unwrap_or(0.0)
    }

    pub fn plus_entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.plus.iter().map(|(&l, &v)| (l, v))
    }

    pub fn minus_entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.minus.iter().map(|(&l, &v)| (l, v))
    }

    pub fn is_pairing_free(&self) -> bool {
        self.minus.is_empty()
    }

    /// True when every coupling links a site to one of its first neighbors.
    pub fn is_first_neighbor(&self) -> bool {
        let neighbors: Vec<usize> = (0..self.lattice.dims())
            .flat_map(|a| {
                let u = self.lattice.unit(a);
                [u, self.lattice.negate(u)]
            })
            .collect();
        self.plus
            .keys()
            .chain(self.minus.keys())
            .all(|l| neighbors.contains(l))
    }

    fn check_symmetric(&self, map: &BTreeMap<usize, f64>) -> Result<()> {
        for (&l, &v) in map {
            let mirror = self.lattice.negate(l);
            let w = map.get(&mirror).copied().unwrap_or(0.0);
            if (v - w).abs() > SYMMETRY_TOL * v.abs().max(w.abs()).max(1.0) {
                return Err(Error::AsymmetricCoupling {
                    displacement: self.lattice.coords(l),
                    mirror: self.lattice.coords(mirror),
                    value: v,
                    mirror_value: w,
                });
            }
        }
        Ok(())
    }

    /// `D_k = sum_l exp(i 2 pi k~.l) D(l)`, evaluated directly over the
    /// coupling support. The imaginary part is checked and dropped.
    pub fn fourier_couplings(&self) -> Result<KCouplings> {
        Ok(KCouplings {
            plus: self.transform(&self.plus)?,
            minus: self.transform(&self.minus)?,
        })
    }

    fn transform(&self, map: &BTreeMap<usize, f64>) -> Result<Vec<f64>> {
        let n = self.lattice.num_sites();
        let scale: f64 = map.values().map(|v| v.abs()).sum();
        let mut out = vec![0.0; n];
        for (k, slot) in out.iter_mut().enumerate() {
            let (mut re, mut im) = (0.0, 0.0);
            for (&l, &v) in map {
                let (s, c) = self.lattice.phase(k, l).sin_cos();
                re += c * v;
                im += s * v;
            }
            if im.abs() > SYMMETRY_TOL * scale + f64::MIN_POSITIVE {
                return Err(Error::NonRealFourier {
                    k: self.lattice.coords(k),
                    residue: im.abs(),
                });
            }
            *slot = re;
        }
        Ok(out)
    }

    /// Applies the odd-site sign change `b_i -> -b_i` on sites with odd
    /// coordinate sum, which flips every coupling across an odd displacement.
    pub fn odd_site_gauge(&self) -> Result<Self> {
        self.lattice.require_even()?;
        let flip = |map: &BTreeMap<usize, f64>| {
            map.iter()
                .map(|(&l, &v)| (l, if self.lattice.is_even_site(l) { v } else { -v }))
                .collect()
        };
        Ok(Self {
            lattice: self.lattice.clone(),
            plus: flip(&self.plus),
            minus: flip(&self.minus),
        })
    }

    /// Brings first-neighbor couplings with negative total `D+` to the
    /// attractive sign by the odd-site gauge. Returns the (possibly) gauged
    /// couplings and whether the gauge was applied.
    pub fn normalized_gauge(&self) -> (Self, bool) {
        let total_plus: f64 = self.plus.values().sum();
        if total_plus < 0.0 && self.is_first_neighbor() && self.lattice.is_even() {
            if let Ok(g) = self.odd_site_gauge() {
                return (g, true);
            }
        }
        (self.clone(), false)
    }

    /// Critical diagonal energy: `lambda_c = max_k (D+_k + |D-_k|)`.
    pub fn critical_lambda(&self) -> Result<CriticalPoint> {
        let kc = self.fourier_couplings()?;
        let (mut lambda_c, mut critical_k) = (f64::NEG_INFINITY, 0);
        for (k, (p, m)) in kc.plus.iter().zip(&kc.minus).enumerate() {
            let v = p + m.abs();
            if v > lambda_c {
                lambda_c = v;
                critical_k = k;
            }
        }
        let (gauged, gauge_flipped) = self.normalized_gauge();
        let attractive = gauged.plus.values().all(|&v| v >= 0.0);
        let one_sign = gauged.minus.values().all(|&v| v >= 0.0) || gauged.minus.values().all(|&v| v <= 0.0);
        let attractive_sum = (attractive && one_sign).then(|| {
            gauged.plus.values().sum::<f64>() + gauged.minus.values().map(|v| v.abs()).sum::<f64>()
        });
        Ok(CriticalPoint {
            lambda_c,
            critical_k: self.lattice.coords(critical_k),
            attractive_sum,
            gauge_flipped,
        })
    }
}

fn collect_entries<I>(lattice: &Lattice, entries: I) -> Result<BTreeMap<usize, f64>>
where
    I: IntoIterator<Item = (Vec<usize>, f64)>,
{
    let mut map = BTreeMap::new();
    for (l, v) in entries {
        if !lattice.contains(&l) {
            return Err(Error::InvalidCoupling {
                displacement: l,
                reason: format!("components must lie in 0..n_i for sizes {:?}", lattice.sizes()),
            });
        }
        if !v.is_finite() {
            return Err(Error::InvalidCoupling {
                displacement: l,
                reason: format!("non-finite value {v}"),
            });
        }
        let idx = lattice.index(&l);
        if idx == 0 {
            if v != 0.0 {
                return Err(Error::InvalidCoupling {
                    displacement: l,
                    reason: "on-site coupling D(0) belongs in lambda".into(),
                });
            }
            continue;
        }
        *map.entry(idx).or_insert(0.0) += v;
    }
    map.retain(|_, v| *v != 0.0);
    Ok(map)
}

/// Result of the stability analysis of a coupling set.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint {
    pub lambda_c: f64,
    /// Wave vector at which `D+_k + |D-_k|` peaks.
    pub critical_k: Vec<usize>,
    /// `sum_l D+(l) + |D-(l)|` when the (gauge-normalized) couplings are
    /// attractive with one-signed pairing; equals `lambda_c` in that case.
    pub attractive_sum: Option<f64>,
    pub gauge_flipped: bool,
}

impl CriticalPoint {
    pub fn is_stable(&self, lambda: f64) -> bool {
        lambda - self.lambda_c > STABILITY_MARGIN * lambda.abs()
    }
}

/// Quadratic boson model: couplings plus the diagonal energy `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingModel {
    pub couplings: Couplings,
    pub lambda: f64,
}

/// Per-k data of a stable model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeData {
    pub lattice: Lattice,
    pub lambda: f64,
    pub plus_k: Vec<f64>,
    pub minus_k: Vec<f64>,
    pub omega: Vec<f64>,
}

impl CouplingModel {
    pub fn new(couplings: Couplings, lambda: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::Domain(format!("lambda must be finite, got {lambda}")));
        }
        Ok(Self { couplings, lambda })
    }

    pub fn lattice(&self) -> &Lattice {
        self.couplings.lattice()
    }

    /// Normal-mode energies `omega_k = sqrt((lambda - D+_k)^2 - (D-_k)^2)`.
    pub fn dispersion(&self) -> Result<ModeData> {
        let kc = self.couplings.fourier_couplings()?;
        let lattice = self.lattice();
        let mut omega = Vec::with_capacity(kc.plus.len());
        for (k, (&p, &m)) in kc.plus.iter().zip(&kc.minus).enumerate() {
            let a = self.lambda - p;
            let margin = a - m.abs();
            if margin <= STABILITY_MARGIN * self.lambda.abs() {
                return Err(Error::Unstable {
                    k: lattice.coords(k),
                    margin,
                });
            }
            // factored form keeps precision when omega_k -> 0
            omega.push((margin * (a + m.abs())).sqrt());
        }
        Ok(ModeData {
            lattice: lattice.clone(),
            lambda: self.lambda,
            plus_k: kc.plus,
            minus_k: kc.minus,
            omega,
        })
    }
}
