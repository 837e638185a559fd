//! Ground-state contractions of a stable quadratic boson model and the
//! entanglement entropies of arbitrary site subsets.
//!
//! A reduced ground state is Gaussian and fully fixed by the contraction
//! matrix `D_A = [[F+, F-], [F-, I + F+]]` restricted to the subset
//! (all blocks are real for symmetric couplings). Its symplectic eigenvalues
//! `f_j` are the non-negative eigenvalues of `D_A M_A` with
//! `M = diag(I, -I)`; the spectrum comes in pairs `{f, -1 - f}`. The
//! reduced state is thermal-like in `m` effective modes with occupations
//! `f_j`, so `S = sum_j h(f_j)` with `h(f) = -f ln f + (1+f) ln(1+f)`.

use std::fmt;

use nalgebra::{linalg::Schur, DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::lattice::{CouplingModel, Lattice, ModeData};

/// Symplectic eigenvalues in `[-CLAMP_TOL, 0)` are rounding noise.
pub const CLAMP_TOL: f64 = 1e-10;
/// Allowed relative asymmetry of the reduced symplectic form, equivalently
/// the mismatch in the `{f, -1 - f}` pairing.
pub const PAIRING_TOL: f64 = 1e-8;
/// Imaginary parts of general `D_A M_A` eigenvalues below this are discarded.
pub const IMAG_TOL: f64 = 1e-9;
/// Below this `h` switches to its small-`f` series.
const H_SERIES_CUTOFF: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

impl LogBase {
    /// Converts a value in nats to this base.
    pub fn from_nats(self, nats: f64) -> f64 {
        match self {
            LogBase::Natural => nats,
            LogBase::Two => nats / std::f64::consts::LN_2,
        }
    }

    /// The parity-restoration shift `ln 2` in this base.
    pub fn ln2(self) -> f64 {
        self.from_nats(std::f64::consts::LN_2)
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogBase::Natural => write!(f, "e"),
            LogBase::Two => write!(f, "2"),
        }
    }
}

/// `h(f) = -f ln f + (1 + f) ln(1 + f)`, the entropy of one thermal mode
/// with mean occupation `f`.
pub fn entropy_h(f: f64, base: LogBase) -> Result<f64> {
    if f.is_nan() || f < -CLAMP_TOL {
        return Err(Error::Domain(format!("h(f) needs f >= 0, got {f:e}")));
    }
    let f = f.max(0.0);
    let nats = if f == 0.0 {
        0.0
    } else if f < H_SERIES_CUTOFF {
        -f * (f.ln() - 1.0) - 0.5 * f * f
    } else {
        -f * f.ln() + (1.0 + f) * f.ln_1p()
    };
    Ok(base.from_nats(nats))
}

/// Ground-state contractions per mode and per separation.
#[derive(Debug, Clone)]
pub struct ModeContractions {
    pub modes: ModeData,
    /// `f+_k = <b_k^dag b_k>`.
    pub plus_k: Vec<f64>,
    /// `f-_k = <b_k b_-k>`.
    pub minus_k: Vec<f64>,
    /// `F+_l = <b_j^dag b_{j+l}>` indexed by flat displacement.
    pub plus_l: Vec<f64>,
    pub minus_l: Vec<f64>,
}

/// `f+_k = (lambda - D+_k)/(2 w_k) - 1/2`, `f-_k = D-_k / (2 w_k)` and
/// their inverse transforms `F_l = (1/n) sum_k exp(-i 2 pi k~.l) f_k`.
pub fn mode_contractions(model: &CouplingModel) -> Result<ModeContractions> {
    let modes = model.dispersion()?;
    let n = modes.omega.len();
    let mut plus_k = Vec::with_capacity(n);
    let mut minus_k = Vec::with_capacity(n);
    for k in 0..n {
        let a = modes.lambda - modes.plus_k[k];
        let b = modes.minus_k[k];
        let w = modes.omega[k];
        // (a - w)/(2w) rewritten without the cancellation at weak coupling
        plus_k.push(b * b / (2.0 * w * (a + w)));
        minus_k.push(b / (2.0 * w));
    }
    let lattice = &modes.lattice;
    let (plus_l, minus_l) = inverse_transform(lattice, &plus_k, &minus_k);
    Ok(ModeContractions {
        modes,
        plus_k,
        minus_k,
        plus_l,
        minus_l,
    })
}

fn inverse_transform(lattice: &Lattice, plus_k: &[f64], minus_k: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = plus_k.len();
    let mut plus_l = vec![0.0; n];
    let mut minus_l = vec![0.0; n];
    for l in 0..n {
        let (mut p, mut m) = (0.0, 0.0);
        for k in 0..n {
            let c = lattice.phase(k, l).cos();
            p += c * plus_k[k];
            m += c * minus_k[k];
        }
        plus_l[l] = p / n as f64;
        minus_l[l] = m / n as f64;
    }
    (plus_l, minus_l)
}

impl ModeContractions {
    pub fn lattice(&self) -> &Lattice {
        &self.modes.lattice
    }

    pub fn num_sites(&self) -> usize {
        self.plus_k.len()
    }
}

/// Which sites form the subsystem `A`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Selector {
    SingleSite(Vec<usize>),
    /// Contiguous `(start, len)` range per axis, wrapping cyclically.
    Block(Vec<(usize, usize)>),
    /// Sites with even coordinate sum.
    EvenComb,
    OddComb,
    Explicit(Vec<Vec<usize>>),
}

impl Selector {
    /// The block of the first `len` sites of a chain.
    pub fn chain_block(len: usize) -> Self {
        Selector::Block(vec![(0, len)])
    }

    /// Flat site indices, sorted and deduplicated. Rejects empty and
    /// full-lattice selections.
    pub fn sites(&self, lattice: &Lattice) -> Result<Vec<usize>> {
        let sites = self.raw_sites(lattice)?;
        if sites.is_empty() {
            return Err(Error::InvalidSelector(format!("{self} selects no site")));
        }
        if sites.len() == lattice.num_sites() {
            return Err(Error::InvalidSelector(format!("{self} selects the whole lattice")));
        }
        Ok(sites)
    }

    fn raw_sites(&self, lattice: &Lattice) -> Result<Vec<usize>> {
        let check = |c: &Vec<usize>| {
            if lattice.contains(c) {
                Ok(lattice.index(c))
            } else {
                Err(Error::InvalidSelector(format!(
                    "site {c:?} outside lattice {:?}",
                    lattice.sizes()
                )))
            }
        };
        let mut sites = match self {
            Selector::SingleSite(c) => vec![check(c)?],
            Selector::Explicit(list) => list.iter().map(check).collect::<Result<_>>()?,
            Selector::EvenComb | Selector::OddComb => {
                lattice.require_even()?;
                let want = matches!(self, Selector::EvenComb);
                (0..lattice.num_sites())
                    .filter(|&i| lattice.is_even_site(i) == want)
                    .collect()
            }
            Selector::Block(ranges) => {
                if ranges.len() != lattice.dims() {
                    return Err(Error::InvalidSelector(format!(
                        "block needs one range per axis ({}), got {}",
                        lattice.dims(),
                        ranges.len()
                    )));
                }
                for (&(start, len), &n) in ranges.iter().zip(lattice.sizes()) {
                    if len == 0 || len > n || start >= n {
                        return Err(Error::InvalidSelector(format!(
                            "block range ({start}, {len}) invalid for axis of size {n}"
                        )));
                    }
                }
                let count: usize = ranges.iter().map(|r| r.1).product();
                (0..count)
                    .map(|mut idx| {
                        let mut coords = vec![0; ranges.len()];
                        for (axis, &(start, len)) in ranges.iter().enumerate().rev() {
                            coords[axis] = start + idx % len;
                            idx /= len;
                        }
                        lattice.index(&coords)
                    })
                    .collect()
            }
        };
        sites.sort_unstable();
        sites.dedup();
        Ok(sites)
    }

    /// The complementary subset as an explicit list.
    pub fn complement(&self, lattice: &Lattice) -> Result<Selector> {
        let inside = self.sites(lattice)?;
        let rest = (0..lattice.num_sites())
            .filter(|i| inside.binary_search(i).is_err())
            .map(|i| lattice.coords(i))
            .collect();
        Ok(Selector::Explicit(rest))
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |c: &[usize]| c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        match self {
            Selector::SingleSite(c) => write!(f, "single_site:{}", join(c)),
            Selector::Block(r) if r.len() == 1 && r[0].0 == 0 => write!(f, "block:{}", r[0].1),
            Selector::Block(r) => {
                let parts: Vec<String> = r.iter().map(|(s, l)| format!("{s}+{l}")).collect();
                write!(f, "block:{}", parts.join("x"))
            }
            Selector::EvenComb => write!(f, "even_comb"),
            Selector::OddComb => write!(f, "odd_comb"),
            Selector::Explicit(list) => {
                let parts: Vec<String> = list.iter().map(|c| join(c)).collect();
                write!(f, "explicit:[{}]", parts.join(";"))
            }
        }
    }
}

/// Parses the labels produced by `Display`, plus a few shorthands:
/// `single_site` (origin), `single_site:1 2`, `block:L`, `block:LxM`
/// (from the origin), `block:0+6x0+3`, `even_comb`, `odd_comb`,
/// `explicit:[0 0;1 1]`. Coordinates may be separated by spaces or commas.
impl std::str::FromStr for Selector {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidSelector(format!("cannot parse selector '{text}': {why}"));
        let coords = |s: &str| -> Result<Vec<usize>> {
            s.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<usize>().map_err(|_| bad("expected non-negative integers")))
                .collect()
        };
        let text_trim = text.trim();
        let (head, arg) = match text_trim.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (text_trim, None),
        };
        match (head, arg) {
            ("even_comb", None) => Ok(Selector::EvenComb),
            ("odd_comb", None) => Ok(Selector::OddComb),
            ("single_site", None) => Ok(Selector::SingleSite(Vec::new())),
            ("single_site", Some(a)) => Ok(Selector::SingleSite(coords(a)?)),
            ("block", Some(a)) => {
                let ranges = a
                    .split('x')
                    .map(|part| {
                        let part = part.trim();
                        match part.split_once('+') {
                            Some((start, len)) => Ok((
                                start.trim().parse().map_err(|_| bad("bad block start"))?,
                                len.trim().parse().map_err(|_| bad("bad block length"))?,
                            )),
                            None => Ok((0, part.parse().map_err(|_| bad("bad block length"))?)),
                        }
                    })
                    .collect::<Result<Vec<(usize, usize)>>>()?;
                Ok(Selector::Block(ranges))
            }
            ("explicit", Some(a)) => {
                let inner = a
                    .strip_prefix('[')
                    .and_then(|x| x.strip_suffix(']'))
                    .ok_or_else(|| bad("explicit sites must be enclosed in [ ]"))?;
                let sites = inner
                    .split(';')
                    .filter(|t| !t.trim().is_empty())
                    .map(coords)
                    .collect::<Result<Vec<_>>>()?;
                Ok(Selector::Explicit(sites))
            }
            _ => Err(bad("unknown selector kind")),
        }
    }
}

impl Selector {
    /// Fills in the origin for a bare `single_site`.
    pub fn resolve(self, lattice: &Lattice) -> Self {
        match self {
            Selector::SingleSite(c) if c.is_empty() => Selector::SingleSite(vec![0; lattice.dims()]),
            other => other,
        }
    }
}

/// The real blocks `F+_{ij} = F+_{i-j}` and `F-_{ij} = F-_{i-j}` for
/// `i, j` in the subset.
#[derive(Debug, Clone)]
pub struct ContractionMatrix {
    pub sites: Vec<usize>,
    pub plus: DMatrix<f64>,
    pub minus: DMatrix<f64>,
}

impl ContractionMatrix {
    /// Restriction to an arbitrary site list, without the strict-subset
    /// check that [`subsystem_contraction_matrix`] applies.
    pub fn for_sites(contractions: &ModeContractions, sites: &[usize]) -> Self {
        let lattice = contractions.lattice();
        let m = sites.len();
        let mut plus = DMatrix::zeros(m, m);
        let mut minus = DMatrix::zeros(m, m);
        for (a, &i) in sites.iter().enumerate() {
            for (b, &j) in sites.iter().enumerate() {
                let l = lattice.difference(i, j);
                plus[(a, b)] = contractions.plus_l[l];
                minus[(a, b)] = contractions.minus_l[l];
            }
        }
        Self {
            sites: sites.to_vec(),
            plus,
            minus,
        }
    }

    pub fn size(&self) -> usize {
        self.sites.len()
    }

    /// The full `2m x 2m` matrix `[[F+, F-], [F-, I + F+]]`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let m = self.size();
        let mut d = DMatrix::zeros(2 * m, 2 * m);
        d.view_mut((0, 0), (m, m)).copy_from(&self.plus);
        d.view_mut((0, m), (m, m)).copy_from(&self.minus);
        d.view_mut((m, 0), (m, m)).copy_from(&self.minus);
        d.view_mut((m, m), (m, m))
            .copy_from(&(DMatrix::identity(m, m) + &self.plus));
        d
    }

    /// `D_A M_A` with `M_A = diag(I, -I)`.
    pub fn times_metric(&self) -> DMatrix<f64> {
        let m = self.size();
        let mut d = self.matrix();
        for col in m..2 * m {
            d.column_mut(col).neg_mut();
        }
        d
    }
}

pub fn subsystem_contraction_matrix(contractions: &ModeContractions, selector: &Selector) -> Result<ContractionMatrix> {
    let sites = selector.sites(contractions.lattice())?;
    Ok(ContractionMatrix::for_sites(contractions, &sites))
}

/// Non-negative symplectic eigenvalues of `D_A`, sorted descending.
///
/// The real orthogonal change of basis `T = [[I, I], [I, -I]] / sqrt(2)`
/// maps `D_A M_A` to `[[-I/2, X], [P, -I/2]]` with `X = 1/2 + F+ + F-` and
/// `P = 1/2 + F+ - F-`, so its eigenvalues are `-1/2 +- nu` with
/// `nu^2 in eig(X P)`. We diagonalize `X P - 1/4 = F+ + F+^2 - F-^2 + [F-, F+]`
/// (eigenvalues `f (1 + f)`) after the similarity `X^{-1/2} (.) X^{1/2}`
/// that makes it symmetric. Small `f` then keeps full relative precision,
/// which a direct eigensolve of `D_A M_A` does not.
pub fn symplectic_spectrum(d: &ContractionMatrix) -> Result<Vec<f64>> {
    let m = d.size();
    let (a, b) = (&d.plus, &d.minus);
    let half = DMatrix::<f64>::identity(m, m) * 0.5;
    let x = a + b + &half;
    let q = a + a * a - b * b + b * a - a * b;

    let ex = SymmetricEigen::new(x);
    let min_x = ex.eigenvalues.min();
    if !(min_x > 0.0) {
        return Err(Error::NumericalDegeneracy(format!(
            "position covariance not positive definite (min eigenvalue {min_x:e})"
        )));
    }
    let v = &ex.eigenvectors;
    let root = v * DMatrix::from_diagonal(&ex.eigenvalues.map(f64::sqrt)) * v.transpose();
    let inv_root = v * DMatrix::from_diagonal(&ex.eigenvalues.map(|e| 1.0 / e.sqrt())) * v.transpose();
    let s = &inv_root * q * &root;

    let scale = s.amax();
    let asym = (&s - s.transpose()).amax();
    if asym > PAIRING_TOL * scale.max(1.0) {
        return Err(Error::NumericalDegeneracy(format!(
            "reduced symplectic form not symmetric (defect {asym:e}); eigenvalues of D_A M_A do not pair"
        )));
    }
    let sym = (&s + s.transpose()) * 0.5;
    let mut out: Vec<f64> = SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .map(|&mu| {
            // f (1 + f) = mu
            let f = 2.0 * mu / (1.0 + (1.0 + 4.0 * mu).max(0.0).sqrt());
            if f >= 0.0 {
                Ok(f)
            } else if f >= -CLAMP_TOL {
                Ok(0.0)
            } else {
                Err(Error::NumericalDegeneracy(format!("negative symplectic eigenvalue {f:e}")))
            }
        })
        .collect::<Result<_>>()?;
    out.sort_by(|a, b| b.total_cmp(a));
    Ok(out)
}

/// All `2m` eigenvalues of `D_A M_A` from a general (Schur) eigensolve,
/// sorted ascending by real part. Used to cross-check the `{f, -1 - f}`
/// pairing; [`symplectic_spectrum`] does not depend on it.
pub fn metric_product_eigenvalues(d: &ContractionMatrix) -> Result<Vec<f64>> {
    let m = d.size();
    let schur = Schur::try_new(d.times_metric(), 1e-14, 5000 * (2 * m).max(10))
        .ok_or_else(|| Error::NumericalDegeneracy("Schur iteration did not converge".into()))?;
    let mut out = Vec::with_capacity(2 * m);
    for z in schur.complex_eigenvalues().iter() {
        if z.im.abs() > IMAG_TOL * z.re.abs().max(1.0) {
            return Err(Error::NumericalDegeneracy(format!(
                "complex eigenvalue {} + {}i of D_A M_A",
                z.re, z.im
            )));
        }
        out.push(z.re);
    }
    out.sort_by(|a, b| a.total_cmp(b));
    Ok(out)
}

/// Entropy of a reduced state together with its symplectic spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyResult {
    pub spectrum: Vec<f64>,
    /// Entropy in `base`, including `shift`.
    pub entropy: f64,
    pub base: LogBase,
    /// Additive parity-restoration shift already included in `entropy`.
    pub shift: f64,
}

impl EntropyResult {
    fn from_spectrum(spectrum: Vec<f64>, base: LogBase) -> Result<Self> {
        let mut s = 0.0;
        for &f in &spectrum {
            s += entropy_h(f, base)?;
        }
        Ok(Self {
            spectrum,
            entropy: s,
            base,
            shift: 0.0,
        })
    }

    pub fn raw(&self) -> f64 {
        self.entropy - self.shift
    }
}

pub fn subsystem_entropy(contractions: &ModeContractions, selector: &Selector, base: LogBase) -> Result<EntropyResult> {
    let d = subsystem_contraction_matrix(contractions, selector)?;
    EntropyResult::from_spectrum(symplectic_spectrum(&d)?, base)
}

/// Even-comb entropy from the folded mode contractions
/// `f~_k = (f_k + f_{k+n/2}) / 2`, without any matrix diagonalization.
pub fn even_odd_entropy_folded(contractions: &ModeContractions, base: LogBase) -> Result<EntropyResult> {
    let lattice = contractions.lattice();
    lattice.require_even()?;
    let mut spectrum = Vec::with_capacity(contractions.num_sites() / 2);
    for k in 0..contractions.num_sites() {
        let partner = lattice.shift_half(k);
        if partner < k {
            continue;
        }
        let p = 0.5 * (contractions.plus_k[k] + contractions.plus_k[partner]);
        let m = 0.5 * (contractions.minus_k[k] + contractions.minus_k[partner]);
        // sqrt((1/2 + p)^2 - m^2) - 1/2 = x / (sqrt(1/4 + x) + 1/2)
        let x = p + p * p - m * m;
        let f = if x >= 0.0 {
            x / ((0.25 + x).sqrt() + 0.5)
        } else if x >= -CLAMP_TOL {
            0.0
        } else {
            return Err(Error::NumericalDegeneracy(format!(
                "folded contraction at k={:?} violates uncertainty: {x:e}",
                lattice.coords(k)
            )));
        };
        spectrum.push(f);
    }
    spectrum.sort_by(|a, b| b.total_cmp(a));
    EntropyResult::from_spectrum(spectrum, base)
}

/// `(n/2) S(rho_i) - S(rho_E)`, the mutual entropy among the even sites.
pub fn even_mutual_entropy(contractions: &ModeContractions, base: LogBase) -> Result<f64> {
    let lattice = contractions.lattice();
    let origin = vec![0; lattice.dims()];
    let single = subsystem_entropy(contractions, &Selector::SingleSite(origin), base)?.entropy;
    let even = even_odd_entropy_folded(contractions, base)?.entropy;
    let half = contractions.num_sites() as f64 / 2.0;
    let mutual = half * single - even;
    if mutual < -1e-10 * (half * single).max(1e-300) {
        return Err(Error::NumericalDegeneracy(format!("negative even mutual entropy {mutual:e}")));
    }
    Ok(mutual.max(0.0))
}
