//! Closed-form weak-coupling, near-critical and thermodynamic-limit
//! entropies for first-neighbor couplings.
//!
//! At weak coupling every symplectic eigenvalue is a multiple of
//! `f = |D-|^2 / (8 lambda^2)` and `h(f) ~ -f (ln f - 1)`, which turns all
//! entropies into explicit functions of `f`. The even comb additionally
//! picks up the geometric factor `alpha = int u ln u` over the Brillouin
//! zone, with `u(k) = 2 (sum_i w_i cos 2 pi k_i)^2`.

use std::f64::consts::{LN_2, PI};

use crate::elliptic::complete_k_complement;
use crate::error::{Error, Result};
use crate::gaussian::LogBase;
use crate::lattice::Lattice;

/// Midpoint nodes per axis used by [`geometric_alpha`] by default.
pub const DEFAULT_ALPHA_RESOLUTION: usize = 1 << 10;

/// Leading-order entropies (in nats) of a weakly coupled chain or lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakCouplingPrediction {
    pub f: f64,
    pub single_site: f64,
    pub even_comb: f64,
    /// Two-site-and-larger block in 1-d; the `n_x * n_y/2` half in 2-d.
    pub block: Option<f64>,
    /// `(n/2) S_i - S_E`.
    pub mutual: f64,
    pub alpha: f64,
}

impl WeakCouplingPrediction {
    pub fn in_base(&self, base: LogBase) -> Self {
        Self {
            single_site: base.from_nats(self.single_site),
            even_comb: base.from_nats(self.even_comb),
            block: self.block.map(|b| base.from_nats(b)),
            mutual: base.from_nats(self.mutual),
            ..*self
        }
    }
}

fn check_f(f: f64) -> Result<()> {
    if f >= 1.0 {
        return Err(Error::Domain(format!(
            "weak-coupling parameter f = {f} >= 1, asymptotic expansion meaningless"
        )));
    }
    Ok(())
}

/// First-neighbor chain of `n` sites with pairing amplitude `delta_minus`
/// (`D-(+-1) = delta_minus / 2`). Depends on `D+` only through the caller's
/// choice of `lambda >> lambda_c`.
pub fn weak_coupling_predictions_1d(delta_minus: f64, lambda: f64, n: usize) -> Result<WeakCouplingPrediction> {
    let f = delta_minus * delta_minus / (8.0 * lambda * lambda);
    check_f(f)?;
    let half = n as f64 / 2.0;
    if f == 0.0 {
        return Ok(WeakCouplingPrediction {
            f,
            single_site: 0.0,
            even_comb: 0.0,
            block: Some(0.0),
            mutual: 0.0,
            alpha: 1.0 - LN_2,
        });
    }
    let single_site = -f * (f.ln() - 1.0);
    let even_comb = -half * f * (f.ln() - LN_2);
    let block = -f * ((f / 2.0).ln() - 1.0);
    let mutual = half * f * (1.0 - LN_2);

    let scale = even_comb.abs().max(f);
    debug_assert!((even_comb - (half * single_site - mutual)).abs() <= 1e-12 * scale);
    debug_assert!((even_comb - (half * block - half * f)).abs() <= 1e-12 * scale);

    Ok(WeakCouplingPrediction {
        f,
        single_site,
        even_comb,
        block: Some(block),
        mutual,
        alpha: 1.0 - LN_2,
    })
}

/// Geometric factor estimate with its quadrature normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricAlpha {
    pub alpha: f64,
    /// `int u`, which must equal 1.
    pub norm: f64,
}

/// `alpha = int_{[0,1]^d} u ln u`, `u = 2 (sum_i w_i cos 2 pi k_i)^2`,
/// `w = delta_minus / |delta_minus|`, by the tensor midpoint rule with
/// `resolution` nodes per axis.
pub fn geometric_alpha(delta_minus: &[f64], resolution: usize) -> Result<GeometricAlpha> {
    let norm2: f64 = delta_minus.iter().map(|x| x * x).sum();
    if delta_minus.is_empty() || norm2 == 0.0 {
        return Err(Error::Domain("geometric factor needs a nonzero pairing weight".into()));
    }
    if resolution < 4 || resolution % 2 != 0 {
        return Err(Error::Domain(format!("resolution must be even and >= 4, got {resolution}")));
    }
    let norm = norm2.sqrt();
    // midpoints are symmetric under theta -> 2 pi - theta, so half the nodes
    // with weight 2 cover each axis
    let half = resolution / 2;
    let axes: Vec<Vec<f64>> = delta_minus
        .iter()
        .map(|&d| {
            let w = d / norm;
            (0..half)
                .map(|j| w * (2.0 * PI * (j as f64 + 0.5) / resolution as f64).cos())
                .collect()
        })
        .collect();

    fn accumulate(axes: &[Vec<f64>], partial: f64, out: &mut (f64, f64)) {
        match axes.split_first() {
            None => {
                let u = 2.0 * partial * partial;
                out.1 += u;
                if u > 0.0 {
                    out.0 += u * u.ln();
                }
            }
            Some((first, rest)) if rest.is_empty() => {
                for &c in first {
                    let s = partial + c;
                    let u = 2.0 * s * s;
                    out.1 += u;
                    if u > 0.0 {
                        out.0 += u * u.ln();
                    }
                }
            }
            Some((first, rest)) => {
                for &c in first {
                    accumulate(rest, partial + c, out);
                }
            }
        }
    }

    let mut sums = (0.0, 0.0);
    accumulate(&axes, 0.0, &mut sums);
    let cells = (half as f64).powi(delta_minus.len() as i32);
    let result = GeometricAlpha {
        alpha: sums.0 / cells,
        norm: sums.1 / cells,
    };
    if (result.norm - 1.0).abs() > 1e-8 {
        return Err(Error::Domain(format!("quadrature normalization {} != 1", result.norm)));
    }
    Ok(result)
}

/// Weak-coupling entropies of a d-dimensional first-neighbor lattice with
/// per-axis pairing `delta_minus[i]`. The block entry is the half lattice
/// spanning axis 0 fully and half of axis 1 (2-d only), or a chain block in
/// 1-d.
pub fn weak_coupling_predictions_dd(
    delta_minus: &[f64],
    lambda: f64,
    lattice: &Lattice,
    alpha_resolution: usize,
) -> Result<WeakCouplingPrediction> {
    if delta_minus.len() != lattice.dims() {
        return Err(Error::Domain(format!(
            "need {} per-axis couplings, got {}",
            lattice.dims(),
            delta_minus.len()
        )));
    }
    if lattice.dims() == 1 {
        return weak_coupling_predictions_1d(delta_minus[0], lambda, lattice.num_sites());
    }
    let norm2: f64 = delta_minus.iter().map(|x| x * x).sum();
    let f = norm2 / (8.0 * lambda * lambda);
    check_f(f)?;
    let half = lattice.num_sites() as f64 / 2.0;
    let block_of = |f: f64| {
        (lattice.dims() == 2).then(|| {
            let nx = lattice.sizes()[0] as f64;
            if f == 0.0 {
                0.0
            } else {
                -(nx / 2.0) * f * ((f / 4.0).ln() - 1.0)
            }
        })
    };
    if f == 0.0 {
        return Ok(WeakCouplingPrediction {
            f,
            single_site: 0.0,
            even_comb: 0.0,
            block: block_of(f),
            mutual: 0.0,
            alpha: f64::NAN,
        });
    }
    let alpha = geometric_alpha(delta_minus, alpha_resolution)?.alpha;
    let single_site = -f * (f.ln() - 1.0);
    let even_comb = -half * f * (f.ln() - 1.0 + alpha);
    Ok(WeakCouplingPrediction {
        f,
        single_site,
        even_comb,
        block: block_of(f),
        mutual: half * f * alpha,
        alpha,
    })
}

/// `f = [D-/(D+ + |D-|)]^2 / (8 d (lambda/lambda_c)^2)` for isotropic
/// first-neighbor couplings at fixed `lambda / lambda_c`.
pub fn isotropic_weak_f(delta_plus: f64, delta_minus: f64, dims: usize, lambda_over_lc: f64) -> f64 {
    let r = delta_minus / (delta_plus + delta_minus.abs());
    r * r / (8.0 * dims as f64 * lambda_over_lc * lambda_over_lc)
}

/// Ordinary least-squares line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Fits `S = slope * ln(lambda/lambda_c - 1) + intercept`.
pub fn critical_divergence_law(lambda_over_lc: &[f64], entropies: &[f64]) -> Result<LinearFit> {
    if lambda_over_lc.len() != entropies.len() {
        return Err(Error::Domain(format!(
            "{} grid points but {} entropies",
            lambda_over_lc.len(),
            entropies.len()
        )));
    }
    if lambda_over_lc.len() < 3 {
        return Err(Error::TooFewPoints(lambda_over_lc.len()));
    }
    if let Some(r) = lambda_over_lc.iter().find(|&&r| !(r > 1.0 && r <= 1.01)) {
        return Err(Error::Domain(format!(
            "lambda/lambda_c = {r} outside the near-critical window (1, 1.01]"
        )));
    }
    let xs: Vec<f64> = lambda_over_lc.iter().map(|r| (r - 1.0).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = entropies.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(entropies) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        return Err(Error::Domain("degenerate grid: all points coincide".into()));
    }
    let slope = sxy / sxx;
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
    })
}

/// Thermodynamic-limit half-chain block entropy of the spin-1/2 XY chain in
/// boson notation (`lambda = B`), via complete elliptic integrals.
pub fn xy_block_entropy_infinite(lambda: f64, delta_plus: f64, delta_minus: f64, base: LogBase) -> Result<f64> {
    if !(lambda > delta_plus.abs()) {
        return Err(Error::Domain(format!(
            "block entropy formula needs lambda > |D+|, got lambda={lambda}, D+={delta_plus}"
        )));
    }
    if delta_minus == 0.0 {
        return Ok(0.0);
    }
    let denom = (lambda * lambda + delta_minus * delta_minus - delta_plus * delta_plus).sqrt();
    let a = delta_minus.abs() / denom;
    // 1 - a^2 = (lambda^2 - D+^2) / denom^2
    let a_prime = (lambda * lambda - delta_plus * delta_plus).sqrt() / denom;
    let k_a = complete_k_complement(a_prime);
    let k_a_prime = complete_k_complement(a);
    let nats = ((4.0 / (a * a_prime)).ln() + (a * a - a_prime * a_prime) * 2.0 * k_a * k_a_prime / PI) / 6.0;
    Ok(base.from_nats(nats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_free_predictions_vanish() {
        let p = weak_coupling_predictions_1d(0.0, 10.0, 36).unwrap();
        assert_eq!((p.single_site, p.even_comb, p.block, p.mutual), (0.0, 0.0, Some(0.0), 0.0));
    }

    #[test]
    fn f_too_large_is_rejected() {
        assert!(weak_coupling_predictions_1d(3.0, 1.0, 10).is_err());
    }

    #[test]
    fn block_minus_single_is_f_ln2_at_leading_order() {
        let p = weak_coupling_predictions_1d(0.3, 50.0, 36).unwrap();
        let block = p.block.unwrap();
        assert!((block - p.single_site - p.f * LN_2).abs() < 1e-15);
        assert!((p.even_comb - (18.0 * p.single_site - 18.0 * p.f * (1.0 - LN_2))).abs() < 1e-15);
    }

    #[test]
    fn alpha_one_dimension() {
        let a = geometric_alpha(&[1.0], DEFAULT_ALPHA_RESOLUTION).unwrap();
        assert!((a.alpha - (1.0 - LN_2)).abs() < 1e-6, "{}", a.alpha);
        assert!((a.norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn alpha_sign_of_weights_irrelevant() {
        let a = geometric_alpha(&[1.0, 1.0], 128).unwrap().alpha;
        let b = geometric_alpha(&[-1.0, 1.0], 128).unwrap().alpha;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn alpha_rejects_zero_weights() {
        assert!(geometric_alpha(&[0.0, 0.0], 64).is_err());
        assert!(geometric_alpha(&[1.0], 7).is_err());
    }

    #[test]
    fn dd_reduces_to_1d() {
        let l = Lattice::chain(36).unwrap();
        let a = weak_coupling_predictions_dd(&[0.3], 24.0, &l, 64).unwrap();
        let b = weak_coupling_predictions_1d(0.3, 24.0, 36).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn two_dimensional_f_is_half_at_fixed_ratio() {
        let f1 = isotropic_weak_f(1.0, 1.0 / 3.0, 1, 20.0);
        let f2 = isotropic_weak_f(1.0, 1.0 / 3.0, 2, 20.0);
        assert!((f2 / f1 - 0.5).abs() < 1e-15);
        // consistent with the explicit form at lambda = 20 lambda_c
        let l = Lattice::new(vec![6, 6]).unwrap();
        let lc = 2.0 * (1.0 + 1.0 / 3.0);
        let p = weak_coupling_predictions_dd(&[1.0 / 3.0, 1.0 / 3.0], 20.0 * lc, &l, 64).unwrap();
        assert!((p.f - f2).abs() < 1e-15);
    }

    #[test]
    fn block_to_single_ratio_tends_to_half_nx() {
        let l = Lattice::new(vec![6, 6]).unwrap();
        let mut prev = f64::INFINITY;
        for lambda in [1e2, 1e4, 1e6, 1e8] {
            let p = weak_coupling_predictions_dd(&[0.3, 0.3], lambda, &l, 64).unwrap();
            let r = p.block.unwrap() / p.single_site;
            assert!(r < prev && r > 3.0);
            prev = r;
        }
        assert!((prev - 3.0).abs() / 3.0 < 0.15, "{prev}");
    }

    #[test]
    fn flat_entropies_have_zero_slope() {
        let grid = [1.0 + 1e-6, 1.0 + 1e-5, 1.0 + 1e-4];
        let fit = critical_divergence_law(&grid, &[2.0, 2.0, 2.0]).unwrap();
        assert!(fit.slope.abs() < 1e-14);
        assert!((fit.intercept - 2.0).abs() < 1e-12);
    }

    #[test]
    fn fit_recovers_line_and_rejects_bad_input() {
        let grid = [1.0 + 1e-6, 1.0 + 1e-5, 1.0 + 1e-4, 1.0 + 1e-3];
        let s: Vec<f64> = grid.iter().map(|r| -0.25 * (r - 1.0f64).ln() + 0.7).collect();
        let fit = critical_divergence_law(&grid, &s).unwrap();
        assert!((fit.slope + 0.25).abs() < 1e-12);
        assert!((fit.intercept - 0.7).abs() < 1e-10);
        assert!(matches!(critical_divergence_law(&grid[..2], &s[..2]), Err(Error::TooFewPoints(2))));
        assert!(critical_divergence_law(&[1.0, 1.1, 1.2], &[0.0; 3]).is_err());
    }

    #[test]
    fn xy_entropy_vanishes_without_anisotropy() {
        let s = xy_block_entropy_infinite(1.0, 0.5, 1e-4, LogBase::Natural).unwrap();
        assert!(s >= 0.0 && s < 1e-6, "{s}");
        assert_eq!(xy_block_entropy_infinite(1.0, 0.5, 0.0, LogBase::Natural).unwrap(), 0.0);
        assert!(xy_block_entropy_infinite(0.5, 0.5, 0.1, LogBase::Natural).is_err());
    }
}
