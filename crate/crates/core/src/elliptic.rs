//! Complete elliptic integral of the first kind by the arithmetic-geometric
//! mean.

use std::f64::consts::FRAC_PI_2;

const AGM_TOL: f64 = 1e-15;
const AGM_MAX_ITER: usize = 64;

/// Arithmetic-geometric mean of two non-negative numbers.
pub fn agm(a: f64, b: f64) -> f64 {
    let (mut a, mut b) = (a, b);
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() <= AGM_TOL * a.abs() {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    0.5 * (a + b)
}

/// `K(k) = int_0^1 dx / sqrt((1 - x^2)(1 - k^2 x^2))` for modulus `0 <= k < 1`.
pub fn complete_k(k: f64) -> f64 {
    complete_k_complement((1.0 - k * k).sqrt())
}

/// `K` expressed through the complementary modulus `k' = sqrt(1 - k^2)`,
/// which avoids forming `1 - k^2` when `k` is close to 1.
pub fn complete_k_complement(k_prime: f64) -> f64 {
    FRAC_PI_2 / agm(1.0, k_prime)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_modulus() {
        assert!((complete_k(0.0) - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn known_value() {
        // K(1/sqrt 2) = Gamma(1/4)^2 / (4 sqrt(pi))
        let gamma_quarter = 3.625_609_908_221_908_3_f64;
        let expect = gamma_quarter * gamma_quarter / (4.0 * std::f64::consts::PI.sqrt());
        assert!((complete_k(std::f64::consts::FRAC_1_SQRT_2) - expect).abs() < 1e-14);
    }

    #[test]
    fn diverges_logarithmically() {
        // K(k) ~ ln(4/k') as k' -> 0
        let kp = 1e-8;
        assert!((complete_k_complement(kp) - (4.0 / kp).ln()).abs() < 1e-10);
    }

    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
            (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
        }
        fn recurse(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (l, r) = (simpson(f, a, m), simpson(f, m, b));
            if depth == 0 || (l + r - whole).abs() <= 15.0 * tol {
                return l + r + (l + r - whole) / 15.0;
            }
            recurse(f, a, m, l, tol / 2.0, depth - 1) + recurse(f, m, b, r, tol / 2.0, depth - 1)
        }
        recurse(f, a, b, simpson(f, a, b), tol, 40)
    }

    #[test]
    fn matches_quadrature() {
        // x = sin t removes the endpoint singularity
        for k in [0.1, 0.5, 0.9] {
            let integrand = |t: f64| 1.0 / (1.0 - k * k * t.sin() * t.sin()).sqrt();
            let q = adaptive_simpson(&integrand, 0.0, FRAC_PI_2, 1e-13);
            assert!((complete_k(k) - q).abs() < 1e-9, "k={k}: {} vs {q}", complete_k(k));
        }
    }
}
