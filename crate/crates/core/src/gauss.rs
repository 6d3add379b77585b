//! Standard-normal functions and the nu / nu' functionals.

use libm::{erfc, exp};

pub const SQRT_2: f64 = core::f64::consts::SQRT_2;
const FRAC_1_SQRT_2PI: f64 = 0.3989422804014326779;
const FRAC_1_SQRT_PI: f64 = 0.5641895835477562869;

/// Standard normal density.
pub fn phi(u: f64) -> f64 {
    FRAC_1_SQRT_2PI * exp(-0.5 * u * u)
}

/// Survival function of N(0,1), accurate in the far tail.
pub fn psi(u: f64) -> f64 {
    0.5 * erfc(u / SQRT_2)
}

/// CDF of N(0,1).
pub fn big_phi(u: f64) -> f64 {
    0.5 * erfc(-u / SQRT_2)
}

/// Scaled complementary error function e^{x^2} erfc(x); never overflows for x >= 0.
pub fn erfcx(x: f64) -> f64 {
    if x <= 25.0 {
        exp(x * x) * erfc(x)
    } else {
        // asymptotic series: 1/(x sqrt pi) * sum_k (-1)^k (2k-1)!! / (2x^2)^k
        let ix2 = 1.0 / (2.0 * x * x);
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..=6u32 {
            term *= -((2 * k - 1) as f64) * ix2;
            sum += term;
        }
        sum * FRAC_1_SQRT_PI / x
    }
}

/// nu'(m, c) = e^{m^2 - c m} Psi((c - 2m)/sqrt2), overflow-safe.
///
/// Uses m^2 - cm - A^2/2 = -c^2/4 with A = (c - 2m)/sqrt2 to keep the
/// exponential and the tail factor together.
pub fn nu_prime(m: f64, c: f64) -> f64 {
    let a = (c - 2.0 * m) / SQRT_2;
    if a >= 0.0 {
        exp(-0.25 * c * c) * 0.5 * erfcx(a / SQRT_2)
    } else {
        exp(m * m - c * m) - exp(-0.25 * c * c) * 0.5 * erfcx(-a / SQRT_2)
    }
}

/// nu(m, c) = e^{m^2 - c m} Psi((c - 2m)/sqrt2); the boundary functional of
/// the tangent comparison. Same display as `nu_prime`, kept under both names
/// for the two roles it plays.
pub fn nu(m: f64, c: f64) -> f64 {
    nu_prime(m, c)
}

/// int_0^inf e^z Psi((cc + z/m)/sqrt2) dz for m > 0, in closed form.
pub fn common_inf(cc: f64, m: f64) -> f64 {
    nu_prime(m, cc) - psi(cc / SQRT_2)
}

/// P{l < N < h} with accurate tail differences; empty or NaN ranges give 0.
pub fn norm_mass(l: f64, h: f64) -> f64 {
    if !(h > l) {
        return 0.0;
    }
    let v = if l >= 0.0 {
        psi(l) - psi(h)
    } else if h <= 0.0 {
        psi(-h) - psi(-l)
    } else {
        big_phi(h) - big_phi(l)
    };
    v.clamp(0.0, 1.0)
}

/// P{lo < sqrt2 N < hi} (bounds given on the sqrt2 N scale).
pub fn mass(lo: f64, hi: f64) -> f64 {
    norm_mass(lo / SQRT_2, hi / SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_values() {
        assert!((phi(0.0) - 0.3989422804014326779).abs() < 1e-16);
        assert!((phi(2.0) - 0.05399096651318805195).abs() < 1e-16);
        assert_eq!(phi(1.3), phi(-1.3));
    }

    #[test]
    fn psi_values() {
        assert_eq!(psi(0.0), 0.5);
        let p8 = psi(8.0);
        assert!((p8 - 6.220960574271784e-16).abs() / 6.220960574271784e-16 < 1e-3);
        for &u in &[-6.0, -2.5, 0.0, 1.0, 3.0, 7.9] {
            assert!((big_phi(u) + psi(u) - 1.0).abs() < 1e-15);
            assert!((psi(-u) - big_phi(u)).abs() < 1e-15);
        }
    }

    #[test]
    fn phi_is_cdf_derivative() {
        let h = 1e-5;
        for i in 0..=120 {
            let u = -6.0 + 0.1 * (i as f64);
            let fd = (big_phi(u + h) - big_phi(u - h)) / (2.0 * h);
            assert!((fd - phi(u)).abs() < 1e-9, "u={u}");
        }
    }

    #[test]
    fn erfcx_matches_product_form_and_series() {
        // continuity across the switch point (step times slope ~ 2e-9)
        let lo = erfcx(24.999999);
        let hi = erfcx(25.000001);
        assert!((lo - hi).abs() < 1e-8, "{lo} vs {hi}");
        assert!(lo > hi);
        // large-x sanity vs leading term
        let x = 50.0;
        assert!((erfcx(x) * x * core::f64::consts::PI.sqrt() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn nu_values() {
        // m = 0 kills the exponential
        assert!((nu(0.0, 1.7) - psi(1.7 / SQRT_2)).abs() < 1e-15);
        // c = 2m zeroes the Psi argument
        assert!((nu(1.0, 2.0) - 0.5 * (-1.0f64).exp()).abs() < 1e-15);
        // nu(-1, 1) = e^2 Psi(3/sqrt2)
        assert!((nu(-1.0, 1.0) - 0.12522548707948315942781976).abs() < 1e-14);
        // bit-for-bit nu == nu_prime for m >= 0
        for &(m, c) in &[(0.0, 1.0), (0.5, 3.0), (2.0, 1.0), (7.0, 0.3), (40.0, 2.0)] {
            assert_eq!(nu(m, c), nu_prime(m, c));
        }
    }

    #[test]
    fn nu_prime_large_m_no_overflow() {
        // naive e^{m^2 - cm} overflows here; the true value is tiny but finite
        let v = nu_prime(-200.0, 3.0);
        assert!(v.is_finite() && v >= 0.0);
        // e^{2550} Psi(101/sqrt2): huge exponential against a tiny tail, ~4e-3
        let w = nu_prime(-50.0, 1.0);
        assert!(w.is_finite() && w > 1e-3 && w < 1e-2, "{w}");
    }

    #[test]
    fn mass_basics() {
        assert_eq!(mass(1.0, 1.0), 0.0);
        assert_eq!(mass(2.0, 1.0), 0.0);
        assert!((mass(f64::NEG_INFINITY, f64::INFINITY) - 1.0).abs() < 1e-15);
        assert!((norm_mass(f64::NEG_INFINITY, 1.5) - big_phi(1.5)).abs() < 1e-15);
        let m = mass(-1.0, 2.0);
        assert!((m - (big_phi(2.0 / SQRT_2) - big_phi(-1.0 / SQRT_2))).abs() < 1e-15);
    }
}
