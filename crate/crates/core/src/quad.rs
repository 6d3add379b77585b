//! Adaptive 1-D quadrature: finite intervals (Gauss-Kronrod 7/15 pair with
//! worst-segment bisection), e^z-weighted half-lines, Gaussian-weighted lines,
//! and 1/sqrt(t) endpoint singularities.

use alloc::vec::Vec;
use libm::exp;

use crate::gauss;

/// Kronrod-15 abscissae on [0, 1] side of [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
/// Embedded Gauss-7 weights (for the odd Kronrod abscissae).
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Truncation parameter for weighted tails: the right tail is cut at
    /// `tail_start * decay_hint`.
    pub tail_start: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            abs_tol: 1e-9,
            rel_tol: 1e-8,
            max_subdivisions: 200,
            tail_start: 30.0,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    pub err_est: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadError {
    /// The last truncation panel of a right-tail integral grew; the caller's
    /// decay contract is violated.
    TailNotDecaying,
}

#[derive(Clone, Copy)]
struct Seg {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Seg {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut fv = [0.0f64; 15];
    let fc = f(c);
    fv[7] = fc;
    let mut kron = WGK[7] * fc;
    let mut gauss7 = WG[3] * fc;
    let mut resabs = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv[j] = f1;
        fv[14 - j] = f2;
        kron += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss7 += WG[j / 2] * (f1 + f2);
        }
    }
    // QUADPACK error model: scale the raw Gauss/Kronrod difference by the
    // oscillation integral resasc = int |f - mean|, which stays large on
    // kinked integrands and prevents premature convergence
    let mean = 0.5 * kron;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }
    resasc *= h.abs();
    let val = kron * h;
    let mut err = ((kron - gauss7) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * libm::pow(200.0 * err / resasc, 1.5).min(1.0);
    }
    err = err.max(50.0 * f64::EPSILON * resabs * h.abs());
    Seg { a, b, val, err }
}

/// Adaptive integral of `f` on [a, b].
pub fn integrate_finite<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, cfg: &QuadConfig) -> QuadResult {
    if !(b > a) {
        return QuadResult { value: 0.0, err_est: 0.0, evaluations: 0, converged: true };
    }
    let mut segs: Vec<Seg> = Vec::new();
    segs.push(gk15(&mut f, a, b));
    let mut evals = 15usize;
    loop {
        let mut value = 0.0;
        let mut err = 0.0;
        let mut worst = 0usize;
        let mut worst_err = -1.0;
        for (i, s) in segs.iter().enumerate() {
            value += s.val;
            err += s.err;
            if s.err > worst_err {
                worst_err = s.err;
                worst = i;
            }
        }
        let tol = cfg.abs_tol.max(cfg.rel_tol * value.abs());
        if err <= tol {
            return QuadResult { value, err_est: err, evaluations: evals, converged: true };
        }
        if segs.len() >= cfg.max_subdivisions {
            return QuadResult { value, err_est: err, evaluations: evals, converged: false };
        }
        let s = segs.swap_remove(worst);
        let m = 0.5 * (s.a + s.b);
        if m <= s.a || m >= s.b {
            // interval exhausted at machine precision
            segs.push(s);
            let value: f64 = segs.iter().map(|s| s.val).sum();
            let err: f64 = segs.iter().map(|s| s.err).sum();
            return QuadResult { value, err_est: err, evaluations: evals, converged: err <= tol };
        }
        segs.push(gk15(&mut f, s.a, m));
        segs.push(gk15(&mut f, m, s.b));
        evals += 30;
    }
}

/// int_{-inf}^0 e^z f(z) dz by fixed-width panels marching left.
///
/// Panels keep features at deeply negative z resolvable (a u = e^z
/// substitution would compress them into an invisible sliver near 0); the
/// march stops once the remaining tail bound e^z (1 + |f|) is below
/// tolerance.
pub fn integrate_exp_left<F: FnMut(f64) -> f64>(mut f: F, cfg: &QuadConfig) -> QuadResult {
    const PANEL: f64 = 7.0;
    let mut out = QuadResult { value: 0.0, err_est: 0.0, evaluations: 0, converged: true };
    let mut hi = 0.0f64;
    for _ in 0..24 {
        let lo = hi - PANEL;
        let r = integrate_finite(|z| exp(z) * f(z), lo, hi, cfg);
        out.value += r.value;
        out.err_est += r.err_est;
        out.evaluations += r.evaluations + 1;
        out.converged &= r.converged;
        let tail_bound = exp(lo) * (1.0 + f(lo).abs());
        if tail_bound < 0.1 * cfg.abs_tol {
            out.err_est += tail_bound;
            return out;
        }
        hi = lo;
    }
    out.converged = false;
    out
}

/// int_0^inf e^z f(z) dz by panel-doubling truncation.
///
/// `decay_hint > 0` is a scale beyond which the caller asserts
/// |e^z f(z)| <= e^{-z/decay_hint}; the tail is cut at `tail_start * decay_hint`.
pub fn integrate_exp_right<F: FnMut(f64) -> f64>(
    mut f: F,
    decay_hint: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult, QuadError> {
    let d = decay_hint.max(1e-12);
    let cap = cfg.tail_start * d;
    let mut w = |z: f64| {
        let p = f(z);
        if p == 0.0 {
            0.0
        } else {
            exp(z) * p
        }
    };
    let mut value = 0.0;
    let mut err = 0.0;
    let mut evals = 0usize;
    let mut converged = true;
    let mut lo = 0.0f64;
    let mut hi = d.min(cap);
    let mut prev_panel = f64::INFINITY;
    loop {
        // the first panel starts at the z = 0 kink shared by the sojourn
        // probabilities; z = s^2 regularizes the sqrt behavior there
        let r = if lo == 0.0 {
            integrate_finite(|s| 2.0 * s * w(s * s), 0.0, libm::sqrt(hi), cfg)
        } else {
            integrate_finite(&mut w, lo, hi, cfg)
        };
        value += r.value;
        err += r.err_est;
        evals += r.evaluations;
        converged &= r.converged;
        let panel = r.value.abs();
        let at_cap = hi >= cap;
        if at_cap {
            if panel >= cfg.abs_tol / 10.0 {
                if panel > prev_panel {
                    return Err(QuadError::TailNotDecaying);
                }
                converged = false;
            }
            break;
        }
        if panel < cfg.abs_tol / 10.0 && lo > 0.0 {
            break;
        }
        prev_panel = panel;
        lo = hi;
        hi = (2.0 * hi).min(cap);
    }
    Ok(QuadResult { value, err_est: err, evaluations: evals, converged })
}

/// int phi(u) g(u) du over the effective support [-8.5, 8.5].
pub fn integrate_gaussian<F: FnMut(f64) -> f64>(mut g: F, cfg: &QuadConfig) -> QuadResult {
    integrate_finite(|u| gauss::phi(u) * g(u), -8.5, 8.5, cfg)
}

/// int_0^x f(t) dt for f with an integrable t^{-1/2} singularity at 0,
/// via t = s^2.
pub fn integrate_sqrt_singular<F: FnMut(f64) -> f64>(mut f: F, x: f64, cfg: &QuadConfig) -> QuadResult {
    if x <= 0.0 {
        return QuadResult { value: 0.0, err_est: 0.0, evaluations: 0, converged: true };
    }
    integrate_finite(|s| 2.0 * s * f(s * s), 0.0, libm::sqrt(x), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::{big_phi, phi, psi, SQRT_2};

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    #[test]
    fn finite_basics() {
        let r = integrate_finite(|_| 1.0, 0.0, 3.0, &cfg());
        assert!((r.value - 3.0).abs() < 1e-12);
        let r = integrate_finite(|t| t * t, 0.0, 1.0, &cfg());
        assert!((r.value - 1.0 / 3.0).abs() < 1e-12);
        let r = integrate_finite(|t| t.exp(), 0.0, 1.0, &cfg());
        assert!((r.value - (1f64.exp() - 1.0)).abs() < 1e-12);
        assert!(r.converged);
    }

    #[test]
    fn finite_linearity_and_splitting() {
        let f = |t: f64| (3.0 * t).sin() + 0.2 * t;
        let g = |t: f64| (t * t).cos();
        let rf = integrate_finite(f, 0.0, 2.0, &cfg());
        let rg = integrate_finite(g, 0.0, 2.0, &cfg());
        let rc = integrate_finite(|t| 2.0 * f(t) - 0.5 * g(t), 0.0, 2.0, &cfg());
        assert!((rc.value - (2.0 * rf.value - 0.5 * rg.value)).abs() < 2.0 * (rc.err_est + rf.err_est + rg.err_est) + 1e-12);
        let r1 = integrate_finite(f, 0.0, 0.7, &cfg());
        let r2 = integrate_finite(f, 0.7, 2.0, &cfg());
        assert!((rf.value - r1.value - r2.value).abs() < rf.err_est + r1.err_est + r2.err_est + 1e-12);
    }

    #[test]
    fn exp_left_basics() {
        let r = integrate_exp_left(|_| 1.0, &cfg());
        assert!((r.value - 1.0).abs() < 1e-12);
        let r = integrate_exp_left(|z| z.exp(), &cfg());
        assert!((r.value - 0.5).abs() < 1e-12);
        for &p in &[0.0, 0.3, 1.0] {
            let r = integrate_exp_left(|_| p, &cfg());
            assert!((r.value - p).abs() < 1e-12);
        }
        // two-method agreement on a probability-shaped integrand
        let r = integrate_exp_left(|z| psi(-z / SQRT_2), &cfg());
        let direct = integrate_finite(|z| z.exp() * psi(-z / SQRT_2), -40.0, 0.0, &cfg());
        assert!((r.value - direct.value).abs() < 5e-9, "{} vs {}", r.value, direct.value);
    }

    #[test]
    fn exp_right_basics() {
        let r = integrate_exp_right(|z| (-2.0 * z).exp(), 1.0, &cfg()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
        // int_0^inf Psi(sqrt(2z)) dz = int_0^inf w Psi(w) dw = 1/4
        let r = integrate_exp_right(|z| (-z).exp() * psi((2.0 * z).sqrt()), 1.0, &cfg()).unwrap();
        assert!((r.value - 0.25).abs() < 1e-9, "{}", r.value);
        let c = 1.0;
        let r = integrate_exp_right(|z| (-(1.0 + c) * z).exp(), 1.0, &cfg()).unwrap();
        assert!((r.value - 1.0 / c).abs() < 1e-9);
    }

    #[test]
    fn exp_right_detects_growth() {
        let r = integrate_exp_right(|_| 1.0, 1.0, &cfg());
        assert_eq!(r.unwrap_err(), QuadError::TailNotDecaying);
    }

    #[test]
    fn gaussian_basics() {
        let r = integrate_gaussian(|_| 1.0, &cfg());
        assert!((r.value - 1.0).abs() < 1e-12);
        let r = integrate_gaussian(|u| u, &cfg());
        assert!(r.value.abs() < 1e-12);
        let r = integrate_gaussian(|u| if u > 1.5 { 1.0 } else { 0.0 }, &cfg());
        assert!((r.value - psi(1.5)).abs() < 1e-9);
        assert!((psi(1.5) - 0.06680720126885806600).abs() < 1e-15);
    }

    #[test]
    fn sqrt_singular_basics() {
        let r = integrate_sqrt_singular(|t| 1.0 / t.sqrt(), 4.0, &cfg());
        assert!((r.value - 4.0).abs() < 1e-10);
        let r = integrate_sqrt_singular(|_| 1.0, 1.0, &cfg());
        assert!((r.value - 1.0).abs() < 1e-12);
        let r = integrate_sqrt_singular(|t| phi(t.sqrt()) / t.sqrt(), 1.0, &cfg());
        let target = 2.0 * (big_phi(1.0) - 0.5);
        assert!((target - 0.68268949213708589717).abs() < 1e-15);
        assert!((r.value - target).abs() < 1e-10);
    }

    #[test]
    fn nu_integral_identity() {
        // int_0^inf e^z Psi((c + z/m)/sqrt2) dz = nu(m, c) - Psi(c/sqrt2), m > 0
        for &(m, c, target) in &[
            (1.0, 0.0, 2.0044900403811417),
            (2.0, 1.0, 7.0240805507576903),
            (0.5, 3.0, 0.0055860619187608254),
        ] {
            let rhs = crate::gauss::nu(m, c) - psi(c / SQRT_2);
            assert!((rhs - target).abs() < 1e-12 * target.max(1.0), "m={m} c={c}: {rhs}");
            let r = integrate_exp_right(|z| psi((c + z / m) / SQRT_2), (2.0 * m * m + c * m + 10.0) / 30.0 + 1.0, &cfg()).unwrap();
            assert!((r.value - rhs).abs() < 1e-8, "m={m} c={c} got {} want {}", r.value, rhs);
        }
    }
}
