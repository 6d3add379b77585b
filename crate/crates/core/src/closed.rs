//! Closed and semi-closed expressions: the alpha = 1 half-line route
//! (printed display plus the constructive decomposition), the alpha = 2
//! half-line display, the zero-drift interval formulas, and the
//! lambda in {1, 2} interval decompositions.

use libm::{exp, sqrt};

use crate::gauss::{big_phi, common_inf, mass, nu_prime, phi, psi, SQRT_2};
use crate::problem::{Flag, Method, PBValue};
use crate::quad::{self, QuadConfig, QuadResult};

const EPS_CLOSED: f64 = 1e-14;

fn closed_value(v: f64) -> PBValue {
    PBValue::new(v, EPS_CLOSED * v.abs().max(1.0), Method::Closed)
}

// ---------------------------------------------------------------------------
// alpha = 1 half-line, h(t) = c t
// ---------------------------------------------------------------------------

/// Literal Theorem display for B_1^h(x); fails audit for c != 1 (see
/// `bm1_constructive`), hence the unaudited flag.
pub fn bm1_printed(x: f64, c: f64) -> PBValue {
    let xc = (1.0 + c) * sqrt(x / 2.0);
    let xcp = (1.0 - c) * sqrt(x / 2.0);
    let v = (1.0 + c) * (1.0 + c) / c * psi(xc) - (1.0 - c) * xc * phi(xc)
        + ((1.0 - c) * (1.0 - c) / (4.0 * (1.0 + c)) * xc * xc + (1.0 + c) / 2.0) * exp(-0.5 * xc * xc)
        - (1.0 + c)
            * exp(-c * x)
            * ((1.0 - c) / c * psi(xcp) - xcp * phi(xcp) + (1.0 + 0.5 * xcp * xcp) * 0.5 * exp(-0.5 * xcp * xcp));
    closed_value(v).with_flag(Flag::PrintedFormulaUnaudited)
}

/// Survival function of the zero-level sojourn: P{Y_0 > y}.
pub fn survival_y0(y: f64, c: f64) -> f64 {
    let yc = (1.0 + c) * sqrt(y / 2.0);
    2.0 * (1.0 + yc * yc) * psi(yc) - 2.0 * yc * phi(yc)
}

/// Closed kernel of the first-passage decomposition.
pub fn g_kernel(t: f64, c: f64) -> f64 {
    let tc = (1.0 + c) * sqrt(t / 2.0);
    let tcp = (1.0 - c) * sqrt(t / 2.0);
    (1.0 + c) * phi(tc) / tc - (1.0 - c) * psi(tcp) * exp(-c * t)
}

/// Constructive route for B_1^h(x): I_1 + I_21 + I_22. Reference value for
/// alpha = 1.
pub fn bm1_constructive(x: f64, c: f64, cfg: &QuadConfig) -> PBValue {
    let xc = (1.0 + c) * sqrt(x / 2.0);
    let xcp = (1.0 - c) * sqrt(x / 2.0);
    let i1 = 2.0 / c * ((1.0 + xc * xc) * psi(xc) - xc * phi(xc));
    let i21 = (1.0 + c) / c * psi(xc) - (1.0 - c) / c * psi(xcp) * exp(-c * x);
    // the integrand is 1/sqrt-singular at t = 0 (kernel) and has a sqrt cusp
    // at t = x (survival); substitute out each endpoint separately
    let (i22, err, conv) = if x > 0.0 {
        let r1 = quad::integrate_sqrt_singular(|t| survival_y0(x - t, c) * g_kernel(t, c), 0.5 * x, cfg);
        let r2 = quad::integrate_sqrt_singular(|u| survival_y0(u, c) * g_kernel(x - u, c), 0.5 * x, cfg);
        (r1.value + r2.value, r1.err_est + r2.err_est, r1.converged && r2.converged)
    } else {
        (0.0, 0.0, true)
    };
    let mut v = PBValue::new(i1 + i21 + i22, err + EPS_CLOSED, Method::SemiClosed);
    if !conv {
        v = v.with_flag(Flag::NotConverged);
    }
    v
}

/// int_0^inf e^{-w} f_{-w}(t) dw, the density route to the closed kernel;
/// test-only certification of `g_kernel`.
pub fn bm1_kernel_check(t: f64, c: f64, cfg: &QuadConfig) -> f64 {
    let tc = (1.0 + c) * sqrt(t / 2.0);
    let s2t3 = sqrt(2.0 * t * t * t);
    let s2t = sqrt(2.0 * t);
    quad::integrate_exp_left(|z| (-z) / s2t3 * phi(-z / s2t - tc), cfg).value
}

// ---------------------------------------------------------------------------
// alpha = 2 half-line, h(t) = c t^2
// ---------------------------------------------------------------------------

/// Literal Theorem display for B_2^h(x) on the half-line; differs from the
/// defining integral (gap recorded by `validate`), hence the unaudited flag.
pub fn bm2_halfline_printed(x: f64, c: f64) -> PBValue {
    let v = sqrt((1.0 + c) / c) * psi(sqrt(c * (1.0 + c) / 2.0) * x) * exp(-(1.0 + c) * x * x / 4.0);
    closed_value(v).with_flag(Flag::PrintedFormulaUnaudited)
}

// ---------------------------------------------------------------------------
// zero drift, alpha = 2
// ---------------------------------------------------------------------------

/// B_2(x, [0, T]) = 2 Psi(x/sqrt2) + sqrt2 (T - x) phi(x/sqrt2).
pub fn pickands2_interval(x: f64, t: f64) -> PBValue {
    let v = 2.0 * psi(x / SQRT_2) + SQRT_2 * (t - x) * phi(x / SQRT_2);
    let mut r = closed_value(v);
    if x == t {
        r = r.with_flag(Flag::EndpointLeftLimit);
    }
    r
}

/// lim_{T->inf} B_2(x, [0,T]) / T = sqrt2 phi(x/sqrt2).
pub fn pickands2_rate(x: f64) -> f64 {
    SQRT_2 * phi(x / SQRT_2)
}

// ---------------------------------------------------------------------------
// lambda = 2 interval decomposition (general c)
// ---------------------------------------------------------------------------

fn i1_lambda2(x: f64, a: f64, c: f64, cfg: &QuadConfig) -> QuadResult {
    let m = a + x;
    if m > 0.0 {
        let up = c * a * m;
        let mut r = quad::integrate_exp_left(|w| mass(c * m + (w + up) / m, c * (2.0 * a + x)), cfg);
        let s = exp(up);
        r.value *= s;
        r.err_est *= s;
        r
    } else if m < 0.0 {
        let v = exp(c * a * m) * (big_phi(c * (2.0 * a + x) / SQRT_2) + common_inf(-c * (2.0 * a + x), -m));
        QuadResult { value: v, err_est: EPS_CLOSED * v.abs().max(1.0), evaluations: 0, converged: true }
    } else {
        let v = big_phi(c * (2.0 * a + x) / SQRT_2);
        QuadResult { value: v, err_est: EPS_CLOSED, evaluations: 0, converged: true }
    }
}

fn i3_2(x: f64, a: f64, b: f64, c: f64, cfg: &QuadConfig) -> QuadResult {
    let zero = QuadResult { value: 0.0, err_est: 0.0, evaluations: 0, converged: true };
    if 2.0 * b - x <= 0.0 {
        return zero;
    }
    let fs = |z: f64| exp(z) * mass(sqrt((c * c * x * x + 4.0 * c * z).max(0.0)), c * (2.0 * b - x));
    if 2.0 * a + x <= 0.0 {
        let (lo, hi) = (-c * x * x / 4.0, c * (b * b - b * x));
        return if lo < hi { quad::integrate_finite(fs, lo, hi, cfg) } else { zero };
    }
    let mut out = zero;
    if a + b > 0.0 {
        let (lo, hi) = (c * (a * a + a * x), c * (b * b - b * x));
        if lo < hi {
            let r = quad::integrate_finite(fs, lo, hi, cfg);
            out.value += r.value;
            out.err_est += r.err_est;
            out.converged &= r.converged;
        }
    }
    let m0 = mass(c * (2.0 * a + x), c * (2.0 * b - x));
    let (lo, hi) = (-c * x * x / 4.0, c * (a * a + a * x));
    if lo < hi {
        out.value += m0 * (exp(hi) - exp(lo));
    }
    out
}

/// B_2^h(x, [a,b]) for drift c t^2 - t^2 (boundary c t^2):
/// I_1(a) + I_1(-b) + I_31 + I_32(a,b) + I_32(-b,-a).
pub fn prop21_lambda2(x: f64, a: f64, b: f64, c: f64, cfg: &QuadConfig) -> PBValue {
    // symmetric boundary: fold all-negative intervals to the positive side
    let (a, b) = if b <= 0.0 { (-b, -a) } else { (a, b) };
    let i31 = exp(-c * x * x / 4.0) * mass(c * (2.0 * a + x), c * (2.0 * b - x));
    let parts = [
        i1_lambda2(x, a, c, cfg),
        i1_lambda2(x, -b, c, cfg),
        i3_2(x, a, b, c, cfg),
        i3_2(x, -b, -a, c, cfg),
    ];
    let mut value = i31;
    let mut err = EPS_CLOSED;
    let mut conv = true;
    for p in &parts {
        value += p.value;
        err += p.err_est;
        conv &= p.converged;
    }
    let mut v = PBValue::new(value, err, Method::SemiClosed);
    if x == b - a {
        v = v.with_flag(Flag::EndpointLeftLimit);
    }
    if !conv {
        v = v.with_flag(Flag::NotConverged);
    }
    v
}

// ---------------------------------------------------------------------------
// lambda = 1 interval decomposition
// ---------------------------------------------------------------------------

fn h1(x: f64, a: f64, c: f64, cfg: &QuadConfig) -> QuadResult {
    let m = a + x;
    if m > 0.0 {
        let up = -2.0 * c * m;
        let mut r = quad::integrate_exp_left(
            |w| (big_phi(-c / SQRT_2) - big_phi((c + (w + up) / m) / SQRT_2)).clamp(0.0, 1.0),
            cfg,
        );
        let s = exp(up);
        r.value *= s;
        r.err_est *= s;
        r
    } else {
        let v = if m < 0.0 { psi(c / SQRT_2) + common_inf(c, -m) } else { psi(c / SQRT_2) };
        QuadResult { value: v, err_est: EPS_CLOSED * v.abs().max(1.0), evaluations: 0, converged: true }
    }
}

fn add(out: &mut QuadResult, r: QuadResult) {
    out.value += r.value;
    out.err_est += r.err_est;
    out.converged &= r.converged;
    out.evaluations += r.evaluations;
}

/// P-mass over the cusp-slope window -c < sqrt2 N < c of {sojourn > x} at
/// level z < 0. There the sub-level set is (z/(c+s), -z/(c-s)) clipped to
/// [a,b] (s = sqrt2 N), and each clipping case gives explicit s-intervals.
fn mid_window_mass(z: f64, x: f64, a: f64, b: f64, c: f64) -> f64 {
    let sb = c + z / b; // right root beyond b  iff  s >= sb
    let sa = z / a - c; // left root beyond a   iff  s <= sa
    let mut m = 0.0;
    // both ends clipped: length b - a
    if x < b - a {
        m += mass((-c).max(sb), c.min(sa));
    }
    // right end clipped only: length b - t1
    let bcut = if b - x < 0.0 { z / (b - x) - c } else { f64::INFINITY };
    m += mass((-c).max(sb).max(sa), c.min(bcut));
    // left end clipped only: length t2 - a
    let acut = if a + x > 0.0 { c + z / (a + x) } else { f64::NEG_INFINITY };
    m += mass((-c).max(acut), c.min(sb).min(sa));
    // interior roots: length -2cz/(c^2 - s^2), exceeds x iff s^2 > c^2 + 2cz/x
    let lo = (-c).max(sa);
    let hi = c.min(sb);
    if x > 0.0 {
        let r = sqrt((c * c + 2.0 * c * z / x).max(0.0));
        m += mass(lo, hi.min(-r)) + mass(lo.max(r), hi);
    } else {
        m += mass(lo, hi);
    }
    m
}

/// B_2^h(x, [a,b]) for boundary c|t|: closed for a >= 0, otherwise the two
/// steep-slope terms plus a quadrature over the cusp-slope window.
pub fn prop21_lambda1(x: f64, a: f64, b: f64, c: f64, cfg: &QuadConfig) -> PBValue {
    let (a, b) = if b <= 0.0 { (-b, -a) } else { (a, b) };
    let mut v = if a >= 0.0 {
        let m = a + x;
        closed_value(exp(m * (m - c)) - nu_prime(m, c) + nu_prime(b - x, c))
    } else {
        let mut out = h1(x, a, c, cfg);
        add(&mut out, h1(x, -b, c, cfg));
        add(&mut out, quad::integrate_exp_left(|z| mid_window_mass(z, x, a, b, c), cfg));
        let mut r = PBValue::new(out.value, out.err_est, Method::SemiClosed);
        if !out.converged {
            r = r.with_flag(Flag::NotConverged);
        }
        r
    };
    v.method = if a >= 0.0 { Method::Closed } else { Method::SemiClosed };
    if x == b - a {
        v = v.with_flag(Flag::EndpointLeftLimit);
    }
    v
}
