//! Rigorous bounds on B_2^h(x, [a, b]) for the power drift family, plus the
//! drift-removal sandwich usable for any alpha.

use libm::{exp, fabs, pow};

use crate::gauss::nu_prime;
use crate::mc::{self, MCConfig};
use crate::problem::{Domain, Drift, EvalError, Flag, Method, PBValue, Problem};
use crate::quad::QuadConfig;
use crate::sojourn;

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const EDGE_EPS: f64 = 1e-8;

/// Golden-section minimizer on [lo, hi]; returns (argmin, min). The bound
/// functionals are valid at every y, so a local minimum still yields a
/// correct (merely sub-optimal) bound.
fn golden_min(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo <= 1e-12 * (1.0 + fabs(lo) + fabs(hi)) {
            break;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let xm = 0.5 * (lo + hi);
    (xm, f(xm))
}

fn golden_max(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let (x, v) = golden_min(&|y| -f(y), lo, hi);
    (x, -v)
}

/// Tangent-line comparison functional: C_0(y) D_0(y) with the drift replaced
/// by its tangent at y; sub-interval (aa, bb) carries the comparison domain.
fn tangent_bound(y: f64, x: f64, aa: f64, bb: f64, c: f64, lambda: f64) -> f64 {
    let c0 = lambda * c * pow(fabs(y), lambda - 1.0) * if y < 0.0 { -1.0 } else { 1.0 };
    let cap_c0 = exp((lambda - 1.0) * c * pow(fabs(y), lambda));
    cap_c0 * (nu_prime(bb - x, c0) + nu_prime(-(aa + x), -c0))
}

fn reflect_if_negative(a: f64, b: f64) -> (f64, f64) {
    if b <= 0.0 {
        (-b, -a)
    } else {
        (a, b)
    }
}

/// Upper bound for convex power drifts (lambda >= 1): minimize the tangent
/// comparison over y in E \ {0}.
pub fn upper_bound_convex(problem: &Problem) -> Result<PBValue, EvalError> {
    problem.validate()?;
    let (c, lambda) = match problem.drift {
        Drift::PowerMinusQuad { c, lambda } if lambda >= 1.0 => (c, lambda),
        Drift::PowerMinusQuad { .. } => return Err(EvalError::UnsupportedDrift),
        _ => return Err(EvalError::UnsupportedDrift),
    };
    if problem.alpha != 2.0 {
        return Err(EvalError::UnsupportedAlpha);
    }
    let (a, b) = match problem.domain {
        Domain::Interval { a, b } => reflect_if_negative(a, b),
        Domain::HalfLine => return Err(EvalError::UnsupportedDomain),
    };
    let x = problem.x;
    let f = |y: f64| tangent_bound(y, x, a, b, c, lambda);
    let mut best = f64::INFINITY;
    if b > EDGE_EPS {
        best = best.min(golden_min(&f, a.max(EDGE_EPS), b).1);
    }
    if a < -EDGE_EPS {
        best = best.min(golden_min(&f, a, -EDGE_EPS).1);
    }
    Ok(PBValue::new(best, 0.0, Method::Bound))
}

/// Lower bound for concave power drifts (lambda < 1): maximize the tangent
/// comparison; mixed-sign intervals take the better of the two one-sided
/// sub-intervals.
pub fn lower_bound_concave(problem: &Problem) -> Result<PBValue, EvalError> {
    problem.validate()?;
    let (c, lambda) = match problem.drift {
        Drift::PowerMinusQuad { c, lambda } if lambda < 1.0 => (c, lambda),
        Drift::PowerMinusQuad { .. } => return Err(EvalError::UnsupportedDrift),
        _ => return Err(EvalError::UnsupportedDrift),
    };
    if problem.alpha != 2.0 {
        return Err(EvalError::UnsupportedAlpha);
    }
    let (a, b) = match problem.domain {
        Domain::Interval { a, b } => reflect_if_negative(a, b),
        Domain::HalfLine => return Err(EvalError::UnsupportedDomain),
    };
    let x = problem.x;
    let mut best = 0.0f64;
    if a >= 0.0 {
        best = best.max(golden_max(&|y| tangent_bound(y, x, a, b, c, lambda), a.max(EDGE_EPS), b).1);
    } else {
        // split at the cusp; each side compares against its own sub-interval
        best = best.max(golden_max(&|y| tangent_bound(y, x, a, 0.0, c, lambda), a, -EDGE_EPS).1);
        best = best.max(golden_max(&|y| tangent_bound(y, x, 0.0, b, c, lambda), EDGE_EPS, b).1);
    }
    Ok(PBValue::new(best, 0.0, Method::Bound))
}

/// Two-sided sandwich bounds.
#[derive(Clone, Debug)]
pub struct Sandwich {
    pub lower: PBValue,
    pub upper: PBValue,
    /// sup of the drift over E used in the lower bound.
    pub drift_sup: f64,
}

fn drift_fn(drift: &Drift, alpha: f64, t: f64) -> f64 {
    match *drift {
        Drift::Zero => 0.0,
        Drift::PowerAlpha { c } => c * pow(fabs(t), alpha),
        Drift::PowerMinusQuad { c, lambda } => c * pow(fabs(t), lambda) - t * t,
    }
}

/// sup_{t in E} h(t); stationary point of c r^lambda - r^2 at
/// r* = (lambda c / 2)^{1/(2 - lambda)}, otherwise endpoint-driven.
fn drift_sup(drift: &Drift, alpha: f64, domain: &Domain) -> f64 {
    let (a, b) = match *domain {
        Domain::HalfLine => (0.0, f64::INFINITY),
        Domain::Interval { a, b } => (a, b),
    };
    if !b.is_finite() {
        return match *drift {
            Drift::Zero => 0.0,
            Drift::PowerAlpha { .. } => f64::INFINITY,
            Drift::PowerMinusQuad { c, lambda } => {
                if lambda > 2.0 || (lambda == 2.0 && c > 1.0) {
                    f64::INFINITY
                } else if lambda == 2.0 {
                    0.0
                } else {
                    let r = pow(lambda * c / 2.0, 1.0 / (2.0 - lambda));
                    drift_fn(drift, alpha, r).max(0.0)
                }
            }
        };
    }
    // attainable |t| range over [a, b]
    let (rlo, rhi) = if a <= 0.0 && b >= 0.0 {
        (0.0, fabs(a).max(b))
    } else {
        (fabs(a).min(fabs(b)), fabs(a).max(fabs(b)))
    };
    let mut m = drift_fn(drift, alpha, rlo).max(drift_fn(drift, alpha, rhi));
    if let Drift::PowerMinusQuad { c, lambda } = *drift {
        if lambda != 2.0 {
            let r = pow(lambda * c / 2.0, 1.0 / (2.0 - lambda));
            if r > rlo && r < rhi {
                m = m.max(drift_fn(drift, alpha, r));
            }
        }
    }
    m
}

fn zero_drift_value(problem: &Problem, cfg: &QuadConfig, mcfg: &MCConfig) -> Result<PBValue, EvalError> {
    let zp = Problem { drift: Drift::Zero, ..*problem };
    if problem.alpha == 2.0 {
        if let Domain::Interval { .. } = problem.domain {
            return sojourn::pb_quadrature(&zp, cfg);
        }
    }
    Ok(mc::mc_pb(&zp, mcfg)?.to_pbvalue())
}

fn value_at(problem: &Problem, cfg: &QuadConfig, mcfg: &MCConfig) -> Result<PBValue, EvalError> {
    if problem.alpha == 2.0 {
        if let Ok(v) = sojourn::pb_quadrature(problem, cfg) {
            return Ok(v);
        }
    }
    if problem.alpha == 1.0 {
        if let (Drift::PowerAlpha { c }, Domain::HalfLine) = (&problem.drift, &problem.domain) {
            return Ok(crate::closed::bm1_constructive(problem.x, *c, cfg));
        }
    }
    Ok(mc::mc_pb(problem, mcfg)?.to_pbvalue())
}

/// Drift-removal sandwich: e^{-sup h} B_alpha(x, E) <= B_alpha^h(x, E) <=
/// min(B_alpha^h(x, [0, inf)), B_alpha^h(0, E)); deterministic routes when
/// available, Monte Carlo (flagged) otherwise.
pub fn sandwich_bounds(problem: &Problem, cfg: &QuadConfig, mcfg: &MCConfig) -> Result<Sandwich, EvalError> {
    problem.validate()?;
    let m = drift_sup(&problem.drift, problem.alpha, &problem.domain);
    let lower = if m.is_finite() {
        let zv = zero_drift_value(problem, cfg, mcfg)?;
        let s = exp(-m);
        let mut v = PBValue::new(s * zv.value, s * zv.err_est, Method::Bound);
        for f in zv.flags {
            v = v.with_flag(f);
        }
        v
    } else {
        PBValue::new(0.0, 0.0, Method::Bound)
    };
    // upper candidates: larger domain, and smaller threshold
    let mut upper: Option<PBValue> = None;
    let mut consider = |cand: Result<PBValue, EvalError>| {
        if let Ok(v) = cand {
            let better = upper.as_ref().map(|u| v.value < u.value).unwrap_or(true);
            if better {
                upper = Some(v);
            }
        }
    };
    consider(value_at(&Problem { x: 0.0, ..*problem }, cfg, mcfg));
    // the half-line dominates E only when E fits inside it (up to symmetry)
    if let Domain::Interval { a, b } = problem.domain {
        if a >= 0.0 || b <= 0.0 {
            consider(value_at(&Problem { domain: Domain::HalfLine, ..*problem }, cfg, mcfg));
        }
    }
    let mut upper = upper.ok_or(EvalError::UnsupportedDomain)?;
    upper.method = Method::Bound;
    if upper.flags.contains(&Flag::EndpointLeftLimit) {
        upper.flags.retain(|f| *f != Flag::EndpointLeftLimit);
    }
    Ok(Sandwich { lower, upper, drift_sup: m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sojourn::pb_quadrature;

    fn pmq(c: f64, lambda: f64, a: f64, b: f64, x: f64) -> Problem {
        Problem {
            alpha: 2.0,
            drift: Drift::PowerMinusQuad { c, lambda },
            domain: Domain::Interval { a, b },
            x,
        }
    }

    #[test]
    fn convex_upper_bound_holds() {
        let cfg = QuadConfig::default();
        let cases = [
            (1.0, 2.0, 0.0, 3.0, 1.0),
            (2.0, 2.0, -1.0, 2.0, 0.5),
            (1.0, 1.0, 1.0, 4.0, 1.5),
            (2.0, 1.5, -2.0, -0.5, 0.4),
        ];
        for &(c, lambda, a, b, x) in &cases {
            let pr = pmq(c, lambda, a, b, x);
            let ub = upper_bound_convex(&pr).unwrap();
            let v = pb_quadrature(&pr, &cfg).unwrap();
            assert!(
                v.value <= ub.value * (1.0 + 1e-9) + 1e-10,
                "c={c} l={lambda} [{a},{b}] x={x}: v={} ub={}",
                v.value,
                ub.value
            );
            // the bound should not be wildly loose at moderate x
            assert!(ub.value.is_finite() && ub.value > 0.0);
        }
    }

    #[test]
    fn concave_lower_bound_holds() {
        let cfg = QuadConfig::default();
        let cases = [(1.0, 0.5, 0.0, 2.0, 0.5), (1.5, 0.7, -1.0, 1.5, 0.6)];
        for &(c, lambda, a, b, x) in &cases {
            let pr = pmq(c, lambda, a, b, x);
            let lb = lower_bound_concave(&pr).unwrap();
            let v = pb_quadrature(&pr, &cfg).unwrap();
            assert!(
                v.value >= lb.value * (1.0 - 1e-9) - 1e-10,
                "c={c} l={lambda} [{a},{b}] x={x}: v={} lb={}",
                v.value,
                lb.value
            );
        }
    }

    #[test]
    fn wrong_convexity_rejected() {
        assert!(upper_bound_convex(&pmq(1.0, 0.5, 0.0, 2.0, 0.5)).is_err());
        assert!(lower_bound_concave(&pmq(1.0, 2.0, 0.0, 2.0, 0.5)).is_err());
    }

    #[test]
    fn sandwich_brackets_quadrature() {
        let cfg = QuadConfig::default();
        let mcfg = MCConfig { n_paths: 2000, ..Default::default() };
        for &(c, lambda, a, b, x) in &[(2.0, 2.0, -1.0, 1.0, 0.5), (1.0, 1.0, 0.0, 2.0, 0.8)] {
            let pr = pmq(c, lambda, a, b, x);
            let s = sandwich_bounds(&pr, &cfg, &mcfg).unwrap();
            let v = pb_quadrature(&pr, &cfg).unwrap();
            assert!(s.lower.value <= v.value + 1e-8, "lower {} v {}", s.lower.value, v.value);
            assert!(s.upper.value >= v.value - 1e-8, "upper {} v {}", s.upper.value, v.value);
        }
    }

    #[test]
    fn drift_sup_stationary_point() {
        // c|t|^0.5 - t^2 with c = 2: interior maximum at (lambda c / 2)^{1/(2-lambda)}
        let d = Drift::PowerMinusQuad { c: 2.0, lambda: 0.5 };
        let m = drift_sup(&d, 2.0, &Domain::Interval { a: -1.0, b: 1.0 });
        let r = pow(0.5 * 2.0 * 0.5, 1.0 / 1.5);
        let expect = 2.0 * pow(r, 0.5) - r * r;
        assert!((m - expect).abs() < 1e-12);
    }
}
