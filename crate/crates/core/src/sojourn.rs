//! Sojourn-length geometry and definition-level evaluation of B_2^h(x, E):
//! root isolation of f_N(t) = h(t) + t^2 - sqrt2 N t + z, exact Phi-mass
//! assembly of the exceedance set in N, and the event decompositions for
//! convex and concave drifts.

use core::cell::Cell;

use alloc::vec::Vec;
use libm::{fabs, pow, sqrt};

use crate::gauss::{self, SQRT_2};
use crate::problem::{Domain, Drift, EvalError, Flag, Method, PBValue, Problem};
use crate::quad::{self, QuadConfig, QuadError, QuadResult};

const ROOT_TOL_T: f64 = 1e-12;
const ROOT_TOL_U: f64 = 1e-10;

/// Piecewise description of t -> h(t) + t^2 restricted to E, specialized for
/// fast root finding.
#[derive(Clone, Copy, Debug)]
pub(crate) enum SojournKernel {
    /// boundary k t^2 on [a, b] (b may be +inf)
    Quadratic { k: f64, a: f64, b: f64 },
    /// boundary c |t| on [a, b]
    Linear { c: f64, a: f64, b: f64 },
    /// boundary c |t|^lambda on [a, b]
    Generic { c: f64, lambda: f64, a: f64, b: f64 },
}

impl SojournKernel {
    pub(crate) fn new(drift: &Drift, domain: &Domain) -> Result<Self, EvalError> {
        let (a, b) = match *domain {
            Domain::HalfLine => (0.0, f64::INFINITY),
            Domain::Interval { a, b } => (a, b),
        };
        match *drift {
            Drift::Zero => Ok(SojournKernel::Quadratic { k: 1.0, a, b }),
            Drift::PowerAlpha { c } => {
                if *domain == Domain::HalfLine {
                    Ok(SojournKernel::Quadratic { k: 1.0 + c, a, b })
                } else {
                    Err(EvalError::UnsupportedDomain)
                }
            }
            Drift::PowerMinusQuad { c, lambda } => {
                if lambda == 2.0 {
                    Ok(SojournKernel::Quadratic { k: c, a, b })
                } else if *domain == Domain::HalfLine {
                    Err(EvalError::UnsupportedDomain)
                } else if lambda == 1.0 {
                    Ok(SojournKernel::Linear { c, a, b })
                } else {
                    Ok(SojournKernel::Generic { c, lambda, a, b })
                }
            }
        }
    }

    /// mes{t in E : boundary(t) - sqrt2 u t + z < 0}
    pub(crate) fn len(&self, z: f64, u: f64) -> f64 {
        match *self {
            SojournKernel::Quadratic { k, a, b } => {
                let disc = 2.0 * u * u - 4.0 * k * z;
                if disc <= 0.0 {
                    return 0.0;
                }
                let r = sqrt(disc);
                let t1 = (SQRT_2 * u - r) / (2.0 * k);
                let t2 = (SQRT_2 * u + r) / (2.0 * k);
                (t2.min(b) - t1.max(a)).max(0.0)
            }
            SojournKernel::Linear { c, a, b } => {
                let mut tot = 0.0;
                let (lo, hi) = (a.max(0.0), b);
                if hi > lo {
                    tot += lin_len(c - SQRT_2 * u, z, lo, hi);
                }
                let (lo, hi) = (a, b.min(0.0));
                if hi > lo {
                    tot += lin_len(-c - SQRT_2 * u, z, lo, hi);
                }
                tot
            }
            SojournKernel::Generic { c, lambda, a, b } => generic_len(c, lambda, a, b, z, u),
        }
    }
}

/// measure of {t in [lo, hi] : s t + z < 0}
fn lin_len(s: f64, z: f64, lo: f64, hi: f64) -> f64 {
    if s > 0.0 {
        (hi.min(-z / s) - lo).max(0.0)
    } else if s < 0.0 {
        (hi - lo.max(-z / s)).max(0.0)
    } else if z < 0.0 {
        hi - lo
    } else {
        0.0
    }
}

fn generic_len(c: f64, lambda: f64, a: f64, b: f64, z: f64, u: f64) -> f64 {
    let g = |t: f64| c * pow(fabs(t), lambda) - SQRT_2 * u * t + z;
    // breakpoints: endpoints, the cusp at 0, and per-arm stationary points
    let mut pts = [0.0f64; 5];
    let mut n = 0;
    pts[n] = a;
    n += 1;
    if a < 0.0 && b > 0.0 {
        pts[n] = 0.0;
        n += 1;
    }
    let v = SQRT_2 * u;
    if v > 0.0 && b > 0.0 {
        let ts = if lambda > 1.0 {
            pow(v / (lambda * c), 1.0 / (lambda - 1.0))
        } else {
            pow(lambda * c / v, 1.0 / (1.0 - lambda))
        };
        if ts > a.max(0.0) && ts < b {
            pts[n] = ts;
            n += 1;
        }
    }
    if v < 0.0 && a < 0.0 {
        let ts = if lambda > 1.0 {
            -pow(-v / (lambda * c), 1.0 / (lambda - 1.0))
        } else {
            -pow(lambda * c / -v, 1.0 / (1.0 - lambda))
        };
        if ts > a && ts < b.min(0.0) {
            pts[n] = ts;
            n += 1;
        }
    }
    pts[n] = b;
    n += 1;
    pts[..n].sort_unstable_by(|p, q| p.partial_cmp(q).unwrap());

    let mut tot = 0.0;
    for w in pts[..n].windows(2) {
        let (l, r) = (w[0], w[1]);
        if r <= l {
            continue;
        }
        let (gl, gr) = (g(l), g(r));
        if gl < 0.0 && gr < 0.0 {
            tot += r - l;
        } else if gl < 0.0 {
            tot += bisect_t(&g, l, r, true) - l;
        } else if gr < 0.0 {
            tot += r - bisect_t(&g, l, r, false);
        }
    }
    tot
}

/// Root of monotone g on [l, r]; `neg_left` says g < 0 at the left end.
fn bisect_t(g: &impl Fn(f64) -> f64, mut l: f64, mut r: f64, neg_left: bool) -> f64 {
    for _ in 0..200 {
        if r - l <= ROOT_TOL_T {
            break;
        }
        let m = 0.5 * (l + r);
        if (g(m) < 0.0) == neg_left {
            l = m;
        } else {
            r = m;
        }
    }
    0.5 * (l + r)
}

/// Context for resolving {u : L(z, u) > x} into explicit intervals.
pub(crate) struct ProbCtx {
    pub kern: SojournKernel,
    pub x: f64,
    /// limits of L as u -> +inf / -inf
    pub m_pos: f64,
    pub m_neg: f64,
    bmax: f64,
    qmax: f64,
}

impl ProbCtx {
    pub(crate) fn new(drift: &Drift, domain: &Domain, x: f64) -> Result<Self, EvalError> {
        let kern = SojournKernel::new(drift, domain)?;
        let (a, b) = match *domain {
            Domain::Interval { a, b } => (a, b),
            Domain::HalfLine => (0.0, f64::INFINITY),
        };
        let q = |t: f64| match kern {
            SojournKernel::Quadratic { k, .. } => k * t * t,
            SojournKernel::Linear { c, .. } => c * fabs(t),
            SojournKernel::Generic { c, lambda, .. } => c * pow(fabs(t), lambda),
        };
        Ok(ProbCtx {
            kern,
            x,
            m_pos: (b - a.max(0.0)).max(0.0),
            m_neg: (b.min(0.0) - a).max(0.0),
            bmax: fabs(a).max(fabs(b)),
            qmax: q(a).max(if b.is_finite() { q(b) } else { 0.0 }),
        })
    }

    fn window(&self, z: f64) -> f64 {
        8.5 + self.bmax + (z.max(0.0) + self.qmax) / (2.0 * self.bmax.max(0.25))
    }

    fn g(&self, z: f64, u: f64) -> f64 {
        self.kern.len(z, u) - self.x
    }

    /// Phi-mass of {u in (ulo, uhi) : L(z, u) > x}, exact interval assembly.
    pub(crate) fn region_mass(&self, z: f64, ulo: f64, uhi: f64) -> Result<f64, EvalError> {
        if self.x >= self.m_pos + self.m_neg {
            return Ok(0.0);
        }
        let mut w = self.window(z);
        if ulo.is_finite() {
            w = w.max(fabs(ulo) + 17.0);
        }
        if uhi.is_finite() {
            w = w.max(fabs(uhi) + 17.0);
        }
        let lo = ulo.max(-w);
        let hi = uhi.min(w);
        if !(hi > lo) {
            return Ok(0.0);
        }
        let mut n = 257usize;
        loop {
            match self.assemble(z, lo, hi, n, ulo, uhi) {
                Some(m) => return Ok(m),
                None => {
                    n = 2 * n - 1;
                    if n > 8193 {
                        return Err(EvalError::TooManyCrossings);
                    }
                }
            }
        }
    }

    /// u-values where the level-z curve meets an interval endpoint, the slope
    /// window changes, or the selection can turn around. Between consecutive
    /// corners L(z, u) is monotone for the linear and quadratic kernels, so a
    /// scan that samples every corner cannot miss a narrow exceedance window.
    fn corner_us(&self, z: f64, lo: f64, hi: f64, out: &mut Vec<f64>) {
        let (a, b, slope) = match self.kern {
            SojournKernel::Quadratic { a, b, .. } => (a, b, None),
            SojournKernel::Linear { c, a, b } => (a, b, Some(c / SQRT_2)),
            SojournKernel::Generic { a, b, .. } => (a, b, None),
        };
        let q = |t: f64| match self.kern {
            SojournKernel::Quadratic { k, .. } => k * t * t,
            SojournKernel::Linear { c, .. } => c * fabs(t),
            SojournKernel::Generic { c, lambda, .. } => c * pow(fabs(t), lambda),
        };
        let mut push = |u: f64| {
            if u > lo && u < hi {
                out.push(u);
            }
        };
        for t in [a, b] {
            if t != 0.0 && t.is_finite() {
                push((q(t) + z) / (SQRT_2 * t));
            }
        }
        push(0.0);
        if let Some(s) = slope {
            push(s);
            push(-s);
        }
    }

    /// One scan pass; None means "too many crossings, retry denser".
    fn assemble(&self, z: f64, lo: f64, hi: f64, n: usize, ulo: f64, uhi: f64) -> Option<f64> {
        let step = (hi - lo) / (n - 1) as f64;
        let mut us: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
        self.corner_us(z, lo, hi, &mut us);
        us.sort_unstable_by(|p, q| p.partial_cmp(q).unwrap());
        let gs: Vec<f64> = us.iter().map(|&u| self.g(z, u)).collect();
        let mut crossings: Vec<f64> = Vec::new();
        for i in 1..us.len() {
            if (gs[i - 1] > 0.0) != (gs[i] > 0.0) {
                crossings.push(self.bisect_u(z, us[i - 1], us[i], gs[i - 1] > 0.0));
            }
        }
        if crossings.len() > 16 && n < 8193 {
            return None;
        }

        let mut bounds: Vec<(f64, f64)> = Vec::new();
        let mut state = gs[0] > 0.0;
        let mut open = f64::NAN;
        if state {
            open = if lo > ulo {
                // scan window clipped an infinite left boundary
                if self.m_neg > self.x {
                    f64::NEG_INFINITY
                } else {
                    self.extend_left_crossing(z, lo, true)
                }
            } else {
                lo
            };
        } else if lo > ulo && self.m_neg > self.x {
            // selected in the far-left tail only
            let cr = self.extend_left_crossing(z, lo, false);
            if cr.is_finite() {
                bounds.push((f64::NEG_INFINITY, cr));
            }
        }
        for &cr in &crossings {
            if state {
                bounds.push((open, cr));
            } else {
                open = cr;
            }
            state = !state;
        }
        if state {
            let close = if hi < uhi {
                if self.m_pos > self.x {
                    f64::INFINITY
                } else {
                    self.extend_right_crossing(z, hi, true)
                }
            } else {
                hi
            };
            bounds.push((open, close));
        } else if hi < uhi && self.m_pos > self.x {
            let cr = self.extend_right_crossing(z, hi, false);
            if cr.is_finite() {
                bounds.push((cr, f64::INFINITY));
            }
        }
        let mut mass = 0.0;
        for &(l, h) in &bounds {
            mass += gauss::norm_mass(l, h);
        }
        Some(mass.clamp(0.0, 1.0))
    }

    fn bisect_u(&self, z: f64, mut l: f64, mut r: f64, pos_left: bool) -> f64 {
        for _ in 0..200 {
            if r - l <= ROOT_TOL_U {
                break;
            }
            let m = 0.5 * (l + r);
            if (self.g(z, m) > 0.0) == pos_left {
                l = m;
            } else {
                r = m;
            }
        }
        0.5 * (l + r)
    }

    /// Crossing below `lo`, where the selection state flips away from
    /// `pos_at_lo`; falls back to `lo` if none is found.
    fn extend_left_crossing(&self, z: f64, lo: f64, pos_at_lo: bool) -> f64 {
        let mut step = 1.0f64.max(0.05 * fabs(lo));
        let mut prev = lo;
        for _ in 0..64 {
            let u = prev - step;
            if (self.g(z, u) > 0.0) != pos_at_lo {
                return self.bisect_u(z, u, prev, !pos_at_lo);
            }
            prev = u;
            step *= 2.0;
        }
        lo
    }

    /// Crossing above `hi`; falls back to `hi` if none is found.
    fn extend_right_crossing(&self, z: f64, hi: f64, pos_at_hi: bool) -> f64 {
        let mut step = 1.0f64.max(0.05 * fabs(hi));
        let mut prev = hi;
        for _ in 0..64 {
            let u = prev + step;
            if (self.g(z, u) > 0.0) != pos_at_hi {
                return self.bisect_u(z, prev, u, pos_at_hi);
            }
            prev = u;
            step *= 2.0;
        }
        hi
    }
}

/// mes{t in E : h(t) + t^2 - sqrt2 u t + z < 0} for the alpha = 2 boundary.
pub fn sojourn_length(z: f64, u: f64, drift: &Drift, domain: &Domain) -> Result<f64, EvalError> {
    Ok(SojournKernel::new(drift, domain)?.len(z, u))
}

/// P{L(z, N) > x} for alpha = 2, N ~ N(0,1).
pub fn prob_sojourn_exceeds(z: f64, problem: &Problem) -> Result<f64, EvalError> {
    problem.validate()?;
    if problem.alpha != 2.0 {
        return Err(EvalError::UnsupportedAlpha);
    }
    match problem.domain {
        Domain::Interval { .. } => {
            let ctx = ProbCtx::new(&problem.drift, &problem.domain, problem.x)?;
            ctx.region_mass(z, f64::NEG_INFINITY, f64::INFINITY)
        }
        Domain::HalfLine => {
            let q = halfline_coeff(&problem.drift)?;
            Ok(halfline_prob(q, problem.x, z))
        }
    }
}

/// Quadratic boundary coefficient q with h(t) + t^2 = q t^2 on the half-line;
/// the z-integral converges only for q > 1.
fn halfline_coeff(drift: &Drift) -> Result<f64, EvalError> {
    match *drift {
        Drift::PowerAlpha { c } => Ok(1.0 + c),
        Drift::PowerMinusQuad { c, lambda } if lambda == 2.0 && c > 1.0 => Ok(c),
        _ => Err(EvalError::UnsupportedDomain),
    }
}

/// P{mes{t >= 0 : q t^2 - sqrt2 u t + z < 0} > x} in closed form.
fn halfline_prob(q: f64, x: f64, z: f64) -> f64 {
    if x == 0.0 {
        if z < 0.0 {
            1.0
        } else {
            gauss::psi(sqrt(2.0 * q * z))
        }
    } else if z <= 0.0 {
        gauss::psi((q * x * x + z) / (SQRT_2 * x))
    } else {
        gauss::psi(sqrt(0.5 * q * q * x * x + 2.0 * q * z))
    }
}

fn decay_hint_interval(a: f64, b: f64, qmax: f64, cfg: &QuadConfig) -> f64 {
    // e^z P(z) decays only like z^{-1/2} until z ~ 2 B^2 + qmax; the cap
    // tail_start * hint must clear that scale
    let bm = fabs(a).max(fabs(b));
    (1.0f64).max((2.0 * bm * bm + qmax + 14.0 * bm + 10.0) / cfg.tail_start)
}

struct ErrCell(Cell<Option<EvalError>>);

impl ErrCell {
    fn new() -> Self {
        ErrCell(Cell::new(None))
    }
    fn grab(&self, r: Result<f64, EvalError>) -> f64 {
        match r {
            Ok(v) => v,
            Err(e) => {
                if self.0.get().is_none() {
                    self.0.set(Some(e));
                }
                0.0
            }
        }
    }
    fn check(&self) -> Result<(), EvalError> {
        match self.0.get() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

fn combine(left: QuadResult, right: QuadResult) -> PBValue {
    let mut v = PBValue::new(left.value + right.value, left.err_est + right.err_est, Method::Quadrature);
    if !(left.converged && right.converged) {
        v = v.with_flag(Flag::NotConverged);
    }
    v
}

fn map_tail(e: QuadError) -> EvalError {
    match e {
        QuadError::TailNotDecaying => EvalError::TailNotDecaying,
    }
}

/// Reference evaluation of B_2^h(x, E) directly from the defining integral.
pub fn pb_quadrature(problem: &Problem, cfg: &QuadConfig) -> Result<PBValue, EvalError> {
    problem.validate()?;
    if problem.alpha != 2.0 {
        return Err(EvalError::UnsupportedAlpha);
    }
    match problem.domain {
        Domain::HalfLine => {
            let q = halfline_coeff(&problem.drift)?;
            let x = problem.x;
            let left = if x == 0.0 {
                QuadResult { value: 1.0, err_est: 0.0, evaluations: 0, converged: true }
            } else {
                quad::integrate_exp_left(|z| halfline_prob(q, x, z), cfg)
            };
            let hint = (1.0f64).max(1.0 / (q - 1.0));
            let right = quad::integrate_exp_right(|z| halfline_prob(q, x, z), hint, cfg).map_err(map_tail)?;
            Ok(combine(left, right))
        }
        Domain::Interval { a, b } => {
            if problem.x >= b - a {
                // strict inequality in the definition: sojourn cannot exceed |E|
                return Ok(PBValue::new(0.0, 0.0, Method::Quadrature));
            }
            let ctx = ProbCtx::new(&problem.drift, &problem.domain, problem.x)?;
            let ec = ErrCell::new();
            let left = quad::integrate_exp_left(
                |z| ec.grab(ctx.region_mass(z, f64::NEG_INFINITY, f64::INFINITY)),
                cfg,
            );
            let hint = decay_hint_interval(a, b, ctx.qmax, cfg);
            let right = quad::integrate_exp_right(
                |z| ec.grab(ctx.region_mass(z, f64::NEG_INFINITY, f64::INFINITY)),
                hint,
                cfg,
            )
            .map_err(map_tail)?;
            ec.check()?;
            Ok(combine(left, right))
        }
    }
}

/// One-sided drift slope d/dt c|t|^lambda at t (right derivative at 0).
fn slope_plus(t: f64, c: f64, lambda: f64) -> f64 {
    if t > 0.0 {
        lambda * c * pow(t, lambda - 1.0)
    } else if t < 0.0 {
        -lambda * c * pow(-t, lambda - 1.0)
    } else if lambda == 1.0 {
        c
    } else if lambda > 1.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// B_2^h(x, [a,b]) as the sum of the event probabilities of the convex /
/// concave decompositions, with every u-event resolved to explicit intervals.
pub fn pb_event_decomposition(problem: &Problem, cfg: &QuadConfig) -> Result<PBValue, EvalError> {
    problem.validate()?;
    if problem.alpha != 2.0 {
        return Err(EvalError::UnsupportedAlpha);
    }
    let (c, lambda) = match problem.drift {
        Drift::PowerMinusQuad { c, lambda } => (c, lambda),
        _ => return Err(EvalError::UnsupportedDrift),
    };
    let (mut a, mut b) = match problem.domain {
        Domain::Interval { a, b } => (a, b),
        Domain::HalfLine => return Err(EvalError::UnsupportedDomain),
    };
    if b <= 0.0 {
        // symmetry of c|t|^lambda: B(x, [a,b]) = B(x, [-b,-a])
        let (na, nb) = (-b, -a);
        a = na;
        b = nb;
    }
    let x = problem.x;
    let endpoint = x == b - a;
    let mut v = if lambda >= 1.0 {
        if a >= 0.0 {
            convex_a_nonneg(x, a, b, c, lambda, cfg)?
        } else {
            convex_a_neg(x, a, b, c, lambda, cfg)?
        }
    } else if a >= 0.0 {
        concave_a_nonneg(x, a, b, c, lambda, cfg)?
    } else {
        concave_mixed(x, a, b, c, lambda, cfg)?
    };
    v.method = Method::SemiClosed;
    if endpoint {
        v = v.with_flag(Flag::EndpointLeftLimit);
    }
    Ok(v)
}

fn pmq_ctx(x: f64, a: f64, b: f64, c: f64, lambda: f64) -> Result<ProbCtx, EvalError> {
    ProbCtx::new(&Drift::PowerMinusQuad { c, lambda }, &Domain::Interval { a, b }, x)
}

/// Convex drift, a >= 0: unit-exponential boundary term for z < 0 plus the
/// interior-roots event over N > 0 for z > 0.
fn convex_a_nonneg(x: f64, a: f64, b: f64, c: f64, lambda: f64, cfg: &QuadConfig) -> Result<PBValue, EvalError> {
    let m = a + x;
    let left = quad::integrate_exp_left(
        |z| {
            if m > 0.0 {
                gauss::psi((c * pow(m, lambda) + z) / (SQRT_2 * m))
            } else if z < 0.0 {
                1.0
            } else {
                0.0
            }
        },
        cfg,
    );
    let ctx = pmq_ctx(x, a, b, c, lambda)?;
    let ec = ErrCell::new();
    let hint = decay_hint_interval(a, b, ctx.qmax, cfg);
    let right = quad::integrate_exp_right(|z| ec.grab(ctx.region_mass(z, 0.0, f64::INFINITY)), hint, cfg)
        .map_err(map_tail)?;
    ec.check()?;
    Ok(combine(left, right))
}

/// Convex drift, a < 0 < b: boundary events at a+x and b-x plus the
/// interior-minimum event on the slope window.
fn convex_a_neg(x: f64, a: f64, b: f64, c: f64, lambda: f64, cfg: &QuadConfig) -> Result<PBValue, EvalError> {
    let ua = slope_plus(a, c, lambda) / SQRT_2;
    let ub = slope_plus(b, c, lambda) / SQRT_2;
    let ctx = pmq_ctx(x, a, b, c, lambda)?;
    let ec = ErrCell::new();
    let p = |z: f64| {
        let mut s = 0.0;
        // f_N(a+x) < 0 with sqrt2 N <= slope at a
        let m = a + x;
        if m > 0.0 {
            s += gauss::norm_mass((c * pow(m, lambda) + z) / (SQRT_2 * m), ua);
        } else if m < 0.0 {
            s += gauss::norm_mass(f64::NEG_INFINITY, ua.min((c * pow(-m, lambda) + z) / (SQRT_2 * m)));
        } else if z < 0.0 {
            s += gauss::norm_mass(f64::NEG_INFINITY, ua);
        }
        // f_N(b-x) < 0 with sqrt2 N >= slope at b
        let m2 = b - x;
        if m2 > 0.0 {
            s += gauss::norm_mass(ub.max((c * pow(m2, lambda) + z) / (SQRT_2 * m2)), f64::INFINITY);
        } else if m2 < 0.0 {
            s += gauss::norm_mass(ub, (c * pow(-m2, lambda) + z) / (SQRT_2 * m2));
        } else if z < 0.0 {
            s += gauss::norm_mass(ub, f64::INFINITY);
        }
        // interior minimum between the slopes
        s += ec.grab(ctx.region_mass(z, ua, ub));
        s.clamp(0.0, 1.0)
    };
    let left = quad::integrate_exp_left(&p, cfg);
    let hint = decay_hint_interval(a, b, ctx.qmax, cfg);
    let right = quad::integrate_exp_right(&p, hint, cfg).map_err(map_tail)?;
    ec.check()?;
    Ok(combine(left, right))
}

/// Level u at which the positive-arm maximum of f touches 0 (lambda < 1, z < 0).
fn concave_u_thr(z: f64, c: f64, lambda: f64) -> f64 {
    let ts = pow(-z / (c * (1.0 - lambda)), 1.0 / lambda);
    lambda * c / (SQRT_2 * pow(ts, 1.0 - lambda))
}

/// Concave drift (lambda < 1), a >= 0: the four events of the concave
/// decomposition.
fn concave_a_nonneg(x: f64, a: f64, b: f64, c: f64, lambda: f64, cfg: &QuadConfig) -> Result<PBValue, EvalError> {
    let m1 = b - x;
    let m2 = a + x;
    // z > 0: {L > x} = {f(b-x) < 0}
    let hint = decay_hint_interval(a, b, c * pow(b, lambda), cfg);
    let t1 = quad::integrate_exp_right(
        |z| {
            if m1 > 0.0 {
                gauss::psi((c * pow(m1, lambda) + z) / (SQRT_2 * m1))
            } else {
                0.0
            }
        },
        hint,
        cfg,
    )
    .map_err(map_tail)?;
    // z < 0, N < 0: {f(a+x) < 0}
    let t2 = quad::integrate_exp_left(
        |z| {
            if m2 > 0.0 {
                (0.5 - gauss::big_phi((c * pow(m2, lambda) + z) / (SQRT_2 * m2))).max(0.0)
            } else {
                0.5
            }
        },
        cfg,
    );
    // z < 0, N > 0, positive-arm maximum below 0: full sojourn
    let t3 = quad::integrate_exp_left(
        |z| if z < 0.0 { gauss::psi(concave_u_thr(z, c, lambda)) } else { 0.0 },
        cfg,
    );
    // z < 0, N > 0, maximum above 0: two-sided remainder exceeds x
    let t4 = quad::integrate_exp_left(
        |z| if z < 0.0 { concave_t4_mass(z, x, a, b, c, lambda) } else { 0.0 },
        cfg,
    );
    let mut v = PBValue::new(
        t1.value + t2.value + t3.value + t4.value,
        t1.err_est + t2.err_est + t3.err_est + t4.err_est,
        Method::SemiClosed,
    );
    if !(t1.converged && t2.converged && t3.converged && t4.converged) {
        v = v.with_flag(Flag::NotConverged);
    }
    Ok(v)
}

/// Phi-mass over u in (0, u_thr) of {max(b - t2, 0) + max(t1 - a, 0) > x}
/// where t1 < t2 are the positive-arm roots of f (lambda < 1, z < 0).
fn concave_t4_mass(z: f64, x: f64, a: f64, b: f64, c: f64, lambda: f64) -> f64 {
    let f = |t: f64, u: f64| c * pow(t, lambda) - SQRT_2 * u * t + z;
    let ut = concave_u_thr(z, c, lambda);
    let ucap = ut.min(SQRT_2 * b + 9.0);
    let g = |u: f64| {
        let ts = pow(lambda * c / (SQRT_2 * u), 1.0 / (1.0 - lambda));
        let t1 = bisect_t(&|t| f(t, u), 0.0, ts, true);
        let mut hi = 2.0 * ts + 1.0;
        for _ in 0..100 {
            if f(hi, u) < 0.0 {
                break;
            }
            hi *= 2.0;
        }
        let t2 = bisect_t(&|t| f(t, u), ts, hi, false);
        (b - t2).max(0.0) + (t1 - a).max(0.0) - x
    };
    let n = 257usize;
    let lo = ucap * 1e-9;
    let step = (ucap - lo) / (n - 1) as f64;
    let mut mass = 0.0;
    let mut state = false;
    let mut open = 0.0;
    let mut gprev = 0.0;
    for i in 0..n {
        let u = lo + step * i as f64;
        let gi = g(u);
        let sel = gi > 0.0;
        if i == 0 {
            state = sel;
            open = 0.0; // interval starts at 0 when already selected
        } else if sel != state {
            // bisect the crossing in u
            let (mut l, mut r) = (u - step, u);
            let pos_left = gprev > 0.0;
            for _ in 0..100 {
                if r - l <= ROOT_TOL_U {
                    break;
                }
                let m = 0.5 * (l + r);
                if (g(m) > 0.0) == pos_left {
                    l = m;
                } else {
                    r = m;
                }
            }
            let cr = 0.5 * (l + r);
            if state {
                mass += gauss::norm_mass(open, cr);
            } else {
                open = cr;
            }
            state = sel;
        }
        gprev = gi;
    }
    if state {
        mass += gauss::norm_mass(open, ucap);
    }
    if ut > ucap && b > x {
        // beyond the scan cap both roots collapse toward t* -> 0, so the
        // remainder b - t2 stays above x: the whole tail is selected
        mass += gauss::norm_mass(ucap, ut);
    }
    mass.clamp(0.0, 1.0)
}

/// Concave drift with a < 0 < b: slope-window partition of the N axis; each
/// region's exceedance set is resolved by root isolation.
fn concave_mixed(x: f64, a: f64, b: f64, c: f64, lambda: f64, cfg: &QuadConfig) -> Result<PBValue, EvalError> {
    let ua = slope_plus(a, c, lambda) / SQRT_2;
    let ub = slope_plus(b, c, lambda) / SQRT_2;
    let ctx = pmq_ctx(x, a, b, c, lambda)?;
    let ec = ErrCell::new();
    let p = |z: f64| {
        let s = ec.grab(ctx.region_mass(z, f64::NEG_INFINITY, ua))
            + ec.grab(ctx.region_mass(z, ua, ub))
            + ec.grab(ctx.region_mass(z, ub, f64::INFINITY));
        s.clamp(0.0, 1.0)
    };
    let left = quad::integrate_exp_left(&p, cfg);
    let hint = decay_hint_interval(a, b, ctx.qmax, cfg);
    let right = quad::integrate_exp_right(&p, hint, cfg).map_err(map_tail)?;
    ec.check()?;
    Ok(combine(left, right))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(a: f64, b: f64) -> Domain {
        Domain::Interval { a, b }
    }

    #[test]
    fn sojourn_length_examples() {
        // z > 0, u = 0: boundary t^2 + z never dips below 0
        let l = sojourn_length(1.0, 0.0, &Drift::Zero, &interval(-5.0, 5.0)).unwrap();
        assert_eq!(l, 0.0);
        // c = 1, lambda = 2: {t^2 < 1} on [-2, 2] has measure 2
        let l = sojourn_length(
            -1.0,
            0.0,
            &Drift::PowerMinusQuad { c: 1.0, lambda: 2.0 },
            &interval(-2.0, 2.0),
        )
        .unwrap();
        assert!((l - 2.0).abs() < 1e-12);
        // c = 2, lambda = 1: {2|t| < 1} has measure 1
        let l = sojourn_length(
            -1.0,
            0.0,
            &Drift::PowerMinusQuad { c: 2.0, lambda: 1.0 },
            &interval(-3.0, 3.0),
        )
        .unwrap();
        assert!((l - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sojourn_length_generic_matches_grid() {
        // lambda = 0.5 cusp vs a dense-grid measure estimate
        let drift = Drift::PowerMinusQuad { c: 1.5, lambda: 0.5 };
        let dom = interval(-2.0, 3.0);
        for &(z, u) in &[(-0.7, 0.3), (-0.1, 1.0), (0.4, 2.0), (-2.0, -1.5)] {
            let l = sojourn_length(z, u, &drift, &dom).unwrap();
            let n = 4_000_000usize;
            let dt = 5.0 / n as f64;
            let mut cnt = 0usize;
            for i in 0..n {
                let t = -2.0 + (i as f64 + 0.5) * dt;
                if 1.5 * pow(fabs(t), 0.5) - SQRT_2 * u * t + z < 0.0 {
                    cnt += 1;
                }
            }
            assert!((l - cnt as f64 * dt).abs() < 1e-4, "z={z} u={u}");
        }
    }

    #[test]
    fn sojourn_length_monotone_in_z() {
        let drift = Drift::PowerMinusQuad { c: 1.0, lambda: 1.5 };
        let dom = interval(-1.0, 4.0);
        let mut prev = f64::INFINITY;
        for i in 0..40 {
            let z = -4.0 + 0.2 * i as f64;
            let l = sojourn_length(z, 0.7, &drift, &dom).unwrap();
            assert!(l <= prev + 1e-12);
            prev = l;
        }
    }

    #[test]
    fn prob_basic_properties() {
        let mk = |x: f64| Problem {
            alpha: 2.0,
            drift: Drift::PowerMinusQuad { c: 1.0, lambda: 2.0 },
            domain: interval(0.0, 3.0),
            x,
        };
        for &z in &[-3.0, -0.5, 0.0, 0.5, 3.0] {
            for &x in &[0.0, 0.5, 1.0, 2.9] {
                let p = prob_sojourn_exceeds(z, &mk(x)).unwrap();
                assert!((0.0..=1.0).contains(&p), "z={z} x={x} p={p}");
            }
        }
        // x = mes(E): strict exceedance impossible
        assert_eq!(prob_sojourn_exceeds(-5.0, &mk(3.0)).unwrap(), 0.0);
        // z < 0, x = 0: some sojourn is certain
        assert!((prob_sojourn_exceeds(-0.5, &mk(0.0)).unwrap() - 1.0).abs() < 1e-12);
        // monotone nonincreasing in x at fixed z
        let p1 = prob_sojourn_exceeds(0.3, &mk(0.5)).unwrap();
        let p2 = prob_sojourn_exceeds(0.3, &mk(1.5)).unwrap();
        assert!(p2 <= p1 + 1e-12);
    }

    #[test]
    fn prob_matches_brute_force() {
        // dense Gauss grid oracle for P{L(z, N) > x}
        let pr = Problem {
            alpha: 2.0,
            drift: Drift::PowerMinusQuad { c: 1.0, lambda: 2.0 },
            domain: interval(0.0, 3.0),
            x: 1.0,
        };
        let z = 0.5;
        let p = prob_sojourn_exceeds(z, &pr).unwrap();
        let kern = SojournKernel::new(&pr.drift, &pr.domain).unwrap();
        let n = 2_000_000usize;
        let (ulo, uhi) = (-12.0f64, 12.0f64);
        let du = (uhi - ulo) / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let u = ulo + (i as f64 + 0.5) * du;
            if kern.len(z, u) > pr.x {
                acc += gauss::phi(u) * du;
            }
        }
        assert!((p - acc).abs() < 1e-4, "p={p} brute={acc}");
    }

    #[test]
    fn prob_concave_matches_brute_force() {
        let pr = Problem {
            alpha: 2.0,
            drift: Drift::PowerMinusQuad { c: 1.5, lambda: 0.5 },
            domain: interval(-1.0, 2.0),
            x: 0.8,
        };
        for &z in &[-1.0, -0.2, 0.3] {
            let p = prob_sojourn_exceeds(z, &pr).unwrap();
            let kern = SojournKernel::new(&pr.drift, &pr.domain).unwrap();
            let n = 400_000usize;
            let (ulo, uhi) = (-12.0f64, 12.0f64);
            let du = (uhi - ulo) / n as f64;
            let mut acc = 0.0;
            for i in 0..n {
                let u = ulo + (i as f64 + 0.5) * du;
                if kern.len(z, u) > pr.x {
                    acc += gauss::phi(u) * du;
                }
            }
            assert!((p - acc).abs() < 1e-4, "z={z} p={p} brute={acc}");
        }
    }

    #[test]
    fn quadrature_halfline_zero_x() {
        let pr = Problem {
            alpha: 2.0,
            drift: Drift::PowerAlpha { c: 1.0 },
            domain: Domain::HalfLine,
            x: 0.0,
        };
        let v = pb_quadrature(&pr, &QuadConfig::default()).unwrap();
        assert!((v.value - 1.2071067811865475244).abs() < 1e-7, "{}", v.value);
    }

    #[test]
    fn quadrature_rejects_divergent_halfline() {
        let pr = Problem {
            alpha: 2.0,
            drift: Drift::PowerMinusQuad { c: 1.0, lambda: 2.0 },
            domain: Domain::HalfLine,
            x: 0.0,
        };
        assert!(pb_quadrature(&pr, &QuadConfig::default()).is_err());
    }

    #[test]
    fn quadrature_endpoint_is_zero() {
        let pr = Problem {
            alpha: 2.0,
            drift: Drift::PowerMinusQuad { c: 1.0, lambda: 2.0 },
            domain: interval(0.0, 2.0),
            x: 2.0,
        };
        let v = pb_quadrature(&pr, &QuadConfig::default()).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn event_decomposition_matches_quadrature() {
        let cfg = QuadConfig::default();
        let cases = [
            (1.0, 2.0, 0.0, 3.0, 1.0),
            (2.0, 2.0, -2.0, 1.0, 0.5),
            (1.0, 1.0, 0.5, 3.0, 1.5),
            (2.0, 1.0, -1.0, 1.0, 0.7),
            (1.5, 1.5, -0.5, 2.0, 1.0),
            (1.5, 0.5, 0.0, 2.0, 0.5),
            (1.0, 0.5, -1.0, 1.5, 0.8),
        ];
        for &(c, lambda, a, b, x) in &cases {
            let pr = Problem {
                alpha: 2.0,
                drift: Drift::PowerMinusQuad { c, lambda },
                domain: interval(a, b),
                x,
            };
            let q = pb_quadrature(&pr, &cfg).unwrap();
            let e = pb_event_decomposition(&pr, &cfg).unwrap();
            assert!(
                (q.value - e.value).abs() < 5e-6,
                "c={c} l={lambda} [{a},{b}] x={x}: quad={} event={}",
                q.value,
                e.value
            );
        }
    }

    #[test]
    fn reflection_symmetry() {
        let cfg = QuadConfig::default();
        let mk = |a: f64, b: f64| Problem {
            alpha: 2.0,
            drift: Drift::PowerMinusQuad { c: 1.0, lambda: 1.0 },
            domain: interval(a, b),
            x: 0.5,
        };
        let v1 = pb_quadrature(&mk(1.0, 3.0), &cfg).unwrap();
        let v2 = pb_quadrature(&mk(-3.0, -1.0), &cfg).unwrap();
        assert!((v1.value - v2.value).abs() < 1e-8);
        let e2 = pb_event_decomposition(&mk(-3.0, -1.0), &cfg).unwrap();
        assert!((v1.value - e2.value).abs() < 5e-7);
    }
}
