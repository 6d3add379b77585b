//! Problem-string parsing and method dispatch.

use pbfun_core::closed;
use pbfun_core::mc::{self, Generator, MCConfig};
use pbfun_core::problem::{Domain, Drift, EvalError, PBValue, Problem};
use pbfun_core::quad::QuadConfig;
use pbfun_core::sojourn;

/// Requested evaluation route.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sel {
    Auto,
    Closed,
    Constructive,
    Printed,
    SemiClosed,
    Quadrature,
    Event,
    Mc,
}

impl Sel {
    pub fn parse(s: &str) -> Result<Sel, String> {
        match s {
            "auto" => Ok(Sel::Auto),
            "closed" => Ok(Sel::Closed),
            "constructive" => Ok(Sel::Constructive),
            "printed" => Ok(Sel::Printed),
            "semi_closed" => Ok(Sel::SemiClosed),
            "quadrature" => Ok(Sel::Quadrature),
            "event" => Ok(Sel::Event),
            "mc" => Ok(Sel::Mc),
            _ => Err(format!("unknown method '{s}'")),
        }
    }
}

/// "zero" | "power:c=<r>" | "plq:c=<r>,lambda=<r>"
pub fn parse_drift(s: &str) -> Result<Drift, String> {
    if s == "zero" {
        return Ok(Drift::Zero);
    }
    let bad = || format!("bad drift '{s}' (want zero | power:c=<r> | plq:c=<r>,lambda=<r>)");
    if let Some(rest) = s.strip_prefix("power:") {
        let c = rest.strip_prefix("c=").ok_or_else(bad)?;
        return Ok(Drift::PowerAlpha { c: c.parse().map_err(|_| bad())? });
    }
    if let Some(rest) = s.strip_prefix("plq:") {
        let (cs, ls) = rest.split_once(',').ok_or_else(bad)?;
        let c = cs.strip_prefix("c=").ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let lambda = ls.strip_prefix("lambda=").ok_or_else(bad)?.parse().map_err(|_| bad())?;
        return Ok(Drift::PowerMinusQuad { c, lambda });
    }
    Err(bad())
}

/// "half" | "<a>:<b>"
pub fn parse_domain(s: &str) -> Result<Domain, String> {
    if s == "half" {
        return Ok(Domain::HalfLine);
    }
    let bad = || format!("bad domain '{s}' (want half | <a>:<b>)");
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok(Domain::Interval {
        a: a.parse().map_err(|_| bad())?,
        b: b.parse().map_err(|_| bad())?,
    })
}

/// Evaluate one problem via the selected route.
pub fn evaluate(p: &Problem, sel: Sel, cfg: &QuadConfig, mcfg: &MCConfig) -> Result<PBValue, EvalError> {
    p.validate()?;
    match sel {
        Sel::Constructive => match (p.alpha, p.drift) {
            (a, Drift::PowerAlpha { c }) if a == 1.0 => Ok(closed::bm1_constructive(p.x, c, cfg)),
            _ => Err(EvalError::UnsupportedDrift),
        },
        Sel::Printed => match (p.alpha, p.drift) {
            (a, Drift::PowerAlpha { c }) if a == 1.0 => Ok(closed::bm1_printed(p.x, c)),
            (a, Drift::PowerAlpha { c }) if a == 2.0 => Ok(closed::bm2_halfline_printed(p.x, c)),
            _ => Err(EvalError::UnsupportedDrift),
        },
        Sel::Closed => closed_route(p, cfg).ok_or(EvalError::UnsupportedDrift)?,
        Sel::SemiClosed => match (p.alpha, p.drift, p.domain) {
            (a, Drift::PowerMinusQuad { c, lambda }, Domain::Interval { a: lo, b: hi }) if a == 2.0 => {
                if lambda == 2.0 {
                    Ok(closed::prop21_lambda2(p.x, lo, hi, c, cfg))
                } else if lambda == 1.0 {
                    Ok(closed::prop21_lambda1(p.x, lo, hi, c, cfg))
                } else {
                    Err(EvalError::UnsupportedDrift)
                }
            }
            _ => Err(EvalError::UnsupportedDrift),
        },
        Sel::Quadrature => sojourn::pb_quadrature(p, cfg),
        Sel::Event => sojourn::pb_event_decomposition(p, cfg),
        Sel::Mc => Ok(mc::mc_pb(p, mcfg)?.to_pbvalue()),
        Sel::Auto => {
            if let Some(r) = closed_route(p, cfg) {
                return r;
            }
            if p.alpha == 2.0 {
                return sojourn::pb_quadrature(p, cfg);
            }
            Ok(mc::mc_pb(p, mcfg)?.to_pbvalue())
        }
    }
}

/// Exact or semi-closed route when one exists.
fn closed_route(p: &Problem, cfg: &QuadConfig) -> Option<Result<PBValue, EvalError>> {
    match (p.alpha, p.drift, p.domain) {
        (a, Drift::PowerAlpha { c }, Domain::HalfLine) if a == 1.0 => {
            Some(Ok(closed::bm1_constructive(p.x, c, cfg)))
        }
        // zero drift is translation invariant: reduce to [0, b - a]
        (a, Drift::Zero, Domain::Interval { a: lo, b: hi }) if a == 2.0 => {
            Some(Ok(closed::pickands2_interval(p.x, hi - lo)))
        }
        (a, Drift::PowerMinusQuad { c, lambda }, Domain::Interval { a: lo, b: hi }) if a == 2.0 => {
            if lambda == 2.0 {
                Some(Ok(closed::prop21_lambda2(p.x, lo, hi, c, cfg)))
            } else if lambda == 1.0 {
                Some(Ok(closed::prop21_lambda1(p.x, lo, hi, c, cfg)))
            } else {
                None
            }
        }
        _ => None,
    }
}

pub fn parse_generator(s: &str) -> Result<Generator, String> {
    match s {
        "exact_line" => Ok(Generator::ExactLine),
        "exact_bm" => Ok(Generator::ExactBm),
        "cholesky" => Ok(Generator::Cholesky),
        "circulant" => Ok(Generator::Circulant),
        _ => Err(format!("unknown generator '{s}'")),
    }
}

/// Map evaluation failures onto the exit-code contract: 2 for specification
/// problems, 3 for numerical failures.
pub fn exit_code_for(e: &EvalError) -> u8 {
    match e {
        EvalError::TooManyCrossings | EvalError::GridTooCoarse | EvalError::TailNotDecaying => 3,
        _ => 2,
    }
}

/// x-grid of n points on [0, upper), right endpoint excluded.
pub fn x_grid(upper: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| upper * i as f64 / n as f64).collect()
}
