//! Problem specification and evaluation result types.

use alloc::vec::Vec;

/// Drift function h added to the |t|^alpha boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Drift {
    Zero,
    /// h(t) = c t^alpha on t >= 0 (half-line problems only).
    PowerAlpha { c: f64 },
    /// h(t) = c |t|^lambda - t^2.
    PowerMinusQuad { c: f64, lambda: f64 },
}

/// Evaluation set E.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    /// E = [0, inf).
    HalfLine,
    /// E = [a, b], a < b.
    Interval { a: f64, b: f64 },
}

impl Domain {
    /// Lebesgue measure of E.
    pub fn measure(&self) -> f64 {
        match *self {
            Domain::HalfLine => f64::INFINITY,
            Domain::Interval { a, b } => b - a,
        }
    }
}

/// Complete query: B_alpha^h(x, E).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Problem {
    pub alpha: f64,
    pub drift: Drift,
    pub domain: Domain,
    pub x: f64,
}

impl Problem {
    /// Structural validation shared by all evaluators.
    pub fn validate(&self) -> Result<(), EvalError> {
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(EvalError::UnsupportedAlpha);
        }
        if !(self.x >= 0.0) {
            return Err(EvalError::InvalidInput("x must be nonnegative"));
        }
        match self.domain {
            Domain::Interval { a, b } => {
                if !(a < b) {
                    return Err(EvalError::InvalidInput("interval needs a < b"));
                }
                if self.x > b - a {
                    return Err(EvalError::InvalidInput("x exceeds mes(E)"));
                }
            }
            Domain::HalfLine => {}
        }
        match self.drift {
            Drift::PowerAlpha { c } => {
                if !(c > 0.0) {
                    return Err(EvalError::InvalidInput("drift needs c > 0"));
                }
                if self.domain != Domain::HalfLine {
                    return Err(EvalError::UnsupportedDomain);
                }
            }
            Drift::PowerMinusQuad { c, lambda } => {
                if !(c > 0.0 && lambda > 0.0) {
                    return Err(EvalError::InvalidInput("drift needs c > 0 and lambda > 0"));
                }
            }
            Drift::Zero => {}
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Closed,
    SemiClosed,
    Quadrature,
    Mc,
    Bound,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Closed => "closed",
            Method::SemiClosed => "semi_closed",
            Method::Quadrature => "quadrature",
            Method::Mc => "mc",
            Method::Bound => "bound",
        }
    }
}

/// Discrepancy / provenance notes attached to a computed value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flag {
    /// Closed-form value at x = mes(E) is the left limit, not the
    /// definitional 0.
    EndpointLeftLimit,
    /// Literal transcription of a formula that fails independent audit.
    PrintedFormulaUnaudited,
    /// One or more components were estimated by Monte Carlo.
    McBased,
    /// Covariance factorization needed a diagonal jitter fallback.
    JitterFallback,
    /// A quadrature did not meet its tolerance; value is best effort.
    NotConverged,
}

impl Flag {
    pub fn as_str(&self) -> &'static str {
        match self {
            Flag::EndpointLeftLimit => "endpoint_left_limit",
            Flag::PrintedFormulaUnaudited => "printed_formula_unaudited",
            Flag::McBased => "mc_based",
            Flag::JitterFallback => "jitter_fallback",
            Flag::NotConverged => "not_converged",
        }
    }
}

/// Computed value with error estimate, method tag and discrepancy flags.
#[derive(Clone, Debug)]
pub struct PBValue {
    pub value: f64,
    pub err_est: f64,
    pub method: Method,
    pub flags: Vec<Flag>,
}

impl PBValue {
    pub fn new(value: f64, err_est: f64, method: Method) -> Self {
        PBValue { value, err_est, method, flags: Vec::new() }
    }

    pub fn with_flag(mut self, flag: Flag) -> Self {
        self.flags.push(flag);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalError {
    UnsupportedAlpha,
    UnsupportedDrift,
    UnsupportedDomain,
    /// u-scan found more crossings than the doubled grids can resolve.
    TooManyCrossings,
    /// MC grid cannot represent the requested sojourn threshold.
    GridTooCoarse,
    /// Right-tail integrand violated its decay contract.
    TailNotDecaying,
    InvalidInput(&'static str),
}

impl core::fmt::Display for EvalError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EvalError::UnsupportedAlpha => write!(f, "alpha not supported by this evaluator"),
            EvalError::UnsupportedDrift => write!(f, "drift not supported by this evaluator"),
            EvalError::UnsupportedDomain => write!(f, "domain not supported by this evaluator"),
            EvalError::TooManyCrossings => write!(f, "level-set scan under-resolved (too many crossings)"),
            EvalError::GridTooCoarse => write!(f, "grid too coarse for requested x"),
            EvalError::TailNotDecaying => write!(f, "tail integrand not decaying"),
            EvalError::InvalidInput(m) => write!(f, "{m}"),
        }
    }
}
