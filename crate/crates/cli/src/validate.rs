//! Cross-method consistency report.

use pbfun_core::closed::{
    bm1_constructive, bm1_printed, bm2_halfline_printed, pickands2_interval, prop21_lambda1,
    prop21_lambda2,
};
use pbfun_core::gauss;
use pbfun_core::mc::{mc_pb, MCConfig};
use pbfun_core::problem::{Domain, Drift, EvalError, Problem};
use pbfun_core::quad::QuadConfig;
use pbfun_core::sojourn::pb_quadrature;

use crate::output::{num, Row};

const DET_TOL: f64 = 1e-6;
const SQRT_2: f64 = core::f64::consts::SQRT_2;

pub struct Report {
    pub rows: Vec<Row>,
    pub n_fail: usize,
}

enum Status {
    Checked, // pass/fail against tol
    Info,    // reported, never fatal (printed-formula audits)
}

impl Report {
    fn push(
        &mut self,
        scenario: &str,
        params: &str,
        x: f64,
        (ma, va): (&str, f64),
        (mb, vb): (&str, f64),
        tol: f64,
        status: Status,
    ) {
        let gap = (va - vb).abs();
        let st = match status {
            Status::Info => "info",
            Status::Checked => {
                if gap <= tol {
                    "pass"
                } else {
                    self.n_fail += 1;
                    "fail"
                }
            }
        };
        self.rows.push(vec![
            ("scenario".into(), scenario.into()),
            ("params".into(), params.into()),
            ("x".into(), num(x)),
            ("method_a".into(), ma.into()),
            ("value_a".into(), num(va)),
            ("method_b".into(), mb.into()),
            ("value_b".into(), num(vb)),
            ("gap".into(), num(gap)),
            ("tol".into(), num(tol)),
            ("status".into(), st.into()),
        ]);
    }
}

/// MC estimate with a bias probe: tolerance is 3 stderr plus the dt -> dt/2
/// refinement gap, so discretization bias does not masquerade as disagreement.
fn mc_value(p: &Problem, mcfg: &MCConfig) -> Result<(f64, f64), EvalError> {
    let mut m = *mcfg;
    m.refine = true;
    if p.alpha == 1.0 {
        // discrete-grid maxima of Brownian paths carry O(sqrt dt) bias
        m.dt = m.dt.min(0.002);
    }
    let e = mc_pb(p, &m)?;
    Ok((e.value, 3.0 * e.std_err + e.refinement_gap.unwrap_or(0.0)))
}

/// Zero drift on [0, T]: closed form vs quadrature vs MC.
fn pickands(r: &mut Report, cfg: &QuadConfig, mcfg: &MCConfig) -> Result<(), EvalError> {
    for t in [1.0, 3.0] {
        let params = format!("E=[0:{t}]");
        for x in [0.0, t / 4.0, t / 2.0, 3.0 * t / 4.0] {
            let p = Problem { alpha: 2.0, drift: Drift::Zero, domain: Domain::Interval { a: 0.0, b: t }, x };
            let closed = pickands2_interval(x, t).value;
            let quad = pb_quadrature(&p, cfg)?.value;
            r.push("pickands", &params, x, ("closed", closed), ("quadrature", quad), DET_TOL, Status::Checked);
        }
    }
    for x in [0.0, 0.5] {
        let p = Problem { alpha: 2.0, drift: Drift::Zero, domain: Domain::Interval { a: 0.0, b: 1.0 }, x };
        let (v, tol) = mc_value(&p, mcfg)?;
        r.push("pickands", "E=[0:1]", x, ("closed", pickands2_interval(x, 1.0).value), ("mc", v), tol, Status::Checked);
    }
    Ok(())
}

/// alpha = 2 half-line with c t^2 drift: the printed display and the tail
/// conjecture are audited against quadrature; MC is checked.
fn bm2_halfline(r: &mut Report, cfg: &QuadConfig, mcfg: &MCConfig) -> Result<(), EvalError> {
    for c in [1.0, 2.0] {
        let params = format!("c={c}");
        for x in [0.0, 0.5, 1.0] {
            let p = Problem { alpha: 2.0, drift: Drift::PowerAlpha { c }, domain: Domain::HalfLine, x };
            let quad = pb_quadrature(&p, cfg)?.value;
            if x > 0.0 {
                let printed = bm2_halfline_printed(x, c).value;
                r.push("bm2_halfline", &params, x, ("printed", printed), ("quadrature", quad), DET_TOL, Status::Info);
                let conj = gauss::psi((1.0 + c) * x / SQRT_2);
                r.push("bm2_halfline", &params, x, ("conjecture", conj), ("quadrature", quad), DET_TOL, Status::Info);
            }
            let (v, tol) = mc_value(&p, mcfg)?;
            r.push("bm2_halfline", &params, x, ("quadrature", quad), ("mc", v), tol, Status::Checked);
        }
    }
    Ok(())
}

/// alpha = 1 half-line with c t drift: constructive vs printed vs MC.
fn bm1(r: &mut Report, cfg: &QuadConfig, mcfg: &MCConfig) -> Result<(), EvalError> {
    for c in [0.5, 1.0, 2.0] {
        let params = format!("c={c}");
        for x in [0.0, 1.0] {
            let cons = bm1_constructive(x, c, cfg).value;
            let printed = bm1_printed(x, c).value;
            // the printed display is exact at c = 1 and off by the factor c
            // elsewhere; only c = 1 is a hard check
            if c == 1.0 {
                r.push("bm1", &params, x, ("printed", printed), ("constructive", cons), 1e-8, Status::Checked);
            } else {
                r.push("bm1", &params, x, ("printed", printed), ("constructive", cons), DET_TOL, Status::Info);
            }
            if c == 1.0 {
                let p = Problem { alpha: 1.0, drift: Drift::PowerAlpha { c }, domain: Domain::HalfLine, x };
                let (v, tol) = mc_value(&p, mcfg)?;
                r.push("bm1", &params, x, ("constructive", cons), ("mc", v), tol, Status::Checked);
            }
        }
    }
    Ok(())
}

/// c|t|^lambda - t^2 drift on intervals: semi-closed vs quadrature.
fn plq(r: &mut Report, lambda: f64, cfg: &QuadConfig) -> Result<(), EvalError> {
    let name = if lambda == 2.0 { "plq_lambda2" } else { "plq_lambda1" };
    for (a, b) in [(0.0, 3.0), (-2.0, 1.0)] {
        for c in [1.0, 2.0] {
            let params = format!("E=[{a}:{b}];c={c}");
            for f in [0.25, 0.5, 0.75] {
                let x = f * (b - a);
                let semi = if lambda == 2.0 {
                    prop21_lambda2(x, a, b, c, cfg)
                } else {
                    prop21_lambda1(x, a, b, c, cfg)
                };
                let p = Problem {
                    alpha: 2.0,
                    drift: Drift::PowerMinusQuad { c, lambda },
                    domain: Domain::Interval { a, b },
                    x,
                };
                let quad = pb_quadrature(&p, cfg)?.value;
                r.push(name, &params, x, (semi.method.as_str(), semi.value), ("quadrature", quad), DET_TOL, Status::Checked);
            }
        }
    }
    Ok(())
}

pub const HEADER: &str = "scenario,params,x,method_a,value_a,method_b,value_b,gap,tol,status";

pub fn run(scenarios: &[u32], cfg: &QuadConfig, mcfg: &MCConfig) -> Result<Report, EvalError> {
    let mut r = Report { rows: Vec::new(), n_fail: 0 };
    for &s in scenarios {
        match s {
            1 => pickands(&mut r, cfg, mcfg)?,
            2 => bm2_halfline(&mut r, cfg, mcfg)?,
            3 => bm1(&mut r, cfg, mcfg)?,
            4 => plq(&mut r, 2.0, cfg)?,
            5 => plq(&mut r, 1.0, cfg)?,
            _ => unreachable!(),
        }
    }
    Ok(r)
}
