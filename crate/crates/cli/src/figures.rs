//! Reproduction of the four survey figures as CSV (+ optional SVG).

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;

use pbfun_core::bounds::upper_bound_convex;
use pbfun_core::closed::{bm1_constructive, prop21_lambda1, prop21_lambda2};
use pbfun_core::problem::{Domain, Drift, Problem};
use pbfun_core::quad::QuadConfig;

use crate::output::{self, Curve, Row};
use crate::run::x_grid;

const N_GRID: usize = 101;

pub struct Figure {
    pub name: &'static str,
    pub rows: Vec<Row>,
}

fn row(curve: &str, x: f64, value: f64, method: &str) -> Row {
    vec![
        ("curve_id".into(), curve.to_string()),
        ("x".into(), output::num(x)),
        ("value".into(), output::num(value)),
        ("method".into(), method.to_string()),
    ]
}

/// Half-line c t drift for Brownian motion: one curve per c.
fn fig1(cfg: &QuadConfig) -> Figure {
    let cs = [0.2, 0.4, 0.6, 0.8, 1.2, 1.5, 2.0, 3.0];
    let jobs: Vec<(String, f64, f64)> = cs
        .iter()
        .flat_map(|&c| x_grid(5.0, N_GRID).into_iter().map(move |x| (format!("c={c}"), c, x)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|(id, c, x)| {
            let v = bm1_constructive(*x, *c, cfg);
            row(id, *x, v.value, v.method.as_str())
        })
        .collect();
    Figure { name: "fig1", rows }
}

const INTERVALS_23: [(f64, f64); 5] = [(0.0, 3.0), (-2.0, 1.0), (1.0, 3.0), (-1.0, 1.0), (0.0, 4.0)];
const CS_23: [f64; 3] = [1.0, 2.0, 4.0];

/// c|t|^lambda - t^2 drift over a family of intervals.
fn fig23(lambda: f64, name: &'static str, cfg: &QuadConfig) -> Figure {
    let mut jobs: Vec<(String, f64, f64, f64, f64)> = Vec::new();
    for &(a, b) in &INTERVALS_23 {
        for &c in &CS_23 {
            for x in x_grid(b - a, N_GRID) {
                jobs.push((format!("E=[{a}:{b}];c={c}"), a, b, c, x));
            }
        }
    }
    let rows = jobs
        .par_iter()
        .map(|(id, a, b, c, x)| {
            let v = if lambda == 2.0 {
                prop21_lambda2(*x, *a, *b, *c, cfg)
            } else {
                prop21_lambda1(*x, *a, *b, *c, cfg)
            };
            row(id, *x, v.value, v.method.as_str())
        })
        .collect();
    Figure { name, rows }
}

/// Convex upper bound against the true value, lambda = 2.
fn fig4(cfg: &QuadConfig) -> Figure {
    let intervals = [(1.0, 5.0), (-1.0, 2.0), (1.0, 4.0), (-1.0, 1.0)];
    let mut jobs: Vec<(String, f64, f64, f64, f64, bool)> = Vec::new();
    for &(a, b) in &intervals {
        for c in [1.0, 2.0] {
            for x in x_grid(b - a, N_GRID) {
                jobs.push((format!("E=[{a}:{b}];c={c};true"), a, b, c, x, false));
                jobs.push((format!("E=[{a}:{b}];c={c};bound"), a, b, c, x, true));
            }
        }
    }
    let rows = jobs
        .par_iter()
        .map(|(id, a, b, c, x, bound)| {
            if *bound {
                let p = Problem {
                    alpha: 2.0,
                    drift: Drift::PowerMinusQuad { c: *c, lambda: 2.0 },
                    domain: Domain::Interval { a: *a, b: *b },
                    x: *x,
                };
                let v = upper_bound_convex(&p).expect("convex bound");
                row(id, *x, v.value, v.method.as_str())
            } else {
                let v = prop21_lambda2(*x, *a, *b, *c, cfg);
                row(id, *x, v.value, v.method.as_str())
            }
        })
        .collect();
    Figure { name: "fig4", rows }
}

pub fn build(which: &[u32], cfg: &QuadConfig) -> Vec<Figure> {
    let mut out = Vec::new();
    for &k in which {
        out.push(match k {
            1 => fig1(cfg),
            2 => fig23(2.0, "fig2", cfg),
            3 => fig23(1.0, "fig3", cfg),
            4 => fig4(cfg),
            _ => unreachable!(),
        });
    }
    out
}

pub fn write(figs: &[Figure], dir: &Path, svg: bool) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for f in figs {
        let csv = output::to_csv(
            "curve_id,x,value,method",
            &["x grid: 101 points on [0, mes E); the right endpoint x = mes E is excluded"],
            &f.rows,
        );
        std::fs::write(dir.join(format!("{}.csv", f.name)), csv)?;
        if svg {
            let mut curves: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
            for r in &f.rows {
                let id = r[0].1.clone();
                let x: f64 = r[1].1.parse().unwrap();
                let v: f64 = r[2].1.parse().unwrap();
                curves.entry(id).or_default().push((x, v));
            }
            let cs: Vec<Curve> = curves
                .into_iter()
                .map(|(label, mut points)| {
                    points.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
                    Curve { label, points }
                })
                .collect();
            let svg_text = output::to_svg(f.name, "x", "B(x, E)", &cs);
            std::fs::write(dir.join(format!("{}.svg", f.name)), svg_text)?;
        }
    }
    Ok(())
}
