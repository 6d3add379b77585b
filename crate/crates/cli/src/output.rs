//! Deterministic CSV / JSON / SVG writers.

use std::fs;
use std::io::Write;
use std::path::Path;

use pbfun_core::problem::PBValue;

/// One output row; every subcommand reduces to named string fields.
pub type Row = Vec<(String, String)>;

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn flags_str(v: &PBValue) -> String {
    v.flags.iter().map(|f| f.as_str()).collect::<Vec<_>>().join(";")
}

/// Render rows as CSV with LF endings; `comment` lines are prefixed with '# '.
pub fn to_csv(header: &str, comments: &[&str], rows: &[Row]) -> String {
    let mut s = String::new();
    for c in comments {
        s.push_str("# ");
        s.push_str(c);
        s.push('\n');
    }
    s.push_str(header);
    s.push('\n');
    for r in rows {
        let line: Vec<&str> = r.iter().map(|(_, v)| v.as_str()).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

/// Render rows as a JSON array of flat objects, one object per line.
pub fn to_json(rows: &[Row]) -> String {
    let mut s = String::from("[\n");
    let objs: Vec<String> = rows
        .iter()
        .map(|r| {
            let mut m = serde_json::Map::new();
            for (k, v) in r {
                // numbers stay numbers when they parse; flags etc. stay strings
                let val = v
                    .parse::<f64>()
                    .ok()
                    .and_then(serde_json::Number::from_f64)
                    .map(serde_json::Value::Number)
                    .unwrap_or_else(|| serde_json::Value::String(v.clone()));
                m.insert(k.clone(), val);
            }
            serde_json::Value::Object(m).to_string()
        })
        .collect();
    s.push_str(&objs.join(",\n"));
    s.push_str("\n]\n");
    s
}

/// Write to `path`, or stdout when `path` is None.
pub fn emit(path: Option<&Path>, content: &str) -> std::io::Result<()> {
    match path {
        Some(p) => fs::write(p, content),
        None => std::io::stdout().write_all(content.as_bytes()),
    }
}

/// A named polyline for SVG rendering.
pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 8] =
    ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

/// Static 800x600 polyline plot with axis labels.
pub fn to_svg(title: &str, xlabel: &str, ylabel: &str, curves: &[Curve]) -> String {
    let (w, h) = (800.0, 600.0);
    let (ml, mr, mt, mb) = (70.0, 20.0, 40.0, 50.0);
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for c in curves {
        for &(x, y) in &c.points {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
    }
    if !(xmax > xmin) {
        xmax = xmin + 1.0;
    }
    if !(ymax > ymin) {
        ymax = ymin + 1.0;
    }
    let sx = |x: f64| ml + (x - xmin) / (xmax - xmin) * (w - ml - mr);
    let sy = |y: f64| h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    );
    s.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{title}</text>\n",
        w / 2.0
    ));
    // axes
    s.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n",
        h - mb,
        w - mr
    ));
    s.push_str(&format!("<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>\n", h - mb));
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\">{xlabel}</text>\n",
        (ml + w - mr) / 2.0,
        h - 12.0
    ));
    s.push_str(&format!(
        "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\" \
         transform=\"rotate(-90 18 {0})\">{ylabel}</text>\n",
        (mt + h - mb) / 2.0
    ));
    for (lo, hi, f, tick) in
        [(xmin, xmax, true, 5usize), (ymin, ymax, false, 5usize)]
    {
        for i in 0..=tick {
            let v = lo + (hi - lo) * i as f64 / tick as f64;
            if f {
                let x = sx(v);
                s.push_str(&format!(
                    "<text x=\"{x}\" y=\"{}\" text-anchor=\"middle\" font-size=\"11\">{v:.2}</text>\n",
                    h - mb + 18.0
                ));
            } else {
                let y = sy(v);
                s.push_str(&format!(
                    "<text x=\"{}\" y=\"{y}\" text-anchor=\"end\" font-size=\"11\">{v:.2}</text>\n",
                    ml - 6.0
                ));
            }
        }
    }
    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> =
            c.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        s.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            pts.join(" ")
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"{color}\">{}</text>\n",
            w - mr - 150.0,
            mt + 16.0 * (i + 1) as f64,
            c.label
        ));
    }
    s.push_str("</svg>\n");
    s
}
