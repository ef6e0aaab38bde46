use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::survival::StepCurve;

/// A curve with the identifier written to the `curve_id` column.
#[derive(Debug, Clone, Copy)]
pub struct NamedCurve<'a> {
    pub id: &'a str,
    pub curve: &'a StepCurve,
}

impl<'a> NamedCurve<'a> {
    pub fn new(id: &'a str, curve: &'a StepCurve) -> Self {
        NamedCurve { id, curve }
    }
}

/// One row of the step-coordinate CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotPoint {
    pub t: f64,
    pub value: f64,
    pub se: Option<f64>,
    pub n_risk: Option<usize>,
}

/// Coordinates tracing a right-continuous step curve: the origin, then a
/// pre-jump and a post-jump row per knot, and a closing row at the end of
/// support when it lies beyond the last knot.
pub fn step_points(curve: &StepCurve) -> Vec<PlotPoint> {
    let se_before = curve.se.as_ref().map(|_| 0.0);
    let mut out = Vec::with_capacity(2 * curve.len() + 2);
    out.push(PlotPoint {
        t: 0.0,
        value: curve.value_before_first_knot,
        se: se_before,
        n_risk: curve.n_risk_at(0.0),
    });
    let mut prev_value = curve.value_before_first_knot;
    let mut prev_se = se_before;
    for (i, (&t, &v)) in curve.knots.iter().zip(&curve.values).enumerate() {
        let n_risk = curve.n_risk_at(t);
        let se = curve.se.as_ref().map(|s| s[i]);
        out.push(PlotPoint {
            t,
            value: prev_value,
            se: prev_se,
            n_risk,
        });
        out.push(PlotPoint {
            t,
            value: v,
            se,
            n_risk,
        });
        prev_value = v;
        prev_se = se;
    }
    let last = curve.knots.last().copied().unwrap_or(0.0);
    if curve.support_end > last {
        out.push(PlotPoint {
            t: curve.support_end,
            value: prev_value,
            se: prev_se,
            n_risk: curve.n_risk_at(curve.support_end),
        });
    }
    out
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

/// Writes `curve_id,t,value,se,n_risk`; unavailable `se`/`n_risk` are empty.
pub fn emit_plotdata<W: Write>(curves: &[NamedCurve<'_>], sink: W) -> Result<()> {
    if curves.is_empty() {
        return Err(Error::InvalidInput(
            "plot data needs at least one curve".into(),
        ));
    }
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["curve_id", "t", "value", "se", "n_risk"])?;
    for c in curves {
        for p in step_points(c.curve) {
            w.write_record([
                c.id.to_string(),
                p.t.to_string(),
                p.value.to_string(),
                opt(p.se),
                opt(p.n_risk),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Risk-set sizes of a fitted curve on a time grid.
pub fn at_risk_row(curve: &StepCurve, grid: &[f64]) -> Option<Vec<usize>> {
    grid.iter().map(|&t| curve.n_risk_at(t)).collect()
}

/// Evenly spaced tick grid from 0 covering `end`.
pub fn tick_grid(end: f64, ticks: usize) -> Vec<f64> {
    if !(end > 0.0) || ticks < 2 {
        return vec![0.0];
    }
    let raw = end / (ticks - 1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    (0..)
        .map(|i| i as f64 * step)
        .take_while(|t| *t <= end + 1e-9 * step)
        .collect()
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#7f7f7f",
];
const WIDTH: f64 = 640.0;
const PLOT_LEFT: f64 = 60.0;
const PLOT_RIGHT: f64 = 620.0;
const PLOT_TOP: f64 = 20.0;
const PLOT_BOTTOM: f64 = 320.0;
const ROW_HEIGHT: f64 = 18.0;

/// Minimal SVG: axes, one step path per curve, censor ticks and an at-risk
/// row per curve that carries risk-set information.
pub fn render_svg(curves: &[NamedCurve<'_>]) -> Result<String> {
    if curves.is_empty() {
        return Err(Error::InvalidInput("plot needs at least one curve".into()));
    }
    let x_end = curves
        .iter()
        .map(|c| {
            c.curve
                .support_end
                .max(c.curve.knots.last().copied().unwrap_or(0.0))
        })
        .fold(0.0, f64::max)
        .max(1e-9);
    let y_end = curves
        .iter()
        .flat_map(|c| {
            c.curve
                .values
                .iter()
                .copied()
                .chain([c.curve.value_before_first_knot])
        })
        .fold(1.0, f64::max);
    let grid = tick_grid(x_end, 6);
    let x = |t: f64| PLOT_LEFT + (PLOT_RIGHT - PLOT_LEFT) * t / x_end;
    let y = |v: f64| PLOT_BOTTOM - (PLOT_BOTTOM - PLOT_TOP) * v / y_end;
    let risk_rows: Vec<(&str, Vec<usize>)> = curves
        .iter()
        .filter_map(|c| at_risk_row(c.curve, &grid).map(|r| (c.id, r)))
        .collect();
    let height = PLOT_BOTTOM + 40.0 + ROW_HEIGHT * (risk_rows.len() as f64 + 1.0);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        s,
        r#"<path d="M{PLOT_LEFT},{PLOT_TOP} V{PLOT_BOTTOM} H{PLOT_RIGHT}" fill="none" stroke="black"/>"#
    );
    for &t in &grid {
        let _ = writeln!(
            s,
            r#"<line x1="{0:.2}" y1="{PLOT_BOTTOM}" x2="{0:.2}" y2="{1}" stroke="black"/><text x="{0:.2}" y="{2}" text-anchor="middle">{3}</text>"#,
            x(t),
            PLOT_BOTTOM + 4.0,
            PLOT_BOTTOM + 16.0,
            t
        );
    }
    for i in 0..=4 {
        let v = y_end * f64::from(i) / 4.0;
        let _ = writeln!(
            s,
            r#"<line x1="{0}" y1="{1:.2}" x2="{PLOT_LEFT}" y2="{1:.2}" stroke="black"/><text x="{2}" y="{3:.2}" text-anchor="end">{4}</text>"#,
            PLOT_LEFT - 4.0,
            y(v),
            PLOT_LEFT - 6.0,
            y(v) + 4.0,
            v
        );
    }
    for (k, c) in curves.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let mut d = String::new();
        for (i, p) in step_points(c.curve).iter().enumerate() {
            let _ = write!(
                d,
                "{}{:.2},{:.2} ",
                if i == 0 { 'M' } else { 'L' },
                x(p.t),
                y(p.value)
            );
        }
        let _ = writeln!(
            s,
            r#"<path id="{}" d="{}" fill="none" stroke="{colour}"/>"#,
            c.id,
            d.trim_end()
        );
        for &t in &c.curve.censor_times {
            let (cx, cy) = (x(t), y(c.curve.value_at(t)));
            let _ = writeln!(
                s,
                r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="{colour}"/>"#,
                cy - 4.0,
                cy + 4.0
            );
        }
    }
    let label_y = PLOT_BOTTOM + 40.0;
    let _ = writeln!(s, r#"<text x="4" y="{label_y}">At risk</text>"#);
    for (r, (id, counts)) in risk_rows.iter().enumerate() {
        let ry = label_y + ROW_HEIGHT * (r as f64 + 1.0);
        let _ = writeln!(s, r#"<text x="4" y="{ry}">{id}</text>"#);
        for (&t, n) in grid.iter().zip(counts) {
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{ry}" text-anchor="middle">{n}</text>"#,
                x(t)
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}
