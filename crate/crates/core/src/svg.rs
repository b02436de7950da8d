//! Static SVG output: cell bars, point scatters and convergence traces.
//! Output is a pure function of the input, with no timestamps.

use std::fmt::Write as _;

use crate::balanced::CellTree;
use crate::metric::Point;

const W: f64 = 800.0;
const PAD: f64 = 20.0;

fn header(height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{height}\" viewBox=\"0 0 {W} {height}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

/// One row of bars per level, down to `max_depth`.
pub fn render_cells(tree: &CellTree, max_depth: usize) -> String {
    let depth = max_depth.min(tree.depth()).max(1);
    let hull = tree.hull();
    let span = hull.width().max(f64::MIN_POSITIVE);
    let sx = |x: f64| PAD + (x - hull.lo) / span * (W - 2.0 * PAD);
    let row = 30.0;
    let mut out = header(2.0 * PAD + row * depth as f64);
    let colors = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"];
    for k in 1..=depth {
        let y = PAD + row * (k - 1) as f64;
        for c in tree.cells_at(k) {
            let x0 = sx(c.lo);
            let w = (sx(c.hi) - x0).max(0.5);
            let _ = writeln!(
                out,
                "<rect x=\"{x0:.3}\" y=\"{y:.1}\" width=\"{w:.3}\" height=\"{:.1}\" fill=\"{}\"/>",
                row * 0.6,
                colors[(k - 1) % colors.len()]
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Scatter of planar point groups, each drawn in its own colour.
pub fn render_scatter(groups: &[(&str, &[Point])]) -> String {
    let all = || groups.iter().flat_map(|(_, g)| g.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in all() {
        let y = p.coords().get(1).copied().unwrap_or(0.0);
        x0 = x0.min(p.x());
        x1 = x1.max(p.x());
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let h = 600.0;
    let (sx, sy) = ((x1 - x0).max(1e-12), (y1 - y0).max(1e-12));
    let mut out = header(h);
    for (color, pts) in groups {
        for p in pts.iter() {
            let y = p.coords().get(1).copied().unwrap_or(0.0);
            let _ = writeln!(
                out,
                "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"2\" fill=\"{color}\"/>",
                PAD + (p.x() - x0) / sx * (W - 2.0 * PAD),
                h - PAD - (y - y0) / sy * (h - 2.0 * PAD)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Log-scale polyline of a convergence trace; zero entries are clamped to
/// the smallest positive value.
pub fn render_trace(trace: &[f64]) -> String {
    let h = 400.0;
    let mut out = header(h);
    let floor = trace.iter().copied().filter(|&d| d > 0.0).fold(f64::INFINITY, f64::min);
    if trace.is_empty() || !floor.is_finite() {
        out.push_str("</svg>\n");
        return out;
    }
    let logs: Vec<f64> = trace.iter().map(|&d| d.max(floor).log10()).collect();
    let (lo, hi) = logs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = (hi - lo).max(1e-12);
    let dx = (W - 2.0 * PAD) / (trace.len().max(2) - 1) as f64;
    let pts: Vec<String> = logs
        .iter()
        .enumerate()
        .map(|(k, v)| format!("{:.3},{:.3}", PAD + dx * k as f64, h - PAD - (v - lo) / span * (h - 2.0 * PAD)))
        .collect();
    let _ = writeln!(
        out,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\"/>",
        pts.join(" ")
    );
    out.push_str("</svg>\n");
    out
}
