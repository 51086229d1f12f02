//! Minimal self-contained SVG output: line plots, heatmaps and Bloch-vector
//! projections. No external assets, one string per figure. Non-finite values
//! never reach an attribute: line points are dropped, heatmap cells fall back
//! to gray.

use std::fmt::Write as _;
use std::sync::OnceLock;

use arp_core::system::BlochVector;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 560.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 760.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 500.0;
/// Polylines are decimated to at most this many points.
const MAX_POINTS: usize = 2000;

const SERIES_COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

pub struct Series<'a> {
    pub label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

fn lut() -> &'static [[u8; 3]; 256] {
    static LUT: OnceLock<[[u8; 3]; 256]> = OnceLock::new();
    LUT.get_or_init(|| {
        let anchors: [[f64; 3]; 5] = [
            [68.0, 1.0, 84.0],
            [59.0, 82.0, 139.0],
            [33.0, 145.0, 140.0],
            [94.0, 201.0, 98.0],
            [253.0, 231.0, 37.0],
        ];
        let mut table = [[0u8; 3]; 256];
        for (i, entry) in table.iter_mut().enumerate() {
            let t = i as f64 / 255.0 * 4.0;
            let seg = (t.floor() as usize).min(3);
            let f = t - seg as f64;
            for c in 0..3 {
                let v = anchors[seg][c] * (1.0 - f) + anchors[seg + 1][c] * f;
                entry[c] = v.round() as u8;
            }
        }
        table
    })
}

fn color_for(v: f64) -> String {
    if !v.is_finite() {
        return "#cccccc".to_string();
    }
    let idx = (v.clamp(0.0, 1.0) * 255.0).round() as usize;
    let [r, g, b] = lut()[idx];
    format!("#{r:02x}{g:02x}{b:02x}")
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn from_ranges(x: (f64, f64), y: (f64, f64)) -> Self {
        let pad = |lo: f64, hi: f64| {
            if hi > lo {
                (lo, hi)
            } else {
                (lo - 0.5, lo + 0.5)
            }
        };
        let (x_min, x_max) = pad(x.0, x.1);
        let (y_min, y_max) = pad(y.0, y.1);
        Frame {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x_min) / (self.x_max - self.x_min) * (RIGHT - LEFT)
    }

    fn py(&self, y: f64) -> f64 {
        BOTTOM - (y - self.y_min) / (self.y_max - self.y_min) * (BOTTOM - TOP)
    }
}

fn open_svg(out: &mut String) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"monospace\" font-size=\"13\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    );
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(out: &mut String, frame: &Frame, title: &str, x_label: &str, y_label: &str) {
    let _ = write!(
        out,
        "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        RIGHT - LEFT,
        BOTTOM - TOP
    );
    let _ = write!(
        out,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\">{}</text>\n",
        (LEFT + RIGHT) / 2.0,
        escape(title)
    );
    let _ = write!(
        out,
        "<text x=\"{}\" y=\"545\" text-anchor=\"middle\">{}</text>\n",
        (LEFT + RIGHT) / 2.0,
        escape(x_label)
    );
    let _ = write!(
        out,
        "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>\n",
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0,
        escape(y_label)
    );
    for i in 0..=4 {
        let fx = frame.x_min + (frame.x_max - frame.x_min) * i as f64 / 4.0;
        let px = frame.px(fx);
        let _ = write!(
            out,
            "<line x1=\"{px:.2}\" y1=\"{BOTTOM}\" x2=\"{px:.2}\" y2=\"{}\" stroke=\"black\"/>\n\
             <text x=\"{px:.2}\" y=\"520\" text-anchor=\"middle\">{}</text>\n",
            BOTTOM + 5.0,
            format_tick(fx)
        );
        let fy = frame.y_min + (frame.y_max - frame.y_min) * i as f64 / 4.0;
        let py = frame.py(fy);
        let _ = write!(
            out,
            "<line x1=\"{}\" y1=\"{py:.2}\" x2=\"{LEFT}\" y2=\"{py:.2}\" stroke=\"black\"/>\n\
             <text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>\n",
            LEFT - 5.0,
            LEFT - 8.0,
            py + 4.0,
            format_tick(fy)
        );
    }
}

fn format_tick(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn finite_range<'a>(values: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if lo > hi {
        (0.0, 1.0)
    } else {
        (lo, hi)
    }
}

fn polyline(out: &mut String, frame: &Frame, x: &[f64], y: &[f64], color: &str) {
    let n = x.len().min(y.len());
    let stride = n.div_ceil(MAX_POINTS).max(1);
    let mut points = String::new();
    for i in (0..n).step_by(stride) {
        if x[i].is_finite() && y[i].is_finite() {
            let _ = write!(points, "{:.2},{:.2} ", frame.px(x[i]), frame.py(y[i]));
        }
    }
    if !points.is_empty() {
        let _ = write!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            points.trim_end()
        );
    }
}

/// One or more series over a shared frame, with optional dashed vertical
/// marker lines (predicted stripe positions and the like).
pub fn line_plot(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
    vlines: &[f64],
) -> String {
    let mut xr = (f64::INFINITY, f64::NEG_INFINITY);
    let mut yr = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        let (lo, hi) = finite_range(s.x.iter());
        xr = (xr.0.min(lo), xr.1.max(hi));
        let (lo, hi) = finite_range(s.y.iter());
        yr = (yr.0.min(lo), yr.1.max(hi));
    }
    if !xr.0.is_finite() {
        xr = (0.0, 1.0);
    }
    if !yr.0.is_finite() {
        yr = (0.0, 1.0);
    }
    let frame = Frame::from_ranges(xr, yr);
    let mut out = String::new();
    open_svg(&mut out);
    axes(&mut out, &frame, title, x_label, y_label);
    for &v in vlines {
        if v.is_finite() && v >= frame.x_min && v <= frame.x_max {
            let px = frame.px(v);
            let _ = write!(
                out,
                "<line x1=\"{px:.2}\" y1=\"{TOP}\" x2=\"{px:.2}\" y2=\"{BOTTOM}\" \
                 stroke=\"#888888\" stroke-dasharray=\"4 3\"/>\n"
            );
        }
    }
    for (i, s) in series.iter().enumerate() {
        let color = SERIES_COLORS[i % SERIES_COLORS.len()];
        polyline(&mut out, &frame, s.x, s.y, color);
        if !s.label.is_empty() {
            let _ = write!(
                out,
                "<text x=\"{}\" y=\"{}\" fill=\"{color}\">{}</text>\n",
                RIGHT - 180.0,
                TOP + 18.0 + 16.0 * i as f64,
                escape(s.label)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Cell boundaries for a sorted coordinate list: midpoints inside, half a
/// step beyond at the ends.
fn edges(coords: &[f64]) -> Vec<f64> {
    let n = coords.len();
    if n == 1 {
        let h = if coords[0] == 0.0 { 0.5 } else { coords[0].abs() * 0.05 };
        return vec![coords[0] - h, coords[0] + h];
    }
    let mut e = Vec::with_capacity(n + 1);
    e.push(coords[0] - (coords[1] - coords[0]) / 2.0);
    for i in 1..n {
        e.push((coords[i - 1] + coords[i]) / 2.0);
    }
    e.push(coords[n - 1] + (coords[n - 1] - coords[n - 2]) / 2.0);
    e
}

/// Row-major heatmap: `values[ix * y.len() + iy]`. `vlines` draws dashed
/// vertical markers, `rays` draws dashed lines y = slope * x through the
/// origin (the carrier-suppression boundary in frequency-amplitude maps).
pub fn heatmap(
    title: &str,
    x_label: &str,
    y_label: &str,
    x: &[f64],
    y: &[f64],
    values: &[f64],
    vlines: &[f64],
    rays: &[f64],
) -> String {
    assert_eq!(values.len(), x.len() * y.len());
    let xe = edges(x);
    let ye = edges(y);
    let frame = Frame::from_ranges((xe[0], xe[x.len()]), (ye[0], ye[y.len()]));
    let mut out = String::new();
    open_svg(&mut out);
    for (ix, _) in x.iter().enumerate() {
        for (iy, _) in y.iter().enumerate() {
            let v = values[ix * y.len() + iy];
            let x0 = frame.px(xe[ix]);
            let x1 = frame.px(xe[ix + 1]);
            let y1 = frame.py(ye[iy]);
            let y0 = frame.py(ye[iy + 1]);
            let _ = write!(
                out,
                "<rect x=\"{x0:.2}\" y=\"{y0:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>\n",
                x1 - x0,
                y1 - y0,
                color_for(v)
            );
        }
    }
    for &v in vlines {
        if v.is_finite() && v >= frame.x_min && v <= frame.x_max {
            let px = frame.px(v);
            let _ = write!(
                out,
                "<line x1=\"{px:.2}\" y1=\"{TOP}\" x2=\"{px:.2}\" y2=\"{BOTTOM}\" \
                 stroke=\"white\" stroke-dasharray=\"4 3\"/>\n"
            );
        }
    }
    for &slope in rays {
        if !slope.is_finite() {
            continue;
        }
        // clip y = slope * x to the frame
        let x_at = |y: f64| y / slope;
        let mut x0 = frame.x_min.max(if slope > 0.0 { x_at(frame.y_min) } else { x_at(frame.y_max) });
        let mut x1 = frame.x_max.min(if slope > 0.0 { x_at(frame.y_max) } else { x_at(frame.y_min) });
        if slope == 0.0 {
            x0 = frame.x_min;
            x1 = frame.x_max;
        }
        if x0 < x1 {
            let _ = write!(
                out,
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" \
                 stroke=\"white\" stroke-dasharray=\"6 4\" stroke-width=\"1.5\"/>\n",
                frame.px(x0),
                frame.py(slope * x0),
                frame.px(x1),
                frame.py(slope * x1)
            );
        }
    }
    axes(&mut out, &frame, title, x_label, y_label);
    // compact colorbar along the right edge
    for i in 0..128 {
        let y0 = BOTTOM - (BOTTOM - TOP) * (i + 1) as f64 / 128.0;
        let h = (BOTTOM - TOP) / 128.0;
        let _ = write!(
            out,
            "<rect x=\"{}\" y=\"{y0:.2}\" width=\"12\" height=\"{:.2}\" fill=\"{}\"/>\n",
            RIGHT + 8.0,
            h + 0.5,
            color_for(i as f64 / 127.0)
        );
    }
    let _ = write!(
        out,
        "<text x=\"{}\" y=\"{}\">1</text>\n<text x=\"{}\" y=\"{}\">0</text>\n",
        RIGHT + 24.0,
        TOP + 10.0,
        RIGHT + 24.0,
        BOTTOM
    );
    out.push_str("</svg>\n");
    out
}

/// Three square panels with the pairwise projections of the Bloch trajectory
/// (u-v, u-w, v-w), each with a unit-circle guide.
pub fn bloch_projections(title: &str, bloch: &[BlochVector]) -> String {
    const PANEL: f64 = 230.0;
    const GAP: f64 = 30.0;
    const Y0: f64 = 60.0;
    let mut out = String::new();
    let width = 3.0 * PANEL + 4.0 * GAP;
    let height = Y0 + PANEL + 60.0;
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"monospace\" font-size=\"13\">\n\
         <rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
    );
    let _ = write!(
        out,
        "<text x=\"{}\" y=\"28\" text-anchor=\"middle\">{}</text>\n",
        width / 2.0,
        escape(title)
    );
    let pairs: [(&str, Box<dyn Fn(&BlochVector) -> (f64, f64)>); 3] = [
        ("u-v", Box::new(|b: &BlochVector| (b.u, b.v))),
        ("u-w", Box::new(|b: &BlochVector| (b.u, b.w))),
        ("v-w", Box::new(|b: &BlochVector| (b.v, b.w))),
    ];
    for (i, (name, project)) in pairs.iter().enumerate() {
        let x0 = GAP + i as f64 * (PANEL + GAP);
        let cx = x0 + PANEL / 2.0;
        let cy = Y0 + PANEL / 2.0;
        let scale = PANEL / 2.0 / 1.1;
        let _ = write!(
            out,
            "<rect x=\"{x0}\" y=\"{Y0}\" width=\"{PANEL}\" height=\"{PANEL}\" \
             fill=\"none\" stroke=\"black\"/>\n\
             <circle cx=\"{cx}\" cy=\"{cy}\" r=\"{:.2}\" fill=\"none\" stroke=\"#bbbbbb\"/>\n\
             <text x=\"{cx}\" y=\"{:.2}\" text-anchor=\"middle\">{name}</text>\n",
            scale,
            Y0 + PANEL + 24.0
        );
        let stride = bloch.len().div_ceil(MAX_POINTS).max(1);
        let mut points = String::new();
        for b in bloch.iter().step_by(stride) {
            let (a, c) = project(b);
            if a.is_finite() && c.is_finite() {
                let _ = write!(points, "{:.2},{:.2} ", cx + a * scale, cy - c * scale);
            }
        }
        if !points.is_empty() {
            let _ = write!(
                out,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1\"/>\n",
                points.trim_end()
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Vertical composition of figures produced by this module into one SVG.
pub fn stack(panels: &[String]) -> String {
    fn dim(panel: &str, attr: &str) -> f64 {
        let key = format!("{attr}=\"");
        let at = panel.find(&key).expect("own figures carry width/height") + key.len();
        let rest = &panel[at..];
        rest[..rest.find('"').expect("attribute is quoted")]
            .parse()
            .expect("own figures carry numeric dimensions")
    }
    let width = panels.iter().map(|p| dim(p, "width")).fold(1.0, f64::max);
    let height: f64 = panels.iter().map(|p| dim(p, "height")).sum();
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n"
    );
    let mut y = 0.0;
    for panel in panels {
        out.push_str(&panel.replacen("<svg ", &format!("<svg y=\"{y}\" "), 1));
        y += dim(panel, "height");
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colormap_endpoints_match_the_anchor_table() {
        let table = lut();
        assert_eq!(table.len(), 256);
        assert_eq!(table[0], [68, 1, 84]);
        assert_eq!(table[255], [253, 231, 37]);
        assert_eq!(color_for(0.0), "#440154");
        assert_eq!(color_for(1.0), "#fde725");
        assert_eq!(color_for(f64::NAN), "#cccccc");
        assert_eq!(color_for(-3.0), color_for(0.0));
        assert_eq!(color_for(7.0), color_for(1.0));
    }

    #[test]
    fn line_plot_decimates_and_skips_non_finite() {
        let n = 10_000;
        let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let mut y: Vec<f64> = x.iter().map(|v| (v * 0.01).sin()).collect();
        y[5] = f64::NAN;
        let svg = line_plot("t", "x", "y", &[Series { label: "s", x: &x, y: &y }], &[1.0]);
        assert!(!svg.contains("NaN"));
        let points = svg
            .split("polyline points=\"")
            .nth(1)
            .unwrap()
            .split('"')
            .next()
            .unwrap();
        let count = points.split_whitespace().count();
        assert!(count <= MAX_POINTS, "{count}");
        assert!(count > MAX_POINTS / 2);
        assert!(svg.contains("stroke-dasharray"));
    }

    #[test]
    fn heatmap_renders_one_rect_per_cell() {
        let x = [1.0, 2.0, 3.0];
        let y = [0.0, 1.0];
        let values = [0.0, 0.2, 0.4, 0.6, 0.8, f64::NAN];
        let svg = heatmap("m", "x", "y", &x, &y, &values, &[2.0], &[0.3]);
        let cells = svg.matches("<rect").count();
        // background + frame + 6 cells + 128 colorbar strips
        assert_eq!(cells, 2 + 6 + 128);
        assert!(!svg.contains("NaN"));
        assert!(svg.contains("#cccccc"));
    }

    #[test]
    fn stacking_offsets_each_panel() {
        let a = heatmap("a", "x", "y", &[1.0, 2.0], &[1.0], &[0.1, 0.9], &[], &[]);
        let b = line_plot("b", "x", "y", &[], &[]);
        let stacked = stack(&[a, b]);
        assert!(stacked.starts_with("<svg xmlns"));
        assert!(stacked.contains("height=\"1120\""));
        assert!(stacked.contains("<svg y=\"0\" "));
        assert!(stacked.contains("<svg y=\"560\" "));
        assert_eq!(stacked.matches("</svg>").count(), 3);
    }

    #[test]
    fn bloch_panels_carry_unit_circles() {
        let bloch: Vec<BlochVector> = (0..5000)
            .map(|i| {
                let t = i as f64 * 0.01;
                BlochVector {
                    u: t.cos(),
                    v: t.sin(),
                    w: (t * 0.3).cos(),
                }
            })
            .collect();
        let svg = bloch_projections("b", &bloch);
        assert_eq!(svg.matches("<circle").count(), 3);
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(!svg.contains("NaN"));
    }
}
