//! Plain SVG renderings of layouts, routes, tracking error and histograms.

use std::fmt::Write as _;

use nalgebra::Point2;

use crate::field::{PlotBox, ScanLocation};
use crate::registration::Histogram;
use crate::routing::WaypointPlan;

const SCALE: f64 = 20.0;
const MARGIN: f64 = 20.0;

/// Maps field meters to pixels with y pointing up.
struct Canvas {
    min: Point2<f64>,
    max: Point2<f64>,
    body: String,
}

impl Canvas {
    fn around(plots: &[PlotBox], extra: impl Iterator<Item = Point2<f64>>) -> Self {
        let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        let corners = plots
            .iter()
            .flat_map(|b| [Point2::new(b.min.x, b.min.y), Point2::new(b.max.x, b.max.y)]);
        for p in corners.chain(extra) {
            min = min.inf(&p);
            max = max.sup(&p);
        }
        if !min.x.is_finite() {
            min = Point2::origin();
            max = Point2::new(1.0, 1.0);
        }
        Canvas {
            min: min - nalgebra::Vector2::repeat(1.0),
            max: max + nalgebra::Vector2::repeat(1.0),
            body: String::new(),
        }
    }

    fn px(&self, p: &Point2<f64>) -> (f64, f64) {
        (
            MARGIN + (p.x - self.min.x) * SCALE,
            MARGIN + (self.max.y - p.y) * SCALE,
        )
    }

    fn plots(&mut self, plots: &[PlotBox], fill: &str) {
        for b in plots {
            let (x, y) = self.px(&Point2::new(b.min.x, b.max.y));
            let _ = writeln!(
                self.body,
                r##"<rect class="plot" x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{fill}" stroke="#335533" stroke-width="0.5"/>"##,
                (b.max.x - b.min.x) * SCALE,
                (b.max.y - b.min.y) * SCALE
            );
        }
    }

    fn square(&mut self, p: &Point2<f64>, size: f64, class: &str, fill: &str) {
        let (x, y) = self.px(p);
        let h = size / 2.0;
        let _ = writeln!(
            self.body,
            r#"<rect class="{class}" x="{:.2}" y="{:.2}" width="{size:.2}" height="{size:.2}" fill="{fill}"/>"#,
            x - h,
            y - h
        );
    }

    fn star(&mut self, p: &Point2<f64>, r: f64) {
        let (cx, cy) = self.px(p);
        let pts: Vec<String> = (0..10)
            .map(|i| {
                let rr = if i % 2 == 0 { r } else { r * 0.45 };
                let a = std::f64::consts::PI * (i as f64 / 5.0 - 0.5);
                format!("{:.2},{:.2}", cx + rr * a.cos(), cy + rr * a.sin())
            })
            .collect();
        let _ = writeln!(
            self.body,
            r##"<polygon class="goal" points="{}" fill="#d62728" stroke="black" stroke-width="0.5"/>"##,
            pts.join(" ")
        );
    }

    fn label(&mut self, p: &Point2<f64>, text: &str) {
        let (x, y) = self.px(p);
        let _ = writeln!(
            self.body,
            r#"<text x="{:.2}" y="{:.2}" font-size="9" font-family="sans-serif">{text}</text>"#,
            x + 5.0,
            y - 5.0
        );
    }

    fn line(&mut self, a: &Point2<f64>, b: &Point2<f64>, color: &str, width: f64, class: &str) {
        let (x1, y1) = self.px(a);
        let (x2, y2) = self.px(b);
        let _ = writeln!(
            self.body,
            r#"<line class="{class}" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{color}" stroke-width="{width}"/>"#
        );
    }

    fn finish(self, title: &str) -> String {
        let w = 2.0 * MARGIN + (self.max.x - self.min.x) * SCALE;
        let h = 2.0 * MARGIN + (self.max.y - self.min.y) * SCALE;
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n<title>{title}</title>\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body
        )
    }
}

/// Candidates as black squares, selected locations as larger red squares.
pub fn layout_svg(plots: &[PlotBox], candidates: &[ScanLocation], selected: &[usize]) -> String {
    let mut c = Canvas::around(plots, candidates.iter().map(|l| l.position));
    c.plots(plots, "#b7d7a8");
    for l in candidates {
        if selected.contains(&l.id) {
            c.square(&l.position, 10.0, "selected", "#d62728");
            c.label(&l.position, &l.id.to_string());
        } else {
            c.square(&l.position, 6.0, "candidate", "black");
        }
    }
    c.finish("Scan location layout")
}

/// Plots in green, the path as lines and scan goals as stars.
pub fn route_svg(plots: &[PlotBox], plan: &WaypointPlan) -> String {
    let mut c = Canvas::around(plots, plan.waypoints.iter().map(|w| w.position));
    c.plots(plots, "#2ca02c");
    for w in plan.waypoints.windows(2) {
        c.line(&w[0].position, &w[1].position, "#1f3b73", 2.0, "path");
    }
    for w in &plan.waypoints {
        match w.location_id {
            Some(0) => {
                c.square(&w.position, 10.0, "origin", "#1f3b73");
                c.label(&w.position, "Origin");
            }
            Some(id) => {
                c.star(&w.position, 8.0);
                c.label(&w.position, &id.to_string());
            }
            None => {}
        }
    }
    c.finish("Route")
}

/// Color band for a cross-track error in meters.
fn xte_color(xte: f64) -> &'static str {
    match xte.abs() {
        e if e < 0.025 => "#1a9850",
        e if e < 0.05 => "#91cf60",
        e if e < 0.10 => "#fc8d59",
        _ => "#d73027",
    }
}

/// Driven path colored by cross-track error band (<2.5, <5, <10, >=10 cm).
pub fn xte_svg(plots: &[PlotBox], path: &[Point2<f64>], xte: &[f64]) -> String {
    let mut c = Canvas::around(plots, path.iter().copied());
    c.plots(plots, "#e5efe0");
    for (w, e) in path.windows(2).zip(xte.iter().skip(1)) {
        c.line(&w[0], &w[1], xte_color(*e), 2.5, "xte");
    }
    c.finish("Cross-track error")
}

pub fn histogram_svg(hist: &Histogram, title: &str, x_label: &str) -> String {
    let (w, h) = (480.0, 300.0);
    let (left, bottom, top) = (50.0, 40.0, 30.0);
    let plot_w = w - left - 20.0;
    let plot_h = h - bottom - top;
    let max = hist.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let bw = plot_w / hist.counts.len().max(1) as f64;
    let mut body = String::new();
    for (i, &n) in hist.counts.iter().enumerate() {
        let bh = plot_h * n as f64 / max;
        let _ = writeln!(
            body,
            r##"<rect class="bin" x="{:.2}" y="{:.2}" width="{:.2}" height="{bh:.2}" fill="#4c72b0" stroke="white" stroke-width="0.5"/>"##,
            left + i as f64 * bw,
            top + plot_h - bh,
            bw
        );
    }
    let hi = hist.lo + hist.bin_width * hist.counts.len() as f64;
    let _ = writeln!(
        body,
        r#"<line x1="{left}" y1="{y:.2}" x2="{x2:.2}" y2="{y:.2}" stroke="black"/>
<text x="{left}" y="{ty:.2}" font-size="10" font-family="sans-serif">{:.2}</text>
<text x="{x2:.2}" y="{ty:.2}" font-size="10" font-family="sans-serif" text-anchor="end">{hi:.2}</text>
<text x="{cx:.2}" y="{ly:.2}" font-size="11" font-family="sans-serif" text-anchor="middle">{x_label}</text>
<text x="{cx:.2}" y="18" font-size="12" font-family="sans-serif" text-anchor="middle">{title}</text>
<text x="10" y="{my:.2}" font-size="10" font-family="sans-serif">{max:.0}</text>"#,
        hist.lo,
        y = top + plot_h,
        x2 = left + plot_w,
        ty = top + plot_h + 14.0,
        cx = left + plot_w / 2.0,
        ly = h - 8.0,
        my = top + 4.0,
    );
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{candidate_scan_locations, digitize_field, FieldLayout};

    #[test]
    fn element_counts() {
        let layout = FieldLayout::engr();
        let plots = digitize_field(&layout).unwrap();
        let cands = candidate_scan_locations(&layout, 0.8, 0.3).unwrap();
        let svg = layout_svg(&plots, &cands.locations, &[3, 40]);
        assert_eq!(svg.matches(r#"class="plot""#).count(), 60);
        assert_eq!(svg.matches(r#"class="candidate""#).count(), 75);
        assert_eq!(svg.matches(r#"class="selected""#).count(), 2);
    }

    #[test]
    fn histogram_bins() {
        let h = Histogram::build(&[0.1, 0.2, 0.9], 0.0, 1.0, 4);
        assert_eq!(
            histogram_svg(&h, "t", "x")
                .matches(r#"class="bin""#)
                .count(),
            4
        );
    }
}
