//! Minimal SVG line plots.

use std::fmt::Write;

use trochoid_core::geometry::Point2;

/// Agent 1, 2, 3.
pub const AGENT_COLORS: [&str; 3] = ["#1f4fd8", "#d62728", "#2ca02c"];

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const PAD: f64 = 56.0;

/// One set of axes. Data limits get a 5% margin on each side.
pub struct Figure {
    title: String,
    x_label: String,
    y_label: String,
    x: (f64, f64),
    y: (f64, f64),
    body: String,
}

fn widen((lo, hi): (f64, f64)) -> (f64, f64) {
    let (lo, hi) = if lo.is_finite() && hi.is_finite() { (lo, hi) } else { (0.0, 1.0) };
    let span = hi - lo;
    let span = if span > 0.0 { span } else { lo.abs().max(1.0) };
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * span * 1.1;
    (mid - half, mid + half)
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    mag * if f < 1.5 {
        1.0
    } else if f < 3.5 {
        2.0
    } else if f < 7.5 {
        5.0
    } else {
        10.0
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Figure {
    /// Axes covering the given points.
    pub fn new<'a>(title: &str, x_label: &str, y_label: &str, points: impl IntoIterator<Item = &'a Point2>) -> Self {
        let (mut x, mut y) = ((f64::INFINITY, f64::NEG_INFINITY), (f64::INFINITY, f64::NEG_INFINITY));
        for p in points {
            if p.is_finite() {
                x = (x.0.min(p.x), x.1.max(p.x));
                y = (y.0.min(p.y), y.1.max(p.y));
            }
        }
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            x: widen(x),
            y: widen(y),
            body: String::new(),
        }
    }

    /// Uses one scale on both axes.
    pub fn equal_aspect(mut self) -> Self {
        let sx = (self.x.1 - self.x.0) / (WIDTH - 2.0 * PAD);
        let sy = (self.y.1 - self.y.0) / (HEIGHT - 2.0 * PAD);
        let s = sx.max(sy);
        let grow = |(lo, hi): (f64, f64), px: f64| {
            let mid = 0.5 * (lo + hi);
            (mid - 0.5 * s * px, mid + 0.5 * s * px)
        };
        self.x = grow(self.x, WIDTH - 2.0 * PAD);
        self.y = grow(self.y, HEIGHT - 2.0 * PAD);
        self
    }

    fn px(&self, p: Point2) -> (f64, f64) {
        let u = PAD + (p.x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * PAD);
        let v = HEIGHT - PAD - (p.y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * PAD);
        (u, v)
    }

    fn coords(&self, pts: &[Point2]) -> String {
        pts.iter()
            .filter(|p| p.is_finite())
            .map(|p| {
                let (u, v) = self.px(*p);
                format!("{u:.2},{v:.2}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn polyline(&mut self, pts: &[Point2], color: &str, dashed: bool) {
        let dash = if dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            self.coords(pts)
        );
    }

    pub fn polygon(&mut self, pts: &[Point2], fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<polygon points="{}" fill="{fill}" fill-opacity="0.35" stroke="{fill}" stroke-width="1"/>"#,
            self.coords(pts)
        );
    }

    pub fn marker(&mut self, p: Point2, color: &str, hollow: bool) {
        let (u, v) = self.px(p);
        let fill = if hollow { "white" } else { color };
        let _ = writeln!(
            self.body,
            r#"<circle cx="{u:.2}" cy="{v:.2}" r="4" fill="{fill}" stroke="{color}" stroke-width="1.5"/>"#
        );
    }

    pub fn cross(&mut self, p: Point2, color: &str) {
        let (u, v) = self.px(p);
        let _ = writeln!(
            self.body,
            r#"<path d="M{:.2},{:.2}L{:.2},{:.2}M{:.2},{:.2}L{:.2},{:.2}" stroke="{color}" stroke-width="1.5"/>"#,
            u - 5.0,
            v - 5.0,
            u + 5.0,
            v + 5.0,
            u - 5.0,
            v + 5.0,
            u + 5.0,
            v - 5.0
        );
    }

    pub fn note(&mut self, text: &str) {
        let _ = writeln!(
            self.body,
            r##"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="16" fill="#555">{}</text>"##,
            WIDTH / 2.0,
            HEIGHT / 2.0,
            esc(text)
        );
    }

    /// Clipped data limits, for drawing rays to the edge.
    pub fn limits(&self) -> ((f64, f64), (f64, f64)) {
        (self.x, self.y)
    }

    fn axes(&self) -> String {
        let mut s = String::new();
        let (x0, y0) = (PAD, HEIGHT - PAD);
        let _ = writeln!(
            s,
            r##"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="#333"/>"##,
            WIDTH - 2.0 * PAD,
            HEIGHT - 2.0 * PAD
        );
        let ticks = |(lo, hi): (f64, f64)| {
            let step = nice_step(hi - lo);
            let first = (lo / step).ceil() as i64;
            let last = (hi / step).floor() as i64;
            (first..=last).map(move |i| i as f64 * step).collect::<Vec<_>>()
        };
        for t in ticks(self.x) {
            let (u, _) = self.px(Point2::new(t, self.y.0));
            let _ = writeln!(
                s,
                r##"<line x1="{u:.2}" y1="{y0}" x2="{u:.2}" y2="{}" stroke="#333"/><text x="{u:.2}" y="{}" text-anchor="middle" font-size="11">{}</text>"##,
                y0 + 5.0,
                y0 + 18.0,
                fmt_tick(t)
            );
        }
        for t in ticks(self.y) {
            let (_, v) = self.px(Point2::new(self.x.0, t));
            let _ = writeln!(
                s,
                r##"<line x1="{}" y1="{v:.2}" x2="{x0}" y2="{v:.2}" stroke="#333"/><text x="{}" y="{:.2}" text-anchor="end" font-size="11">{}</text>"##,
                x0 - 5.0,
                x0 - 8.0,
                v + 4.0,
                fmt_tick(t)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="13">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 12.0,
            esc(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="14" y="{:.1}" text-anchor="middle" font-size="13" transform="rotate(-90 14 {:.1})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            esc(&self.y_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            esc(&self.title)
        );
        s
    }

    fn group(&self, dy: f64) -> String {
        let clip = format!("clip{}", dy as i64);
        format!(
            "<g transform=\"translate(0 {dy})\">\n<clipPath id=\"{clip}\"><rect x=\"{PAD}\" y=\"{PAD}\" width=\"{}\" height=\"{}\"/></clipPath>\n<g clip-path=\"url(#{clip})\">\n{}</g>\n{}</g>\n",
            WIDTH - 2.0 * PAD,
            HEIGHT - 2.0 * PAD,
            self.body,
            self.axes()
        )
    }
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

/// Stacks figures vertically into one document.
pub fn render(figures: &[Figure]) -> String {
    let h = HEIGHT * figures.len().max(1) as f64;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{h}\" viewBox=\"0 0 {WIDTH} {h}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    for (i, f) in figures.iter().enumerate() {
        s.push_str(&f.group(i as f64 * HEIGHT));
    }
    s.push_str("</svg>\n");
    s
}
