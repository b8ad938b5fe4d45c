//! Convex polygons built by successive half-plane clipping.

use serde::{Deserialize, Serialize};

use crate::geometry::Point2;

/// Counter-clockwise convex polygon.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConvexPolygon {
    pub vertices: Vec<Point2>,
}

impl ConvexPolygon {
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self {
            vertices: vec![
                Point2::new(x0, y0),
                Point2::new(x1, y0),
                Point2::new(x1, y1),
                Point2::new(x0, y1),
            ],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 3
    }

    /// Keeps the part where `a x + b y >= c` (Sutherland-Hodgman against a
    /// single line).
    pub fn clip(&self, a: f64, b: f64, c: f64) -> ConvexPolygon {
        let n = self.vertices.len();
        let mut out = Vec::with_capacity(n + 1);
        if n == 0 {
            return ConvexPolygon { vertices: out };
        }
        let f = |p: &Point2| a * p.x + b * p.y - c;
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % n];
            let (fp, fq) = (f(&p), f(&q));
            if fp >= 0.0 {
                out.push(p);
            }
            if (fp >= 0.0) != (fq >= 0.0) {
                let t = fp / (fp - fq);
                out.push(Point2::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)));
            }
        }
        ConvexPolygon { vertices: out }
    }

    /// Drops consecutive vertices closer than `tol`.
    pub fn dedup(mut self, tol: f64) -> ConvexPolygon {
        let mut out: Vec<Point2> = Vec::with_capacity(self.vertices.len());
        for p in self.vertices.drain(..) {
            if out.last().is_none_or(|q| q.distance(p) > tol) {
                out.push(p);
            }
        }
        while out.len() > 1 && out[0].distance(*out.last().unwrap()) <= tol {
            out.pop();
        }
        ConvexPolygon { vertices: out }
    }

    /// Signed area (positive for counter-clockwise order).
    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let p = self.vertices[i];
                let q = self.vertices[(i + 1) % n];
                p.x * q.y - q.x * p.y
            })
            .sum::<f64>()
            * 0.5
    }

    fn vertex_mean(&self) -> Point2 {
        let n = self.vertices.len().max(1) as f64;
        let s = self.vertices.iter().fold(Point2::ORIGIN, |acc, p| acc + *p);
        Point2::new(s.x / n, s.y / n)
    }

    /// Area centroid, computed relative to the first vertex so that small
    /// polygons far from the origin keep their precision.
    pub fn centroid(&self) -> Point2 {
        let n = self.vertices.len();
        if n == 0 {
            return Point2::ORIGIN;
        }
        let o = self.vertices[0];
        let (mut a2, mut cx, mut cy) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let p = self.vertices[i] - o;
            let q = self.vertices[(i + 1) % n] - o;
            let cross = p.x * q.y - q.x * p.y;
            a2 += cross;
            cx += (p.x + q.x) * cross;
            cy += (p.y + q.y) * cross;
        }
        let c = Point2::new(cx / (3.0 * a2), cy / (3.0 * a2));
        if !(a2.abs() > 0.0) || !c.is_finite() || !self.contains(o + c) {
            return self.vertex_mean();
        }
        o + c
    }

    /// Signed distance from `p` to the nearest edge line; positive inside.
    pub fn depth(&self, p: Point2) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .filter_map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                let (ex, ey) = (b.x - a.x, b.y - a.y);
                let len = ex.hypot(ey);
                (len > 0.0).then(|| (ex * (p.y - a.y) - ey * (p.x - a.x)) / len)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, p: Point2) -> bool {
        !self.is_empty() && self.depth(p) >= 0.0
    }

    /// Distance from `p` to the polygon boundary.
    pub fn boundary_distance(&self, p: Point2) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| segment_distance(p, self.vertices[i], self.vertices[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Centre of the largest inscribed circle and its radius, found by
    /// bisection on the inward offset of every edge.
    pub fn deepest_point(&self) -> (Point2, f64) {
        if self.is_empty() {
            return (self.centroid(), 0.0);
        }
        let (xmin, xmax, ymin, ymax) = self.vertices.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), p| (a.min(p.x), b.max(p.x), c.min(p.y), d.max(p.y)),
        );
        let shrink = |r: f64| {
            let n = self.vertices.len();
            let mut poly = self.clone();
            for i in 0..n {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                let (ex, ey) = (b.x - a.x, b.y - a.y);
                let len = ex.hypot(ey);
                if len == 0.0 {
                    continue;
                }
                // inward normal of a counter-clockwise edge
                let (nx, ny) = (-ey / len, ex / len);
                poly = poly.clip(nx, ny, nx * a.x + ny * a.y + r);
            }
            poly
        };
        let (mut lo, mut hi) = (0.0, 0.5 * (xmax - xmin).min(ymax - ymin) + f64::EPSILON);
        let mut best = self.clone();
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let p = shrink(mid);
            if p.is_empty() {
                hi = mid;
            } else {
                lo = mid;
                best = p;
            }
        }
        // The last shrunken polygon is tiny; its vertex mean lies inside it.
        (best.vertex_mean(), lo)
    }
}

fn segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let (ex, ey) = (b.x - a.x, b.y - a.y);
    let len2 = ex * ex + ey * ey;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x - a.x) * ex + (p.y - a.y) * ey) / len2).clamp(0.0, 1.0);
    p.distance(Point2::new(a.x + t * ex, a.y + t * ey))
}
