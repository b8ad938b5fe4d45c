//! Feasible `(R_c, d_c)` designs.
//!
//! Every distance bound is linear in `(R_c, d_c)` once the absolute values
//! are split, so the feasible set is a union of convex polygons. Each
//! `|.| >= m` constraint contributes a two-way disjunction and the pieces are
//! obtained by enumerating the branches with incremental clipping.

use serde::{Deserialize, Serialize};

use crate::design::{Alpha, DesignSpec, TrochoidType};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::injection::InjectionOffset;
use crate::polygon::ConvexPolygon;

/// Which distance requirement a half-plane encodes. Agent indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintTag {
    OriginMin { agent: usize },
    OriginMax { agent: usize },
    PairMin { i: usize, j: usize },
    PairMax { i: usize, j: usize },
    NonNegativeRc,
    NonNegativeDc,
    CuspBand { agent: usize },
    Injection { path: usize, other: usize, offset: InjectionOffset },
}

/// `a R_c + b d_c >= c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlane {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub tag: ConstraintTag,
}

impl HalfPlane {
    pub fn new(a: f64, b: f64, c: f64, tag: ConstraintTag) -> Self {
        Self { a, b, c, tag }
    }

    pub fn slack(&self, r_c: f64, d_c: f64) -> f64 {
        self.a * r_c + self.b * d_c - self.c
    }

    pub fn holds(&self, r_c: f64, d_c: f64) -> bool {
        self.slack(r_c, d_c) >= 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    Single(HalfPlane),
    /// Satisfied when either half-plane holds.
    Either([HalfPlane; 2]),
}

impl Constraint {
    pub fn tag(&self) -> ConstraintTag {
        match self {
            Constraint::Single(h) => h.tag,
            Constraint::Either(h) => h[0].tag,
        }
    }

    pub fn holds(&self, r_c: f64, d_c: f64) -> bool {
        match self {
            Constraint::Single(h) => h.holds(r_c, d_c),
            Constraint::Either([p, q]) => p.holds(r_c, d_c) || q.holds(r_c, d_c),
        }
    }

    fn map(self, f: impl Fn(HalfPlane) -> HalfPlane) -> Constraint {
        match self {
            Constraint::Single(h) => Constraint::Single(f(h)),
            Constraint::Either([p, q]) => Constraint::Either([f(p), f(q)]),
        }
    }

    /// `|a R - b d| >= m` split into its two linear branches.
    pub fn abs_difference_at_least(a: f64, b: f64, m: f64, tag: ConstraintTag) -> Constraint {
        Constraint::Either([HalfPlane::new(a, -b, m, tag), HalfPlane::new(-a, b, m, tag)])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub constraints: Vec<Constraint>,
}

impl ConstraintSet {
    pub fn extended(&self, extra: impl IntoIterator<Item = Constraint>) -> ConstraintSet {
        let mut constraints = self.constraints.clone();
        constraints.extend(extra);
        ConstraintSet { constraints }
    }

    /// Box `[0, R_max] x [0, d_max]` implied by the single half-planes of the
    /// form `-a R - b d >= -M` with `a, b >= 0`.
    pub fn bounds(&self) -> Result<(f64, f64)> {
        let mut r_max = f64::INFINITY;
        let mut d_max = f64::INFINITY;
        for c in &self.constraints {
            if let Constraint::Single(h) = c {
                if h.a <= 0.0 && h.b <= 0.0 && h.c <= 0.0 {
                    if h.a < 0.0 {
                        r_max = r_max.min(h.c / h.a);
                    }
                    if h.b < 0.0 {
                        d_max = d_max.min(h.c / h.b);
                    }
                }
            }
        }
        if !(r_max.is_finite() && d_max.is_finite()) {
            return Err(Error::InvalidSpec("the constraint set does not bound R_c and d_c".into()));
        }
        Ok((r_max.max(0.0), d_max.max(0.0)))
    }
}

/// The fourteen distance requirements and the quarter-plane, as linear
/// constraints in `(R_c, d_c)`.
pub fn constraint_halfplanes(alpha: &Alpha, spec: &DesignSpec) -> ConstraintSet {
    let mut out = Vec::with_capacity(14);
    let (r, d) = (alpha.r, alpha.d);
    for i in 0..3 {
        out.push(Constraint::abs_difference_at_least(
            r[i].abs(),
            d[i].abs(),
            spec.d0_min,
            ConstraintTag::OriginMin { agent: i + 1 },
        ));
    }
    for i in 0..3 {
        out.push(Constraint::Single(HalfPlane::new(
            -r[i].abs(),
            -d[i].abs(),
            -spec.d0_max,
            ConstraintTag::OriginMax { agent: i + 1 },
        )));
    }
    const PAIRS: [(usize, usize); 3] = [(0, 1), (1, 2), (0, 2)];
    for (i, j) in PAIRS {
        out.push(Constraint::abs_difference_at_least(
            (r[i] - r[j]).abs(),
            (d[i] - d[j]).abs(),
            spec.d_ct,
            ConstraintTag::PairMin { i: i + 1, j: j + 1 },
        ));
    }
    for (i, j) in PAIRS {
        out.push(Constraint::Single(HalfPlane::new(
            -(r[i] - r[j]).abs(),
            -(d[i] - d[j]).abs(),
            -spec.d_cr,
            ConstraintTag::PairMax { i: i + 1, j: j + 1 },
        )));
    }
    out.push(Constraint::Single(HalfPlane::new(1.0, 0.0, 0.0, ConstraintTag::NonNegativeRc)));
    out.push(Constraint::Single(HalfPlane::new(0.0, 1.0, 0.0, ConstraintTag::NonNegativeDc)));
    ConstraintSet { constraints: out }
}

/// Raises every origin-min bound by `delta`.
pub fn apply_perturbation_margin(set: &ConstraintSet, delta: f64) -> Result<ConstraintSet> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidSpec("perturbation margin must be finite and non-negative".into()));
    }
    let constraints = set
        .constraints
        .iter()
        .map(|c| match c.tag() {
            ConstraintTag::OriginMin { .. } => c.map(|h| HalfPlane { c: h.c + delta, ..h }),
            _ => *c,
        })
        .collect();
    Ok(ConstraintSet { constraints })
}

/// Slopes `d_c / R_c` of the rays on which agent `i` has a cusp, or `None`
/// when `alpha_id = 0` (the path is a circle).
pub fn cusp_ray_slopes(alpha: &Alpha, trochoid_type: TrochoidType, k: u32) -> [Option<f64>; 3] {
    let m = trochoid_type.harmonic(k).unsigned_abs() as f64;
    std::array::from_fn(|i| {
        let d = alpha.d[i].abs();
        (d > 0.0).then(|| alpha.r[i].abs() / (m * d))
    })
}

/// Excludes, for each agent, the wedge where `d_c / R_c` lies within a factor
/// `1 +- epsilon` of the cusp slope.
pub fn cusp_exclusion_bands(
    alpha: &Alpha,
    trochoid_type: TrochoidType,
    k: u32,
    epsilon: f64,
) -> Vec<Constraint> {
    cusp_ray_slopes(alpha, trochoid_type, k)
        .iter()
        .enumerate()
        .filter_map(|(i, s)| {
            let s = (*s)?;
            let tag = ConstraintTag::CuspBand { agent: i + 1 };
            let (lo, hi) = ((1.0 - epsilon) * s, (1.0 + epsilon) * s);
            Some(Constraint::Either([
                // below the band: d <= lo R
                HalfPlane::new(lo, -1.0, 0.0, tag),
                // above the band: d >= hi R
                HalfPlane::new(-hi, 1.0, 0.0, tag),
            ]))
        })
        .collect()
}

/// Branch choices that produced a polygon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchChoice {
    pub tag: ConstraintTag,
    /// 0 for `a R - b d >= m`, 1 for `b d - a R >= m`.
    pub branch: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionPolygon {
    pub vertices: Vec<Point2>,
    pub provenance: Vec<BranchChoice>,
}

impl RegionPolygon {
    pub fn polygon(&self) -> ConvexPolygon {
        ConvexPolygon { vertices: self.vertices.clone() }
    }

    pub fn area(&self) -> f64 {
        self.polygon().area()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibleRegion {
    pub polygons: Vec<RegionPolygon>,
    pub r_max: f64,
    pub d_max: f64,
}

impl FeasibleRegion {
    pub fn contains(&self, r_c: f64, d_c: f64) -> bool {
        let p = Point2::new(r_c, d_c);
        self.polygons.iter().any(|q| q.polygon().contains(p))
    }

    pub fn boundary_distance(&self, r_c: f64, d_c: f64) -> f64 {
        let p = Point2::new(r_c, d_c);
        self.polygons
            .iter()
            .map(|q| q.polygon().boundary_distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn largest(&self) -> Option<&RegionPolygon> {
        self.polygons.iter().max_by(|a, b| a.area().total_cmp(&b.area()))
    }

    /// Deepest point of the largest polygon.
    pub fn auto_point(&self) -> Option<Point2> {
        self.largest().map(|p| p.polygon().deepest_point().0)
    }

    pub fn total_area(&self) -> f64 {
        self.polygons.iter().map(RegionPolygon::area).sum()
    }
}

const MIN_AREA: f64 = 1e-9;

/// All convex pieces of the feasible set inside the bounding box.
pub fn enumerate_regions(set: &ConstraintSet) -> Result<FeasibleRegion> {
    let (r_max, d_max) = set.bounds()?;
    let tol = 1e-9 * r_max.hypot(d_max).max(f64::MIN_POSITIVE);
    let mut base = ConvexPolygon::rectangle(0.0, 0.0, r_max, d_max);
    let mut split = Vec::new();
    for c in &set.constraints {
        match c {
            Constraint::Single(h) => base = base.clip(h.a, h.b, h.c),
            Constraint::Either(pair) => split.push(*pair),
        }
    }
    base = base.dedup(tol);

    let mut found: Vec<RegionPolygon> = Vec::new();
    let mut path = Vec::with_capacity(split.len());
    if !base.is_empty() && base.area() >= MIN_AREA {
        descend(&base, &split, &mut path, &mut found, tol);
    }
    if found.is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(FeasibleRegion { polygons: found, r_max, d_max })
}

fn descend(
    poly: &ConvexPolygon,
    rest: &[[HalfPlane; 2]],
    path: &mut Vec<BranchChoice>,
    found: &mut Vec<RegionPolygon>,
    tol: f64,
) {
    let Some((pair, rest)) = rest.split_first() else {
        if !found.iter().any(|f| same_vertices(&f.vertices, &poly.vertices, tol)) {
            found.push(RegionPolygon { vertices: poly.vertices.clone(), provenance: path.clone() });
        }
        return;
    };
    for (branch, h) in pair.iter().enumerate() {
        let piece = poly.clip(h.a, h.b, h.c).dedup(tol);
        if piece.is_empty() || piece.area() < MIN_AREA {
            continue;
        }
        path.push(BranchChoice { tag: h.tag, branch: branch as u8 });
        descend(&piece, rest, path, found, tol);
        path.pop();
    }
}

fn same_vertices(a: &[Point2], b: &[Point2], tol: f64) -> bool {
    a.len() == b.len() && a.iter().all(|p| b.iter().any(|q| p.distance(*q) <= tol))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "violated", rename_all = "snake_case")]
pub enum Classification {
    Feasible,
    Infeasible(Vec<ConstraintTag>),
}

impl Classification {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Classification::Feasible)
    }
}

/// Direct evaluation of every constraint at one point.
pub fn classify_point(set: &ConstraintSet, r_c: f64, d_c: f64) -> Classification {
    let violated: Vec<_> = set
        .constraints
        .iter()
        .filter(|c| !c.holds(r_c, d_c))
        .map(Constraint::tag)
        .collect();
    if violated.is_empty() {
        Classification::Feasible
    } else {
        Classification::Infeasible(violated)
    }
}
