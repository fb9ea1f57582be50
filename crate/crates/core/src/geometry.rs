//! Convex geometry kernel: polygons, cones, zonotopes, hulls and Minkowski sums.
//!
//! Everything is plain `f64`. Regions produced by the rest of the crate are
//! meters-scale, so fixed absolute tolerances are used:
//!
//! - [`COLLINEAR_TOL`] (1e-9 m) for hull construction and duplicate removal,
//! - [`MEMBERSHIP_TOL`] (1e-7 m) for vertex/halfspace consistency checks,
//! - [`BOUNDARY_BAND`] (1e-9 m) for classifying a point as on the boundary.
//!
//! A [`Polygon2`] always holds its vertex list; the halfspace list is derived
//! on first use and cached. Both are immutable once built.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, Vector2};
use thiserror::Error;

use crate::optim::{self, LinearProgram, LpStatus};

/// A point (or vector) in the horizontal plane, meters.
pub type Point2 = Vector2<f64>;

/// Collinearity and duplicate-point tolerance used by hull construction.
pub const COLLINEAR_TOL: f64 = 1e-9;
/// Tolerance for "vertex satisfies halfspace" style checks.
pub const MEMBERSHIP_TOL: f64 = 1e-7;
/// Half-width of the band in which a point counts as lying on the boundary.
pub const BOUNDARY_BAND: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("halfspace intersection is unbounded")]
    Unbounded,
    #[error("halfspace intersection is empty")]
    Empty,
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// Closed halfplane `normal · x <= offset` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Halfspace2 {
    pub normal: Point2,
    pub offset: f64,
}

impl Halfspace2 {
    /// Builds a halfplane from any nonzero normal, normalizing both sides.
    pub fn new(normal: Point2, offset: f64) -> Result<Self, GeometryError> {
        let n = normal.norm();
        if !(n > 0.0) || !n.is_finite() || !offset.is_finite() {
            return Err(GeometryError::Invalid(format!(
                "halfspace normal must be finite and nonzero, got {normal:?}"
            )));
        }
        Ok(Self {
            normal: normal / n,
            offset: offset / n,
        })
    }

    /// `offset - normal · x`; positive inside.
    #[inline]
    pub fn slack(&self, x: &Point2) -> f64 {
        self.offset - self.normal.dot(x)
    }

    #[inline]
    pub fn contains(&self, x: &Point2, tol: f64) -> bool {
        self.slack(x) >= -tol
    }
}

/// Where a query point sits relative to a polygon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointLocation {
    Inside,
    Boundary,
    Outside,
}

/// Pivot used by [`scale_polygon`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalePivot {
    /// Average of the vertices.
    Centroid,
    /// Center of the largest inscribed disk (solved as a linear program).
    Chebyshev,
}

/// Convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone)]
pub struct Polygon2 {
    vertices: Vec<Point2>,
    halfspaces: OnceLock<Vec<Halfspace2>>,
}

impl PartialEq for Polygon2 {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices
    }
}

impl Polygon2 {
    /// Convex hull of arbitrary points; see [`convex_hull_2d`].
    pub fn from_points(points: &[Point2]) -> Result<Self, GeometryError> {
        convex_hull_2d(points)
    }

    /// Intersection of halfplanes; see [`vertices_from_halfspaces`].
    pub fn from_halfspaces(halfspaces: &[Halfspace2]) -> Result<Self, GeometryError> {
        vertices_from_halfspaces(halfspaces)
    }

    /// Caller guarantees strictly convex CCW order.
    pub(crate) fn from_ccw_unchecked(vertices: Vec<Point2>) -> Self {
        Self {
            vertices,
            halfspaces: OnceLock::new(),
        }
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edge halfplanes, one per edge `v[i] -> v[i+1]`, computed once.
    pub fn halfspaces(&self) -> &[Halfspace2] {
        self.halfspaces.get_or_init(|| edge_halfspaces(&self.vertices))
    }

    pub fn area(&self) -> f64 {
        raw_area(&self.vertices)
    }

    /// Average of the vertices.
    pub fn vertex_centroid(&self) -> Point2 {
        let sum = self.vertices.iter().fold(Point2::zeros(), |acc, v| acc + v);
        sum / self.vertices.len() as f64
    }

    /// Minimum halfspace slack; equals the distance to the boundary for inside points.
    pub fn min_slack(&self, x: &Point2) -> f64 {
        self.halfspaces()
            .iter()
            .map(|h| h.slack(x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &Point2, tol: f64) -> bool {
        self.min_slack(x) >= -tol
    }

    /// Euclidean distance from `x` to the polygon (zero inside).
    pub fn distance_to(&self, x: &Point2) -> f64 {
        if self.min_slack(x) >= 0.0 {
            return 0.0;
        }
        self.distance_to_boundary(x)
    }

    /// Euclidean distance from `x` to the polygon boundary.
    pub fn distance_to_boundary(&self, x: &Point2) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| segment_distance(x, &self.vertices[i], &self.vertices[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Bounding box `(min, max)`.
    pub fn bounds(&self) -> (Point2, Point2) {
        let mut lo = Point2::repeat(f64::INFINITY);
        let mut hi = Point2::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    /// Vertices as `x,y` lines, CCW, nine significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            let _ = writeln!(out, "{},{}", fmt_sig(v.x), fmt_sig(v.y));
        }
        out
    }

    /// Parses the output of [`Polygon2::to_csv`] (any convex point order is accepted).
    pub fn from_csv(text: &str) -> Result<Self, GeometryError> {
        let mut pts = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64, GeometryError> {
                s.and_then(|t| t.trim().parse::<f64>().ok()).ok_or_else(|| {
                    GeometryError::Invalid(format!("line {}: expected `x,y`", lineno + 1))
                })
            };
            let x = parse(it.next())?;
            let y = parse(it.next())?;
            pts.push(Point2::new(x, y));
        }
        convex_hull_2d(&pts)
    }
}

/// Formats with nine significant digits; values below 1e-12 in magnitude print as 0.
pub fn fmt_sig(x: f64) -> String {
    if x.abs() < 1e-12 {
        return "0".to_string();
    }
    let digits = 9i32;
    let exp = x.abs().log10().floor() as i32;
    let decimals = (digits - 1 - exp).max(0) as usize;
    if (-5..15).contains(&exp) {
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".to_string()
        } else {
            s
        }
    } else {
        format!("{x:.8e}")
    }
}

#[inline]
fn cross(o: &Point2, a: &Point2, b: &Point2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn segment_distance(x: &Point2, a: &Point2, b: &Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (x - a).norm();
    }
    let t = ((x - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (x - (a + ab * t)).norm()
}

fn edge_halfspaces(vertices: &[Point2]) -> Vec<Halfspace2> {
    let n = vertices.len();
    (0..n)
        .map(|i| {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let e = b - a;
            // outward normal of a CCW edge
            let normal = Point2::new(e.y, -e.x).normalize();
            Halfspace2 {
                normal,
                offset: normal.dot(&a),
            }
        })
        .collect()
}

/// Shoelace area of a CCW vertex list (zero for fewer than 3 points).
pub fn raw_area(vertices: &[Point2]) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        s += a.x * b.y - a.y * b.x;
    }
    0.5 * s.abs()
}

/// Clips a convex CCW vertex list by `h`, keeping `normal · x <= offset`.
pub fn clip_convex(vertices: &[Point2], h: &Halfspace2) -> Vec<Point2> {
    let n = vertices.len();
    let mut out = Vec::with_capacity(n + 1);
    if n == 0 {
        return out;
    }
    for i in 0..n {
        let p = vertices[i];
        let q = vertices[(i + 1) % n];
        let sp = h.slack(&p);
        let sq = h.slack(&q);
        if sp >= 0.0 {
            out.push(p);
        }
        if (sp >= 0.0) != (sq >= 0.0) {
            let t = sp / (sp - sq);
            out.push(p + (q - p) * t);
        }
    }
    out
}

/// Indices (into `points`) of the convex hull vertices in CCW order.
///
/// Monotone chain; points closer than [`COLLINEAR_TOL`] to each other or to a
/// hull edge are dropped. Among duplicates the lowest index is reported.
pub fn convex_hull_indices(points: &[Point2]) -> Result<Vec<usize>, GeometryError> {
    if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(GeometryError::Invalid("non-finite point".into()));
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (points[i], points[j]);
        a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)).then(i.cmp(&j))
    });
    let mut uniq: Vec<usize> = Vec::with_capacity(order.len());
    for i in order {
        let dup = uniq
            .iter()
            .rev()
            .take_while(|&&j| points[i].x - points[j].x <= COLLINEAR_TOL)
            .any(|&j| (points[i] - points[j]).norm() <= COLLINEAR_TOL);
        if !dup {
            uniq.push(i);
        }
    }
    if uniq.len() < 3 {
        return Err(GeometryError::DegenerateInput(
            "fewer than 3 distinct points",
        ));
    }
    // Exact-sign monotone chain first, tolerance-based pruning afterwards:
    // applying the tolerance inside the chain misorders nearly vertical runs.
    let turns_left = |o: usize, a: usize, b: usize| cross(&points[o], &points[a], &points[b]) > 0.0;
    let mut hull: Vec<usize> = Vec::with_capacity(2 * uniq.len());
    for &i in &uniq {
        while hull.len() >= 2 && !turns_left(hull[hull.len() - 2], hull[hull.len() - 1], i) {
            hull.pop();
        }
        hull.push(i);
    }
    let lower_len = hull.len() + 1;
    for &i in uniq.iter().rev().skip(1) {
        while hull.len() >= lower_len && !turns_left(hull[hull.len() - 2], hull[hull.len() - 1], i)
        {
            hull.pop();
        }
        hull.push(i);
    }
    hull.pop();
    loop {
        let n = hull.len();
        if n < 3 {
            return Err(GeometryError::DegenerateInput("all points are collinear"));
        }
        let flat = (0..n).find(|&k| {
            let (p, v, q) = (points[hull[(k + n - 1) % n]], points[hull[k]], points[hull[(k + 1) % n]]);
            let base = (q - p).norm();
            base == 0.0 || cross(&p, &v, &q) <= COLLINEAR_TOL * base
        });
        match flat {
            Some(k) => {
                hull.remove(k);
            }
            None => break,
        }
    }
    Ok(hull)
}

/// Minimal convex polygon containing all `points`.
pub fn convex_hull_2d(points: &[Point2]) -> Result<Polygon2, GeometryError> {
    let idx = convex_hull_indices(points)?;
    Ok(Polygon2::from_ccw_unchecked(
        idx.into_iter().map(|i| points[i]).collect(),
    ))
}

pub fn polygon_area(p: &Polygon2) -> f64 {
    p.area()
}

/// Edge halfplanes of `p` (the H-form of the polygon).
pub fn halfspaces_from_vertices(p: &Polygon2) -> Vec<Halfspace2> {
    p.halfspaces().to_vec()
}

/// Vertex enumeration of a halfplane intersection.
///
/// Candidate vertices are all pairwise boundary-line intersections that
/// satisfy every halfplane; their hull is the result. Redundant halfplanes
/// are accepted and dropped.
pub fn vertices_from_halfspaces(halfspaces: &[Halfspace2]) -> Result<Polygon2, GeometryError> {
    let hs: Vec<Halfspace2> = halfspaces
        .iter()
        .map(|h| Halfspace2::new(h.normal, h.offset))
        .collect::<Result<_, _>>()?;
    if hs.len() < 3 {
        return Err(GeometryError::Unbounded);
    }
    if !normals_positively_span(&hs) {
        // Unbounded unless infeasible; decide by closing it with a huge box.
        let mut boxed = hs.clone();
        boxed.extend(box_halfspaces(Point2::zeros(), 1e6));
        return match enumerate_vertices(&boxed) {
            Ok(_) => Err(GeometryError::Unbounded),
            Err(e) => Err(e),
        };
    }
    enumerate_vertices(&hs)
}

fn enumerate_vertices(hs: &[Halfspace2]) -> Result<Polygon2, GeometryError> {
    let scale = hs.iter().map(|h| h.offset.abs()).fold(1.0, f64::max);
    let tol = 1e-10 * scale;
    let mut cand = Vec::new();
    for i in 0..hs.len() {
        for j in (i + 1)..hs.len() {
            let (a, b) = (hs[i], hs[j]);
            let det = a.normal.x * b.normal.y - a.normal.y * b.normal.x;
            if det.abs() < 1e-12 {
                continue;
            }
            let x = (a.offset * b.normal.y - a.normal.y * b.offset) / det;
            let y = (a.normal.x * b.offset - a.offset * b.normal.x) / det;
            let p = Point2::new(x, y);
            if hs.iter().all(|h| h.slack(&p) >= -tol) {
                cand.push(p);
            }
        }
    }
    if cand.is_empty() {
        return Err(GeometryError::Empty);
    }
    convex_hull_2d(&cand).map_err(|_| GeometryError::Empty)
}

fn normals_positively_span(hs: &[Halfspace2]) -> bool {
    let mut ang: Vec<f64> = hs.iter().map(|h| h.normal.y.atan2(h.normal.x)).collect();
    ang.sort_by(f64::total_cmp);
    let mut max_gap = ang[0] + 2.0 * PI - ang[ang.len() - 1];
    for w in ang.windows(2) {
        max_gap = max_gap.max(w[1] - w[0]);
    }
    max_gap < PI - 1e-12
}

/// Four halfplanes of the axis-aligned box `center ± half_width`.
pub fn box_halfspaces(center: Point2, half_width: f64) -> [Halfspace2; 4] {
    [
        Halfspace2 { normal: Point2::new(1.0, 0.0), offset: center.x + half_width },
        Halfspace2 { normal: Point2::new(-1.0, 0.0), offset: -(center.x - half_width) },
        Halfspace2 { normal: Point2::new(0.0, 1.0), offset: center.y + half_width },
        Halfspace2 { normal: Point2::new(0.0, -1.0), offset: -(center.y - half_width) },
    ]
}

/// Axis-aligned square `center ± half_width` as a polygon.
pub fn box_polygon(center: Point2, half_width: f64) -> Polygon2 {
    let h = half_width;
    Polygon2::from_ccw_unchecked(vec![
        center + Point2::new(-h, -h),
        center + Point2::new(h, -h),
        center + Point2::new(h, h),
        center + Point2::new(-h, h),
    ])
}

/// Affine scaling `v -> s (v - pivot) + pivot` with `s` in `(0, 1]`.
///
/// Panics if `s` is outside `(0, 1]`.
pub fn scale_polygon(p: &Polygon2, s: f64, pivot: ScalePivot) -> Polygon2 {
    assert!(s > 0.0 && s <= 1.0, "scale factor must lie in (0, 1], got {s}");
    let c = match pivot {
        ScalePivot::Centroid => p.vertex_centroid(),
        ScalePivot::Chebyshev => optim::chebyshev_center(p).0,
    };
    Polygon2::from_ccw_unchecked(p.vertices().iter().map(|v| c + (v - c) * s).collect())
}

/// Classifies `x` and returns a signed distance (positive inside).
///
/// Inside, the distance is the minimum halfspace slack, i.e. the distance to
/// the nearest edge. Outside, it is minus the Euclidean distance to the polygon.
pub fn point_in_polygon(p: &Polygon2, x: &Point2) -> (PointLocation, f64) {
    let slack = p.min_slack(x);
    if slack.abs() <= BOUNDARY_BAND {
        (PointLocation::Boundary, slack)
    } else if slack > 0.0 {
        (PointLocation::Inside, slack)
    } else {
        (PointLocation::Outside, -p.distance_to_boundary(x))
    }
}

/// Hausdorff distance between two convex polygons.
///
/// For convex sets the distance-to-set function is convex, so the supremum is
/// attained at a vertex; checking vertices both ways is exact.
pub fn hausdorff_distance(a: &Polygon2, b: &Polygon2) -> f64 {
    let ab = a
        .vertices()
        .iter()
        .map(|v| b.distance_to(v))
        .fold(0.0, f64::max);
    let ba = b
        .vertices()
        .iter()
        .map(|v| a.distance_to(v))
        .fold(0.0, f64::max);
    ab.max(ba)
}

/// Pairwise Minkowski sum of two finite point sets, `O(|a| |b|)`.
pub fn minkowski_sum_points(a: &[Point2], b: &[Point2]) -> Vec<Point2> {
    a.iter()
        .flat_map(|p| b.iter().map(move |q| p + q))
        .collect()
}

/// Polyhedral cone through the origin.
///
/// The R-form (`rays`) is authoritative; an optional H-form `C x <= 0` may be
/// attached and is checked against the rays.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyhedralCone {
    dim: usize,
    rays: Vec<DVector<f64>>,
    halfspaces: Option<DMatrix<f64>>,
}

impl PolyhedralCone {
    pub fn new(dim: usize, rays: Vec<DVector<f64>>) -> Result<Self, GeometryError> {
        for r in &rays {
            if r.len() != dim {
                return Err(GeometryError::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            if r.iter().all(|v| *v == 0.0) || r.iter().any(|v| !v.is_finite()) {
                return Err(GeometryError::Invalid("cone rays must be finite and nonzero".into()));
            }
        }
        Ok(Self {
            dim,
            rays,
            halfspaces: None,
        })
    }

    /// The cone `{0}`.
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            rays: Vec::new(),
            halfspaces: None,
        }
    }

    /// Attaches an H-form; every ray must satisfy it within [`MEMBERSHIP_TOL`].
    pub fn with_halfspaces(mut self, c: DMatrix<f64>) -> Result<Self, GeometryError> {
        if c.ncols() != self.dim {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim,
                found: c.ncols(),
            });
        }
        for r in &self.rays {
            if (&c * r).iter().any(|v| *v > MEMBERSHIP_TOL) {
                return Err(GeometryError::Invalid("ray violates cone halfspaces".into()));
            }
        }
        self.halfspaces = Some(c);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rays(&self) -> &[DVector<f64>] {
        &self.rays
    }

    pub fn halfspaces(&self) -> Option<&DMatrix<f64>> {
        self.halfspaces.as_ref()
    }

    /// Whether `x` is a nonnegative combination of the rays.
    pub fn contains(&self, x: &DVector<f64>) -> bool {
        if x.len() != self.dim {
            return false;
        }
        if self.rays.is_empty() {
            return x.amax() <= MEMBERSHIP_TOL;
        }
        conic_membership(&self.rays, x)
    }

    /// Drops every ray that is a conic combination of the remaining ones.
    pub fn pruned(&self) -> Self {
        let mut keep: Vec<bool> = vec![true; self.rays.len()];
        for i in 0..self.rays.len() {
            let others: Vec<DVector<f64>> = self
                .rays
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i && keep[*j])
                .map(|(_, r)| r.clone())
                .collect();
            if !others.is_empty() && conic_membership(&others, &self.rays[i]) {
                keep[i] = false;
            }
        }
        Self {
            dim: self.dim,
            rays: self
                .rays
                .iter()
                .zip(&keep)
                .filter(|(_, k)| **k)
                .map(|(r, _)| r.clone())
                .collect(),
            halfspaces: self.halfspaces.clone(),
        }
    }
}

fn conic_membership(rays: &[DVector<f64>], x: &DVector<f64>) -> bool {
    let dim = x.len();
    let a = DMatrix::from_fn(dim, rays.len(), |i, j| rays[j][i]);
    let lp = LinearProgram::feasibility(rays.len())
        .with_equalities(a, x.clone())
        .with_bounds(vec![(0.0, f64::INFINITY); rays.len()]);
    matches!(optim::solve_lp(&lp).map(|s| s.status), Ok(LpStatus::Optimal))
}

/// Minkowski sum of two cones: the union of their ray lists.
///
/// Redundant interior rays are kept; use [`PolyhedralCone::pruned`] for display.
pub fn minkowski_sum_cones(
    c1: &PolyhedralCone,
    c2: &PolyhedralCone,
) -> Result<PolyhedralCone, GeometryError> {
    if c1.dim != c2.dim {
        return Err(GeometryError::DimensionMismatch {
            expected: c1.dim,
            found: c2.dim,
        });
    }
    let mut rays = c1.rays.clone();
    rays.extend(c2.rays.iter().cloned());
    Ok(PolyhedralCone {
        dim: c1.dim,
        rays,
        halfspaces: None,
    })
}

/// Zonotope `{ center + sum_i alpha_i g_i : alpha in [-1, 1]^p }`.
#[derive(Debug, Clone, PartialEq)]
pub struct Zonotope {
    center: DVector<f64>,
    generators: Vec<DVector<f64>>,
}

impl Zonotope {
    pub fn new(center: DVector<f64>, generators: Vec<DVector<f64>>) -> Result<Self, GeometryError> {
        for g in &generators {
            if g.len() != center.len() {
                return Err(GeometryError::DimensionMismatch {
                    expected: center.len(),
                    found: g.len(),
                });
            }
        }
        Ok(Self { center, generators })
    }

    /// Symmetric box `[-limits, limits]`, e.g. a joint-torque box.
    pub fn symmetric_box(limits: &[f64]) -> Self {
        let n = limits.len();
        Self {
            center: DVector::zeros(n),
            generators: (0..n)
                .map(|i| {
                    let mut g = DVector::zeros(n);
                    g[i] = limits[i];
                    g
                })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn generators(&self) -> &[DVector<f64>] {
        &self.generators
    }

    /// `center + sum alpha_i g_i`; `alpha` is not range-checked.
    pub fn point(&self, alpha: &[f64]) -> DVector<f64> {
        assert_eq!(alpha.len(), self.generators.len());
        self.generators
            .iter()
            .zip(alpha)
            .fold(self.center.clone(), |acc, (g, a)| acc + g * *a)
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let p = self.generators.len();
        if p == 0 {
            return (x - &self.center).amax() <= MEMBERSHIP_TOL;
        }
        let a = DMatrix::from_fn(self.dim(), p, |i, j| self.generators[j][i]);
        let lp = LinearProgram::feasibility(p)
            .with_equalities(a, x - &self.center)
            .with_bounds(vec![(-1.0, 1.0); p]);
        matches!(optim::solve_lp(&lp).map(|s| s.status), Ok(LpStatus::Optimal))
    }

    /// All `2^p` sign-combination points (a superset of the vertices).
    pub fn corner_points(&self) -> Vec<DVector<f64>> {
        let p = self.generators.len();
        assert!(p <= 20, "too many generators to enumerate");
        (0..(1usize << p))
            .map(|mask| {
                let alpha: Vec<f64> = (0..p)
                    .map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 })
                    .collect();
                self.point(&alpha)
            })
            .collect()
    }
}
