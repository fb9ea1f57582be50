//! Iterative projection of the static-equilibrium constraint set onto the
//! horizontal CoM plane.
//!
//! The LP variables are `[c_x, c_y, f / (m g)]`: forces are expressed as
//! fractions of the supported weight so that the solver's absolute
//! tolerances apply to O(1) numbers. The CoM is boxed to
//! `centroid ± bounding_box` so every directional LP is bounded.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, Vector3};
use thiserror::Error;

use crate::constraints::ConstraintSystem;
use crate::geometry::{
    self, clip_convex, convex_hull_indices, fmt_sig, raw_area, Halfspace2, Point2, Polygon2,
};
use crate::optim::{solve_lp, LinearProgram, LpError, LpStatus};

/// Which constraint families restrict the contact forces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintMode {
    FrictionOnly,
    ActuationOnly,
    FrictionAndActuation,
}

impl ConstraintMode {
    pub fn name(self) -> &'static str {
        match self {
            ConstraintMode::FrictionOnly => "friction_only",
            ConstraintMode::ActuationOnly => "actuation_only",
            ConstraintMode::FrictionAndActuation => "friction_and_actuation",
        }
    }

    fn uses_friction(self) -> bool {
        self != ConstraintMode::ActuationOnly
    }

    fn uses_actuation(self) -> bool {
        self != ConstraintMode::FrictionOnly
    }
}

impl std::str::FromStr for ConstraintMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "friction_only" | "friction" => Ok(Self::FrictionOnly),
            "actuation_only" | "actuation" => Ok(Self::ActuationOnly),
            "friction_and_actuation" | "feasible" => Ok(Self::FrictionAndActuation),
            _ => Err(format!("unknown constraint mode `{s}`")),
        }
    }
}

pub const DEFAULT_EPS: f64 = 1e-6;
pub const DEFAULT_MAX_ITERATIONS: usize = 500;
pub const DEFAULT_BOUNDING_BOX: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionRequest {
    pub mode: ConstraintMode,
    /// Stop once `area(outer) - area(inner) <= eps`, m².
    pub eps: f64,
    pub max_iterations: usize,
    /// Half-width of the CoM box around the contact centroid, m.
    pub bounding_box: f64,
}

impl Default for RegionRequest {
    fn default() -> Self {
        Self {
            mode: ConstraintMode::FrictionAndActuation,
            eps: DEFAULT_EPS,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            bounding_box: DEFAULT_BOUNDING_BOX,
        }
    }
}

impl RegionRequest {
    pub fn new(mode: ConstraintMode) -> Self {
        Self { mode, ..Self::default() }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionResult {
    pub mode: ConstraintMode,
    pub eps: f64,
    pub inner: Polygon2,
    pub outer: Polygon2,
    /// Refinement iterations after the seed LPs.
    pub iterations: usize,
    pub lp_calls: usize,
    pub converged: bool,
    pub area_gap: f64,
    /// Contact forces (N) certifying each inner vertex, in vertex order.
    pub witnesses: Vec<DVector<f64>>,
    /// CoM box `(min, max)` that caps the outer polygon.
    pub bounding_box: (Point2, Point2),
}

impl RegionResult {
    /// Metadata header as `key: value` lines.
    pub fn metadata(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "mode: {}", self.mode.name());
        let _ = writeln!(s, "eps: {}", fmt_sig(self.eps));
        let _ = writeln!(s, "iterations: {}", self.iterations);
        let _ = writeln!(s, "lp_calls: {}", self.lp_calls);
        let _ = writeln!(s, "converged: {}", self.converged);
        let _ = writeln!(s, "area_inner: {}", fmt_sig(self.inner.area()));
        let _ = writeln!(s, "area_outer: {}", fmt_sig(self.outer.area()));
        let _ = writeln!(s, "area_gap: {}", fmt_sig(self.area_gap));
        s
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegionError {
    #[error("no CoM position admits static equilibrium")]
    EmptyRegion,
    #[error("region has no interior (all support points collinear)")]
    LowerDimensional,
    #[error("area gap {:.3e} still above tolerance after {} iterations", .0.area_gap, .0.iterations)]
    NotConverged(Box<RegionResult>),
    #[error("actuation constraints requested but the system has none")]
    MissingActuation,
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Fixed LP data of one region computation; only the objective changes per call.
struct RegionLp {
    base: LinearProgram,
    weight: f64,
}

impl RegionLp {
    fn new(sys: &ConstraintSystem, mode: ConstraintMode, bbox: (Point2, Point2)) -> Result<Self, RegionError> {
        let nf = 3 * sys.num_contacts();
        let n = 2 + nf;
        let w = sys.weight();
        let mut a = DMatrix::zeros(6, n);
        a.view_mut((0, 0), (6, 2)).copy_from(&(&sys.a2 / w));
        a.view_mut((0, 2), (6, nf)).copy_from(&sys.a1);
        let b = &sys.u / w;
        let (c, d) = inequality_block(sys, mode, 2)?;
        let mut bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); n];
        bounds[0] = (bbox.0.x, bbox.1.x);
        bounds[1] = (bbox.0.y, bbox.1.y);
        let base = LinearProgram::new(DVector::zeros(n))
            .with_equalities(a, b)
            .with_inequalities(c, d)
            .with_bounds(bounds);
        Ok(Self { base, weight: w })
    }

    /// Maximizes `dir · c`; returns the CoM optimum and its (unscaled) forces.
    fn extreme(&mut self, dir: &Point2) -> Result<Option<(Point2, DVector<f64>)>, RegionError> {
        self.base.objective[0] = dir.x;
        self.base.objective[1] = dir.y;
        let sol = solve_lp(&self.base)?;
        match sol.status {
            LpStatus::Optimal => {
                let f = sol.x.rows(2, sol.x.len() - 2) * self.weight;
                Ok(Some((Point2::new(sol.x[0], sol.x[1]), f)))
            }
            LpStatus::Infeasible => Ok(None),
            // The CoM is boxed and forces do not enter the objective.
            LpStatus::Unbounded => Err(RegionError::Lp(LpError::Malformed("unbounded region LP".into()))),
        }
    }
}

/// Inequality rows `[0 | B; 0 | G/W] x <= [0; d/W]` over `offset` leading CoM columns.
fn inequality_block(
    sys: &ConstraintSystem,
    mode: ConstraintMode,
    offset: usize,
) -> Result<(DMatrix<f64>, DVector<f64>), RegionError> {
    let nf = 3 * sys.num_contacts();
    let w = sys.weight();
    let fr = if mode.uses_friction() { sys.friction.nrows() } else { 0 };
    let act = if mode.uses_actuation() {
        Some(sys.actuation.as_ref().ok_or(RegionError::MissingActuation)?)
    } else {
        None
    };
    let ar = act.map_or(0, |(g, _)| g.nrows());
    let mut c = DMatrix::zeros(fr + ar, offset + nf);
    let mut d = DVector::zeros(fr + ar);
    if fr > 0 {
        c.view_mut((0, offset), (fr, nf)).copy_from(&sys.friction);
    }
    if let Some((g, dv)) = act {
        c.view_mut((fr, offset), (ar, nf)).copy_from(g);
        d.rows_mut(fr, ar).copy_from(&(dv / w));
    }
    Ok((c, d))
}

fn unit(deg: f64) -> Point2 {
    let r = deg.to_radians();
    Point2::new(r.cos(), r.sin())
}

/// Computes the inner/outer polygon pair of the requested region.
///
/// Seeds with LPs along 0°, 120° and 240° (plus 60°, 180°, 300° if those
/// three optima are collinear), then repeatedly takes the inner edge whose
/// outward side cuts the largest area off the outer polygon and pushes an LP
/// along its normal. On `NotConverged` the partial result is attached.
pub fn compute_region(sys: &ConstraintSystem, req: &RegionRequest) -> Result<RegionResult, RegionError> {
    assert!(req.eps > 0.0 && req.bounding_box > 0.0, "eps and bounding box must be positive");
    let centre = sys.contact_centroid();
    let half = Point2::repeat(req.bounding_box);
    let bbox = (centre - half, centre + half);
    let mut lp = RegionLp::new(sys, req.mode, bbox)?;

    let mut points: Vec<Point2> = Vec::new();
    let mut forces: Vec<DVector<f64>> = Vec::new();
    let mut outer: Vec<Point2> = geometry::box_polygon(centre, req.bounding_box).vertices().to_vec();
    let mut lp_calls = 0;

    let mut push = |dir: Point2,
                    lp: &mut RegionLp,
                    points: &mut Vec<Point2>,
                    forces: &mut Vec<DVector<f64>>,
                    outer: &mut Vec<Point2>|
     -> Result<bool, RegionError> {
        lp_calls += 1;
        match lp.extreme(&dir)? {
            Some((c, f)) => {
                *outer = clip_convex(outer, &Halfspace2 { normal: dir, offset: dir.dot(&c) });
                points.push(c);
                forces.push(f);
                Ok(true)
            }
            None => Ok(false),
        }
    };

    for deg in [0.0, 120.0, 240.0] {
        if !push(unit(deg), &mut lp, &mut points, &mut forces, &mut outer)? {
            return Err(RegionError::EmptyRegion);
        }
    }
    let mut hull = convex_hull_indices(&points).ok();
    if hull.is_none() {
        for deg in [60.0, 180.0, 300.0] {
            push(unit(deg), &mut lp, &mut points, &mut forces, &mut outer)?;
        }
        hull = convex_hull_indices(&points).ok();
    }
    let mut hull = hull.ok_or(RegionError::LowerDimensional)?;

    let mut iterations = 0;
    loop {
        let inner: Vec<Point2> = hull.iter().map(|&i| points[i]).collect();
        let gap = raw_area(&outer) - raw_area(&inner);
        let converged = gap <= req.eps;
        if converged || iterations >= req.max_iterations {
            let result = RegionResult {
                mode: req.mode,
                eps: req.eps,
                inner: Polygon2::from_ccw_unchecked(inner),
                outer: geometry::convex_hull_2d(&outer).unwrap_or_else(|_| Polygon2::from_ccw_unchecked(outer)),
                iterations,
                lp_calls,
                converged,
                area_gap: gap.max(0.0),
                witnesses: hull.iter().map(|&i| forces[i].clone()).collect(),
                bounding_box: bbox,
            };
            return if converged { Ok(result) } else { Err(RegionError::NotConverged(Box::new(result))) };
        }

        // Edge whose outward side holds the most outer-polygon area.
        let k = inner.len();
        let mut best = (0usize, f64::NEG_INFINITY, Point2::zeros());
        for i in 0..k {
            let a = inner[i];
            let e = inner[(i + 1) % k] - a;
            let n = Point2::new(e.y, -e.x).normalize();
            let beyond = clip_convex(&outer, &Halfspace2 { normal: -n, offset: -n.dot(&a) });
            let area = raw_area(&beyond);
            if area > best.1 {
                best = (i, area, n);
            }
        }
        iterations += 1;
        push(best.2, &mut lp, &mut points, &mut forces, &mut outer)?;
        if let Ok(h) = convex_hull_indices(&points) {
            hull = h;
        }
    }
}

/// Result of a fixed-CoM feasibility check.
#[derive(Debug, Clone, PartialEq)]
pub enum Membership {
    /// Contact forces (N) that balance the robot at the queried CoM.
    Feasible { witness: DVector<f64> },
    /// Phase-one residual, in units of the supported weight.
    Infeasible { residual: f64 },
}

impl Membership {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Membership::Feasible { .. })
    }
}

/// Decides with a single LP whether some force distribution balances the robot at `c`.
pub fn membership_oracle(sys: &ConstraintSystem, c: &Point2, mode: ConstraintMode) -> Result<Membership, RegionError> {
    let w = sys.weight();
    let cv = DVector::from_column_slice(c.as_slice());
    let b = (&sys.u - &sys.a2 * cv) / w;
    let (ci, d) = inequality_block(sys, mode, 0)?;
    let lp = LinearProgram::feasibility(3 * sys.num_contacts())
        .with_equalities(sys.a1.clone(), b)
        .with_inequalities(ci, d);
    let sol = solve_lp(&lp)?;
    Ok(match sol.status {
        LpStatus::Optimal => Membership::Feasible { witness: sol.x * w },
        _ => Membership::Infeasible { residual: sol.infeasibility },
    })
}

/// Joint torques implied by a force distribution, with limit bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct TorqueCheck {
    /// Per contact, `tau_i = g(q_i) - J_i^T f_i`, N·m.
    pub torques: Vec<Vector3<f64>>,
    /// True when some joint torque exceeds its limit (beyond 1e-7 N·m).
    pub beta: bool,
    /// `min_j (tau_lim_j - |tau_j|)` over all stance joints, N·m.
    pub margin: f64,
    /// `max |A1 f + A2 c - u|`.
    pub equilibrium_residual: f64,
}

/// Recovers joint torques from a witness and flags limit violations.
///
/// Returns `None` when the system carries no actuation data.
pub fn torque_recovery(sys: &ConstraintSystem, c: &Point2, f: &DVector<f64>) -> Option<TorqueCheck> {
    if sys.polytopes.is_empty() {
        return None;
    }
    let mut torques = Vec::with_capacity(sys.polytopes.len());
    let mut margin = f64::INFINITY;
    for (i, p) in sys.polytopes.iter().enumerate() {
        let tau = p.torques(&ConstraintSystem::force(f, i));
        for j in 0..3 {
            margin = margin.min(p.torque_limits[j] - tau[j].abs());
        }
        torques.push(tau);
    }
    Some(TorqueCheck {
        torques,
        beta: margin < -1e-7,
        margin,
        equilibrium_residual: sys.equilibrium_residual(c, f),
    })
}
