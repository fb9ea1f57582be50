//! Configuration-independent feasible region by sequential iterative projection.
//!
//! For a search direction `a`, the CoM estimate `c` moves along the ray
//! `c0 + t a`. Each iteration re-solves the leg IK for the world-fixed
//! contacts relative to the base at `c`, rebuilds the actuation constraints,
//! computes the local feasible region, intersects the ray with it at `e`,
//! and steps `c += alpha (e - c)`. It stops once `d = |e - c| <= eps_d`.

use std::fmt::Write as _;

use nalgebra::Vector3;
use rayon::prelude::*;
use thiserror::Error;

use crate::constraints::ConstraintError;
use crate::geometry::{convex_hull_2d, fmt_sig, Point2, Polygon2};
use crate::region::{compute_region, ConstraintMode, RegionError, RegionRequest};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq)]
pub struct SipRequest {
    /// Unit search directions.
    pub directions: Vec<Point2>,
    /// Step gain in `(0, 1]`.
    pub alpha: f64,
    /// Convergence tolerance on `|e - c|`, m.
    pub eps_d: f64,
    pub max_iterations: usize,
    /// Settings for each local region computation.
    pub region: RegionRequest,
}

impl SipRequest {
    /// `n` equally spaced directions starting at +x.
    pub fn uniform(n: usize) -> Self {
        let directions = (0..n)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                Point2::new(a.cos(), a.sin())
            })
            .collect();
        Self {
            directions,
            alpha: 0.5,
            eps_d: 1e-3,
            max_iterations: 50,
            region: RegionRequest::new(ConstraintMode::FrictionAndActuation),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SipError {
    #[error("inverse kinematics failed at CoM ({:.4}, {:.4}): {reason}", .at.x, .at.y)]
    KinematicLimitHit { at: Point2, reason: String },
    #[error("local region vanished at CoM ({:.4}, {:.4})", .at.x, .at.y)]
    RegionVanished { at: Point2 },
    #[error("search ray misses the local region at CoM ({:.4}, {:.4})", .at.x, .at.y)]
    NoIntersection { at: Point2 },
    #[error("no convergence after {iterations} iterations (last d = {last_d:.3e})")]
    NotConverged { iterations: usize, last_d: f64 },
    #[error("region computation failed: {0}")]
    Region(String),
}

/// One converged search direction.
#[derive(Debug, Clone, PartialEq)]
pub struct SipVertex {
    pub direction: Point2,
    pub vertex: Point2,
    /// Distance `d_k` at every iteration.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalRegionResult {
    pub vertices: Vec<SipVertex>,
    pub failures: Vec<(Point2, SipError)>,
    /// Hull of the converged vertices (absent with fewer than three).
    pub polygon: Option<Polygon2>,
}

/// Parameter `t` range of the line `c + t a` inside `p`, or `None` if it misses.
fn ray_interval(p: &Polygon2, c: &Point2, a: &Point2) -> Option<(f64, f64)> {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for h in p.halfspaces() {
        let na = h.normal.dot(a);
        let s = h.slack(c);
        if na.abs() < 1e-12 {
            if s < 0.0 {
                return None;
            }
        } else if na > 0.0 {
            hi = hi.min(s / na);
        } else {
            lo = lo.max(s / na);
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// Local feasible region with the base at `(c, z)`.
pub fn local_region(
    scenario: &Scenario,
    c: &Point2,
    z: f64,
    req: &RegionRequest,
) -> Result<Polygon2, SipError> {
    let com = Vector3::new(c.x, c.y, z);
    let sys = scenario.constraint_system_at(&com).map_err(|e| match e {
        ConstraintError::Kinematics { .. } => SipError::KinematicLimitHit { at: *c, reason: e.to_string() },
        other => SipError::Region(other.to_string()),
    })?;
    match compute_region(&sys, req) {
        Ok(r) => Ok(r.inner),
        Err(RegionError::NotConverged(r)) => Ok(r.inner),
        Err(RegionError::EmptyRegion | RegionError::LowerDimensional) => Err(SipError::RegionVanished { at: *c }),
        Err(e) => Err(SipError::Region(e.to_string())),
    }
}

/// Runs the SIP iteration along one direction, starting from the scenario's nominal CoM.
pub fn sip_vertex(scenario: &Scenario, req: &SipRequest, direction: Point2) -> Result<SipVertex, SipError> {
    sip_vertex_at_height(scenario, req, direction, scenario.com.z)
}

/// As [`sip_vertex`], with the base held at height `z`.
pub fn sip_vertex_at_height(
    scenario: &Scenario,
    req: &SipRequest,
    direction: Point2,
    z: f64,
) -> Result<SipVertex, SipError> {
    assert!(req.alpha > 0.0 && req.alpha <= 1.0, "alpha must lie in (0, 1]");
    let a = direction.normalize();
    let mut c = scenario.com_xy();
    let mut trace = Vec::new();
    for _ in 0..req.max_iterations {
        let region = local_region(scenario, &c, z, &req.region)?;
        let (_, t_hi) = ray_interval(&region, &c, &a).ok_or(SipError::NoIntersection { at: c })?;
        let d = t_hi.abs();
        trace.push(d);
        if d <= req.eps_d {
            return Ok(SipVertex { direction: a, vertex: c, trace });
        }
        c += a * (req.alpha * t_hi);
    }
    Err(SipError::NotConverged { iterations: req.max_iterations, last_d: trace.last().copied().unwrap_or(f64::NAN) })
}

/// SIP over every requested direction (in parallel); failures are collected, not fatal.
pub fn global_region(scenario: &Scenario, req: &SipRequest) -> GlobalRegionResult {
    global_region_at_height(scenario, req, scenario.com.z)
}

pub fn global_region_at_height(scenario: &Scenario, req: &SipRequest, z: f64) -> GlobalRegionResult {
    let outcomes: Vec<(Point2, Result<SipVertex, SipError>)> = req
        .directions
        .par_iter()
        .map(|a| (*a, sip_vertex_at_height(scenario, req, *a, z)))
        .collect();
    let mut vertices = Vec::new();
    let mut failures = Vec::new();
    for (a, r) in outcomes {
        match r {
            Ok(v) => vertices.push(v),
            Err(e) => failures.push((a, e)),
        }
    }
    let pts: Vec<Point2> = vertices.iter().map(|v| v.vertex).collect();
    let polygon = convex_hull_2d(&pts).ok();
    GlobalRegionResult { vertices, failures, polygon }
}

/// One horizontal slice of the feasible volume.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeSlice {
    pub z: f64,
    pub result: GlobalRegionResult,
}

impl VolumeSlice {
    /// Why the slice is empty, if it is: the first failure reason.
    pub fn empty_cause(&self) -> Option<&SipError> {
        if self.result.polygon.is_some() {
            None
        } else {
            self.result.failures.first().map(|(_, e)| e)
        }
    }
}

/// Global regions at several base heights, contacts fixed.
pub fn feasible_volume(scenario: &Scenario, z_levels: &[f64], req: &SipRequest) -> Vec<VolumeSlice> {
    z_levels
        .iter()
        .map(|&z| VolumeSlice { z, result: global_region_at_height(scenario, req, z) })
        .collect()
}

/// Index file mapping slice heights to CSV file names.
pub fn volume_index(slices: &[VolumeSlice], file_name: impl Fn(usize) -> String) -> String {
    let mut s = String::from("z,file,status\n");
    for (i, sl) in slices.iter().enumerate() {
        let status = match sl.empty_cause() {
            None => "ok".to_string(),
            Some(SipError::KinematicLimitHit { .. }) => "empty:kinematic_limit".to_string(),
            Some(SipError::RegionVanished { .. }) => "empty:region_vanished".to_string(),
            Some(e) => format!("empty:{}", e.to_string().replace(',', ";")),
        };
        let _ = writeln!(s, "{},{},{}", fmt_sig(sl.z), file_name(i), status);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::box_polygon;

    #[test]
    fn ray_interval_in_square() {
        let sq = box_polygon(Point2::zeros(), 1.0);
        let (lo, hi) = ray_interval(&sq, &Point2::new(0.5, 0.0), &Point2::new(1.0, 0.0)).unwrap();
        assert!((lo + 1.5).abs() < 1e-12 && (hi - 0.5).abs() < 1e-12);
        assert!(ray_interval(&sq, &Point2::new(0.0, 2.0), &Point2::new(1.0, 0.0)).is_none());
    }

    #[test]
    fn unreachable_height_is_a_kinematic_failure() {
        let s = Scenario::nominal_quadruped(0.7);
        let mut req = SipRequest::uniform(4);
        req.region.eps = 1e-4;
        let slice = &feasible_volume(&s, &[1.2], &req)[0];
        assert!(matches!(slice.empty_cause(), Some(SipError::KinematicLimitHit { .. })));
    }

    #[test]
    fn sip_converges_along_x() {
        let s = Scenario::nominal_quadruped(0.7);
        let req = SipRequest::uniform(1);
        let v = sip_vertex(&s, &req, Point2::new(1.0, 0.0)).unwrap();
        assert!(*v.trace.last().unwrap() <= 1e-3);
        assert!(v.trace.len() <= 50);
        assert!(v.vertex.x > 0.0);
    }
}
