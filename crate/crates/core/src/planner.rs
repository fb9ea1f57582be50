//! CoM-target selection, foothold selection and a quasi-static crawl.
//!
//! The crawl moves one leg at a time. Before each swing the base is moved
//! to a target inside the (scaled) region of the upcoming triple stance;
//! the swing leg then lands on the candidate foothold whose next triple
//! stance has the largest feasible region. Everything is kinematic: the
//! base travels between targets on cubic time profiles and the joint
//! torques of each triple stance come from [`force_distribution`].

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, Vector2, Vector3};
use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use crate::constraints::{stance_limbs, ConstraintError, ConstraintSystem, Contact, ContactMode};
use crate::geometry::{fmt_sig, scale_polygon, Point2, Polygon2, ScalePivot};
use crate::model::RobotModel;
use crate::optim::{self, chebyshev_margin, closest_point_in_polygon, LinearProgram, LpStatus};
use crate::region::{compute_region, torque_recovery, ConstraintMode, RegionError, RegionRequest};
use crate::scenario::Scenario;
use crate::terrain::{HeightMap, STEP_THRESHOLD};

/// Offset of the heuristic future CoM from the stance diagonal, m.
pub const DIAGONAL_OFFSET: f64 = 0.06;
/// Spacing of foothold candidates along the motion direction, m.
pub const CANDIDATE_SPACING: f64 = 0.04;
/// Candidates on steeper terrain are discarded, degrees.
pub const MAX_SLOPE_DEG: f64 = 40.0;
/// Candidates closer than this to a height step are discarded, m.
pub const EDGE_MARGIN: f64 = 0.06;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("region is empty")]
    EmptyRegion,
    #[error("no candidate foothold survived filtering")]
    NoFeasibleFoothold,
    #[error("no force distribution balances the robot at this CoM")]
    Infeasible,
    #[error("kinematics: {0}")]
    Kinematics(String),
    #[error("region: {0}")]
    Region(String),
    #[error("{0}")]
    Invalid(String),
}

impl From<ConstraintError> for PlanError {
    fn from(e: ConstraintError) -> Self {
        match e {
            ConstraintError::Kinematics { .. } => PlanError::Kinematics(e.to_string()),
            other => PlanError::Invalid(other.to_string()),
        }
    }
}

impl From<RegionError> for PlanError {
    fn from(e: RegionError) -> Self {
        match e {
            RegionError::EmptyRegion | RegionError::LowerDimensional => PlanError::EmptyRegion,
            other => PlanError::Region(other.to_string()),
        }
    }
}

/// Which region the CoM target must stay in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    FrictionBased,
    FeasibleBased,
}

impl Strategy {
    pub fn mode(self) -> ConstraintMode {
        match self {
            Strategy::FrictionBased => ConstraintMode::FrictionOnly,
            Strategy::FeasibleBased => ConstraintMode::FrictionAndActuation,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::FrictionBased => "friction",
            Strategy::FeasibleBased => "feasible",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "friction" | "friction_based" => Ok(Self::FrictionBased),
            "feasible" | "feasible_based" => Ok(Self::FeasibleBased),
            _ => Err(format!("unknown strategy `{s}`")),
        }
    }
}

/// Region evaluated with the stance limbs at the configuration reached when
/// the base sits at `jacobian_com`; returns the inner polygon.
pub fn stance_region(
    robot: &RobotModel,
    mass: f64,
    stance: &[Contact],
    jacobian_com: &Vector3<f64>,
    req: &RegionRequest,
) -> Result<Polygon2, PlanError> {
    let sys = ConstraintSystem::for_stance(robot, stance.to_vec(), mass, jacobian_com)?;
    match compute_region(&sys, req) {
        Ok(r) => Ok(r.inner),
        Err(RegionError::NotConverged(r)) => Ok(r.inner),
        Err(e) => Err(e.into()),
    }
}

/// Heuristic CoM for a triple stance: the triangle centroid shifted
/// [`DIAGONAL_OFFSET`] away from the longest side (the diagonal) towards the
/// opposite foot. For other stance sizes, the plain centroid.
pub fn heuristic_com(stance: &[Vector3<f64>]) -> Point2 {
    let n = stance.len();
    let centroid = stance.iter().fold(Point2::zeros(), |acc, p| acc + p.xy()) / n as f64;
    if n != 3 {
        return centroid;
    }
    let pairs = [(0, 1, 2), (1, 2, 0), (0, 2, 1)];
    let &(i, j, k) = pairs
        .iter()
        .max_by(|a, b| {
            let da = (stance[a.0] - stance[a.1]).xy().norm();
            let db = (stance[b.0] - stance[b.1]).xy().norm();
            da.total_cmp(&db)
        })
        .expect("three pairs");
    let (a, b, off) = (stance[i].xy(), stance[j].xy(), stance[k].xy());
    let d = (b - a).normalize();
    let mut perp = Point2::new(-d.y, d.x);
    if perp.dot(&(off - a)) < 0.0 {
        perp = -perp;
    }
    centroid + perp * DIAGONAL_OFFSET
}

/// A CoM target and the region it was chosen in.
#[derive(Debug, Clone, PartialEq)]
pub struct ComTarget {
    pub target: Point2,
    /// Region before scaling.
    pub region: Polygon2,
    /// Region scaled about its vertex centroid by `s`.
    pub scaled: Polygon2,
    /// False when the current CoM already lay inside the scaled region.
    pub moved: bool,
}

/// Keeps `current` if it lies in the scaled region, otherwise projects it onto that region.
pub fn select_com_target(region: Polygon2, current: &Point2, s: f64) -> Result<ComTarget, PlanError> {
    let scaled = scale_polygon(&region, s, ScalePivot::Centroid);
    let target = closest_point_in_polygon(&scaled, current).map_err(|_| PlanError::EmptyRegion)?;
    let moved = target != *current;
    Ok(ComTarget { target, region, scaled, moved })
}

/// Region of `stance` (per `mode`, Jacobians at `jacobian_com`) followed by [`select_com_target`].
#[allow(clippy::too_many_arguments)]
pub fn com_target(
    robot: &RobotModel,
    mass: f64,
    stance: &[Contact],
    current: &Point2,
    jacobian_com: &Vector3<f64>,
    s: f64,
    mode: ConstraintMode,
    req: &RegionRequest,
) -> Result<ComTarget, PlanError> {
    if stance.len() < 3 {
        return Err(PlanError::Invalid("a stance needs at least three contacts".into()));
    }
    if !(s > 0.0 && s <= 1.0) {
        return Err(PlanError::Invalid(format!("scale factor must lie in (0, 1], got {s}")));
    }
    let req = RegionRequest { mode, ..*req };
    let region = stance_region(robot, mass, stance, jacobian_com, &req)?;
    select_com_target(region, current, s)
}

/// Contact forces with the smallest worst-case normalized joint torque.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceDistribution {
    /// Stacked contact forces, N.
    pub forces: DVector<f64>,
    /// `max_j |tau_j| / tau_lim_j` over all stance joints.
    pub peak_ratio: f64,
    /// Joint torques per contact, N·m.
    pub torques: Vec<Vector3<f64>>,
    /// `min_j (tau_lim_j - |tau_j|)`, N·m.
    pub margin: f64,
    /// Some torque exceeds its limit.
    pub beta: bool,
}

/// Solves `min t` over forces balancing the robot at `c`, with every
/// `|tau_j| / tau_lim_j <= t`, friction (unless `ActuationOnly`) and, when
/// actuation is part of `mode`, `t <= 1`. A second LP picks, among the
/// optimal distributions, the one with the smallest sum of normalized
/// torques, which makes symmetric stances load symmetrically.
pub fn force_distribution(sys: &ConstraintSystem, c: &Point2, mode: ConstraintMode) -> Result<ForceDistribution, PlanError> {
    if sys.polytopes.is_empty() {
        return Err(PlanError::Invalid("force distribution needs limb configurations".into()));
    }
    let nc = sys.num_contacts();
    let nf = 3 * nc;
    let w = sys.weight();
    let nj = 3 * nc;
    // variables: f/W (nf), t, s_j (nj)
    let n = nf + 1 + nj;
    let cv = DVector::from_column_slice(c.as_slice());
    let mut a = DMatrix::zeros(6, n);
    a.view_mut((0, 0), (6, nf)).copy_from(&sys.a1);
    let b = (&sys.u - &sys.a2 * cv) / w;

    let fr = if mode == ConstraintMode::ActuationOnly { 0 } else { sys.friction.nrows() };
    let rows = fr + 4 * nj;
    let mut ci = DMatrix::zeros(rows, n);
    let mut d = DVector::zeros(rows);
    if fr > 0 {
        ci.view_mut((0, 0), (fr, nf)).copy_from(&sys.friction);
    }
    let mut r = fr;
    for (i, p) in sys.polytopes.iter().enumerate() {
        let jt = p.jacobian.transpose();
        for j in 0..3 {
            let k = 3 * i + j;
            let scale = w / p.torque_limits[j];
            let g = p.gravity_torque[j] / p.torque_limits[j];
            // tau/lim = g - scale * (J^T f)_j ; bound by t and by s_k
            for col in [r, r + 2] {
                for m in 0..3 {
                    ci[(col, 3 * i + m)] = -scale * jt[(j, m)];
                    ci[(col + 1, 3 * i + m)] = scale * jt[(j, m)];
                }
            }
            ci[(r, nf)] = -1.0;
            ci[(r + 1, nf)] = -1.0;
            d[r] = -g;
            d[r + 1] = g;
            ci[(r + 2, nf + 1 + k)] = -1.0;
            ci[(r + 3, nf + 1 + k)] = -1.0;
            d[r + 2] = -g;
            d[r + 3] = g;
            r += 4;
        }
    }
    let mut bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); n];
    let t_hi = if mode == ConstraintMode::FrictionOnly { f64::INFINITY } else { 1.0 };
    bounds[nf] = (0.0, t_hi);
    for bnd in bounds.iter_mut().skip(nf + 1) {
        *bnd = (0.0, f64::INFINITY);
    }

    let mut obj = DVector::zeros(n);
    obj[nf] = -1.0;
    let mut lp = LinearProgram::new(obj).with_equalities(a, b).with_inequalities(ci, d).with_bounds(bounds);
    let first = optim::solve_lp(&lp).map_err(|e| PlanError::Region(e.to_string()))?;
    if first.status != LpStatus::Optimal {
        return Err(PlanError::Infeasible);
    }
    let t_star = first.x[nf];
    lp.bounds[nf] = (0.0, t_star + 1e-9 * (1.0 + t_star));
    let mut obj2 = DVector::zeros(n);
    for k in 0..nj {
        obj2[nf + 1 + k] = -1.0;
    }
    lp.objective = obj2;
    let second = optim::solve_lp(&lp).map_err(|e| PlanError::Region(e.to_string()))?;
    let x = if second.status == LpStatus::Optimal { second.x } else { first.x };

    let forces = x.rows(0, nf) * w;
    let check = torque_recovery(sys, c, &forces).expect("polytopes present");
    let peak_ratio = sys
        .polytopes
        .iter()
        .zip(&check.torques)
        .flat_map(|(p, tau)| (0..3).map(move |j| tau[j].abs() / p.torque_limits[j]))
        .fold(0.0, f64::max);
    Ok(ForceDistribution {
        forces,
        peak_ratio,
        torques: check.torques,
        margin: check.margin,
        beta: check.beta,
    })
}

/// Worst-case torque margin `min_j (tau_lim_j - |tau_j|)`.
pub fn torque_margin(torques: &[f64], limits: &[f64]) -> f64 {
    torques
        .iter()
        .zip(limits)
        .map(|(t, l)| l - t.abs())
        .fold(f64::INFINITY, f64::min)
}

/// Why a foothold candidate was dropped.
#[derive(Debug, Clone, PartialEq)]
pub enum Rejection {
    OffMap,
    TooSteep(f64),
    NearEdge(f64),
    Unreachable(String),
    EmptyRegion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub position: Vector3<f64>,
    pub normal: Vector3<f64>,
    /// Area of the next stance's feasible region, or why it was skipped.
    pub outcome: Result<f64, Rejection>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FootholdPlan {
    pub chosen: usize,
    pub default_index: Option<usize>,
    pub candidates: Vec<Candidate>,
}

impl FootholdPlan {
    pub fn foothold(&self) -> Vector3<f64> {
        self.candidates[self.chosen].position
    }
}

/// Inputs of one foothold decision.
#[derive(Debug, Clone)]
pub struct FootholdQuery<'a> {
    pub robot: &'a RobotModel,
    pub mass: f64,
    /// Current contact of every leg, indexed by leg.
    pub feet: &'a [Contact],
    pub swing: usize,
    /// Legs supporting the robot once the swing foot has landed and the next leg lifts.
    pub next_stance: &'a [usize],
    pub default_xy: Point2,
    /// Unit motion direction.
    pub direction: Point2,
    pub samples: usize,
    /// Base height above the mean foot height, m.
    pub base_height: f64,
    /// Base pose while the leg swings; candidates must be reachable from it.
    pub swing_base: Vector3<f64>,
    pub region: RegionRequest,
}

fn mean_height(feet: &[Vector3<f64>]) -> f64 {
    feet.iter().map(|p| p.z).sum::<f64>() / feet.len() as f64
}

/// Samples `p` candidates around the default foothold along the motion
/// direction, filters them against the terrain and kinematics, and keeps
/// the one whose next triple stance has the largest feasible region.
/// Ties (within `2 eps`) prefer the default foothold, then the lowest index.
pub fn plan_foothold(q: &FootholdQuery, map: &HeightMap) -> Result<FootholdPlan, PlanError> {
    if q.samples == 0 {
        return Err(PlanError::Invalid("need at least one candidate".into()));
    }
    let half = (q.samples as f64 - 1.0) / 2.0;
    let default_index = (q.samples % 2 == 1).then_some(q.samples / 2);
    let swing_contact = &q.feet[q.swing];
    let prepared: Vec<Result<(Vector3<f64>, Vector3<f64>), (Vector3<f64>, Rejection)>> = (0..q.samples)
        .map(|k| {
            let xy = q.default_xy + q.direction * ((k as f64 - half) * CANDIDATE_SPACING);
            let Ok((z, n)) = map.sample(xy.x, xy.y) else {
                return Err((Vector3::new(xy.x, xy.y, f64::NAN), Rejection::OffMap));
            };
            let p = Vector3::new(xy.x, xy.y, z);
            let slope = n.z.clamp(-1.0, 1.0).acos().to_degrees();
            if slope > MAX_SLOPE_DEG {
                return Err((p, Rejection::TooSteep(slope)));
            }
            if let Some(dist) = map.distance_to_step(xy.x, xy.y, STEP_THRESHOLD, EDGE_MARGIN) {
                if dist < EDGE_MARGIN {
                    return Err((p, Rejection::NearEdge(dist)));
                }
            }
            Ok((p, n))
        })
        .collect();

    let evaluate = |p: &Vector3<f64>, n: &Vector3<f64>| -> Result<f64, Rejection> {
        let landed = Contact::new(*p, *n, swing_contact.mu, swing_contact.mode)
            .map_err(Rejection::Unreachable)?
            .with_leg(q.swing);
        let mut all: Vec<Vector3<f64>> = q.feet.iter().map(|c| c.position).collect();
        all[q.swing] = *p;
        let stance: Vec<Contact> = q
            .next_stance
            .iter()
            .map(|&leg| if leg == q.swing { landed.clone() } else { q.feet[leg].clone() })
            .collect();
        let pts: Vec<Vector3<f64>> = stance.iter().map(|c| c.position).collect();
        let com_xy = heuristic_com(&pts);
        let com = Vector3::new(com_xy.x, com_xy.y, mean_height(&all) + q.base_height);
        q.robot
            .leg_ik(q.swing, &q.swing_base, p)
            .map_err(|e| Rejection::Unreachable(e.to_string()))?;
        let req = RegionRequest { mode: ConstraintMode::FrictionAndActuation, ..q.region };
        match stance_region(q.robot, q.mass, &stance, &com, &req) {
            Ok(poly) => Ok(poly.area()),
            Err(PlanError::EmptyRegion) => Err(Rejection::EmptyRegion),
            Err(e) => Err(Rejection::Unreachable(e.to_string())),
        }
    };

    let candidates: Vec<Candidate> = prepared
        .par_iter()
        .map(|prep| match prep {
            Ok((p, n)) => Candidate { position: *p, normal: *n, outcome: evaluate(p, n) },
            Err((p, why)) => Candidate { position: *p, normal: Vector3::z(), outcome: Err(why.clone()) },
        })
        .collect();

    let best = candidates
        .iter()
        .filter_map(|c| c.outcome.as_ref().ok().copied())
        .fold(f64::NEG_INFINITY, f64::max);
    if best == f64::NEG_INFINITY {
        return Err(PlanError::NoFeasibleFoothold);
    }
    let tied = |i: usize| matches!(candidates[i].outcome, Ok(a) if a >= best - 2.0 * q.region.eps);
    let chosen = match default_index {
        Some(d) if tied(d) => d,
        _ => (0..candidates.len()).find(|&i| tied(i)).expect("best candidate exists"),
    };
    Ok(FootholdPlan { chosen, default_index, candidates })
}

/// Gait timing and leg order of a crawl.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaitSchedule {
    /// Swing order by leg name, repeated cyclically.
    pub sequence: Vec<String>,
    pub swing_duration: f64,
    pub move_base_duration: f64,
    /// Number of swing phases.
    pub steps: usize,
    /// Desired planar base velocity, m/s.
    pub velocity: [f64; 2],
    /// Foothold candidates per step.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Region scaling factor `s`; falls back to the scenario's value.
    pub scale: Option<f64>,
}

fn default_samples() -> usize {
    9
}

impl GaitSchedule {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        let de = toml::Deserializer::parse(text).map_err(|e| e.to_string())?;
        let s: GaitSchedule = serde_path_to_error::deserialize(de).map_err(|e| format!("{}: {}", e.path(), e.inner().message()))?;
        if s.sequence.is_empty() {
            return Err("sequence: at least one leg".into());
        }
        if !(s.swing_duration > 0.0 && s.move_base_duration > 0.0) {
            return Err("durations must be positive".into());
        }
        Ok(s)
    }

    /// Time for every leg in the sequence to swing once.
    pub fn cycle_time(&self) -> f64 {
        self.sequence.len() as f64 * (self.swing_duration + self.move_base_duration)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseKind {
    MoveBase,
    Swing,
    Aborted,
}

impl PhaseKind {
    pub fn name(self) -> &'static str {
        match self {
            PhaseKind::MoveBase => "move_base",
            PhaseKind::Swing => "swing",
            PhaseKind::Aborted => "aborted",
        }
    }
}

/// One logged phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRecord {
    /// Phase start time, s.
    pub time: f64,
    pub duration: f64,
    pub kind: PhaseKind,
    pub swing_leg: String,
    /// Stance legs during the phase.
    pub stance: Vec<String>,
    /// Base position at the start and end of the phase.
    pub com_start: Vector3<f64>,
    pub com_end: Vector3<f64>,
    /// Region the CoM target was selected in (scaled), for move-base phases.
    pub target_region: Option<Polygon2>,
    pub area_friction: Option<f64>,
    pub area_feasible: Option<f64>,
    /// Chebyshev margin of the base in the triple stance's feasible region, m.
    pub margin: Option<f64>,
    /// Torque margin `m_tau`, N·m.
    pub torque_margin: Option<f64>,
    pub beta: Option<bool>,
    pub foothold: Option<Vector3<f64>>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanLog {
    pub strategy: Strategy,
    pub records: Vec<PhaseRecord>,
}

/// Smooth cubic blend from `a` to `b` with zero end velocities, `s` in `[0, 1]`.
pub fn cubic_blend(a: &Vector3<f64>, b: &Vector3<f64>, s: f64) -> Vector3<f64> {
    let s = s.clamp(0.0, 1.0);
    a + (b - a) * (3.0 * s * s - 2.0 * s * s * s)
}

impl PlanLog {
    /// Minimum torque margin over all triple-stance phases.
    pub fn min_torque_margin(&self) -> Option<f64> {
        self.records
            .iter()
            .filter_map(|r| r.torque_margin)
            .fold(None, |acc, m| Some(acc.map_or(m, |a: f64| a.min(m))))
    }

    pub fn footholds(&self) -> Vec<Vector3<f64>> {
        self.records.iter().filter_map(|r| r.foothold).collect()
    }

    /// Base position at time `t` along the logged cubic paths.
    pub fn base_position(&self, t: f64) -> Option<Vector3<f64>> {
        let first = self.records.first()?;
        if t <= first.time {
            return Some(first.com_start);
        }
        for r in &self.records {
            if t <= r.time + r.duration {
                return Some(cubic_blend(&r.com_start, &r.com_end, (t - r.time) / r.duration));
            }
        }
        self.records.last().map(|r| r.com_end)
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt_sig).unwrap_or_default();
        let mut s = String::from(
            "time,phase,swing_leg,com_x,com_y,com_z,r,m_tau,beta,area_friction,area_feasible,foot_x,foot_y,foot_z\n",
        );
        for r in &self.records {
            let foot = r.foothold.map(|p| [p.x, p.y, p.z]);
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                fmt_sig(r.time),
                r.kind.name(),
                r.swing_leg,
                fmt_sig(r.com_end.x),
                fmt_sig(r.com_end.y),
                fmt_sig(r.com_end.z),
                opt(r.margin),
                opt(r.torque_margin),
                r.beta.map(|b| if b { "1" } else { "0" }).unwrap_or(""),
                opt(r.area_friction),
                opt(r.area_feasible),
                opt(foot.map(|f| f[0])),
                opt(foot.map(|f| f[1])),
                opt(foot.map(|f| f[2])),
            );
        }
        s
    }
}

/// Options of a crawl run beyond the schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrawlOptions {
    pub strategy: Strategy,
    pub scale: f64,
    pub region: RegionRequest,
}

/// Triple-stance evaluation at the actual base pose: feasible-region margin,
/// minimal-peak torque distribution under friction only, `m_tau` and `beta`.
pub struct StanceEvaluation {
    pub margin: f64,
    pub area_friction: f64,
    pub area_feasible: f64,
    pub torque_margin: f64,
    pub beta: bool,
}

pub fn evaluate_stance(
    robot: &RobotModel,
    mass: f64,
    stance: &[Contact],
    com: &Vector3<f64>,
    req: &RegionRequest,
) -> Result<StanceEvaluation, PlanError> {
    let sys = ConstraintSystem::for_stance(robot, stance.to_vec(), mass, com)?;
    let area_of = |mode| -> Result<Option<Polygon2>, PlanError> {
        match compute_region(&sys, &RegionRequest { mode, ..*req }) {
            Ok(r) => Ok(Some(r.inner)),
            Err(RegionError::NotConverged(r)) => Ok(Some(r.inner)),
            Err(RegionError::EmptyRegion | RegionError::LowerDimensional) => Ok(None),
            Err(e) => Err(e.into()),
        }
    };
    let fr = area_of(ConstraintMode::FrictionOnly)?;
    let fa = area_of(ConstraintMode::FrictionAndActuation)?;
    let c = com.xy();
    let margin = fa.as_ref().map_or(f64::NEG_INFINITY, |p| chebyshev_margin(p, &c));
    let (torque_margin, beta) = match force_distribution(&sys, &c, ConstraintMode::FrictionOnly) {
        Ok(fd) => (fd.margin, fd.beta),
        Err(PlanError::Infeasible) => (f64::NEG_INFINITY, true),
        Err(e) => return Err(e),
    };
    Ok(StanceEvaluation {
        margin,
        area_friction: fr.map_or(0.0, |p| p.area()),
        area_feasible: fa.map_or(0.0, |p| p.area()),
        torque_margin,
        beta,
    })
}

/// Runs a kinematic crawl over `map`, starting from the scenario's contacts
/// (one per leg, in leg order) and nominal CoM.
pub fn crawl_simulate(
    scenario: &Scenario,
    schedule: &GaitSchedule,
    map: &HeightMap,
    opts: &CrawlOptions,
) -> Result<PlanLog, PlanError> {
    let robot = &scenario.robot;
    let nl = robot.legs.len();
    let mut feet: Vec<Contact> = Vec::with_capacity(nl);
    for leg in 0..nl {
        let c = scenario
            .contacts
            .iter()
            .find(|c| c.leg == Some(leg))
            .ok_or_else(|| PlanError::Invalid(format!("no contact for leg {}", robot.legs[leg].name)))?;
        feet.push(c.clone());
    }
    let sequence: Vec<usize> = schedule
        .sequence
        .iter()
        .map(|n| robot.leg_index(n).map_err(|e| PlanError::Invalid(e.to_string())))
        .collect::<Result<_, _>>()?;
    let positions = |feet: &[Contact]| feet.iter().map(|c| c.position).collect::<Vec<_>>();
    let base_height = scenario.com.z - mean_height(&positions(&feet));
    let velocity = Vector2::new(schedule.velocity[0], schedule.velocity[1]);
    let step = velocity * schedule.cycle_time();
    let direction = if velocity.norm() > 0.0 { velocity.normalize() } else { Point2::x() };
    let names = |legs: &[usize]| legs.iter().map(|&l| robot.legs[l].name.clone()).collect::<Vec<_>>();

    let mut com = scenario.com;
    let phase_time = schedule.swing_duration + schedule.move_base_duration;
    let mut time = 0.0;
    let mut records = Vec::new();
    for k in 0..schedule.steps {
        let swing = sequence[k % sequence.len()];
        let next_swing = sequence[(k + 1) % sequence.len()];
        let stance_legs: Vec<usize> = (0..nl).filter(|&l| l != swing).collect();
        let stance: Vec<Contact> = stance_legs.iter().map(|&l| feet[l].clone()).collect();
        let stance_pts: Vec<Vector3<f64>> = stance.iter().map(|c| c.position).collect();
        let heur = heuristic_com(&stance_pts);
        let z = mean_height(&positions(&feet)) + base_height;
        let jac_com = Vector3::new(heur.x, heur.y, z);

        // move the base into the upcoming triple stance's region
        let start = com;
        let mut rec = PhaseRecord {
            time,
            duration: schedule.move_base_duration,
            kind: PhaseKind::MoveBase,
            swing_leg: robot.legs[swing].name.clone(),
            stance: names(&stance_legs),
            com_start: start,
            com_end: start,
            target_region: None,
            area_friction: None,
            area_feasible: None,
            margin: None,
            torque_margin: None,
            beta: None,
            foothold: None,
            note: String::new(),
        };
        // base position the velocity command asks for; the region check corrects it
        let commanded = com.xy() + velocity * phase_time;
        match com_target(robot, scenario.mass, &stance, &commanded, &jac_com, opts.scale, opts.strategy.mode(), &opts.region) {
            Ok(t) => {
                com = Vector3::new(t.target.x, t.target.y, z);
                rec.target_region = Some(t.scaled);
            }
            Err(e) => {
                rec.kind = PhaseKind::Aborted;
                rec.note = format!("CoM target: {e}; using heuristic");
                com = jac_com;
            }
        }
        rec.com_end = com;
        records.push(rec);
        time += schedule.move_base_duration;

        // swing: evaluate the triple stance, then land on the planned foothold
        let mut rec = PhaseRecord {
            time,
            duration: schedule.swing_duration,
            kind: PhaseKind::Swing,
            swing_leg: robot.legs[swing].name.clone(),
            stance: names(&stance_legs),
            com_start: com,
            com_end: com,
            target_region: None,
            area_friction: None,
            area_feasible: None,
            margin: None,
            torque_margin: None,
            beta: None,
            foothold: None,
            note: String::new(),
        };
        match evaluate_stance(robot, scenario.mass, &stance, &com, &opts.region) {
            Ok(ev) => {
                rec.margin = Some(ev.margin);
                rec.torque_margin = Some(ev.torque_margin);
                rec.beta = Some(ev.beta);
                rec.area_friction = Some(ev.area_friction);
                rec.area_feasible = Some(ev.area_feasible);
            }
            Err(e) => {
                rec.kind = PhaseKind::Aborted;
                rec.note = format!("stance evaluation: {e}");
            }
        }
        let next_stance: Vec<usize> = (0..nl).filter(|&l| l != next_swing).collect();
        let default = feet[swing].position.xy() + step;
        let query = FootholdQuery {
            robot,
            mass: scenario.mass,
            feet: &feet,
            swing,
            next_stance: &next_stance,
            default_xy: default,
            direction,
            samples: schedule.samples,
            base_height,
            swing_base: com,
            region: opts.region,
        };
        let landing = match plan_foothold(&query, map) {
            Ok(plan) => {
                let c = &plan.candidates[plan.chosen];
                Some((c.position, c.normal))
            }
            Err(e) => {
                // fall back to the default foothold snapped to the map
                rec.note = format!("foothold: {e}; using default");
                map.sample(default.x, default.y).ok().map(|(z, n)| (Vector3::new(default.x, default.y, z), n))
            }
        };
        if let Some((p, n)) = landing {
            let old = &feet[swing];
            let mode = if old.mode == ContactMode::Bilateral { ContactMode::Bilateral } else { ContactMode::Unilateral };
            feet[swing] = Contact::new(p, n, old.mu, mode).map_err(PlanError::Invalid)?.with_leg(swing);
            rec.foothold = Some(p);
        } else if rec.note.is_empty() {
            rec.note = "default foothold off the map".into();
        }
        records.push(rec);
        time += schedule.swing_duration;
    }
    Ok(PlanLog { strategy: opts.strategy, records })
}

/// Limb states of a stance at base `com` (re-exported for callers that need configurations).
pub fn stance_configuration(robot: &RobotModel, stance: &[Contact], com: &Vector3<f64>) -> Result<Vec<crate::constraints::LimbState>, PlanError> {
    Ok(stance_limbs(robot, stance, com)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::box_polygon;

    #[test]
    fn torque_margin_formula() {
        let m = torque_margin(&[50.0, -30.0, 149.0], &[150.0, 150.0, 150.0]);
        assert!((m - 1.0).abs() < 1e-12);
    }

    #[test]
    fn target_keeps_inside_point() {
        let region = box_polygon(Point2::zeros(), 1.0);
        let t = select_com_target(region, &Point2::zeros(), 0.8).unwrap();
        assert_eq!(t.target, Point2::zeros());
        assert!(!t.moved);
    }

    #[test]
    fn target_projects_outside_point() {
        let region = box_polygon(Point2::zeros(), 1.0);
        let c = Point2::new(0.95, 0.0);
        let t = select_com_target(region, &c, 0.8).unwrap();
        assert!((t.target - Point2::new(0.8, 0.0)).norm() < 1e-12);
        assert!(optim::is_projection_certified(&t.scaled, &c, &t.target, 1e-7));
    }

    #[test]
    fn heuristic_com_moves_toward_off_diagonal_leg() {
        // LF swings: stance RF, LH, RH; diagonal RF-LH, off-diagonal RH
        let pts = [
            Vector3::new(0.37, -0.21, 0.0),
            Vector3::new(-0.37, 0.21, 0.0),
            Vector3::new(-0.37, -0.21, 0.0),
        ];
        let h = heuristic_com(&pts);
        let centroid = Point2::new(-0.37 / 3.0, -0.21 / 3.0);
        assert!(((h - centroid).norm() - DIAGONAL_OFFSET).abs() < 1e-12);
        assert!(h.x < centroid.x && h.y < centroid.y);
    }

    #[test]
    fn schedule_parses() {
        let s = GaitSchedule::from_toml(
            "sequence = [\"LH\", \"LF\", \"RH\", \"RF\"]\nswing_duration = 0.5\nmove_base_duration = 0.5\nsteps = 4\nvelocity = [0.05, 0.0]\n",
        )
        .unwrap();
        assert_eq!(s.samples, 9);
        assert!((s.cycle_time() - 4.0).abs() < 1e-12);
    }
}
