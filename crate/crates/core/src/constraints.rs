//! Constraint blocks of the static equilibrium problem.
//!
//! Unknowns are the contact forces `f = [f_1; ...; f_nc]` (ground on robot,
//! world frame, N) and the horizontal CoM `c = (c_x, c_y)`. The blocks are
//!
//! - equilibrium `A1 f + A2 c = u` (forces, then moments about the world origin),
//! - friction pyramids `B f <= 0` (unilateral contacts only),
//! - actuation `G f <= d` with `G_i = [J_i^T; -J_i^T]` and
//!   `d_i = [g(q_i) + tau_lim; tau_lim - g(q_i)]`, i.e. the joint torques
//!   `tau_i = g(q_i) - J_i^T f_i` stay inside the symmetric limits.

use log::warn;
use nalgebra::{DMatrix, DVector, Matrix3, Matrix6x3, Vector3, Vector6};
use thiserror::Error;

use crate::model::{condition_number, ModelError, RobotModel};

/// Jacobians with a larger condition number are reported as singular.
pub const SINGULAR_CONDITION: f64 = 1e8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstraintError {
    #[error("contact {index}: {message}")]
    InvalidContact { index: usize, message: String },
    #[error("contact {contact} (leg {leg}): {source}")]
    Kinematics {
        contact: usize,
        leg: String,
        #[source]
        source: ModelError,
    },
    #[error("contact {0} has no leg assigned; actuation constraints need one")]
    MissingLeg(usize),
    #[error("at least one contact is required")]
    NoContacts,
    #[error("invalid parameter: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ContactMode {
    /// Ground can only push; friction pyramid applies.
    Unilateral,
    /// Grasp-like contact; only actuation limits apply.
    Bilateral,
}

/// Point contact with a right-handed frame `{t1, t2, n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Contact {
    pub position: Vector3<f64>,
    pub normal: Vector3<f64>,
    pub t1: Vector3<f64>,
    pub t2: Vector3<f64>,
    pub mu: f64,
    pub mode: ContactMode,
    /// Index of the robot leg touching this point, if any.
    pub leg: Option<usize>,
}

impl Contact {
    /// Normalizes `normal` and derives the tangents deterministically:
    /// `t1 = normalize(n × z)` (or `x` when `n` is nearly vertical), `t2 = n × t1`.
    pub fn new(position: Vector3<f64>, normal: Vector3<f64>, mu: f64, mode: ContactMode) -> Result<Self, String> {
        let norm = normal.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err("normal must be a finite nonzero vector".into());
        }
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(format!("friction coefficient must be finite and >= 0, got {mu}"));
        }
        if mode == ContactMode::Unilateral && mu <= 0.0 {
            return Err("unilateral contacts need mu > 0".into());
        }
        let n = normal / norm;
        let t1 = tangent_from_normal(&n);
        let t2 = n.cross(&t1);
        Ok(Self { position, normal: n, t1, t2, mu, mode, leg: None })
    }

    /// Unilateral contact with a vertical normal.
    pub fn flat(position: Vector3<f64>, mu: f64) -> Self {
        Self::new(position, Vector3::z(), mu, ContactMode::Unilateral).expect("valid flat contact")
    }

    pub fn with_leg(mut self, leg: usize) -> Self {
        self.leg = Some(leg);
        self
    }

    /// Whether `f` lies inside the linearized friction pyramid (always true for bilateral contacts).
    pub fn friction_ok(&self, f: &Vector3<f64>, tol: f64) -> bool {
        match self.mode {
            ContactMode::Bilateral => true,
            ContactMode::Unilateral => friction_rows(self).iter().all(|r| r.dot(f) <= tol),
        }
    }
}

fn tangent_from_normal(n: &Vector3<f64>) -> Vector3<f64> {
    let c = n.cross(&Vector3::z());
    if c.norm() < 1e-6 {
        Vector3::x()
    } else {
        c.normalize()
    }
}

/// `[p]×`, so that `skew(p) f = p × f`.
pub fn skew(p: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -p.z, p.y, p.z, 0.0, -p.x, -p.y, p.x, 0.0)
}

fn friction_rows(c: &Contact) -> [Vector3<f64>; 4] {
    let mn = c.normal * c.mu;
    [c.t1 - mn, c.t2 - mn, -(c.t1 + mn), -(c.t2 + mn)]
}

/// Equilibrium blocks `(A1, A2, u)`.
///
/// Rows 0..3 balance forces, rows 3..6 balance moments about the world origin.
/// Gravity is `(0, 0, -g)`, so `A2 = [0; -m [g]× P^T]` reduces to
/// `[[0,0],[0,0],[0,0],[0,-mg],[mg,0],[0,0]]` and `u = (0, 0, mg, 0, 0, 0)`.
pub fn build_grasp(contacts: &[Contact], mass: f64, gravity: f64) -> (DMatrix<f64>, DMatrix<f64>, DVector<f64>) {
    let nc = contacts.len();
    let mut a1 = DMatrix::zeros(6, 3 * nc);
    for (i, c) in contacts.iter().enumerate() {
        a1.fixed_view_mut::<3, 3>(0, 3 * i).copy_from(&Matrix3::identity());
        a1.fixed_view_mut::<3, 3>(3, 3 * i).copy_from(&skew(&c.position));
    }
    let w = mass * gravity;
    let mut a2 = DMatrix::zeros(6, 2);
    a2[(3, 1)] = -w;
    a2[(4, 0)] = w;
    let mut u = DVector::zeros(6);
    u[2] = w;
    (a1, a2, u)
}

/// Friction pyramid rows, four per unilateral contact, over all `3 n_c` force components.
pub fn build_friction(contacts: &[Contact]) -> Result<DMatrix<f64>, ConstraintError> {
    let nc = contacts.len();
    let mut rows = Vec::new();
    for (i, c) in contacts.iter().enumerate() {
        if c.mode == ContactMode::Bilateral {
            continue;
        }
        if !(c.mu > 0.0) {
            return Err(ConstraintError::InvalidContact {
                index: i,
                message: "unilateral contacts need mu > 0".into(),
            });
        }
        for r in friction_rows(c) {
            rows.push((i, r));
        }
    }
    let mut b = DMatrix::zeros(rows.len(), 3 * nc);
    for (k, (i, r)) in rows.iter().enumerate() {
        for j in 0..3 {
            b[(k, 3 * i + j)] = r[j];
        }
    }
    Ok(b)
}

/// Leg configuration at which a contact's actuation constraints are evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct LimbState {
    pub leg: usize,
    pub q: Vector3<f64>,
    /// Foot position in the world frame.
    pub foot: Vector3<f64>,
}

/// Admissible contact forces of one limb: `G f <= d`.
#[derive(Debug, Clone, PartialEq)]
pub struct WrenchPolytope {
    pub g: Matrix6x3<f64>,
    pub d: Vector6<f64>,
    pub jacobian: Matrix3<f64>,
    /// Gravity torques `g(q)`, N·m.
    pub gravity_torque: Vector3<f64>,
    pub torque_limits: Vector3<f64>,
    pub condition: f64,
    pub singular: bool,
}

impl WrenchPolytope {
    pub fn new(jacobian: Matrix3<f64>, gravity_torque: Vector3<f64>, torque_limits: Vector3<f64>) -> Self {
        let jt = jacobian.transpose();
        let mut g = Matrix6x3::zeros();
        g.fixed_view_mut::<3, 3>(0, 0).copy_from(&jt);
        g.fixed_view_mut::<3, 3>(3, 0).copy_from(&(-jt));
        let mut d = Vector6::zeros();
        d.fixed_rows_mut::<3>(0).copy_from(&(gravity_torque + torque_limits));
        d.fixed_rows_mut::<3>(3).copy_from(&(torque_limits - gravity_torque));
        let condition = condition_number(&jacobian);
        Self {
            g,
            d,
            jacobian,
            gravity_torque,
            torque_limits,
            condition,
            singular: condition > SINGULAR_CONDITION,
        }
    }

    pub fn contains(&self, f: &Vector3<f64>, tol: f64) -> bool {
        (self.g * f - self.d).iter().all(|v| *v <= tol)
    }

    /// Joint torques balancing contact force `f`: `tau = g(q) - J^T f`.
    pub fn torques(&self, f: &Vector3<f64>) -> Vector3<f64> {
        self.gravity_torque - self.jacobian.transpose() * f
    }

    /// The eight force vertices `J^-T (g(q) - tau_k)` over torque-box corners,
    /// or `None` when the Jacobian is singular.
    pub fn vertices(&self) -> Option<Vec<Vector3<f64>>> {
        if self.singular {
            return None;
        }
        let jt_inv = self.jacobian.transpose().try_inverse()?;
        Some(
            (0..8)
                .map(|mask| {
                    let tau = Vector3::from_fn(|j, _| {
                        if mask >> j & 1 == 1 { self.torque_limits[j] } else { -self.torque_limits[j] }
                    });
                    jt_inv * (self.gravity_torque - tau)
                })
                .collect(),
        )
    }
}

/// Block-diagonal actuation constraints and the per-limb polytopes.
pub fn build_actuation(robot: &RobotModel, limbs: &[LimbState]) -> (DMatrix<f64>, DVector<f64>, Vec<WrenchPolytope>) {
    let n = limbs.len();
    let mut g = DMatrix::zeros(6 * n, 3 * n);
    let mut d = DVector::zeros(6 * n);
    let mut polys = Vec::with_capacity(n);
    for (i, limb) in limbs.iter().enumerate() {
        let leg = &robot.legs[limb.leg];
        let p = WrenchPolytope::new(
            leg.leg.jacobian(&limb.q),
            leg.leg.gravity_torques(&limb.q, robot.gravity),
            leg.leg.torque_limits,
        );
        if p.singular {
            warn!("leg {} Jacobian is near-singular (condition {:.3e})", leg.name, p.condition);
        }
        g.view_mut((6 * i, 3 * i), (6, 3)).copy_from(&p.g);
        d.rows_mut(6 * i, 6).copy_from(&p.d);
        polys.push(p);
    }
    (g, d, polys)
}

/// Every constraint block for one stance, with actuation frozen at a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    pub contacts: Vec<Contact>,
    /// Mass carried by the contacts, kg (robot plus any payload).
    pub mass: f64,
    pub gravity: f64,
    pub a1: DMatrix<f64>,
    pub a2: DMatrix<f64>,
    pub u: DVector<f64>,
    pub friction: DMatrix<f64>,
    /// Limb states, present when actuation constraints are assembled.
    pub limbs: Option<Vec<LimbState>>,
    pub actuation: Option<(DMatrix<f64>, DVector<f64>)>,
    pub polytopes: Vec<WrenchPolytope>,
}

impl ConstraintSystem {
    /// Equilibrium and friction blocks only.
    pub fn friction_only(contacts: Vec<Contact>, mass: f64, gravity: f64) -> Result<Self, ConstraintError> {
        if contacts.is_empty() {
            return Err(ConstraintError::NoContacts);
        }
        if !(mass > 0.0) || !(gravity > 0.0) {
            return Err(ConstraintError::Invalid("mass and gravity must be positive".into()));
        }
        let (a1, a2, u) = build_grasp(&contacts, mass, gravity);
        let friction = build_friction(&contacts)?;
        Ok(Self {
            contacts,
            mass,
            gravity,
            a1,
            a2,
            u,
            friction,
            limbs: None,
            actuation: None,
            polytopes: Vec::new(),
        })
    }

    /// Full system for a stance with the base (CoM) at `com`.
    ///
    /// Each contact's leg configuration is found by inverse kinematics of its
    /// world-fixed foothold relative to the base.
    pub fn for_stance(
        robot: &RobotModel,
        contacts: Vec<Contact>,
        mass: f64,
        com: &Vector3<f64>,
    ) -> Result<Self, ConstraintError> {
        let limbs = stance_limbs(robot, &contacts, com)?;
        Self::with_limbs(robot, contacts, mass, limbs)
    }

    /// Full system with explicitly supplied limb states (one per contact, same order).
    pub fn with_limbs(
        robot: &RobotModel,
        contacts: Vec<Contact>,
        mass: f64,
        limbs: Vec<LimbState>,
    ) -> Result<Self, ConstraintError> {
        if limbs.len() != contacts.len() {
            return Err(ConstraintError::Invalid(format!(
                "{} limb states for {} contacts",
                limbs.len(),
                contacts.len()
            )));
        }
        let mut sys = Self::friction_only(contacts, mass, robot.gravity)?;
        let (g, d, polys) = build_actuation(robot, &limbs);
        sys.actuation = Some((g, d));
        sys.polytopes = polys;
        sys.limbs = Some(limbs);
        Ok(sys)
    }

    pub fn num_contacts(&self) -> usize {
        self.contacts.len()
    }

    pub fn weight(&self) -> f64 {
        self.mass * self.gravity
    }

    /// Total inequality rows (friction plus actuation).
    pub fn inequality_rows(&self) -> usize {
        self.friction.nrows() + self.actuation.as_ref().map_or(0, |(g, _)| g.nrows())
    }

    /// Mean horizontal contact position.
    pub fn contact_centroid(&self) -> nalgebra::Vector2<f64> {
        let s = self.contacts.iter().fold(nalgebra::Vector2::zeros(), |acc, c| acc + c.position.xy());
        s / self.contacts.len() as f64
    }

    /// `max |A1 f + A2 c - u|`, N or N·m.
    pub fn equilibrium_residual(&self, c: &nalgebra::Vector2<f64>, f: &DVector<f64>) -> f64 {
        let r = &self.a1 * f + &self.a2 * DVector::from_column_slice(c.as_slice()) - &self.u;
        r.amax()
    }

    /// Contact force of contact `i` inside the stacked vector `f`.
    pub fn force(f: &DVector<f64>, i: usize) -> Vector3<f64> {
        Vector3::new(f[3 * i], f[3 * i + 1], f[3 * i + 2])
    }
}

/// IK for every contact's leg with the base at `com`.
pub fn stance_limbs(robot: &RobotModel, contacts: &[Contact], com: &Vector3<f64>) -> Result<Vec<LimbState>, ConstraintError> {
    contacts
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let leg = c.leg.ok_or(ConstraintError::MissingLeg(i))?;
            let q = robot.leg_ik(leg, com, &c.position).map_err(|source| ConstraintError::Kinematics {
                contact: i,
                leg: robot.legs[leg].name.clone(),
                source,
            })?;
            Ok(LimbState { leg, q, foot: c.position })
        })
        .collect()
}
