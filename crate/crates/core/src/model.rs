//! Three-joint leg kinematics and statics, and the robot assembled from legs.
//!
//! Joint convention (HAA, HFE, KFE): the first joint rotates about the base
//! x axis, the other two about the rotated y axis. At zero angles the leg
//! hangs straight down, foot at `(0, 0, -(l1 + l2 + l3))` from the hip.
//! Positive HFE/KFE rotation swings the lower links towards -x.

use nalgebra::{Matrix3, Rotation3, SymmetricEigen, Vector3};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("joint {joint} angle {value} outside [{lo}, {hi}]")]
    JointLimit { joint: usize, value: f64, lo: f64, hi: f64 },
    #[error("target {target:?} outside the leg workspace")]
    OutOfWorkspace { target: [f64; 3] },
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("unknown leg `{0}`")]
    UnknownLeg(String),
}

/// Which inverse-kinematics branch a leg uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KneeBend {
    /// Knee points towards +x; knee angle >= 0.
    Forward,
    /// Knee points towards -x; knee angle <= 0.
    Backward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LegModel {
    /// Link lengths `l1` (hip offset), `l2` (thigh), `l3` (shank), meters.
    pub lengths: [f64; 3],
    /// Point mass of each link, kg.
    pub link_masses: [f64; 3],
    /// Link CoM in the link frame (origin at the proximal joint), meters.
    pub com_offsets: [Vector3<f64>; 3],
    /// Per-joint `(lo, hi)` angle limits, radians.
    pub joint_limits: [(f64, f64); 3],
    /// Symmetric torque limits, N·m.
    pub torque_limits: Vector3<f64>,
    pub knee: KneeBend,
}

/// Force-manipulability ellipsoid `{ f : |J^T f| <= 1 }`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceEllipsoid {
    /// `J J^T`; the ellipsoid is `f^T (J J^T) f <= 1`.
    pub matrix: Matrix3<f64>,
    /// Semiaxis lengths `1 / sigma_k`, ascending; infinite along singular directions.
    pub semiaxes: [f64; 3],
    /// Unit semiaxis directions matching `semiaxes`.
    pub axes: Matrix3<f64>,
    /// True when some singular value vanishes (relative 1e-9).
    pub degenerate: bool,
    /// `sigma_max / sigma_min` (infinite when degenerate).
    pub anisotropy: f64,
}

impl LegModel {
    pub fn new(
        lengths: [f64; 3],
        link_masses: [f64; 3],
        torque_limits: Vector3<f64>,
        knee: KneeBend,
    ) -> Result<Self, ModelError> {
        let com_offsets = lengths.map(|l| Vector3::new(0.0, 0.0, -0.5 * l));
        let knee_range = match knee {
            KneeBend::Forward => (0.0, 2.6),
            KneeBend::Backward => (-2.6, 0.0),
        };
        let leg = Self {
            lengths,
            link_masses,
            com_offsets,
            joint_limits: [(-1.0, 1.0), (-2.0, 2.0), knee_range],
            torque_limits,
            knee,
        };
        leg.validate()?;
        Ok(leg)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.lengths.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(ModelError::Invalid("link lengths must be positive".into()));
        }
        if self.link_masses.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return Err(ModelError::Invalid("link masses must be nonnegative".into()));
        }
        if self.torque_limits.iter().any(|t| !(*t > 0.0)) {
            return Err(ModelError::Invalid("torque limits must be positive".into()));
        }
        if self.joint_limits.iter().any(|(lo, hi)| !(lo <= hi)) {
            return Err(ModelError::Invalid("joint limits must satisfy lo <= hi".into()));
        }
        Ok(())
    }

    pub fn total_mass(&self) -> f64 {
        self.link_masses.iter().sum()
    }

    pub fn check_limits(&self, q: &Vector3<f64>) -> Result<(), ModelError> {
        for j in 0..3 {
            let (lo, hi) = self.joint_limits[j];
            if q[j] < lo - 1e-9 || q[j] > hi + 1e-9 {
                return Err(ModelError::JointLimit { joint: j, value: q[j], lo, hi });
            }
        }
        Ok(())
    }

    /// Foot position relative to the hip, with joint limits enforced.
    pub fn forward_kinematics(&self, q: &Vector3<f64>) -> Result<Vector3<f64>, ModelError> {
        self.check_limits(q)?;
        Ok(self.foot_position(q))
    }

    /// Foot position relative to the hip, closed form, no limit check.
    pub fn foot_position(&self, q: &Vector3<f64>) -> Vector3<f64> {
        let [l1, l2, l3] = self.lengths;
        let (s1, c1) = q[0].sin_cos();
        let (s2, c2) = q[1].sin_cos();
        let (s23, c23) = (q[1] + q[2]).sin_cos();
        let xs = -l2 * s2 - l3 * s23;
        let zs = -l1 - l2 * c2 - l3 * c23;
        Vector3::new(xs, -zs * s1, zs * c1)
    }

    /// Analytic foot Jacobian `dp/dq`.
    pub fn jacobian(&self, q: &Vector3<f64>) -> Matrix3<f64> {
        let [l1, l2, l3] = self.lengths;
        let (s1, c1) = q[0].sin_cos();
        let (s2, c2) = q[1].sin_cos();
        let (s23, c23) = (q[1] + q[2]).sin_cos();
        let zs = -l1 - l2 * c2 - l3 * c23;
        let dx2 = -l2 * c2 - l3 * c23;
        let dz2 = l2 * s2 + l3 * s23;
        let dx3 = -l3 * c23;
        let dz3 = l3 * s23;
        Matrix3::new(
            0.0, dx2, dx3,
            -zs * c1, -dz2 * s1, -dz3 * s1,
            -zs * s1, dz2 * c1, dz3 * c1,
        )
    }

    /// Joint origins, rotation axes and link rotations along the chain.
    fn frames(&self, q: &Vector3<f64>) -> ([Vector3<f64>; 3], [Vector3<f64>; 3], [Rotation3<f64>; 3]) {
        let [l1, l2, _] = self.lengths;
        let r1 = Rotation3::from_axis_angle(&Vector3::x_axis(), q[0]);
        let r2 = r1 * Rotation3::from_axis_angle(&Vector3::y_axis(), q[1]);
        let r3 = r2 * Rotation3::from_axis_angle(&Vector3::y_axis(), q[2]);
        let o1 = Vector3::zeros();
        let o2 = r1 * Vector3::new(0.0, 0.0, -l1);
        let o3 = o2 + r2 * Vector3::new(0.0, 0.0, -l2);
        let y1 = r1 * Vector3::y();
        ([o1, o2, o3], [Vector3::x(), y1, y1], [r1, r2, r3])
    }

    /// Link CoM positions relative to the hip.
    pub fn link_coms(&self, q: &Vector3<f64>) -> [Vector3<f64>; 3] {
        let (o, _, r) = self.frames(q);
        [0, 1, 2].map(|k| o[k] + r[k] * self.com_offsets[k])
    }

    /// Joint torques that hold the leg links against gravity, N·m.
    ///
    /// Equals the gradient of the links' potential energy, i.e. the sum of
    /// `J_com,k^T (m_k g z)` over links; zero for massless links.
    pub fn gravity_torques(&self, q: &Vector3<f64>, gravity: f64) -> Vector3<f64> {
        let (o, axes, r) = self.frames(q);
        let mut tau = Vector3::zeros();
        for k in 0..3 {
            let m = self.link_masses[k];
            if m == 0.0 {
                continue;
            }
            let com = o[k] + r[k] * self.com_offsets[k];
            let w = Vector3::new(0.0, 0.0, m * gravity);
            for j in 0..=k {
                tau[j] += axes[j].cross(&(com - o[j])).dot(&w);
            }
        }
        tau
    }

    /// Inverse kinematics on the configured knee branch.
    ///
    /// Targets within 1e-9 m outside the reach shell are clamped onto it.
    pub fn inverse_kinematics(&self, p: &Vector3<f64>) -> Result<Vector3<f64>, ModelError> {
        let q = self.inverse_kinematics_unchecked(p)?;
        self.check_limits(&q)?;
        Ok(q)
    }

    /// Inverse kinematics without the joint-limit check.
    pub fn inverse_kinematics_unchecked(&self, p: &Vector3<f64>) -> Result<Vector3<f64>, ModelError> {
        let [l1, l2, l3] = self.lengths;
        let out = || ModelError::OutOfWorkspace { target: [p.x, p.y, p.z] };
        let r = (p.y * p.y + p.z * p.z).sqrt();
        if r <= l1 {
            return Err(out());
        }
        let q1 = p.y.atan2(-p.z);
        let x = -p.x;
        let z = r - l1;
        let d2 = x * x + z * z;
        let d = d2.sqrt();
        if d > l2 + l3 + 1e-9 || d < (l2 - l3).abs() - 1e-9 {
            return Err(out());
        }
        let cos3 = ((d2 - l2 * l2 - l3 * l3) / (2.0 * l2 * l3)).clamp(-1.0, 1.0);
        let mag3 = cos3.acos();
        let q3 = match self.knee {
            KneeBend::Forward => mag3,
            KneeBend::Backward => -mag3,
        };
        let q2 = x.atan2(z) - (l3 * q3.sin()).atan2(l2 + l3 * q3.cos());
        Ok(Vector3::new(q1, q2, q3))
    }

    pub fn force_ellipsoid(&self, q: &Vector3<f64>) -> ForceEllipsoid {
        force_ellipsoid_of(&self.jacobian(q))
    }
}

/// Force ellipsoid of an arbitrary 3×3 Jacobian.
pub fn force_ellipsoid_of(j: &Matrix3<f64>) -> ForceEllipsoid {
    let jjt = j * j.transpose();
    let eig = SymmetricEigen::new(jjt);
    let mut idx = [0usize, 1, 2];
    // descending singular value = ascending semiaxis
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let sig: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i].max(0.0).sqrt()).collect();
    let smax = sig[0];
    let tiny = 1e-9 * smax.max(f64::MIN_POSITIVE);
    let semiaxes = [0, 1, 2].map(|k| if sig[k] > tiny { 1.0 / sig[k] } else { f64::INFINITY });
    let degenerate = sig[2] <= tiny;
    let axes = Matrix3::from_columns(&idx.map(|i| eig.eigenvectors.column(i).into_owned()));
    ForceEllipsoid {
        matrix: jjt,
        semiaxes,
        axes,
        degenerate,
        anisotropy: if degenerate { f64::INFINITY } else { smax / sig[2] },
    }
}

/// 2-norm condition number of a 3×3 matrix (infinite when singular).
pub fn condition_number(j: &Matrix3<f64>) -> f64 {
    let sv = j.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// A leg attached to the base at `hip` (base frame, meters).
#[derive(Debug, Clone, PartialEq)]
pub struct MountedLeg {
    pub name: String,
    pub hip: Vector3<f64>,
    pub leg: LegModel,
}

/// A floating base with point-foot legs. The base origin is the robot CoM
/// and the base orientation is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotModel {
    pub legs: Vec<MountedLeg>,
    /// Total robot mass, kg (legs included).
    pub mass: f64,
    /// Gravity magnitude, m/s², acting along -z.
    pub gravity: f64,
}

pub const DEFAULT_GRAVITY: f64 = 9.81;
/// Standing height of the default quadruped's base above the feet, meters.
pub const DEFAULT_STANCE_HEIGHT: f64 = 0.55;
pub const QUADRUPED_LEGS: [&str; 4] = ["LF", "RF", "LH", "RH"];

impl RobotModel {
    pub fn new(legs: Vec<MountedLeg>, mass: f64, gravity: f64) -> Result<Self, ModelError> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(ModelError::Invalid("total mass must be positive".into()));
        }
        if !(gravity > 0.0) || !gravity.is_finite() {
            return Err(ModelError::Invalid("gravity must be positive".into()));
        }
        for l in &legs {
            l.leg.validate()?;
        }
        Ok(Self { legs, mass, gravity })
    }

    /// HyQ-sized quadruped used as the repository's reference fixture.
    pub fn quadruped() -> Self {
        let tau = Vector3::new(120.0, 150.0, 150.0);
        let legs = QUADRUPED_LEGS
            .iter()
            .map(|&name| {
                let front = name.ends_with('F');
                let left = name.starts_with('L');
                let knee = if front { KneeBend::Backward } else { KneeBend::Forward };
                MountedLeg {
                    name: name.to_string(),
                    hip: Vector3::new(
                        if front { 0.37 } else { -0.37 },
                        if left { 0.21 } else { -0.21 },
                        0.0,
                    ),
                    leg: LegModel::new([0.08, 0.35, 0.33], [0.5, 2.5, 1.0], tau, knee)
                        .expect("default leg is valid"),
                }
            })
            .collect();
        Self { legs, mass: 85.0, gravity: DEFAULT_GRAVITY }
    }

    pub fn weight(&self) -> f64 {
        self.mass * self.gravity
    }

    pub fn leg_index(&self, name: &str) -> Result<usize, ModelError> {
        self.legs
            .iter()
            .position(|l| l.name == name)
            .ok_or_else(|| ModelError::UnknownLeg(name.to_string()))
    }

    /// World foot position of leg `i` with the base (CoM) at `com`.
    pub fn foot_world(&self, i: usize, com: &Vector3<f64>, q: &Vector3<f64>) -> Vector3<f64> {
        com + self.legs[i].hip + self.legs[i].leg.foot_position(q)
    }

    /// Joint angles placing foot `i` at world point `foot` with the base at `com`.
    pub fn leg_ik(&self, i: usize, com: &Vector3<f64>, foot: &Vector3<f64>) -> Result<Vector3<f64>, ModelError> {
        let rel = foot - com - self.legs[i].hip;
        self.legs[i].leg.inverse_kinematics(&rel)
    }

    /// Foot positions of the default stance: feet under the hips, base at `height`.
    pub fn nominal_feet(&self, com: &Vector3<f64>, height: f64) -> Vec<Vector3<f64>> {
        self.legs
            .iter()
            .map(|l| Vector3::new(com.x + l.hip.x, com.y + l.hip.y, com.z - height))
            .collect()
    }

    /// Scales every link mass by `k` (for load and mass sweeps).
    pub fn with_leg_mass_scale(&self, k: f64) -> Self {
        let mut r = self.clone();
        for l in &mut r.legs {
            for m in &mut l.leg.link_masses {
                *m *= k;
            }
        }
        r
    }
}
