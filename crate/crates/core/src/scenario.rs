//! Scenario files: robot, contacts, mass and region defaults in TOML.
//!
//! ```toml
//! com = [0.0, 0.0, 0.55]      # nominal CoM (base origin), world frame, m
//! mass = 85.0                 # optional; defaults to the robot's mass
//! gravity = 9.81              # optional
//! torque_limit_scale = 1.0    # optional multiplier on every torque limit
//! terrain = "pallet.hmap"     # optional, relative to the scenario file
//!
//! [robot]
//! preset = "quadruped"        # or list [[robot.legs]] explicitly
//!
//! [[contacts]]
//! leg = "LF"                  # needed for actuation constraints
//! position = [0.37, 0.21, 0.0]
//! normal = [0.0, 0.0, 1.0]    # or "from_heightmap" (z is snapped too)
//! mu = 0.7
//! mode = "unilateral"         # or "bilateral"
//!
//! [region]
//! eps = 1e-6
//! bounding_box = 10.0
//! scale = 0.8
//! max_iterations = 500
//! ```
//!
//! An explicit leg entry reads
//!
//! ```toml
//! [[robot.legs]]
//! name = "LF"
//! hip = [0.37, 0.21, 0.0]
//! lengths = [0.08, 0.35, 0.33]
//! masses = [0.5, 2.5, 1.0]
//! torque_limits = [120.0, 150.0, 150.0]
//! knee = "backward"
//! # optional: com_offsets = [[x,y,z], ...], joint_limits = [[lo,hi], ...],
//! #           torque_lower = [...] (must equal -torque_limits)
//! ```

use std::path::{Path, PathBuf};

use nalgebra::{Vector2, Vector3};
use serde::Deserialize;
use thiserror::Error;

use crate::constraints::{ConstraintError, ConstraintSystem, Contact, ContactMode};
use crate::model::{KneeBend, LegModel, MountedLeg, RobotModel, DEFAULT_GRAVITY};
use crate::region::{ConstraintMode, RegionRequest, DEFAULT_BOUNDING_BOX, DEFAULT_EPS, DEFAULT_MAX_ITERATIONS};
use crate::terrain::{HeightMap, TerrainError};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("terrain: {0}")]
    Terrain(#[from] TerrainError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Schema { path: path.into(), message: message.into() }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    com: [f64; 3],
    mass: Option<f64>,
    gravity: Option<f64>,
    torque_limit_scale: Option<f64>,
    terrain: Option<PathBuf>,
    robot: RawRobot,
    contacts: Vec<RawContact>,
    #[serde(default)]
    region: RawRegion,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRobot {
    preset: Option<String>,
    legs: Option<Vec<RawLeg>>,
    mass: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLeg {
    name: String,
    hip: [f64; 3],
    lengths: [f64; 3],
    masses: [f64; 3],
    torque_limits: [f64; 3],
    torque_lower: Option<[f64; 3]>,
    com_offsets: Option<[[f64; 3]; 3]>,
    joint_limits: Option<[[f64; 2]; 3]>,
    knee: KneeBend,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawNormal {
    Vector([f64; 3]),
    Keyword(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawContact {
    leg: Option<String>,
    position: [f64; 3],
    #[serde(default = "default_normal")]
    normal: RawNormal,
    mu: f64,
    #[serde(default = "default_mode")]
    mode: ContactMode,
}

fn default_normal() -> RawNormal {
    RawNormal::Vector([0.0, 0.0, 1.0])
}

fn default_mode() -> ContactMode {
    ContactMode::Unilateral
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegion {
    eps: Option<f64>,
    bounding_box: Option<f64>,
    scale: Option<f64>,
    max_iterations: Option<usize>,
}

/// Region defaults carried by a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionDefaults {
    pub eps: f64,
    pub bounding_box: f64,
    /// Scaling factor `s` used by the CoM planner.
    pub scale: f64,
    pub max_iterations: usize,
}

impl RegionDefaults {
    pub fn request(&self, mode: ConstraintMode) -> RegionRequest {
        RegionRequest {
            mode,
            eps: self.eps,
            max_iterations: self.max_iterations,
            bounding_box: self.bounding_box,
        }
    }
}

impl Default for RegionDefaults {
    fn default() -> Self {
        Self {
            eps: DEFAULT_EPS,
            bounding_box: DEFAULT_BOUNDING_BOX,
            scale: 1.0,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

/// Everything needed to compute regions for one stance.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub robot: RobotModel,
    pub contacts: Vec<Contact>,
    /// Mass supported by the contacts, kg.
    pub mass: f64,
    /// Nominal CoM (base origin) in the world frame.
    pub com: Vector3<f64>,
    pub region: RegionDefaults,
    pub terrain: Option<HeightMap>,
}

impl Scenario {
    /// Parses a scenario; relative terrain paths resolve against `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, ScenarioError> {
        let de = toml::Deserializer::parse(text).map_err(|e| schema("<document>", e.to_string()))?;
        let raw: RawScenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let msg = e.inner().message().to_string();
            schema(if path == "." { "<document>".to_string() } else { path }, msg)
        })?;
        raw.build(base_dir)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Default quadruped standing on flat ground with all four feet under the hips.
    pub fn nominal_quadruped(mu: f64) -> Self {
        let robot = RobotModel::quadruped();
        let com = Vector3::new(0.0, 0.0, crate::model::DEFAULT_STANCE_HEIGHT);
        let contacts = robot
            .nominal_feet(&com, crate::model::DEFAULT_STANCE_HEIGHT)
            .into_iter()
            .enumerate()
            .map(|(i, p)| Contact::flat(p, mu).with_leg(i))
            .collect();
        Self { mass: robot.mass, robot, contacts, com, region: RegionDefaults::default(), terrain: None }
    }

    pub fn com_xy(&self) -> Vector2<f64> {
        self.com.xy()
    }

    /// Constraint system with actuation evaluated by IK at base position `com`.
    pub fn constraint_system_at(&self, com: &Vector3<f64>) -> Result<ConstraintSystem, ConstraintError> {
        ConstraintSystem::for_stance(&self.robot, self.contacts.clone(), self.mass, com)
    }

    /// Constraint system at the nominal CoM.
    pub fn constraint_system(&self) -> Result<ConstraintSystem, ConstraintError> {
        self.constraint_system_at(&self.com)
    }

    /// Same scenario restricted to the contacts at `indices`.
    pub fn with_contacts(&self, indices: &[usize]) -> Self {
        let mut s = self.clone();
        s.contacts = indices.iter().map(|&i| self.contacts[i].clone()).collect();
        s
    }
}

impl RawScenario {
    fn build(self, base_dir: &Path) -> Result<Scenario, ScenarioError> {
        let gravity = self.gravity.unwrap_or(DEFAULT_GRAVITY);
        if !(gravity > 0.0) {
            return Err(schema("gravity", "must be positive"));
        }
        let mut robot = match (&self.robot.preset, self.robot.legs) {
            (Some(p), None) if p == "quadruped" => RobotModel::quadruped(),
            (Some(p), None) => return Err(schema("robot.preset", format!("unknown preset `{p}`"))),
            (None, Some(legs)) => {
                let legs = legs
                    .into_iter()
                    .enumerate()
                    .map(|(i, l)| l.build(i))
                    .collect::<Result<Vec<_>, _>>()?;
                let total: f64 = legs.iter().map(|l| l.leg.total_mass()).sum();
                let mass = self.robot.mass.or(self.mass).unwrap_or(total);
                RobotModel::new(legs, mass, gravity).map_err(|e| schema("robot", e.to_string()))?
            }
            (Some(_), Some(_)) => return Err(schema("robot", "give either `preset` or `legs`, not both")),
            (None, None) => return Err(schema("robot", "missing `preset` or `legs`")),
        };
        robot.gravity = gravity;
        if let Some(m) = self.robot.mass {
            robot.mass = m;
        }
        if let Some(k) = self.torque_limit_scale {
            if !(k > 0.0) || !k.is_finite() {
                return Err(schema("torque_limit_scale", "must be positive"));
            }
            for l in &mut robot.legs {
                l.leg.torque_limits *= k;
            }
        }
        let mass = self.mass.unwrap_or(robot.mass);
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(schema("mass", "must be positive"));
        }

        let terrain = match &self.terrain {
            Some(p) => Some(HeightMap::load(&base_dir.join(p))?),
            None => None,
        };

        if self.contacts.is_empty() {
            return Err(schema("contacts", "at least one contact is required"));
        }
        let mut contacts = Vec::with_capacity(self.contacts.len());
        for (i, c) in self.contacts.into_iter().enumerate() {
            let at = |field: &str| format!("contacts[{i}].{field}");
            let mut position = Vector3::from(c.position);
            let normal = match c.normal {
                RawNormal::Vector(n) => Vector3::from(n),
                RawNormal::Keyword(k) if k == "from_heightmap" => {
                    let map = terrain
                        .as_ref()
                        .ok_or_else(|| schema(at("normal"), "`from_heightmap` needs a `terrain` file"))?;
                    let (z, n) = map.sample(position.x, position.y).map_err(|e| schema(at("position"), e.to_string()))?;
                    position.z = z;
                    n
                }
                RawNormal::Keyword(k) => {
                    return Err(schema(at("normal"), format!("expected [x, y, z] or \"from_heightmap\", got `{k}`")))
                }
            };
            let mut contact = Contact::new(position, normal, c.mu, c.mode).map_err(|m| schema(at("mu"), m))?;
            if let Some(name) = c.leg {
                let idx = robot.leg_index(&name).map_err(|e| schema(at("leg"), e.to_string()))?;
                contact = contact.with_leg(idx);
            }
            contacts.push(contact);
        }

        let d = RegionDefaults::default();
        let region = RegionDefaults {
            eps: self.region.eps.unwrap_or(d.eps),
            bounding_box: self.region.bounding_box.unwrap_or(d.bounding_box),
            scale: self.region.scale.unwrap_or(d.scale),
            max_iterations: self.region.max_iterations.unwrap_or(d.max_iterations),
        };
        if !(region.eps > 0.0) {
            return Err(schema("region.eps", "must be positive"));
        }
        if !(region.bounding_box > 0.0) {
            return Err(schema("region.bounding_box", "must be positive"));
        }
        if !(region.scale > 0.0 && region.scale <= 1.0) {
            return Err(schema("region.scale", "must lie in (0, 1]"));
        }

        Ok(Scenario { robot, contacts, mass, com: Vector3::from(self.com), region, terrain })
    }
}

impl RawLeg {
    fn build(self, i: usize) -> Result<MountedLeg, ScenarioError> {
        let at = |field: &str| format!("robot.legs[{i}].{field}");
        let tau = Vector3::from(self.torque_limits);
        if let Some(lower) = self.torque_lower {
            if (0..3).any(|j| (lower[j] + self.torque_limits[j]).abs() > 1e-12) {
                return Err(schema(
                    at("torque_lower"),
                    "asymmetric torque limits are not supported; torque_lower must equal -torque_limits",
                ));
            }
        }
        let mut leg = LegModel::new(self.lengths, self.masses, tau, self.knee).map_err(|e| schema(at("lengths"), e.to_string()))?;
        if let Some(off) = self.com_offsets {
            leg.com_offsets = off.map(Vector3::from);
        }
        if let Some(lim) = self.joint_limits {
            leg.joint_limits = lim.map(|[lo, hi]| (lo, hi));
        }
        leg.validate().map_err(|e| schema(at("joint_limits"), e.to_string()))?;
        Ok(MountedLeg { name: self.name, hip: Vector3::from(self.hip), leg })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const NOMINAL: &str = r#"
com = [0.0, 0.0, 0.55]
[robot]
preset = "quadruped"
[[contacts]]
leg = "LF"
position = [0.37, 0.21, 0.0]
mu = 0.7
[[contacts]]
leg = "RF"
position = [0.37, -0.21, 0.0]
mu = 0.7
[[contacts]]
leg = "LH"
position = [-0.37, 0.21, 0.0]
mu = 0.7
"#;

    #[test]
    fn parses_preset_scenario() {
        let s = Scenario::from_toml(NOMINAL, Path::new(".")).unwrap();
        assert_eq!(s.contacts.len(), 3);
        assert_eq!(s.mass, 85.0);
        assert_eq!(s.contacts[2].leg, Some(2));
        assert_eq!(s.region.eps, 1e-6);
        assert!(s.constraint_system().is_ok());
    }

    #[test]
    fn schema_errors_carry_paths() {
        let bad = NOMINAL.replacen("mu = 0.7", "mu = \"high\"", 1);
        let err = Scenario::from_toml(&bad, Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("contacts[0].mu"), "{err}");
        let bad = NOMINAL.replacen("leg = \"LH\"", "leg = \"XX\"", 1);
        let err = Scenario::from_toml(&bad, Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("contacts[2].leg"), "{err}");
    }

    #[test]
    fn asymmetric_limits_rejected() {
        let text = r#"
com = [0.0, 0.0, 0.55]
[robot]
[[robot.legs]]
name = "A"
hip = [0.0, 0.0, 0.0]
lengths = [0.08, 0.35, 0.33]
masses = [0.5, 2.5, 1.0]
torque_limits = [100.0, 100.0, 100.0]
torque_lower = [-100.0, -80.0, -100.0]
knee = "forward"
[[contacts]]
position = [0.0, 0.0, 0.0]
mu = 0.5
"#;
        let err = Scenario::from_toml(text, Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("robot.legs[0].torque_lower"), "{err}");
    }
}
