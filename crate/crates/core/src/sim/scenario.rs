//! Scenario files: a complete, self-contained description of one
//! simulated deployment. Everything a run touches comes from here plus
//! the seed, so identical files and seeds replay identically.
//!
//! All keys carry unit suffixes (`_s`, `_m`, `_hz`, `_dbm`, `_rad`,
//! `_db`) and unknown keys are rejected, so a typo fails loudly at load
//! time instead of silently falling back to a default.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ka::{EntityClass, EntityPhysical, KaConfig};
use crate::ran::{AntennaConfig, BeamCodebook};
use crate::scene::{Aabb, Pose, RoutePlan, SceneModel, Vec3, Waypoint};
use crate::sensors::{NoiseModel, SensorHealth, SensorKind, SensorMeta};
use crate::{Error, Result};

// ── run mode ───────────────────────────────────────────────────────────

/// Which control stack serves the UE: the periodic sweep baseline or the
/// knowledge-agent stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunMode {
    #[serde(rename = "BASELINE")]
    Baseline,
    #[serde(rename = "KNOWLEDGE")]
    Knowledge,
}

impl RunMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunMode::Baseline => "BASELINE",
            RunMode::Knowledge => "KNOWLEDGE",
        }
    }
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RunMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "BASELINE" => Ok(RunMode::Baseline),
            "KNOWLEDGE" => Ok(RunMode::Knowledge),
            other => Err(Error::invalid(format!(
                "mode must be BASELINE or KNOWLEDGE, got {other:?}"
            ))),
        }
    }
}

// ── specs ──────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleSpec {
    pub label: String,
    pub min_m: [f64; 3],
    pub max_m: [f64; 3],
    pub reflectivity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub carrier_frequency_hz: f64,
    /// Convex authorized-area polygon on the floor plane, metres.
    pub geofence: Vec<[f64; 2]>,
    #[serde(default)]
    pub obstacles: Vec<ObstacleSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CodebookSpec {
    pub n_elements: usize,
    pub element_spacing_wavelengths: f64,
    pub n_beams: usize,
    pub span_lo_rad: f64,
    pub span_hi_rad: f64,
}

impl Default for CodebookSpec {
    fn default() -> Self {
        CodebookSpec {
            n_elements: 16,
            element_spacing_wavelengths: 0.5,
            n_beams: 32,
            span_lo_rad: -std::f64::consts::FRAC_PI_3,
            span_hi_rad: std::f64::consts::FRAC_PI_3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AntennaSpec {
    pub position_m: [f64; 3],
    pub yaw_rad: f64,
    pub tx_power_dbm: f64,
    pub noise_floor_dbm: f64,
    #[serde(default = "default_sigma_rssi")]
    pub sigma_rssi_db: f64,
    #[serde(default = "default_sigma_aoa")]
    pub sigma_aoa_rad: f64,
    pub sweep_period_s: f64,
    #[serde(default)]
    pub codebook: CodebookSpec,
}

fn default_sigma_rssi() -> f64 {
    1.0
}
fn default_sigma_aoa() -> f64 {
    0.035
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaypointSpec {
    pub t_s: f64,
    pub position_m: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntitySpec {
    pub id: String,
    pub class: EntityClass,
    /// Fixed position, for entities that never move.
    #[serde(default)]
    pub position_m: Option<[f64; 3]>,
    /// Timed route, for entities that do. Exactly one of `position_m`
    /// and `route` must be present.
    #[serde(default)]
    pub route: Option<Vec<WaypointSpec>>,
    /// Physical envelope; entities without one neither block nor
    /// reflect.
    #[serde(default)]
    pub extents_m: Option<[f64; 3]>,
    #[serde(default)]
    pub reflectivity: f64,
    /// Whether the fleet shares this entity's route with the knowledge
    /// agent (enables blockage look-ahead past the current position).
    #[serde(default)]
    pub route_known: bool,
}

impl EntitySpec {
    /// Radio-tagged entities are measured by UWB and recognized by
    /// vision; passive ones are only seen anonymously.
    pub fn tagged(&self) -> bool {
        matches!(self.class, EntityClass::Ue | EntityClass::Agv)
    }

    pub fn route_plan(&self) -> RoutePlan {
        match (&self.route, &self.position_m) {
            (Some(wps), _) => RoutePlan {
                waypoints: wps
                    .iter()
                    .map(|w| Waypoint { t_s: w.t_s, position: Vec3::from(w.position_m) })
                    .collect(),
            },
            (None, Some(p)) => RoutePlan::stationary(Vec3::from(*p)),
            (None, None) => unreachable!("validated: one of position_m/route present"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HealthPhase {
    pub t_s: f64,
    pub health: SensorHealth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSpec {
    pub id: String,
    pub kind: SensorKind,
    pub position_m: [f64; 3],
    #[serde(default)]
    pub yaw_rad: f64,
    #[serde(default)]
    pub pitch_rad: f64,
    #[serde(default)]
    pub roll_rad: f64,
    /// Azimuth half field of view; vision only.
    #[serde(default = "default_fov")]
    pub fov_half_angle_rad: f64,
    pub update_rate_hz: f64,
    #[serde(default = "default_sigma_m")]
    pub sigma_m: f64,
    #[serde(default = "default_detection_probability")]
    pub detection_probability: f64,
    /// Health changes over the run; between entries the last one holds,
    /// OK before the first.
    #[serde(default)]
    pub health_schedule: Vec<HealthPhase>,
}

fn default_fov() -> f64 {
    std::f64::consts::FRAC_PI_4
}
fn default_sigma_m() -> f64 {
    0.10
}
fn default_detection_probability() -> f64 {
    0.98
}

impl SensorSpec {
    pub fn meta(&self) -> SensorMeta {
        let pose = Pose {
            position: Vec3::from(self.position_m),
            yaw: self.yaw_rad,
            pitch: self.pitch_rad,
            roll: self.roll_rad,
        };
        let mut meta = SensorMeta::new(&self.id, self.kind, pose);
        meta.fov_half_angle_rad = self.fov_half_angle_rad;
        meta
    }

    pub fn noise(&self) -> NoiseModel {
        NoiseModel {
            sigma_m: self.sigma_m,
            detection_probability: self.detection_probability,
        }
    }

    pub fn health_at(&self, t_s: f64) -> SensorHealth {
        let mut h = SensorHealth::Ok;
        for phase in &self.health_schedule {
            if phase.t_s <= t_s {
                h = phase.health;
            } else {
                break;
            }
        }
        h
    }
}

/// A legitimate network-entry attempt: the entity claims the position it
/// actually occupies at that moment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimSpec {
    pub ue_id: String,
    pub t_s: f64,
}

/// A spoofed network-entry attempt claiming a fabricated position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSpec {
    pub ue_id: String,
    pub t_s: f64,
    pub claimed_position_m: [f64; 3],
}

// ── scenario ───────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub duration_s: f64,
    pub dt_s: f64,
    pub seed: u64,
    pub mode: RunMode,
    /// The UE the run's link metrics follow.
    pub served_ue: String,
    pub scene: SceneSpec,
    pub antenna: AntennaSpec,
    #[serde(default)]
    pub entities: Vec<EntitySpec>,
    #[serde(default)]
    pub sensors: Vec<SensorSpec>,
    #[serde(default)]
    pub claims: Vec<ClaimSpec>,
    #[serde(default)]
    pub attackers: Vec<AttackSpec>,
    #[serde(default)]
    pub ka: KaConfig,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Load from a filesystem path, or from the bundled set when the
    /// argument names no existing file.
    pub fn load(path_or_name: &str) -> Result<Self> {
        if Path::new(path_or_name).is_file() {
            let text = std::fs::read_to_string(path_or_name)?;
            return Self::from_json(&text);
        }
        match bundled(path_or_name) {
            Some(text) => Self::from_json(text),
            None => Err(Error::scenario(format!(
                "{path_or_name:?} is neither a file nor a bundled scenario; bundled: {}",
                bundled_names().join(", ")
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::scenario(msg));
        if self.name.is_empty() {
            return fail("name must not be empty".into());
        }
        if !(self.duration_s > 0.0) {
            return fail(format!("duration_s must be positive, got {}", self.duration_s));
        }
        if !(self.dt_s > 0.0) || self.dt_s > self.duration_s {
            return fail(format!(
                "dt_s must be in (0, duration_s], got dt_s={} duration_s={}",
                self.dt_s, self.duration_s
            ));
        }
        if self.antenna.sweep_period_s < self.dt_s {
            return fail(format!(
                "antenna.sweep_period_s must be at least dt_s, got {} < {}",
                self.antenna.sweep_period_s, self.dt_s
            ));
        }
        self.scene_model()?.validate("scene")?;
        self.codebook()?;

        let mut ids = std::collections::BTreeSet::new();
        for e in &self.entities {
            if e.id.is_empty() {
                return fail("entities[].id must not be empty".into());
            }
            if !ids.insert(&e.id) {
                return fail(format!("entities[].id {:?} appears twice", e.id));
            }
            match (&e.position_m, &e.route) {
                (None, None) => {
                    return fail(format!(
                        "entity {:?} needs one of position_m or route",
                        e.id
                    ))
                }
                (Some(_), Some(_)) => {
                    return fail(format!(
                        "entity {:?} has both position_m and route; pick one",
                        e.id
                    ))
                }
                _ => {}
            }
            e.route_plan().validate(&format!("entity {:?} route", e.id))?;
            if let Some(ext) = e.extents_m {
                if ext.iter().any(|v| !(*v > 0.0)) {
                    return fail(format!(
                        "entity {:?} extents_m must be positive, got {ext:?}",
                        e.id
                    ));
                }
            }
            if !(0.0..=1.0).contains(&e.reflectivity) {
                return fail(format!(
                    "entity {:?} reflectivity must be in [0, 1], got {}",
                    e.id, e.reflectivity
                ));
            }
        }
        match self.entities.iter().find(|e| e.id == self.served_ue) {
            None => return fail(format!("served_ue {:?} is not an entity", self.served_ue)),
            Some(e) if e.class != EntityClass::Ue => {
                return fail(format!(
                    "served_ue {:?} must have class UE, got {:?}",
                    self.served_ue, e.class
                ))
            }
            Some(_) => {}
        }

        let mut sensor_ids = std::collections::BTreeSet::new();
        for s in &self.sensors {
            if s.id.is_empty() {
                return fail("sensors[].id must not be empty".into());
            }
            if !sensor_ids.insert(&s.id) {
                return fail(format!("sensors[].id {:?} appears twice", s.id));
            }
            if !(s.update_rate_hz > 0.0) {
                return fail(format!(
                    "sensor {:?} update_rate_hz must be positive, got {}",
                    s.id, s.update_rate_hz
                ));
            }
            if s.sigma_m < 0.0 {
                return fail(format!(
                    "sensor {:?} sigma_m must be nonnegative, got {}",
                    s.id, s.sigma_m
                ));
            }
            if !(0.0..=1.0).contains(&s.detection_probability) {
                return fail(format!(
                    "sensor {:?} detection_probability must be in [0, 1], got {}",
                    s.id, s.detection_probability
                ));
            }
            s.meta().mounting_pose.validate(&format!("sensor {:?} pose", s.id))?;
            let mut last = f64::NEG_INFINITY;
            for phase in &s.health_schedule {
                if phase.t_s < last {
                    return fail(format!(
                        "sensor {:?} health_schedule must be sorted by t_s",
                        s.id
                    ));
                }
                last = phase.t_s;
            }
        }

        for c in &self.claims {
            if !self.entities.iter().any(|e| e.id == c.ue_id) {
                return fail(format!("claims[].ue_id {:?} is not an entity", c.ue_id));
            }
            if !(0.0..=self.duration_s).contains(&c.t_s) {
                return fail(format!(
                    "claims[].t_s {} outside [0, duration_s]",
                    c.t_s
                ));
            }
        }
        for a in &self.attackers {
            if a.ue_id.is_empty() {
                return fail("attackers[].ue_id must not be empty".into());
            }
            if !(0.0..=self.duration_s).contains(&a.t_s) {
                return fail(format!(
                    "attackers[].t_s {} outside [0, duration_s]",
                    a.t_s
                ));
            }
        }
        self.ka.validate("ka")?;
        Ok(())
    }

    pub fn scene_model(&self) -> Result<SceneModel> {
        let mut scene = SceneModel::empty(self.scene.carrier_frequency_hz);
        scene.geofence = self.scene.geofence.clone();
        for o in &self.scene.obstacles {
            let b = Aabb {
                min: Vec3::from(o.min_m),
                max: Vec3::from(o.max_m),
                reflectivity: o.reflectivity,
                label: o.label.clone(),
            };
            b.validate(&format!("obstacle {:?}", o.label))?;
            scene.obstacles.push(b);
        }
        Ok(scene)
    }

    pub fn antenna_pose(&self) -> Pose {
        Pose::at(Vec3::from(self.antenna.position_m), self.antenna.yaw_rad)
    }

    pub fn antenna_config(&self) -> AntennaConfig {
        AntennaConfig {
            pose: self.antenna_pose(),
            tx_power_dbm: self.antenna.tx_power_dbm,
            noise_floor_dbm: self.antenna.noise_floor_dbm,
            sigma_rssi_db: self.antenna.sigma_rssi_db,
            sigma_aoa_rad: self.antenna.sigma_aoa_rad,
            sweep_period_s: self.antenna.sweep_period_s,
        }
    }

    pub fn codebook(&self) -> Result<BeamCodebook> {
        let c = &self.antenna.codebook;
        BeamCodebook::uniform(
            c.n_elements,
            c.element_spacing_wavelengths,
            c.n_beams,
            c.span_lo_rad,
            c.span_hi_rad,
        )
    }

    /// Registered entity classes, i.e. what the knowledge agent knows
    /// about identities in advance: radio-tagged IDs only.
    pub fn class_registry(&self) -> BTreeMap<String, EntityClass> {
        self.entities
            .iter()
            .filter(|e| e.tagged())
            .map(|e| (e.id.clone(), e.class))
            .collect()
    }

    /// Physical envelopes per entity id, for propagation.
    pub fn phys_registry(&self) -> BTreeMap<String, EntityPhysical> {
        self.entities
            .iter()
            .map(|e| {
                (
                    e.id.clone(),
                    EntityPhysical {
                        extents: e.extents_m.map(Vec3::from),
                        reflectivity: e.reflectivity,
                    },
                )
            })
            .collect()
    }

    /// Routes the fleet shares with the knowledge agent.
    pub fn known_routes(&self) -> BTreeMap<String, RoutePlan> {
        self.entities
            .iter()
            .filter(|e| e.route_known)
            .map(|e| (e.id.clone(), e.route_plan()))
            .collect()
    }

    pub fn ue_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self
            .entities
            .iter()
            .filter(|e| e.class == EntityClass::Ue)
            .map(|e| e.id.clone())
            .collect();
        ids.sort();
        ids
    }

    pub fn steps(&self) -> u64 {
        (self.duration_s / self.dt_s).round() as u64
    }
}

// ── bundled scenarios ──────────────────────────────────────────────────

/// Scenarios compiled into the library, addressable by name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("warehouse_default", include_str!("../../scenarios/warehouse_default.json")),
    ("auth_demo", include_str!("../../scenarios/auth_demo.json")),
    ("channel_change", include_str!("../../scenarios/channel_change.json")),
    ("blockage_crossing", include_str!("../../scenarios/blockage_crossing.json")),
    ("sensor_outage", include_str!("../../scenarios/sensor_outage.json")),
    ("static_floor", include_str!("../../scenarios/static_floor.json")),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn bundled_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|(n, _)| *n).collect()
}

// ── tests ──────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_bundled_scenario_parses_and_validates() {
        for (name, text) in BUNDLED {
            let cfg = ScenarioConfig::from_json(text)
                .unwrap_or_else(|e| panic!("bundled scenario {name}: {e}"));
            assert_eq!(&cfg.name, name, "file name key must match registry key");
            assert!(cfg.steps() > 0);
            cfg.scene_model().unwrap();
            cfg.codebook().unwrap();
        }
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let text = r#"{
            "name": "x", "duration_s": 1.0, "dt_s": 0.01, "seed": 1,
            "mode": "BASELINE", "served_ue": "ue-1",
            "scene": {"carrier_frequency_hz": 1e9, "geofence": [[0,0],[1,0],[1,1],[0,1]]},
            "antenna": {"position_m": [0,0,1], "yaw_rad": 0.0,
                        "tx_power_dbm": 10, "noise_floor_dbm": -90,
                        "sweep_period_s": 0.02, "sweep_perlod_s": 1},
            "entities": [{"id": "ue-1", "class": "UE", "position_m": [0.5,0.5,0.5]}]
        }"#;
        let err = ScenarioConfig::from_json(text).unwrap_err().to_string();
        assert!(err.contains("sweep_perlod_s"), "error should name the bad key: {err}");
    }

    #[test]
    fn validation_errors_name_the_offending_key() {
        let base = r#"{
            "name": "x", "duration_s": 10.0, "dt_s": 0.01, "seed": 1,
            "mode": "KNOWLEDGE", "served_ue": "ue-1",
            "scene": {"carrier_frequency_hz": 1e9, "geofence": [[0,0],[9,0],[9,9],[0,9]]},
            "antenna": {"position_m": [0,0,1], "yaw_rad": 0.0,
                        "tx_power_dbm": 10, "noise_floor_dbm": -90, "sweep_period_s": 0.02},
            "entities": [{"id": "ue-1", "class": "UE", "position_m": [0.5,0.5,0.5]}]
        }"#;
        let mut cfg = ScenarioConfig::from_json(base).unwrap();

        cfg.served_ue = "nobody".into();
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("served_ue"), "{err}");

        let mut cfg2 = ScenarioConfig::from_json(base).unwrap();
        cfg2.entities[0].position_m = None;
        let err2 = cfg2.validate().unwrap_err().to_string();
        assert!(err2.contains("position_m or route"), "{err2}");

        let mut cfg3 = ScenarioConfig::from_json(base).unwrap();
        cfg3.entities[0].reflectivity = 1.5;
        let err3 = cfg3.validate().unwrap_err().to_string();
        assert!(err3.contains("reflectivity"), "{err3}");

        let mut cfg4 = ScenarioConfig::from_json(base).unwrap();
        cfg4.sensors.push(SensorSpec {
            id: "uwb-1".into(),
            kind: SensorKind::Uwb,
            position_m: [0.0, 0.0, 3.0],
            yaw_rad: 0.0,
            pitch_rad: 0.0,
            roll_rad: 0.0,
            fov_half_angle_rad: default_fov(),
            update_rate_hz: 0.0,
            sigma_m: 0.1,
            detection_probability: 0.98,
            health_schedule: Vec::new(),
        });
        let err4 = cfg4.validate().unwrap_err().to_string();
        assert!(err4.contains("update_rate_hz"), "{err4}");
    }

    #[test]
    fn health_schedule_steps_through_phases() {
        let s = SensorSpec {
            id: "cam-1".into(),
            kind: SensorKind::Vision,
            position_m: [0.0, 0.0, 3.0],
            yaw_rad: 0.0,
            pitch_rad: 0.0,
            roll_rad: 0.0,
            fov_half_angle_rad: default_fov(),
            update_rate_hz: 30.0,
            sigma_m: 0.1,
            detection_probability: 0.98,
            health_schedule: vec![
                HealthPhase { t_s: 10.0, health: SensorHealth::Degraded },
                HealthPhase { t_s: 20.0, health: SensorHealth::Down },
            ],
        };
        assert_eq!(s.health_at(0.0), SensorHealth::Ok);
        assert_eq!(s.health_at(10.0), SensorHealth::Degraded);
        assert_eq!(s.health_at(19.99), SensorHealth::Degraded);
        assert_eq!(s.health_at(20.0), SensorHealth::Down);
        assert_eq!(s.health_at(1e9), SensorHealth::Down);
    }

    #[test]
    fn mode_parses_case_insensitively() {
        assert_eq!("baseline".parse::<RunMode>().unwrap(), RunMode::Baseline);
        assert_eq!("KNOWLEDGE".parse::<RunMode>().unwrap(), RunMode::Knowledge);
        assert!("5g".parse::<RunMode>().is_err());
    }

    #[test]
    fn load_falls_back_to_bundled_names() {
        let cfg = ScenarioConfig::load("static_floor").unwrap();
        assert_eq!(cfg.name, "static_floor");
        let err = ScenarioConfig::load("no_such_thing").unwrap_err().to_string();
        assert!(err.contains("bundled"), "{err}");
    }
}
