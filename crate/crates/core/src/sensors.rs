//! Infrastructure sensor models: UWB position anchors and ceiling cameras.
//!
//! Every sensor reports in its own mounting frame; [`to_common_frame`]
//! lifts reports into the world frame, rotating covariances along. The
//! noise path is the only stochastic element, and every draw comes from a
//! caller-supplied RNG, so sensor output is a pure function of (truth,
//! config, rng state).

use nalgebra::Matrix3;
use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::scene::{los_clear, Pose, SceneModel, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SensorKind {
    #[serde(rename = "UWB")]
    Uwb,
    #[serde(rename = "VISION")]
    Vision,
}

/// Operational state of a sensor. DEGRADED doubles a UWB anchor's noise
/// sigma and halves a camera's detection probability; DOWN produces no
/// reports at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SensorHealth {
    #[serde(rename = "OK")]
    Ok,
    #[serde(rename = "DEGRADED")]
    Degraded,
    #[serde(rename = "DOWN")]
    Down,
}

/// Static identity and placement of one sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorMeta {
    pub sensor_id: String,
    pub kind: SensorKind,
    pub mounting_pose: Pose,
    /// Half-angle of the azimuth field of view, radians. Cameras only;
    /// anchors hear the whole hall.
    pub fov_half_angle_rad: f64,
}

impl SensorMeta {
    pub fn new(sensor_id: impl Into<String>, kind: SensorKind, mounting_pose: Pose) -> Self {
        SensorMeta {
            sensor_id: sensor_id.into(),
            kind,
            mounting_pose,
            fov_half_angle_rad: std::f64::consts::FRAC_PI_4,
        }
    }
}

/// Stochastic behaviour knobs for one sensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    /// Per-axis position noise sigma in metres (UWB).
    #[serde(default = "default_sigma")]
    pub sigma_m: f64,
    /// Probability that a visible object actually yields a detection
    /// (vision).
    #[serde(default = "default_detection_probability")]
    pub detection_probability: f64,
}

fn default_sigma() -> f64 {
    0.10
}

fn default_detection_probability() -> f64 {
    0.98
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            sigma_m: default_sigma(),
            detection_probability: default_detection_probability(),
        }
    }
}

/// Tagged position fix in the sensor's own frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionMeasurement {
    pub entity_id: String,
    pub position: Vec3,
    pub covariance: Matrix3<f64>,
}

/// One camera detection in the sensor's own frame. `entity_id` is present
/// when the object carries a registered tag the camera can re-identify.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub entity_id: Option<String>,
    pub center: Vec3,
    pub extents: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SensPayload {
    Position(PositionMeasurement),
    Detections(Vec<Detection>),
}

/// One sensor report at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SensState {
    pub meta: SensorMeta,
    pub t_s: f64,
    pub health: SensorHealth,
    pub payload: SensPayload,
}

/// What a camera is asked to look at: world-frame truth for one object.
#[derive(Debug, Clone, PartialEq)]
pub struct VisibleEntity {
    /// Registered tag, when the object has one.
    pub tag: Option<String>,
    pub center: Vec3,
    pub extents: Vec3,
}

/// Sensor-agnostic world-frame observation, the fusion input format.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldObservation {
    /// Entity identity when the sensor knew it; None for anonymous
    /// detections that still need association.
    pub entity_id: Option<String>,
    pub position: Vec3,
    /// Position covariance in the world frame, when the sensor reports
    /// one (UWB does, vision does not).
    pub covariance: Option<Matrix3<f64>>,
    pub extents: Option<Vec3>,
    pub sensor_id: String,
    pub t_s: f64,
}

/// One UWB range-fusion fix of a tagged entity. Returns None when the
/// anchor is DOWN. Noise is an independent zero-mean Gaussian per axis in
/// the sensor frame; DEGRADED doubles the sigma. The reported covariance
/// is the actual sampling covariance `sigma_eff^2 I`.
pub fn uwb_measure(
    true_position: Vec3,
    entity_id: &str,
    meta: &SensorMeta,
    noise: &NoiseModel,
    health: SensorHealth,
    t_s: f64,
    rng: &mut impl Rng,
) -> Option<SensState> {
    debug_assert_eq!(meta.kind, SensorKind::Uwb);
    if health == SensorHealth::Down {
        return None;
    }
    let sigma = match health {
        SensorHealth::Degraded => 2.0 * noise.sigma_m,
        _ => noise.sigma_m,
    };
    let local = meta.mounting_pose.to_local(true_position);
    // sigma = 0 contributes an exact 0.0 per axis, keeping the
    // measurement bit-identical to the truth in the sensor frame.
    let n = Normal::new(0.0, sigma).expect("nonnegative sigma");
    let measured = Vec3::new(
        local.x + n.sample(rng),
        local.y + n.sample(rng),
        local.z + n.sample(rng),
    );
    Some(SensState {
        meta: meta.clone(),
        t_s,
        health,
        payload: SensPayload::Position(PositionMeasurement {
            entity_id: entity_id.to_string(),
            position: measured,
            covariance: Matrix3::identity() * sigma * sigma,
        }),
    })
}

/// One camera frame over the given objects. Returns None when the camera
/// is DOWN. An object is a detection candidate when its centre lies
/// inside the azimuth field of view and the scene's static obstacles do
/// not occlude the camera-to-centre sight line; each candidate then
/// passes an independent Bernoulli draw. Candidates are processed in the
/// given order, so callers pass a deterministically ordered slice.
pub fn vision_detect(
    scene: &SceneModel,
    entities: &[VisibleEntity],
    meta: &SensorMeta,
    noise: &NoiseModel,
    health: SensorHealth,
    t_s: f64,
    rng: &mut impl Rng,
) -> Option<SensState> {
    debug_assert_eq!(meta.kind, SensorKind::Vision);
    if health == SensorHealth::Down {
        return None;
    }
    let p = match health {
        SensorHealth::Degraded => 0.5 * noise.detection_probability,
        _ => noise.detection_probability,
    };
    let bern = Bernoulli::new(p.clamp(0.0, 1.0)).expect("probability in range");
    let cam = meta.mounting_pose.position;
    let mut detections = Vec::new();
    for e in entities {
        if e.center == cam {
            continue;
        }
        let local = meta.mounting_pose.to_local(e.center);
        let az = local.y.atan2(local.x);
        if local.x <= 0.0 || az.abs() > meta.fov_half_angle_rad {
            continue;
        }
        if !los_clear(scene, cam, e.center).unwrap_or(false) {
            continue;
        }
        if bern.sample(rng) {
            detections.push(Detection {
                entity_id: e.tag.clone(),
                center: local,
                extents: e.extents,
            });
        }
    }
    Some(SensState {
        meta: meta.clone(),
        t_s,
        health,
        payload: SensPayload::Detections(detections),
    })
}

/// Lift a sensor report into world-frame observations. Positions map
/// through the mounting pose; covariances rotate as `R S R^T`, which
/// preserves symmetry and positive semidefiniteness.
pub fn to_common_frame(state: &SensState) -> Vec<WorldObservation> {
    let pose = &state.meta.mounting_pose;
    let r = pose.rotation();
    let rot = |m: &Matrix3<f64>| r.matrix() * m * r.matrix().transpose();
    match &state.payload {
        SensPayload::Position(m) => vec![WorldObservation {
            entity_id: Some(m.entity_id.clone()),
            position: pose.to_world(m.position),
            covariance: Some(rot(&m.covariance)),
            extents: None,
            sensor_id: state.meta.sensor_id.clone(),
            t_s: state.t_s,
        }],
        SensPayload::Detections(list) => list
            .iter()
            .map(|d| WorldObservation {
                entity_id: d.entity_id.clone(),
                position: pose.to_world(d.center),
                covariance: None,
                extents: Some(d.extents),
                sensor_id: state.meta.sensor_id.clone(),
                t_s: state.t_s,
            })
            .collect(),
    }
}

// ── tests ──────────────────────────────────────────────────────────────
