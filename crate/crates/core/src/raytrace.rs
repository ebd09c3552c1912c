//! Deterministic single-bounce ray tracing over axis-aligned geometry.
//!
//! Paths are found with the image method: for every reflective box face,
//! mirror the transmitter across the face plane, intersect the image-to-
//! receiver segment with the face rectangle, and keep the bounce point if
//! both legs are unoccluded. Together with the direct line of sight this
//! yields every zero- and one-bounce path exactly; no stochastic element
//! is involved, so identical inputs always produce identical paths in
//! identical order.
//!
//! Complex path gains use the free-space amplitude `lambda / (4 pi d)`
//! scaled by the product of bounce reflectivities, with phase `-2 pi d /
//! lambda`. Delays are `d / c` with the exact SI speed of light.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::{
    mirror_across_face, route_position_at, segment_clear, Aabb, RoutePlan, SceneModel, Vec3,
};

/// Speed of light in vacuum, metres per second (exact SI value).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathKind {
    Los,
    Reflected,
}

/// One propagation path between two points.
///
/// Invariants maintained by the constructors here:
/// - `delay == length / SPEED_OF_LIGHT`
/// - `gain.norm() <= lambda / (4 pi length)` (reflectivity never exceeds 1)
/// - LOS paths have exactly 2 vertices, reflected paths exactly 3
#[derive(Debug, Clone, PartialEq)]
pub struct PropPath {
    pub kind: PathKind,
    /// Path polyline from transmitter to receiver, bounce points included.
    pub vertices: Vec<Vec3>,
    /// Total polyline length in metres.
    pub length: f64,
    /// Propagation delay in seconds.
    pub delay: f64,
    /// Complex amplitude gain at the frequency the path was traced for.
    pub gain: Complex64,
    /// Product of amplitude reflection coefficients along the path; 1 for
    /// line of sight. Kept so the gain can be re-evaluated at another
    /// carrier without retracing.
    pub reflectivity: f64,
    /// Departure azimuth at the transmitter, world frame, radians.
    pub aod: f64,
    /// Arrival azimuth at the receiver (direction the energy comes from,
    /// seen from the receiver), world frame, radians.
    pub aoa: f64,
}

/// Channel impulse response: traced paths sorted by increasing delay.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Cir {
    pub paths: Vec<PropPath>,
    pub carrier_frequency_hz: f64,
}

impl Cir {
    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Sum of tap powers, linear scale.
    pub fn total_power(&self) -> f64 {
        self.paths.iter().map(|p| p.gain.norm_sqr()).sum()
    }

    /// (delay, complex gain) pairs in delay order.
    pub fn taps(&self) -> Vec<(f64, Complex64)> {
        self.paths.iter().map(|p| (p.delay, p.gain)).collect()
    }
}

/// Predicted interval during which a receiver loses line of sight.
/// `end_s` is exclusive: the link is predicted blocked for
/// `start_s <= t < end_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockageEvent {
    pub ue_id: String,
    pub start_s: f64,
    pub end_s: f64,
}

/// A box that follows a route; placing it at a time yields an [`Aabb`]
/// centred on the route position.
#[derive(Debug, Clone, PartialEq)]
pub struct MovingBox {
    pub label: String,
    pub route: RoutePlan,
    pub extents: Vec3,
    pub reflectivity: f64,
}

impl MovingBox {
    pub fn place_at(&self, t: f64) -> Result<Aabb> {
        let c = route_position_at(&self.route, t)?;
        Ok(Aabb::centered(c, self.extents, self.reflectivity, self.label.clone()))
    }
}

/// Complex free-space gain of a path of the given total length, bounce
/// amplitude product and carrier. Length and frequency must be positive.
pub fn path_gain(length: f64, reflectivity: f64, frequency_hz: f64) -> Complex64 {
    debug_assert!(length > 0.0, "path length must be positive");
    debug_assert!(frequency_hz > 0.0, "carrier must be positive");
    let lambda = SPEED_OF_LIGHT / frequency_hz;
    let amp = lambda / (4.0 * std::f64::consts::PI * length) * reflectivity;
    let phase = -2.0 * std::f64::consts::PI * length / lambda;
    Complex64::from_polar(amp, phase)
}

fn make_path(kind: PathKind, vertices: Vec<Vec3>, reflectivity: f64, frequency_hz: f64) -> PropPath {
    let length: f64 = vertices.windows(2).map(|w| w[0].distance(w[1])).sum();
    let tx = vertices[0];
    let rx = *vertices.last().expect("path has vertices");
    let first = vertices[1];
    let before_rx = vertices[vertices.len() - 2];
    PropPath {
        kind,
        length,
        delay: length / SPEED_OF_LIGHT,
        gain: path_gain(length, reflectivity, frequency_hz),
        reflectivity,
        aod: (first - tx).azimuth(),
        aoa: (before_rx - rx).azimuth(),
        vertices,
    }
}

/// All zero- and one-bounce paths from `tx` to `rx` through the scene's
/// static obstacles plus `extras` (boxes for movable objects at their
/// current positions). Occlusion tests run against the full obstacle set.
/// Output order is deterministic: LOS first, then reflections in obstacle
/// and face order.
///
/// Errors when `tx == rx`.
pub fn trace_paths_with(
    scene: &SceneModel,
    extras: &[Aabb],
    tx: Vec3,
    rx: Vec3,
) -> Result<Vec<PropPath>> {
    if tx == rx {
        return Err(Error::invalid("trace endpoints coincide"));
    }
    let all = || scene.obstacles.iter().chain(extras.iter());
    let fc = scene.carrier_frequency_hz;
    let mut paths = Vec::new();

    if segment_clear(all(), tx, rx)? {
        paths.push(make_path(PathKind::Los, vec![tx, rx], 1.0, fc));
    }

    for obstacle in all() {
        if obstacle.reflectivity <= 0.0 {
            continue;
        }
        for face in obstacle.faces() {
            // A zero-thickness box carries two coincident faces; keep one.
            if face.outward > 0.0
                && obstacle.min.component(face.axis) == obstacle.max.component(face.axis)
            {
                continue;
            }
            // Both endpoints must lie strictly on the same side of the
            // face plane: that is the illuminated-side condition for a
            // specular bounce, and it also excludes grazing geometry.
            let dt = tx.component(face.axis) - face.coord;
            let dr = rx.component(face.axis) - face.coord;
            if dt * dr <= 0.0 {
                continue;
            }
            let image = mirror_across_face(tx, &face);
            // The image sits on the opposite side, so the image-receiver
            // segment crosses the plane at exactly one interior point.
            let denom = rx.component(face.axis) - image.component(face.axis);
            let s = (face.coord - image.component(face.axis)) / denom;
            let q = image + (rx - image) * s;
            if !face.contains_projection(q) {
                continue;
            }
            if q == tx || q == rx {
                continue;
            }
            if !segment_clear(all(), tx, q)? || !segment_clear(all(), q, rx)? {
                continue;
            }
            paths.push(make_path(
                PathKind::Reflected,
                vec![tx, q, rx],
                obstacle.reflectivity,
                fc,
            ));
        }
    }
    Ok(paths)
}

/// [`trace_paths_with`] over only the scene's static obstacles.
pub fn trace_paths(scene: &SceneModel, tx: Vec3, rx: Vec3) -> Result<Vec<PropPath>> {
    trace_paths_with(scene, &[], tx, rx)
}

/// Bundle paths into a channel impulse response at the given carrier.
/// Gains are re-evaluated at `frequency_hz` from each path's length and
/// reflectivity; taps come out sorted by increasing delay.
pub fn compose_cir(mut paths: Vec<PropPath>, frequency_hz: f64) -> Cir {
    for p in &mut paths {
        p.gain = path_gain(p.length, p.reflectivity, frequency_hz);
    }
    // Delays are positive finite by construction, so the comparison is
    // total; stable sort keeps the deterministic trace order on ties.
    paths.sort_by(|a, b| a.delay.partial_cmp(&b.delay).expect("finite delays"));
    Cir { paths, carrier_frequency_hz: frequency_hz }
}

/// Step the moving blockers along their routes and report the intervals
/// during which the antenna-to-receiver line of sight is blocked, looking
/// `horizon_s` ahead of `now_s` in steps of `dt_s`. The receiver follows
/// `ue_route`. Static obstacles participate too. Consecutive blocked
/// samples merge into one event; `end_s` extends one step past the last
/// blocked sample. Requires `dt_s > 0` and `horizon_s >= dt_s`.
pub fn predict_blockage(
    scene: &SceneModel,
    tx: Vec3,
    ue_id: &str,
    ue_route: &RoutePlan,
    blockers: &[MovingBox],
    now_s: f64,
    horizon_s: f64,
    dt_s: f64,
) -> Result<Vec<BlockageEvent>> {
    if !(dt_s > 0.0) || !(horizon_s >= dt_s) {
        return Err(Error::invalid(format!(
            "blockage prediction needs dt > 0 and horizon >= dt, got dt={dt_s} horizon={horizon_s}"
        )));
    }
    let steps = (horizon_s / dt_s).round().max(1.0) as u64;
    let mut events: Vec<BlockageEvent> = Vec::new();
    let mut open: Option<(f64, f64)> = None; // (start, last blocked sample)
    for k in 0..=steps {
        let t = now_s + k as f64 * dt_s;
        let ue = route_position_at(ue_route, t)?;
        let mut boxes = Vec::with_capacity(blockers.len());
        for b in blockers {
            boxes.push(b.place_at(t)?);
        }
        let clear = segment_clear(scene.obstacles.iter().chain(boxes.iter()), tx, ue)?;
        if !clear {
            open = match open {
                Some((s, _)) => Some((s, t)),
                None => Some((t, t)),
            };
        } else if let Some((s, e)) = open.take() {
            events.push(BlockageEvent { ue_id: ue_id.to_string(), start_s: s, end_s: e + dt_s });
        }
    }
    if let Some((s, e)) = open {
        events.push(BlockageEvent { ue_id: ue_id.to_string(), start_s: s, end_s: e + dt_s });
    }
    Ok(events)
}

// ── tests ──────────────────────────────────────────────────────────────
