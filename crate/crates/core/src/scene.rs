//! Static world geometry and the predicates everything else builds on.
//!
//! A scene is a set of axis-aligned boxes (walls, racks, parked carts), a
//! convex geofence polygon in the floor plane, and a carrier frequency.
//! Moving things are described by piecewise-linear routes and only become
//! boxes when a caller places them at a specific time. All coordinates are
//! metres in a fixed world frame: x east, y north, z up.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Offset applied to both segment endpoints in line-of-sight tests so a
/// path that merely starts or ends on a box face is not reported as
/// passing through that box.
pub const LOS_ENDPOINT_OFFSET: f64 = 1e-6;

/// Tolerance for geofence boundary membership and convexity checks.
const FENCE_EPS: f64 = 1e-9;

// ── vectors and poses ──────────────────────────────────────────────────

/// Cartesian point or direction in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    /// Unit vector in the same direction. Zero-length input is a caller
    /// bug; callers that cannot rule it out check `norm()` first.
    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        debug_assert!(n > 0.0, "normalizing zero vector");
        self * (1.0 / n)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Azimuth of this direction in the floor plane, radians in (-pi, pi].
    pub fn azimuth(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn component(self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
            Axis::Z => self.z,
        }
    }

    pub fn set_component(&mut self, axis: Axis, v: f64) {
        match axis {
            Axis::X => self.x = v,
            Axis::Y => self.y = v,
            Axis::Z => self.z = v,
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for nalgebra::Vector3<f64> {
    fn from(v: Vec3) -> Self {
        nalgebra::Vector3::new(v.x, v.y, v.z)
    }
}

impl From<nalgebra::Vector3<f64>> for Vec3 {
    fn from(v: nalgebra::Vector3<f64>) -> Self {
        Vec3::new(v.x, v.y, v.z)
    }
}

/// Rigid placement of a device: position plus intrinsic yaw/pitch/roll.
/// Yaw 0 faces +x, yaw pi/2 faces +y. Angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec3,
    #[serde(default)]
    pub yaw: f64,
    #[serde(default)]
    pub pitch: f64,
    #[serde(default)]
    pub roll: f64,
}

impl Pose {
    pub fn identity() -> Self {
        Pose { position: Vec3::ZERO, yaw: 0.0, pitch: 0.0, roll: 0.0 }
    }

    pub fn at(position: Vec3, yaw: f64) -> Self {
        Pose { position, yaw, pitch: 0.0, roll: 0.0 }
    }

    pub fn rotation(&self) -> nalgebra::Rotation3<f64> {
        nalgebra::Rotation3::from_euler_angles(self.roll, self.pitch, self.yaw)
    }

    /// Map a point from this device's local frame into the world frame.
    pub fn to_world(&self, local: Vec3) -> Vec3 {
        let r = self.rotation() * nalgebra::Vector3::from(local);
        Vec3::from(r) + self.position
    }

    /// Map a world point into this device's local frame. Inverse of
    /// `to_world` up to rounding.
    pub fn to_local(&self, world: Vec3) -> Vec3 {
        let d = nalgebra::Vector3::from(world - self.position);
        Vec3::from(self.rotation().inverse() * d)
    }

    pub fn validate(&self, key: &str) -> Result<()> {
        if !self.position.is_finite() {
            return Err(Error::scenario(format!("{key}.position: not finite")));
        }
        for (name, a) in [("yaw", self.yaw), ("pitch", self.pitch), ("roll", self.roll)] {
            if !a.is_finite() || a < -std::f64::consts::PI || a > std::f64::consts::PI {
                return Err(Error::scenario(format!(
                    "{key}.{name}: must be finite and within [-pi, pi], got {a}"
                )));
            }
        }
        Ok(())
    }
}

// ── boxes ──────────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// The two axes spanning a face perpendicular to this one, in fixed
    /// (u, v) order.
    pub fn others(self) -> (Axis, Axis) {
        match self {
            Axis::X => (Axis::Y, Axis::Z),
            Axis::Y => (Axis::X, Axis::Z),
            Axis::Z => (Axis::X, Axis::Y),
        }
    }
}

/// Axis-aligned box with a power reflection behaviour on all six faces.
/// `reflectivity` is an amplitude coefficient in [0, 1]; 0 means the
/// surface absorbs everything and spawns no reflected paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
    #[serde(default)]
    pub reflectivity: f64,
    #[serde(default)]
    pub label: String,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3, reflectivity: f64, label: impl Into<String>) -> Self {
        Aabb { min, max, reflectivity, label: label.into() }
    }

    /// Box of given full extents centred at `center`.
    pub fn centered(center: Vec3, extents: Vec3, reflectivity: f64, label: impl Into<String>) -> Self {
        let h = extents * 0.5;
        Aabb::new(center - h, center + h, reflectivity, label)
    }

    /// Closed-boundary membership: points on a face count as inside.
    pub fn contains_point(&self, p: Vec3) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    /// The six bounded face rectangles, min-side face first per axis.
    pub fn faces(&self) -> [Face; 6] {
        let mut out = [Face {
            axis: Axis::X,
            coord: 0.0,
            umin: 0.0,
            umax: 0.0,
            vmin: 0.0,
            vmax: 0.0,
            outward: -1.0,
        }; 6];
        let mut i = 0;
        for axis in Axis::ALL {
            let (ua, va) = axis.others();
            for (coord, outward) in [(self.min.component(axis), -1.0), (self.max.component(axis), 1.0)]
            {
                out[i] = Face {
                    axis,
                    coord,
                    umin: self.min.component(ua),
                    umax: self.max.component(ua),
                    vmin: self.min.component(va),
                    vmax: self.max.component(va),
                    outward,
                };
                i += 1;
            }
        }
        out
    }

    pub fn validate(&self, key: &str) -> Result<()> {
        if !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::scenario(format!("{key}: corner not finite")));
        }
        if self.min.x > self.max.x || self.min.y > self.max.y || self.min.z > self.max.z {
            return Err(Error::scenario(format!("{key}: min exceeds max")));
        }
        if !(0.0..=1.0).contains(&self.reflectivity) {
            return Err(Error::scenario(format!(
                "{key}.reflectivity: must be within [0, 1], got {}",
                self.reflectivity
            )));
        }
        Ok(())
    }
}

/// One bounded rectangular face of a box. The face lies in the plane
/// `axis = coord`; (u, v) are the remaining axes in `Axis::others` order.
/// `outward` is the sign of the outward normal along `axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    pub axis: Axis,
    pub coord: f64,
    pub umin: f64,
    pub umax: f64,
    pub vmin: f64,
    pub vmax: f64,
    pub outward: f64,
}

impl Face {
    /// Closed containment of a point's (u, v) projection in the rectangle.
    /// The caller guarantees the point is on the face plane.
    pub fn contains_projection(&self, p: Vec3) -> bool {
        let (ua, va) = self.axis.others();
        let u = p.component(ua);
        let v = p.component(va);
        u >= self.umin && u <= self.umax && v >= self.vmin && v <= self.vmax
    }
}

// ── routes ─────────────────────────────────────────────────────────────

/// Timestamped waypoint on a route. Times are seconds from scenario start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    pub t_s: f64,
    pub position: Vec3,
}

/// Piecewise-linear motion plan. Position is interpolated between
/// waypoints and clamped to the ends outside the covered interval, so a
/// single waypoint describes a stationary object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoutePlan {
    pub waypoints: Vec<Waypoint>,
}

impl RoutePlan {
    pub fn stationary(position: Vec3) -> Self {
        RoutePlan { waypoints: vec![Waypoint { t_s: 0.0, position }] }
    }

    pub fn validate(&self, key: &str) -> Result<()> {
        if self.waypoints.is_empty() {
            return Err(Error::scenario(format!("{key}.waypoints: empty route")));
        }
        for (i, w) in self.waypoints.iter().enumerate() {
            if !w.t_s.is_finite() || !w.position.is_finite() {
                return Err(Error::scenario(format!("{key}.waypoints[{i}]: not finite")));
            }
        }
        for (i, pair) in self.waypoints.windows(2).enumerate() {
            if pair[1].t_s <= pair[0].t_s {
                return Err(Error::scenario(format!(
                    "{key}.waypoints[{}].t_s: times must be strictly increasing",
                    i + 1
                )));
            }
        }
        Ok(())
    }
}

/// Position along `route` at time `t`, clamped to the first and last
/// waypoints outside the covered interval.
///
/// Errors when the route has no waypoints.
pub fn route_position_at(route: &RoutePlan, t: f64) -> Result<Vec3> {
    let wp = &route.waypoints;
    let first = wp.first().ok_or_else(|| Error::invalid("route has no waypoints"))?;
    if t <= first.t_s {
        return Ok(first.position);
    }
    let last = wp.last().expect("nonempty");
    if t >= last.t_s {
        return Ok(last.position);
    }
    // Strictly increasing times, t inside the covered interval: find the
    // segment whose start is the last waypoint not after t.
    let idx = wp.partition_point(|w| w.t_s <= t);
    let a = wp[idx - 1];
    let b = wp[idx];
    let f = (t - a.t_s) / (b.t_s - a.t_s);
    Ok(a.position + (b.position - a.position) * f)
}

// ── scene ──────────────────────────────────────────────────────────────

/// Static world model shared by the tracer, the sensors and the knowledge
/// agent. The geofence is a convex polygon in the floor plane, given as
/// (x, y) vertices in order (either winding).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneModel {
    #[serde(default)]
    pub obstacles: Vec<Aabb>,
    pub geofence: Vec<[f64; 2]>,
    pub carrier_frequency_hz: f64,
}

impl SceneModel {
    pub fn empty(carrier_frequency_hz: f64) -> Self {
        SceneModel { obstacles: Vec::new(), geofence: Vec::new(), carrier_frequency_hz }
    }

    pub fn validate(&self, key: &str) -> Result<()> {
        for (i, b) in self.obstacles.iter().enumerate() {
            b.validate(&format!("{key}.obstacles[{i}]"))?;
        }
        if !self.carrier_frequency_hz.is_finite() || self.carrier_frequency_hz <= 0.0 {
            return Err(Error::scenario(format!(
                "{key}.carrier_frequency_hz: must be positive, got {}",
                self.carrier_frequency_hz
            )));
        }
        if self.geofence.len() < 3 {
            return Err(Error::scenario(format!(
                "{key}.geofence: needs at least 3 vertices, got {}",
                self.geofence.len()
            )));
        }
        for (i, v) in self.geofence.iter().enumerate() {
            if !v[0].is_finite() || !v[1].is_finite() {
                return Err(Error::scenario(format!("{key}.geofence[{i}]: not finite")));
            }
        }
        // Convexity: every corner must turn the same way (collinear runs
        // are allowed, a fully degenerate polygon is not).
        let n = self.geofence.len();
        let mut sign = 0.0f64;
        for i in 0..n {
            let a = self.geofence[i];
            let b = self.geofence[(i + 1) % n];
            let c = self.geofence[(i + 2) % n];
            let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
            if cross.abs() <= FENCE_EPS {
                continue;
            }
            if sign == 0.0 {
                sign = cross.signum();
            } else if cross.signum() != sign {
                return Err(Error::scenario(format!("{key}.geofence: polygon is not convex")));
            }
        }
        if sign == 0.0 {
            return Err(Error::scenario(format!("{key}.geofence: polygon has zero area")));
        }
        Ok(())
    }
}

// ── predicates ─────────────────────────────────────────────────────────

/// Whether the closed segment from `a` to `b` meets the closed box, by
/// slab clipping of the segment parameter. Touching a face, edge or
/// corner counts as intersecting.
///
/// Errors when `a == b` (degenerate segment).
pub fn segment_intersects_aabb(a: Vec3, b: Vec3, aabb: &Aabb) -> Result<bool> {
    if a == b {
        return Err(Error::invalid("degenerate segment: endpoints coincide"));
    }
    let mut tmin = 0.0f64;
    let mut tmax = 1.0f64;
    for axis in Axis::ALL {
        let s = a.component(axis);
        let e = b.component(axis);
        let lo = aabb.min.component(axis);
        let hi = aabb.max.component(axis);
        let d = e - s;
        if d == 0.0 {
            // Segment parallel to this slab: it intersects only if it
            // already lies within the closed slab.
            if s < lo || s > hi {
                return Ok(false);
            }
        } else {
            let inv = 1.0 / d;
            let mut t1 = (lo - s) * inv;
            let mut t2 = (hi - s) * inv;
            if t1 > t2 {
                std::mem::swap(&mut t1, &mut t2);
            }
            tmin = tmin.max(t1);
            tmax = tmax.min(t2);
            if tmin > tmax {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Whether the open line of sight between `a` and `b` is free of every box
/// in `obstacles`. Both endpoints are pulled inward along the segment by
/// [`LOS_ENDPOINT_OFFSET`] so that merely starting or ending on a face
/// does not occlude; the offset shrinks for very short segments so the
/// tested span stays nonempty.
///
/// Errors when `a == b`.
pub fn segment_clear<'a>(
    obstacles: impl IntoIterator<Item = &'a Aabb>,
    a: Vec3,
    b: Vec3,
) -> Result<bool> {
    if a == b {
        return Err(Error::invalid("degenerate line of sight: endpoints coincide"));
    }
    let dir = b - a;
    let len = dir.norm();
    let eps = LOS_ENDPOINT_OFFSET.min(len * 0.25);
    let unit = dir * (1.0 / len);
    let a2 = a + unit * eps;
    let b2 = b - unit * eps;
    if a2 == b2 {
        // Offsetting collapsed the segment; fall back to the raw span.
        for o in obstacles {
            if segment_intersects_aabb(a, b, o)? {
                return Ok(false);
            }
        }
        return Ok(true);
    }
    for o in obstacles {
        if segment_intersects_aabb(a2, b2, o)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// [`segment_clear`] over the scene's static obstacles.
pub fn los_clear(scene: &SceneModel, a: Vec3, b: Vec3) -> Result<bool> {
    segment_clear(&scene.obstacles, a, b)
}

/// Shortest distance from point `p` to the closed segment `[a, b]`.
/// Degenerate segments reduce to point distance.
pub fn point_segment_distance(p: Vec3, a: Vec3, b: Vec3) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

/// Reflect a point across the infinite plane carrying `face`. Applying
/// the same face twice returns the original point.
pub fn mirror_across_face(p: Vec3, face: &Face) -> Vec3 {
    let mut out = p;
    out.set_component(face.axis, 2.0 * face.coord - p.component(face.axis));
    out
}

/// Whether `p`'s floor-plane projection lies inside the scene's convex
/// geofence, boundary inclusive. An empty or degenerate fence contains
/// nothing.
pub fn geofence_contains(scene: &SceneModel, p: Vec3) -> bool {
    let fence = &scene.geofence;
    let n = fence.len();
    if n < 3 {
        return false;
    }
    // Orientation from the signed area, so either winding works.
    let mut area2 = 0.0;
    for i in 0..n {
        let a = fence[i];
        let b = fence[(i + 1) % n];
        area2 += a[0] * b[1] - b[0] * a[1];
    }
    if area2.abs() <= FENCE_EPS {
        return false;
    }
    let orient = area2.signum();
    for i in 0..n {
        let a = fence[i];
        let b = fence[(i + 1) % n];
        let cross = (b[0] - a[0]) * (p.y - a[1]) - (b[1] - a[1]) * (p.x - a[0]);
        if orient * cross < -FENCE_EPS {
            return false;
        }
    }
    true
}

// ── tests ──────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_box() -> Aabb {
        Aabb::new(Vec3::ZERO, Vec3::new(1.0, 1.0, 1.0), 0.0, "unit")
    }

    /// Sampling stand-in for the slab test: walk many points along the
    /// segment and ask closed-box membership for each.
    fn segment_hits_by_sampling(a: Vec3, b: Vec3, aabb: &Aabb, samples: usize) -> bool {
        (0..=samples).any(|i| {
            let f = i as f64 / samples as f64;
            aabb.contains_point(a + (b - a) * f)
        })
    }

    #[test]
    fn segment_misses_box_outside() {
        let hit = segment_intersects_aabb(
            Vec3::new(-1.0, -1.0, -1.0),
            Vec3::new(-1.0, -1.0, 2.0),
            &unit_box(),
        )
        .unwrap();
        assert!(!hit);
    }

    #[test]
    fn segment_through_center_hits() {
        let hit = segment_intersects_aabb(
            Vec3::new(-1.0, 0.5, 0.5),
            Vec3::new(2.0, 0.5, 0.5),
            &unit_box(),
        )
        .unwrap();
        assert!(hit);
    }

    #[test]
    fn segment_grazing_face_counts_as_hit() {
        // Runs inside the x = 0 face plane; closed semantics include it.
        let a = Vec3::new(0.0, -1.0, 0.5);
        let b = Vec3::new(0.0, 2.0, 0.5);
        assert!(segment_intersects_aabb(a, b, &unit_box()).unwrap());
        assert!(segment_hits_by_sampling(a, b, &unit_box(), 10_000));
    }

    #[test]
    fn segment_degenerate_is_error() {
        let p = Vec3::new(0.5, 0.5, 0.5);
        assert!(segment_intersects_aabb(p, p, &unit_box()).is_err());
        assert!(segment_clear(&[unit_box()], p, p).is_err());
    }

    #[test]
    fn los_empty_scene_is_clear() {
        let scene = SceneModel::empty(140e9);
        assert!(los_clear(&scene, Vec3::ZERO, Vec3::new(10.0, 0.0, 0.0)).unwrap());
    }

    #[test]
    fn los_blocked_by_box_between() {
        let mut scene = SceneModel::empty(140e9);
        scene.obstacles.push(Aabb::new(
            Vec3::new(4.0, -1.0, -1.0),
            Vec3::new(6.0, 1.0, 1.0),
            0.0,
            "slab",
        ));
        assert!(!los_clear(&scene, Vec3::ZERO, Vec3::new(10.0, 0.0, 0.0)).unwrap());
    }

    #[test]
    fn los_ignores_box_beyond_endpoint() {
        let mut scene = SceneModel::empty(140e9);
        let beyond = Aabb::new(
            Vec3::new(11.0, -1.0, -1.0),
            Vec3::new(13.0, 1.0, 1.0),
            0.0,
            "beyond",
        );
        scene.obstacles.push(beyond.clone());
        let a = Vec3::ZERO;
        let b = Vec3::new(10.0, 0.0, 0.0);
        assert!(los_clear(&scene, a, b).unwrap());
        // Sampling the segment confirms no point lies in the box.
        assert!(!segment_hits_by_sampling(a, b, &beyond, 10_000));
    }

    #[test]
    fn los_endpoint_on_face_not_occluded() {
        // Receiver sits exactly on a box face; the inward offset keeps
        // the box from occluding its own surface point.
        let mut scene = SceneModel::empty(140e9);
        scene.obstacles.push(unit_box());
        let a = Vec3::new(-2.0, 0.5, 0.5);
        let b = Vec3::new(0.0, 0.5, 0.5);
        assert!(los_clear(&scene, a, b).unwrap());
        // A segment continuing past the face is blocked.
        assert!(!los_clear(&scene, a, Vec3::new(0.5, 0.5, 0.5)).unwrap());
    }

    #[test]
    fn mirror_across_given_planes() {
        let face_x2 = Face {
            axis: Axis::X,
            coord: 2.0,
            umin: 0.0,
            umax: 1.0,
            vmin: 0.0,
            vmax: 1.0,
            outward: 1.0,
        };
        assert_eq!(
            mirror_across_face(Vec3::new(1.0, 1.0, 1.0), &face_x2),
            Vec3::new(3.0, 1.0, 1.0)
        );
        let face_z0 = Face {
            axis: Axis::Z,
            coord: 0.0,
            umin: 0.0,
            umax: 1.0,
            vmin: 0.0,
            vmax: 1.0,
            outward: -1.0,
        };
        assert_eq!(
            mirror_across_face(Vec3::new(0.0, 0.0, 5.0), &face_z0),
            Vec3::new(0.0, 0.0, -5.0)
        );
    }

    #[test]
    fn geofence_square_membership() {
        let mut scene = SceneModel::empty(140e9);
        scene.geofence = vec![[0.0, 0.0], [10.0, 0.0], [10.0, 10.0], [0.0, 10.0]];
        assert!(geofence_contains(&scene, Vec3::new(5.0, 5.0, 1.7)));
        assert!(!geofence_contains(&scene, Vec3::new(-0.1, 5.0, 0.0)));
        // Boundary point counts as inside.
        assert!(geofence_contains(&scene, Vec3::new(10.0, 5.0, 0.0)));
        // Corner too.
        assert!(geofence_contains(&scene, Vec3::new(0.0, 0.0, 0.0)));
    }

    #[test]
    fn geofence_winding_independent() {
        let mut cw = SceneModel::empty(140e9);
        cw.geofence = vec![[0.0, 10.0], [10.0, 10.0], [10.0, 0.0], [0.0, 0.0]];
        assert!(geofence_contains(&cw, Vec3::new(5.0, 5.0, 0.0)));
        assert!(!geofence_contains(&cw, Vec3::new(11.0, 5.0, 0.0)));
    }

    #[test]
    fn route_interpolates_and_clamps() {
        let route = RoutePlan {
            waypoints: vec![
                Waypoint { t_s: 0.0, position: Vec3::ZERO },
                Waypoint { t_s: 10.0, position: Vec3::new(10.0, 0.0, 0.0) },
            ],
        };
        assert_eq!(route_position_at(&route, 5.0).unwrap(), Vec3::new(5.0, 0.0, 0.0));
        assert_eq!(route_position_at(&route, -3.0).unwrap(), Vec3::ZERO);
        assert_eq!(route_position_at(&route, 42.0).unwrap(), Vec3::new(10.0, 0.0, 0.0));
    }

    #[test]
    fn route_multi_segment() {
        let route = RoutePlan {
            waypoints: vec![
                Waypoint { t_s: 0.0, position: Vec3::ZERO },
                Waypoint { t_s: 2.0, position: Vec3::new(2.0, 0.0, 0.0) },
                Waypoint { t_s: 6.0, position: Vec3::new(2.0, 8.0, 0.0) },
            ],
        };
        assert_eq!(route_position_at(&route, 1.0).unwrap(), Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(route_position_at(&route, 4.0).unwrap(), Vec3::new(2.0, 4.0, 0.0));
        assert_eq!(route_position_at(&route, 2.0).unwrap(), Vec3::new(2.0, 0.0, 0.0));
    }

    #[test]
    fn empty_route_is_error() {
        let route = RoutePlan { waypoints: vec![] };
        assert!(route_position_at(&route, 0.0).is_err());
    }

    #[test]
    fn point_segment_distance_cases() {
        let a = Vec3::ZERO;
        let b = Vec3::new(10.0, 0.0, 0.0);
        // Perpendicular foot inside the segment.
        assert!((point_segment_distance(Vec3::new(5.0, 3.0, 0.0), a, b) - 3.0).abs() < 1e-12);
        // Clamped to an endpoint.
        assert!((point_segment_distance(Vec3::new(-4.0, 3.0, 0.0), a, b) - 5.0).abs() < 1e-12);
        assert!((point_segment_distance(Vec3::new(14.0, 3.0, 0.0), a, b) - 5.0).abs() < 1e-12);
        // On the segment.
        assert_eq!(point_segment_distance(Vec3::new(2.0, 0.0, 0.0), a, b), 0.0);
        // Degenerate segment.
        assert!((point_segment_distance(Vec3::new(1.0, 1.0, 1.0), a, a) - 3.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn pose_round_trip() {
        let pose = Pose { position: Vec3::new(3.0, -2.0, 1.5), yaw: 0.7, pitch: -0.2, roll: 0.1 };
        let p = Vec3::new(1.0, 2.0, 3.0);
        let back = pose.to_local(pose.to_world(p));
        assert!(back.distance(p) < 1e-12);
    }

    #[test]
    fn faces_cover_box_planes() {
        let b = Aabb::new(Vec3::new(1.0, 2.0, 3.0), Vec3::new(4.0, 6.0, 8.0), 0.5, "b");
        let faces = b.faces();
        assert_eq!(faces.len(), 6);
        let coords: Vec<(Axis, f64)> = faces.iter().map(|f| (f.axis, f.coord)).collect();
        assert!(coords.contains(&(Axis::X, 1.0)));
        assert!(coords.contains(&(Axis::X, 4.0)));
        assert!(coords.contains(&(Axis::Y, 2.0)));
        assert!(coords.contains(&(Axis::Y, 6.0)));
        assert!(coords.contains(&(Axis::Z, 3.0)));
        assert!(coords.contains(&(Axis::Z, 8.0)));
        // Face rectangle of the x-min face spans (y, z).
        let fx = faces.iter().find(|f| f.axis == Axis::X && f.coord == 1.0).unwrap();
        assert_eq!((fx.umin, fx.umax, fx.vmin, fx.vmax), (2.0, 6.0, 3.0, 8.0));
        assert_eq!(fx.outward, -1.0);
    }

    #[test]
    fn scene_validation_rejects_bad_fields() {
        let mut s = SceneModel::empty(140e9);
        s.geofence = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        s.obstacles.push(Aabb::new(Vec3::ZERO, Vec3::new(1.0, 1.0, 1.0), 1.5, "hot"));
        let err = s.validate("scene").unwrap_err().to_string();
        assert!(err.contains("reflectivity"), "{err}");

        let mut s2 = SceneModel::empty(140e9);
        s2.geofence = vec![[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [2.0, 1.0]];
        let err2 = s2.validate("scene").unwrap_err().to_string();
        assert!(err2.contains("convex"), "{err2}");
    }

    proptest! {
        #[test]
        fn segment_order_symmetric(
            ax in -5.0f64..5.0, ay in -5.0f64..5.0, az in -5.0f64..5.0,
            bx in -5.0f64..5.0, by in -5.0f64..5.0, bz in -5.0f64..5.0,
        ) {
            let a = Vec3::new(ax, ay, az);
            let b = Vec3::new(bx, by, bz);
            prop_assume!(a != b);
            let bx = Aabb::new(Vec3::new(-1.0, -1.0, -1.0), Vec3::new(1.0, 1.0, 1.0), 0.0, "c");
            prop_assert_eq!(
                segment_intersects_aabb(a, b, &bx).unwrap(),
                segment_intersects_aabb(b, a, &bx).unwrap()
            );
        }

        #[test]
        fn mirror_is_involutive(
            px in -10.0f64..10.0, py in -10.0f64..10.0, pz in -10.0f64..10.0,
            coord in -5.0f64..5.0,
        ) {
            for axis in Axis::ALL {
                let face = Face { axis, coord, umin: 0.0, umax: 1.0, vmin: 0.0, vmax: 1.0, outward: 1.0 };
                let p = Vec3::new(px, py, pz);
                let twice = mirror_across_face(mirror_across_face(p, &face), &face);
                prop_assert!(twice.distance(p) < 1e-12);
            }
        }

        #[test]
        fn route_position_is_continuous(t in 0.0f64..10.0) {
            let route = RoutePlan {
                waypoints: vec![
                    Waypoint { t_s: 0.0, position: Vec3::ZERO },
                    Waypoint { t_s: 4.0, position: Vec3::new(4.0, 2.0, 0.0) },
                    Waypoint { t_s: 10.0, position: Vec3::new(-2.0, 2.0, 1.0) },
                ],
            };
            let h = 1e-6;
            let p0 = route_position_at(&route, t).unwrap();
            let p1 = route_position_at(&route, t + h).unwrap();
            // Max segment speed is ~1.6 m/s; a 1 us step moves < 2 um.
            prop_assert!(p0.distance(p1) < 2e-6);
        }
    }
}
