//! The knowledge agent: sensor fusion, position authentication, and the
//! services it renders to the antenna.
//!
//! The agent lives beside the RAN, not inside it. It consumes world-frame
//! sensor observations, maintains a fused environment estimate, and emits
//! [`RanCnt`](crate::ran::RanCnt) directives: direct beam switches while
//! the estimate is sharp, restricted sweep windows while it is blurry,
//! channel estimates when tracked motion touches a link corridor, and a
//! fallback order when it cannot vouch for anything. Position claims are
//! checked against the estimate and a persistent fingerprint map.
//!
//! Free functions in this module are the individually testable pieces;
//! [`agent::KnowledgeAgent`] wires them together with the bookkeeping
//! (witness windows, change anchors, advisory dedupe) a live deployment
//! needs.

pub mod agent;
pub mod fingerprint;

pub use agent::{AuditEntry, KaStepOutput, KaWorld, KnowledgeAgent};
pub use fingerprint::{cell_of, witness_hash, FingerprintRecord, MapDb};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::ran::{array_gain_db, AuthDecision, AuthReason, BeamCodebook, RanCnt, Verdict};
use crate::raytrace::{compose_cir, predict_blockage, trace_paths_with, BlockageEvent, MovingBox};
use crate::scene::{
    geofence_contains, point_segment_distance, Pose, RoutePlan, SceneModel, Vec3,
};
use crate::sensors::WorldObservation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EntityClass {
    #[serde(rename = "UE")]
    Ue,
    #[serde(rename = "AGV")]
    Agv,
    #[serde(rename = "PASSIVE")]
    Passive,
}

/// Fused belief about one tracked object.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityEstimate {
    pub class: EntityClass,
    pub position: Vec3,
    pub covariance: Matrix3<f64>,
    pub last_seen_s: f64,
}

/// The agent's world picture at one instant. Entities older than the
/// staleness window never appear here; fusion drops them.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EnvState {
    pub t_s: f64,
    pub entities: BTreeMap<String, EntityEstimate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MovedEntity {
    pub id: String,
    pub from: Vec3,
    pub to: Vec3,
    pub distance_m: f64,
}

/// What changed since the last issued estimates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChangeSet {
    pub moved: Vec<MovedEntity>,
    pub appeared: Vec<(String, Vec3)>,
    pub disappeared: Vec<(String, Vec3)>,
}

impl ChangeSet {
    pub fn is_empty(&self) -> bool {
        self.moved.is_empty() && self.appeared.is_empty() && self.disappeared.is_empty()
    }
}

/// Physical envelope of an entity as far as propagation cares: carried
/// box extents (None for point objects like a handheld) and surface
/// reflectivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntityPhysical {
    pub extents: Option<Vec3>,
    pub reflectivity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum KaMode {
    #[serde(rename = "KNOWLEDGE")]
    Knowledge,
    #[serde(rename = "WINDOW")]
    Window,
    #[serde(rename = "FALLBACK")]
    Fallback,
}

impl KaMode {
    pub fn as_str(self) -> &'static str {
        match self {
            KaMode::Knowledge => "KNOWLEDGE",
            KaMode::Window => "WINDOW",
            KaMode::Fallback => "FALLBACK",
        }
    }
}

/// Tunables of the knowledge agent. Defaults are the deployment values
/// used by the bundled scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KaConfig {
    /// Accept threshold on the squared Mahalanobis distance of a claim;
    /// the 99th percentile of a chi-square with 3 degrees of freedom.
    pub gate_mahalanobis_sq: f64,
    /// Minimum accumulated motion before an entity counts as moved, m.
    pub move_threshold_m: f64,
    /// Half-width of a restricted sweep window, in bearing sigmas.
    pub window_k: f64,
    /// Maximum age of an estimate before it stops counting, seconds.
    pub staleness_s: f64,
    /// Position sigma (largest covariance axis) up to which the agent
    /// steers beams directly, metres.
    pub sigma_knowledge_max_m: f64,
    /// Maximum distance between a claim and a witnessed entity, metres.
    pub witness_gate_m: f64,
    /// Gate for associating anonymous detections to tracked objects, m.
    pub assoc_gate_m: f64,
    /// Position sigma assigned to camera detections, metres.
    pub vision_sigma_m: f64,
    /// How often an admitted UE is re-verified, seconds.
    pub reverify_period_s: f64,
    /// Radius of the link corridor capsule for channel relevance, m.
    pub corridor_radius_m: f64,
    /// Blockage look-ahead horizon, seconds.
    pub predict_horizon_s: f64,
    /// Blockage look-ahead step, seconds.
    pub predict_dt_s: f64,
    /// Below this antenna-to-UE range the bearing is too unstable for a
    /// window; the agent orders fallback instead, metres.
    pub min_window_range_m: f64,
    /// Array-gain margin a candidate beam must have over the currently
    /// held one before the agent switches, dB. Suppresses flapping when
    /// the estimated bearing jitters around a beam boundary.
    pub beam_hysteresis_db: f64,
}

impl Default for KaConfig {
    fn default() -> Self {
        KaConfig {
            gate_mahalanobis_sq: 11.34,
            move_threshold_m: 0.25,
            window_k: 3.0,
            staleness_s: 0.5,
            sigma_knowledge_max_m: 0.5,
            witness_gate_m: 2.0,
            assoc_gate_m: 1.0,
            vision_sigma_m: 0.1,
            reverify_period_s: 1.0,
            corridor_radius_m: 1.0,
            predict_horizon_s: 5.0,
            predict_dt_s: 0.05,
            min_window_range_m: 0.5,
            beam_hysteresis_db: 1.0,
        }
    }
}

impl KaConfig {
    pub fn validate(&self, key: &str) -> crate::Result<()> {
        let positives = [
            ("gate_mahalanobis_sq", self.gate_mahalanobis_sq),
            ("move_threshold_m", self.move_threshold_m),
            ("window_k", self.window_k),
            ("staleness_s", self.staleness_s),
            ("sigma_knowledge_max_m", self.sigma_knowledge_max_m),
            ("witness_gate_m", self.witness_gate_m),
            ("assoc_gate_m", self.assoc_gate_m),
            ("vision_sigma_m", self.vision_sigma_m),
            ("reverify_period_s", self.reverify_period_s),
            ("corridor_radius_m", self.corridor_radius_m),
            ("predict_horizon_s", self.predict_horizon_s),
            ("predict_dt_s", self.predict_dt_s),
            ("min_window_range_m", self.min_window_range_m),
        ];
        for (name, v) in positives {
            if !v.is_finite() || v <= 0.0 {
                return Err(crate::Error::scenario(format!(
                    "{key}.{name}: must be positive, got {v}"
                )));
            }
        }
        if !self.beam_hysteresis_db.is_finite() || self.beam_hysteresis_db < 0.0 {
            return Err(crate::Error::scenario(format!(
                "{key}.beam_hysteresis_db: must be nonnegative, got {}",
                self.beam_hysteresis_db
            )));
        }
        if self.predict_horizon_s < self.predict_dt_s {
            return Err(crate::Error::scenario(format!(
                "{key}.predict_horizon_s: must be at least predict_dt_s"
            )));
        }
        Ok(())
    }
}

// ── fusion ─────────────────────────────────────────────────────────────

/// Largest covariance eigenvalue, i.e. the squared sigma of the loosest
/// axis of the estimate.
fn max_variance(cov: &Matrix3<f64>) -> f64 {
    let eig = cov.symmetric_eigenvalues();
    eig[0].max(eig[1]).max(eig[2]).max(0.0)
}

/// Squared Mahalanobis distance of `x` from a Gaussian (mean, cov). A
/// singular covariance is regularized with a tiny diagonal so exact
/// measurements still gate correctly; an exactly matching point is 0
/// regardless of covariance.
pub fn mahalanobis_sq(x: Vec3, mean: Vec3, cov: &Matrix3<f64>) -> f64 {
    let d = Vector3::from(x - mean);
    if d == Vector3::zeros() {
        return 0.0;
    }
    let inv = cov
        .try_inverse()
        .or_else(|| (cov + Matrix3::identity() * 1e-12).try_inverse())
        .expect("regularized covariance is invertible");
    (d.transpose() * inv * d)[0].max(0.0)
}

fn obs_covariance(o: &WorldObservation, cfg: &KaConfig) -> Option<Matrix3<f64>> {
    match o.covariance {
        Some(c) => {
            // Reject junk: asymmetric or indefinite matrices.
            if (c - c.transpose()).norm() > 1e-9 {
                log::warn!("sensor {}: asymmetric covariance dropped", o.sensor_id);
                return None;
            }
            let eig = c.symmetric_eigenvalues();
            if eig.iter().any(|&e| e < -1e-12) {
                log::warn!("sensor {}: indefinite covariance dropped", o.sensor_id);
                return None;
            }
            Some(c)
        }
        None => Some(Matrix3::identity() * cfg.vision_sigma_m * cfg.vision_sigma_m),
    }
}

/// Fuse one step's observations into a fresh environment estimate,
/// additionally reporting which sensor contributed to which entity.
///
/// Identified observations group by entity id. Anonymous detections
/// associate to the nearest previously tracked passive object within the
/// association gate, or mint a new id from their grid cell. Per entity,
/// a single measurement passes through untouched (bit-exact); several
/// combine by inverse-covariance weighting. Entities unseen this step
/// carry over until they exceed the staleness window, then drop.
pub fn fuse_detailed(
    observations: &[WorldObservation],
    prev: &EnvState,
    classes: &BTreeMap<String, EntityClass>,
    cfg: &KaConfig,
    now: f64,
) -> (EnvState, Vec<(String, String)>) {
    let mut buckets: BTreeMap<String, Vec<(Vec3, Matrix3<f64>)>> = BTreeMap::new();
    let mut attributions: Vec<(String, String)> = Vec::new();

    for o in observations {
        let Some(cov) = obs_covariance(o, cfg) else { continue };
        let id = match &o.entity_id {
            Some(id) => id.clone(),
            None => {
                let nearest = prev
                    .entities
                    .iter()
                    .filter(|(_, e)| e.class == EntityClass::Passive)
                    .map(|(id, e)| (id, e.position.distance(o.position)))
                    .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite distances"));
                match nearest {
                    Some((id, d)) if d <= cfg.assoc_gate_m => id.clone(),
                    _ => {
                        let (ci, cj) = fingerprint::cell_of(o.position);
                        format!("obj-{ci}-{cj}")
                    }
                }
            }
        };
        attributions.push((id.clone(), o.sensor_id.clone()));
        buckets.entry(id).or_default().push((o.position, cov));
    }

    let mut entities = BTreeMap::new();
    for (id, ms) in &buckets {
        let (position, covariance) = if ms.len() == 1 {
            // Single source: exact passthrough, no arithmetic at all.
            ms[0]
        } else {
            let mut info = Matrix3::zeros();
            let mut weighted = Vector3::zeros();
            for (x, c) in ms {
                let w = c
                    .try_inverse()
                    .or_else(|| (c + Matrix3::identity() * 1e-12).try_inverse())
                    .expect("regularized covariance is invertible");
                info += w;
                weighted += w * Vector3::from(*x);
            }
            let cov = info
                .try_inverse()
                .or_else(|| (info + Matrix3::identity() * 1e-12).try_inverse())
                .expect("information matrix is invertible");
            (Vec3::from(cov * weighted), cov)
        };
        let class = classes.get(id).copied().unwrap_or(EntityClass::Passive);
        entities.insert(
            id.clone(),
            EntityEstimate { class, position, covariance, last_seen_s: now },
        );
    }

    // Carry unobserved entities that are still fresh enough.
    for (id, e) in &prev.entities {
        if !entities.contains_key(id) && now - e.last_seen_s <= cfg.staleness_s {
            entities.insert(id.clone(), e.clone());
        }
    }

    (EnvState { t_s: now, entities }, attributions)
}

/// [`fuse_detailed`] without the attribution report.
pub fn fuse(
    observations: &[WorldObservation],
    prev: &EnvState,
    classes: &BTreeMap<String, EntityClass>,
    cfg: &KaConfig,
    now: f64,
) -> EnvState {
    fuse_detailed(observations, prev, classes, cfg, now).0
}

// ── authentication ─────────────────────────────────────────────────────

/// Decide a position claim against the fused environment and the
/// fingerprint map.
///
/// The decision sequence is fixed: geofence first, then presence of a
/// witnessed radio-capable entity near the claim, then the Mahalanobis
/// gate against that entity's estimate, then the fingerprint of the
/// claimed cell. A missing witness is a REJECT while sensors are up and
/// an UNVERIFIED admission when they are known to be out. Accepting into
/// a vacant cell seeds it; a hash mismatch in an occupied cell rejects.
#[allow(clippy::too_many_arguments)]
pub fn verify_ue(
    claimed: Vec3,
    env: &EnvState,
    witness_sets: &BTreeMap<String, Vec<String>>,
    map: &mut MapDb,
    scene: &SceneModel,
    cfg: &KaConfig,
    sensors_available: bool,
    now: f64,
) -> AuthDecision {
    if !geofence_contains(scene, claimed) {
        return AuthDecision {
            verdict: Verdict::Reject,
            reason: AuthReason::Geofence,
            mahalanobis_sq: None,
        };
    }

    // Only radio-capable carriers vouch for a claim; a parked cart near
    // the claimed spot must not authenticate anyone.
    let candidate = env
        .entities
        .iter()
        .filter(|(_, e)| e.class != EntityClass::Passive)
        .map(|(id, e)| (id, e, e.position.distance(claimed)))
        .min_by(|a, b| a.2.partial_cmp(&b.2).expect("finite distances"));

    let (cand_id, cand, dist) = match candidate {
        Some(c) if c.2 <= cfg.witness_gate_m => c,
        _ => {
            return if sensors_available {
                AuthDecision {
                    verdict: Verdict::Reject,
                    reason: AuthReason::NoWitness,
                    mahalanobis_sq: None,
                }
            } else {
                AuthDecision {
                    verdict: Verdict::Unverified,
                    reason: AuthReason::SensorOutage,
                    mahalanobis_sq: None,
                }
            };
        }
    };
    let _ = dist;

    let d2 = mahalanobis_sq(claimed, cand.position, &cand.covariance);
    if d2 > cfg.gate_mahalanobis_sq {
        return AuthDecision {
            verdict: Verdict::Reject,
            reason: AuthReason::PositionMismatch,
            mahalanobis_sq: Some(d2),
        };
    }

    let witnesses = witness_sets.get(cand_id).map(|w| w.as_slice()).unwrap_or(&[]);
    if witnesses.is_empty() {
        return AuthDecision {
            verdict: Verdict::Reject,
            reason: AuthReason::NoWitness,
            mahalanobis_sq: Some(d2),
        };
    }
    let hash = witness_hash(witnesses);
    let cell = cell_of(claimed);
    match map.get(cell) {
        None => {
            map.seed(cell, hash, now);
            AuthDecision {
                verdict: Verdict::Accept,
                reason: AuthReason::NewCellSeeded,
                mahalanobis_sq: Some(d2),
            }
        }
        Some(rec) if rec.hash == hash => {
            map.confirm(cell, now);
            AuthDecision {
                verdict: Verdict::Accept,
                reason: AuthReason::PositionVerified,
                mahalanobis_sq: Some(d2),
            }
        }
        Some(_) => AuthDecision {
            verdict: Verdict::Reject,
            reason: AuthReason::FingerprintMismatch,
            mahalanobis_sq: Some(d2),
        },
    }
}

// ── beam services ──────────────────────────────────────────────────────

/// Codebook beam with the highest array gain toward the UE's estimated
/// bearing; ties go to the lowest index. None when the UE is not in the
/// environment estimate.
pub fn select_beam(
    env: &EnvState,
    ue_id: &str,
    antenna_pose: &Pose,
    cb: &BeamCodebook,
) -> Option<RanCnt> {
    select_beam_sticky(env, ue_id, antenna_pose, cb, None, 0.0)
}

/// [`select_beam`] with switching hysteresis: the currently `held` beam
/// is kept unless the best beam beats it by at least `hysteresis_db` of
/// array gain at the estimated bearing. Stops the serving beam from
/// flapping when the bearing sits near a beam boundary and the position
/// estimate jitters across it.
pub fn select_beam_sticky(
    env: &EnvState,
    ue_id: &str,
    antenna_pose: &Pose,
    cb: &BeamCodebook,
    held: Option<usize>,
    hysteresis_db: f64,
) -> Option<RanCnt> {
    let e = env.entities.get(ue_id)?;
    let d = e.position - antenna_pose.position;
    let bearing = crate::ran::normalize_angle(d.azimuth() - antenna_pose.yaw);
    let mut best = 0usize;
    let mut best_gain = f64::NEG_INFINITY;
    for i in 0..cb.beams.len() {
        let g = array_gain_db(cb, i, bearing).expect("index in range");
        if g > best_gain {
            best_gain = g;
            best = i;
        }
    }
    if let Some(h) = held {
        if h < cb.beams.len() && best != h {
            let held_gain = array_gain_db(cb, h, bearing).expect("index in range");
            if best_gain - held_gain < hysteresis_db {
                return Some(RanCnt::SetBeam { beam: h });
            }
        }
    }
    Some(RanCnt::SetBeam { beam: best })
}

/// Restricted sweep window covering `window_k` bearing sigmas around the
/// UE's estimated bearing, clipped to the codebook span. Falls back when
/// the UE is too close for a stable bearing, when the window would cover
/// the whole span anyway, or when no codebook beam lands inside it.
/// None when the UE is not tracked at all.
pub fn narrow_sweep(
    env: &EnvState,
    ue_id: &str,
    antenna_pose: &Pose,
    cb: &BeamCodebook,
    cfg: &KaConfig,
) -> Option<RanCnt> {
    let e = env.entities.get(ue_id)?;
    let d = e.position - antenna_pose.position;
    let range = (d.x * d.x + d.y * d.y).sqrt();
    if range < cfg.min_window_range_m {
        return Some(RanCnt::Fallback);
    }
    let bearing = crate::ran::normalize_angle(d.azimuth() - antenna_pose.yaw);
    let sigma_pos = max_variance(&e.covariance).sqrt();
    let half = cfg.window_k * (sigma_pos / range).atan();
    let (span_lo, span_hi) = cb.span();
    let lo = bearing - half;
    let hi = bearing + half;
    if lo <= span_lo && hi >= span_hi {
        // No narrower than a full sweep; knowledge buys nothing here.
        return Some(RanCnt::Fallback);
    }
    let lo = lo.max(span_lo);
    let hi = hi.min(span_hi);
    if lo > hi {
        return Some(RanCnt::Fallback);
    }
    if cb.beams_in_window(lo, hi).is_empty() {
        // Narrower than the beam pitch: widen outward to the nearest
        // steering angle on each side so the sweep probes something.
        // Beyond the outermost steering angle this collapses to a
        // single-beam window.
        let first = cb.beams[0];
        let last = *cb.beams.last().expect("codebook is never empty");
        let lo = cb.beams.iter().cloned().filter(|&b| b <= lo).fold(first, f64::max);
        let hi = cb.beams.iter().cloned().filter(|&b| b >= hi).fold(last, f64::min);
        return Some(RanCnt::SweepWindow { lo_rad: lo, hi_rad: hi });
    }
    Some(RanCnt::SweepWindow { lo_rad: lo, hi_rad: hi })
}

// ── change tracking and channel service ────────────────────────────────

/// Diff the current environment against anchor positions (the positions
/// current estimates were last issued for). Motion counts only above the
/// threshold, strictly.
pub fn detect_change(
    anchor: &BTreeMap<String, Vec3>,
    env: &EnvState,
    threshold_m: f64,
) -> ChangeSet {
    let mut out = ChangeSet::default();
    for (id, e) in &env.entities {
        match anchor.get(id) {
            Some(&prev) => {
                let dist = prev.distance(e.position);
                if dist > threshold_m {
                    out.moved.push(MovedEntity {
                        id: id.clone(),
                        from: prev,
                        to: e.position,
                        distance_m: dist,
                    });
                }
            }
            None => out.appeared.push((id.clone(), e.position)),
        }
    }
    for (id, &pos) in anchor {
        if !env.entities.contains_key(id) {
            out.disappeared.push((id.clone(), pos));
        }
    }
    out
}

/// Which service level the agent can offer a UE right now: direct beam
/// steering while the estimate is fresh and sharp, a restricted sweep
/// while fresh but blurry, fallback otherwise.
pub fn evaluate_mode(env: &EnvState, ue_id: &str, cfg: &KaConfig, now: f64) -> KaMode {
    match env.entities.get(ue_id) {
        None => KaMode::Fallback,
        Some(e) => {
            if now - e.last_seen_s > cfg.staleness_s {
                KaMode::Fallback
            } else if max_variance(&e.covariance).sqrt() <= cfg.sigma_knowledge_max_m {
                KaMode::Knowledge
            } else {
                KaMode::Window
            }
        }
    }
}

/// Output of the channel service: control directives plus predicted
/// line-of-sight losses.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChannelUpdate {
    pub directives: Vec<RanCnt>,
    pub advisories: Vec<BlockageEvent>,
}

/// React to environment changes on behalf of every served UE.
///
/// Channel estimates are corridor-gated: a UE's link is re-traced (over
/// the static scene plus every other tracked entity's box) only when a
/// change touches the capsule of radius `corridor_radius_m` around the
/// antenna-to-UE segment. A trace failure turns into a Fallback
/// directive for safety. The blockage look-ahead is not corridor-gated:
/// any change re-runs it, because an approaching blocker matters well
/// before it enters the corridor. Advisory dedupe is the caller's job.
#[allow(clippy::too_many_arguments)]
pub fn provide_channel(
    env: &EnvState,
    changes: &ChangeSet,
    scene: &SceneModel,
    phys: &BTreeMap<String, EntityPhysical>,
    routes: &BTreeMap<String, RoutePlan>,
    ue_ids: &[String],
    antenna_pos: Vec3,
    cfg: &KaConfig,
    now: f64,
) -> ChannelUpdate {
    let mut update = ChannelUpdate::default();
    if changes.is_empty() {
        return update;
    }
    let mut touched: Vec<Vec3> = Vec::new();
    for m in &changes.moved {
        touched.push(m.from);
        touched.push(m.to);
    }
    for (_, p) in &changes.appeared {
        touched.push(*p);
    }
    for (_, p) in &changes.disappeared {
        touched.push(*p);
    }

    for ue in ue_ids {
        let Some(est) = env.entities.get(ue) else { continue };

        let affected = touched
            .iter()
            .any(|p| point_segment_distance(*p, antenna_pos, est.position) <= cfg.corridor_radius_m);
        if affected {
            let mut extras = Vec::new();
            for (id, other) in &env.entities {
                if id == ue {
                    continue;
                }
                if let Some(ph) = phys.get(id) {
                    if let Some(ext) = ph.extents {
                        extras.push(crate::scene::Aabb::centered(
                            other.position,
                            ext,
                            ph.reflectivity,
                            id.clone(),
                        ));
                    }
                }
            }
            match trace_paths_with(scene, &extras, antenna_pos, est.position) {
                Ok(paths) => {
                    let cir = compose_cir(paths, scene.carrier_frequency_hz);
                    update.directives.push(RanCnt::ChannelEstimate {
                        ue_id: ue.clone(),
                        taps: cir.taps(),
                    });
                }
                Err(e) => {
                    log::warn!("channel trace failed for {ue}: {e}; ordering fallback");
                    update.directives.push(RanCnt::Fallback);
                }
            }
        }

        // Look-ahead over every entity with a known route and a physical
        // box. The UE itself is predicted from its fleet route when one
        // is known, otherwise from where it stands now.
        let mut blockers = Vec::new();
        for (id, other) in &env.entities {
            if id == ue {
                continue;
            }
            if let (Some(route), Some(ph)) = (routes.get(id), phys.get(id)) {
                if let Some(ext) = ph.extents {
                    let _ = other;
                    blockers.push(MovingBox {
                        label: id.clone(),
                        route: route.clone(),
                        extents: ext,
                        reflectivity: ph.reflectivity,
                    });
                }
            }
        }
        if !blockers.is_empty() {
            let ue_route = routes
                .get(ue)
                .cloned()
                .unwrap_or_else(|| RoutePlan::stationary(est.position));
            match predict_blockage(
                scene,
                antenna_pos,
                ue,
                &ue_route,
                &blockers,
                now,
                cfg.predict_horizon_s,
                cfg.predict_dt_s,
            ) {
                Ok(events) => update.advisories.extend(events),
                Err(e) => log::warn!("blockage look-ahead failed for {ue}: {e}"),
            }
        }
    }
    update
}

// ── tests ──────────────────────────────────────────────────────────────
