//! Stateful knowledge-agent wrapper around the fusion and service ops.
//!
//! [`KnowledgeAgent::step`] is called once per simulation tick with the
//! world-frame observations of that tick. It refreshes the fused
//! environment, tracks per-UE service modes, and emits the minimal set of
//! control directives: beam switches only when the best beam actually
//! changes, sweep windows when entering window service or when a sweep is
//! due, fallback orders exactly once per loss of knowledge, channel
//! estimates and blockage advisories only on tracked change. Position
//! claims go through [`KnowledgeAgent::verify_claim`], which also keeps
//! the tamper-evident audit trail.

use std::collections::BTreeMap;

use crate::ran::{AuthDecision, PositionVerifier, RachRequest, RanCnt};
use crate::raytrace::BlockageEvent;
use crate::scene::{Pose, RoutePlan, SceneModel, Vec3};
use crate::sensors::WorldObservation;

use super::{
    detect_change, evaluate_mode, fuse_detailed, narrow_sweep, provide_channel, select_beam_sticky,
    verify_ue, EntityClass, EntityPhysical, EnvState, KaConfig, KaMode, MapDb,
};
use crate::ran::BeamCodebook;

/// Everything static the agent knows about the deployment.
#[derive(Debug, Clone)]
pub struct KaWorld {
    pub scene: SceneModel,
    pub antenna_pose: Pose,
    pub codebook: BeamCodebook,
    /// Registered radio tags and fleet vehicles.
    pub classes: BTreeMap<String, EntityClass>,
    /// Physical envelopes for propagation, per entity id.
    pub phys: BTreeMap<String, EntityPhysical>,
    /// Fleet-managed routes the agent may use for prediction.
    pub routes: BTreeMap<String, RoutePlan>,
    /// Served UEs, sorted.
    pub ue_ids: Vec<String>,
}

/// One authentication attempt and its outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditEntry {
    pub t_s: f64,
    pub ue_id: String,
    pub claimed: Vec3,
    pub decision: AuthDecision,
}

/// What one agent tick wants the RAN to do.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KaStepOutput {
    pub directives: Vec<RanCnt>,
    /// Newly issued advisories (already deduplicated).
    pub advisories: Vec<BlockageEvent>,
    pub modes: BTreeMap<String, KaMode>,
}

pub struct KnowledgeAgent {
    pub cfg: KaConfig,
    pub world: KaWorld,
    pub env: EnvState,
    pub map: MapDb,
    pub audit: Vec<AuditEntry>,
    /// entity id -> sensor id -> last time that sensor saw it.
    witness_window: BTreeMap<String, BTreeMap<String, f64>>,
    /// Positions current estimates were issued for.
    anchor: BTreeMap<String, Vec3>,
    /// Already-advised blockage intervals per UE.
    advised: BTreeMap<String, Vec<(f64, f64)>>,
    last_beam: BTreeMap<String, usize>,
    last_window: BTreeMap<String, (f64, f64)>,
    modes: BTreeMap<String, KaMode>,
    /// True while the agent believes the RAN is in fallback (it ordered
    /// one and has not superseded it since).
    ran_in_fallback: bool,
    /// Last time any sensor delivered a report, even an empty frame.
    last_report_t: Option<f64>,
    now: f64,
}

impl KnowledgeAgent {
    pub fn new(world: KaWorld, cfg: KaConfig, map: MapDb) -> Self {
        KnowledgeAgent {
            cfg,
            world,
            env: EnvState::default(),
            map,
            audit: Vec::new(),
            witness_window: BTreeMap::new(),
            anchor: BTreeMap::new(),
            advised: BTreeMap::new(),
            last_beam: BTreeMap::new(),
            last_window: BTreeMap::new(),
            modes: BTreeMap::new(),
            ran_in_fallback: false,
            last_report_t: None,
            now: 0.0,
        }
    }

    /// Whether sensors have delivered anything recently enough to base
    /// decisions on. Silence longer than the staleness window means an
    /// outage from the agent's point of view.
    pub fn sensors_available(&self, at: f64) -> bool {
        self.last_report_t.is_some_and(|t| at - t <= self.cfg.staleness_s)
    }

    /// Current service mode per served UE (last step's evaluation).
    pub fn modes(&self) -> &BTreeMap<String, KaMode> {
        &self.modes
    }

    /// Sorted ids of the sensors that saw `entity` within the staleness
    /// window ending at `at`.
    fn witnesses_of(&self, entity: &str, at: f64) -> Vec<String> {
        self.witness_window
            .get(entity)
            .map(|per_sensor| {
                per_sensor
                    .iter()
                    .filter(|(_, &t)| at - t <= self.cfg.staleness_s)
                    .map(|(s, _)| s.clone())
                    .collect()
            })
            .unwrap_or_default()
    }

    fn witness_sets(&self, at: f64) -> BTreeMap<String, Vec<String>> {
        self.witness_window
            .keys()
            .map(|e| (e.clone(), self.witnesses_of(e, at)))
            .collect()
    }

    /// Ingest one tick of observations and produce control output.
    /// `reports_received` counts sensor messages this tick including
    /// empty camera frames; it feeds outage detection. `sweep_due` tells
    /// the agent a periodic sweep boundary falls on this tick, so a
    /// standing sweep window must be refreshed now.
    pub fn step(
        &mut self,
        observations: &[WorldObservation],
        reports_received: usize,
        sweep_due: bool,
        now: f64,
    ) -> KaStepOutput {
        self.now = now;
        if reports_received > 0 {
            self.last_report_t = Some(now);
        }

        let (env, attributions) =
            fuse_detailed(observations, &self.env, &self.world.classes, &self.cfg, now);
        self.env = env;
        for (entity, sensor) in attributions {
            self.witness_window.entry(entity).or_default().insert(sensor, now);
        }
        // Prune witness entries that fell out of the staleness window.
        let horizon = now - self.cfg.staleness_s;
        self.witness_window.retain(|_, per_sensor| {
            per_sensor.retain(|_, t| *t >= horizon);
            !per_sensor.is_empty()
        });

        let mut out = KaStepOutput::default();

        // Service mode and beam handling per UE.
        for ue in &self.world.ue_ids.clone() {
            let mode = evaluate_mode(&self.env, ue, &self.cfg, now);
            out.modes.insert(ue.clone(), mode);
            match mode {
                KaMode::Fallback => {
                    if !self.ran_in_fallback {
                        out.directives.push(RanCnt::Fallback);
                        self.ran_in_fallback = true;
                        self.last_beam.remove(ue);
                        self.last_window.remove(ue);
                    }
                }
                KaMode::Knowledge => {
                    if let Some(RanCnt::SetBeam { beam }) = select_beam_sticky(
                        &self.env,
                        ue,
                        &self.world.antenna_pose,
                        &self.world.codebook,
                        self.last_beam.get(ue).copied(),
                        self.cfg.beam_hysteresis_db,
                    ) {
                        let changed = self.last_beam.get(ue) != Some(&beam);
                        if changed || self.ran_in_fallback {
                            out.directives.push(RanCnt::SetBeam { beam });
                            self.last_beam.insert(ue.clone(), beam);
                            self.last_window.remove(ue);
                            self.ran_in_fallback = false;
                        }
                    }
                }
                KaMode::Window => {
                    match narrow_sweep(
                        &self.env,
                        ue,
                        &self.world.antenna_pose,
                        &self.world.codebook,
                        &self.cfg,
                    ) {
                        Some(RanCnt::SweepWindow { lo_rad, hi_rad }) => {
                            let prev = self.last_window.get(ue);
                            let moved = prev.map_or(true, |(lo, hi)| {
                                (lo - lo_rad).abs() > 1e-9 || (hi - hi_rad).abs() > 1e-9
                            });
                            // Refresh on change and on every sweep tick:
                            // a window only restricts the next sweep.
                            if moved || sweep_due || self.ran_in_fallback {
                                out.directives.push(RanCnt::SweepWindow { lo_rad, hi_rad });
                                self.last_window.insert(ue.clone(), (lo_rad, hi_rad));
                                self.last_beam.remove(ue);
                                self.ran_in_fallback = false;
                            }
                        }
                        Some(RanCnt::Fallback) | None => {
                            if !self.ran_in_fallback {
                                out.directives.push(RanCnt::Fallback);
                                self.ran_in_fallback = true;
                                self.last_beam.remove(ue);
                                self.last_window.remove(ue);
                            }
                        }
                        Some(other) => unreachable!("narrow_sweep yields windows, got {other:?}"),
                    }
                }
            }
            self.modes.insert(ue.clone(), mode);
        }

        // Change-driven channel service. Only knowledge-grade estimates
        // are worth pushing; window/fallback positions are too blurry to
        // trace against.
        let changes = detect_change(&self.anchor, &self.env, self.cfg.move_threshold_m);
        if !changes.is_empty() {
            let served: Vec<String> = self
                .world
                .ue_ids
                .iter()
                .filter(|u| out.modes.get(*u) == Some(&KaMode::Knowledge))
                .cloned()
                .collect();
            let upd = provide_channel(
                &self.env,
                &changes,
                &self.world.scene,
                &self.world.phys,
                &self.world.routes,
                &served,
                self.world.antenna_pose.position,
                &self.cfg,
                now,
            );
            for d in upd.directives {
                match d {
                    RanCnt::Fallback => {
                        if !self.ran_in_fallback {
                            out.directives.push(RanCnt::Fallback);
                            self.ran_in_fallback = true;
                        }
                    }
                    other => out.directives.push(other),
                }
            }
            for ev in upd.advisories {
                let list = self.advised.entry(ev.ue_id.clone()).or_default();
                let dup = list.iter().any(|&(s, e)| ev.start_s < e && s < ev.end_s);
                if !dup {
                    list.push((ev.start_s, ev.end_s));
                    out.advisories.push(ev);
                }
            }
            // Re-anchor everything the change report covered.
            for m in &changes.moved {
                self.anchor.insert(m.id.clone(), m.to);
            }
            for (id, p) in &changes.appeared {
                self.anchor.insert(id.clone(), *p);
            }
            for (id, _) in &changes.disappeared {
                self.anchor.remove(id);
            }
        }

        out.advisories.sort_by(|a, b| {
            (a.ue_id.as_str(), a.start_s)
                .partial_cmp(&(b.ue_id.as_str(), b.start_s))
                .expect("finite times")
        });
        out
    }

    /// Decide a position claim, recording it in the audit trail no
    /// matter the outcome.
    pub fn verify_claim(&mut self, req: &RachRequest) -> AuthDecision {
        let witness_sets = self.witness_sets(req.t_s);
        let sensors_available = self.sensors_available(req.t_s);
        let decision = verify_ue(
            req.claimed_position,
            &self.env,
            &witness_sets,
            &mut self.map,
            &self.world.scene,
            &self.cfg,
            sensors_available,
            req.t_s,
        );
        self.audit.push(AuditEntry {
            t_s: req.t_s,
            ue_id: req.ue_id.clone(),
            claimed: req.claimed_position,
            decision,
        });
        decision
    }
}

impl PositionVerifier for KnowledgeAgent {
    fn verify(&mut self, req: &RachRequest) -> Option<AuthDecision> {
        Some(self.verify_claim(req))
    }
}

// ── tests ──────────────────────────────────────────────────────────────
