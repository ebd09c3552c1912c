//! Antenna array model and the RAN-side control surface.
//!
//! The antenna is a uniform linear array behind a fixed beam codebook.
//! Without outside knowledge the node finds beams the classic way, by
//! sweeping the codebook and measuring each candidate; the control verbs
//! in [`RanCnt`] let a knowledge agent short-circuit that: set a beam
//! directly, restrict the next sweep to a window, push a channel estimate,
//! or order a fallback to self-contained operation.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::raytrace::Cir;
use crate::scene::{Pose, Vec3};

/// Wrap an angle to the interval (-pi, pi].
pub fn normalize_angle(a: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut x = a % tau;
    if x > std::f64::consts::PI {
        x -= tau;
    } else if x <= -std::f64::consts::PI {
        x += tau;
    }
    x
}

// ── codebook ───────────────────────────────────────────────────────────

/// Uniform linear array codebook: `beams` holds the steering angle of
/// every entry, radians relative to the array boresight, endpoints
/// included. `element_spacing` is in carrier wavelengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamCodebook {
    pub n_elements: usize,
    pub element_spacing: f64,
    pub beams: Vec<f64>,
}

impl BeamCodebook {
    /// Codebook with `n_beams` steering angles evenly spaced over
    /// `[span_min, span_max]`, endpoints included.
    pub fn uniform(
        n_elements: usize,
        element_spacing: f64,
        n_beams: usize,
        span_min: f64,
        span_max: f64,
    ) -> Result<Self> {
        if n_elements == 0 {
            return Err(Error::invalid("codebook needs at least one element"));
        }
        if n_beams < 2 {
            return Err(Error::invalid("codebook needs at least two beams"));
        }
        if !(span_min < span_max) {
            return Err(Error::invalid("codebook span must be nonempty"));
        }
        if !(element_spacing > 0.0) {
            return Err(Error::invalid("element spacing must be positive"));
        }
        let step = (span_max - span_min) / (n_beams - 1) as f64;
        let beams = (0..n_beams).map(|i| span_min + i as f64 * step).collect();
        Ok(BeamCodebook { n_elements, element_spacing, beams })
    }

    /// (lowest, highest) steering angle in the codebook.
    pub fn span(&self) -> (f64, f64) {
        let lo = self.beams.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.beams.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// Indices of beams whose steering angle lies in `[lo, hi]`.
    pub fn beams_in_window(&self, lo: f64, hi: f64) -> Vec<usize> {
        self.beams
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= lo && b <= hi)
            .map(|(i, _)| i)
            .collect()
    }
}

impl Default for BeamCodebook {
    /// 16 half-wavelength elements, 32 beams over +-60 degrees.
    fn default() -> Self {
        let span = std::f64::consts::PI / 3.0;
        BeamCodebook::uniform(16, 0.5, 32, -span, span).expect("valid default codebook")
    }
}

/// Array gain of codebook entry `beam` toward azimuth `angle` (radians
/// relative to boresight), in dB, floored at -60. Peak value is
/// `20 log10(n_elements)` at the steering angle.
pub fn array_gain_db(cb: &BeamCodebook, beam: usize, angle: f64) -> Result<f64> {
    let steer = *cb
        .beams
        .get(beam)
        .ok_or_else(|| Error::invalid(format!("beam index {beam} out of range")))?;
    let n = cb.n_elements as f64;
    let psi = std::f64::consts::TAU * cb.element_spacing * (angle.sin() - steer.sin());
    let half = 0.5 * psi;
    let af = if half.sin().abs() < 1e-12 {
        // Main lobe or a grating lobe: the ratio tends to unity.
        1.0
    } else {
        ((n * half).sin() / (n * half.sin())).abs()
    };
    Ok((20.0 * (n * af).log10()).max(-60.0))
}

/// Linear amplitude form of [`array_gain_db`].
pub fn array_gain_amp(cb: &BeamCodebook, beam: usize, angle: f64) -> Result<f64> {
    Ok(10.0f64.powf(array_gain_db(cb, beam, angle)? / 20.0))
}

// ── sweeping ───────────────────────────────────────────────────────────

/// Outcome of an exhaustive or windowed beam sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepResult {
    pub best_beam: usize,
    /// Number of probe measurements the sweep consumed.
    pub measurements: usize,
}

/// Probe the given beams and pick the one with the highest measured
/// value; ties go to the lowest index. `probe` is called exactly once
/// per listed beam, in order.
pub fn sweep_beams_in(
    indices: &[usize],
    mut probe: impl FnMut(usize) -> f64,
) -> Option<SweepResult> {
    let mut best: Option<(usize, f64)> = None;
    for &i in indices {
        let v = probe(i);
        match best {
            Some((_, bv)) if v <= bv => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| SweepResult { best_beam: i, measurements: indices.len() })
}

/// Exhaustive sweep over the whole codebook.
pub fn sweep_beams(cb: &BeamCodebook, probe: impl FnMut(usize) -> f64) -> SweepResult {
    let all: Vec<usize> = (0..cb.beams.len()).collect();
    sweep_beams_in(&all, probe).expect("codebook is never empty")
}

// ── measurement ────────────────────────────────────────────────────────

/// Fixed radio parameters of the antenna site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AntennaConfig {
    pub pose: Pose,
    pub tx_power_dbm: f64,
    pub noise_floor_dbm: f64,
    /// Per-measurement RSSI noise sigma, dB.
    #[serde(default = "default_sigma_rssi")]
    pub sigma_rssi_db: f64,
    /// Angle-of-arrival estimation noise sigma, radians.
    #[serde(default = "default_sigma_aoa")]
    pub sigma_aoa_rad: f64,
    /// Cadence of the self-contained periodic beam sweep, seconds.
    pub sweep_period_s: f64,
}

fn default_sigma_rssi() -> f64 {
    1.0
}

fn default_sigma_aoa() -> f64 {
    0.035
}

/// Per-UE slice of a RAN measurement snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct UeRanRecord {
    pub ue_id: String,
    /// Received signal strength through the active beam, dBm, never
    /// below the noise floor.
    pub rssi_dbm: f64,
    /// Estimated azimuth the strongest path arrives from, world frame;
    /// None when nothing is received.
    pub aoa_rad: Option<f64>,
    pub active_beam: usize,
    /// Beam-weighted taps (delay seconds, complex amplitude).
    pub csi: Vec<(f64, Complex64)>,
}

/// Snapshot of what the antenna measured at one instant.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RanState {
    pub t_s: f64,
    pub ues: BTreeMap<String, UeRanRecord>,
}

/// Received power through one codebook beam for a known channel: the
/// sum of squared beam-weighted tap magnitudes, the same quantity
/// [`measure_ue`] derives its RSSI from, with no noise.
pub fn beam_power(cir: &Cir, cb: &BeamCodebook, beam: usize, antenna_yaw: f64) -> Result<f64> {
    let mut power = 0.0f64;
    for p in &cir.paths {
        let rel = normalize_angle(p.aod - antenna_yaw);
        let w = array_gain_amp(cb, beam, rel)?;
        power += (p.gain * w).norm_sqr();
    }
    Ok(power)
}

/// RSSI one beam would report with the noise terms zeroed, clamped to
/// the noise floor like a real reading.
pub fn noiseless_rssi_dbm(
    cir: &Cir,
    cb: &BeamCodebook,
    beam: usize,
    ant: &AntennaConfig,
) -> Result<f64> {
    let power = beam_power(cir, cb, beam, ant.pose.yaw)?;
    if power == 0.0 {
        return Ok(ant.noise_floor_dbm);
    }
    Ok((ant.tx_power_dbm + 10.0 * power.log10()).max(ant.noise_floor_dbm))
}

/// Measure one UE through the active beam. The received power sums the
/// squared magnitudes of every beam-weighted tap; an empty channel reads
/// exactly the noise floor and carries no angle estimate. Gaussian
/// measurement noise is added to RSSI (dB domain) and to the arrival
/// azimuth; the reported RSSI never drops below the noise floor.
pub fn measure_ue(
    ue_id: &str,
    cir: &Cir,
    cb: &BeamCodebook,
    active_beam: usize,
    ant: &AntennaConfig,
    rng: &mut impl Rng,
) -> Result<UeRanRecord> {
    if active_beam >= cb.beams.len() {
        return Err(Error::invalid(format!("active beam {active_beam} out of range")));
    }
    let mut power = 0.0f64;
    let mut csi = Vec::with_capacity(cir.paths.len());
    let mut strongest: Option<(f64, f64)> = None; // (weighted amp, world aoa)
    for p in &cir.paths {
        let rel = normalize_angle(p.aod - ant.pose.yaw);
        let w = array_gain_amp(cb, active_beam, rel)?;
        let tap = p.gain * w;
        power += tap.norm_sqr();
        match strongest {
            Some((amp, _)) if tap.norm() <= amp => {}
            _ => strongest = Some((tap.norm(), p.aod)),
        }
        csi.push((p.delay, tap));
    }
    if power == 0.0 {
        return Ok(UeRanRecord {
            ue_id: ue_id.to_string(),
            rssi_dbm: ant.noise_floor_dbm,
            aoa_rad: None,
            active_beam,
            csi: Vec::new(),
        });
    }
    let noise_db = Normal::new(0.0, ant.sigma_rssi_db).expect("nonnegative sigma").sample(rng);
    let rssi = (ant.tx_power_dbm + 10.0 * power.log10() + noise_db).max(ant.noise_floor_dbm);
    let aoa_noise = Normal::new(0.0, ant.sigma_aoa_rad).expect("nonnegative sigma").sample(rng);
    let aoa = strongest.map(|(_, a)| normalize_angle(a + aoa_noise));
    Ok(UeRanRecord { ue_id: ue_id.to_string(), rssi_dbm: rssi, aoa_rad: aoa, active_beam, csi })
}

// ── access and control ─────────────────────────────────────────────────

/// Network entry attempt with a position claim.
#[derive(Debug, Clone, PartialEq)]
pub struct RachRequest {
    pub ue_id: String,
    pub t_s: f64,
    pub claimed_position: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "ACCEPT")]
    Accept,
    #[serde(rename = "REJECT")]
    Reject,
    #[serde(rename = "UNVERIFIED")]
    Unverified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AuthReason {
    #[serde(rename = "POSITION_VERIFIED")]
    PositionVerified,
    #[serde(rename = "NEW_CELL_SEEDED")]
    NewCellSeeded,
    #[serde(rename = "GEOFENCE")]
    Geofence,
    #[serde(rename = "NO_WITNESS")]
    NoWitness,
    #[serde(rename = "POSITION_MISMATCH")]
    PositionMismatch,
    #[serde(rename = "FINGERPRINT_MISMATCH")]
    FingerprintMismatch,
    #[serde(rename = "KA_UNREACHABLE")]
    KaUnreachable,
    #[serde(rename = "SENSOR_OUTAGE")]
    SensorOutage,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuthDecision {
    pub verdict: Verdict,
    pub reason: AuthReason,
    /// Squared Mahalanobis distance of the claim against the fused
    /// estimate, when one was computed.
    pub mahalanobis_sq: Option<f64>,
}

/// Something that can vouch for a position claim. Returning None means
/// the verifier could not process the request at all (unreachable or out
/// of service), which is different from a REJECT.
pub trait PositionVerifier {
    fn verify(&mut self, req: &RachRequest) -> Option<AuthDecision>;
}

/// Admission decision for a network entry attempt. Without a reachable
/// verifier the RAN falls back to standalone behaviour: the UE is let in
/// UNVERIFIED and the decision says why.
pub fn handle_rach(
    req: &RachRequest,
    verifier: Option<&mut dyn PositionVerifier>,
) -> AuthDecision {
    let unreachable = AuthDecision {
        verdict: Verdict::Unverified,
        reason: AuthReason::KaUnreachable,
        mahalanobis_sq: None,
    };
    match verifier {
        Some(v) => v.verify(req).unwrap_or(unreachable),
        None => unreachable,
    }
}

/// Control directives a knowledge agent can send to the antenna.
#[derive(Debug, Clone, PartialEq)]
pub enum RanCnt {
    /// Switch the serving beam immediately, no sweep.
    SetBeam { beam: usize },
    /// Restrict the next periodic sweep to steering angles within
    /// `[lo_rad, hi_rad]`.
    SweepWindow { lo_rad: f64, hi_rad: f64 },
    /// Channel taps for a UE's equalizer; replaces pilot-based sounding
    /// while valid.
    ChannelEstimate { ue_id: String, taps: Vec<(f64, Complex64)> },
    /// Knowledge no longer trustworthy: drop everything knowledge-fed
    /// and return to self-contained sweeping and sounding.
    Fallback,
}

impl RanCnt {
    pub fn kind_str(&self) -> &'static str {
        match self {
            RanCnt::SetBeam { .. } => "SET_BEAM",
            RanCnt::SweepWindow { .. } => "SWEEP_WINDOW",
            RanCnt::ChannelEstimate { .. } => "CHANNEL_ESTIMATE",
            RanCnt::Fallback => "FALLBACK",
        }
    }
}

/// Mutable control-plane state of the antenna.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RanControlState {
    pub active_beam: usize,
    /// Restriction applying to the next periodic sweep, if any.
    pub sweep_window: Option<(f64, f64)>,
    /// True once a Fallback directive arrived and no knowledge directive
    /// has superseded it.
    pub fallback: bool,
    /// Knowledge-fed equalizer taps per UE. While a UE has an entry its
    /// pilot sounding is suppressed.
    pub equalizer: BTreeMap<String, Vec<(f64, Complex64)>>,
}

/// Apply one control directive. Invalid directives (beam index out of
/// range, empty or out-of-span window) leave the state untouched and
/// report an error.
pub fn apply_rancnt(state: &mut RanControlState, cnt: &RanCnt, cb: &BeamCodebook) -> Result<()> {
    match cnt {
        RanCnt::SetBeam { beam } => {
            if *beam >= cb.beams.len() {
                return Err(Error::invalid(format!(
                    "SET_BEAM index {beam} out of range ({} beams)",
                    cb.beams.len()
                )));
            }
            state.active_beam = *beam;
            state.sweep_window = None;
            state.fallback = false;
        }
        RanCnt::SweepWindow { lo_rad, hi_rad } => {
            // A degenerate window [b, b] is a valid one-beam restriction.
            if !(lo_rad <= hi_rad) || !lo_rad.is_finite() || !hi_rad.is_finite() {
                return Err(Error::invalid(format!(
                    "SWEEP_WINDOW bounds invalid: [{lo_rad}, {hi_rad}]"
                )));
            }
            if cb.beams_in_window(*lo_rad, *hi_rad).is_empty() {
                return Err(Error::invalid(format!(
                    "SWEEP_WINDOW [{lo_rad}, {hi_rad}] contains no codebook beam"
                )));
            }
            state.sweep_window = Some((*lo_rad, *hi_rad));
            state.fallback = false;
        }
        RanCnt::ChannelEstimate { ue_id, taps } => {
            state.equalizer.insert(ue_id.clone(), taps.clone());
        }
        RanCnt::Fallback => {
            state.fallback = true;
            state.sweep_window = None;
            state.equalizer.clear();
        }
    }
    Ok(())
}

// ── tests ──────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raytrace::{compose_cir, trace_paths};
    use crate::scene::SceneModel;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cb8() -> BeamCodebook {
        BeamCodebook::uniform(8, 0.5, 16, -1.0, 1.0).unwrap()
    }

    #[test]
    fn peak_gain_is_20log10_n() {
        let cb = cb8();
        // Probe exactly at a steering angle.
        let g = array_gain_db(&cb, 4, cb.beams[4]).unwrap();
        assert_relative_eq!(g, 18.06179973983887, max_relative = 1e-12);
        let cb16 = BeamCodebook::default();
        let g16 = array_gain_db(&cb16, 7, cb16.beams[7]).unwrap();
        assert_relative_eq!(g16, 24.082399653118496, max_relative = 1e-12);
    }

    #[test]
    fn off_axis_gain_matches_closed_form() {
        // 8 elements, half-wavelength spacing, boresight beam, probe at
        // 10 degrees.
        let cb = BeamCodebook::uniform(8, 0.5, 3, -1.0, 1.0).unwrap();
        assert_eq!(cb.beams[1], 0.0);
        let g = array_gain_db(&cb, 1, 10.0f64.to_radians()).unwrap();
        assert_relative_eq!(g, 9.656629153405881, max_relative = 1e-9);
    }

    #[test]
    fn first_null_hits_floor() {
        // For 8 half-wavelength elements steered at boresight the first
        // null sits at asin(1/4).
        let cb = BeamCodebook::uniform(8, 0.5, 3, -1.0, 1.0).unwrap();
        let g = array_gain_db(&cb, 1, 0.25f64.asin()).unwrap();
        assert_eq!(g, -60.0);
    }

    #[test]
    fn gain_rejects_bad_beam_index() {
        assert!(array_gain_db(&cb8(), 99, 0.0).is_err());
    }

    #[test]
    fn default_codebook_shape() {
        let cb = BeamCodebook::default();
        assert_eq!(cb.beams.len(), 32);
        assert_eq!(cb.n_elements, 16);
        let (lo, hi) = cb.span();
        assert_relative_eq!(lo, -std::f64::consts::PI / 3.0, max_relative = 1e-15);
        assert_relative_eq!(hi, std::f64::consts::PI / 3.0, max_relative = 1e-15);
        // Ten-degree window straddling boresight captures six beams at
        // the 3.87 degree pitch.
        let ten = 10.0f64.to_radians();
        assert_eq!(cb.beams_in_window(-ten, ten).len(), 6);
    }

    #[test]
    fn sweep_finds_peak_and_counts_probes() {
        let cb = BeamCodebook::default();
        let target = 0.31; // radians off boresight
        let mut calls = 0usize;
        let res = sweep_beams(&cb, |i| {
            calls += 1;
            array_gain_db(&cb, i, target).unwrap()
        });
        assert_eq!(calls, 32);
        assert_eq!(res.measurements, 32);
        // Independent argmax over the same quantity.
        let best = (0..32)
            .max_by(|&a, &b| {
                array_gain_db(&cb, a, target)
                    .unwrap()
                    .partial_cmp(&array_gain_db(&cb, b, target).unwrap())
                    .unwrap()
            })
            .unwrap();
        assert_eq!(res.best_beam, best);
    }

    #[test]
    fn sweep_tie_takes_lowest_index() {
        let cb = BeamCodebook::default();
        let res = sweep_beams(&cb, |_| -42.0);
        assert_eq!(res.best_beam, 0);
    }

    #[test]
    fn windowed_sweep_only_probes_window() {
        let cb = BeamCodebook::default();
        let ten = 10.0f64.to_radians();
        let idx = cb.beams_in_window(-ten, ten);
        let mut probed = Vec::new();
        let res = sweep_beams_in(&idx, |i| {
            probed.push(i);
            array_gain_db(&cb, i, 0.05).unwrap()
        })
        .unwrap();
        assert_eq!(probed, idx);
        assert_eq!(res.measurements, 6);
        assert!(idx.contains(&res.best_beam));
    }

    #[test]
    fn measure_empty_channel_reads_noise_floor() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ant = AntennaConfig {
            pose: Pose::identity(),
            tx_power_dbm: 20.0,
            noise_floor_dbm: -90.0,
            sigma_rssi_db: 1.0,
            sigma_aoa_rad: 0.035,
            sweep_period_s: 0.02,
        };
        let rec = measure_ue(
            "ue-1",
            &Cir::default(),
            &BeamCodebook::default(),
            0,
            &ant,
            &mut rng,
        )
        .unwrap();
        assert_eq!(rec.rssi_dbm, -90.0);
        assert!(rec.aoa_rad.is_none());
        assert!(rec.csi.is_empty());
    }

    #[test]
    fn measure_los_link_budget() {
        // 10 m boresight link at 140 GHz through the peak of a 16
        // element beam, no noise: 20 dBm - 95.3703 dB + 24.0824 dB.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let scene = SceneModel::empty(140e9);
        let paths =
            trace_paths(&scene, Vec3::ZERO, Vec3::new(10.0, 0.0, 0.0)).unwrap();
        let cir = compose_cir(paths, 140e9);
        // Codebook with a beam exactly at boresight.
        let cb = BeamCodebook::uniform(16, 0.5, 33, -1.0, 1.0).unwrap();
        let boresight = 16usize;
        assert_eq!(cb.beams[boresight], 0.0);
        let ant = AntennaConfig {
            pose: Pose::identity(),
            tx_power_dbm: 20.0,
            noise_floor_dbm: -90.0,
            sigma_rssi_db: 0.0,
            sigma_aoa_rad: 0.0,
            sweep_period_s: 0.02,
        };
        let rec = measure_ue("ue-1", &cir, &cb, boresight, &ant, &mut rng).unwrap();
        assert_relative_eq!(rec.rssi_dbm, -51.28794428232963, max_relative = 1e-9);
        assert_relative_eq!(rec.aoa_rad.unwrap(), 0.0, epsilon = 1e-12);
        assert_eq!(rec.csi.len(), 1);

        // The noiseless reading agrees with the zero-sigma measurement,
        // and an off-axis beam reads strictly less.
        let quiet = noiseless_rssi_dbm(&cir, &cb, boresight, &ant).unwrap();
        assert_eq!(quiet, rec.rssi_dbm);
        let off = noiseless_rssi_dbm(&cir, &cb, boresight + 4, &ant).unwrap();
        assert!(off < quiet);
        // An empty channel reads the floor through any beam.
        let empty = Cir { paths: Vec::new(), carrier_frequency_hz: 140e9 };
        assert_eq!(noiseless_rssi_dbm(&empty, &cb, 0, &ant).unwrap(), -90.0);
    }

    #[test]
    fn weak_signal_clamps_to_floor() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let scene = SceneModel::empty(140e9);
        // 30 m link measured through a beam steered 60 degrees away.
        let paths = trace_paths(&scene, Vec3::ZERO, Vec3::new(30.0, 0.0, 0.0)).unwrap();
        let cir = compose_cir(paths, 140e9);
        let cb = BeamCodebook::default();
        let ant = AntennaConfig {
            pose: Pose::identity(),
            tx_power_dbm: 20.0,
            noise_floor_dbm: -90.0,
            sigma_rssi_db: 0.0,
            sigma_aoa_rad: 0.0,
            sweep_period_s: 0.02,
        };
        let rec = measure_ue("ue-1", &cir, &cb, 0, &ant, &mut rng).unwrap();
        assert_eq!(rec.rssi_dbm, -90.0);
    }

    #[test]
    fn measurement_is_seed_deterministic() {
        let scene = SceneModel::empty(140e9);
        let paths = trace_paths(&scene, Vec3::ZERO, Vec3::new(12.0, 3.0, 0.0)).unwrap();
        let cir = compose_cir(paths, 140e9);
        let cb = BeamCodebook::default();
        let ant = AntennaConfig {
            pose: Pose::identity(),
            tx_power_dbm: 20.0,
            noise_floor_dbm: -90.0,
            sigma_rssi_db: 1.0,
            sigma_aoa_rad: 0.035,
            sweep_period_s: 0.02,
        };
        let mut r1 = ChaCha8Rng::seed_from_u64(99);
        let mut r2 = ChaCha8Rng::seed_from_u64(99);
        let a = measure_ue("ue-1", &cir, &cb, 8, &ant, &mut r1).unwrap();
        let b = measure_ue("ue-1", &cir, &cb, 8, &ant, &mut r2).unwrap();
        assert_eq!(a, b);
        let mut r3 = ChaCha8Rng::seed_from_u64(100);
        let c = measure_ue("ue-1", &cir, &cb, 8, &ant, &mut r3).unwrap();
        assert_ne!(a.rssi_dbm, c.rssi_dbm);
    }

    #[test]
    fn rach_without_verifier_admits_unverified() {
        let req = RachRequest {
            ue_id: "ue-1".into(),
            t_s: 0.0,
            claimed_position: Vec3::new(1.0, 2.0, 0.5),
        };
        let d = handle_rach(&req, None);
        assert_eq!(d.verdict, Verdict::Unverified);
        assert_eq!(d.reason, AuthReason::KaUnreachable);
        assert!(d.mahalanobis_sq.is_none());

        struct Mute;
        impl PositionVerifier for Mute {
            fn verify(&mut self, _: &RachRequest) -> Option<AuthDecision> {
                None
            }
        }
        let d2 = handle_rach(&req, Some(&mut Mute));
        assert_eq!(d2.reason, AuthReason::KaUnreachable);

        struct Accepting;
        impl PositionVerifier for Accepting {
            fn verify(&mut self, _: &RachRequest) -> Option<AuthDecision> {
                Some(AuthDecision {
                    verdict: Verdict::Accept,
                    reason: AuthReason::PositionVerified,
                    mahalanobis_sq: Some(1.5),
                })
            }
        }
        let d3 = handle_rach(&req, Some(&mut Accepting));
        assert_eq!(d3.verdict, Verdict::Accept);
        assert_eq!(d3.mahalanobis_sq, Some(1.5));
    }

    #[test]
    fn control_verbs_mutate_state() {
        let cb = BeamCodebook::default();
        let mut st = RanControlState::default();

        assert!(apply_rancnt(&mut st, &RanCnt::SetBeam { beam: 99 }, &cb).is_err());
        assert_eq!(st.active_beam, 0);

        apply_rancnt(&mut st, &RanCnt::SetBeam { beam: 12 }, &cb).unwrap();
        assert_eq!(st.active_beam, 12);
        assert!(!st.fallback);

        let ten = 10.0f64.to_radians();
        apply_rancnt(&mut st, &RanCnt::SweepWindow { lo_rad: -ten, hi_rad: ten }, &cb).unwrap();
        assert_eq!(st.sweep_window, Some((-ten, ten)));

        // Degenerate and out-of-span windows bounce.
        assert!(apply_rancnt(&mut st, &RanCnt::SweepWindow { lo_rad: ten, hi_rad: -ten }, &cb).is_err());
        assert!(
            apply_rancnt(&mut st, &RanCnt::SweepWindow { lo_rad: 2.0, hi_rad: 2.1 }, &cb).is_err()
        );
        assert_eq!(st.sweep_window, Some((-ten, ten)));

        apply_rancnt(
            &mut st,
            &RanCnt::ChannelEstimate {
                ue_id: "ue-1".into(),
                taps: vec![(1e-8, Complex64::new(1e-5, 0.0))],
            },
            &cb,
        )
        .unwrap();
        assert_eq!(st.equalizer.len(), 1);

        apply_rancnt(&mut st, &RanCnt::Fallback, &cb).unwrap();
        assert!(st.fallback);
        assert!(st.sweep_window.is_none());
        assert!(st.equalizer.is_empty());

        // A fresh knowledge directive ends the fallback.
        apply_rancnt(&mut st, &RanCnt::SetBeam { beam: 3 }, &cb).unwrap();
        assert!(!st.fallback);
    }

    #[test]
    fn normalize_angle_wraps() {
        use std::f64::consts::PI;
        assert_relative_eq!(normalize_angle(3.0 * PI), PI, max_relative = 1e-12);
        assert_relative_eq!(normalize_angle(-3.0 * PI), PI, max_relative = 1e-12);
        assert_relative_eq!(normalize_angle(0.3), 0.3, max_relative = 1e-15);
        assert_relative_eq!(normalize_angle(-0.3), -0.3, max_relative = 1e-15);
        assert!(normalize_angle(7.0) <= PI);
        assert!(normalize_angle(-7.0) > -PI);
    }
}
