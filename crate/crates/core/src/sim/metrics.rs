//! Run metrics and their CSV rendering. Column order is part of the
//! output contract: downstream diffing and the comparison table depend
//! on it, so never reorder columns, only append.

use crate::{Error, Result};

/// Aggregated counters and rates of one run.
///
/// Rates that can be undefined (no estimate events, no matched blockage
/// events) carry a companion `*_defined` flag and read 0.0 while the
/// flag is false; no metric is ever NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub mode: String,
    pub seed: u64,
    pub steps: u64,
    pub duration_s: f64,
    /// Individual beam probes spent on sweeps over the whole run.
    pub beam_measurements_total: u64,
    /// Fraction of ticks where the active beam delivered materially
    /// less noise-free power than the best codebook beam.
    pub beam_misselection_rate: f64,
    pub mean_rssi_dbm: f64,
    /// Mean RSSI the noise-free best beam would have delivered.
    pub mean_rssi_best_dbm: f64,
    /// Ticks that carried a channel-sounding pilot.
    pub pilot_frames_total: u64,
    pub channel_estimate_events: u64,
    /// Mean normalized mean-square error of pushed channel estimates
    /// against the same-tick ground truth.
    pub channel_nmse: f64,
    pub channel_nmse_defined: bool,
    pub blockage_advisories: u64,
    pub blockage_events_actual: u64,
    /// Actual blockage events no advisory preceded.
    pub blockage_losses_unwarned: u64,
    /// Mean seconds between an advisory and the start of the loss it
    /// predicted.
    pub blockage_mean_lead_s: f64,
    pub blockage_lead_defined: bool,
    /// Fractions of ticks spent in each service mode.
    pub mode_knowledge: f64,
    pub mode_window: f64,
    pub mode_fallback: f64,
    pub auth_attempts: u64,
    pub auth_accepted: u64,
    pub auth_rejected: u64,
    pub auth_unverified: u64,
    pub auth_attacks: u64,
    pub auth_attacks_rejected: u64,
}

pub const CSV_HEADER: &str = "mode,seed,steps,duration_s,beam_measurements_total,\
beam_misselection_rate,mean_rssi_dbm,mean_rssi_best_dbm,pilot_frames_total,\
channel_estimate_events,channel_nmse,channel_nmse_defined,blockage_advisories,\
blockage_events_actual,blockage_losses_unwarned,blockage_mean_lead_s,\
blockage_lead_defined,mode_knowledge,mode_window,mode_fallback,auth_attempts,\
auth_accepted,auth_rejected,auth_unverified,auth_attacks,auth_attacks_rejected";

fn f(v: f64) -> String {
    debug_assert!(v.is_finite(), "metrics must be finite, got {v}");
    format!("{v:.5e}")
}

impl Metrics {
    pub fn to_csv_row(&self) -> String {
        [
            self.mode.clone(),
            self.seed.to_string(),
            self.steps.to_string(),
            f(self.duration_s),
            self.beam_measurements_total.to_string(),
            f(self.beam_misselection_rate),
            f(self.mean_rssi_dbm),
            f(self.mean_rssi_best_dbm),
            self.pilot_frames_total.to_string(),
            self.channel_estimate_events.to_string(),
            f(self.channel_nmse),
            u8::from(self.channel_nmse_defined).to_string(),
            self.blockage_advisories.to_string(),
            self.blockage_events_actual.to_string(),
            self.blockage_losses_unwarned.to_string(),
            f(self.blockage_mean_lead_s),
            u8::from(self.blockage_lead_defined).to_string(),
            f(self.mode_knowledge),
            f(self.mode_window),
            f(self.mode_fallback),
            self.auth_attempts.to_string(),
            self.auth_accepted.to_string(),
            self.auth_rejected.to_string(),
            self.auth_unverified.to_string(),
            self.auth_attacks.to_string(),
            self.auth_attacks_rejected.to_string(),
        ]
        .join(",")
    }

    pub fn to_csv(&self) -> String {
        format!("{CSV_HEADER}\n{}\n", self.to_csv_row())
    }

    /// Parse a single-run CSV produced by [`Metrics::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::invalid("metrics csv is empty".to_string()))?;
        if header != CSV_HEADER {
            return Err(Error::invalid(format!("unexpected metrics header {header:?}")));
        }
        let row = lines
            .next()
            .ok_or_else(|| Error::invalid("metrics csv has no data row".to_string()))?;
        let cols: Vec<&str> = row.split(',').collect();
        let expect = CSV_HEADER.split(',').count();
        if cols.len() != expect {
            return Err(Error::invalid(format!(
                "metrics row has {} columns, expected {expect}",
                cols.len()
            )));
        }
        let pu = |i: usize| -> Result<u64> {
            cols[i]
                .parse()
                .map_err(|e| Error::invalid(format!("column {i} ({:?}): {e}", cols[i])))
        };
        let pf = |i: usize| -> Result<f64> {
            cols[i]
                .parse()
                .map_err(|e| Error::invalid(format!("column {i} ({:?}): {e}", cols[i])))
        };
        let pb = |i: usize| -> Result<bool> { Ok(pu(i)? != 0) };
        Ok(Metrics {
            mode: cols[0].to_string(),
            seed: pu(1)?,
            steps: pu(2)?,
            duration_s: pf(3)?,
            beam_measurements_total: pu(4)?,
            beam_misselection_rate: pf(5)?,
            mean_rssi_dbm: pf(6)?,
            mean_rssi_best_dbm: pf(7)?,
            pilot_frames_total: pu(8)?,
            channel_estimate_events: pu(9)?,
            channel_nmse: pf(10)?,
            channel_nmse_defined: pb(11)?,
            blockage_advisories: pu(12)?,
            blockage_events_actual: pu(13)?,
            blockage_losses_unwarned: pu(14)?,
            blockage_mean_lead_s: pf(15)?,
            blockage_lead_defined: pb(16)?,
            mode_knowledge: pf(17)?,
            mode_window: pf(18)?,
            mode_fallback: pf(19)?,
            auth_attempts: pu(20)?,
            auth_accepted: pu(21)?,
            auth_rejected: pu(22)?,
            auth_unverified: pu(23)?,
            auth_attacks: pu(24)?,
            auth_attacks_rejected: pu(25)?,
        })
    }
}

// ── tests ──────────────────────────────────────────────────────────────
