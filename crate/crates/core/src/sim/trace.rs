//! Append-only run trace. Every externally visible event of a run lands
//! here in time order, one line each, so two runs can be compared with a
//! plain byte diff.

use std::fmt::Write as _;

/// Record kinds, one per event family.
pub const KIND_SENSSTATE: &str = "SENSSTATE";
pub const KIND_RANSTATE: &str = "RANSTATE";
pub const KIND_RANCNT: &str = "RANCNT";
pub const KIND_AUTH: &str = "AUTH";
pub const KIND_ADVISORY: &str = "ADVISORY";

/// Time-ordered event log. Lines look like
/// `t=1.230000 kind=RANCNT payload=set_beam beam=17`.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    lines: Vec<String>,
    last_t: f64,
}

impl Trace {
    pub fn new() -> Self {
        Trace { lines: Vec::new(), last_t: f64::NEG_INFINITY }
    }

    pub fn push(&mut self, t_s: f64, kind: &str, payload: &str) {
        debug_assert!(
            t_s >= self.last_t,
            "trace time went backwards: {t_s} after {}",
            self.last_t
        );
        self.last_t = t_s;
        let mut line = String::with_capacity(32 + payload.len());
        write!(line, "t={t_s:.6} kind={kind} payload={payload}").expect("string write");
        self.lines.push(line);
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    /// Lines of one kind, in order.
    pub fn of_kind(&self, kind: &str) -> Vec<&str> {
        let tag = format!("kind={kind} ");
        self.lines.iter().filter(|l| l.contains(&tag)).map(|s| s.as_str()).collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            out.push_str(l);
            out.push('\n');
        }
        out
    }
}

// ── tests ──────────────────────────────────────────────────────────────
