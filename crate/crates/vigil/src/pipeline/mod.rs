//! Daily operational loop: risk-score aggregation, eligibility filtering,
//! top-K listing, arm assignment, capped dispatch, and the trial ledger.

mod eligibility;
mod selection;
mod trial;

pub use eligibility::{EligibilityState, COOLDOWN_DAYS, MIN_LOGIN_DAYS};
pub use selection::{assign_group, select_top_k};
pub use trial::{run_trial_day, LedgerEntry, TrialLedger};

use std::fmt;
use std::str::FromStr;

use crate::domain::{Day, PlayerId};
use crate::error::{Error, Result};

/// Trial arm; assignment is a stable hash of (trial seed, player id).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Arm {
    Intervention,
    Control,
}

impl Arm {
    pub fn index(self) -> usize {
        match self {
            Arm::Intervention => 0,
            Arm::Control => 1,
        }
    }

    pub const BOTH: [Arm; 2] = [Arm::Intervention, Arm::Control];

    pub fn name(self) -> &'static str {
        match self {
            Arm::Intervention => "intervention",
            Arm::Control => "control",
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Arm {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "intervention" => Ok(Arm::Intervention),
            "control" => Ok(Arm::Control),
            other => Err(format!("unknown arm `{other}`")),
        }
    }
}

/// Which direction of risk a listing covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RiskKind {
    Violator,
    Victim,
}

impl RiskKind {
    pub const BOTH: [RiskKind; 2] = [RiskKind::Violator, RiskKind::Victim];

    pub fn name(self) -> &'static str {
        match self {
            RiskKind::Violator => "violator",
            RiskKind::Victim => "victim",
        }
    }
}

impl fmt::Display for RiskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RiskKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "violator" => Ok(RiskKind::Violator),
            "victim" => Ok(RiskKind::Victim),
            other => Err(format!("unknown risk kind `{other}`")),
        }
    }
}

/// One scored directed relationship.
#[derive(Clone, Copy, Debug)]
pub struct ScoredEdge {
    pub actor: PlayerId,
    pub target: PlayerId,
    pub prob: f64,
}

/// Per-player risk scores for one day: sums of relationship probabilities
/// strictly above the threshold, outgoing for violator risk and incoming
/// for victim risk.
#[derive(Clone, Debug)]
pub struct RiskAssessment {
    pub day: Day,
    pub threshold: f64,
    pub violator: Vec<f64>,
    pub victim: Vec<f64>,
}

impl RiskAssessment {
    pub fn scores(&self, kind: RiskKind) -> &[f64] {
        match kind {
            RiskKind::Violator => &self.violator,
            RiskKind::Victim => &self.victim,
        }
    }
}

/// Aggregates scored edges into per-player risk scores. Gating is strict:
/// an edge exactly at the threshold does not count.
pub fn risk_scores(
    day: Day,
    population: usize,
    edges: &[ScoredEdge],
    threshold: f64,
) -> Result<RiskAssessment> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Stats(format!(
            "risk threshold must lie in (0,1), got {threshold}"
        )));
    }
    let mut violator = vec![0.0; population];
    let mut victim = vec![0.0; population];
    for e in edges {
        if !(0.0..=1.0).contains(&e.prob) {
            return Err(Error::Stats(format!(
                "edge probability {} outside [0,1]",
                e.prob
            )));
        }
        if e.prob > threshold {
            violator[e.actor as usize] += e.prob;
            victim[e.target as usize] += e.prob;
        }
    }
    Ok(RiskAssessment {
        day,
        threshold,
        violator,
        victim,
    })
}
