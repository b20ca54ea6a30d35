//! Analysis stage: reconstructs cohorts from the ledger and produces the
//! covariate-balance, windowed-effect, repeated-messaging, night-usage, and
//! score-calibration tables.

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::domain::{Day, Gender, InteractionEvent, Layer, PlayerId, PlayerRecord};
use crate::error::Result;
use crate::pipeline::TrialLedger;
use crate::run::trial_stage::ScoreRow;
use crate::stats::{
    compare_night_usage, night_usage_per_player, pearson_chi_square_2x2,
    risk_outcome_calibration, students_t, usage_quantiles, windowed_effect_table, CohortMember,
    ContingencyTable2x2, EffectCell,
};

/// Outcomes measured per listed player.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Committed a violation (any chat layer).
    Violation,
    /// Was the target of a DM violation.
    ViolatedDm,
    /// Was the target of an AC violation.
    ViolatedAc,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::Violation, Outcome::ViolatedDm, Outcome::ViolatedAc];

    pub fn name(self) -> &'static str {
        match self {
            Outcome::Violation => "violation",
            Outcome::ViolatedDm => "violated_dm",
            Outcome::ViolatedAc => "violated_ac",
        }
    }
}

/// Cohort variants: everyone (first listing anchor) and the repeated-
/// messaging subsets anchored at their second or third listing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CohortVariant {
    All,
    ExactlyTwo,
    ThreePlus,
}

impl CohortVariant {
    pub const ALL: [CohortVariant; 3] =
        [CohortVariant::All, CohortVariant::ExactlyTwo, CohortVariant::ThreePlus];

    pub fn name(self) -> &'static str {
        match self {
            CohortVariant::All => "all",
            CohortVariant::ExactlyTwo => "repeat2",
            CohortVariant::ThreePlus => "repeat3plus",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EffectTableOut {
    pub outcome: String,
    pub cohort: String,
    pub gender: String,
    pub cells: Vec<EffectCell>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CovariateTable {
    pub gender: String,
    pub cumulative_intervention: u64,
    pub cumulative_control: u64,
    pub unique_intervention: u64,
    pub unique_control: u64,
    pub age_mean: [f64; 2],
    pub age_sd: [f64; 2],
    pub age_p: Option<f64>,
    pub usage_mean: [f64; 2],
    pub usage_sd: [f64; 2],
    pub usage_p: Option<f64>,
    pub once_share: [f64; 2],
    pub once_p: Option<f64>,
    pub five_plus_share: [f64; 2],
    pub five_plus_p: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NightTable {
    pub gender: String,
    pub period_days: u32,
    pub n: [usize; 2],
    pub mean: [f64; 2],
    /// 2.5 / 25 / 50 / 75 / 97.5 percentiles per arm.
    pub quantiles: [[f64; 5]; 2],
    pub p: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CalibrationOut {
    pub kind: String,
    pub n: usize,
    pub spearman: Option<f64>,
    /// (score lo, score hi, n, outcome rate) per decile.
    pub bins: Vec<(f64, f64, usize, f64)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub alpha: f64,
    pub covariates: Vec<CovariateTable>,
    pub effects: Vec<EffectTableOut>,
    pub night: Vec<NightTable>,
    pub calibration: Vec<CalibrationOut>,
}

impl AnalysisReport {
    /// (significant, total) over the primary effect cells (cohort `all`)
    /// with a computable p-value.
    pub fn significant_cell_stats(&self) -> (usize, usize) {
        let mut hits = 0;
        let mut total = 0;
        for table in self.effects.iter().filter(|t| t.cohort == "all") {
            for cell in &table.cells {
                if let Some(p) = cell.p_value {
                    total += 1;
                    if p < self.alpha {
                        hits += 1;
                    }
                }
            }
        }
        (hits, total)
    }

    pub fn effect_table(&self, outcome: &str, cohort: &str, gender: &str) -> Option<&EffectTableOut> {
        self.effects
            .iter()
            .find(|t| t.outcome == outcome && t.cohort == cohort && t.gender == gender)
    }
}

/// Per-player sorted day lists for each outcome, with one entry per event.
pub struct OutcomeIndex {
    pub violation: Vec<Vec<Day>>,
    pub violated_dm: Vec<Vec<Day>>,
    pub violated_ac: Vec<Vec<Day>>,
    /// Distinct days with chat (DM or AC) activity as actor.
    pub chat_days: Vec<Vec<Day>>,
}

impl OutcomeIndex {
    pub fn build(events: &[InteractionEvent], population: usize) -> OutcomeIndex {
        let mut violation = vec![Vec::new(); population];
        let mut violated_dm = vec![Vec::new(); population];
        let mut violated_ac = vec![Vec::new(); population];
        let mut chat_days: Vec<Vec<Day>> = vec![Vec::new(); population];
        for ev in events {
            if ev.layer.supports_violation() {
                let cd = &mut chat_days[ev.actor as usize];
                if cd.last() != Some(&ev.day) {
                    cd.push(ev.day);
                }
            }
            if ev.violation {
                violation[ev.actor as usize].push(ev.day);
                match ev.layer {
                    Layer::Dm => violated_dm[ev.target as usize].push(ev.day),
                    Layer::Ac => violated_ac[ev.target as usize].push(ev.day),
                    _ => {}
                }
            }
        }
        OutcomeIndex {
            violation,
            violated_dm,
            violated_ac,
            chat_days,
        }
    }

    fn days_for(&self, outcome: Outcome, player: PlayerId) -> &[Day] {
        match outcome {
            Outcome::Violation => &self.violation[player as usize],
            Outcome::ViolatedDm => &self.violated_dm[player as usize],
            Outcome::ViolatedAc => &self.violated_ac[player as usize],
        }
    }
}

fn gender_name(g: Gender) -> &'static str {
    match g {
        Gender::Female => "women",
        Gender::Male => "men",
    }
}

/// Cohort members for a variant: player, arm, and the anchor listing day.
fn cohort_members(
    ledger: &TrialLedger,
    players: &[PlayerRecord],
    variant: CohortVariant,
    gender: Gender,
) -> Vec<CohortMember> {
    let mut members = Vec::new();
    for (idx, days) in ledger.listing_days.iter().enumerate() {
        if players[idx].avatar_gender != gender {
            continue;
        }
        let anchor = match variant {
            CohortVariant::All if !days.is_empty() => days[0],
            CohortVariant::ExactlyTwo if days.len() == 2 => days[1],
            CohortVariant::ThreePlus if days.len() >= 3 => days[2],
            _ => continue,
        };
        members.push(CohortMember {
            player: idx as u32,
            arm: ledger.arm_of(idx as u32),
            anchor_day: anchor,
        });
    }
    members
}

pub fn analyze(
    cfg: &RunConfig,
    players: &[PlayerRecord],
    events: &[InteractionEvent],
    ledger: &TrialLedger,
    score_rows: &[ScoreRow],
) -> Result<AnalysisReport> {
    let n = players.len();
    let index = OutcomeIndex::build(events, n);
    let windows = cfg.analysis.window_specs();

    let mut effects = Vec::new();
    for variant in CohortVariant::ALL {
        for gender in [Gender::Female, Gender::Male] {
            let cohort = cohort_members(ledger, players, variant, gender);
            for outcome in Outcome::ALL {
                let lookup = |p: PlayerId| -> Vec<Day> { index.days_for(outcome, p).to_vec() };
                let cells = windowed_effect_table(&cohort, &lookup, &windows)?;
                effects.push(EffectTableOut {
                    outcome: outcome.name().to_string(),
                    cohort: variant.name().to_string(),
                    gender: gender_name(gender).to_string(),
                    cells,
                });
            }
        }
    }

    let mut covariates = Vec::new();
    let mut night = Vec::new();
    for gender in [Gender::Female, Gender::Male] {
        covariates.push(covariate_table(ledger, players, &index, gender));
        night.push(night_table(cfg, ledger, players, events, gender)?);
    }

    let calibration = calibration_tables(&index, score_rows);

    Ok(AnalysisReport {
        alpha: cfg.analysis.alpha,
        covariates,
        effects,
        night,
        calibration,
    })
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn covariate_table(
    ledger: &TrialLedger,
    players: &[PlayerRecord],
    index: &OutcomeIndex,
    gender: Gender,
) -> CovariateTable {
    let mut cumulative = [0u64; 2];
    let mut unique = [0u64; 2];
    let mut ages: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    let mut usage: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    let mut once = [0u64; 2];
    let mut five_plus = [0u64; 2];

    for (idx, days) in ledger.listing_days.iter().enumerate() {
        if days.is_empty() || players[idx].avatar_gender != gender {
            continue;
        }
        let arm = ledger.arm_of(idx as u32).index();
        cumulative[arm] += days.len() as u64;
        unique[arm] += 1;
        ages[arm].push(players[idx].avatar_age as f64);
        if days.len() == 1 {
            once[arm] += 1;
        }
        if days.len() >= 5 {
            five_plus[arm] += 1;
        }
        // DM/AC usage days in the 14 days after the first listing
        let anchor = days[0];
        let chat = &index.chat_days[idx];
        let lo = chat.partition_point(|&d| d <= anchor);
        let hi = chat.partition_point(|&d| d <= anchor + 14);
        usage[arm].push((hi - lo) as f64);
    }

    let (age_mean_i, age_sd_i) = mean_sd(&ages[0]);
    let (age_mean_c, age_sd_c) = mean_sd(&ages[1]);
    let (usage_mean_i, usage_sd_i) = mean_sd(&usage[0]);
    let (usage_mean_c, usage_sd_c) = mean_sd(&usage[1]);
    let share = |num: u64, den: u64| {
        if den == 0 {
            f64::NAN
        } else {
            num as f64 / den as f64
        }
    };
    let chi_p = |with: [u64; 2]| -> Option<f64> {
        let table = ContingencyTable2x2::new(
            with[0],
            unique[0].saturating_sub(with[0]),
            with[1],
            unique[1].saturating_sub(with[1]),
        );
        pearson_chi_square_2x2(&table).ok().map(|(_, p)| p)
    };
    CovariateTable {
        gender: gender_name(gender).to_string(),
        cumulative_intervention: cumulative[0],
        cumulative_control: cumulative[1],
        unique_intervention: unique[0],
        unique_control: unique[1],
        age_mean: [age_mean_i, age_mean_c],
        age_sd: [age_sd_i, age_sd_c],
        age_p: students_t(&ages[0], &ages[1]).ok().map(|(_, p)| p),
        usage_mean: [usage_mean_i, usage_mean_c],
        usage_sd: [usage_sd_i, usage_sd_c],
        usage_p: students_t(&usage[0], &usage[1]).ok().map(|(_, p)| p),
        once_share: [share(once[0], unique[0]), share(once[1], unique[1])],
        once_p: chi_p(once),
        five_plus_share: [
            share(five_plus[0], unique[0]),
            share(five_plus[1], unique[1]),
        ],
        five_plus_p: chi_p(five_plus),
    }
}

fn night_table(
    cfg: &RunConfig,
    ledger: &TrialLedger,
    players: &[PlayerRecord],
    events: &[InteractionEvent],
    gender: Gender,
) -> Result<NightTable> {
    let mut cohorts: [Vec<(PlayerId, Day)>; 2] = [Vec::new(), Vec::new()];
    for (idx, days) in ledger.listing_days.iter().enumerate() {
        if days.is_empty() || players[idx].avatar_gender != gender {
            continue;
        }
        cohorts[ledger.arm_of(idx as u32).index()].push((idx as u32, days[0]));
    }
    let period = cfg.analysis.night_period_days;
    let vi = night_usage_per_player(events, &cohorts[0], period);
    let vc = night_usage_per_player(events, &cohorts[1], period);
    let p = if vi.is_empty() || vc.is_empty() {
        None
    } else {
        Some(compare_night_usage(vi.clone(), vc.clone())?.p_value)
    };
    let (mi, _) = mean_sd(&vi);
    let (mc, _) = mean_sd(&vc);
    Ok(NightTable {
        gender: gender_name(gender).to_string(),
        period_days: period,
        n: [vi.len(), vc.len()],
        mean: [mi, mc],
        quantiles: [usage_quantiles(&vi), usage_quantiles(&vc)],
        p,
    })
}

fn calibration_tables(
    index: &OutcomeIndex,
    score_rows: &[ScoreRow],
) -> Vec<CalibrationOut> {
    let any_in_next14 = |days: &[Day], day: Day| -> bool {
        let lo = days.partition_point(|&d| d <= day);
        let hi = days.partition_point(|&d| d <= day + 14);
        hi > lo
    };
    let mut out = Vec::new();
    for kind in ["violator", "victim"] {
        let mut scores = Vec::new();
        let mut outcomes = Vec::new();
        for row in score_rows {
            let (score, hit) = match kind {
                "violator" => (
                    row.violator,
                    any_in_next14(&index.violation[row.player as usize], row.day),
                ),
                _ => {
                    let dm = any_in_next14(&index.violated_dm[row.player as usize], row.day);
                    let ac = any_in_next14(&index.violated_ac[row.player as usize], row.day);
                    (row.victim, dm || ac)
                }
            };
            if score > 0.0 {
                scores.push(score);
                outcomes.push(hit);
            }
        }
        let cal = risk_outcome_calibration(&scores, &outcomes).ok();
        out.push(CalibrationOut {
            kind: kind.to_string(),
            n: scores.len(),
            spearman: cal.as_ref().map(|c| c.spearman),
            bins: cal
                .map(|c| {
                    c.bins
                        .iter()
                        .map(|b| (b.score_lo, b.score_hi, b.n, b.outcome_rate))
                        .collect()
                })
                .unwrap_or_default(),
        });
    }
    out
}
