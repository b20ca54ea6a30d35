use crate::domain::{Day, PlayerId};
use crate::error::{Error, Result};
use crate::pipeline::{
    assign_group, select_top_k, Arm, EligibilityState, RiskAssessment, RiskKind,
};

/// One ledger line: a player listed for one risk kind on one day.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LedgerEntry {
    pub day: Day,
    pub arm: Arm,
    pub kind: RiskKind,
    pub player: PlayerId,
    pub score: f64,
    pub dispatched: bool,
}

impl LedgerEntry {
    pub fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.day,
            self.arm,
            self.kind,
            self.player,
            self.score,
            u8::from(self.dispatched)
        )
    }

    pub fn parse_line(line: &str, path: &str, lineno: usize) -> Result<LedgerEntry> {
        let err = |message: String| Error::Parse {
            path: path.to_string(),
            line: lineno,
            message,
        };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(err(format!("expected 6 fields, got {}", fields.len())));
        }
        Ok(LedgerEntry {
            day: fields[0].parse().map_err(|e| err(format!("bad day: {e}")))?,
            arm: fields[1].parse().map_err(err)?,
            kind: fields[2].parse().map_err(err)?,
            player: fields[3]
                .parse()
                .map_err(|e| err(format!("bad player: {e}")))?,
            score: fields[4]
                .parse()
                .map_err(|e| err(format!("bad score: {e}")))?,
            dispatched: match fields[5] {
                "0" => false,
                "1" => true,
                other => return Err(err(format!("bad dispatched flag `{other}`"))),
            },
        })
    }
}

/// Append-only record of daily listings and dispatches, with the per-player
/// intervention history the generator feeds back on.
#[derive(Clone, Debug)]
pub struct TrialLedger {
    pub trial_seed: u64,
    pub top_k: usize,
    pub entries: Vec<LedgerEntry>,
    pub last_day: Option<Day>,
    /// Fixed arm assignment per player.
    pub arms: Vec<Arm>,
    /// Days each player was dispatched a message (intervention arm only),
    /// strictly increasing.
    pub dispatch_days: Vec<Vec<Day>>,
    /// Days each player was listed (either arm, deduplicated within a day).
    pub listing_days: Vec<Vec<Day>>,
}

impl TrialLedger {
    pub fn new(population: usize, trial_seed: u64, top_k: usize) -> Self {
        let arms = (0..population as u32)
            .map(|p| assign_group(p, trial_seed))
            .collect();
        TrialLedger {
            trial_seed,
            top_k,
            entries: Vec::new(),
            last_day: None,
            arms,
            dispatch_days: vec![Vec::new(); population],
            listing_days: vec![Vec::new(); population],
        }
    }

    pub fn population(&self) -> usize {
        self.arms.len()
    }

    pub fn arm_of(&self, player: PlayerId) -> Arm {
        self.arms[player as usize]
    }

    /// Message count received by a player up to and including `day`.
    pub fn receipts_through(&self, player: PlayerId, day: Day) -> usize {
        self.dispatch_days[player as usize]
            .iter()
            .take_while(|&&d| d <= day)
            .count()
    }

    /// Rebuilds the per-player indices from entries (used after file load).
    pub fn rebuild_indices(&mut self) {
        for v in self.dispatch_days.iter_mut() {
            v.clear();
        }
        for v in self.listing_days.iter_mut() {
            v.clear();
        }
        for e in &self.entries {
            let idx = e.player as usize;
            if self.listing_days[idx].last() != Some(&e.day) {
                self.listing_days[idx].push(e.day);
            }
            if e.dispatched {
                self.dispatch_days[idx].push(e.day);
            }
            self.last_day = Some(self.last_day.map_or(e.day, |d| d.max(e.day)));
        }
    }
}

/// Runs one trial day: per arm, lists the top-k violator-risk and top-k
/// victim-risk eligible players, dispatches at most one message per player
/// per day (intervention arm only), and starts the cooldown for every
/// listed player in both arms.
pub fn run_trial_day(
    day: Day,
    assessment: &RiskAssessment,
    eligibility: &mut EligibilityState,
    ledger: &mut TrialLedger,
) -> Result<()> {
    if let Some(last) = ledger.last_day {
        if day <= last {
            return Err(Error::Domain(format!(
                "trial day {day} already recorded (ledger is append-only, last day {last})"
            )));
        }
    }
    debug_assert_eq!(assessment.day, day);
    let n = ledger.population();
    let mut listed_today: Vec<bool> = vec![false; n];
    let mut dispatched_today: Vec<bool> = vec![false; n];

    for arm in Arm::BOTH {
        // snapshot of eligibility before today's listings
        let candidates: Vec<PlayerId> = (0..n as u32)
            .filter(|&p| ledger.arm_of(p) == arm && eligibility.eligible(p, day))
            .collect();
        for kind in RiskKind::BOTH {
            let top = select_top_k(assessment.scores(kind), candidates.iter().copied(), ledger.top_k);
            for (player, score) in top {
                let dispatch = arm == Arm::Intervention && !dispatched_today[player as usize];
                if dispatch {
                    dispatched_today[player as usize] = true;
                }
                listed_today[player as usize] = true;
                ledger.entries.push(LedgerEntry {
                    day,
                    arm,
                    kind,
                    player,
                    score,
                    dispatched: dispatch,
                });
            }
        }
    }

    for p in 0..n {
        if listed_today[p] {
            eligibility.record_listing(p as u32, day);
            ledger.listing_days[p].push(day);
        }
        if dispatched_today[p] {
            ledger.dispatch_days[p].push(day);
        }
    }
    ledger.last_day = Some(day);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assessment(day: Day, violator: Vec<f64>, victim: Vec<f64>) -> RiskAssessment {
        RiskAssessment {
            day,
            threshold: 0.95,
            violator,
            victim,
        }
    }

    /// Eligibility state where everyone has logged in every day until `day`.
    fn all_active(n: usize, day: Day) -> EligibilityState {
        let mut st = EligibilityState::new(vec![false; n], 9, 3);
        for d in 0..day {
            st.record_login_day(d, 0..n as u32);
        }
        st
    }

    /// First player id in the given arm for this seed.
    fn player_in(ledger: &TrialLedger, arm: Arm) -> PlayerId {
        (0..ledger.population() as u32)
            .find(|&p| ledger.arm_of(p) == arm)
            .unwrap()
    }

    #[test]
    fn player_in_both_lists_is_messaged_once() {
        let n = 10;
        let mut ledger = TrialLedger::new(n, 42, 100);
        let mut elig = all_active(n, 30);
        let p = player_in(&ledger, Arm::Intervention);
        let mut violator = vec![0.0; n];
        let mut victim = vec![0.0; n];
        violator[p as usize] = 2.0;
        victim[p as usize] = 1.5;
        run_trial_day(30, &assessment(30, violator, victim), &mut elig, &mut ledger).unwrap();
        let lines: Vec<_> = ledger.entries.iter().filter(|e| e.player == p).collect();
        assert_eq!(lines.len(), 2, "listed twice");
        assert_eq!(lines.iter().filter(|e| e.dispatched).count(), 1, "messaged once");
        assert_eq!(ledger.dispatch_days[p as usize], vec![30]);
        assert_eq!(ledger.listing_days[p as usize], vec![30]);
    }

    #[test]
    fn control_listee_gets_cooldown_but_no_message() {
        let n = 10;
        let mut ledger = TrialLedger::new(n, 42, 100);
        let mut elig = all_active(n, 30);
        let p = player_in(&ledger, Arm::Control);
        let mut violator = vec![0.0; n];
        violator[p as usize] = 2.0;
        run_trial_day(30, &assessment(30, violator, vec![0.0; n]), &mut elig, &mut ledger).unwrap();
        assert_eq!(ledger.dispatch_days[p as usize].len(), 0);
        assert_eq!(elig.last_listed(p), Some(30));
        assert!(ledger.entries.iter().all(|e| e.arm != Arm::Control || !e.dispatched));
    }

    #[test]
    fn caps_hold_under_oversupply() {
        // 250 high-risk players in one arm: exactly 100 + 100 listed
        let n = 600;
        let mut ledger = TrialLedger::new(n, 7, 100);
        let mut elig = all_active(n, 30);
        let mut violator = vec![0.0; n];
        let mut victim = vec![0.0; n];
        let mut count = 0;
        for p in 0..n {
            if ledger.arm_of(p as u32) == Arm::Intervention && count < 250 {
                violator[p] = 1.0 + p as f64 * 1e-3;
                victim[p] = 2.0 + p as f64 * 1e-3;
                count += 1;
            }
        }
        assert_eq!(count, 250);
        run_trial_day(30, &assessment(30, violator, victim), &mut elig, &mut ledger).unwrap();
        let iv: Vec<_> = ledger
            .entries
            .iter()
            .filter(|e| e.arm == Arm::Intervention)
            .collect();
        assert_eq!(iv.iter().filter(|e| e.kind == RiskKind::Violator).count(), 100);
        assert_eq!(iv.iter().filter(|e| e.kind == RiskKind::Victim).count(), 100);
    }

    #[test]
    fn rerecording_a_day_is_an_error() {
        let n = 4;
        let mut ledger = TrialLedger::new(n, 7, 100);
        let mut elig = all_active(n, 30);
        let a = assessment(30, vec![0.0; n], vec![0.0; n]);
        run_trial_day(30, &a, &mut elig, &mut ledger).unwrap();
        let again = run_trial_day(30, &a, &mut elig, &mut ledger);
        assert!(again.is_err());
    }

    #[test]
    fn ledger_line_round_trip() {
        let e = LedgerEntry {
            day: 55,
            arm: Arm::Control,
            kind: RiskKind::Victim,
            player: 123,
            score: 1.9700000000000002,
            dispatched: false,
        };
        let line = e.to_line();
        let back = LedgerEntry::parse_line(&line, "t", 1).unwrap();
        assert_eq!(e, back);
    }
}
