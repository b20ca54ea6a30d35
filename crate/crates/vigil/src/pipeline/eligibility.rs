use crate::domain::{Day, PlayerId};

/// Cooldown length: a player listed in the past nine days is excluded.
pub const COOLDOWN_DAYS: u32 = 9;

/// Activity filter: at least this many login days in the past seven.
pub const MIN_LOGIN_DAYS: u32 = 3;

/// Per-player listing, penalty, and login-history state for eligibility.
///
/// Logins are kept as a 7-day bitmask per player: bit k set means a login on
/// `current_day - 1 - k`. `record_login_day` must be fed days in order.
#[derive(Clone, Debug)]
pub struct EligibilityState {
    current_day: Day,
    last_listed: Vec<Option<Day>>,
    penalized: Vec<bool>,
    login_mask: Vec<u8>,
    cooldown_days: u32,
    min_login_days: u32,
}

impl EligibilityState {
    pub fn new(penalized: Vec<bool>, cooldown_days: u32, min_login_days: u32) -> Self {
        let n = penalized.len();
        EligibilityState {
            current_day: 0,
            last_listed: vec![None; n],
            penalized,
            login_mask: vec![0; n],
            cooldown_days,
            min_login_days,
        }
    }

    pub fn population(&self) -> usize {
        self.penalized.len()
    }

    pub fn current_day(&self) -> Day {
        self.current_day
    }

    /// Folds one finished day of logins into the 7-day history and advances
    /// the clock to `day + 1`.
    pub fn record_login_day(&mut self, day: Day, logged_in: impl IntoIterator<Item = PlayerId>) {
        assert_eq!(day, self.current_day, "login days must be fed in order");
        for m in self.login_mask.iter_mut() {
            *m = (*m << 1) & 0x7f;
        }
        for p in logged_in {
            self.login_mask[p as usize] |= 1;
        }
        self.current_day = day + 1;
    }

    /// Records a listing (either arm, either risk kind); starts the cooldown.
    pub fn record_listing(&mut self, player: PlayerId, day: Day) {
        debug_assert!(self.last_listed[player as usize].map_or(true, |d| d <= day));
        self.last_listed[player as usize] = Some(day);
    }

    pub fn login_days_past7(&self, player: PlayerId) -> u32 {
        self.login_mask[player as usize].count_ones()
    }

    pub fn last_listed(&self, player: PlayerId) -> Option<Day> {
        self.last_listed[player as usize]
    }

    /// True iff the player was not listed in `[day-9, day-1]`, carries no
    /// penalty, and logged in on at least three of the past seven days.
    pub fn eligible(&self, player: PlayerId, day: Day) -> bool {
        debug_assert_eq!(
            day, self.current_day,
            "eligibility is defined for the state's current day"
        );
        let idx = player as usize;
        if self.penalized[idx] {
            return false;
        }
        if let Some(listed) = self.last_listed[idx] {
            if day - listed <= self.cooldown_days {
                return false;
            }
        }
        self.login_days_past7(player) >= self.min_login_days
    }
}
