use std::collections::{HashMap, HashSet};

use crate::domain::{DayWindow, InteractionEvent, Layer, PlayerId, PlayerRecord};

/// Fixed feature dimensionality: age, gender one-hot (2), friend count,
/// days since install, five per-layer rates, login days.
pub const FEATURE_DIM: usize = 11;

/// Per-player metadata features for one inference window.
///
/// Activity rates are event counts divided by login days; a login day is any
/// day with at least one event by the player. Zero login days gives all-zero
/// rates (such players are filtered later by the activity eligibility rule).
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub avatar_age: f64,
    pub gender_female: f64,
    pub gender_male: f64,
    /// Mutual-follow pair count as of the window end.
    pub friend_count: f64,
    pub days_since_install: f64,
    /// Events per login day, one per layer in canonical order.
    pub rates: [f64; 5],
    pub login_days_in_window: f64,
}

impl FeatureVector {
    pub fn zero_activity(player: &PlayerRecord, friend_count: u32, days_since_install: f64) -> Self {
        FeatureVector {
            avatar_age: player.avatar_age as f64,
            gender_female: f64::from(player.avatar_gender == crate::domain::Gender::Female),
            gender_male: f64::from(player.avatar_gender == crate::domain::Gender::Male),
            friend_count: friend_count as f64,
            days_since_install,
            rates: [0.0; 5],
            login_days_in_window: 0.0,
        }
    }

    pub fn to_array(&self) -> [f64; FEATURE_DIM] {
        [
            self.avatar_age,
            self.gender_female,
            self.gender_male,
            self.friend_count,
            self.days_since_install,
            self.rates[0],
            self.rates[1],
            self.rates[2],
            self.rates[3],
            self.rates[4],
            self.login_days_in_window,
        ]
    }
}

/// Computes one player's features from raw events; the reference
/// (non-incremental) form of the operation.
///
/// `events` must cover history up to `window.end` — friendship state is
/// cumulative over all follow events seen so far, while activity rates use
/// only in-window events.
pub fn compute_metadata_features(
    player: &PlayerRecord,
    events: &[InteractionEvent],
    window: DayWindow,
) -> FeatureVector {
    let mut follows: HashSet<(PlayerId, PlayerId)> = HashSet::new();
    let mut friend_count = 0u32;
    let mut counts = [0u64; 5];
    let mut login_days: HashSet<u32> = HashSet::new();

    for ev in events {
        if ev.day > window.end {
            continue;
        }
        if ev.layer == Layer::Follow && follows.insert((ev.actor, ev.target)) {
            if follows.contains(&(ev.target, ev.actor))
                && (ev.actor == player.player_id || ev.target == player.player_id)
            {
                friend_count += 1;
            }
        }
        if window.contains(ev.day) && ev.actor == player.player_id {
            counts[ev.layer.index()] += 1;
            login_days.insert(ev.day);
        }
    }

    let login = login_days.len() as f64;
    let mut rates = [0.0; 5];
    if login > 0.0 {
        for i in 0..5 {
            rates[i] = counts[i] as f64 / login;
        }
    }
    let days_since_install = (window.end as i64 + 1 - player.install_day as i64) as f64;
    FeatureVector {
        avatar_age: player.avatar_age as f64,
        gender_female: f64::from(player.avatar_gender == crate::domain::Gender::Female),
        gender_male: f64::from(player.avatar_gender == crate::domain::Gender::Male),
        friend_count: friend_count as f64,
        days_since_install,
        rates,
        login_days_in_window: login,
    }
}

/// Incremental feature state for the daily loop: follows accumulate across
/// days, per-day actor counts are kept for the trailing feature window.
///
/// Produces exactly the same vectors as [`compute_metadata_features`].
pub struct FeatureBuilder {
    n: usize,
    follows: HashSet<(PlayerId, PlayerId)>,
    mutual_friends: Vec<u32>,
    /// Per day: (player -> per-layer counts) for days not yet beyond any window.
    day_counts: HashMap<u32, HashMap<PlayerId, [u32; 5]>>,
}

impl FeatureBuilder {
    pub fn new(population: usize) -> Self {
        FeatureBuilder {
            n: population,
            follows: HashSet::new(),
            mutual_friends: vec![0; population],
            day_counts: HashMap::new(),
        }
    }

    /// Ingest one day of events. Days must be fed in nondecreasing order.
    pub fn ingest_day(&mut self, day: u32, events: &[InteractionEvent]) {
        let counts = self.day_counts.entry(day).or_default();
        for ev in events {
            debug_assert_eq!(ev.day, day);
            if ev.layer == Layer::Follow && self.follows.insert((ev.actor, ev.target)) {
                if self.follows.contains(&(ev.target, ev.actor)) {
                    self.mutual_friends[ev.actor as usize] += 1;
                    self.mutual_friends[ev.target as usize] += 1;
                }
            }
            counts.entry(ev.actor).or_insert([0; 5])[ev.layer.index()] += 1;
        }
    }

    /// Drop per-day counts older than `before_day` (no window reaches them).
    pub fn prune(&mut self, before_day: u32) {
        self.day_counts.retain(|d, _| *d >= before_day);
    }

    /// Feature vectors for every player over `window`, indexed by player id.
    pub fn features_for_window(
        &self,
        players: &[PlayerRecord],
        window: DayWindow,
    ) -> Vec<FeatureVector> {
        assert_eq!(players.len(), self.n);
        let mut counts = vec![[0u64; 5]; self.n];
        let mut login_days = vec![0u32; self.n];
        for day in window.start..=window.end {
            if let Some(per_player) = self.day_counts.get(&day) {
                for (pid, c) in per_player {
                    let idx = *pid as usize;
                    for l in 0..5 {
                        counts[idx][l] += c[l] as u64;
                    }
                    login_days[idx] += 1;
                }
            }
        }
        players
            .iter()
            .map(|p| {
                let idx = p.player_id as usize;
                let login = login_days[idx] as f64;
                let mut rates = [0.0; 5];
                if login > 0.0 {
                    for l in 0..5 {
                        rates[l] = counts[idx][l] as f64 / login;
                    }
                }
                FeatureVector {
                    avatar_age: p.avatar_age as f64,
                    gender_female: f64::from(p.avatar_gender == crate::domain::Gender::Female),
                    gender_male: f64::from(p.avatar_gender == crate::domain::Gender::Male),
                    friend_count: self.mutual_friends[idx] as f64,
                    days_since_install: (window.end as i64 + 1 - p.install_day as i64) as f64,
                    rates,
                    login_days_in_window: login,
                }
            })
            .collect()
    }
}
