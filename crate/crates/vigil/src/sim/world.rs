use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::domain::{is_night_hour, Day, Gender, InteractionEvent, Layer, PlayerId, NIGHT_HOURS};
use crate::error::{Error, Result};
use crate::seeded::{splitmix64, stream, StreamKind};
use crate::sim::population::{generate_population, Population};
use crate::sim::response::{intervention_response, ResponseParams};
use crate::sim::SimParams;

const DAY_HOURS: [u8; 15] = [5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19];

/// Simulation state: population, accumulated event log, the per-player
/// message-receipt history, and the day clock.
pub struct World {
    pub params: SimParams,
    pub population: Population,
    pub day: Day,
    pub events_by_day: Vec<Vec<InteractionEvent>>,
    /// Days each player received the warning message, strictly increasing.
    pub intervention_days: Vec<Vec<Day>>,
    backbone_by_day: Vec<Vec<(PlayerId, PlayerId)>>,
}

impl World {
    pub fn new(params: SimParams) -> Result<World> {
        let population = generate_population(&params)?;
        let mut backbone_by_day = vec![Vec::new(); 7];
        for &(u, v, d) in &population.backbone_pairs {
            backbone_by_day[d as usize].push((u, v));
        }
        let n = params.population;
        Ok(World {
            params,
            population,
            day: 0,
            events_by_day: Vec::new(),
            intervention_days: vec![Vec::new(); n],
            backbone_by_day,
        })
    }

    /// Rebuilds a world whose first days were already generated (and saved)
    /// by an earlier stage. Streams are keyed by day, so stepping onward
    /// produces exactly what an uninterrupted run would have.
    pub fn resume(params: SimParams, events_by_day: Vec<Vec<InteractionEvent>>) -> Result<World> {
        let mut w = World::new(params)?;
        w.day = events_by_day.len() as Day;
        w.events_by_day = events_by_day;
        Ok(w)
    }

    pub fn player_count(&self) -> usize {
        self.population.players.len()
    }

    /// Records a message receipt at the start of `day`; affects behavior
    /// from that same day onward.
    pub fn record_intervention(&mut self, player: PlayerId, day: Day) {
        let hist = &mut self.intervention_days[player as usize];
        debug_assert!(hist.last().map_or(true, |&d| d < day));
        hist.push(day);
    }

    /// Hazard / night-presence multiplier for a player on `day`, combining
    /// the response curve with the player's own responsiveness.
    pub fn response_multiplier(&self, player: PlayerId, day: Day) -> f64 {
        let hist = &self.intervention_days[player as usize];
        let received = hist.partition_point(|&d| d <= day);
        if received == 0 {
            return 1.0;
        }
        let last = hist[received - 1];
        let p = &self.population.players[player as usize];
        let params = ResponseParams {
            e0: self.params.response_e0 * p.responsiveness,
            tau: self.params.response_tau,
            habituation: self.params.response_habituation,
        };
        intervention_response(day - last, received as u32, &params)
    }

    /// Generates one day of events and advances the clock. Errors past the
    /// configured horizon.
    pub fn step_day(&mut self) -> Result<&[InteractionEvent]> {
        if self.day >= self.params.horizon_days {
            return Err(Error::Domain(format!(
                "day {} is past the horizon {}",
                self.day, self.params.horizon_days
            )));
        }
        let day = self.day;
        let n = self.player_count();

        // response multipliers are read in parallel; precompute once
        let multipliers: Vec<f64> = (0..n as u32)
            .map(|p| self.response_multiplier(p, day))
            .collect();

        let mut events: Vec<InteractionEvent> = Vec::new();
        if (day as usize) < self.backbone_by_day.len() {
            for &(u, v) in &self.backbone_by_day[day as usize] {
                let mut rng = stream(
                    self.params.seed,
                    StreamKind::Backbone,
                    splitmix64((u as u64) << 32 | v as u64),
                    day as u64,
                );
                let hour = DAY_HOURS[rng.gen_range(0..DAY_HOURS.len())];
                events.push(InteractionEvent { day, hour, layer: Layer::Follow, actor: u, target: v, violation: false });
                events.push(InteractionEvent { day, hour, layer: Layer::Follow, actor: v, target: u, violation: false });
            }
        }

        let per_player: Vec<Vec<InteractionEvent>> = (0..n as u32)
            .into_par_iter()
            .map(|p| self.player_day_events(p, day, &multipliers))
            .collect();
        for mut evs in per_player {
            events.append(&mut evs);
        }

        self.events_by_day.push(events);
        self.day += 1;
        Ok(self.events_by_day.last().unwrap())
    }

    /// Player ids that acted at least once on the given (already generated)
    /// day; this is the login-day definition used everywhere.
    pub fn logged_in_on(&self, day: Day) -> Vec<PlayerId> {
        let mut seen = vec![false; self.player_count()];
        for ev in &self.events_by_day[day as usize] {
            seen[ev.actor as usize] = true;
        }
        (0..self.player_count() as u32)
            .filter(|&p| seen[p as usize])
            .collect()
    }

    pub fn all_events(&self) -> Vec<InteractionEvent> {
        self.events_by_day.iter().flatten().copied().collect()
    }

    /// Violation probability for one chat event `actor -> target` at `hour`:
    /// base hazard x actor propensity x target susceptibility x night
    /// multiplier x response(actor), with night events additionally gated by
    /// the target's own night presence (room chat more than DMs).
    fn violation_hazard(&self, actor: PlayerId, target: PlayerId, layer: Layer, hour: u8, multipliers: &[f64]) -> f64 {
        let params = &self.params;
        let a = &self.population.players[actor as usize];
        let t = &self.population.players[target as usize];
        let mut hazard = params.base_hazard
            * a.predator_propensity
            * t.victim_susceptibility
            * multipliers[actor as usize];
        if is_night_hour(hour) {
            hazard *= params.night_hazard_multiplier;
            let coupling = match layer {
                Layer::Ac => params.ac_presence_coupling,
                _ => params.dm_presence_coupling,
            };
            hazard *= 1.0 - coupling * (1.0 - multipliers[target as usize]);
        }
        hazard.clamp(0.0, 0.95)
    }

    /// Index of the prey currently receiving most of a predator's attention;
    /// rotates every `focus_period_days`, keyed only by (seed, player, epoch).
    fn focus_index(&self, pid: PlayerId, day: Day, prey_len: usize) -> usize {
        let epoch = day / self.params.focus_period_days;
        (splitmix64(self.params.seed ^ ((pid as u64) << 24) ^ epoch as u64) % prey_len as u64)
            as usize
    }

    fn player_day_events(
        &self,
        pid: PlayerId,
        day: Day,
        multipliers: &[f64],
    ) -> Vec<InteractionEvent> {
        let p = &self.population.players[pid as usize];
        let mut rng = stream(self.params.seed, StreamKind::AgentDay, pid as u64, day as u64);
        if rng.gen::<f64>() >= p.login_prob {
            return Vec::new();
        }
        let params = &self.params;
        let m_self = multipliers[pid as usize];
        // night mass scales with the response multiplier; the freed mass
        // moves to daytime so total volume is preserved
        let night_weight = p.night_share * m_self;
        let day_weight = 1.0 - p.night_share * m_self;

        let friends = &self.population.friends[pid as usize];
        let prey = &self.population.prey[pid as usize];
        let is_predator = !prey.is_empty();
        let chat_boost = if is_predator { params.predator_chat_boost } else { 1.0 };

        let mut events = Vec::new();
        for layer in crate::domain::LAYERS {
            let base_rate = match layer {
                Layer::Ac => params.rate_ac * chat_boost,
                Layer::Dm => params.rate_dm * chat_boost,
                Layer::Comment => params.rate_comment,
                Layer::Follow => params.rate_follow,
                Layer::Like => params.rate_like,
            };
            let count = poisson(&mut rng, base_rate * p.activity_mult);
            for _ in 0..count {
                let target = match self.pick_target(&mut rng, pid, day, layer, friends, prey, is_predator) {
                    Some(t) => t,
                    None => continue,
                };
                let hour = sample_hour(&mut rng, night_weight, day_weight);
                let violation = layer.supports_violation()
                    && rng.gen::<f64>() < self.violation_hazard(pid, target, layer, hour, multipliers);
                events.push(InteractionEvent { day, hour, layer, actor: pid, target, violation });

                // chats draw same-hour replies; at night the reply requires
                // the partner to still be around (their response multiplier)
                if layer.supports_violation() {
                    let mut reply_prob = params.reciprocate_prob;
                    if is_night_hour(hour) {
                        reply_prob *= multipliers[target as usize];
                    }
                    if rng.gen::<f64>() < reply_prob {
                        let reply_violation = rng.gen::<f64>()
                            < self.violation_hazard(target, pid, layer, hour, multipliers);
                        events.push(InteractionEvent {
                            day,
                            hour,
                            layer,
                            actor: target,
                            target: pid,
                            violation: reply_violation,
                        });
                    }
                }
            }
        }
        events
    }

    fn pick_target(
        &self,
        rng: &mut ChaCha8Rng,
        pid: PlayerId,
        day: Day,
        layer: Layer,
        friends: &[PlayerId],
        prey: &[PlayerId],
        is_predator: bool,
    ) -> Option<PlayerId> {
        let n = self.player_count() as u32;
        let random_other = |rng: &mut ChaCha8Rng| -> Option<PlayerId> {
            for _ in 0..8 {
                let t = rng.gen_range(0..n);
                if t != pid {
                    return Some(t);
                }
            }
            None
        };
        let friend_or_random = |rng: &mut ChaCha8Rng, p_friend: f64| -> Option<PlayerId> {
            if !friends.is_empty() && rng.gen::<f64>() < p_friend {
                Some(friends[rng.gen_range(0..friends.len())])
            } else {
                random_other(rng)
            }
        };
        // the grooming footprint spans every layer: prey-directed contact,
        // concentrated on the currently focused prey
        if is_predator
            && !prey.is_empty()
            && rng.gen::<f64>() < self.params.predator_targeting_bias
        {
            let t = if rng.gen::<f64>() < self.params.focus_share {
                prey[self.focus_index(pid, day, prey.len())]
            } else {
                prey[rng.gen_range(0..prey.len())]
            };
            if t != pid {
                return Some(t);
            }
        }
        match layer {
            Layer::Dm => {
                // DMs run between friends
                if friends.is_empty() {
                    None
                } else {
                    Some(friends[rng.gen_range(0..friends.len())])
                }
            }
            Layer::Ac => friend_or_random(rng, 0.85),
            Layer::Comment => friend_or_random(rng, 0.85),
            Layer::Follow => random_other(rng),
            Layer::Like => friend_or_random(rng, 0.95),
        }
    }

    /// Female and male counts, for reporting.
    pub fn gender_counts(&self) -> (usize, usize) {
        let f = self
            .population
            .players
            .iter()
            .filter(|p| p.avatar_gender == Gender::Female)
            .count();
        (f, self.player_count() - f)
    }
}

fn sample_hour(rng: &mut ChaCha8Rng, night_weight: f64, day_weight: f64) -> u8 {
    let total = night_weight + day_weight;
    if rng.gen::<f64>() * total < night_weight {
        NIGHT_HOURS[rng.gen_range(0..NIGHT_HOURS.len())]
    } else {
        DAY_HOURS[rng.gen_range(0..DAY_HOURS.len())]
    }
}

/// Poisson sample by the product-of-uniforms method; fine for small rates.
fn poisson(rng: &mut ChaCha8Rng, lambda: f64) -> u32 {
    if lambda <= 0.0 {
        return 0;
    }
    let limit = (-lambda).exp();
    let mut k = 0u32;
    let mut prod: f64 = rng.gen();
    while prod > limit {
        k += 1;
        prod *= rng.gen::<f64>();
        if k > 1000 {
            break;
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(seed: u64) -> SimParams {
        SimParams {
            population: 300,
            horizon_days: 30,
            seed,
            ..SimParams::default()
        }
    }

    #[test]
    fn identical_seeds_give_identical_days() {
        let mut a = World::new(tiny(9)).unwrap();
        let mut b = World::new(tiny(9)).unwrap();
        for _ in 0..5 {
            let ea = a.step_day().unwrap().to_vec();
            let eb = b.step_day().unwrap().to_vec();
            assert_eq!(ea, eb);
        }
    }

    #[test]
    fn zero_propensity_means_zero_violations() {
        let params = SimParams {
            predator_fraction_male: 0.0,
            predator_fraction_female: 0.0,
            groomed_propensity_coef: 0.0,
            ..tiny(11)
        };
        let mut w = World::new(params).unwrap();
        for _ in 0..10 {
            let evs = w.step_day().unwrap();
            assert!(evs.iter().all(|e| !e.violation));
        }
    }

    #[test]
    fn stepping_past_horizon_is_an_error() {
        let params = SimParams {
            population: 20,
            horizon_days: 2,
            ..tiny(1)
        };
        let mut w = World::new(params).unwrap();
        w.step_day().unwrap();
        w.step_day().unwrap();
        assert!(w.step_day().is_err());
    }

    #[test]
    fn night_violations_exceed_uniform_share() {
        let params = SimParams {
            population: 2000,
            horizon_days: 20,
            base_hazard: 0.3,
            ..tiny(13)
        };
        let mut w = World::new(params).unwrap();
        let mut night = 0u64;
        let mut total = 0u64;
        for _ in 0..20 {
            for ev in w.step_day().unwrap() {
                if ev.violation {
                    total += 1;
                    if is_night_hour(ev.hour) {
                        night += 1;
                    }
                }
            }
        }
        assert!(total > 100, "need violations to compare, got {total}");
        let share = night as f64 / total as f64;
        assert!(share > 9.0 / 24.0, "night share {share} not above uniform");
    }

    #[test]
    fn response_shifts_activity_out_of_night() {
        // a fully responsive player with e0 close to 1 nearly stops night use
        let params = SimParams {
            population: 100,
            horizon_days: 60,
            response_e0: 0.99,
            ..tiny(17)
        };
        let mut w = World::new(params).unwrap();
        // give player 0 full responsiveness and strong night habit
        w.population.players[0].responsiveness = 1.0;
        w.population.players[0].night_share = 0.8;
        w.population.players[0].login_prob = 1.0;
        w.record_intervention(0, 0);
        let mut night = 0u64;
        let mut total = 0u64;
        for _ in 0..20 {
            for ev in w.step_day().unwrap() {
                if ev.actor == 0 {
                    total += 1;
                    if is_night_hour(ev.hour) {
                        night += 1;
                    }
                }
            }
        }
        assert!(total > 20);
        let share = night as f64 / total as f64;
        assert!(share < 0.2, "night share {share} should collapse");
    }

    #[test]
    fn intervention_history_is_strictly_increasing() {
        let mut w = World::new(tiny(3)).unwrap();
        w.record_intervention(5, 3);
        w.record_intervention(5, 13);
        assert_eq!(w.intervention_days[5], vec![3, 13]);
        assert_eq!(w.response_multiplier(5, 2), 1.0);
        assert!(w.response_multiplier(5, 13) < 1.0);
    }
}
