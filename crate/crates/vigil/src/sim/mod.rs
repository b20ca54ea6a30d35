//! Agent-based generator of a synthetic avatar platform: population with
//! latent traits, daily interactions across the five layers, violation
//! events, and the configurable response to warning messages.

mod population;
mod response;
mod world;

pub use population::{generate_population, Population};
pub use response::{intervention_response, ResponseParams};
pub use world::World;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Generator configuration. Response defaults follow the study values
/// (initial effect 0.2, 42-day decay, halving per repeat); the rest are
/// calibration knobs for the synthetic platform.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SimParams {
    pub population: usize,
    pub female_ratio: f64,
    pub age_min: u32,
    pub age_mean_excess: f64,
    pub age_max: u32,
    pub install_span_days: u32,
    pub penalized_fraction: f64,

    /// Fraction of each gender drawn as groomers (prey lists, chat boost).
    pub predator_fraction_male: f64,
    pub predator_fraction_female: f64,
    /// Groomed-player coupling: propensity floor of
    /// `coef * susceptibility^2 * noise` (manipulated players violate too).
    pub groomed_propensity_coef: f64,
    pub susceptibility_base_female: f64,
    pub susceptibility_base_male: f64,
    /// e-folding of susceptibility with years above `age_min`.
    pub susceptibility_age_scale: f64,
    pub responsiveness_female: f64,
    pub responsiveness_male: f64,
    pub responsiveness_sd: f64,

    pub login_prob_alpha: f64,
    pub login_prob_beta: f64,
    pub activity_sigma: f64,
    /// Events per login day per layer.
    pub rate_ac: f64,
    pub rate_dm: f64,
    pub rate_comment: f64,
    pub rate_follow: f64,
    pub rate_like: f64,
    /// Multiplier on predators' chat-layer rates.
    pub predator_chat_boost: f64,

    pub night_share_base: f64,
    pub night_share_sd: f64,
    pub night_share_predator_boost: f64,
    pub night_share_victim_boost: f64,

    pub backbone_friends: usize,
    pub prey_per_predator: usize,
    /// Probability a predator's interactions go to their prey list.
    pub predator_targeting_bias: f64,
    /// Share of prey-directed contact aimed at the currently focused prey.
    pub focus_share: f64,
    /// Days between focus rotations (grooming attention shifts).
    pub focus_period_days: u32,
    /// Probability a chat toward a player draws a same-hour reply.
    pub reciprocate_prob: f64,

    pub base_hazard: f64,
    pub night_hazard_multiplier: f64,
    /// How strongly night victimization depends on the target's night
    /// presence, per chat layer (rooms need co-presence, DMs less so).
    pub ac_presence_coupling: f64,
    pub dm_presence_coupling: f64,

    /// Warning-response model: initial hazard reduction, decay constant in
    /// days, habituation multiplier per repeat message.
    pub response_e0: f64,
    pub response_tau: f64,
    pub response_habituation: f64,

    pub horizon_days: u32,
    pub seed: u64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            population: 20_000,
            female_ratio: 0.61,
            age_min: 13,
            age_mean_excess: 6.0,
            age_max: 69,
            install_span_days: 400,
            penalized_fraction: 0.015,
            predator_fraction_male: 0.16,
            predator_fraction_female: 0.07,
            groomed_propensity_coef: 0.22,
            susceptibility_base_female: 0.65,
            susceptibility_base_male: 0.28,
            susceptibility_age_scale: 14.0,
            responsiveness_female: 0.95,
            responsiveness_male: 0.05,
            responsiveness_sd: 0.08,
            login_prob_alpha: 5.0,
            login_prob_beta: 4.0,
            activity_sigma: 0.35,
            rate_ac: 1.2,
            rate_dm: 1.0,
            rate_comment: 0.45,
            rate_follow: 0.15,
            rate_like: 0.85,
            predator_chat_boost: 1.3,
            night_share_base: 0.22,
            night_share_sd: 0.06,
            night_share_predator_boost: 0.30,
            night_share_victim_boost: 0.35,
            backbone_friends: 4,
            prey_per_predator: 16,
            predator_targeting_bias: 0.75,
            focus_share: 0.9,
            focus_period_days: 14,
            reciprocate_prob: 0.5,
            base_hazard: 0.28,
            night_hazard_multiplier: 2.5,
            ac_presence_coupling: 1.0,
            dm_presence_coupling: 0.4,
            response_e0: 0.2,
            response_tau: 42.0,
            response_habituation: 0.5,
            horizon_days: 351,
            seed: 20220213,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        let field = |name: &str, msg: &str| Error::config(name, msg);
        if self.population == 0 {
            return Err(field("sim.population", "must be at least 1"));
        }
        let unit_fields = [
            ("sim.female_ratio", self.female_ratio),
            ("sim.penalized_fraction", self.penalized_fraction),
            ("sim.predator_fraction_male", self.predator_fraction_male),
            ("sim.predator_fraction_female", self.predator_fraction_female),
            ("sim.susceptibility_base_female", self.susceptibility_base_female),
            ("sim.susceptibility_base_male", self.susceptibility_base_male),
            ("sim.responsiveness_female", self.responsiveness_female),
            ("sim.responsiveness_male", self.responsiveness_male),
            ("sim.predator_targeting_bias", self.predator_targeting_bias),
            ("sim.focus_share", self.focus_share),
            ("sim.reciprocate_prob", self.reciprocate_prob),
            ("sim.base_hazard", self.base_hazard),
            ("sim.groomed_propensity_coef", self.groomed_propensity_coef),
            ("sim.ac_presence_coupling", self.ac_presence_coupling),
            ("sim.dm_presence_coupling", self.dm_presence_coupling),
            ("sim.response_habituation", self.response_habituation),
            ("sim.night_share_base", self.night_share_base),
        ];
        for (name, v) in unit_fields {
            if !(0.0..=1.0).contains(&v) {
                return Err(field(name, &format!("{v} outside [0, 1]")));
            }
        }
        if !(0.0..1.0).contains(&self.response_e0) {
            return Err(field(
                "sim.response_e0",
                &format!("{} outside [0, 1)", self.response_e0),
            ));
        }
        if self.response_tau <= 0.0 {
            return Err(field("sim.response_tau", "must be positive"));
        }
        if self.horizon_days == 0 {
            return Err(field("sim.horizon_days", "must be at least 1"));
        }
        if self.focus_period_days == 0 {
            return Err(field("sim.focus_period_days", "must be at least 1"));
        }
        let positive = [
            ("sim.age_mean_excess", self.age_mean_excess),
            ("sim.login_prob_alpha", self.login_prob_alpha),
            ("sim.login_prob_beta", self.login_prob_beta),
            ("sim.night_hazard_multiplier", self.night_hazard_multiplier),
        ];
        for (name, v) in positive {
            if v <= 0.0 {
                return Err(field(name, "must be positive"));
            }
        }
        let nonneg = [
            ("sim.rate_ac", self.rate_ac),
            ("sim.rate_dm", self.rate_dm),
            ("sim.rate_comment", self.rate_comment),
            ("sim.rate_follow", self.rate_follow),
            ("sim.rate_like", self.rate_like),
            ("sim.activity_sigma", self.activity_sigma),
            ("sim.night_share_sd", self.night_share_sd),
            ("sim.responsiveness_sd", self.responsiveness_sd),
        ];
        for (name, v) in nonneg {
            if v < 0.0 {
                return Err(field(name, "must be nonnegative"));
            }
        }
        Ok(())
    }
}
