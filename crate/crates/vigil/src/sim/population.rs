use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::domain::{Gender, PlayerId, PlayerRecord};
use crate::error::Result;
use crate::seeded::{stream, StreamKind};
use crate::sim::SimParams;

/// Generated population: players, the static friendship backbone (mutual
/// pairs from preferential attachment), and per-predator prey lists sampled
/// proportionally to susceptibility.
pub struct Population {
    pub players: Vec<PlayerRecord>,
    pub friends: Vec<Vec<PlayerId>>,
    pub prey: Vec<Vec<PlayerId>>,
    /// (u, v) backbone pairs with the day their mutual follow is emitted.
    pub backbone_pairs: Vec<(PlayerId, PlayerId, u32)>,
}

pub fn generate_population(params: &SimParams) -> Result<Population> {
    params.validate()?;
    let n = params.population;
    let mut rng = stream(params.seed, StreamKind::Population, 0, 0);
    let login_beta = Beta::new(params.login_prob_alpha, params.login_prob_beta)
        .expect("validated login Beta parameters");
    let propensity_beta = Beta::new(6.0, 2.0).expect("fixed Beta parameters");

    let mut players = Vec::with_capacity(n);
    let mut groomer_flags = vec![false; n];
    for id in 0..n as u32 {
        let gender = if rng.gen::<f64>() < params.female_ratio {
            Gender::Female
        } else {
            Gender::Male
        };
        let age_excess = -params.age_mean_excess * (1.0 - rng.gen::<f64>()).ln();
        let avatar_age = (params.age_min + age_excess as u32).min(params.age_max);
        let install_day = -(rng.gen_range(0..=params.install_span_days) as i32);
        let penalized = rng.gen::<f64>() < params.penalized_fraction;

        let predator_fraction = match gender {
            Gender::Female => params.predator_fraction_female,
            Gender::Male => params.predator_fraction_male,
        };
        let is_groomer = rng.gen::<f64>() < predator_fraction;
        groomer_flags[id as usize] = is_groomer;
        let groomer_propensity: f64 = if is_groomer {
            propensity_beta.sample(&mut rng)
        } else {
            0.0
        };

        let susc_base = match gender {
            Gender::Female => params.susceptibility_base_female,
            Gender::Male => params.susceptibility_base_male,
        };
        let age_factor =
            (-((avatar_age - params.age_min) as f64) / params.susceptibility_age_scale).exp();
        let noise = (rng.gen_range(-1.0..1.0f64) * 0.5).exp();
        let victim_susceptibility = (susc_base * age_factor * noise).clamp(0.0, 1.0);
        // groomed players pick up propensity with their susceptibility
        let groomed = params.groomed_propensity_coef
            * victim_susceptibility
            * victim_susceptibility
            * rng.gen_range(0.5..1.5);
        let predator_propensity = groomer_propensity.max(groomed).clamp(0.0, 1.0);

        let resp_mean = match gender {
            Gender::Female => params.responsiveness_female,
            Gender::Male => params.responsiveness_male,
        };
        let responsiveness =
            (resp_mean + params.responsiveness_sd * normal_sample(&mut rng)).clamp(0.0, 1.0);

        let login_prob = login_beta.sample(&mut rng);
        let activity_mult = (params.activity_sigma * normal_sample(&mut rng)).exp();
        let night_share = (params.night_share_base
            + params.night_share_sd * normal_sample(&mut rng)
            + params.night_share_predator_boost * predator_propensity
            + params.night_share_victim_boost * victim_susceptibility)
            .clamp(0.02, 0.9);

        let p = PlayerRecord {
            player_id: id,
            avatar_gender: gender,
            avatar_age,
            install_day,
            penalized,
            predator_propensity,
            victim_susceptibility,
            responsiveness,
            login_prob,
            activity_mult,
            night_share,
        };
        p.validate()?;
        players.push(p);
    }

    let (friends, backbone_pairs) = backbone(&mut rng, n, params.backbone_friends);

    // prey lists: weighted by susceptibility over the whole population
    let mut cum = Vec::with_capacity(n);
    let mut acc = 0.0;
    for p in &players {
        acc += p.victim_susceptibility + 1e-9;
        cum.push(acc);
    }
    let mut prey = vec![Vec::new(); n];
    for (p, &is_groomer) in players.iter().zip(groomer_flags.iter()) {
        if !is_groomer {
            continue;
        }
        let list = &mut prey[p.player_id as usize];
        for _ in 0..params.prey_per_predator {
            let u = rng.gen::<f64>() * acc;
            let idx = cum.partition_point(|&c| c < u).min(n - 1) as u32;
            if idx != p.player_id {
                list.push(idx);
            }
        }
    }

    Ok(Population {
        players,
        friends,
        prey,
        backbone_pairs,
    })
}

/// Box-Muller standard normal draw.
fn normal_sample(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Preferential-attachment backbone: each new node links to up to `m`
/// earlier nodes sampled proportionally to current degree (endpoint-bag
/// trick). Pairs get a mutual-follow emission day in the first week.
fn backbone(
    rng: &mut impl Rng,
    n: usize,
    m: usize,
) -> (Vec<Vec<PlayerId>>, Vec<(PlayerId, PlayerId, u32)>) {
    let mut friends: Vec<Vec<PlayerId>> = vec![Vec::new(); n];
    let mut bag: Vec<PlayerId> = Vec::with_capacity(2 * n * m);
    let mut pairs = Vec::with_capacity(n * m);
    for i in 1..n as u32 {
        let want = m.min(i as usize);
        let mut chosen: Vec<PlayerId> = Vec::with_capacity(want);
        let mut tries = 0;
        while chosen.len() < want && tries < 50 {
            tries += 1;
            let candidate = if bag.is_empty() || rng.gen::<f64>() < 0.15 {
                rng.gen_range(0..i)
            } else {
                bag[rng.gen_range(0..bag.len())]
            };
            if candidate != i && !chosen.contains(&candidate) {
                chosen.push(candidate);
            }
        }
        for c in chosen {
            friends[i as usize].push(c);
            friends[c as usize].push(i);
            bag.push(i);
            bag.push(c);
            let follow_day = rng.gen_range(0..7u32);
            pairs.push((i, c, follow_day));
        }
    }
    (friends, pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64, population: usize) -> SimParams {
        SimParams {
            population,
            seed,
            ..SimParams::default()
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_population(&small(5, 500)).unwrap();
        let b = generate_population(&small(5, 500)).unwrap();
        for (x, y) in a.players.iter().zip(&b.players) {
            assert_eq!(x.avatar_age, y.avatar_age);
            assert_eq!(x.predator_propensity, y.predator_propensity);
            assert_eq!(x.night_share, y.night_share);
        }
        assert_eq!(a.friends, b.friends);
    }

    #[test]
    fn zero_population_is_an_error() {
        assert!(generate_population(&small(1, 0)).is_err());
    }

    #[test]
    fn all_female_boundary() {
        let params = SimParams {
            female_ratio: 1.0,
            ..small(2, 200)
        };
        let pop = generate_population(&params).unwrap();
        assert!(pop.players.iter().all(|p| p.avatar_gender == Gender::Female));
    }

    #[test]
    fn female_fraction_within_three_sigma() {
        let n = 20_000;
        let pop = generate_population(&small(3, n)).unwrap();
        let females = pop
            .players
            .iter()
            .filter(|p| p.avatar_gender == Gender::Female)
            .count() as f64;
        let mean = n as f64 * 0.61;
        let sd = (n as f64 * 0.61 * 0.39).sqrt();
        assert!(
            (females - mean).abs() < 3.0 * sd,
            "{females} females of {n}"
        );
    }

    #[test]
    fn backbone_is_mutual_and_connected_enough() {
        let pop = generate_population(&small(4, 1000)).unwrap();
        for (i, fr) in pop.friends.iter().enumerate() {
            for &f in fr {
                assert!(pop.friends[f as usize].contains(&(i as u32)));
            }
        }
        let with_friends = pop.friends.iter().filter(|f| !f.is_empty()).count();
        assert!(with_friends as f64 / 1000.0 > 0.99);
    }

    #[test]
    fn prey_lists_cover_the_drawn_groomer_share() {
        let pop = generate_population(&small(6, 2000)).unwrap();
        let with_prey = pop.prey.iter().filter(|p| !p.is_empty()).count() as f64;
        // expected share: gender mix of the groomer fractions
        let params = small(6, 2000);
        let expect = 2000.0
            * (params.female_ratio * params.predator_fraction_female
                + (1.0 - params.female_ratio) * params.predator_fraction_male);
        assert!((with_prey - expect).abs() < 4.0 * expect.sqrt() + 20.0);
        for (p, prey) in pop.players.iter().zip(&pop.prey) {
            if !prey.is_empty() {
                assert!(p.predator_propensity > 0.0, "groomers carry propensity");
                assert!(prey.iter().all(|&t| t != p.player_id));
            }
        }
    }

    #[test]
    fn groomed_propensity_tracks_susceptibility() {
        let params = SimParams {
            predator_fraction_male: 0.0,
            predator_fraction_female: 0.0,
            ..small(8, 3000)
        };
        let pop = generate_population(&params).unwrap();
        // propensity floor is susceptibility-linked: top-susceptibility
        // players carry clearly more propensity than the bottom
        let mut by_susc: Vec<&crate::domain::PlayerRecord> = pop.players.iter().collect();
        by_susc.sort_by(|a, b| a.victim_susceptibility.total_cmp(&b.victim_susceptibility));
        let lo: f64 = by_susc[..300].iter().map(|p| p.predator_propensity).sum::<f64>() / 300.0;
        let hi: f64 = by_susc[2700..].iter().map(|p| p.predator_propensity).sum::<f64>() / 300.0;
        assert!(hi > 4.0 * lo, "hi {hi} lo {lo}");
    }
}
