//! Response to warning messages: exponential forgetting of the initial
//! effect, damped geometrically with each repeated receipt.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ResponseParams {
    /// Initial hazard reduction on the receipt day, in [0, 1).
    pub e0: f64,
    /// Forgetting time constant in days.
    pub tau: f64,
    /// Habituation multiplier applied per repeat receipt, in [0, 1].
    pub habituation: f64,
}

/// Hazard multiplier after a message:
/// `1 - e0 * h^(repeat_count - 1) * exp(-days_since_last / tau)`.
///
/// Nondecreasing in `days_since_last`, nondecreasing in `repeat_count` when
/// `h < 1`, always in (0, 1], and exactly 1 when `e0 = 0`.
pub fn intervention_response(days_since_last: u32, repeat_count: u32, params: &ResponseParams) -> f64 {
    debug_assert!(repeat_count >= 1);
    debug_assert!((0.0..1.0).contains(&params.e0));
    debug_assert!(params.tau > 0.0);
    if params.e0 == 0.0 {
        return 1.0;
    }
    let damp = params.habituation.powi(repeat_count as i32 - 1);
    let decay = (-(days_since_last as f64) / params.tau).exp();
    1.0 - params.e0 * damp * decay
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: ResponseParams = ResponseParams {
        e0: 0.2,
        tau: 42.0,
        habituation: 0.5,
    };

    #[test]
    fn fresh_first_message_gives_full_effect() {
        assert!((intervention_response(0, 1, &P) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn effect_is_forgotten_in_the_limit() {
        assert!((intervention_response(100_000, 1, &P) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn third_receipt_is_quartered() {
        // e0=0.2, h=0.5, repeats=3, days 0: 1 - 0.2*0.25 = 0.95
        assert!((intervention_response(0, 3, &P) - 0.95).abs() < 1e-15);
    }

    #[test]
    fn monotone_in_time_and_repeats() {
        let mut prev = 0.0;
        for d in 0..200 {
            let m = intervention_response(d, 1, &P);
            assert!(m >= prev);
            prev = m;
        }
        let mut prev = 0.0;
        for r in 1..10 {
            let m = intervention_response(0, r, &P);
            assert!(m >= prev);
            prev = m;
        }
    }

    #[test]
    fn zero_effect_parameter_gives_exactly_one() {
        let p0 = ResponseParams { e0: 0.0, ..P };
        for d in [0, 5, 400] {
            for r in [1, 2, 9] {
                assert_eq!(intervention_response(d, r, &p0), 1.0);
            }
        }
    }

    #[test]
    fn multiplier_stays_in_unit_interval() {
        let strong = ResponseParams { e0: 0.999, tau: 1.0, habituation: 1.0 };
        for d in 0..50 {
            for r in 1..6 {
                let m = intervention_response(d, r, &strong);
                assert!(m > 0.0 && m <= 1.0, "d={d} r={r}: {m}");
            }
        }
    }
}
