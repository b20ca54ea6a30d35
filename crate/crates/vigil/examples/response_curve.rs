//! Prints the warning-response surface: hazard multiplier against days since
//! the last message, for one to four cumulative receipts.

use vigil::sim::{intervention_response, ResponseParams};

fn main() {
    let params = ResponseParams {
        e0: 0.2,
        tau: 42.0,
        habituation: 0.5,
    };
    println!(
        "hazard multiplier, e0 = {}, tau = {} days, habituation = {}",
        params.e0, params.tau, params.habituation
    );
    print!("{:>14}", "days since");
    for r in 1..=4 {
        print!("{:>12}", format!("receipt {r}"));
    }
    println!();
    for days in [0u32, 1, 3, 7, 14, 28, 42, 84, 126, 168] {
        print!("{days:>14}");
        for repeats in 1..=4 {
            print!("{:>12.4}", intervention_response(days, repeats, &params));
        }
        println!();
    }
    println!("\nmultiplier 1.0 means no remaining effect; the floor on the");
    println!("receipt day is 1 - e0 for a first message, damped by the");
    println!("habituation factor for each repeat.");
}
