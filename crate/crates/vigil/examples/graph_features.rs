//! Domain-model tour on a hand-written event log: windowed multiplex graph,
//! metadata features, ground-truth labels, and risk-score aggregation.

use vigil::domain::{
    assign_labels, build_multiplex_graph, compute_metadata_features, parse_event_line, DayWindow,
    Gender, Layer, PlayerRecord,
};
use vigil::pipeline::{risk_scores, ScoredEdge};

fn main() -> Result<(), vigil::Error> {
    // day,hour,layer,actor,target,violation
    let log = "\
14,21,DM,1,2,0
14,22,DM,1,2,1
15,10,AC,2,1,0
15,11,Like,3,1,0
16,23,DM,1,2,0
16,12,Follow,2,3,0
17,13,Follow,3,2,0
17,20,Comment,3,2,0
18,22,DM,1,3,0";
    let events: Vec<_> = log
        .lines()
        .enumerate()
        .map(|(i, l)| parse_event_line(l, "inline", i + 1))
        .collect::<Result<_, _>>()?;

    let window = DayWindow::new(7, 20)?;
    let graph = build_multiplex_graph(&events, window);
    println!("nodes in window: {:?}", graph.nodes);
    for layer in [Layer::Ac, Layer::Dm, Layer::Comment, Layer::Follow, Layer::Like] {
        for e in &graph.layer(layer).edges {
            println!("  {layer}: {} -> {} (weight {})", e.actor, e.target, e.weight);
        }
    }
    println!("total edge weight = event count: {}", graph.total_weight());

    let player = PlayerRecord {
        player_id: 1,
        avatar_gender: Gender::Female,
        avatar_age: 16,
        install_day: -40,
        penalized: false,
        predator_propensity: 0.0,
        victim_susceptibility: 0.0,
        responsiveness: 0.0,
        login_prob: 1.0,
        activity_mult: 1.0,
        night_share: 0.3,
    };
    let features = compute_metadata_features(&player, &events, window);
    println!("\nfeatures for player 1: {features:#?}");

    let labels = assign_labels(&events, 21)?;
    println!(
        "\nlabels at inference day 21 (window 14..=20): player 1 positive = {}",
        labels.is_positive(1)
    );

    let scored = vec![
        ScoredEdge { actor: 1, target: 2, prob: 0.97 },
        ScoredEdge { actor: 1, target: 3, prob: 0.96 },
        ScoredEdge { actor: 2, target: 1, prob: 0.80 },
    ];
    let assessment = risk_scores(21, 4, &scored, 0.95)?;
    println!(
        "\nrisk scores (threshold 0.95): violator[1] = {:.2}, victim[2] = {:.2}, victim[3] = {:.2}",
        assessment.violator[1], assessment.victim[2], assessment.victim[3]
    );
    Ok(())
}
