//! Verifies the attention model's analytic gradients against central finite
//! differences on a small random graph, then trains it for a few epochs.

use rand::Rng;
use vigil::gat::{
    loss_and_gradient, train_weak_learner_snapshots, AttentionGraph, GatParams, Snapshot,
    TrainHyper,
};
use vigil::oracle::{central_difference_gradient, max_relative_error};
use vigil::seeded::{stream, StreamKind};

fn random_snapshot(n: usize, d_in: usize, seed: u64) -> Snapshot {
    let mut rng = stream(seed, StreamKind::Population, 0, 0);
    let features: Vec<f64> = (0..n * d_in).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for i in 0..n as u32 {
        for _ in 0..2 {
            let j = rng.gen_range(0..n as u32);
            if j != i {
                edges.push((j, i));
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let mut degree = vec![0u32; n];
    for &(_, t) in &edges {
        degree[t as usize] += 1;
    }
    let mut in_offsets = vec![0u32; n + 1];
    for i in 0..n {
        in_offsets[i + 1] = in_offsets[i] + degree[i];
    }
    let mut cursor = in_offsets.clone();
    let mut in_neighbors = vec![0u32; edges.len()];
    for &(s, t) in &edges {
        in_neighbors[cursor[t as usize] as usize] = s;
        cursor[t as usize] += 1;
    }
    let pairs = (0..n as u32)
        .map(|i| (i, (i + 1) % n as u32, i % 2 == 0))
        .collect();
    Snapshot {
        graph: AttentionGraph { n, in_offsets, in_neighbors },
        features,
        pairs,
    }
}

fn main() -> Result<(), vigil::Error> {
    let snap = random_snapshot(10, 5, 42);
    let mut rng = stream(9, StreamKind::ModelInit, 0, 0);
    let mut params = GatParams::init(5, 8, 2, &mut rng);
    let wd = 1e-3;

    let (loss, analytic) = loss_and_gradient(&params, std::slice::from_ref(&snap), wd)?;
    let flat = params.to_flat();
    let mut f = |theta: &[f64]| -> f64 {
        params.assign_flat(theta);
        loss_and_gradient(&params, std::slice::from_ref(&snap), wd)
            .expect("loss")
            .0
    };
    let numeric = central_difference_gradient(&mut f, &flat, 1e-6);
    let err = max_relative_error(&analytic, &numeric);
    println!("10-node graph, 2 heads, {} parameters", flat.len());
    println!("loss = {loss:.6}");
    println!("max relative gradient error vs central differences: {err:.3e}");

    let hyper = TrainHyper {
        learning_rate: 0.2,
        epochs: 60,
        ..TrainHyper::default()
    };
    let snap2 = random_snapshot(10, 5, 42);
    let (_, history) = train_weak_learner_snapshots(&[snap2], 5, 8, 2, &hyper)?;
    println!(
        "training loss: {:.4} -> {:.4} over {} epochs",
        history.first().unwrap(),
        history.last().unwrap(),
        history.len() - 1
    );
    Ok(())
}
