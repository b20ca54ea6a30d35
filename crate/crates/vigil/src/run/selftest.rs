//! One-command verification: runs the oracle suites (exact-test
//! enumerations, gradient check, split-search comparison, tail series) and
//! prints one line per suite.

use rand::Rng;

use crate::boost::tree::{build_tree, FeatureMatrix, TreeNode};
use crate::error::{Error, Result};
use crate::gat::{GatParams, Snapshot};
use crate::oracle;
use crate::seeded::{stream, StreamKind};
use crate::stats::{fisher_exact_2x2, wilcoxon_rank_sum, ContingencyTable2x2};

pub struct SelftestOutcome {
    pub name: &'static str,
    pub detail: String,
}

/// Runs every suite, printing a line per suite; fails on the first broken one.
pub fn run_selftest(print: bool) -> Result<Vec<SelftestOutcome>> {
    let suites: [(&'static str, fn() -> Result<String>); 5] = [
        ("fisher-vs-enumeration", fisher_suite),
        ("wilcoxon-vs-enumeration", wilcoxon_suite),
        ("gat-gradient-check", gradient_suite),
        ("gbdt-split-oracle", split_suite),
        ("tail-probability-oracles", tails_suite),
    ];
    let mut outcomes = Vec::new();
    for (name, suite) in suites {
        match suite() {
            Ok(detail) => {
                if print {
                    println!("selftest {name}: ok ({detail})");
                }
                outcomes.push(SelftestOutcome { name, detail });
            }
            Err(e) => {
                if print {
                    println!("selftest {name}: FAILED ({e})");
                }
                return Err(e);
            }
        }
    }
    Ok(outcomes)
}

fn fisher_suite() -> Result<String> {
    let mut checked = 0usize;
    let mut max_delta = 0.0f64;
    // exhaustive small sweep
    for n in 2..=14u64 {
        for a in 0..=n {
            for b in 0..=(n - a) {
                for c in 0..=(n - a - b) {
                    let d = n - a - b - c;
                    let t = ContingencyTable2x2::new(a, b, c, d);
                    if !t.margins_valid() {
                        continue;
                    }
                    let got = fisher_exact_2x2(&t)?;
                    let want = oracle::fisher_exact_enumerated(&t)?;
                    max_delta = max_delta.max((got - want).abs());
                    checked += 1;
                }
            }
        }
    }
    // random larger tables
    let mut rng = stream(424242, StreamKind::Population, 1, 1);
    for _ in 0..300 {
        let t = ContingencyTable2x2::new(
            rng.gen_range(0..20),
            rng.gen_range(0..20),
            rng.gen_range(0..20),
            rng.gen_range(0..20),
        );
        if !t.margins_valid() {
            continue;
        }
        let got = fisher_exact_2x2(&t)?;
        let want = oracle::fisher_exact_enumerated(&t)?;
        max_delta = max_delta.max((got - want).abs());
        checked += 1;
    }
    if max_delta >= 1e-12 {
        return Err(Error::Stats(format!(
            "fisher deviates from enumeration by {max_delta}"
        )));
    }
    Ok(format!("{checked} tables, max |dp| {max_delta:.2e}"))
}

fn wilcoxon_suite() -> Result<String> {
    let mut rng = stream(777, StreamKind::Population, 2, 2);
    let mut checked = 0usize;
    for _ in 0..60 {
        let n1 = rng.gen_range(1..=6);
        let n2 = rng.gen_range(1..=6);
        let a: Vec<f64> = (0..n1).map(|_| rng.gen_range(0..8) as f64).collect();
        let b: Vec<f64> = (0..n2).map(|_| rng.gen_range(0..8) as f64).collect();
        let (_, got) = wilcoxon_rank_sum(&a, &b)?;
        let want = oracle::wilcoxon_exact_enumerated(&a, &b)?;
        if (got - want).abs() >= 1e-12 {
            return Err(Error::Stats(format!(
                "wilcoxon {got} vs enumeration {want} on {a:?} / {b:?}"
            )));
        }
        checked += 1;
    }
    Ok(format!("{checked} datasets, exact agreement"))
}

fn gradient_suite() -> Result<String> {
    // 10-node random graph, 2 heads
    let n = 10usize;
    let d_in = 4usize;
    let mut rng = stream(31, StreamKind::Population, 3, 3);
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
    let graph = crate::gat::AttentionGraph {
        n,
        in_offsets,
        in_neighbors,
    };
    let pairs: Vec<(u32, u32, bool)> = (0..n as u32)
        .map(|i| (i, (i + 1) % n as u32, i % 3 == 0))
        .collect();
    let snap = Snapshot {
        graph,
        features,
        pairs,
    };
    let mut init_rng = stream(57, StreamKind::ModelInit, 0, 0);
    let mut params = GatParams::init(d_in, 8, 2, &mut init_rng);
    let wd = 1e-3;
    let (_, analytic) = crate::gat::loss_and_gradient(&params, std::slice::from_ref(&snap), wd)?;
    let flat = params.to_flat();
    let mut f = |theta: &[f64]| -> f64 {
        params.assign_flat(theta);
        crate::gat::loss_and_gradient(&params, std::slice::from_ref(&snap), wd)
            .expect("loss evaluates")
            .0
    };
    let numeric = oracle::central_difference_gradient(&mut f, &flat, 1e-6);
    let err = oracle::max_relative_error(&analytic, &numeric);
    if err >= 1e-4 {
        return Err(Error::Model(format!("gradient check error {err}")));
    }
    Ok(format!("{} parameters, max rel err {err:.2e}", flat.len()))
}

fn split_suite() -> Result<String> {
    let mut rng = stream(97, StreamKind::Population, 4, 4);
    let mut checked = 0usize;
    for _ in 0..10 {
        let n = 200usize;
        let f = 4usize;
        let mut m = FeatureMatrix::new(f);
        for _ in 0..n {
            let row: Vec<f64> = (0..f).map(|_| rng.gen_range(0..40) as f64 / 4.0).collect();
            m.push_row(&row);
        }
        let grad: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let hess: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..0.25)).collect();
        let presorted = m.presort();
        let (tree, _) = build_tree(&m, &presorted, &grad, &hess, 1, 20, 1.0);
        let want = oracle::brute_force_best_split(&m, &grad, &hess, 20, 1.0);
        match (&tree.nodes[0], want) {
            (TreeNode::Split { feature, threshold, .. }, Some(w)) => {
                if *feature != w.feature || *threshold != w.threshold {
                    return Err(Error::Model(format!(
                        "split ({feature}, {threshold}) vs oracle ({}, {})",
                        w.feature, w.threshold
                    )));
                }
            }
            (TreeNode::Leaf { .. }, None) => {}
            other => {
                return Err(Error::Model(format!(
                    "split disagreement: {other:?} vs oracle"
                )))
            }
        }
        checked += 1;
    }
    Ok(format!("{checked} datasets, stumps match brute force"))
}

fn tails_suite() -> Result<String> {
    let mut worst = 0.0f64;
    for x in [0.05, 0.5, 1.0, 2.0, 3.84, 6.63, 10.83] {
        let a = crate::stats::special::chi_square_sf(x, 1.0);
        let b = oracle::chi_square_df1_sf_series(x);
        worst = worst.max(((a - b) / b).abs());
    }
    for df in [1u32, 2, 5, 10, 30] {
        for t in [0.3, 1.0, 2.0, 3.5] {
            let a = crate::stats::special::t_two_sided_p(t, df as f64);
            let b = oracle::t_two_sided_p_closed_form(t, df);
            worst = worst.max(((a - b) / b).abs());
        }
    }
    if worst >= 1e-10 {
        return Err(Error::Stats(format!("tail probabilities deviate by {worst}")));
    }
    Ok(format!("max rel err {worst:.2e}"))
}
