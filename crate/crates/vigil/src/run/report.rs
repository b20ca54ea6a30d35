//! Plain-text report mirroring the evaluation tables: covariate balance,
//! windowed effects with significance markers, repeated-messaging variants,
//! night usage, and score calibration.

use std::fmt::Write as _;

use crate::run::analysis::{AnalysisReport, EffectTableOut};

fn fmt_opt(p: Option<f64>, digits: usize) -> String {
    match p {
        Some(v) if v.is_finite() => format!("{v:.digits$}"),
        _ => "NA".to_string(),
    }
}

fn effect_cell_text(cell_effect: Option<f64>, p: Option<f64>, alpha: f64) -> String {
    match cell_effect {
        Some(e) => {
            let star = match p {
                Some(p) if p < alpha => "*",
                _ => " ",
            };
            format!("{e:>8.4}{star}")
        }
        None => format!("{:>9}", "NA"),
    }
}

fn render_effect_block(out: &mut String, tables: &[&EffectTableOut], alpha: f64, title: &str) {
    let Some(first) = tables.first() else { return };
    writeln!(out, "{title}").unwrap();
    let mut header = format!("{:<6} {:<8}", "gender", "value");
    for cell in &first.cells {
        header.push_str(&format!(" {:>9}", format!("{}-{}", cell.window.lo, cell.window.hi)));
    }
    writeln!(out, "{header}").unwrap();
    for t in tables {
        let mut eff = format!("{:<6} {:<8}", t.gender, "effect");
        let mut pvs = format!("{:<6} {:<8}", "", "p-value");
        let mut ns = format!("{:<6} {:<8}", "", "n (i/c)");
        for cell in &t.cells {
            eff.push_str(&format!(" {}", effect_cell_text(cell.effect, cell.p_value, alpha)));
            pvs.push_str(&format!(" {:>9}", fmt_opt(cell.p_value, 4)));
            ns.push_str(&format!(
                " {:>9}",
                format!("{}/{}", cell.n_intervention, cell.n_control)
            ));
        }
        writeln!(out, "{eff}").unwrap();
        writeln!(out, "{pvs}").unwrap();
        writeln!(out, "{ns}").unwrap();
    }
    writeln!(out).unwrap();
}

pub fn render_report(report: &AnalysisReport) -> String {
    let mut out = String::new();
    writeln!(out, "=== Trial evaluation report ===").unwrap();
    writeln!(
        out,
        "significance marker `*` at alpha = {}\n",
        report.alpha
    )
    .unwrap();

    writeln!(out, "--- Covariate balance (unique listed players) ---").unwrap();
    writeln!(
        out,
        "{:<6} {:<26} {:>14} {:>14} {:>9}",
        "gender", "metric", "intervention", "control", "p-value"
    )
    .unwrap();
    for c in &report.covariates {
        let rows: Vec<(String, String, String, Option<f64>)> = vec![
            (
                "cumulative listings".into(),
                c.cumulative_intervention.to_string(),
                c.cumulative_control.to_string(),
                None,
            ),
            (
                "unique players".into(),
                c.unique_intervention.to_string(),
                c.unique_control.to_string(),
                None,
            ),
            (
                "avatar age".into(),
                format!("{:.2} ({:.2})", c.age_mean[0], c.age_sd[0]),
                format!("{:.2} ({:.2})", c.age_mean[1], c.age_sd[1]),
                c.age_p,
            ),
            (
                "usage days after listing".into(),
                format!("{:.2} ({:.2})", c.usage_mean[0], c.usage_sd[0]),
                format!("{:.2} ({:.2})", c.usage_mean[1], c.usage_sd[1]),
                c.usage_p,
            ),
            (
                "listed once".into(),
                format!("{:.1}%", 100.0 * c.once_share[0]),
                format!("{:.1}%", 100.0 * c.once_share[1]),
                c.once_p,
            ),
            (
                "listed 5+ times".into(),
                format!("{:.2}%", 100.0 * c.five_plus_share[0]),
                format!("{:.2}%", 100.0 * c.five_plus_share[1]),
                c.five_plus_p,
            ),
        ];
        for (metric, i, ctl, p) in rows {
            writeln!(
                out,
                "{:<6} {:<26} {:>14} {:>14} {:>9}",
                c.gender,
                metric,
                i,
                ctl,
                fmt_opt(p, 4)
            )
            .unwrap();
        }
    }
    writeln!(out).unwrap();

    let blocks: [(&str, &str, &str); 9] = [
        ("violation", "all", "--- Violation inhibition (all listed players) ---"),
        ("violated_dm", "all", "--- Avoidance of being violated in DM (all listed players) ---"),
        ("violated_ac", "all", "--- Avoidance of being violated in AC (all listed players) ---"),
        ("violation", "repeat2", "--- Violation inhibition (listed exactly twice, from 2nd listing) ---"),
        ("violated_dm", "repeat2", "--- Being violated in DM (listed exactly twice) ---"),
        ("violated_ac", "repeat2", "--- Being violated in AC (listed exactly twice) ---"),
        ("violation", "repeat3plus", "--- Violation inhibition (listed 3+ times, from 3rd listing) ---"),
        ("violated_dm", "repeat3plus", "--- Being violated in DM (listed 3+ times) ---"),
        ("violated_ac", "repeat3plus", "--- Being violated in AC (listed 3+ times) ---"),
    ];
    for (outcome, cohort, title) in blocks {
        let tables: Vec<&EffectTableOut> = ["women", "men"]
            .iter()
            .filter_map(|g| report.effect_table(outcome, cohort, g))
            .collect();
        render_effect_block(&mut out, &tables, report.alpha, title);
    }

    let night_period = report.night.first().map_or(84, |n| n.period_days);
    writeln!(out, "--- Night usage (hourly 20:00-04:59 windows per day, {night_period}-day mean) ---").unwrap();
    writeln!(
        out,
        "{:<6} {:<13} {:>7} {:>7} {:>7} {:>7} {:>7} {:>8} {:>9}",
        "gender", "group", "2.5%", "25%", "50%", "75%", "97.5%", "mean", "p-value"
    )
    .unwrap();
    for nt in &report.night {
        for (ai, name) in ["intervention", "control"].iter().enumerate() {
            writeln!(
                out,
                "{:<6} {:<13} {:>7.3} {:>7.3} {:>7.3} {:>7.3} {:>7.3} {:>8.4} {:>9}",
                nt.gender,
                name,
                nt.quantiles[ai][0],
                nt.quantiles[ai][1],
                nt.quantiles[ai][2],
                nt.quantiles[ai][3],
                nt.quantiles[ai][4],
                nt.mean[ai],
                if ai == 0 { fmt_opt(nt.p, 4) } else { String::new() }
            )
            .unwrap();
        }
    }
    writeln!(out).unwrap();

    writeln!(out, "--- Risk-score calibration (outcomes within 14 days of scoring) ---").unwrap();
    for cal in &report.calibration {
        writeln!(
            out,
            "{} risk: n = {}, Spearman rank correlation = {}",
            cal.kind,
            cal.n,
            fmt_opt(cal.spearman, 4)
        )
        .unwrap();
        writeln!(out, "  {:>12} {:>12} {:>8} {:>12}", "score lo", "score hi", "n", "outcome rate").unwrap();
        for (lo, hi, n, rate) in &cal.bins {
            writeln!(out, "  {lo:>12.4} {hi:>12.4} {n:>8} {rate:>12.4}").unwrap();
        }
    }
    out
}
