use std::fmt::Write;

use super::experiment::ExperimentReport;
use crate::error::Result;
use crate::models::EvalReport;

/// `round_half_up(100 * num / den)`, exact on integer counts; 0 when `den == 0`.
pub fn percent(num: u64, den: u64) -> u64 {
    if den == 0 {
        0
    } else {
        (200 * num + den) / (2 * den)
    }
}

/// Integer percentages `(precision, recall)` per class, and accuracy.
pub fn percentages(r: &EvalReport) -> (Vec<(u64, u64)>, u64) {
    let n = r.n_classes();
    let per_class = (0..n)
        .map(|c| {
            let tp = r.confusion[c][c];
            let predicted: u64 = (0..n).map(|t| r.confusion[t][c]).sum();
            let support: u64 = r.confusion[c].iter().sum();
            (percent(tp, predicted), percent(tp, support))
        })
        .collect();
    let trace: u64 = (0..n).map(|c| r.confusion[c][c]).sum();
    (per_class, percent(trace, r.total()))
}

/// Text tables in the shape of a per-class P/R table with one column pair per
/// classifier and an accuracy row. Reports are grouped by axis value and
/// filter, in first-seen order.
pub fn render_report(reports: &[ExperimentReport]) -> String {
    let mut groups: Vec<Vec<&ExperimentReport>> = Vec::new();
    for r in reports {
        match groups
            .iter_mut()
            .find(|g| g[0].axis == r.axis && g[0].axis_value == r.axis_value && g[0].filter == r.filter)
        {
            Some(g) => g.push(r),
            None => groups.push(vec![r]),
        }
    }
    let mut out = String::new();
    for (gi, group) in groups.iter().enumerate() {
        if gi > 0 {
            out.push('\n');
        }
        let head = group[0];
        let _ = writeln!(out, "{} = {} (filter: {})", head.axis, head.axis_value, head.filter.as_str());
        let names = &head.report.label_names;
        let width = names.iter().map(String::len).chain(["Accuracy".len()]).max().unwrap_or(8);
        let _ = write!(out, "{:<width$}", "M");
        for r in group {
            let k = r.classifier.as_str().to_ascii_uppercase();
            let _ = write!(out, " | {:>6} {:>6}", format!("{k} P"), format!("{k} R"));
        }
        out.push('\n');
        let cells: Vec<_> = group.iter().map(|r| percentages(&r.report)).collect();
        for (c, name) in names.iter().enumerate() {
            let _ = write!(out, "{name:<width$}");
            for (per_class, _) in &cells {
                let (p, r) = per_class[c];
                let _ = write!(out, " | {:>6} {:>6}", format!("{p}%"), format!("{r}%"));
            }
            out.push('\n');
        }
        let _ = write!(out, "{:<width$}", "Accuracy");
        for (_, acc) in &cells {
            let _ = write!(out, " | {:>13}", format!("{acc}%"));
        }
        out.push('\n');
    }
    out
}

/// One JSON object per line, in report order.
pub fn reports_to_jsonl(reports: &[ExperimentReport]) -> Result<String> {
    let mut out = String::new();
    for r in reports {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}
