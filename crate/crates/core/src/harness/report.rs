//! Report emission: heatmap/scatter/ROC CSVs, an aggregate JSON, and
//! optional SVG renderings. The CSVs are the contract; SVGs are a thin
//! viewing layer.

use super::{top_combinations, EvaluationReport};
use crate::error::{CoreError, Result};
use std::fmt::Write as _;
use std::path::Path;

fn write_heatmap(
    report: &EvaluationReport,
    value: impl Fn(&super::AggregateRow) -> f64,
    path: &Path,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["selector".to_string()];
    header.extend(report.classifiers.iter().cloned());
    w.write_record(&header)?;
    for s in &report.selectors {
        let mut row = vec![s.clone()];
        for c in &report.classifiers {
            let cell = report
                .aggregate_for(s, c)
                .map(&value)
                .map(|v| format!("{v}"))
                .unwrap_or_default(); // failed cells stay blank
            row.push(cell);
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| CoreError::io(path.display().to_string(), e))?;
    Ok(())
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

/// Write every report artifact into `out_dir`.
pub fn emit_report(report: &EvaluationReport, out_dir: &Path, svg: bool) -> Result<()> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CoreError::io(out_dir.display().to_string(), e))?;

    write_heatmap(report, |a| a.auc.mean, &out_dir.join("heatmap_auc.csv"))?;
    write_heatmap(report, |a| a.auc.sd, &out_dir.join("heatmap_auc_sd.csv"))?;
    write_heatmap(report, |a| a.testing_error.mean, &out_dir.join("heatmap_err.csv"))?;
    write_heatmap(report, |a| a.testing_error.sd, &out_dir.join("heatmap_err_sd.csv"))?;

    // Scatter: one row per cell.
    {
        let path = out_dir.join("scatter.csv");
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["selector", "classifier", "auc_mean", "auc_sd", "err_mean", "err_sd"])?;
        for a in &report.aggregates {
            w.write_record([
                a.selector.clone(),
                a.classifier.clone(),
                format!("{}", a.auc.mean),
                format!("{}", a.auc.sd),
                format!("{}", a.testing_error.mean),
                format!("{}", a.testing_error.sd),
            ])?;
        }
        w.flush().map_err(|e| CoreError::io(path.display().to_string(), e))?;
    }

    // ROC points per model, all repeats.
    for a in &report.aggregates {
        let path = out_dir.join(format!(
            "roc_{}_{}.csv",
            sanitize(&a.selector),
            sanitize(&a.classifier)
        ));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["repeat", "fpr", "tpr"])?;
        for row in report
            .per_repeat
            .iter()
            .filter(|r| r.selector == a.selector && r.classifier == a.classifier)
        {
            for (fpr, tpr) in &row.metrics.roc {
                w.write_record([
                    format!("{}", row.repeat),
                    format!("{fpr}"),
                    format!("{tpr}"),
                ])?;
            }
        }
        w.flush().map_err(|e| CoreError::io(path.display().to_string(), e))?;
    }

    // Aggregate JSON, including the top-combination selection.
    {
        #[derive(serde::Serialize)]
        struct JsonReport<'a> {
            #[serde(flatten)]
            report: &'a EvaluationReport,
            top_combinations: Vec<(String, String)>,
        }
        let path = out_dir.join("report.json");
        let json = serde_json::to_string_pretty(&JsonReport {
            report,
            top_combinations: top_combinations(report),
        })?;
        std::fs::write(&path, json).map_err(|e| CoreError::io(path.display().to_string(), e))?;
    }

    if svg {
        emit_svgs(report, out_dir)?;
    }
    Ok(())
}

fn heat_color(v: f64, lo: f64, hi: f64) -> String {
    let t = if hi > lo { ((v - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.5 };
    let r = (255.0 * t) as u8;
    let b = (255.0 * (1.0 - t)) as u8;
    format!("rgb({r},64,{b})")
}

fn emit_svgs(report: &EvaluationReport, out_dir: &Path) -> Result<()> {
    let cell = 64.0;
    let label = 90.0;
    for (file, accessor) in [
        ("heatmap_auc.svg", (|a: &super::AggregateRow| a.auc.mean) as fn(&super::AggregateRow) -> f64),
        ("heatmap_err.svg", |a: &super::AggregateRow| a.testing_error.mean),
    ] {
        let values: Vec<f64> = report.aggregates.iter().map(accessor).collect();
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let width = label + cell * report.classifiers.len() as f64;
        let height = label + cell * report.selectors.len() as f64;
        let mut svg = String::new();
        let _ = write!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" font-family=\"sans-serif\" font-size=\"11\">"
        );
        for (ci, c) in report.classifiers.iter().enumerate() {
            let x = label + cell * ci as f64 + cell / 2.0;
            let _ = write!(
                svg,
                "<text x=\"{x}\" y=\"{}\" text-anchor=\"middle\">{c}</text>",
                label - 8.0
            );
        }
        for (si, s) in report.selectors.iter().enumerate() {
            let y = label + cell * si as f64 + cell / 2.0;
            let _ = write!(
                svg,
                "<text x=\"{}\" y=\"{y}\" text-anchor=\"end\">{s}</text>",
                label - 6.0
            );
            for (ci, c) in report.classifiers.iter().enumerate() {
                if let Some(a) = report.aggregate_for(s, c) {
                    let v = accessor(a);
                    let x = label + cell * ci as f64;
                    let y = label + cell * si as f64;
                    let color = heat_color(v, lo, hi);
                    let _ = write!(
                        svg,
                        "<rect x=\"{x}\" y=\"{y}\" width=\"{cell}\" height=\"{cell}\" fill=\"{color}\"/>\
                         <text x=\"{tx}\" y=\"{ty}\" text-anchor=\"middle\" fill=\"white\">{v:.3}</text>",
                        tx = x + cell / 2.0,
                        ty = y + cell / 2.0 + 4.0,
                    );
                }
            }
        }
        svg.push_str("</svg>");
        let path = out_dir.join(file);
        std::fs::write(&path, svg).map_err(|e| CoreError::io(path.display().to_string(), e))?;
    }

    // AUC vs error scatter with the top combinations highlighted.
    {
        let top = top_combinations(report);
        let (w, h, pad) = (480.0, 360.0, 48.0);
        let aucs: Vec<f64> = report.aggregates.iter().map(|a| a.auc.mean).collect();
        let errs: Vec<f64> = report.aggregates.iter().map(|a| a.testing_error.mean).collect();
        let (alo, ahi) = (
            aucs.iter().copied().fold(f64::INFINITY, f64::min),
            aucs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        );
        let (elo, ehi) = (
            errs.iter().copied().fold(f64::INFINITY, f64::min),
            errs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        );
        let sx = |v: f64| pad + (v - alo) / (ahi - alo).max(1e-12) * (w - 2.0 * pad);
        let sy = |v: f64| h - pad - (v - elo) / (ehi - elo).max(1e-12) * (h - 2.0 * pad);
        let mut svg = String::new();
        let _ = write!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"10\">\
             <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">mean AUC</text>\
             <text x=\"14\" y=\"{}\" transform=\"rotate(-90 14 {})\" text-anchor=\"middle\">mean testing error</text>",
            w / 2.0,
            h - 10.0,
            h / 2.0,
            h / 2.0,
        );
        for a in &report.aggregates {
            let key = (a.selector.clone(), a.classifier.clone());
            let highlighted = top.contains(&key);
            let color = if highlighted { "red" } else { "steelblue" };
            let x = sx(a.auc.mean);
            let y = sy(a.testing_error.mean);
            let _ = write!(svg, "<circle cx=\"{x}\" cy=\"{y}\" r=\"4\" fill=\"{color}\"/>");
            if highlighted {
                let _ = write!(
                    svg,
                    "<text x=\"{}\" y=\"{}\">{}+{}</text>",
                    x + 6.0,
                    y - 4.0,
                    a.selector,
                    a.classifier
                );
            }
        }
        svg.push_str("</svg>");
        let path = out_dir.join("scatter.svg");
        std::fs::write(&path, svg).map_err(|e| CoreError::io(path.display().to_string(), e))?;
    }

    // ROC curves for the top combinations (or all cells if none qualify).
    {
        let top = top_combinations(report);
        let keys: Vec<(String, String)> = if top.is_empty() {
            report
                .aggregates
                .iter()
                .map(|a| (a.selector.clone(), a.classifier.clone()))
                .collect()
        } else {
            top
        };
        let (w, h, pad) = (420.0, 420.0, 40.0);
        let mut svg = String::new();
        let _ = write!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"10\">\
             <line x1=\"{pad}\" y1=\"{}\" x2=\"{}\" y2=\"{pad}\" stroke=\"#bbb\" stroke-dasharray=\"4\"/>",
            h - pad,
            w - pad,
        );
        let palette = ["crimson", "steelblue", "seagreen", "darkorange", "purple"];
        for (ki, key) in keys.iter().enumerate() {
            let color = palette[ki % palette.len()];
            for row in report
                .per_repeat
                .iter()
                .filter(|r| r.selector == key.0 && r.classifier == key.1)
            {
                let mut d = String::new();
                for (i, (fpr, tpr)) in row.metrics.roc.iter().enumerate() {
                    let x = pad + fpr * (w - 2.0 * pad);
                    let y = h - pad - tpr * (h - 2.0 * pad);
                    let _ = write!(d, "{}{x},{y} ", if i == 0 { "M" } else { "L" });
                }
                let _ = write!(
                    svg,
                    "<path d=\"{d}\" fill=\"none\" stroke=\"{color}\" stroke-opacity=\"0.45\"/>"
                );
            }
            let _ = write!(
                svg,
                "<text x=\"{}\" y=\"{}\" fill=\"{color}\">{}+{}</text>",
                pad + 6.0,
                pad + 14.0 * (ki + 1) as f64,
                key.0,
                key.1
            );
        }
        svg.push_str("</svg>");
        let path = out_dir.join("roc.svg");
        std::fs::write(&path, svg).map_err(|e| CoreError::io(path.display().to_string(), e))?;
    }
    Ok(())
}
