//! Metrics and reporting: binary precision/recall/F1, rank correlation for
//! the graded task, cross-language averages, and per-pattern error tables.
//!
//! Numbers are kept at full precision internally; rounding happens only in
//! the renderers (percentages to two decimals, correlations to three).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Language, Pattern};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("shape mismatch: {message}")]
    Shape { message: String },
    #[error("correlation undefined: {side} are constant")]
    UndefinedCorrelation { side: String },
    #[error("missing language {language} in per-language results")]
    MissingLanguage { language: Language },
    #[error("cannot mix binary and graded metrics in one report")]
    MixedMetrics,
    #[error("report has no per-language entries")]
    EmptyReport,
    #[error("unknown report format {name:?}; expected one of {valid}")]
    UnknownFormat { name: String, valid: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn shape(message: impl Into<String>) -> EvalError {
    EvalError::Shape {
        message: message.into(),
    }
}

/// Precision, recall and F1 for the positive class (label 1), together with
/// the confusion counts they were derived from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub true_negatives: usize,
    /// Set when no positive predictions existed; precision reported as 0.
    pub precision_denominator_zero: bool,
    /// Set when no positive golds existed; recall reported as 0.
    pub recall_denominator_zero: bool,
}

/// Harmonic mean of precision and recall, 0 when both are 0.
pub fn f1_from_precision_recall(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

pub fn binary_metrics(preds: &[u8], golds: &[u8]) -> Result<BinaryMetrics, EvalError> {
    if preds.len() != golds.len() {
        return Err(shape(format!(
            "{} predictions vs {} golds",
            preds.len(),
            golds.len()
        )));
    }
    if preds.is_empty() {
        return Err(shape("need at least one prediction"));
    }
    if let Some(bad) = preds.iter().chain(golds).find(|&&v| v > 1) {
        return Err(shape(format!("labels must be 0 or 1, got {bad}")));
    }

    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    let mut tn = 0usize;
    for (&p, &g) in preds.iter().zip(golds) {
        match (p, g) {
            (1, 1) => tp += 1,
            (1, 0) => fp += 1,
            (0, 1) => fn_ += 1,
            _ => tn += 1,
        }
    }

    let precision_denominator_zero = tp + fp == 0;
    let recall_denominator_zero = tp + fn_ == 0;
    let precision = if precision_denominator_zero {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if recall_denominator_zero {
        0.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    Ok(BinaryMetrics {
        precision,
        recall,
        f1: f1_from_precision_recall(precision, recall),
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
        true_negatives: tn,
        precision_denominator_zero,
        recall_denominator_zero,
    })
}

pub const TIE_POLICY: &str = "average-ranks";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoResult {
    pub rho: f64,
    pub n: usize,
    pub tie_policy: String,
}

/// Ranks starting at 1; runs of equal values share the mean of their ranks.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .expect("finite values")
            .then(a.cmp(&b))
    });
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && values[order[end + 1]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end) as f64 / 2.0 + 1.0;
        for &index in &order[start..=end] {
            ranks[index] = rank;
        }
        start = end + 1;
    }
    ranks
}

/// Spearman's rank correlation: Pearson correlation of the average-rank
/// vectors, which reduces to the classic `1 - 6 Σd² / n(n²-1)` formula when
/// there are no ties.
pub fn spearman_rho(preds: &[f64], golds: &[f64]) -> Result<RhoResult, EvalError> {
    if preds.len() != golds.len() {
        return Err(shape(format!(
            "{} predictions vs {} golds",
            preds.len(),
            golds.len()
        )));
    }
    if preds.len() < 2 {
        return Err(shape("need at least two points for a correlation"));
    }
    if preds.iter().chain(golds).any(|v| !v.is_finite()) {
        return Err(shape("scores must be finite"));
    }
    for (values, side) in [(preds, "predictions"), (golds, "gold scores")] {
        if values.iter().all(|v| *v == values[0]) {
            return Err(EvalError::UndefinedCorrelation { side: side.into() });
        }
    }

    let rx = average_ranks(preds);
    let ry = average_ranks(golds);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut covariance = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (x, y) in rx.iter().zip(&ry) {
        covariance += (x - mx) * (y - my);
        var_x += (x - mx) * (x - mx);
        var_y += (y - my) * (y - my);
    }
    let rho = (covariance / (var_x * var_y).sqrt()).clamp(-1.0, 1.0);
    Ok(RhoResult {
        rho,
        n: preds.len(),
        tie_policy: TIE_POLICY.into(),
    })
}

/// Arithmetic mean over exactly the three task languages.
pub fn global_score(per_language: &BTreeMap<Language, f64>) -> Result<f64, EvalError> {
    for language in Language::ALL {
        if !per_language.contains_key(&language) {
            return Err(EvalError::MissingLanguage { language });
        }
    }
    Ok(per_language.values().sum::<f64>() / per_language.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "lowercase")]
pub enum LanguageMetric {
    Binary(BinaryMetrics),
    Graded(RhoResult),
}

impl LanguageMetric {
    /// The headline number: F1 for the binary task, rho for the graded one.
    pub fn primary(&self) -> f64 {
        match self {
            LanguageMetric::Binary(m) => m.f1,
            LanguageMetric::Graded(r) => r.rho,
        }
    }

    fn is_binary(&self) -> bool {
        matches!(self, LanguageMetric::Binary(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_language: BTreeMap<Language, LanguageMetric>,
    /// Mean of the primary metric; present only when all three task
    /// languages were evaluated.
    pub global: Option<f64>,
}

impl MetricsReport {
    pub fn new(per_language: BTreeMap<Language, LanguageMetric>) -> Result<MetricsReport, EvalError> {
        if per_language.is_empty() {
            return Err(EvalError::EmptyReport);
        }
        let binary = per_language.values().next().unwrap().is_binary();
        if per_language.values().any(|m| m.is_binary() != binary) {
            return Err(EvalError::MixedMetrics);
        }
        let primaries: BTreeMap<Language, f64> = per_language
            .iter()
            .map(|(l, m)| (*l, m.primary()))
            .collect();
        let global = global_score(&primaries).ok();
        Ok(MetricsReport {
            per_language,
            global,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternErrorRow {
    pub pattern: String,
    pub model: String,
    pub wrong: usize,
    pub total: usize,
    pub seen_in_training: bool,
}

impl PatternErrorRow {
    pub fn percentage(&self) -> f64 {
        100.0 * self.wrong as f64 / self.total as f64
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PatternErrorReport {
    pub rows: Vec<PatternErrorRow>,
}

impl PatternErrorReport {
    /// Combine per-model reports into one table for grouped comparisons.
    pub fn merge(mut self, other: PatternErrorReport) -> PatternErrorReport {
        self.rows.extend(other.rows);
        self.rows
            .sort_by(|a, b| a.pattern.cmp(&b.pattern).then(a.model.cmp(&b.model)));
        self
    }
}

/// Error rate per sentence pattern: 100 x wrong / occurrences, with a flag
/// marking patterns that appeared in the training data.
pub fn per_pattern_errors(
    model: &str,
    preds: &[u8],
    golds: &[u8],
    patterns: &[Pattern],
    training_patterns: &BTreeSet<Pattern>,
) -> Result<PatternErrorReport, EvalError> {
    if preds.len() != golds.len() || preds.len() != patterns.len() {
        return Err(shape(format!(
            "{} predictions, {} golds, {} patterns",
            preds.len(),
            golds.len(),
            patterns.len()
        )));
    }
    let mut counts: BTreeMap<&Pattern, (usize, usize)> = BTreeMap::new();
    for ((&p, &g), pattern) in preds.iter().zip(golds).zip(patterns) {
        let entry = counts.entry(pattern).or_insert((0, 0));
        entry.1 += 1;
        if p != g {
            entry.0 += 1;
        }
    }
    let rows = counts
        .into_iter()
        .map(|(pattern, (wrong, total))| PatternErrorRow {
            pattern: pattern.template.clone(),
            model: model.to_string(),
            wrong,
            total,
            seen_in_training: training_patterns.contains(pattern),
        })
        .collect();
    Ok(PatternErrorReport { rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Tsv,
    Markdown,
    PlotData,
}

impl ReportFormat {
    pub const ALL: [ReportFormat; 3] = [
        ReportFormat::Tsv,
        ReportFormat::Markdown,
        ReportFormat::PlotData,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ReportFormat::Tsv => "tsv",
            ReportFormat::Markdown => "markdown",
            ReportFormat::PlotData => "plot-data",
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ReportFormat {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<ReportFormat, EvalError> {
        ReportFormat::ALL
            .into_iter()
            .find(|f| f.id() == s)
            .ok_or_else(|| EvalError::UnknownFormat {
                name: s.to_string(),
                valid: ReportFormat::ALL.map(|f| f.id()).join(", "),
            })
    }
}

fn fmt_pct(fraction: f64) -> String {
    format!("{:.2}", fraction * 100.0)
}

fn fmt_rho(rho: f64) -> String {
    format!("{rho:.3}")
}

pub fn render_metrics(report: &MetricsReport, format: ReportFormat) -> String {
    let binary = report
        .per_language
        .values()
        .next()
        .map_or(true, LanguageMetric::is_binary);
    let header: &[&str] = if binary {
        &["language", "recall", "precision", "f1"]
    } else {
        &["language", "rho", "n"]
    };

    let mut rows: Vec<Vec<String>> = Vec::new();
    for (language, metric) in &report.per_language {
        match metric {
            LanguageMetric::Binary(m) => rows.push(vec![
                language.code().to_string(),
                fmt_pct(m.recall),
                fmt_pct(m.precision),
                fmt_pct(m.f1),
            ]),
            LanguageMetric::Graded(r) => rows.push(vec![
                language.code().to_string(),
                fmt_rho(r.rho),
                r.n.to_string(),
            ]),
        }
    }
    if report.global.is_some() {
        let count = report.per_language.len() as f64;
        if binary {
            let mean = |pick: fn(&BinaryMetrics) -> f64| {
                report
                    .per_language
                    .values()
                    .map(|m| match m {
                        LanguageMetric::Binary(b) => pick(b),
                        LanguageMetric::Graded(_) => unreachable!(),
                    })
                    .sum::<f64>()
                    / count
            };
            rows.push(vec![
                "average".into(),
                fmt_pct(mean(|m| m.recall)),
                fmt_pct(mean(|m| m.precision)),
                fmt_pct(mean(|m| m.f1)),
            ]);
        } else {
            let total_n: usize = report
                .per_language
                .values()
                .map(|m| match m {
                    LanguageMetric::Graded(r) => r.n,
                    LanguageMetric::Binary(_) => unreachable!(),
                })
                .sum();
            rows.push(vec![
                "average".into(),
                fmt_rho(report.global.unwrap()),
                total_n.to_string(),
            ]);
        }
    }

    match format {
        ReportFormat::Tsv => tsv_table(header, &rows),
        ReportFormat::Markdown => markdown_table(header, &rows),
        ReportFormat::PlotData => {
            // long format, per-language rows only
            let mut out = String::from("language\tmetric\tvalue\n");
            for (language, metric) in &report.per_language {
                match metric {
                    LanguageMetric::Binary(m) => {
                        for (name, value) in [
                            ("recall", m.recall),
                            ("precision", m.precision),
                            ("f1", m.f1),
                        ] {
                            out.push_str(&format!(
                                "{}\t{}\t{}\n",
                                language.code(),
                                name,
                                fmt_pct(value)
                            ));
                        }
                    }
                    LanguageMetric::Graded(r) => {
                        out.push_str(&format!(
                            "{}\trho\t{}\n",
                            language.code(),
                            fmt_rho(r.rho)
                        ));
                    }
                }
            }
            out
        }
    }
}

pub fn render_pattern_errors(report: &PatternErrorReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Tsv | ReportFormat::PlotData => {
            let mut out = String::from("pattern\tmodel\tpct\tseen\n");
            for row in &report.rows {
                out.push_str(&format!(
                    "{}\t{}\t{:.2}\t{}\n",
                    row.pattern,
                    row.model,
                    row.percentage(),
                    u8::from(row.seen_in_training)
                ));
            }
            out
        }
        ReportFormat::Markdown => {
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|row| {
                    vec![
                        row.pattern.clone(),
                        row.model.clone(),
                        format!("{:.2}", row.percentage()),
                        if row.seen_in_training { "yes" } else { "no" }.into(),
                    ]
                })
                .collect();
            markdown_table(&["pattern", "model", "error %", "seen in training"], &rows)
        }
    }
}

fn tsv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join("\t");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    out
}

fn markdown_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = format!("| {} |\n", header.join(" | "));
    out.push_str(&format!("|{}\n", " --- |".repeat(header.len())));
    for row in rows {
        out.push_str(&format!("| {} |\n", row.join(" | ")));
    }
    out
}

pub fn emit_metrics(
    report: &MetricsReport,
    format: ReportFormat,
    path: &Path,
) -> Result<(), EvalError> {
    fs::write(path, render_metrics(report, format))?;
    Ok(())
}

pub fn emit_pattern_errors(
    report: &PatternErrorReport,
    format: ReportFormat,
    path: &Path,
) -> Result<(), EvalError> {
    fs::write(path, render_pattern_errors(report, format))?;
    Ok(())
}
