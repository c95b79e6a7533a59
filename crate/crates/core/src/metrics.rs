//! Tie-aware Spearman rank correlation and result tables.
//!
//! Spearman is computed as the Pearson correlation of fractional (average)
//! ranks, so tied values are handled correctly; the no-ties closed form is
//! deliberately not used.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::corpus::{LanguageCode, Split};

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalResult {
    pub model: String,
    pub lang: LanguageCode,
    pub split: Split,
    pub spearman: f64,
    pub n: usize,
}

#[derive(Debug, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("sequences have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least 2 items, found {n}")]
    TooShort { n: usize },
    #[error("correlation undefined: an input sequence is constant")]
    Undefined,
}

/// Fractional ranks in 1..=n; tied values share the mean of the ranks they
/// span, so the ranks always sum to n(n+1)/2.
pub fn average_ranks(values: &[f64]) -> Result<Vec<f64>, MetricsError> {
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(MetricsError::NonFinite { index });
    }
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    // finite values form a total order
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = alloc::vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j are tied; ranks are 1-based
        let mean_rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = mean_rank;
        }
        i = j + 1;
    }
    Ok(ranks)
}

/// Spearman rank correlation: Pearson correlation of the average ranks.
pub fn spearman(pred: &[f64], gold: &[f64]) -> Result<f64, MetricsError> {
    if pred.len() != gold.len() {
        return Err(MetricsError::LengthMismatch {
            left: pred.len(),
            right: gold.len(),
        });
    }
    if pred.len() < 2 {
        return Err(MetricsError::TooShort { n: pred.len() });
    }
    let rp = average_ranks(pred)?;
    let rg = average_ranks(gold)?;
    pearson(&rp, &rg)
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64, MetricsError> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MetricsError::Undefined);
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Four-decimal cell in the tables' style: `.8125`, `-.0817`, `1.0000`.
fn fmt4(value: f64) -> String {
    let s = format!("{value:.4}");
    if let Some(rest) = s.strip_prefix("0.") {
        format!(".{rest}")
    } else if let Some(rest) = s.strip_prefix("-0.") {
        format!("-.{rest}")
    } else {
        s
    }
}

/// Plain-text result table: one row per model (first-appearance order), one
/// column per language (sorted) plus `avg`. Cells above the baseline carry a
/// `*` marker; a `baseline` row is included when baseline values exist for
/// the listed languages.
pub fn report_table(
    results: &[EvalResult],
    baseline: &BTreeMap<LanguageCode, f64>,
) -> String {
    let mut models: Vec<String> = Vec::new();
    for r in results {
        if !models.contains(&r.model) {
            models.push(r.model.clone());
        }
    }
    report_table_rows(&models, results, baseline)
}

/// Like `report_table`, but with an explicit row list: every named model
/// gets a row even if all of its cells are missing. Sweeps use this so a
/// degenerate run still occupies its row.
pub fn report_table_rows(
    models: &[String],
    results: &[EvalResult],
    baseline: &BTreeMap<LanguageCode, f64>,
) -> String {
    let mut langs: Vec<LanguageCode> = Vec::new();
    let mut cells: BTreeMap<(String, LanguageCode), f64> = BTreeMap::new();
    for r in results {
        if !langs.contains(&r.lang) {
            langs.push(r.lang.clone());
        }
        cells.insert((r.model.clone(), r.lang.clone()), r.spearman);
    }
    langs.sort();

    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut header = alloc::vec!["model".to_string()];
    header.extend(langs.iter().map(|l| l.as_str().to_string()));
    header.push("avg".to_string());
    rows.push(header);

    let baseline_cells: Vec<Option<f64>> =
        langs.iter().map(|l| baseline.get(l).copied()).collect();
    if baseline_cells.iter().any(|c| c.is_some()) {
        let mut row = alloc::vec!["baseline".to_string()];
        let present: Vec<f64> = baseline_cells.iter().flatten().copied().collect();
        for cell in &baseline_cells {
            row.push(cell.map(fmt4).unwrap_or_else(|| "-".to_string()));
        }
        row.push(fmt4(present.iter().sum::<f64>() / present.len() as f64));
        rows.push(row);
    }

    for model in models {
        let mut row = alloc::vec![model.clone()];
        let mut present = Vec::new();
        for l in &langs {
            match cells.get(&(model.clone(), l.clone())) {
                Some(&v) => {
                    present.push(v);
                    let marker = match baseline.get(l) {
                        Some(&b) if v > b => "*",
                        _ => "",
                    };
                    row.push(format!("{}{}", fmt4(v), marker));
                }
                None => row.push("-".to_string()),
            }
        }
        if present.is_empty() {
            row.push("-".to_string());
        } else {
            row.push(fmt4(present.iter().sum::<f64>() / present.len() as f64));
        }
        rows.push(row);
    }

    render_aligned(&rows)
}

fn render_aligned(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    let mut widths = alloc::vec![0usize; cols];
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            out.push_str(cell);
            if i + 1 < row.len() {
                for _ in cell.len()..widths[i] {
                    out.push(' ');
                }
            }
        }
        out.push('\n');
    }
    out
}

/// CSV flavour of the report: `lang,model,score,baseline,beats_baseline`,
/// one row per result in input order.
pub fn report_csv(results: &[EvalResult], baseline: &BTreeMap<LanguageCode, f64>) -> String {
    let mut out = String::from("lang,model,score,baseline,beats_baseline\n");
    for r in results {
        let (base, beats) = match baseline.get(&r.lang) {
            Some(&b) => (format!("{b:.4}"), (r.spearman > b).to_string()),
            None => (String::new(), String::new()),
        };
        out.push_str(&format!(
            "{},{},{:.4},{},{}\n",
            r.lang, r.model, r.spearman, base, beats
        ));
    }
    out
}
