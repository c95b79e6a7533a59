//! `semrel report`: render stored evaluation results against the baseline.

use std::path::Path;

use anyhow::{Context, Result};

use semrel_core::metrics::{self, EvalResult};

use crate::config::RunConfig;

pub fn run(config: &RunConfig, results_path: Option<&Path>, csv: bool) -> Result<()> {
    let default_path = config.out("results.jsonl");
    let path = results_path.unwrap_or(&default_path);
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut results: Vec<EvalResult> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        results.push(
            serde_json::from_str(line)
                .with_context(|| format!("bad result record on line {}", i + 1))?,
        );
    }
    let baseline = config.baselines()?;
    if csv {
        print!("{}", metrics::report_csv(&results, &baseline));
    } else {
        print!("{}", metrics::report_table(&results, &baseline));
    }
    Ok(())
}
