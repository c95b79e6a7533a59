//! `semrel sweep`: one training run per axis value, shared seed, one table.
//!
//! `--axis batch_size` trains at effective batch sizes {2, 4, 8, 16, 64,
//! 128, 256} (micro-batch = value, no accumulation); `--axis pooling`
//! trains with cls, mean, and max pooling. Every run shares the configured
//! seed so the axis effect is not confounded by init noise. Rows appear in
//! axis order; a cell is `-` when that run's Spearman is undefined for the
//! language (constant predictions).

use anyhow::Result;

use semrel_core::biencoder;
use semrel_core::encoder::PoolingMode;
use semrel_core::metrics::{self, EvalResult};

use crate::commands::prepare_biencoder_data;
use crate::config::RunConfig;
use crate::store;

pub const BATCH_AXIS: [usize; 7] = [2, 4, 8, 16, 64, 128, 256];
pub const POOLING_AXIS: [(PoolingMode, &str); 3] = [
    (PoolingMode::Cls, "CLS"),
    (PoolingMode::Mean, "Mean"),
    (PoolingMode::Max, "Max"),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepAxis {
    #[value(name = "batch_size")]
    BatchSize,
    Pooling,
}

pub fn run(config: &RunConfig, axis: SweepAxis) -> Result<()> {
    let data = prepare_biencoder_data(config)?;
    let base = config.train_config();

    let runs: Vec<(String, biencoder::TrainConfig)> = match axis {
        SweepAxis::BatchSize => BATCH_AXIS
            .iter()
            .map(|&batch| {
                (
                    batch.to_string(),
                    biencoder::TrainConfig {
                        batch_size: batch,
                        grad_accum_steps: 1,
                        ..base.clone()
                    },
                )
            })
            .collect(),
        SweepAxis::Pooling => POOLING_AXIS
            .iter()
            .map(|&(pooling, label)| {
                (
                    label.to_string(),
                    biencoder::TrainConfig {
                        pooling,
                        ..base.clone()
                    },
                )
            })
            .collect(),
    };

    let mut results: Vec<EvalResult> = Vec::new();
    let mut rows: Vec<String> = Vec::new();
    for (label, cfg) in &runs {
        eprintln!("sweep row {label}");
        rows.push(label.clone());
        let output = biencoder::train(&data.train, &data.dev, &config.encoder, cfg)?;
        for (lang, dev) in &data.dev_by_lang {
            let predictions = output.best.predict(dev);
            let gold = dev.gold_scores().expect("dev data is scored");
            match metrics::spearman(&predictions.scores, &gold) {
                Ok(spearman) => results.push(EvalResult {
                    model: label.clone(),
                    lang: semrel_core::corpus::LanguageCode::new(lang)?,
                    split: semrel_core::corpus::Split::Dev,
                    spearman,
                    n: dev.len(),
                }),
                Err(_) => eprintln!("row {label}, language {lang}: spearman undefined"),
            }
        }
    }

    let baseline = config.baselines()?;
    let table = metrics::report_table_rows(&rows, &results, &baseline);
    let csv = metrics::report_csv(&results, &baseline);
    let name = match axis {
        SweepAxis::BatchSize => "batch_size",
        SweepAxis::Pooling => "pooling",
    };
    store::write_file(&config.out(&format!("sweep_{name}.txt")), &table)?;
    store::write_file(&config.out(&format!("sweep_{name}.csv")), csv)?;
    print!("{table}");
    Ok(())
}
