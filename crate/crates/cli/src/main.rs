use clap::Parser;

use insight_cli::{run_pipeline, CliArgs, RunConfig};

fn main() {
    let args = CliArgs::parse();
    let config = match RunConfig::from_args(&args) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    };
    match run_pipeline(&config) {
        Ok(report) => {
            println!(
                "dataset: {} ({} cards, {} insights)",
                config
                    .dataset
                    .as_ref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_default(),
                report.cards.len(),
                report.insights.len()
            );
            println!(
                "stage counts: parsed {} -> relevant {} -> unique {} -> non-trivial {}",
                report.stage_counts.parsed,
                report.stage_counts.after_relevance,
                report.stage_counts.after_dedup,
                report.stage_counts.after_triviality
            );
            println!("avg normalized score: {:.4}", report.avg_normalized_score);
            let timings: Vec<String> = report
                .timings_ms
                .iter()
                .map(|(stage, ms)| format!("{stage} {ms}ms"))
                .collect();
            println!("timings: {}", timings.join(", "));
            for note in &report.diagnostics {
                eprintln!("note: {note}");
            }
            println!("report written to {}", config.out.join("report.json").display());
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
