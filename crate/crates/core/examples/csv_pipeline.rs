//! End to end on a CSV file: load and standardize, run two chains, write
//! the output directory and summarize the chain file.
//!
//! cargo run --release --example csv_pipeline -- [data.csv sensitive_column [out_dir]]
//!
//! Without arguments it uses the bundled 1996 election survey extract with
//! the vote column as the sensitive attribute.

use std::path::PathBuf;

use fbc::experiment::{cmd_run, cmd_summarize, RunConfig, CHAIN_FILE};
use fbc::io::DatasetSpec;

fn main() -> fbc::error::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (path, sensitive) = match args.as_slice() {
        [p, s, ..] => (PathBuf::from(p), s.clone()),
        _ => (
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/anes96.csv"),
            "vote".to_string(),
        ),
    };
    let out = args.get(2).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("fbc-csv-pipeline"));

    let mut cfg = RunConfig::new(&out, DatasetSpec::csv(&path, &sensitive, &[]));
    cfg.chains = 2;
    cfg.sampler.max_iter = 1500;
    cfg.sampler.burn_in = 1000;
    let run = cmd_run(&cfg)?;
    for row in &run.summary {
        println!("{} K={} cost={:.4} gap={:.4} balance={:.4}", row.method, row.k, row.cost, row.delta, row.bal);
    }

    let summary = cmd_summarize(&[out.join(CHAIN_FILE)], &out.join("summary"), 30, 0)?;
    println!("K histogram over both chains: {:?}", summary.summary.k_histogram);
    let rho: Vec<String> = summary.summary.autocorrelation.iter().skip(1).take(5).map(|r| format!("{r:.3}")).collect();
    println!("lag-1..5 autocorrelation of K: {}", rho.join(" "));
    for (method, stat, r) in &summary.rhat {
        println!("{method} R-hat of {stat}: {r:.3}");
    }
    println!("outputs in {}", out.display());
    Ok(())
}
