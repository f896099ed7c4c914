//! Reproducible experiment runs: `run`, `summarize` and `sweep`.

mod config;

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::Serialize;

use crate::error::{FbcError, Result};
use crate::io::{load_chain, load_dataset, serialize_chain, ChainHeader, ChainRecord, LoadedData};
use crate::metrics::{mode_k, potential_scale_reduction, test_nll, ChainSummary, SampleMetrics};
use crate::priors::{BetaBernoulli, ConjugateFamily, NormalGamma};
use crate::sampler::{chain_rng, Chain, ChainSample, Sampler};

pub use config::{FamilyChoice, ReportRule, RunConfig, CONFIG_VERSION};

pub const CHAIN_FILE: &str = "chains.jsonl";
pub const RESOLVED_CONFIG: &str = "config.resolved.toml";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const NLL_TRACE_FILE: &str = "nll_trace.csv";
pub const TEST_NLL_FILE: &str = "test_nll.csv";

/// One row of `summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub cost: f64,
    pub delta: f64,
    pub bal: f64,
}

/// In-memory result of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub chains: Vec<Chain>,
    pub summary: Vec<SummaryRow>,
    pub method: String,
    /// Held-out negative log-likelihood for every retained sample of every
    /// chain, when the dataset holds out test rows.
    pub test_nll: Option<Vec<Vec<f64>>>,
}

fn method_name(fairness: bool) -> &'static str {
    if fairness {
        "FBC"
    } else {
        "MFM"
    }
}

fn sample_metrics(s: &ChainSample) -> SampleMetrics {
    SampleMetrics {
        iteration: s.iteration,
        k: s.k,
        cost: s.cost,
        delta: s.delta,
        bal: s.bal,
        nll: s.nll,
    }
}

/// Picks the reported sample of a chain according to `rule`.
pub fn pick_sample<'a, R: Rng + ?Sized>(samples: &'a [ChainSample], rule: ReportRule, rng: &mut R) -> Option<&'a ChainSample> {
    let pool: Vec<&ChainSample> = match rule {
        ReportRule::Random => samples.iter().collect(),
        ReportRule::ModeK => {
            let k = mode_k(samples.iter().map(|s| s.k))?;
            samples.iter().filter(|s| s.k == k).collect()
        }
    };
    if pool.is_empty() {
        return None;
    }
    Some(pool[rng.random_range(0..pool.len())])
}

fn run_with<F: ConjugateFamily>(cfg: &RunConfig, data: &LoadedData, family: F) -> Result<RunOutput> {
    let sampler = Sampler::new(&data.train, family, cfg.prior, cfg.sampler.clone())?;
    let results: Vec<Result<Chain>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..cfg.chains)
            .map(|c| {
                let s = &sampler;
                scope.spawn(move || s.run_chain(c as u64))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(FbcError::invalid("chain thread panicked"))))
            .collect()
    });
    let chains = results.into_iter().collect::<Result<Vec<_>>>()?;

    let method = method_name(cfg.sampler.fairness).to_string();
    // a stream no chain uses
    let mut pick_rng = chain_rng(cfg.sampler.seed, u64::MAX);
    let summary = chains
        .iter()
        .filter_map(|c| pick_sample(&c.samples, cfg.report, &mut pick_rng))
        .map(|s| SummaryRow {
            method: method.clone(),
            k: s.k,
            cost: s.cost,
            delta: s.delta,
            bal: s.bal,
        })
        .collect();

    let test_nll = match &data.test {
        Some(test) if test.len() >= 2 => {
            let mut all = Vec::with_capacity(chains.len());
            for c in &chains {
                let mut per = Vec::with_capacity(c.samples.len());
                for s in &c.samples {
                    let a = s.assignment.as_ref().expect("fresh samples carry assignments");
                    per.push(test_nll(sampler.family(), &data.train, a, &test[0], &test[1])?.nll);
                }
                all.push(per);
            }
            Some(all)
        }
        _ => None,
    };
    Ok(RunOutput {
        chains,
        summary,
        method,
        test_nll,
    })
}

/// Loads the data and runs every chain of `cfg` without writing anything.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let data = load_dataset(&cfg.dataset)?;
    let kind = data.train.kind();
    let d = data.train.dim();
    match cfg.family.resolve(kind) {
        FamilyChoice::BetaBernoulli => run_with(cfg, &data, BetaBernoulli::new(d, cfg.prior.alpha)?),
        _ => run_with(cfg, &data, NormalGamma::new(d, cfg.prior.a, cfg.prior.b)?),
    }
}

fn write_csv<S: Serialize>(path: &Path, rows: &[S], header: &[&str]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs `cfg` and writes the chain file, the resolved config, the summary
/// and the training NLL trace into `cfg.output`. Nothing is written when
/// loading or validation fails.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunOutput> {
    let out = run(cfg)?;
    fs::create_dir_all(&cfg.output)?;
    fs::write(cfg.output.join(RESOLVED_CONFIG), cfg.to_toml()?)?;
    let chain_path = cfg.output.join(CHAIN_FILE);
    for (c, chain) in out.chains.iter().enumerate() {
        let header = ChainHeader::new(c as u64, cfg.sampler.seed, &out.method);
        serialize_chain(&chain_path, &header, &chain.samples, c > 0)?;
    }
    write_csv(&cfg.output.join(SUMMARY_FILE), &out.summary, &["method", "K", "cost", "delta", "bal"])?;
    let trace: Vec<(usize, usize, usize, f64)> = out
        .chains
        .iter()
        .enumerate()
        .flat_map(|(c, ch)| {
            ch.k_trace
                .iter()
                .zip(&ch.nll_trace)
                .enumerate()
                .map(move |(it, (&k, &nll))| (c, it, k, nll))
        })
        .collect();
    write_csv(&cfg.output.join(NLL_TRACE_FILE), &trace, &["chain", "iteration", "K", "nll"])?;
    if let Some(t) = &out.test_nll {
        let rows: Vec<(usize, usize, usize, f64)> = out
            .chains
            .iter()
            .zip(t)
            .enumerate()
            .flat_map(|(c, (ch, v))| ch.samples.iter().zip(v).map(move |(s, &nll)| (c, s.iteration, s.k, nll)))
            .collect();
        write_csv(&cfg.output.join(TEST_NLL_FILE), &rows, &["chain", "iteration", "K", "test_nll"])?;
    }
    Ok(out)
}

/// Files produced by [`cmd_summarize`].
#[derive(Debug, Clone, PartialEq)]
pub struct SummarizeOutput {
    pub summary: ChainSummary,
    /// `(method, statistic, R-hat)` for every method with at least two chains.
    pub rhat: Vec<(String, String, f64)>,
    pub skipped: Vec<PathBuf>,
}

/// Reads chain files and writes `summary.csv`, `k_histogram.csv`,
/// `autocorrelation.csv`, `nll_trace.csv` and `rhat.csv` into `out_dir`. Unreadable
/// files are skipped with a warning; it is an error when all are.
pub fn cmd_summarize(files: &[PathBuf], out_dir: &Path, h_max: usize, seed: u64) -> Result<SummarizeOutput> {
    let mut records: Vec<ChainRecord> = Vec::new();
    let mut skipped = Vec::new();
    for f in files {
        match load_chain(f) {
            Ok(r) => records.extend(r),
            Err(e) => {
                log::warn!("skipping {}: {e}", f.display());
                skipped.push(f.clone());
            }
        }
    }
    if records.is_empty() {
        return Err(FbcError::InvalidData("no readable chain files".into()));
    }
    fs::create_dir_all(out_dir)?;
    let mut rng = chain_rng(seed, u64::MAX);
    let summary_rows: Vec<SummaryRow> = records
        .iter()
        .filter_map(|r| {
            pick_sample(&r.samples, ReportRule::Random, &mut rng).map(|s| SummaryRow {
                method: r.header.method.clone(),
                k: s.k,
                cost: s.cost,
                delta: s.delta,
                bal: s.bal,
            })
        })
        .collect();
    write_csv(&out_dir.join(SUMMARY_FILE), &summary_rows, &["method", "K", "cost", "delta", "bal"])?;

    let all: Vec<SampleMetrics> = records.iter().flat_map(|r| r.samples.iter().map(sample_metrics)).collect();
    let nll: Vec<(u64, usize, f64)> = records
        .iter()
        .flat_map(|r| r.samples.iter().map(move |s| (r.header.chain, s.iteration, s.nll)))
        .collect();
    let summary = ChainSummary::new(all, nll.iter().map(|x| x.2).collect(), h_max);
    let hist: Vec<(usize, usize)> = summary.k_histogram.iter().map(|(&k, &c)| (k, c)).collect();
    write_csv(&out_dir.join("k_histogram.csv"), &hist, &["K", "count"])?;

    let mut acf_rows: Vec<(u64, usize, f64)> = Vec::new();
    for r in &records {
        let per = ChainSummary::new(r.samples.iter().map(sample_metrics).collect(), Vec::new(), h_max);
        acf_rows.extend(per.autocorrelation.iter().enumerate().map(|(h, &v)| (r.header.chain, h, v)));
    }
    write_csv(&out_dir.join("autocorrelation.csv"), &acf_rows, &["chain", "lag", "rho"])?;
    write_csv(&out_dir.join(NLL_TRACE_FILE), &nll, &["chain", "iteration", "nll"])?;

    let mut methods: Vec<&str> = records.iter().map(|r| r.header.method.as_str()).collect();
    methods.sort_unstable();
    methods.dedup();
    let mut rhat = Vec::new();
    for method in methods {
        let chains: Vec<&ChainRecord> = records.iter().filter(|r| r.header.method == method).collect();
        let k: Vec<Vec<f64>> = chains.iter().map(|r| r.samples.iter().map(|s| s.k as f64).collect()).collect();
        let nll: Vec<Vec<f64>> = chains.iter().map(|r| r.samples.iter().map(|s| s.nll).collect()).collect();
        for (name, series) in [("K", k), ("nll", nll)] {
            if let Ok(v) = potential_scale_reduction(&series) {
                rhat.push((method.to_string(), name.to_string(), v));
            }
        }
    }
    write_csv(&out_dir.join("rhat.csv"), &rhat, &["method", "statistic", "rhat"])?;
    Ok(SummarizeOutput { summary, rhat, skipped })
}

/// Parameter varied by [`cmd_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    /// Mask size of every non-reference group.
    M,
    Tau,
    Kappa,
}

impl std::str::FromStr for SweepParameter {
    type Err = FbcError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "m" => Ok(SweepParameter::M),
            "tau" => Ok(SweepParameter::Tau),
            "kappa" => Ok(SweepParameter::Kappa),
            other => Err(FbcError::invalid(format!("unknown sweep parameter '{other}' (m, tau, kappa)"))),
        }
    }
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::M => "m",
            SweepParameter::Tau => "tau",
            SweepParameter::Kappa => "kappa",
        }
    }

    fn apply(self, cfg: &mut RunConfig, value: f64) -> Result<()> {
        match self {
            SweepParameter::M => {
                if value < 0.0 || value.fract() != 0.0 {
                    return Err(FbcError::invalid(format!("mask size must be a non-negative integer, got {value}")));
                }
                cfg.sampler.mask_sizes = vec![value as usize];
            }
            SweepParameter::Tau => cfg.prior.tau = value,
            SweepParameter::Kappa => cfg.prior.kappa = value,
        }
        Ok(())
    }
}

/// One row of a sweep table. Metrics are means over all retained samples of
/// all chains; `delta_max` is the largest Δ of any sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub parameter: String,
    pub value: f64,
    pub k_mode: Option<usize>,
    pub cost: Option<f64>,
    pub delta: Option<f64>,
    pub bal: Option<f64>,
    pub delta_max: Option<f64>,
    pub status: String,
}

/// Runs `base` once per value of `parameter` and writes the trade-off table
/// to `out`. A failing run is recorded in its row and the sweep continues.
pub fn cmd_sweep(base: &RunConfig, parameter: SweepParameter, values: &[f64], out: &Path) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(values.len());
    for &value in values {
        let mut cfg = base.clone();
        let result = parameter.apply(&mut cfg, value).and_then(|_| run(&cfg));
        let row = match result {
            Ok(o) => {
                let samples: Vec<&ChainSample> = o.chains.iter().flat_map(|c| &c.samples).collect();
                let n = samples.len() as f64;
                let mean = |f: fn(&ChainSample) -> f64| samples.iter().map(|s| f(s)).sum::<f64>() / n;
                SweepRow {
                    parameter: parameter.name().into(),
                    value,
                    k_mode: mode_k(samples.iter().map(|s| s.k)),
                    cost: Some(mean(|s| s.cost)),
                    delta: Some(mean(|s| s.delta)),
                    bal: Some(mean(|s| s.bal)),
                    delta_max: Some(samples.iter().map(|s| s.delta).fold(0.0, f64::max)),
                    status: "ok".into(),
                }
            }
            Err(e) => {
                log::warn!("sweep {}={value} failed: {e}", parameter.name());
                SweepRow {
                    parameter: parameter.name().into(),
                    value,
                    k_mode: None,
                    cost: None,
                    delta: None,
                    bal: None,
                    delta_max: None,
                    status: format!("error: {e}"),
                }
            }
        };
        rows.push(row);
    }
    if let Some(dir) = out.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    write_csv(
        out,
        &rows,
        &["parameter", "value", "k_mode", "cost", "delta", "bal", "delta_max", "status"],
    )?;
    Ok(rows)
}
