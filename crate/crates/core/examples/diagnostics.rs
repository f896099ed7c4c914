//! Chain diagnostics: the training NLL trace and the autocorrelation of K
//! after burn-in, for two values of the energy temperature.
//!
//! cargo run --release --example diagnostics

use fbc::io::{load_dataset, DatasetSpec};
use fbc::metrics::autocorrelation;
use fbc::priors::{NormalGamma, PriorConfig};
use fbc::sampler::{Sampler, SamplerConfig};

fn main() -> fbc::error::Result<()> {
    let data = load_dataset(&DatasetSpec::toy(1))?.train;
    for tau in [0.01, 1.0] {
        let prior = PriorConfig { tau, ..PriorConfig::default() };
        let chain = Sampler::new(&data, NormalGamma::new(2, prior.a, prior.b)?, prior, SamplerConfig::default())?.run_chain(0)?;
        let trace: Vec<String> = chain.nll_trace.iter().step_by(100).map(|v| format!("{v:.0}")).collect();
        let ks: Vec<f64> = chain.samples.iter().map(|s| s.k as f64).collect();
        let rho = autocorrelation(&ks, 10)?;
        println!("tau {tau}: acceptance {:.3}", chain.acceptance_rate());
        println!("  training NLL every 100 iterations: {}", trace.join(" "));
        println!("  K autocorrelation lags 0..10: {:?}", rho.iter().map(|r| (r * 1000.0).round() / 1000.0).collect::<Vec<_>>());
    }
    Ok(())
}
