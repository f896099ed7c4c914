//! Held-out likelihood. Equal numbers of test points are held out from each
//! group; test points inherit labels through minimum-distance matchings and
//! are scored by the posterior predictive of their cluster.
//!
//! cargo run --release --example test_nll

use std::collections::BTreeMap;

use fbc::experiment::{run, RunConfig};
use fbc::io::DatasetSpec;

fn main() -> fbc::error::Result<()> {
    let dataset = DatasetSpec {
        test_per_group: Some(100),
        ..DatasetSpec::toy(2)
    };
    let mut cfg = RunConfig::new("unused", dataset);
    cfg.sampler.max_iter = 2000;
    cfg.sampler.burn_in = 1500;
    let out = run(&cfg)?;
    let chain = &out.chains[0];
    let test = &out.test_nll.expect("toy split holds out test rows")[0];

    let mut by_k: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (s, &nll) in chain.samples.iter().zip(test) {
        by_k.entry(s.k).or_default().push(nll);
    }
    for (k, v) in by_k {
        println!("K = {k}: {} samples, mean test NLL {:.2}", v.len(), v.iter().sum::<f64>() / v.len() as f64);
    }
    Ok(())
}
