//! Global ratio of the twisted paraproduct across resolutions and seeds.
//!
//! Usage: cargo run --release --example global_ratio [seeds]

use dyadic_bellman::dyadic::DyadicSquare;
use dyadic_bellman::estimates::{global_ratio, ExponentTuple};
use dyadic_bellman::gen::bundle_for;
use dyadic_bellman::graph::BipartiteSpec;

fn main() -> dyadic_bellman::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let spec = BipartiteSpec::twisted_paraproduct();
    let exps = ExponentTuple::new(&spec, &[3.0, 3.0, 3.0])?;
    for res in 3..=5 {
        let mut row = Vec::new();
        for seed in 0..seeds {
            let b = bundle_for(&spec, DyadicSquare::unit(), res, seed)?;
            row.push(global_ratio(&spec, &b, &exps, 0)?);
        }
        let mean = row.iter().sum::<f64>() / row.len() as f64;
        println!("N={res} mean={mean:.12} ratios={row:.6?}");
    }
    Ok(())
}
