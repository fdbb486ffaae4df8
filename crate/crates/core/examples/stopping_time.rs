//! Stopping-time decomposition of the twisted paraproduct and the chain of
//! estimates from trees to norms.
//!
//! Usage: cargo run --release --example stopping_time [N] [seed]

use dyadic_bellman::dyadic::DyadicSquare;
use dyadic_bellman::estimates::{chain_diagnostic, stopping_decomposition, ExponentTuple};
use dyadic_bellman::gen::bundle_for;
use dyadic_bellman::graph::BipartiteSpec;

fn main() -> dyadic_bellman::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let res = args.first().copied().unwrap_or(4) as u32;
    let seed = args.get(1).copied().unwrap_or(1);
    let spec = BipartiteSpec::twisted_paraproduct();
    let exps = ExponentTuple::new(&spec, &[3.0, 3.0, 3.0])?;
    let b = bundle_for(&spec, DyadicSquare::unit(), res, seed)?;
    let dec = stopping_decomposition(&spec, &b, &exps, 2)?;
    println!("{:>14} {:>6} {:>12}", "k", "|M_k|", "Σ local");
    for s in &dec.strata {
        println!("{:>14} {:>6} {:>12.4e}", format!("{:?}", s.k), s.trees.len(), s.tree_sums.iter().sum::<f64>());
    }
    println!("direct {:.10e}  strata {:.10e}  ancestor tail {:.4e}", dec.direct_sum, dec.stratum_sum, dec.ancestor_tail);
    for c in &dec.checks {
        println!("  {:<26} {} {}", c.name, if c.passed { "ok" } else { "FAILED" }, c.detail);
    }
    let chain = chain_diagnostic(&spec, &b, &exps, &dec)?;
    println!("tree constant {:.4}, weighted measure {:.4} <= {:.4}", chain.tree_constant, chain.weighted_measure, chain.geometric_bound);
    for c in &chain.checks {
        println!("  {:<26} {} {}", c.name, if c.passed { "ok" } else { "FAILED" }, c.detail);
    }
    Ok(())
}
