//! Assemble the averaging expression that dominates all partitions up to a rank,
//! and check the domination on random data.

use dyadic_bellman::dyadic::DyadicSquare;
use dyadic_bellman::gen::{complete_bundle, GenKind};
use dyadic_bellman::partition::{
    assemble_bellman, assembly_check, coefficient_magnitude, enumerate_omega, reduction_check, ReductionConfig,
};

fn main() -> dyadic_bellman::Result<()> {
    let (m, n) = (2, 2);
    let cfg = ReductionConfig::default_for(m, n);
    println!("m = {m}, n = {n}, C = {}, δ = {}, ε = {}", cfg.c, cfg.delta, cfg.epsilon);
    let fns = complete_bundle(m, n, GenKind::Random, DyadicSquare::unit(), 3, 11)?;
    let q = DyadicSquare::unit();
    for p in enumerate_omega(m, n).iter().take(6) {
        let r = reduction_check(p, &cfg, &q, &fns)?;
        println!("  {p}: |A| = {:.4e} <= {:.4e}", r.lhs, r.rhs);
    }
    for kappa in 0..=3 {
        let b = assemble_bellman(m, n, kappa, &cfg.c, &cfg.epsilon);
        let chk = assembly_check(m, n, kappa, &cfg, &q, &fns)?;
        println!(
            "κ = {kappa}: {} terms, largest coefficient ~{:.3e}, holds {} ({:.4e} <= {:.4e})",
            b.len(),
            as_f64(&coefficient_magnitude(&b)),
            chk.holds(),
            chk.lhs,
            chk.rhs
        );
    }
    Ok(())
}

fn as_f64(c: &num_rational::BigRational) -> f64 {
    use num_traits::ToPrimitive;
    c.to_f64().unwrap_or(f64::INFINITY)
}
