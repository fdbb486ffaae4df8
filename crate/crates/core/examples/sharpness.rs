//! Spike probes of `⟨f^n⟩^m ⟨g^m⟩^n ≲ (⟨f^d⟩^{1/d} ⟨g^d⟩^{1/d})^{mn}`, and the
//! cycle bound that needs only `d = 2`.

use dyadic_bellman::dyadic::DyadicSquare;
use dyadic_bellman::estimates::{
    cycle_improvement_check, sharpness_closed_form, sharpness_probe, sharpness_probe_one_sided, SpikeSide,
};
use dyadic_bellman::gen::bundle_for;
use dyadic_bellman::graph::BipartiteSpec;

fn main() -> dyadic_bellman::Result<()> {
    for (m, n, d) in [(2, 2, 1.0), (2, 2, 2.0), (2, 3, 2.0), (2, 3, 3.0)] {
        let both = sharpness_probe(m, n, d, 8)?;
        let first = sharpness_probe_one_sided(m, n, d, 8, SpikeSide::First)?;
        println!("m={m} n={n} d={d}");
        for k in [1, 4, 8] {
            println!(
                "  k={k}: both {:.4e} (closed form {:.4e}), f only {:.4e}",
                both[k - 1],
                sharpness_closed_form(m, n, d, k as u32),
                first[k - 1]
            );
        }
    }
    let spec = BipartiteSpec::cycle(1);
    let b = bundle_for(&spec, DyadicSquare::unit(), 3, 5)?;
    for q in DyadicSquare::unit().descendants_at(1) {
        let (a, rhs) = cycle_improvement_check(&spec, &b, &q)?;
        println!("cycle at {q}: |A| = {a:.4e} <= {rhs:.4e}");
    }
    Ok(())
}
