//! Graph-indexed forms: components, exponents, completion and the dyadic sum.

use dyadic_bellman::dyadic::{active_squares, DyadicSquare};
use dyadic_bellman::gen::bundle_for;
use dyadic_bellman::graph::{lambda_sum, BipartiteSpec};

fn main() -> dyadic_bellman::Result<()> {
    let specs = [
        ("twisted paraproduct", BipartiteSpec::twisted_paraproduct()),
        ("classical paraproduct, n = 3", BipartiteSpec::classical_paraproduct(3)),
        ("cycle of length 4", BipartiteSpec::cycle(1)),
        ("three components", BipartiteSpec::three_component_example()),
    ];
    for (name, spec) in specs {
        let info = spec.validate()?;
        println!("{name}: {}", spec.to_json()?);
        println!("  components {:?}", info.components);
        println!("  d {:?}", info.d);
        println!("  completion adds {:?}", spec.completion_edges()?);
        let b = bundle_for(&spec, DyadicSquare::unit(), 4, 7)?;
        let grids: Vec<_> = b.iter().map(|(_, g)| g).collect();
        let squares = active_squares(&grids, 2)?;
        let signed = lambda_sum(&spec, &b, &squares, false)?;
        let abs = lambda_sum(&spec, &b, &squares, true)?;
        let bd = b.dilate(1);
        let gd: Vec<_> = bd.iter().map(|(_, g)| g).collect();
        let dilated = lambda_sum(&spec, &bd, &active_squares(&gd, 2)?, false)?;
        println!("  {} squares: signed {signed:.6e}, absolute {abs:.6e}, dilated/signed {:.6}\n", squares.len(), dilated / signed);
    }
    Ok(())
}
