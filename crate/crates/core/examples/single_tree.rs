//! Single-tree ratios on random convex trees, and telescoping of a Bellman term.

use dyadic_bellman::dyadic::DyadicSquare;
use dyadic_bellman::estimates::single_tree_ratio;
use dyadic_bellman::gen::{bundle_for, function_bundle, random_convex_tree, GenKind};
use dyadic_bellman::graph::BipartiteSpec;
use dyadic_bellman::term::{parse_term, telescope_sum};

fn main() -> dyadic_bellman::Result<()> {
    let spec = BipartiteSpec::twisted_paraproduct();
    let root = DyadicSquare::unit();
    let b = bundle_for(&spec, root, 5, 3)?;
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let t = random_convex_tree(root, 4, seed);
        let r = single_tree_ratio(&spec, &b, &t)?;
        worst = worst.max(r);
        println!("tree {seed}: {:>3} squares, {:>3} leaves, ratio {r:.5}", t.len(), t.leaves().len());
    }
    println!("largest ratio {worst:.5}");

    let bell = parse_term("avg[x,x'](avg[y](F(x,y)*G(x',y))^2)")?;
    let fns = function_bundle(GenKind::Random, root, 5, 3)?;
    let t = random_convex_tree(root, 4, 99);
    let (boxes, ends) = telescope_sum(&bell, &t, &fns)?;
    println!("Σ |Q| Box B = {boxes:.12e}\nleaves - root = {ends:.12e}");
    Ok(())
}
