//! Selective partitions, their types and ranks, and the reduction graph.
//!
//! Usage: cargo run --example partition_types [m n]

use dyadic_bellman::partition::{enumerate_omega, integer_partition_count, reduction_graph, PartitionTypes};

fn main() {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let (m, n) = match args[..] {
        [m, n] => (m, n),
        _ => (2, 4),
    };
    let types = PartitionTypes::new(m, n);
    println!(
        "|Ω_{{{m},{n}}}| = {}, {} types (p#({m}) p#({n}) = {})",
        enumerate_omega(m, n).len(),
        types.len(),
        integer_partition_count(m) * integer_partition_count(n)
    );
    for t in types.types() {
        println!("  rank {:>2}: {t}", t.rank);
    }
    let g = reduction_graph(m, n);
    println!("reduction graph:");
    for e in g.edge_list() {
        println!("  {e}");
    }
    println!(
        "terminal ranks {:?}; every node descends: {}; inv_delta acyclic: {}",
        g.terminal(),
        g.every_node_descends(),
        g.inv_delta_acyclic()
    );
}
