//! The four benchmark graphs: maximal cliques, decomposability and a perfect
//! ordering where one exists.

use gwtest::graph::benchmark_graphs;

fn main() {
    for (name, g) in benchmark_graphs() {
        println!("graph ({name}): p={} edges={}", g.p(), g.edge_count());
        for clique in g.maximal_cliques() {
            println!("  clique {clique:?}");
        }
        match g.perfect_ordering() {
            Some(order) => println!("  decomposable, perfect ordering {:?}", order.as_slice()),
            None => println!("  not decomposable"),
        }
    }
}
