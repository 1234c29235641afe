//! The three rock-paper-scissors generalisation splits and the chance that
//! an evaluation frame was already seen in training.

use rtfm::rps::{make_rps_splits, redundancy_probability, RpsKind, RpsSplit};

pub fn run_example() -> rtfm::Result<()> {
    for kind in [RpsKind::Permutation, RpsKind::NewEdge, RpsKind::NewEdgeNodes] {
        let s = make_rps_splits(kind, 0);
        let train_edges = RpsSplit::edges(&s.train_graphs);
        let new_edges = RpsSplit::edges(&s.dev_graphs).difference(&train_edges).count();
        let new_nodes = RpsSplit::nodes(&s.dev_graphs)
            .difference(&RpsSplit::nodes(&s.train_graphs))
            .count();
        println!(
            "{kind:?}: {} train graphs over {} node triples, {} dev graphs, {new_edges} unseen edges, {new_nodes} unseen nodes",
            s.train_graphs.len(),
            RpsSplit::node_triples(&s.train_graphs).len(),
            s.dev_graphs.len()
        );
    }
    let p = redundancy_probability(5e7, 10.0, 24360.0, 4060.0)?;
    println!(
        "chance an initial 10x10 frame was seen in training: {p:.6} ({:.0}%)",
        p * 100.0
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> rtfm::Result<()> {
    run_example()
}
