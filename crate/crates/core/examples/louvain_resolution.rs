use taz::community::{adjusted_rand_index, ensemble_membership, louvain, modularity};
use taz::synth::planted_partition;

fn main() -> taz::Result<()> {
    let (graph, truth) = planted_partition(4, 10, 0.9, 0.05, 3);
    println!("planted: 4 blocks of 10 nodes, {} edges", graph.edges().len());
    for gamma in [0.1, 0.5, 1.0, 2.0, 8.0] {
        let p = louvain(&graph, gamma, 0)?;
        println!(
            "gamma {gamma:>4}: {:>2} communities, Q = {:.4}, ARI = {:.3}",
            p.n_communities(),
            modularity(&graph, &p, gamma)?,
            adjusted_rand_index(p.assignment(), &truth)
        );
    }

    // Memberships are run frequencies after aligning labels across runs.
    let (membership, consensus) = ensemble_membership(&graph, 1.0, 20, 11)?;
    let fuzzy = (0..graph.n_nodes()).filter(|&i| membership.row(i).len() > 1).count();
    println!(
        "ensemble of 20 runs: {} communities, {fuzzy} node(s) with split membership, ARI = {:.3}",
        consensus.n_communities(),
        adjusted_rand_index(consensus.assignment(), &truth)
    );
    Ok(())
}
