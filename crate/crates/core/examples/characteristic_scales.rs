//! Scan resolution over a two-level benchmark and report the plateaus.

use taz::community::{detect_characteristic_scales, log_grid, resolution_sweep};
use taz::synth::nested_cliques;

fn main() -> taz::Result<()> {
    let (graph, _, _) = nested_cliques(4, 0.05);
    let records = resolution_sweep(&graph, &log_grid(0.05, 20.0, 40), 10, 0)?;
    for r in &records {
        println!(
            "{:>8.3} {:>3} {}",
            r.resolution,
            r.n_communities,
            "#".repeat(r.n_communities)
        );
    }
    for s in detect_characteristic_scales(&records, 0.1, 1.5f64.ln())? {
        println!(
            "{}: {} communities for gamma in [{:.3}, {:.3}], midpoint {:.3}",
            s.label,
            s.stable_count,
            s.resolution_range.0,
            s.resolution_range.1,
            s.midpoint()
        );
    }
    Ok(())
}
