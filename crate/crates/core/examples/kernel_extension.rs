//! How the membership threshold trades kernel units for absorbed ones.

use taz::regionalize::{DetectParams, PrepareOptions, Prepared};
use taz::synth::{generate_city, CityConfig};

fn main() -> taz::Result<()> {
    let study = generate_city(&CityConfig::with_grid(3, 4, 21))?;
    let p = Prepared::new(&study, PrepareOptions::default())?;
    println!("{} units in {} blocks", study.units.len(), study.blocks.len());
    for threshold in [0.55, 0.7, 0.9, 1.0] {
        let params = DetectParams {
            membership_threshold: threshold,
            resolution: 2.0,
            ..Default::default()
        };
        let r = p.regionalize(&params, 0)?;
        r.scheme.validate(&p.adjacency)?;
        println!(
            "threshold {threshold:.2}: {} communities -> {} regions ({} kernel, {} absorbed, {} fallback)",
            r.n_communities,
            r.scheme.n_regions(),
            r.kernel_nodes,
            r.absorbed_nodes,
            r.fallback_nodes
        );
        for d in r.diagnostics.iter().take(2) {
            println!("  note: {d}");
        }
    }
    Ok(())
}
