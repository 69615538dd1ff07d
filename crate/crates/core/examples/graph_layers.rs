//! The three interaction layers of a synthetic city and their weighted sum.

use taz::graph::LayerWeights;
use taz::regionalize::{PrepareOptions, Prepared};
use taz::synth::{generate_city, CityConfig};

fn main() -> taz::Result<()> {
    let study = generate_city(&CityConfig::with_grid(3, 3, 7))?;
    let p = Prepared::new(&study, PrepareOptions::default())?;
    for (name, g) in [
        ("od", &p.od_layer),
        ("proximity", &p.proximity_layer),
        ("attribute", &p.attribute_layer),
    ] {
        println!(
            "{name:>10}: {:>5} edges, weight {:.3}",
            g.edges().len(),
            g.edge_weight_sum()
        );
    }
    println!("sigma = {:.2} m, bandwidths = {:?}", p.sigma, p.bandwidths);

    for (od, prox, attr) in [(1.0, 0.0, 0.0), (0.5, 0.5, 0.0), (0.4, 0.3, 0.3)] {
        let g = p.detection_graph(&LayerWeights::new(od, prox, attr)?)?;
        println!(
            "weights ({od}, {prox}, {attr}): {} edges, total {:.3}",
            g.edges().len(),
            g.edge_weight_sum()
        );
    }
    Ok(())
}
