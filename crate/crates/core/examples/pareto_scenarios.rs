//! Sweep a small parameter grid, keep the Pareto front and pick one scheme
//! per scenario.

use taz::pipeline::{sweep_points, PipelineConfig};
use taz::regionalize::Prepared;

fn main() -> taz::Result<()> {
    let config = PipelineConfig {
        synth: true,
        synth_units: 4,
        sweep_resolutions: Some(vec![0.25, 1.0, 4.0, 16.0]),
        sweep_w_od: Some(vec![0.2, 0.8]),
        sweep_w_attr: Some(vec![0.0, 0.5]),
        resolution_count: 16,
        ..Default::default()
    };
    let study = config.study()?;
    let prepared = Prepared::new(&study, config.prepare_options()?)?;
    let out = sweep_points(&config, &prepared)?;

    println!(
        "{:>4} {:>7} {:>7} {:>7} {:>7}  front",
        "id", "regions", "sem", "quant", "inter"
    );
    for ((id, _, v), &front) in out.points.iter().zip(&out.pareto) {
        let g = &v.groups;
        println!(
            "{id:>4} {:>7} {:>7.3} {:>7.3} {:>7.3}  {}",
            v.n_regions,
            g.semantics,
            g.quantity,
            g.interaction,
            if front { "*" } else { "" }
        );
    }
    for (scenario, i) in &out.selections {
        let (id, _, v) = &out.points[*i];
        println!(
            "{:<20} -> scheme {id} ({} regions, {} = {:.3})",
            scenario.name(),
            v.n_regions,
            scenario.name(),
            scenario.objective(v)
        );
    }
    Ok(())
}
