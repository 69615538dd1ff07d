use taz::community::{detect_characteristic_scales, log_grid, resolution_sweep};
use taz::graph::LayerWeights;
use taz::multilevel::{check_nesting, multilevel_method1, multilevel_method2, multilevel_method3};
use taz::regionalize::{DetectParams, PrepareOptions, Prepared};
use taz::synth::{generate_city, CityConfig};

fn main() -> taz::Result<()> {
    let study = generate_city(&CityConfig::with_grid(4, 3, 2))?;
    let options = PrepareOptions::default();
    let p = Prepared::new(&study, options.clone())?;
    let params = DetectParams {
        resolution: 4.0,
        ..Default::default()
    };

    // Method 1: aggregate the regions into units and detect again.
    let mut levels = vec![p.regionalize(&params, 0)?.scheme];
    for resolution in [1.5, 1.0] {
        let step = multilevel_method1(
            &study,
            levels.last().expect("level"),
            &options,
            &DetectParams { resolution, ..params },
        )?;
        if let Some(n) = step.notice {
            println!("stop: {n}");
            break;
        }
        levels.push(step.scheme);
    }
    check_nesting(&levels.iter().map(|s| s.assignment.clone()).collect::<Vec<_>>())?;
    let counts: Vec<usize> = levels.iter().map(|s| s.n_regions()).collect();
    println!("method 1 (aggregate): {counts:?} regions, nested");

    // Method 2: the block hierarchy itself.
    let counts: Vec<usize> = multilevel_method2(&study)?.iter().map(|s| s.n_regions()).collect();
    println!("method 2 (hierarchy): {counts:?} regions");

    // Method 3: one independent scheme per characteristic scale.
    let graph = p.detection_graph(&LayerWeights::default())?;
    let records = resolution_sweep(&graph, &log_grid(0.05, 20.0, 30), 10, 0)?;
    let scales = detect_characteristic_scales(&records, 0.1, 1.5f64.ln())?;
    if scales.is_empty() {
        println!("method 3 (scales): no stable plateau found");
    } else {
        for s in multilevel_method3(&p, &scales, &params)? {
            let scale = s.params.scale.clone().unwrap_or_default();
            let gamma = s.params.resolution.unwrap_or_default();
            println!(
                "method 3 (scales): {scale} at gamma {gamma:.3} -> {} regions",
                s.n_regions()
            );
        }
    }
    Ok(())
}
