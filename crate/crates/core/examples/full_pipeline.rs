//! Runs a sweep from a TOML configuration, as the `taz sweep` command does,
//! and prints the report.

use std::path::Path;

use taz::pipeline::{run_sweep, PipelineConfig};

const CONFIG: &str = r#"
synth = true
synth_blocks = 3
synth_units = 4
seed = 42
out = "target/example-sweep"
scenario = "mobility_coverage"

a_min = 6000.0
a_max = 12000.0

sweep_resolutions = [0.5, 1.0, 2.0, 4.0]
sweep_w_attr = [0.0, 0.3]
sweep_membership_thresholds = [0.6, 0.8]
resolution_count = 20
"#;

fn main() -> taz::Result<()> {
    let config = PipelineConfig::from_toml(CONFIG, Path::new("."))?;
    let report = run_sweep(&config)?;
    print!("{}", report.summary);
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
