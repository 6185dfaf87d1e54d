//! Drive an experiment through the library: defaults, an override, and the manifest.

use kahler_lab::experiments::{run, ConfigFile, Experiment, ExperimentConfig, Overrides};

fn main() -> kahler_lab::Result<()> {
    let dir = std::env::temp_dir().join("kahler-lab-example");
    let overrides = Overrides {
        output_dir: Some(dir.clone()),
        ..Overrides::default()
    };
    let config = ExperimentConfig::resolve(Experiment::Perturbation, &ConfigFile::default(), &overrides)?;
    let report = run(&config)?;
    for c in &report.checks {
        println!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.describe());
    }
    println!("artifacts in {}: {:?}", dir.display(), report.artifacts);
    Ok(())
}
