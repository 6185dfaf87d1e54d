use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{Experiment, ExperimentConfig};
use super::scans;
use crate::error::Result;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = "<")]
    Below,
}

impl Comparison {
    pub fn holds(self, measured: f64, bound: f64) -> bool {
        match self {
            Comparison::AtLeast => measured >= bound,
            Comparison::AtMost => measured <= bound,
            Comparison::Below => measured < bound,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::AtLeast => ">=",
            Comparison::AtMost => "<=",
            Comparison::Below => "<",
        }
    }
}

/// One asserted tolerance: `measured <comparison> bound`. NaN never passes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub criterion: u8,
    pub name: String,
    pub measured: f64,
    pub comparison: Comparison,
    pub bound: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(criterion: u8, name: &str, measured: f64, comparison: Comparison, bound: f64) -> Self {
        Self {
            criterion,
            name: name.into(),
            measured,
            comparison,
            bound,
            passed: comparison.holds(measured, bound),
        }
    }

    pub fn at_least(criterion: u8, name: &str, measured: f64, bound: f64) -> Self {
        Self::new(criterion, name, measured, Comparison::AtLeast, bound)
    }

    pub fn at_most(criterion: u8, name: &str, measured: f64, bound: f64) -> Self {
        Self::new(criterion, name, measured, Comparison::AtMost, bound)
    }

    pub fn below(criterion: u8, name: &str, measured: f64, bound: f64) -> Self {
        Self::new(criterion, name, measured, Comparison::Below, bound)
    }

    pub fn describe(&self) -> String {
        format!(
            "[{}] {}: measured {:.6e} {} {:.6e}",
            self.criterion,
            self.name,
            self.measured,
            self.comparison.symbol(),
            self.bound
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub experiment: Experiment,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// File names relative to the output directory, in write order.
    pub artifacts: Vec<String>,
    pub output_dir: PathBuf,
}

impl RunReport {
    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn criterion_passed(&self, criterion: u8) -> bool {
        let mut any = false;
        for c in self.checks.iter().filter(|c| c.criterion == criterion) {
            if !c.passed {
                return false;
            }
            any = true;
        }
        any
    }
}

/// Output directory plus the list of files written into it.
pub struct Sink {
    dir: PathBuf,
    artifacts: Vec<String>,
}

/// A line plot of `y` against `x` from one CSV, one series per value of `group`.
pub struct Plot<'a> {
    pub name: &'a str,
    pub csv: &'a str,
    pub x: &'a str,
    pub y: &'a str,
    pub group: Option<&'a str>,
    pub log_x: bool,
    pub log_y: bool,
    pub title: &'a str,
}

impl Sink {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn register(&mut self, name: &str) -> PathBuf {
        if !self.artifacts.iter().any(|a| a == name) {
            self.artifacts.push(name.to_string());
        }
        self.dir.join(name)
    }

    pub fn file(&mut self, name: &str) -> Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.register(name))?))
    }

    pub fn csv(&mut self, name: &str) -> Result<csv::Writer<BufWriter<File>>> {
        Ok(csv::Writer::from_writer(self.file(name)?))
    }

    pub fn text(&mut self, name: &str, text: &str) -> Result<()> {
        std::fs::write(self.register(name), text)?;
        Ok(())
    }

    /// `plot_<name>.py`, which renders `<name>.png` next to itself with matplotlib.
    pub fn plot(&mut self, p: &Plot) -> Result<()> {
        let group = p.group.map_or("None".to_string(), |g| format!("\"{g}\""));
        let script = format!(
            r#"import csv
import os

import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
series = {{}}
with open(os.path.join(here, "{csv}")) as f:
    for row in csv.DictReader(f):
        if row["{x}"] == "" or row["{y}"] == "":
            continue
        key = row[{group}] if {group} else ""
        series.setdefault(key, []).append((float(row["{x}"]), float(row["{y}"])))
fig, ax = plt.subplots()
for key, points in series.items():
    xs, ys = zip(*points)
    ax.plot(xs, ys, marker=".", label=key or None)
ax.set_xlabel("{x}")
ax.set_ylabel("{y}")
ax.set_title("{title}")
if {log_x}:
    ax.set_xscale("log")
if {log_y}:
    ax.set_yscale("log")
if len(series) > 1 and len(series) <= 12:
    ax.legend(title={group})
fig.savefig(os.path.join(here, "{name}.png"), dpi=150)
"#,
            csv = p.csv,
            x = p.x,
            y = p.y,
            group = group,
            title = p.title,
            log_x = if p.log_x { "True" } else { "False" },
            log_y = if p.log_y { "True" } else { "False" },
            name = p.name,
        );
        self.text(&format!("plot_{}.py", p.name), &script)
    }

    pub fn artifacts(&self) -> &[String] {
        &self.artifacts
    }
}

#[derive(Serialize)]
struct Library {
    name: &'static str,
    version: &'static str,
}

#[derive(Serialize)]
struct ConfigEcho<'a> {
    grid: &'a super::config::GridConfig,
    k_list: &'a [usize],
    tolerances: &'a std::collections::BTreeMap<String, f64>,
    seed: u64,
    corpus_size: usize,
}

#[derive(Serialize)]
struct Manifest<'a> {
    manifest_version: u32,
    library: Library,
    experiment: Experiment,
    criteria: &'a [u8],
    config: ConfigEcho<'a>,
    checks: &'a [Check],
    artifacts: &'a [String],
    passed: bool,
}

/// Run one experiment: write its CSVs and plot scripts, then `manifest.json`.
///
/// The manifest echoes the config without the output directory, so identical configs
/// written to different places produce identical bytes.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let mut sink = Sink::new(&config.output_dir)?;
    let checks = match config.experiment {
        Experiment::Convexity => scans::convexity(config, &mut sink)?,
        Experiment::Subslope => scans::subslope(config, &mut sink)?,
        Experiment::BergmanTv => scans::bergman_tv(config, &mut sink)?,
        Experiment::PshVariation => scans::psh_variation(config, &mut sink)?,
        Experiment::MixedPositivity => scans::mixed_positivity(config, &mut sink)?,
        Experiment::UniquenessTwisted => scans::uniqueness_twisted(config, &mut sink)?,
        Experiment::Perturbation => scans::perturbation(config, &mut sink)?,
        Experiment::FieldsIdentities => scans::fields_identities(config, &mut sink)?,
    };
    let passed = checks.iter().all(|c| c.passed);
    let manifest_name = "manifest.json";
    let mut artifacts = sink.artifacts().to_vec();
    artifacts.push(manifest_name.into());
    let manifest = Manifest {
        manifest_version: MANIFEST_VERSION,
        library: Library {
            name: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
        },
        experiment: config.experiment,
        criteria: config.experiment.criteria(),
        config: ConfigEcho {
            grid: &config.grid,
            k_list: &config.k_list,
            tolerances: &config.tolerances,
            seed: config.seed,
            corpus_size: config.corpus_size,
        },
        checks: &checks,
        artifacts: &artifacts,
        passed,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    sink.text(manifest_name, &text)?;
    Ok(RunReport {
        experiment: config.experiment,
        passed,
        checks,
        artifacts,
        output_dir: config.output_dir.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparisons() {
        assert!(Check::at_least(1, "a", -1e-7, -1e-6).passed);
        assert!(!Check::at_most(1, "a", f64::NAN, 1.0).passed);
        assert!(!Check::below(5, "a", 0.0, 0.0).passed);
        let r = RunReport {
            experiment: Experiment::Convexity,
            passed: false,
            checks: vec![Check::at_most(1, "ok", 0.0, 1.0), Check::at_most(2, "bad", 2.0, 1.0)],
            artifacts: vec![],
            output_dir: PathBuf::new(),
        };
        assert_eq!(r.first_failure().unwrap().name, "bad");
        assert!(r.criterion_passed(1) && !r.criterion_passed(2) && !r.criterion_passed(3));
    }

    #[test]
    fn plot_scripts_name_their_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let mut sink = Sink::new(dir.path()).unwrap();
        sink.plot(&Plot {
            name: "tv",
            csv: "bergman_tv.csv",
            x: "k",
            y: "tv",
            group: Some("element"),
            log_x: true,
            log_y: true,
            title: "TV",
        })
        .unwrap();
        let text = std::fs::read_to_string(dir.path().join("plot_tv.py")).unwrap();
        assert!(text.contains("bergman_tv.csv") && text.contains("tv.png"));
        assert_eq!(sink.artifacts(), ["plot_tv.py"]);
    }
}
