use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Convexity,
    Subslope,
    BergmanTv,
    PshVariation,
    MixedPositivity,
    UniquenessTwisted,
    Perturbation,
    FieldsIdentities,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Convexity,
        Experiment::Subslope,
        Experiment::BergmanTv,
        Experiment::PshVariation,
        Experiment::MixedPositivity,
        Experiment::UniquenessTwisted,
        Experiment::Perturbation,
        Experiment::FieldsIdentities,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Convexity => "convexity",
            Experiment::Subslope => "subslope",
            Experiment::BergmanTv => "bergman-tv",
            Experiment::PshVariation => "psh-variation",
            Experiment::MixedPositivity => "mixed-positivity",
            Experiment::UniquenessTwisted => "uniqueness-twisted",
            Experiment::Perturbation => "perturbation",
            Experiment::FieldsIdentities => "fields-identities",
        }
    }

    /// Acceptance criteria exercised by the experiment.
    pub fn criteria(self) -> &'static [u8] {
        match self {
            Experiment::Convexity => &[1, 2, 8],
            Experiment::Subslope => &[3, 9, 10],
            Experiment::BergmanTv => &[4, 5],
            Experiment::PshVariation => &[6],
            Experiment::MixedPositivity => &[7],
            Experiment::UniquenessTwisted => &[14, 15],
            Experiment::Perturbation => &[12, 13],
            Experiment::FieldsIdentities => &[11],
        }
    }

    /// One line per CSV written, `file: columns`.
    pub fn csv_columns(self) -> &'static [&'static str] {
        match self {
            Experiment::Convexity => &[
                "convexity.csv: pair,t,value,d1,d2",
                "hmae_refinement.csv: pair,n,t_nodes,residual,ratio",
            ],
            Experiment::Subslope => &[
                "subslope.csv: pair,lhs,rhs,slack,slope,pairing",
                "csc_minimum.csv: element,mabuchi_gap",
                "gradient_checks.csv: element,functional,step,difference,error,derivative,pairing,order",
                "entropy_duality.csv: element,kind,trial,gap",
            ],
            Experiment::BergmanTv => &[
                "bergman_tv.csv: element,k,tv,mass",
                "bergman_measure_fs.csv: s,density,reference",
            ],
            Experiment::PshVariation => &["psh_variation.csv: pair,kind,k,min_eig,mutated_min_eig"],
            Experiment::MixedPositivity => &[
                "decomposition.csv: pair,k,min_eig,t,s,identity_gap",
                "mixed_positivity.csv: pair,k,a,min_pairing,t,s,truncated_nodes",
            ],
            Experiment::UniquenessTwisted => &[
                "uniqueness.csv: alpha,start,iterations,residual,distance",
                "descent_alpha<c>_start<i>.csv: iter,value,grad_norm,residual",
                "strict_convexity.csv: pair,gap,bound,delta,a,c,distance",
            ],
            Experiment::Perturbation => &[
                "perturbation.csv: s,with_correction,without_correction",
                "linearized.csv: x,nu,v",
            ],
            Experiment::FieldsIdentities => &[
                "fields_identities.csv: name,measured,tolerance,passed",
                "energy_ev.csv: t,value,d1,d2",
            ],
        }
    }

    /// Default tolerances; every key here may be overridden and no others exist.
    pub fn default_tolerances(self) -> BTreeMap<String, f64> {
        let pairs: &[(&str, f64)] = match self {
            Experiment::Convexity => &[("second_diff_rel", 1e-6), ("endpoint", 1e-8), ("hmae_ratio", 3.5)],
            Experiment::Subslope => &[
                ("slack", 1e-4),
                ("csc_min", 1e-6),
                ("gradient_order", 1.9),
                ("gradient_pairing", 1e-5),
                ("duality_gap", 1e-9),
                ("duality_optimal", 1e-6),
            ],
            Experiment::BergmanTv => &[("mass", 1e-8), ("fs_tv64", 1e-8)],
            Experiment::PshVariation => &[("min_eig", 1e-6)],
            Experiment::MixedPositivity => &[
                ("decomposition", 1e-6),
                ("identity_gap", 1e-6),
                ("pairing", 1e-8),
                ("a_stability", 1e-4),
            ],
            Experiment::UniquenessTwisted => &[
                ("agreement", 1e-4),
                ("fs_recovery", 1e-4),
                ("residual", 1e-5),
                ("strict_convexity", 1e-6),
            ],
            Experiment::Perturbation => &[("solve_residual", 1e-8), ("slope_min", 1.9), ("control_band", 0.15)],
            Experiment::FieldsIdentities => &[
                ("contraction", 1e-6),
                ("ibp", 1e-5),
                ("class_spread", 1e-5),
                ("norm_fs", 1e-6),
                ("futaki_spread", 1e-5),
                ("ev_linearity", 1e-5),
            ],
        };
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    pub fn default_grid(self) -> GridConfig {
        let (n, t_nodes) = match self {
            Experiment::Convexity | Experiment::Subslope | Experiment::BergmanTv | Experiment::FieldsIdentities => {
                (1024, 65)
            }
            Experiment::PshVariation | Experiment::MixedPositivity => (256, 17),
            Experiment::UniquenessTwisted => (128, 17),
            Experiment::Perturbation => (128, 3),
        };
        GridConfig {
            n,
            s_intervals: crate::potential::DEFAULT_S_INTERVALS,
            t_nodes,
        }
    }

    pub fn default_k_list(self) -> Vec<usize> {
        match self {
            Experiment::BergmanTv => vec![8, 16, 32, 64, 128],
            Experiment::PshVariation => vec![16, 32],
            _ => vec![16],
        }
    }

    pub fn default_corpus_size(self) -> usize {
        match self {
            Experiment::PshVariation | Experiment::MixedPositivity => 6,
            _ => 21,
        }
    }

    /// Smallest corpus the experiment can use: three descent starts or three smooth metrics
    /// besides Fubini–Study and the glued profile.
    pub fn min_corpus_size(self) -> usize {
        match self {
            Experiment::UniquenessTwisted | Experiment::FieldsIdentities => 4,
            _ => 2,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .iter()
            .copied()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
                LabError::Config(format!("unknown experiment `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

/// `{n, s_intervals, t_nodes}`: moment intervals, `s`-axis intervals, path nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridConfig {
    pub n: usize,
    pub s_intervals: usize,
    pub t_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub grid: GridConfig,
    pub k_list: Vec<usize>,
    pub tolerances: BTreeMap<String, f64>,
    pub seed: u64,
    pub corpus_size: usize,
    pub output_dir: PathBuf,
}

/// A config file: every field optional, unknown fields rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: Option<Experiment>,
    pub grid: Option<PartialGrid>,
    pub k_list: Option<Vec<usize>>,
    pub tolerances: Option<BTreeMap<String, f64>>,
    pub seed: Option<u64>,
    pub corpus_size: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialGrid {
    pub n: Option<usize>,
    pub s_intervals: Option<usize>,
    pub t_nodes: Option<usize>,
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| LabError::Config(format!("config does not match the schema: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// Command-line overrides, applied after the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub k_list: Option<Vec<usize>>,
    pub grid_n: Option<usize>,
    pub t_nodes: Option<usize>,
    pub tolerances: Vec<(String, f64)>,
}

/// Parse `KEY=VAL` for `--tol-override`.
pub fn parse_tolerance_override(text: &str) -> Result<(String, f64)> {
    let (key, value) = text
        .split_once('=')
        .ok_or_else(|| LabError::Config(format!("tolerance override `{text}` is not KEY=VAL")))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| LabError::Config(format!("tolerance override `{text}` has a non-numeric value")))?;
    Ok((key.trim().to_string(), value))
}

/// Parse a comma-separated `--k` list; the empty string is an empty list.
pub fn parse_k_list(text: &str) -> Result<Vec<usize>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|k| {
            k.trim()
                .parse()
                .map_err(|_| LabError::Config(format!("k_list entry `{k}` is not a positive integer")))
        })
        .collect()
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        Self {
            experiment,
            grid: experiment.default_grid(),
            k_list: experiment.default_k_list(),
            tolerances: experiment.default_tolerances(),
            seed: 0,
            corpus_size: experiment.default_corpus_size(),
            output_dir: PathBuf::from("out").join(experiment.name()),
        }
    }

    /// Defaults, then the file, then the overrides; validated.
    pub fn resolve(experiment: Experiment, file: &ConfigFile, overrides: &Overrides) -> Result<Self> {
        if let Some(e) = file.experiment {
            if e != experiment {
                return Err(LabError::Config(format!(
                    "config is for `{e}` but `{experiment}` was requested"
                )));
            }
        }
        let mut c = Self::defaults(experiment);
        if let Some(g) = file.grid {
            c.grid.n = g.n.unwrap_or(c.grid.n);
            c.grid.s_intervals = g.s_intervals.unwrap_or(c.grid.s_intervals);
            c.grid.t_nodes = g.t_nodes.unwrap_or(c.grid.t_nodes);
        }
        if let Some(k) = &file.k_list {
            c.k_list = k.clone();
        }
        let mut unknown = Vec::new();
        let mut set = |key: &str, v: f64, tolerances: &mut BTreeMap<String, f64>| match tolerances.get_mut(key) {
            Some(slot) => *slot = v,
            None => unknown.push(key.to_string()),
        };
        for (k, v) in file.tolerances.iter().flatten() {
            set(k, *v, &mut c.tolerances);
        }
        for (k, v) in &overrides.tolerances {
            set(k, *v, &mut c.tolerances);
        }
        c.seed = overrides.seed.or(file.seed).unwrap_or(c.seed);
        c.corpus_size = file.corpus_size.unwrap_or(c.corpus_size);
        if let Some(d) = overrides.output_dir.clone().or_else(|| file.output_dir.clone()) {
            c.output_dir = d;
        }
        if let Some(k) = &overrides.k_list {
            c.k_list = k.clone();
        }
        if let Some(n) = overrides.grid_n {
            c.grid.n = n;
        }
        if let Some(t) = overrides.t_nodes {
            c.grid.t_nodes = t;
        }
        let mut problems: Vec<String> = unknown
            .into_iter()
            .map(|k| format!("tolerances.{k}: unknown key for `{experiment}`"))
            .collect();
        problems.extend(c.problems());
        if problems.is_empty() {
            Ok(c)
        } else {
            Err(LabError::Config(problems.join("; ")))
        }
    }

    /// Every schema violation, one entry per offending field.
    pub fn problems(&self) -> Vec<String> {
        let mut p = Vec::new();
        if self.grid.n < 16 {
            p.push(format!("grid.n: {} is below the minimum 16", self.grid.n));
        }
        if self.grid.s_intervals < 16 {
            p.push(format!("grid.s_intervals: {} is below the minimum 16", self.grid.s_intervals));
        }
        if self.grid.t_nodes < 3 {
            p.push(format!("grid.t_nodes: {} is below the minimum 3", self.grid.t_nodes));
        }
        if self.k_list.is_empty() {
            p.push("k_list: must not be empty".into());
        }
        if let Some(k) = self.k_list.iter().find(|k| **k < 3) {
            p.push(format!("k_list: level {k} is below the minimum 3"));
        }
        let min_corpus = self.experiment.min_corpus_size();
        if self.corpus_size < min_corpus {
            p.push(format!("corpus_size: {} is below the minimum {min_corpus}", self.corpus_size));
        }
        if self.experiment == Experiment::Convexity
            && (self.grid.n % 4 != 0 || self.grid.n < 64 || (self.grid.t_nodes - 1) % 4 != 0 || self.grid.t_nodes < 5)
        {
            p.push(format!(
                "grid: the refinement ladder needs n a multiple of 4 and at least 64, and t_nodes − 1 a multiple of 4 (got n = {}, t_nodes = {})",
                self.grid.n, self.grid.t_nodes
            ));
        }
        for (k, v) in &self.tolerances {
            if !(v.is_finite() && *v > 0.0) {
                p.push(format!("tolerances.{k}: {v} is not a positive number"));
            }
        }
        p
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.problems();
        if p.is_empty() {
            Ok(())
        } else {
            Err(LabError::Config(p.join("; ")))
        }
    }

    /// Tolerance by key; the key set is fixed per experiment.
    pub fn tol(&self, key: &str) -> f64 {
        *self
            .tolerances
            .get(key)
            .unwrap_or_else(|| panic!("no tolerance `{key}` for {}", self.experiment))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
            let json = serde_json::to_string(&e).unwrap();
            assert_eq!(json, format!("\"{}\"", e.name()));
        }
        assert!(matches!("nope".parse::<Experiment>(), Err(LabError::Config(_))));
    }

    #[test]
    fn every_criterion_has_one_experiment() {
        let mut all: Vec<u8> = Experiment::ALL.iter().flat_map(|e| e.criteria().iter().copied()).collect();
        all.sort_unstable();
        assert_eq!(all, (1..=15).collect::<Vec<u8>>());
    }

    #[test]
    fn empty_k_list_is_a_schema_error() {
        let o = Overrides {
            k_list: Some(parse_k_list("").unwrap()),
            ..Overrides::default()
        };
        match ExperimentConfig::resolve(Experiment::BergmanTv, &ConfigFile::default(), &o) {
            Err(LabError::Config(m)) => assert!(m.contains("k_list"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn layering_and_offending_fields() {
        let file = ConfigFile::from_json(r#"{"grid": {"n": 64}, "seed": 3, "tolerances": {"mass": 1e-6}}"#).unwrap();
        let o = Overrides {
            seed: Some(9),
            tolerances: vec![parse_tolerance_override("fs_tv64=2e-8").unwrap()],
            ..Overrides::default()
        };
        let c = ExperimentConfig::resolve(Experiment::BergmanTv, &file, &o).unwrap();
        assert_eq!((c.grid.n, c.seed), (64, 9));
        assert_eq!(c.tol("mass"), 1e-6);
        assert_eq!(c.tol("fs_tv64"), 2e-8);

        let bad = ConfigFile::from_json(r#"{"grid": {"n": 4, "t_nodes": 1}, "tolerances": {"bogus": 1.0, "mass": -1}}"#).unwrap();
        let m = ExperimentConfig::resolve(Experiment::BergmanTv, &bad, &Overrides::default())
            .unwrap_err()
            .to_string();
        for field in ["grid.n", "grid.t_nodes", "tolerances.bogus", "tolerances.mass"] {
            assert!(m.contains(field), "{m}");
        }
        assert!(ConfigFile::from_json(r#"{"grid_n": 4}"#).is_err());
        assert!(parse_tolerance_override("mass").is_err());
        assert!(parse_k_list("8,x").is_err());
    }
}
