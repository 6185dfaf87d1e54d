//! Experiment configs, the batch driver and the seeded corpus.
//!
//! Each experiment writes CSVs, a matplotlib script per figure and `manifest.json` into
//! its output directory, and passes iff every asserted tolerance holds.

mod config;
mod corpus;
mod run;
mod scans;

pub use config::{
    parse_k_list, parse_tolerance_override, ConfigFile, Experiment, ExperimentConfig, GridConfig, Overrides,
    PartialGrid,
};
pub use corpus::{
    corpus_from_json, corpus_pairs, corpus_to_json, generate_corpus, glued_profile, random_bump, write_corpus,
    GLUED_COEFF,
};
pub use run::{run, Check, Comparison, Plot, RunReport, Sink, MANIFEST_VERSION};
pub use scans::{skew_twist, FS_TV64_LOCKED, PERTURBATION_S};
