//! Experiment driver: instance ensembles, depth sweeps, statistics and
//! persisted tables.

mod landscape;
mod output;
mod stats;
mod validate;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{make_open_random, make_open_uniform, make_ring_uniform, params_per_step, ChainSpec, Variant};
use crate::optimizer::{OptimizerConfig, Problem, Strategy};

pub use landscape::{emit_landscape, landscape_tables, LandscapeConfig, LandscapeTable};
pub use output::{read_records, write_outputs, write_records_csv, Manifest, OutputFiles};
pub use stats::{
    ensemble_stats, reindex_by_parameters, threshold_crossings, CrossingRow, ParameterRow, StatsRow,
};
pub use validate::{validate, Corruption, ValidationReport, Violation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpecFamily {
    RingUniform,
    OpenUniform,
    OpenRandom,
}

impl SpecFamily {
    pub fn build(self, n: usize, seed: u64) -> Result<ChainSpec> {
        match self {
            SpecFamily::RingUniform => make_ring_uniform(n),
            SpecFamily::OpenUniform => make_open_uniform(n),
            SpecFamily::OpenRandom => make_open_random(n, seed),
        }
    }

    /// Interp for uniform chains, MultiStart for random couplings.
    pub fn default_strategy(self) -> Strategy {
        match self {
            SpecFamily::OpenRandom => Strategy::MultiStart,
            _ => Strategy::Interp,
        }
    }
}

impl std::str::FromStr for SpecFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "ringuniform" | "ring" => Ok(SpecFamily::RingUniform),
            "openuniform" | "open" => Ok(SpecFamily::OpenUniform),
            "openrandom" | "random" => Ok(SpecFamily::OpenRandom),
            _ => Err(Error::Config(format!("unknown family '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub spec_family: SpecFamily,
    pub n_sites: usize,
    pub m_instances: usize,
    pub base_seed: u64,
    pub variants: Vec<Variant>,
    pub p_max: usize,
    /// Per-variant depth limits below `p_max`.
    pub p_max_per_variant: BTreeMap<Variant, usize>,
    /// Missing entries use the family default.
    pub strategy: BTreeMap<Variant, Strategy>,
    pub n_starts: usize,
    pub threshold: f64,
    pub optimizer: OptimizerConfig,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            spec_family: SpecFamily::RingUniform,
            n_sites: 10,
            m_instances: 1,
            base_seed: 0,
            variants: vec![Variant::Qaoa],
            p_max: 5,
            p_max_per_variant: BTreeMap::new(),
            strategy: BTreeMap::new(),
            n_starts: 20,
            threshold: 1e-2,
            optimizer: OptimizerConfig::default(),
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_instances == 0 {
            return Err(Error::Config("m_instances must be at least 1".into()));
        }
        if self.m_instances > 1 && self.spec_family != SpecFamily::OpenRandom {
            return Err(Error::Config("uniform families have a single instance".into()));
        }
        if self.p_max == 0 {
            return Err(Error::Config("p_max must be at least 1".into()));
        }
        if self.variants.is_empty() {
            return Err(Error::Config("no variants selected".into()));
        }
        if self.n_starts == 0 {
            return Err(Error::Config("n_starts must be at least 1".into()));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::Config("threshold must be positive".into()));
        }
        if self.p_max_per_variant.values().any(|&p| p == 0) {
            return Err(Error::Config("per-variant p_max must be at least 1".into()));
        }
        self.optimizer.validate()?;
        self.spec_family.build(self.n_sites, self.base_seed).map(|_| ())
    }

    pub fn strategy_for(&self, variant: Variant) -> Strategy {
        self.strategy
            .get(&variant)
            .copied()
            .unwrap_or_else(|| self.spec_family.default_strategy())
    }

    pub fn p_max_for(&self, variant: Variant) -> usize {
        self.p_max_per_variant
            .get(&variant)
            .map_or(self.p_max, |&p| p.min(self.p_max))
    }

    pub fn instance_seed(&self, instance_id: usize) -> u64 {
        self.base_seed.wrapping_add(instance_id as u64)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    BudgetExhausted,
    Failed(String),
}

impl RunStatus {
    pub fn label(&self) -> &str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::BudgetExhausted => "budget_exhausted",
            RunStatus::Failed(_) => "failed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance_id: usize,
    pub variant: Variant,
    pub p: usize,
    pub n_p: usize,
    /// `None` when the run failed.
    pub energy: Option<f64>,
    pub residual: Option<f64>,
    pub n_evals: usize,
    pub seed: u64,
    pub wall_time_ms: f64,
    pub status: RunStatus,
    pub angles: Option<Vec<f64>>,
}

/// Sweep every (instance, variant) pair; records sorted by
/// `(instance_id, variant, p)`. Persists the tables when `output_dir` is set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let tasks: Vec<(usize, Variant)> = (0..config.m_instances)
        .flat_map(|i| config.variants.iter().map(move |&v| (i, v)))
        .collect();
    let mut records: Vec<RunRecord> = tasks
        .par_iter()
        .map(|&(id, variant)| run_task(config, id, variant))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    records.sort_by_key(|r| (r.instance_id, r.variant, r.p));
    if let Some(dir) = &config.output_dir {
        write_outputs(config, &records, dir)?;
    }
    Ok(records)
}

fn run_task(config: &ExperimentConfig, id: usize, variant: Variant) -> Result<Vec<RunRecord>> {
    let seed = config.instance_seed(id);
    let spec = config.spec_family.build(config.n_sites, seed)?;
    let problem = Problem::new(&spec)?;
    let opt = OptimizerConfig {
        restarts: config.n_starts,
        seed,
        ..config.optimizer.clone()
    };
    let mut sweep = problem.sweep(variant, config.strategy_for(variant), &opt)?;
    let mut out = Vec::new();
    for p in 1..=config.p_max_for(variant) {
        let start = Instant::now();
        let result = sweep.next_depth();
        let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        let base = RunRecord {
            instance_id: id,
            variant,
            p,
            n_p: p * params_per_step(variant),
            energy: None,
            residual: None,
            n_evals: 0,
            seed,
            wall_time_ms,
            status: RunStatus::Ok,
            angles: None,
        };
        out.push(match result {
            Ok(r) => RunRecord {
                energy: Some(r.best_energy),
                residual: Some(r.residual),
                n_evals: r.n_evals,
                status: if r.converged {
                    RunStatus::Ok
                } else {
                    RunStatus::BudgetExhausted
                },
                angles: Some(r.best_angles.into_values()),
                ..base
            },
            Err(e) => RunRecord {
                status: RunStatus::Failed(e.to_string()),
                ..base
            },
        });
    }
    Ok(out)
}
