use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::RunRecord;
use crate::analytics::threshold_crossing;
use crate::model::Variant;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub variant: Variant,
    pub p: usize,
    pub n_p: usize,
    pub mean_residual: f64,
    /// Sample deviation (`n − 1`); zero for a single record.
    pub std_residual: f64,
    pub count: usize,
    /// Set when `count < 2` and the deviation is undefined.
    pub single: bool,
}

/// Mean and sample deviation of the residual over instances, per
/// `(variant, p)`. Failed runs are skipped.
pub fn ensemble_stats(records: &[RunRecord]) -> Vec<StatsRow> {
    let mut groups: BTreeMap<(Variant, usize), (usize, Vec<f64>)> = BTreeMap::new();
    for r in records {
        if let Some(res) = r.residual {
            groups.entry((r.variant, r.p)).or_insert((r.n_p, Vec::new())).1.push(res);
        }
    }
    groups
        .into_iter()
        .map(|((variant, p), (n_p, xs))| {
            let (mean, std) = mean_std(&xs);
            StatsRow {
                variant,
                p,
                n_p,
                mean_residual: mean,
                std_residual: std,
                count: xs.len(),
                single: xs.len() < 2,
            }
        })
        .collect()
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterRow {
    pub variant: Variant,
    pub n_p: usize,
    pub p: usize,
    pub mean_residual: f64,
    pub std_residual: f64,
    pub count: usize,
}

/// The ensemble statistics keyed by `(variant, N_p)`.
pub fn reindex_by_parameters(records: &[RunRecord]) -> Vec<ParameterRow> {
    let mut rows: Vec<ParameterRow> = ensemble_stats(records)
        .into_iter()
        .map(|s| ParameterRow {
            variant: s.variant,
            n_p: s.n_p,
            p: s.p,
            mean_residual: s.mean_residual,
            std_residual: s.std_residual,
            count: s.count,
        })
        .collect();
    rows.sort_by_key(|r| (r.variant, r.n_p));
    rows
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingRow {
    pub variant: Variant,
    pub threshold: f64,
    /// First depth where the mean residual is at most the threshold.
    pub mean_curve_crossing: Option<usize>,
    /// Average of the per-instance crossings, over instances that cross.
    pub instance_mean_crossing: Option<f64>,
    pub instances_crossed: usize,
    pub instances: usize,
}

pub fn threshold_crossings(records: &[RunRecord], threshold: f64) -> Vec<CrossingRow> {
    let stats = ensemble_stats(records);
    let mut by_instance: BTreeMap<Variant, BTreeMap<usize, Vec<(usize, f64)>>> = BTreeMap::new();
    for r in records {
        if let Some(res) = r.residual {
            by_instance
                .entry(r.variant)
                .or_default()
                .entry(r.instance_id)
                .or_default()
                .push((r.p, res));
        }
    }
    by_instance
        .into_iter()
        .map(|(variant, instances)| {
            let mean_curve: Vec<f64> = stats
                .iter()
                .filter(|s| s.variant == variant)
                .map(|s| s.mean_residual)
                .collect();
            let crossings: Vec<usize> = instances
                .values()
                .filter_map(|runs| {
                    let mut runs = runs.clone();
                    runs.sort_by_key(|r| r.0);
                    runs.iter().find(|r| r.1 <= threshold).map(|r| r.0)
                })
                .collect();
            CrossingRow {
                variant,
                threshold,
                mean_curve_crossing: threshold_crossing(&mean_curve, threshold),
                instance_mean_crossing: (!crossings.is_empty())
                    .then(|| crossings.iter().sum::<usize>() as f64 / crossings.len() as f64),
                instances_crossed: crossings.len(),
                instances: instances.len(),
            }
        })
        .collect()
}
