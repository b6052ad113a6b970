use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::stats::{ensemble_stats, reindex_by_parameters, threshold_crossings};
use super::{ExperimentConfig, RunRecord};
use crate::error::{Error, Result};

/// Seventeen significant digits.
pub(crate) fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

pub(crate) fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputFiles {
    pub records_json: PathBuf,
    pub records_csv: PathBuf,
    pub stats_csv: PathBuf,
    pub by_parameters_csv: PathBuf,
    pub crossings_csv: PathBuf,
    pub manifest: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub library_version: String,
    pub config: ExperimentConfig,
    pub n_records: usize,
    pub files: Vec<String>,
}

pub fn write_records_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    write_csv(
        path,
        &[
            "instance_id",
            "variant",
            "p",
            "n_p",
            "energy",
            "residual",
            "n_evals",
            "seed",
            "wall_time_ms",
            "status",
        ],
        records.iter().map(|r| {
            vec![
                r.instance_id.to_string(),
                r.variant.to_string(),
                r.p.to_string(),
                r.n_p.to_string(),
                opt_num(r.energy),
                opt_num(r.residual),
                r.n_evals.to_string(),
                r.seed.to_string(),
                num(r.wall_time_ms),
                r.status.label().to_string(),
            ]
        }),
    )
}

/// Records, statistics, re-indexed rows, crossings and a manifest.
pub fn write_outputs(config: &ExperimentConfig, records: &[RunRecord], dir: &Path) -> Result<OutputFiles> {
    fs::create_dir_all(dir)?;
    let files = OutputFiles {
        records_json: dir.join("records.json"),
        records_csv: dir.join("records.csv"),
        stats_csv: dir.join("stats.csv"),
        by_parameters_csv: dir.join("by_parameters.csv"),
        crossings_csv: dir.join("crossings.csv"),
        manifest: dir.join("manifest.json"),
    };
    fs::write(&files.records_json, serde_json::to_string_pretty(records)?)?;
    write_records_csv(&files.records_csv, records)?;
    write_csv(
        &files.stats_csv,
        &["variant", "p", "n_p", "mean_residual", "std_residual", "count", "single"],
        ensemble_stats(records).into_iter().map(|s| {
            vec![
                s.variant.to_string(),
                s.p.to_string(),
                s.n_p.to_string(),
                num(s.mean_residual),
                num(s.std_residual),
                s.count.to_string(),
                s.single.to_string(),
            ]
        }),
    )?;
    write_csv(
        &files.by_parameters_csv,
        &["variant", "n_p", "p", "mean_residual", "std_residual", "count"],
        reindex_by_parameters(records).into_iter().map(|r| {
            vec![
                r.variant.to_string(),
                r.n_p.to_string(),
                r.p.to_string(),
                num(r.mean_residual),
                num(r.std_residual),
                r.count.to_string(),
            ]
        }),
    )?;
    write_csv(
        &files.crossings_csv,
        &[
            "variant",
            "threshold",
            "mean_curve_crossing",
            "instance_mean_crossing",
            "instances_crossed",
            "instances",
        ],
        threshold_crossings(records, config.threshold).into_iter().map(|c| {
            vec![
                c.variant.to_string(),
                num(c.threshold),
                c.mean_curve_crossing.map(|p| p.to_string()).unwrap_or_default(),
                opt_num(c.instance_mean_crossing),
                c.instances_crossed.to_string(),
                c.instances.to_string(),
            ]
        }),
    )?;
    let manifest = Manifest {
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        n_records: records.len(),
        files: [
            &files.records_json,
            &files.records_csv,
            &files.stats_csv,
            &files.by_parameters_csv,
            &files.crossings_csv,
        ]
        .iter()
        .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
        .collect(),
    };
    fs::write(&files.manifest, serde_json::to_string_pretty(&manifest)?)?;
    Ok(files)
}

pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::super::{run_experiment, SpecFamily};
    use super::*;
    use crate::model::Variant;
    use crate::optimizer::{Method, OptimizerConfig};

    #[test]
    fn writes_schema_stable_tables() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            spec_family: SpecFamily::OpenUniform,
            n_sites: 6,
            variants: vec![Variant::Qaoa, Variant::QaoaCd],
            p_max: 2,
            n_starts: 2,
            optimizer: OptimizerConfig {
                method: Method::NumericGradientQuasiNewton,
                ..Default::default()
            },
            output_dir: Some(dir.path().to_path_buf()),
            ..Default::default()
        };
        let records = run_experiment(&cfg).unwrap();
        let back = read_records(&dir.path().join("records.json")).unwrap();
        assert_eq!(back, records);
        let csv = fs::read_to_string(dir.path().join("records.csv")).unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "instance_id,variant,p,n_p,energy,residual,n_evals,seed,wall_time_ms,status"
        );
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        let energy = first[4];
        let mantissa = energy.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
        let manifest: Manifest =
            serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest.config, cfg);
        assert_eq!(manifest.n_records, 4);
        for f in ["stats.csv", "by_parameters.csv", "crossings.csv"] {
            assert!(dir.path().join(f).exists());
        }
    }

    #[test]
    fn rerun_from_manifest_reproduces() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            spec_family: SpecFamily::OpenRandom,
            n_sites: 6,
            m_instances: 2,
            base_seed: 3,
            variants: vec![Variant::Qaoa2Cd],
            p_max: 2,
            n_starts: 2,
            optimizer: OptimizerConfig {
                method: Method::NumericGradientQuasiNewton,
                ..Default::default()
            },
            output_dir: Some(dir.path().to_path_buf()),
            ..Default::default()
        };
        let first = run_experiment(&cfg).unwrap();
        let manifest: Manifest =
            serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        let second = run_experiment(&ExperimentConfig { output_dir: None, ..manifest.config }).unwrap();
        for (a, b) in first.iter().zip(&second) {
            assert_eq!(a.angles, b.angles);
            assert!((a.energy.unwrap() - b.energy.unwrap()).abs() <= 1e-12);
        }
    }
}
