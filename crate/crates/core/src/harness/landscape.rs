use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::output::{num, write_csv};
use super::SpecFamily;
use crate::error::{Error, Result};
use crate::model::{params_per_step, Variant, ALPHA};
use crate::optimizer::{landscape_grid, random_schedule, start_rng, LandscapeGrid, OptimizerConfig, Problem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandscapeConfig {
    pub spec_family: SpecFamily,
    pub n_sites: usize,
    pub seed: u64,
    /// `QaoaCd2p` or `Qaoa2Cd2p`; compared against its free form.
    pub constrained: Variant,
    pub grid: LandscapeGrid,
    /// Finds the free variant's depth-one optimum.
    pub optimizer: OptimizerConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LandscapeTable {
    pub variant: Variant,
    /// Extra angles held fixed over the grid.
    pub fixed: Vec<f64>,
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
    /// Rows indexed by β.
    pub cost: DMatrix<f64>,
}

/// The constrained grid and the free grid with its extra angles fixed at
/// their depth-one optimum.
pub fn landscape_tables(config: &LandscapeConfig) -> Result<[LandscapeTable; 2]> {
    if !config.constrained.is_constrained() {
        return Err(Error::WrongVariant(config.constrained, "expected a constrained variant"));
    }
    let spec = config.spec_family.build(config.n_sites, config.seed)?;
    let free = config.constrained.free_form();
    let problem = Problem::new(&spec)?;
    let mut rng = start_rng(config.optimizer.seed, 1);
    let inits: Vec<_> = (0..config.optimizer.restarts.max(1))
        .map(|_| random_schedule(free, 1, config.optimizer.init_box, &mut rng))
        .collect();
    let best = problem.multistart(&inits, &config.optimizer)?;
    let fixed = best.best_angles.row(0)[ALPHA..params_per_step(free)].to_vec();
    let table = |variant: Variant, fixed: Vec<f64>| -> Result<LandscapeTable> {
        let extra = (!fixed.is_empty()).then_some(fixed.as_slice());
        Ok(LandscapeTable {
            cost: landscape_grid(&spec, variant, 1, &config.grid, extra)?,
            variant,
            betas: config.grid.betas(),
            gammas: config.grid.gammas(),
            fixed,
        })
    };
    Ok([table(config.constrained, Vec::new())?, table(free, fixed)?])
}

/// Long-format CSV `variant, beta, gamma, cost` holding both grids.
pub fn emit_landscape(config: &LandscapeConfig, path: &Path) -> Result<PathBuf> {
    let tables = landscape_tables(config)?;
    let rows = tables.iter().flat_map(|t| {
        t.betas.iter().enumerate().flat_map(move |(i, b)| {
            t.gammas
                .iter()
                .enumerate()
                .map(move |(j, g)| vec![t.variant.to_string(), num(*b), num(*g), num(t.cost[(i, j)])])
        })
    });
    write_csv(path, &["variant", "beta", "gamma", "cost"], rows)?;
    Ok(path.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::Method;
    use std::f64::consts::PI;

    fn config(n_beta: usize) -> LandscapeConfig {
        LandscapeConfig {
            spec_family: SpecFamily::RingUniform,
            n_sites: 10,
            seed: 0,
            constrained: Variant::QaoaCd2p,
            grid: LandscapeGrid {
                beta_range: (0.0, PI),
                gamma_range: (-PI / 2.0, PI / 2.0),
                n_beta,
                n_gamma: 9,
            },
            optimizer: OptimizerConfig {
                method: Method::NumericGradientQuasiNewton,
                restarts: 4,
                ..Default::default()
            },
        }
    }

    #[test]
    fn free_grid_has_rotation_period() {
        // β and β + π sit on the first and last grid rows
        let [constrained, free] = landscape_tables(&config(5)).unwrap();
        assert_eq!(free.variant, Variant::QaoaCd);
        assert_eq!(free.fixed.len(), 1);
        for j in 0..9 {
            assert!((free.cost[(0, j)] - free.cost[(4, j)]).abs() < 1e-10);
        }
        let gap = (0..9)
            .map(|j| (constrained.cost[(0, j)] - constrained.cost[(4, j)]).abs())
            .fold(0.0, f64::max);
        assert!(gap > 1e-3);
    }

    #[test]
    fn constrained_grid_is_aperiodic_in_gamma() {
        let mut cfg = config(7);
        cfg.grid.gamma_range = (0.3, 0.3 + PI);
        cfg.grid.n_gamma = 2;
        let [constrained, free] = landscape_tables(&cfg).unwrap();
        let shift = |t: &LandscapeTable| (0..7).map(|i| (t.cost[(i, 0)] - t.cost[(i, 1)]).abs()).fold(0.0, f64::max);
        assert!(shift(&free) < 1e-10);
        assert!(shift(&constrained) > 1e-3);
    }

    #[test]
    fn csv_and_rejections() {
        let dir = tempfile::tempdir().unwrap();
        let path = emit_landscape(&config(3), &dir.path().join("grid.csv")).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 * 3 * 9);
        assert!(emit_landscape(&config(0), &dir.path().join("empty.csv")).is_err());
        let mut bad = config(3);
        bad.constrained = Variant::Qaoa;
        assert!(landscape_tables(&bad).is_err());
    }
}
