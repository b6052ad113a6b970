//! Angle optimization: local search, multi-start and depth sweeps.

mod bfgs;
mod nelder_mead;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::residual_energy;
use crate::error::{Error, Result};
use crate::fermion::CircuitEvaluator;
use crate::model::{params_per_step, spectrum_bounds, AngleSchedule, ChainSpec, SpectrumBounds, Variant};

pub use bfgs::bfgs;
pub use nelder_mead::nelder_mead;

/// Edge length of the initial Nelder–Mead simplex.
pub const SIMPLEX_STEP: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    NelderMead,
    NumericGradientQuasiNewton,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    Interp,
    MultiStart,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub method: Method,
    pub f_tol: f64,
    pub x_tol: f64,
    /// Per start.
    pub max_evals: usize,
    pub restarts: usize,
    /// Half-width of the uniform initialization interval.
    pub init_box: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            method: Method::NelderMead,
            f_tol: 1e-10,
            x_tol: 1e-8,
            max_evals: 20_000,
            restarts: 20,
            init_box: std::f64::consts::FRAC_PI_2,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.f_tol > 0.0 && self.x_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.max_evals == 0 {
            return Err(Error::Config("max_evals must be positive".into()));
        }
        if !(self.init_box >= 0.0 && self.init_box.is_finite()) {
            return Err(Error::Config("init_box must be finite and non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best_angles: AngleSchedule,
    pub best_energy: f64,
    pub residual: f64,
    /// Summed over all starts.
    pub n_evals: usize,
    /// Which candidate start won.
    pub start_index: usize,
    pub converged: bool,
}

/// A scalar function of a flat parameter vector.
pub trait Objective: Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// Central differences unless overridden.
    fn value_and_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let h = 1e-6;
        let mut y = x.to_vec();
        let grad = (0..x.len())
            .map(|i| {
                y[i] = x[i] + h;
                let up = self.value(&y);
                y[i] = x[i] - h;
                let down = self.value(&y);
                y[i] = x[i];
                (up - down) / (2.0 * h)
            })
            .collect();
        (self.value(x), grad)
    }
}

/// Outcome of one local search.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
}

struct CircuitObjective<'a> {
    evaluator: &'a CircuitEvaluator,
    variant: Variant,
    steps: usize,
}

impl CircuitObjective<'_> {
    fn schedule(&self, x: &[f64]) -> AngleSchedule {
        AngleSchedule::from_flat(self.variant, self.steps, x.to_vec()).expect("dimension fixed at construction")
    }
}

impl Objective for CircuitObjective<'_> {
    fn dim(&self) -> usize {
        self.steps * params_per_step(self.variant)
    }

    fn value(&self, x: &[f64]) -> f64 {
        if x.iter().any(|v| !v.is_finite()) {
            return f64::INFINITY;
        }
        self.evaluator.energy(&self.schedule(x)).expect("dimension fixed at construction")
    }

    fn value_and_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        self.evaluator
            .energy_and_gradient(&self.schedule(x))
            .expect("dimension fixed at construction")
    }
}

/// A chain with its evaluator and spectrum bounds, reused across searches.
#[derive(Clone, Debug)]
pub struct Problem {
    spec: ChainSpec,
    evaluator: CircuitEvaluator,
    bounds: SpectrumBounds,
}

impl Problem {
    pub fn new(spec: &ChainSpec) -> Result<Self> {
        Ok(Problem {
            spec: spec.clone(),
            evaluator: CircuitEvaluator::new(spec)?,
            bounds: spectrum_bounds(spec),
        })
    }

    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }

    pub fn bounds(&self) -> SpectrumBounds {
        self.bounds
    }

    pub fn evaluator(&self) -> &CircuitEvaluator {
        &self.evaluator
    }

    pub fn energy(&self, schedule: &AngleSchedule) -> Result<f64> {
        self.evaluator.energy(schedule)
    }

    /// Local search from `init`.
    pub fn minimize(&self, init: &AngleSchedule, config: &OptimizerConfig) -> Result<OptimizationResult> {
        config.validate()?;
        let obj = CircuitObjective {
            evaluator: &self.evaluator,
            variant: init.variant(),
            steps: init.steps(),
        };
        let local = match config.method {
            Method::NelderMead => nelder_mead(
                &obj,
                init.values(),
                SIMPLEX_STEP,
                config.f_tol,
                config.x_tol,
                config.max_evals,
            ),
            Method::NumericGradientQuasiNewton => {
                bfgs(&obj, init.values(), config.f_tol, config.x_tol, config.max_evals)
            }
        };
        Ok(OptimizationResult {
            residual: residual_energy(local.f, self.bounds)?,
            best_angles: AngleSchedule::from_flat(init.variant(), init.steps(), local.x)?,
            best_energy: local.f,
            n_evals: local.evals,
            start_index: 0,
            converged: local.converged,
        })
    }

    /// Best of independent searches; ties go to the lowest index.
    pub fn multistart(&self, inits: &[AngleSchedule], config: &OptimizerConfig) -> Result<OptimizationResult> {
        if inits.is_empty() {
            return Err(Error::Config("no starting points".into()));
        }
        let runs: Vec<OptimizationResult> = inits
            .par_iter()
            .map(|init| self.minimize(init, config))
            .collect::<Result<_>>()?;
        let total: usize = runs.iter().map(|r| r.n_evals).sum();
        let (index, best) = runs
            .into_iter()
            .enumerate()
            .reduce(|a, b| if b.1.best_energy < a.1.best_energy { b } else { a })
            .unwrap();
        Ok(OptimizationResult {
            n_evals: total,
            start_index: index,
            ..best
        })
    }

    /// Depth sweep `p = 1 … p_max`.
    ///
    /// Every depth after the first also tries the previous optimum with a
    /// trailing identity step, so the best energy never increases with `p`;
    /// MultiStart additionally tries the INTERP guess from that optimum.
    pub fn sweep_depth(
        &self,
        variant: Variant,
        p_max: usize,
        strategy: Strategy,
        config: &OptimizerConfig,
    ) -> Result<Vec<Result<OptimizationResult>>> {
        if p_max == 0 {
            return Err(Error::Config("p_max must be at least 1".into()));
        }
        let mut sweep = self.sweep(variant, strategy, config)?;
        Ok((0..p_max).map(|_| sweep.next_depth()).collect())
    }

    /// Depth-by-depth form of [`Problem::sweep_depth`].
    pub fn sweep<'a>(
        &'a self,
        variant: Variant,
        strategy: Strategy,
        config: &'a OptimizerConfig,
    ) -> Result<DepthSweep<'a>> {
        config.validate()?;
        Ok(DepthSweep {
            problem: self,
            variant,
            strategy,
            config,
            p: 0,
            prev: None,
        })
    }
}

pub struct DepthSweep<'a> {
    problem: &'a Problem,
    variant: Variant,
    strategy: Strategy,
    config: &'a OptimizerConfig,
    p: usize,
    prev: Option<AngleSchedule>,
}

impl DepthSweep<'_> {
    /// Depth of the next call to [`DepthSweep::next_depth`].
    pub fn depth(&self) -> usize {
        self.p + 1
    }

    pub fn next_depth(&mut self) -> Result<OptimizationResult> {
        self.p += 1;
        let (p, config) = (self.p, self.config);
        let mut rng = start_rng(config.seed, p);
        let mut inits = Vec::new();
        match (self.strategy, &self.prev) {
            (Strategy::Interp, Some(best)) => {
                inits.push(interp_extend(best));
                inits.push(random_schedule(self.variant, p, config.init_box, &mut rng));
            }
            _ => {
                for _ in 0..config.restarts.max(1) {
                    inits.push(random_schedule(self.variant, p, config.init_box, &mut rng));
                }
            }
        }
        if let Some(best) = &self.prev {
            if self.strategy == Strategy::MultiStart {
                inits.push(interp_extend(best));
            }
            inits.push(pad_identity_step(best));
        }
        let result = self.problem.multistart(&inits, config);
        if let Ok(r) = &result {
            self.prev = Some(r.best_angles.clone());
        }
        result
    }
}

pub fn minimize(
    spec: &ChainSpec,
    variant: Variant,
    p: usize,
    init: &AngleSchedule,
    config: &OptimizerConfig,
) -> Result<OptimizationResult> {
    if init.variant() != variant || init.steps() != p {
        return Err(Error::ScheduleShape {
            expected_rows: p,
            expected_width: params_per_step(variant),
            got: format!("{} steps of {}", init.steps(), init.variant()),
        });
    }
    Problem::new(spec)?.minimize(init, config)
}

pub fn sweep_depth(
    spec: &ChainSpec,
    variant: Variant,
    p_max: usize,
    strategy: Strategy,
    config: &OptimizerConfig,
) -> Result<Vec<Result<OptimizationResult>>> {
    Problem::new(spec)?.sweep_depth(variant, p_max, strategy, config)
}

/// Random-start stream for depth `p`.
pub fn start_rng(seed: u64, p: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(p as u64);
    rng
}

/// Angles uniform in `[−half_width, half_width]`.
pub fn random_schedule(variant: Variant, p: usize, half_width: f64, rng: &mut impl Rng) -> AngleSchedule {
    let n = p * params_per_step(variant);
    let values = if half_width > 0.0 {
        (0..n).map(|_| rng.random_range(-half_width..=half_width)).collect()
    } else {
        vec![0.0; n]
    };
    AngleSchedule::from_flat(variant, p, values).expect("shape built from variant")
}

/// Append an all-zero step, which leaves the circuit unchanged.
pub fn pad_identity_step(s: &AngleSchedule) -> AngleSchedule {
    let mut values = s.values().to_vec();
    values.extend(std::iter::repeat_n(0.0, s.width()));
    AngleSchedule::from_flat(s.variant(), s.steps() + 1, values).expect("one more full row")
}

/// INTERP guess at depth `p + 1`, applied to each parameter family.
pub fn interp_extend(prev: &AngleSchedule) -> AngleSchedule {
    let p = prev.steps();
    let w = prev.width();
    let pf = p as f64;
    let at = |i: usize, f: usize| if i == 0 || i > p { 0.0 } else { prev.row(i - 1)[f] };
    let mut values = Vec::with_capacity((p + 1) * w);
    for i in 1..=p + 1 {
        for f in 0..w {
            let lo = (i - 1) as f64 / pf;
            let hi = (p + 1 - i) as f64 / pf;
            values.push(lo * at(i - 1, f) + hi * at(i, f));
        }
    }
    AngleSchedule::from_flat(prev.variant(), p + 1, values).expect("one more full row")
}

/// Grid of a depth-one landscape; both ranges include their endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandscapeGrid {
    pub beta_range: (f64, f64),
    pub gamma_range: (f64, f64),
    pub n_beta: usize,
    pub n_gamma: usize,
}

impl LandscapeGrid {
    pub fn betas(&self) -> Vec<f64> {
        linspace(self.beta_range, self.n_beta)
    }

    pub fn gammas(&self) -> Vec<f64> {
        linspace(self.gamma_range, self.n_gamma)
    }
}

fn linspace((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Cost on a `(β, γ)` grid, rows indexed by β.
///
/// `fixed` supplies the remaining free angles: `α` for QAOA-CD and
/// `(α, δ, ζ)` for QAOA-2CD; constrained variants derive them per point.
pub fn landscape_grid(
    spec: &ChainSpec,
    variant: Variant,
    p: usize,
    grid: &LandscapeGrid,
    fixed: Option<&[f64]>,
) -> Result<DMatrix<f64>> {
    if p != 1 {
        return Err(Error::Config(format!("landscapes are depth one only, got p = {p}")));
    }
    if grid.n_beta == 0 || grid.n_gamma == 0 {
        return Err(Error::Config("landscape grid is empty".into()));
    }
    let extra = params_per_step(variant) - 2;
    let fixed = fixed.unwrap_or(&[]);
    if fixed.len() != extra {
        return Err(Error::Config(format!(
            "{variant} needs {extra} fixed angles, got {}",
            fixed.len()
        )));
    }
    let evaluator = CircuitEvaluator::new(spec)?;
    let (betas, gammas) = (grid.betas(), grid.gammas());
    let cells: Vec<(usize, usize)> = (0..betas.len())
        .flat_map(|i| (0..gammas.len()).map(move |j| (i, j)))
        .collect();
    let values: Vec<f64> = cells
        .par_iter()
        .map(|&(i, j)| {
            let mut row = vec![gammas[j], betas[i]];
            row.extend_from_slice(fixed);
            evaluator.energy(&AngleSchedule::from_flat(variant, 1, row)?)
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_row_slice(betas.len(), gammas.len(), &values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{cost_p1_open, cost_p1_ring};
    use crate::model::{make_open_uniform, make_ring_uniform};
    use std::f64::consts::PI;

    fn qaoa(rows: &[Vec<f64>]) -> AngleSchedule {
        AngleSchedule::from_rows(Variant::Qaoa, rows).unwrap()
    }

    #[test]
    fn interp_examples() {
        let g = interp_extend(&qaoa(&[vec![0.3, 0.7]]));
        assert_eq!(g.values(), &[0.3, 0.7, 0.3, 0.7]);
        let g = interp_extend(&qaoa(&[vec![1.0, 2.0], vec![3.0, 4.0]]));
        assert_eq!(g.family(0), vec![1.0, 2.0, 3.0]);
        assert_eq!(g.family(1), vec![2.0, 3.0, 4.0]);
        let z = interp_extend(&AngleSchedule::zeros(Variant::Qaoa2Cd, 4).unwrap());
        assert_eq!(z, AngleSchedule::zeros(Variant::Qaoa2Cd, 5).unwrap());
    }

    #[test]
    fn padded_step_keeps_energy() {
        let spec = make_open_uniform(8).unwrap();
        let problem = Problem::new(&spec).unwrap();
        let mut rng = start_rng(3, 2);
        let s = random_schedule(Variant::Qaoa2Cd, 2, 1.0, &mut rng);
        let e = problem.energy(&s).unwrap();
        assert!((problem.energy(&pad_identity_step(&s)).unwrap() - e).abs() < 1e-12);
    }

    #[test]
    fn ring_p1_optimum() {
        let spec = make_ring_uniform(10).unwrap();
        let init = qaoa(&[vec![0.35, 0.42]]);
        for method in [Method::NelderMead, Method::NumericGradientQuasiNewton] {
            let cfg = OptimizerConfig { method, ..Default::default() };
            let r = minimize(&spec, Variant::Qaoa, 1, &init, &cfg).unwrap();
            assert!((r.best_energy + 5.0).abs() < 1e-8, "{method:?}: {}", r.best_energy);
            assert!(r.converged);
        }
    }

    #[test]
    fn zero_budget_returns_initial_energy() {
        let spec = make_open_uniform(6).unwrap();
        for v in Variant::ALL {
            let cfg = OptimizerConfig {
                max_evals: 1,
                init_box: 0.0,
                ..Default::default()
            };
            let mut rng = start_rng(0, 3);
            let init = random_schedule(v, 3, cfg.init_box, &mut rng);
            let r = minimize(&spec, v, 3, &init, &cfg).unwrap();
            assert_eq!(r.best_energy, 0.0);
            assert_eq!(r.n_evals, 1);
            assert!(!r.converged);
        }
    }

    #[test]
    fn shape_mismatch_rejected() {
        let spec = make_open_uniform(6).unwrap();
        let init = AngleSchedule::zeros(Variant::Qaoa, 2).unwrap();
        let cfg = OptimizerConfig::default();
        assert!(minimize(&spec, Variant::Qaoa, 3, &init, &cfg).is_err());
        assert!(minimize(&spec, Variant::QaoaCd, 2, &init, &cfg).is_err());
        let bad = OptimizerConfig { f_tol: 0.0, ..Default::default() };
        assert!(minimize(&spec, Variant::Qaoa, 2, &init, &bad).is_err());
    }

    #[test]
    fn multistart_is_deterministic_and_picks_lowest() {
        let spec = make_open_uniform(6).unwrap();
        let problem = Problem::new(&spec).unwrap();
        let cfg = OptimizerConfig {
            method: Method::NumericGradientQuasiNewton,
            ..Default::default()
        };
        let mut rng = start_rng(9, 2);
        let inits: Vec<_> = (0..4).map(|_| random_schedule(Variant::QaoaCd, 2, PI / 2.0, &mut rng)).collect();
        let a = problem.multistart(&inits, &cfg).unwrap();
        let b = problem.multistart(&inits, &cfg).unwrap();
        assert_eq!(a, b);
        for (i, init) in inits.iter().enumerate() {
            let r = problem.minimize(init, &cfg).unwrap();
            assert!(a.best_energy <= r.best_energy);
            if r.best_energy == a.best_energy {
                assert!(a.start_index <= i);
            }
        }
        // duplicated starts tie; the first wins
        let twins = vec![inits[0].clone(), inits[0].clone()];
        assert_eq!(problem.multistart(&twins, &cfg).unwrap().start_index, 0);
    }

    #[test]
    fn sweep_is_monotone() {
        let spec = make_open_uniform(8).unwrap();
        let cfg = OptimizerConfig {
            method: Method::NumericGradientQuasiNewton,
            restarts: 3,
            seed: 5,
            ..Default::default()
        };
        for strategy in [Strategy::Interp, Strategy::MultiStart] {
            let results = sweep_depth(&spec, Variant::Qaoa, 4, strategy, &cfg).unwrap();
            let energies: Vec<f64> = results.into_iter().map(|r| r.unwrap().best_energy).collect();
            for w in energies.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "{strategy:?}: {energies:?}");
            }
        }
    }

    #[test]
    fn ring_landscape_matches_closed_form() {
        let spec = make_ring_uniform(10).unwrap();
        let grid = LandscapeGrid {
            beta_range: (0.0, PI / 2.0),
            gamma_range: (-PI / 4.0, PI / 4.0),
            n_beta: 9,
            n_gamma: 7,
        };
        let m = landscape_grid(&spec, Variant::Qaoa, 1, &grid, None).unwrap();
        for (i, b) in grid.betas().into_iter().enumerate() {
            for (j, g) in grid.gammas().into_iter().enumerate() {
                assert!((m[(i, j)] - cost_p1_ring(10, b, g)).abs() < 1e-10);
            }
        }
        assert!(m.row(0).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn open_landscape_matches_closed_form() {
        let spec = make_open_uniform(20).unwrap();
        let grid = LandscapeGrid {
            beta_range: (-0.5, 0.9),
            gamma_range: (0.1, 1.3),
            n_beta: 5,
            n_gamma: 6,
        };
        let m = landscape_grid(&spec, Variant::Qaoa, 1, &grid, None).unwrap();
        for (i, b) in grid.betas().into_iter().enumerate() {
            for (j, g) in grid.gammas().into_iter().enumerate() {
                assert!((m[(i, j)] - cost_p1_open(&spec, b, g).unwrap()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn landscape_rejections() {
        let spec = make_ring_uniform(6).unwrap();
        let grid = LandscapeGrid {
            beta_range: (0.0, 1.0),
            gamma_range: (0.0, 1.0),
            n_beta: 3,
            n_gamma: 3,
        };
        assert!(landscape_grid(&spec, Variant::Qaoa, 2, &grid, None).is_err());
        assert!(landscape_grid(&spec, Variant::QaoaCd, 1, &grid, None).is_err());
        assert!(landscape_grid(&spec, Variant::QaoaCd, 1, &grid, Some(&[0.1])).is_ok());
        assert!(landscape_grid(&spec, Variant::QaoaCd2p, 1, &grid, None).is_ok());
        let empty = LandscapeGrid { n_beta: 0, ..grid };
        assert!(landscape_grid(&spec, Variant::Qaoa, 1, &empty, None).is_err());
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = OptimizerConfig {
            method: Method::NumericGradientQuasiNewton,
            seed: 77,
            ..Default::default()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<OptimizerConfig>(&text).unwrap(), cfg);
        let partial: OptimizerConfig = serde_json::from_str(r#"{"restarts": 3}"#).unwrap();
        assert_eq!(partial.restarts, 3);
        assert_eq!(partial.max_evals, 20_000);
    }
}
