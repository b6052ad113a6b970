use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dense::{dense_run_circuit, project_parity, reconstruct, PauliGenerators, PauliSum};
use crate::error::Result;
use crate::fermion::{generator_2cd, generator_cd, run_circuit, CircuitEvaluator};
use crate::model::{
    make_open_random, make_open_uniform, make_ring_uniform, params_per_step, AngleSchedule, Boundary, ChainSpec,
    Variant, ALPHA,
};

pub const ENERGY_TOL: f64 = 1e-9;
pub const COMMUTATOR_TOL: f64 = 1e-10;

/// Negative controls for the suite itself.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Corruption {
    #[default]
    None,
    /// Flip the sign of the first-order generator on the fermion side.
    FlipCd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub check: String,
    pub n: usize,
    pub chain: String,
    pub variant: Option<Variant>,
    pub angles: Vec<f64>,
    pub error: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub energy_checks: usize,
    pub commutator_checks: usize,
    pub max_energy_diff: f64,
    pub max_commutator_diff: f64,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn ring_random(n: usize, seed: u64) -> Result<ChainSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ChainSpec::new(n, Boundary::Periodic, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
}

fn chain_name(spec: &ChainSpec) -> String {
    let kind = match (spec.boundary(), spec.is_uniform()) {
        (Boundary::Periodic, true) => "ring-uniform",
        (Boundary::Periodic, false) => "ring-random",
        (Boundary::Open, true) => "open-uniform",
        (Boundary::Open, false) => "open-random",
    };
    match spec.seed() {
        Some(s) => format!("{kind}(seed {s})"),
        None => kind.to_string(),
    }
}

/// Largest coefficient of `a − b`, restricted to the initial parity sector
/// on rings.
fn operator_diff(spec: &ChainSpec, a: &PauliSum, b: &PauliSum) -> f64 {
    let diff = a.add(&b.scaled(Complex64::from(-1.0)));
    match spec.boundary() {
        Boundary::Open => diff.max_coeff(),
        Boundary::Periodic => {
            let n = spec.n_sites();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            project_parity(&diff, n, sign).max_coeff()
        }
    }
}

/// Fermion-vs-dense energies over `trials` random schedules per
/// `(n, variant)`, plus dense reconstructions of the commutator generators.
pub fn validate(n_list: &[usize], trials: usize, seed: u64, corruption: Corruption) -> Result<ValidationReport> {
    let mut report = ValidationReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &n in n_list {
        let chains = [
            make_ring_uniform(n)?,
            make_open_uniform(n)?,
            make_open_random(n, seed.wrapping_add(n as u64))?,
        ];
        let evaluators = chains.iter().map(CircuitEvaluator::new).collect::<Result<Vec<_>>>()?;
        for variant in Variant::ALL {
            for trial in 0..trials {
                let which = trial % chains.len();
                let spec = &chains[which];
                let p = rng.random_range(1..=3);
                let values: Vec<f64> =
                    (0..p * params_per_step(variant)).map(|_| rng.random_range(-1.0..1.0)).collect();
                let schedule = AngleSchedule::from_flat(variant, p, values.clone())?;
                let fermion_schedule = match (corruption, variant) {
                    (Corruption::FlipCd, Variant::QaoaCd | Variant::Qaoa2Cd) => {
                        let w = params_per_step(variant);
                        let mut v = values.clone();
                        v.iter_mut().skip(ALPHA).step_by(w).for_each(|a| *a = -*a);
                        AngleSchedule::from_flat(variant, p, v)?
                    }
                    _ => schedule.clone(),
                };
                let dense = dense_run_circuit(spec, &schedule)?;
                let fast = evaluators[which].energy(&fermion_schedule)?;
                let nambu = run_circuit(spec, &fermion_schedule)?;
                let err = (fast - dense).abs().max((nambu - dense).abs());
                report.energy_checks += 1;
                report.max_energy_diff = report.max_energy_diff.max(err);
                if !(err <= ENERGY_TOL) {
                    report.violations.push(Violation {
                        check: "energy".into(),
                        n,
                        chain: chain_name(spec),
                        variant: Some(variant),
                        angles: values,
                        error: err,
                    });
                }
            }
        }
        if trials == 0 {
            continue;
        }
        let comm_chains = [
            make_ring_uniform(n)?,
            ring_random(n, seed.wrapping_add(n as u64))?,
            make_open_uniform(n)?,
            make_open_random(n, seed.wrapping_add(n as u64))?,
        ];
        for spec in &comm_chains {
            let pauli = PauliGenerators::new(spec);
            let cd_sign = if corruption == Corruption::FlipCd { -1.0 } else { 1.0 };
            // [H_X, H_T] = i G_cd
            let cd = reconstruct(&generator_cd(spec).to_form()).scaled(Complex64::new(0.0, cd_sign));
            let (xxt, txt) = generator_2cd(spec);
            let checks = [
                ("commutator-cd", cd, &pauli.comm),
                ("commutator-xxt", reconstruct(&xxt.to_form()), &pauli.xxt),
                ("commutator-txt", reconstruct(&txt.to_form()), &pauli.txt),
            ];
            for (name, built, symbolic) in checks {
                let err = operator_diff(spec, &built, symbolic);
                report.commutator_checks += 1;
                report.max_commutator_diff = report.max_commutator_diff.max(err);
                if !(err <= COMMUTATOR_TOL) {
                    report.violations.push(Violation {
                        check: name.into(),
                        n,
                        chain: chain_name(spec),
                        variant: None,
                        angles: Vec::new(),
                        error: err,
                    });
                }
            }
        }
    }
    Ok(report)
}
