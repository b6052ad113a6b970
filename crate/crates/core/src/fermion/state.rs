use nalgebra::DMatrix;
use num_complex::Complex64;

use super::generator::{
    generator_2cd, generator_cd, generator_mixer, generator_target, max_abs, particle_hole_image,
    QuadraticGenerator,
};
use crate::error::{Error, Result};
use crate::model::{expand_constrained, AngleSchedule, ChainSpec, Variant, ALPHA, BETA, DELTA, GAMMA, ZETA};

/// Pure fermionic Gaussian state, `Γ_ij = ⟨Ψ_i Ψ_j†⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    corr: DMatrix<Complex64>,
}

impl GaussianState {
    pub fn from_corr(corr: DMatrix<Complex64>) -> Self {
        assert!(corr.is_square() && corr.nrows() % 2 == 0);
        GaussianState { corr }
    }

    pub fn corr(&self) -> &DMatrix<Complex64> {
        &self.corr
    }

    pub fn n_modes(&self) -> usize {
        self.corr.nrows() / 2
    }

    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.corr - self.corr.adjoint()))
    }

    /// `‖Γ² − Γ‖_max`.
    pub fn purity_error(&self) -> f64 {
        max_abs(&(&self.corr * &self.corr - &self.corr))
    }

    /// `‖Γ + τ_x Γ* τ_x − I‖_max`.
    pub fn anticommutation_error(&self) -> f64 {
        let d = self.corr.nrows();
        max_abs(&(&self.corr + particle_hole_image(&self.corr) - DMatrix::identity(d, d)))
    }

    /// `⟨½ Ψ† M Ψ + offset⟩ = ½ tr M − ½ tr(M Γ) + offset`.
    pub fn expect(&self, gen: &QuadraticGenerator) -> Result<f64> {
        check_dims(gen, self)?;
        let tr_m: Complex64 = gen.matrix.trace();
        let tr_mg: Complex64 = (&gen.matrix * &self.corr).trace();
        Ok(0.5 * tr_m.re - 0.5 * tr_mg.re + gen.offset)
    }
}

fn check_dims(gen: &QuadraticGenerator, state: &GaussianState) -> Result<()> {
    if gen.matrix.nrows() != state.corr.nrows() {
        return Err(Error::DimensionMismatch {
            generator: gen.n_modes(),
            state: state.n_modes(),
        });
    }
    Ok(())
}

/// Every mode occupied: `⟨σ^X_j⟩ = -1`, fermion parity `(-1)^N`.
pub fn initial_state(spec: &ChainSpec) -> GaussianState {
    let n = spec.n_sites();
    let diag = nalgebra::DVector::from_fn(2 * n, |i, _| {
        Complex64::new(if i < n { 0.0 } else { 1.0 }, 0.0)
    });
    GaussianState {
        corr: DMatrix::from_diagonal(&diag),
    }
}

/// Single-particle propagator `V = exp(iθM)` from the Hermitian eigensystem.
pub fn propagator(gen: &QuadraticGenerator, angle: f64) -> DMatrix<Complex64> {
    let eig = gen.matrix.clone().symmetric_eigen();
    let w = &eig.eigenvectors;
    let mut scaled = w.clone();
    for (mut col, &lambda) in scaled.column_iter_mut().zip(eig.eigenvalues.iter()) {
        col *= Complex64::from_polar(1.0, angle * lambda);
    }
    scaled * w.adjoint()
}

/// State after `exp(iθ(½Ψ†MΨ))`: `Γ → V Γ V†`.
pub fn apply_unitary(
    state: &GaussianState,
    gen: &QuadraticGenerator,
    angle: f64,
) -> Result<GaussianState> {
    check_dims(gen, state)?;
    if angle == 0.0 {
        return Ok(state.clone());
    }
    let v = propagator(gen, angle);
    Ok(GaussianState {
        corr: &v * &state.corr * v.adjoint(),
    })
}

pub fn expect_target(state: &GaussianState, spec: &ChainSpec) -> Result<f64> {
    state.expect(&generator_target(spec))
}

/// All circuit generators of one chain, built once.
#[derive(Clone, Debug)]
pub struct CircuitGenerators {
    pub mixer: QuadraticGenerator,
    pub target: QuadraticGenerator,
    pub cd: QuadraticGenerator,
    pub xxt: QuadraticGenerator,
    pub txt: QuadraticGenerator,
}

impl CircuitGenerators {
    pub fn new(spec: &ChainSpec) -> Self {
        let (xxt, txt) = generator_2cd(spec);
        CircuitGenerators {
            mixer: generator_mixer(spec),
            target: generator_target(spec),
            cd: generator_cd(spec),
            xxt,
            txt,
        }
    }
}

/// Final state of the circuit. Within a step the factors act as
/// `U_2CD`, `U_CD`, `U_T(γ)`, `U_X(β)`.
pub fn evolve(
    spec: &ChainSpec,
    gens: &CircuitGenerators,
    schedule: &AngleSchedule,
) -> Result<GaussianState> {
    let schedule = if schedule.variant().is_constrained() {
        expand_constrained(schedule)?
    } else {
        schedule.clone()
    };
    let mut state = initial_state(spec);
    for row in schedule.rows() {
        if schedule.variant() == Variant::Qaoa2Cd {
            let combined = gens.xxt.combine(row[DELTA], &gens.txt, -row[ZETA]);
            state = apply_unitary(&state, &combined, 1.0)?;
        }
        if schedule.variant() != Variant::Qaoa {
            state = apply_unitary(&state, &gens.cd, row[ALPHA])?;
        }
        state = apply_unitary(&state, &gens.target, -row[GAMMA])?;
        state = apply_unitary(&state, &gens.mixer, -row[BETA])?;
    }
    Ok(state)
}

/// Energy `⟨H_T⟩` at the end of the circuit, via the full BdG path.
pub fn run_circuit(spec: &ChainSpec, schedule: &AngleSchedule) -> Result<f64> {
    let gens = CircuitGenerators::new(spec);
    let state = evolve(spec, &gens, schedule)?;
    state.expect(&gens.target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_open_random, make_ring_uniform};
    use std::f64::consts::PI;

    #[test]
    fn initial_state_energies() {
        let spec = make_open_random(7, 5).unwrap();
        let s = initial_state(&spec);
        assert_eq!(expect_target(&s, &spec).unwrap(), 0.0);
        assert!((s.expect(&generator_mixer(&spec)).unwrap() + 7.0).abs() < 1e-14);
        assert_eq!(s.purity_error(), 0.0);
        assert_eq!(s.anticommutation_error(), 0.0);
    }

    #[test]
    fn unitary_round_trip() {
        let spec = make_ring_uniform(6).unwrap();
        let gens = CircuitGenerators::new(&spec);
        let s0 = apply_unitary(&initial_state(&spec), &gens.target, 0.3).unwrap();
        let s0 = apply_unitary(&s0, &gens.mixer, 0.7).unwrap();
        assert_eq!(apply_unitary(&s0, &gens.cd, 0.0).unwrap(), s0);
        let s1 = apply_unitary(&s0, &gens.xxt, 0.4).unwrap();
        let s2 = apply_unitary(&s1, &gens.xxt, -0.4).unwrap();
        assert!(max_abs(&(s2.corr() - s0.corr())) < 1e-12);
        assert!(s1.purity_error() < 1e-12);
        assert!(s1.anticommutation_error() < 1e-12);
        assert!(s1.hermiticity_error() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let a = make_ring_uniform(5).unwrap();
        let b = make_ring_uniform(6).unwrap();
        let err = apply_unitary(&initial_state(&a), &generator_mixer(&b), 0.1);
        assert!(matches!(err, Err(Error::DimensionMismatch { generator: 6, state: 5 })));
    }

    #[test]
    fn ring_p1_optimum() {
        let spec = make_ring_uniform(10).unwrap();
        let s = AngleSchedule::from_rows(Variant::Qaoa, &[vec![PI / 8.0, PI / 8.0]]).unwrap();
        assert!((run_circuit(&spec, &s).unwrap() + 5.0).abs() < 1e-12);
    }

    #[test]
    fn ring_p1_surface() {
        let spec = make_ring_uniform(10).unwrap();
        for i in 0..20 {
            for j in 0..20 {
                let (g, b) = (0.05 + 0.13 * i as f64, -0.4 + 0.11 * j as f64);
                let s = AngleSchedule::from_rows(Variant::Qaoa, &[vec![g, b]]).unwrap();
                let e = run_circuit(&spec, &s).unwrap();
                let expect = -5.0 * (4.0 * b).sin() * (4.0 * g).sin();
                assert!((e - expect).abs() < 1e-10, "{g} {b}: {e} vs {expect}");
            }
        }
    }

    #[test]
    fn zero_schedule_is_identity() {
        let spec = make_open_random(6, 1).unwrap();
        for v in Variant::ALL {
            let s = AngleSchedule::zeros(v, 3).unwrap();
            assert_eq!(run_circuit(&spec, &s).unwrap(), 0.0);
        }
    }
}
