use num_complex::Complex64;

use super::pauli::{PauliGenerators, PauliSum};
use crate::error::{Error, Result};
use crate::model::{
    expand_constrained, AngleSchedule, ChainSpec, SpectrumBounds, Variant, ALPHA, BETA, DELTA,
    GAMMA, ZETA,
};

/// Largest state vector.
pub const MAX_VECTOR_SITES: usize = 14;
/// Largest chain for exponentials of nested commutators.
pub const MAX_NESTED_SITES: usize = 12;
/// Largest chain for diagonal enumeration.
pub const MAX_DIAGONAL_SITES: usize = 20;
/// Bound on `|θ|·‖Op‖` per Taylor substep.
pub const TAYLOR_STEP: f64 = 4.0;
/// Taylor terms allowed per substep.
pub const MAX_TAYLOR_TERMS: usize = 60;

/// Amplitudes over bitstrings; bit `j` set means spin `j` down.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub amplitudes: Vec<Complex64>,
    pub n_sites: usize,
}

impl StateVector {
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `⟨ψ|Op|ψ⟩`.
    pub fn expect(&self, op: &PauliSum) -> Complex64 {
        let applied = DenseOperator::new(op, self.n_sites).apply(&self.amplitudes);
        self.amplitudes
            .iter()
            .zip(&applied)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.n_sites != n {
            return Err(Error::DimensionMismatch {
                generator: n,
                state: self.n_sites,
            });
        }
        Ok(())
    }
}

fn check_size(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(Error::TooLarge { n, limit });
    }
    Ok(())
}

/// `⨂ |−⟩`, the ground state of `Σ σ^X`.
pub fn dense_initial(n: usize) -> Result<StateVector> {
    check_size(n, MAX_VECTOR_SITES)?;
    let amp = (0.5f64).powf(n as f64 / 2.0);
    Ok(StateVector {
        amplitudes: (0..1u64 << n)
            .map(|b| Complex64::from(if b.count_ones() % 2 == 0 { amp } else { -amp }))
            .collect(),
        n_sites: n,
    })
}

/// `exp(-iγ H_T)`, diagonal.
pub fn dense_apply_target(state: &StateVector, spec: &ChainSpec, gamma: f64) -> Result<StateVector> {
    state.check(spec.n_sites())?;
    Ok(StateVector {
        amplitudes: state
            .amplitudes
            .iter()
            .enumerate()
            .map(|(b, a)| a * Complex64::from_polar(1.0, -gamma * spec.classical_energy(b as u64)))
            .collect(),
        n_sites: state.n_sites,
    })
}

/// `Π_j exp(-iβ σ^X_j)`.
pub fn dense_apply_mixer(state: &StateVector, beta: f64) -> StateVector {
    let (s, c) = beta.sin_cos();
    let ms = Complex64::new(0.0, -s);
    let mut amps = state.amplitudes.clone();
    for j in 0..state.n_sites {
        let bit = 1usize << j;
        for b in 0..amps.len() {
            if b & bit == 0 {
                let (u, d) = (amps[b], amps[b | bit]);
                amps[b] = u * c + d * ms;
                amps[b | bit] = u * ms + d * c;
            }
        }
    }
    StateVector {
        amplitudes: amps,
        n_sites: state.n_sites,
    }
}

/// A Pauli sum grouped by flip mask: `Op|b⟩ = Σ_x d_x(b) |b ⊕ x⟩`.
pub struct DenseOperator {
    groups: Vec<(usize, Vec<Complex64>)>,
    dim: usize,
}

impl DenseOperator {
    pub fn new(op: &PauliSum, n: usize) -> Self {
        let dim = 1usize << n;
        let mut groups: Vec<(usize, Vec<Complex64>)> = Vec::new();
        for (p, c) in op.terms() {
            let x = p.x as usize;
            let idx = match groups.iter().position(|(gx, _)| *gx == x) {
                Some(i) => i,
                None => {
                    groups.push((x, vec![Complex64::from(0.0); dim]));
                    groups.len() - 1
                }
            };
            let diag = &mut groups[idx].1;
            for (b, d) in diag.iter_mut().enumerate() {
                // X^x Z^z |b⟩ = (-1)^{|z & b|} |b ⊕ x⟩
                if (p.z as usize & b).count_ones() % 2 == 0 {
                    *d += c;
                } else {
                    *d -= c;
                }
            }
        }
        DenseOperator { groups, dim }
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::from(0.0); self.dim];
        for (x, diag) in &self.groups {
            for b in 0..self.dim {
                out[b ^ x] += diag[b] * v[b];
            }
        }
        out
    }

    /// Max absolute row sum, a bound on the operator norm.
    pub fn norm_bound(&self) -> f64 {
        let mut rows = vec![0.0; self.dim];
        for (x, diag) in &self.groups {
            for b in 0..self.dim {
                rows[b ^ x] += diag[b].norm();
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }
}

/// `exp(iθ Op)|ψ⟩` by scaled Taylor series. Returns the state, renormalized,
/// and the norm drift removed.
pub fn dense_expm_apply(op: &PauliSum, theta: f64, state: &StateVector) -> Result<(StateVector, f64)> {
    check_size(state.n_sites, MAX_VECTOR_SITES)?;
    if theta == 0.0 || op.is_empty() {
        return Ok((state.clone(), 0.0));
    }
    let dense = DenseOperator::new(op, state.n_sites);
    let scale = theta.abs() * dense.norm_bound();
    let substeps = (scale / TAYLOR_STEP).ceil().max(1.0) as usize;
    let factor = Complex64::new(0.0, theta / substeps as f64);
    let mut v = state.amplitudes.clone();
    let norm0 = state.norm();
    for _ in 0..substeps {
        let mut term = v.clone();
        let mut sum = v.clone();
        let mut converged = false;
        for k in 1..=MAX_TAYLOR_TERMS {
            let next = dense.apply(&term);
            let coeff = factor / k as f64;
            term = next.into_iter().map(|t| t * coeff).collect();
            let tnorm = term.iter().map(|t| t.norm_sqr()).sum::<f64>().sqrt();
            for (s, t) in sum.iter_mut().zip(&term) {
                *s += t;
            }
            if tnorm < 1e-16 * norm0 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence(MAX_TAYLOR_TERMS));
        }
        v = sum;
    }
    let out = StateVector {
        amplitudes: v,
        n_sites: state.n_sites,
    };
    let norm = out.norm();
    let drift = (norm - norm0).abs();
    Ok((
        StateVector {
            amplitudes: out.amplitudes.iter().map(|a| a * (norm0 / norm)).collect(),
            n_sites: out.n_sites,
        },
        drift,
    ))
}

/// Exact bounds of the diagonal `H_T` by enumeration.
pub fn dense_spectrum(spec: &ChainSpec) -> Result<SpectrumBounds> {
    check_size(spec.n_sites(), MAX_DIAGONAL_SITES)?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for b in 0..1u64 << spec.n_sites() {
        let e = spec.classical_energy(b);
        lo = lo.min(e);
        hi = hi.max(e);
    }
    Ok(SpectrumBounds { e_min: lo, e_max: hi })
}

/// `⟨H_T⟩` of a state.
pub fn dense_target_energy(state: &StateVector, spec: &ChainSpec) -> f64 {
    state
        .amplitudes
        .iter()
        .enumerate()
        .map(|(b, a)| a.norm_sqr() * spec.classical_energy(b as u64))
        .sum()
}

/// Final state of the circuit with every generator built from Pauli algebra.
/// Also returns the largest norm drift of any exponential.
pub fn dense_evolve(spec: &ChainSpec, schedule: &AngleSchedule) -> Result<(StateVector, f64)> {
    let n = spec.n_sites();
    let s = if schedule.variant().is_constrained() {
        expand_constrained(schedule)?
    } else {
        schedule.clone()
    };
    if s.variant() != Variant::Qaoa {
        check_size(n, MAX_NESTED_SITES)?;
    }
    let gens = PauliGenerators::new(spec);
    // exp(α[H_X,H_T]) = exp(iα G) with G = -i[H_X,H_T]
    let g_cd = gens.comm.scaled(Complex64::new(0.0, -1.0));
    let mut state = dense_initial(n)?;
    let mut drift: f64 = 0.0;
    for row in s.rows() {
        if s.variant() == Variant::Qaoa2Cd {
            let op = gens
                .xxt
                .scaled(Complex64::from(row[DELTA]))
                .add(&gens.txt.scaled(Complex64::from(-row[ZETA])));
            let (next, d) = dense_expm_apply(&op, 1.0, &state)?;
            state = next;
            drift = drift.max(d);
        }
        if s.variant() != Variant::Qaoa {
            let (next, d) = dense_expm_apply(&g_cd, row[ALPHA], &state)?;
            state = next;
            drift = drift.max(d);
        }
        state = dense_apply_target(&state, spec, row[GAMMA])?;
        state = dense_apply_mixer(&state, row[BETA]);
    }
    Ok((state, drift))
}

pub fn dense_run_circuit(spec: &ChainSpec, schedule: &AngleSchedule) -> Result<f64> {
    let (state, _) = dense_evolve(spec, schedule)?;
    Ok(dense_target_energy(&state, spec))
}
