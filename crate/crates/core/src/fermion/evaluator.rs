//! Real Majorana-covariance evaluation of the circuit energy and its
//! finite-difference gradient.
//!
//! The state is `Γ_kl = (i/2)⟨[γ_k, γ_l]⟩`, real antisymmetric. A unitary
//! `exp(iθH_A)` acts as `Γ → OΓOᵀ` with `O = exp(-θA)`. Mixer and target
//! layers are products of disjoint Givens rotations; the first-order
//! counterdiabatic layer uses a cached real Schur basis; the second-order
//! layer needs a fresh exponential for every angle pair.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::majorana::{a_index, b_index, target_pairs, GeneratorForms};
use crate::error::{Error, Result};
use crate::model::{
    expand_constrained, AngleSchedule, ChainSpec, Variant, ALPHA, BETA, DELTA, GAMMA, ZETA,
};

/// Default central-difference step.
pub const FD_STEP: f64 = 1e-6;

/// `t ↦ exp(-tC)` for a fixed real antisymmetric `C`.
#[derive(Clone, Debug)]
struct RotationFamily {
    /// Columns `u_1, w_1, u_2, w_2, …` followed by a kernel basis.
    basis: DMatrix<f64>,
    freqs: Vec<f64>,
}

impl RotationFamily {
    fn new(c: &DMatrix<f64>) -> Result<Self> {
        let d = c.nrows();
        let scale = c.amax().max(1.0);
        let eig = c.map(|x| Complex64::new(0.0, x)).symmetric_eigen();
        let mut cols: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(d);
        let mut freqs = Vec::new();
        for (v, &lambda) in eig.eigenvectors.column_iter().zip(eig.eigenvalues.iter()) {
            if lambda > 1e-10 * scale {
                cols.push(v.map(|z| z.re * std::f64::consts::SQRT_2));
                cols.push(v.map(|z| z.im * std::f64::consts::SQRT_2));
                freqs.push(lambda);
            }
        }
        let n_rot = cols.len();
        for i in 0..d {
            if cols.len() == d {
                break;
            }
            let mut e = nalgebra::DVector::<f64>::zeros(d);
            e[i] = 1.0;
            for _ in 0..2 {
                for q in &cols {
                    let overlap = q.dot(&e);
                    e.axpy(-overlap, q, 1.0);
                }
            }
            let norm = e.norm();
            if norm > 1e-6 {
                cols.push(e / norm);
            }
        }
        if cols.len() != d {
            return Err(Error::Eigen);
        }
        let basis = DMatrix::from_columns(&cols);
        let ortho = (basis.transpose() * &basis - DMatrix::identity(d, d)).amax();
        if ortho > 1e-8 || n_rot != 2 * freqs.len() {
            return Err(Error::Eigen);
        }
        Ok(RotationFamily { basis, freqs })
    }

    fn orthogonal(&self, t: f64) -> DMatrix<f64> {
        let mut qr = self.basis.clone();
        for (m, &lambda) in self.freqs.iter().enumerate() {
            let (s, c) = (t * lambda).sin_cos();
            let (iu, iw) = (2 * m, 2 * m + 1);
            for r in 0..qr.nrows() {
                let (u, w) = (qr[(r, iu)], qr[(r, iw)]);
                qr[(r, iu)] = c * u - s * w;
                qr[(r, iw)] = s * u + c * w;
            }
        }
        qr * self.basis.transpose()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Gate {
    Mixer(f64),
    Target(f64),
    Cd(f64),
    TwoCd(f64, f64),
}

impl Gate {
    fn inverse(self) -> Gate {
        match self {
            Gate::Mixer(b) => Gate::Mixer(-b),
            Gate::Target(g) => Gate::Target(-g),
            Gate::Cd(a) => Gate::Cd(-a),
            Gate::TwoCd(d, z) => Gate::TwoCd(-d, -z),
        }
    }
}

/// Energy evaluator for one chain, reusable across schedules.
#[derive(Clone, Debug)]
pub struct CircuitEvaluator {
    n: usize,
    target: Vec<(usize, usize, f64)>,
    target_matrix: DMatrix<f64>,
    cd: RotationFamily,
    xxt: DMatrix<f64>,
    txt: DMatrix<f64>,
    /// `a`–`b` blocks of `xxt`, `txt` when both are bipartite in that split.
    bipartite: Option<(DMatrix<f64>, DMatrix<f64>)>,
    fd_step: f64,
}

/// The `a`–`b` block `K` of `M = [[0, K], [-Kᵀ, 0]]`, if `M` has that form.
fn ab_block(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = m.nrows() / 2;
    let same_kind = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).any(|(i, j)| {
        m[(a_index(i), a_index(j))] != 0.0 || m[(b_index(i), b_index(j))] != 0.0
    });
    (!same_kind).then(|| DMatrix::from_fn(n, n, |i, j| m[(a_index(i), b_index(j))]))
}

/// `exp([[0, K], [-Kᵀ, 0]])` in the interleaved ordering.
///
/// With `KKᵀ = U Σ² Uᵀ` the blocks are `U cos Σ Uᵀ`, `U (sin Σ/Σ) Uᵀ K` and
/// `1 − Kᵀ U ((1 − cos Σ)/Σ²) Uᵀ K`; only a symmetric eigensolve is needed,
/// which stays accurate when singular values cluster.
fn bipartite_exp(k: DMatrix<f64>) -> DMatrix<f64> {
    let n = k.nrows();
    let eig = (&k * k.transpose()).symmetric_eigen();
    let u = &eig.eigenvectors;
    let weighted = |f: &dyn Fn(f64) -> f64| {
        let mut m = u.clone();
        for (mut col, &lam) in m.column_iter_mut().zip(eig.eigenvalues.iter()) {
            col *= f(lam.max(0.0));
        }
        m * u.transpose()
    };
    let small = |s2: f64| s2 < 1e-8;
    let aa = weighted(&|s2| s2.sqrt().cos());
    let ab = weighted(&|s2| if small(s2) { 1.0 - s2 / 6.0 } else { s2.sqrt().sin() / s2.sqrt() }) * &k;
    let bb = DMatrix::identity(n, n)
        - k.transpose()
            * weighted(&|s2| if small(s2) { 0.5 - s2 / 24.0 } else { (1.0 - s2.sqrt().cos()) / s2 })
            * &k;
    let mut o = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            o[(a_index(i), a_index(j))] = aa[(i, j)];
            o[(a_index(i), b_index(j))] = ab[(i, j)];
            o[(b_index(j), a_index(i))] = -ab[(i, j)];
            o[(b_index(i), b_index(j))] = bb[(i, j)];
        }
    }
    o
}

fn rotate_pair(g: &mut DMatrix<f64>, k: usize, l: usize, phi: f64) {
    let (s, c) = phi.sin_cos();
    let d = g.nrows();
    for j in 0..d {
        let (x, y) = (g[(k, j)], g[(l, j)]);
        g[(k, j)] = c * x + s * y;
        g[(l, j)] = -s * x + c * y;
    }
    for i in 0..d {
        let (x, y) = (g[(i, k)], g[(i, l)]);
        g[(i, k)] = c * x + s * y;
        g[(i, l)] = -s * x + c * y;
    }
}

fn conjugate(o: &DMatrix<f64>, g: &DMatrix<f64>) -> DMatrix<f64> {
    o * g * o.transpose()
}

fn frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

impl CircuitEvaluator {
    pub fn new(spec: &ChainSpec) -> Result<Self> {
        let forms = GeneratorForms::new(spec);
        Ok(CircuitEvaluator {
            n: spec.n_sites(),
            target: target_pairs(spec),
            target_matrix: forms.target.matrix().clone(),
            cd: RotationFamily::new(forms.cd.matrix())?,
            xxt: forms.xxt.matrix().clone(),
            txt: forms.txt.matrix().clone(),
            bipartite: ab_block(forms.xxt.matrix()).zip(ab_block(forms.txt.matrix())),
            fd_step: FD_STEP,
        })
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    /// Covariance of the fully occupied state.
    pub fn initial_covariance(&self) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(2 * self.n, 2 * self.n);
        for j in 0..self.n {
            g[(a_index(j), b_index(j))] = 1.0;
            g[(b_index(j), a_index(j))] = -1.0;
        }
        g
    }

    /// `⟨H_T⟩ = -Σ c Γ_{b_j, a_{j+1}}`.
    pub fn target_energy(&self, g: &DMatrix<f64>) -> f64 {
        -self.target.iter().map(|&(k, l, c)| c * g[(k, l)]).sum::<f64>()
    }

    fn two_cd_orthogonal(&self, delta: f64, zeta: f64) -> DMatrix<f64> {
        // U_2CD = exp(i H_S), S = -δ·xxt + ζ·txt, so O = exp(-S)
        match &self.bipartite {
            Some((kx, kt)) => bipartite_exp(kx * delta - kt * zeta),
            None => (&self.xxt * delta - &self.txt * zeta).exp(),
        }
    }

    fn apply(&self, gate: Gate, g: &mut DMatrix<f64>) {
        match gate {
            Gate::Mixer(beta) => {
                if beta != 0.0 {
                    for j in 0..self.n {
                        rotate_pair(g, a_index(j), b_index(j), -2.0 * beta);
                    }
                }
            }
            Gate::Target(gamma) => {
                if gamma != 0.0 {
                    for &(k, l, c) in &self.target {
                        rotate_pair(g, k, l, -2.0 * gamma * c);
                    }
                }
            }
            Gate::Cd(alpha) => {
                if alpha != 0.0 {
                    *g = conjugate(&self.cd.orthogonal(alpha), g);
                }
            }
            Gate::TwoCd(delta, zeta) => {
                if delta != 0.0 || zeta != 0.0 {
                    *g = conjugate(&self.two_cd_orthogonal(delta, zeta), g);
                }
            }
        }
    }

    fn gates(schedule: &AngleSchedule) -> Result<Vec<Gate>> {
        let s = if schedule.variant().is_constrained() {
            expand_constrained(schedule)?
        } else {
            schedule.clone()
        };
        let mut gates = Vec::with_capacity(4 * s.steps());
        for row in s.rows() {
            if s.variant() == Variant::Qaoa2Cd {
                gates.push(Gate::TwoCd(row[DELTA], row[ZETA]));
            }
            if s.variant() != Variant::Qaoa {
                gates.push(Gate::Cd(row[ALPHA]));
            }
            gates.push(Gate::Target(row[GAMMA]));
            gates.push(Gate::Mixer(row[BETA]));
        }
        Ok(gates)
    }

    fn check(&self, g: &DMatrix<f64>) -> Result<()> {
        if g.nrows() != 2 * self.n {
            return Err(Error::DimensionMismatch {
                generator: self.n,
                state: g.nrows() / 2,
            });
        }
        Ok(())
    }

    /// Final Majorana covariance of the circuit.
    pub fn evolve(&self, schedule: &AngleSchedule) -> Result<DMatrix<f64>> {
        let mut g = self.initial_covariance();
        self.check(&g)?;
        for gate in Self::gates(schedule)? {
            self.apply(gate, &mut g);
        }
        Ok(g)
    }

    pub fn energy(&self, schedule: &AngleSchedule) -> Result<f64> {
        Ok(self.target_energy(&self.evolve(schedule)?))
    }

    /// Energy and central-difference gradient with respect to
    /// `schedule.values()`.
    ///
    /// Each derivative perturbs a single layer: with the forward covariances
    /// `Γ_u` and the backward-propagated observables `B_u` stored, a shifted
    /// layer costs one conjugation instead of a full circuit.
    pub fn energy_and_gradient(&self, schedule: &AngleSchedule) -> Result<(f64, Vec<f64>)> {
        let gates = Self::gates(schedule)?;
        let h = self.fd_step;
        let mut forward = Vec::with_capacity(gates.len() + 1);
        let mut g = self.initial_covariance();
        forward.push(g.clone());
        for &gate in &gates {
            self.apply(gate, &mut g);
            forward.push(g.clone());
        }
        let energy = self.target_energy(&g);

        // backward[u] = O_{u+1}ᵀ ⋯ O_Lᵀ A_T O_L ⋯ O_{u+1}, paired with forward[u]
        let mut backward = vec![DMatrix::zeros(0, 0); gates.len() + 1];
        let mut b = self.target_matrix.clone();
        backward[gates.len()] = b.clone();
        for (u, &gate) in gates.iter().enumerate().rev() {
            self.apply(gate.inverse(), &mut b);
            backward[u] = b.clone();
        }

        // ∂E/∂(layer angle), one or two entries per layer
        let shifted = |from: usize, gate: Gate, against: usize| -> f64 {
            let mut gs = forward[from].clone();
            self.apply(gate, &mut gs);
            0.25 * frobenius(&backward[against], &gs)
        };
        let mut layer_grads = Vec::with_capacity(gates.len());
        for (u, &gate) in gates.iter().enumerate() {
            let d = match gate {
                Gate::Mixer(_) | Gate::Target(_) | Gate::Cd(_) => {
                    // the layer commutes with its own shift
                    let shift = |x: f64| match gate {
                        Gate::Mixer(_) => Gate::Mixer(x),
                        Gate::Target(_) => Gate::Target(x),
                        _ => Gate::Cd(x),
                    };
                    let plus = shifted(u + 1, shift(h), u + 1);
                    let minus = shifted(u + 1, shift(-h), u + 1);
                    [(plus - minus) / (2.0 * h), 0.0]
                }
                Gate::TwoCd(delta, zeta) => {
                    let dd = (shifted(u, Gate::TwoCd(delta + h, zeta), u + 1)
                        - shifted(u, Gate::TwoCd(delta - h, zeta), u + 1))
                        / (2.0 * h);
                    let dz = (shifted(u, Gate::TwoCd(delta, zeta + h), u + 1)
                        - shifted(u, Gate::TwoCd(delta, zeta - h), u + 1))
                        / (2.0 * h);
                    [dd, dz]
                }
            };
            layer_grads.push(d);
        }
        Ok((energy, Self::chain_rule(schedule, &layer_grads)))
    }

    fn chain_rule(schedule: &AngleSchedule, layer_grads: &[[f64; 2]]) -> Vec<f64> {
        let variant = schedule.variant();
        let per_step = match variant.free_form() {
            Variant::Qaoa => 2,
            Variant::QaoaCd => 3,
            _ => 4,
        };
        let mut grad = Vec::with_capacity(schedule.n_params());
        for (k, row) in schedule.rows().enumerate() {
            let l = &layer_grads[k * per_step..(k + 1) * per_step];
            let (g, b) = (row[GAMMA], row[BETA]);
            match variant {
                Variant::Qaoa => grad.extend([l[0][0], l[1][0]]),
                Variant::QaoaCd => grad.extend([l[1][0], l[2][0], l[0][0]]),
                Variant::Qaoa2Cd => {
                    grad.extend([l[2][0], l[3][0], l[1][0], l[0][0], l[0][1]])
                }
                Variant::QaoaCd2p => {
                    // α = -βγ/2
                    let da = l[0][0];
                    grad.extend([l[1][0] - 0.5 * b * da, l[2][0] - 0.5 * g * da]);
                }
                Variant::Qaoa2Cd2p => {
                    // α = -βγ/2, δ = β²γ/6, ζ = βγ²/3
                    let (dd, dz, da) = (l[0][0], l[0][1], l[1][0]);
                    let dg = l[2][0] - 0.5 * b * da + b * b / 6.0 * dd + 2.0 * b * g / 3.0 * dz;
                    let db = l[3][0] - 0.5 * g * da + b * g / 3.0 * dd + g * g / 3.0 * dz;
                    grad.extend([dg, db]);
                }
            }
        }
        grad
    }
}
