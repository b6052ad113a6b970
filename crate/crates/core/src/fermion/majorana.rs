//! Quadratic Majorana forms.
//!
//! With `a_j = c_j + c_j†` and `b_j = i(c_j† - c_j)` interleaved as
//! `γ_{2j} = a_j`, `γ_{2j+1} = b_j`, every quadratic parity-preserving
//! operator is `H_A = (i/4) Σ_kl A_kl γ_k γ_l` for a real antisymmetric `A`.
//! The map `A ↦ H_A` is a Lie algebra homomorphism up to a factor `i`:
//!
//! ```text
//! [H_A, H_B] = i H_[A,B]
//! ```
//!
//! so nested commutators of circuit generators reduce to matrix commutators.
//!
//! Under the Jordan–Wigner map `σ^X_j = -i a_j b_j` and
//! `σ^Z_j σ^Z_{j+1} = -i b_j a_{j+1}`. On a ring the closing bond picks up
//! the fermion parity `P = Π_j σ^X_j`: `σ^Z_{N} σ^Z_1 = P · i b_N a_1`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::model::{Boundary, ChainSpec};

pub fn a_index(site: usize) -> usize {
    2 * site
}

pub fn b_index(site: usize) -> usize {
    2 * site + 1
}

/// Real antisymmetric coefficient matrix of `(i/4) γᵀ A γ`.
#[derive(Clone, Debug, PartialEq)]
pub struct MajoranaForm {
    coeffs: DMatrix<f64>,
}

impl MajoranaForm {
    pub fn zeros(n_modes: usize) -> Self {
        MajoranaForm {
            coeffs: DMatrix::zeros(2 * n_modes, 2 * n_modes),
        }
    }

    pub fn from_matrix(coeffs: DMatrix<f64>) -> Self {
        assert!(coeffs.is_square() && coeffs.nrows() % 2 == 0);
        MajoranaForm { coeffs }
    }

    pub fn n_modes(&self) -> usize {
        self.coeffs.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    /// Add `c · (-i γ_k γ_l)`.
    pub fn add_pair(&mut self, k: usize, l: usize, c: f64) {
        assert_ne!(k, l);
        self.coeffs[(k, l)] -= 2.0 * c;
        self.coeffs[(l, k)] += 2.0 * c;
    }

    /// `[A, B]`, so that `[H_A, H_B] = i H_[A,B]`.
    pub fn bracket(&self, other: &MajoranaForm) -> MajoranaForm {
        let (a, b) = (&self.coeffs, &other.coeffs);
        MajoranaForm {
            coeffs: a * b - b * a,
        }
    }

    pub fn scaled(&self, s: f64) -> MajoranaForm {
        MajoranaForm {
            coeffs: &self.coeffs * s,
        }
    }

    pub fn add(&self, other: &MajoranaForm) -> MajoranaForm {
        MajoranaForm {
            coeffs: &self.coeffs + &other.coeffs,
        }
    }

    pub fn antisymmetry_error(&self) -> f64 {
        (&self.coeffs + self.coeffs.transpose()).amax()
    }

    /// Nambu (BdG) matrix `M` with `H_A = ½ Ψ† M Ψ`, `Ψ = (c_1…c_N, c_1†…c_N†)`.
    pub fn to_nambu(&self) -> DMatrix<Complex64> {
        let omega = majorana_from_nambu(self.n_modes());
        let a = self.coeffs.map(|x| Complex64::new(x, 0.0));
        (omega.adjoint() * a * omega) * Complex64::new(0.0, 0.5)
    }

    /// Inverse of [`to_nambu`](Self::to_nambu). Returns the form and the
    /// largest imaginary part discarded (zero for a valid BdG matrix).
    pub fn from_nambu(m: &DMatrix<Complex64>) -> (MajoranaForm, f64) {
        let n = m.nrows() / 2;
        let omega = majorana_from_nambu(n);
        let a = (&omega * m * omega.adjoint()) * Complex64::new(0.0, -0.5);
        let leak = a.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        (
            MajoranaForm {
                coeffs: a.map(|z| z.re),
            },
            leak,
        )
    }
}

/// Pfaffian of a real antisymmetric matrix (skew LTLᵀ elimination with pivoting).
pub fn pfaffian(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    if n % 2 == 1 {
        return 0.0;
    }
    let mut a = m.clone();
    let mut pf = 1.0;
    for k in (0..n.saturating_sub(1)).step_by(2) {
        let kp = (k + 1..n)
            .max_by(|&i, &j| a[(i, k)].abs().total_cmp(&a[(j, k)].abs()))
            .unwrap();
        if kp != k + 1 {
            a.swap_rows(k + 1, kp);
            a.swap_columns(k + 1, kp);
            pf = -pf;
        }
        let pivot = a[(k, k + 1)];
        if pivot == 0.0 {
            return 0.0;
        }
        pf *= pivot;
        for i in k + 2..n {
            let tau_i = a[(k, i)] / pivot;
            for j in k + 2..n {
                let tau_j = a[(k, j)] / pivot;
                a[(i, j)] += tau_i * a[(j, k + 1)] - a[(i, k + 1)] * tau_j;
            }
        }
    }
    pf
}

/// Ground energy of `H_A` restricted to the fermion-parity sector of the
/// fully occupied state, where `P = (-1)^N Pf(Γ)`.
pub fn sector_ground_energy(form: &MajoranaForm) -> f64 {
    let d = form.coeffs.nrows();
    let ia = form.coeffs.map(|x| Complex64::new(0.0, x));
    let eig = ia.symmetric_eigen();
    let mut gamma = DMatrix::<Complex64>::zeros(d, d);
    for (v, &lambda) in eig.eigenvectors.column_iter().zip(eig.eigenvalues.iter()) {
        gamma += v * v.adjoint() * Complex64::new(0.0, lambda.signum());
    }
    let gamma = gamma.map(|z| z.re);
    let free = -0.25 * eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>();
    if pfaffian(&gamma) > 0.0 {
        free
    } else {
        let gap = eig.eigenvalues.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min);
        free + gap
    }
}

/// `Ω` with `γ = Ω Ψ` in the interleaved ordering.
fn majorana_from_nambu(n: usize) -> DMatrix<Complex64> {
    let mut omega = DMatrix::zeros(2 * n, 2 * n);
    let i = Complex64::i();
    for j in 0..n {
        omega[(a_index(j), j)] = Complex64::new(1.0, 0.0);
        omega[(a_index(j), n + j)] = Complex64::new(1.0, 0.0);
        omega[(b_index(j), j)] = -i;
        omega[(b_index(j), n + j)] = i;
    }
    omega
}

/// Sign multiplying the closing bond of a ring in the fermion picture.
///
/// The circuit starts in the fully occupied state, parity `(-1)^N`, and
/// every generator conserves parity, so the sign is fixed once per chain.
pub fn closing_bond_sign(spec: &ChainSpec) -> f64 {
    match spec.boundary() {
        Boundary::Open => 1.0,
        Boundary::Periodic => {
            if spec.n_sites() % 2 == 0 {
                -1.0
            } else {
                1.0
            }
        }
    }
}

/// Bonds of the target Hamiltonian as Majorana pairs `(b_j, a_{j+1}, c)`,
/// each contributing `c · (-i γ_k γ_l)`.
pub fn target_pairs(spec: &ChainSpec) -> Vec<(usize, usize, f64)> {
    let sign = closing_bond_sign(spec);
    spec.bonds()
        .map(|(l, r, j)| {
            let c = if r < l { sign * j } else { j };
            (b_index(l), a_index(r), c)
        })
        .collect()
}

/// `H_X = Σ_j σ^X_j`.
pub fn mixer_form(spec: &ChainSpec) -> MajoranaForm {
    let mut form = MajoranaForm::zeros(spec.n_sites());
    for j in 0..spec.n_sites() {
        form.add_pair(a_index(j), b_index(j), 1.0);
    }
    form
}

/// `H_T = Σ_bonds J σ^Z σ^Z`, valid in the parity sector of the initial state.
pub fn target_form(spec: &ChainSpec) -> MajoranaForm {
    let mut form = MajoranaForm::zeros(spec.n_sites());
    for (k, l, c) in target_pairs(spec) {
        form.add_pair(k, l, c);
    }
    form
}

/// Forms of the counterdiabatic generators.
#[derive(Clone, Debug)]
pub struct GeneratorForms {
    pub mixer: MajoranaForm,
    pub target: MajoranaForm,
    /// `C` with `[H_X, H_T] = i H_C`.
    pub cd: MajoranaForm,
    /// `[A_X, [A_X, A_T]]`; `[H_X,[H_X,H_T]] = -H` of this form.
    pub xxt: MajoranaForm,
    /// `[A_T, [A_X, A_T]]`; `[H_T,[H_X,H_T]] = -H` of this form.
    pub txt: MajoranaForm,
}

impl GeneratorForms {
    pub fn new(spec: &ChainSpec) -> Self {
        let mixer = mixer_form(spec);
        let target = target_form(spec);
        let cd = mixer.bracket(&target);
        let xxt = mixer.bracket(&cd);
        let txt = target.bracket(&cd);
        GeneratorForms {
            mixer,
            target,
            cd,
            xxt,
            txt,
        }
    }
}
