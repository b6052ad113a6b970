use nalgebra::DMatrix;
use num_complex::Complex64;

use super::majorana::{GeneratorForms, MajoranaForm};
use crate::model::ChainSpec;

/// A quadratic operator `½ Ψ† M Ψ + offset` over the Nambu basis
/// `Ψ = (c_1…c_N, c_1†…c_N†)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticGenerator {
    pub matrix: DMatrix<Complex64>,
    pub offset: f64,
}

impl QuadraticGenerator {
    pub fn from_form(form: &MajoranaForm) -> Self {
        QuadraticGenerator {
            matrix: form.to_nambu(),
            offset: 0.0,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn to_form(&self) -> MajoranaForm {
        MajoranaForm::from_nambu(&self.matrix).0
    }

    /// Largest elementwise deviation of `M` from `M†`.
    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    /// Largest elementwise deviation from `τ_x M* τ_x = -M`.
    pub fn particle_hole_error(&self) -> f64 {
        max_abs(&(particle_hole_image(&self.matrix) + &self.matrix))
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &QuadraticGenerator, b: f64) -> QuadraticGenerator {
        QuadraticGenerator {
            matrix: &self.matrix * Complex64::from(a) + &other.matrix * Complex64::from(b),
            offset: a * self.offset + b * other.offset,
        }
    }
}

/// `τ_x X* τ_x`: swap particle and hole blocks and conjugate.
pub fn particle_hole_image(x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let d = x.nrows();
    let n = d / 2;
    let swap = |i: usize| if i < n { i + n } else { i - n };
    DMatrix::from_fn(d, d, |i, j| x[(swap(i), swap(j))].conj())
}

pub(crate) fn max_abs(x: &DMatrix<Complex64>) -> f64 {
    x.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `Σ_j σ^X_j` in the Jordan–Wigner frame.
pub fn generator_mixer(spec: &ChainSpec) -> QuadraticGenerator {
    QuadraticGenerator::from_form(&super::majorana::mixer_form(spec))
}

/// `Σ J_j σ^Z_j σ^Z_{j+1}` in the Jordan–Wigner frame, closing bond signed
/// by the parity of the initial state.
pub fn generator_target(spec: &ChainSpec) -> QuadraticGenerator {
    QuadraticGenerator::from_form(&super::majorana::target_form(spec))
}

/// `G` with `exp(α [H_X, H_T]) = exp(i α G)`, i.e. `[H_X, H_T] = i G`.
pub fn generator_cd(spec: &ChainSpec) -> QuadraticGenerator {
    let forms = GeneratorForms::new(spec);
    QuadraticGenerator::from_form(&forms.cd)
}

/// `(G_xxT, G_TxT) = ([H_X,[H_X,H_T]], [H_T,[H_X,H_T]])`, so that
/// `U_2CD(δ, ζ) = exp(i(δ G_xxT - ζ G_TxT))`.
pub fn generator_2cd(spec: &ChainSpec) -> (QuadraticGenerator, QuadraticGenerator) {
    let forms = GeneratorForms::new(spec);
    (
        QuadraticGenerator::from_form(&forms.xxt.scaled(-1.0)),
        QuadraticGenerator::from_form(&forms.txt.scaled(-1.0)),
    )
}
