use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::fermion::majorana::MajoranaForm;
use crate::model::ChainSpec;

/// `Π_j X_j^{x_j} Z_j^{z_j}`; `Y_j = i X_j Z_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    pub x: u64,
    pub z: u64,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0 };

    pub fn x(site: usize) -> Self {
        PauliString { x: 1 << site, z: 0 }
    }

    pub fn z(site: usize) -> Self {
        PauliString { x: 0, z: 1 << site }
    }

    /// `self · other = sign · (x1^x2, z1^z2)`.
    pub fn mul(self, other: PauliString) -> (f64, PauliString) {
        let sign = if (self.z & other.x).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        (
            sign,
            PauliString {
                x: self.x ^ other.x,
                z: self.z ^ other.z,
            },
        )
    }
}

/// Weighted sum of Pauli strings.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PauliSum {
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(p: PauliString, c: Complex64) -> Self {
        let mut s = Self::new();
        s.add_term(p, c);
        s
    }

    /// `Y_j = i X_j Z_j`.
    pub fn y(site: usize) -> Self {
        Self::single(
            PauliString {
                x: 1 << site,
                z: 1 << site,
            },
            Complex64::i(),
        )
    }

    pub fn add_term(&mut self, p: PauliString, c: Complex64) {
        *self.terms.entry(p).or_default() += c;
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, c: Complex64) -> PauliSum {
        PauliSum {
            terms: self.terms.iter().map(|(p, v)| (*p, v * c)).collect(),
        }
    }

    pub fn add(&self, other: &PauliSum) -> PauliSum {
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.add_term(*p, *c);
        }
        out
    }

    pub fn mul(&self, other: &PauliSum) -> PauliSum {
        let mut out = PauliSum::new();
        for (p, a) in &self.terms {
            for (q, b) in &other.terms {
                let (sign, r) = p.mul(*q);
                out.add_term(r, a * b * sign);
            }
        }
        out
    }

    pub fn commutator(&self, other: &PauliSum) -> PauliSum {
        self.mul(other).add(&other.mul(self).scaled(Complex64::from(-1.0)))
    }

    pub fn adjoint(&self) -> PauliSum {
        // (X^x Z^z)† = Z^z X^x = (-1)^{|x&z|} X^x Z^z
        PauliSum {
            terms: self
                .terms
                .iter()
                .map(|(p, c)| {
                    let sign = if (p.x & p.z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    (*p, c.conj() * sign)
                })
                .collect(),
        }
    }

    /// Largest coefficient magnitude.
    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drop coefficients below `tol`.
    pub fn pruned(&self, tol: f64) -> PauliSum {
        PauliSum {
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.norm() > tol)
                .map(|(p, c)| (*p, *c))
                .collect(),
        }
    }

    /// Largest deviation from `A† = A`.
    pub fn hermiticity_error(&self) -> f64 {
        self.add(&self.adjoint().scaled(Complex64::from(-1.0))).max_coeff()
    }

    /// Largest deviation from `A† = -A`.
    pub fn anti_hermiticity_error(&self) -> f64 {
        self.add(&self.adjoint()).max_coeff()
    }
}

/// `H_X = Σ σ^X_j`.
pub fn pauli_mixer(n: usize) -> PauliSum {
    let mut s = PauliSum::new();
    for j in 0..n {
        s.add_term(PauliString::x(j), Complex64::from(1.0));
    }
    s
}

/// `H_T = Σ J σ^Z_i σ^Z_j`, with the true closing bond of a ring.
pub fn pauli_target(spec: &ChainSpec) -> PauliSum {
    let mut s = PauliSum::new();
    for (l, r, j) in spec.bonds() {
        s.add_term(
            PauliString {
                x: 0,
                z: (1 << l) | (1 << r),
            },
            Complex64::from(j),
        );
    }
    s
}

/// The symbolic commutators built from `H_X` and `H_T` alone.
#[derive(Clone, Debug)]
pub struct PauliGenerators {
    pub mixer: PauliSum,
    pub target: PauliSum,
    /// `[H_X, H_T]`.
    pub comm: PauliSum,
    /// `[H_X, [H_X, H_T]]`.
    pub xxt: PauliSum,
    /// `[H_T, [H_X, H_T]]`.
    pub txt: PauliSum,
}

impl PauliGenerators {
    pub fn new(spec: &ChainSpec) -> Self {
        let mixer = pauli_mixer(spec.n_sites());
        let target = pauli_target(spec);
        let comm = mixer.commutator(&target).pruned(0.0);
        let xxt = mixer.commutator(&comm).pruned(0.0);
        let txt = target.commutator(&comm).pruned(0.0);
        PauliGenerators {
            mixer,
            target,
            comm,
            xxt,
            txt,
        }
    }
}

/// Jordan–Wigner Majoranas as Pauli strings:
/// `a_j = (Π_{l<j} X_l) Z_j`, `b_j = -(Π_{l<j} X_l) Y_j`, the signs for which
/// `-i a_j b_j = X_j` and `-i b_j a_{j+1} = Z_j Z_{j+1}`.
pub fn majorana_string(index: usize) -> PauliSum {
    let site = index / 2;
    let string = PauliSum::single(
        PauliString {
            x: (1u64 << site) - 1,
            z: 0,
        },
        Complex64::from(1.0),
    );
    let local = if index % 2 == 0 {
        PauliSum::single(PauliString::z(site), Complex64::from(1.0))
    } else {
        PauliSum::y(site).scaled(Complex64::from(-1.0))
    };
    string.mul(&local)
}

/// `(i/4) Σ A_kl γ_k γ_l` as a Pauli sum.
pub fn reconstruct(form: &MajoranaForm) -> PauliSum {
    let a = form.matrix();
    let d = a.nrows();
    let gammas: Vec<PauliSum> = (0..d).map(majorana_string).collect();
    let mut out = PauliSum::new();
    for k in 0..d {
        for l in 0..d {
            if a[(k, l)] != 0.0 {
                out = out.add(&gammas[k].mul(&gammas[l]).scaled(Complex64::new(0.0, 0.25 * a[(k, l)])));
            }
        }
    }
    out.pruned(1e-15)
}

/// `Π O Π` with `Π = (1 + s P)/2`, `P = Π_j X_j`.
pub fn project_parity(op: &PauliSum, n: usize, sign: f64) -> PauliSum {
    let mut proj = PauliSum::single(PauliString::IDENTITY, Complex64::from(0.5));
    proj.add_term(
        PauliString {
            x: if n == 64 { u64::MAX } else { (1u64 << n) - 1 },
            z: 0,
        },
        Complex64::from(0.5 * sign),
    );
    proj.mul(op).mul(&proj).pruned(1e-15)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermion::majorana::{mixer_form, target_form};
    use crate::model::{make_open_random, make_ring_uniform};

    #[test]
    fn single_site_algebra() {
        // XZ = -ZX, Y = iXZ, Y² = 1
        let x = PauliSum::single(PauliString::x(0), Complex64::from(1.0));
        let z = PauliSum::single(PauliString::z(0), Complex64::from(1.0));
        let xz = x.mul(&z);
        let zx = z.mul(&x);
        assert_eq!(xz.add(&zx).pruned(0.0).len(), 0);
        let y = PauliSum::y(0);
        let yy = y.mul(&y).pruned(0.0);
        assert_eq!(yy, PauliSum::single(PauliString::IDENTITY, Complex64::from(1.0)));
        assert!(y.hermiticity_error() == 0.0);
        // [X, Z] = -2iY
        let c = x.commutator(&z);
        assert_eq!(c, y.scaled(Complex64::new(0.0, -2.0)).pruned(0.0));
    }

    #[test]
    fn majoranas_anticommute() {
        for k in 0..8 {
            for l in 0..8 {
                let gk = majorana_string(k);
                let gl = majorana_string(l);
                let anti = gk.mul(&gl).add(&gl.mul(&gk)).pruned(1e-15);
                let expect = if k == l {
                    PauliSum::single(PauliString::IDENTITY, Complex64::from(2.0))
                } else {
                    PauliSum::new()
                };
                assert_eq!(anti, expect, "{k} {l}");
            }
        }
    }

    #[test]
    fn open_chain_forms_are_exact() {
        let spec = make_open_random(5, 4).unwrap();
        let diff = reconstruct(&target_form(&spec)).add(&pauli_target(&spec).scaled(Complex64::from(-1.0)));
        assert!(diff.max_coeff() < 1e-14);
        let diff = reconstruct(&mixer_form(&spec)).add(&pauli_mixer(5).scaled(Complex64::from(-1.0)));
        assert!(diff.max_coeff() < 1e-14);
    }

    #[test]
    fn ring_target_agrees_in_parity_sector() {
        for n in [4, 5] {
            let spec = make_ring_uniform(n).unwrap();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let diff = reconstruct(&target_form(&spec)).add(&pauli_target(&spec).scaled(Complex64::from(-1.0)));
            assert!(diff.max_coeff() > 0.5);
            assert!(project_parity(&diff, n, sign).max_coeff() < 1e-14);
        }
    }
}
