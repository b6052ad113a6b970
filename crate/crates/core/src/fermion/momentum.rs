//! Pseudo-spin decomposition of uniform rings.
//!
//! Translation invariance splits the Nambu space into two-dimensional
//! subspaces spanned by `(φ_q, 0)` and `(0, φ_q)` with `φ_q(j) = e^{iqj}/√N`.
//! The closing-bond sign fixes the allowed momenta: `q = (2m+1)π/N` for even
//! `N` (antiperiodic), `q = 2πm/N` for odd `N`. The block at `-q` is the
//! particle–hole image of the block at `q`, so one representative per pair
//! suffices; `q = 0` (odd `N`) is its own partner.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use std::f64::consts::PI;

use super::generator::QuadraticGenerator;
use super::state::CircuitGenerators;
use crate::error::{Error, Result};
use crate::model::{
    expand_constrained, AngleSchedule, Boundary, ChainSpec, Variant, ALPHA, BETA, DELTA, GAMMA,
    ZETA,
};

type Block = Matrix2<Complex64>;

#[derive(Clone, Debug, PartialEq)]
pub struct MomentumBlock {
    pub k_index: usize,
    /// Lattice momentum `q` of the representative.
    pub theta_k: f64,
    /// `false` for a self-conjugate momentum.
    pub paired: bool,
    pub mixer: Block,
    pub target: Block,
    pub cd: Block,
    pub xxt: Block,
    pub txt: Block,
}

fn momentum(n: usize, m: usize) -> f64 {
    if n % 2 == 0 {
        (2 * m + 1) as f64 * PI / n as f64
    } else {
        2.0 * PI * m as f64 / n as f64
    }
}

fn basis(n: usize, q: f64) -> DMatrix<Complex64> {
    let norm = 1.0 / (n as f64).sqrt();
    let mut w = DMatrix::zeros(2 * n, 2);
    for j in 0..n {
        let phase = Complex64::from_polar(norm, q * j as f64);
        w[(j, 0)] = phase;
        w[(n + j, 1)] = phase;
    }
    w
}

fn project(gen: &QuadraticGenerator, w: &DMatrix<Complex64>) -> Block {
    let h = w.adjoint() * &gen.matrix * w;
    Block::new(h[(0, 0)], h[(0, 1)], h[(1, 0)], h[(1, 1)])
}

/// Block of the partner momentum `-q`: `-S h* S` with `S` the swap.
fn partner(h: &Block) -> Block {
    -Block::new(h[(1, 1)].conj(), h[(1, 0)].conj(), h[(0, 1)].conj(), h[(0, 0)].conj())
}

/// Blocks `k = 0 … ⌊(N−1)/2⌋` of every generator kind.
pub fn momentum_blocks(spec: &ChainSpec) -> Result<Vec<MomentumBlock>> {
    if spec.boundary() != Boundary::Periodic || !spec.is_uniform() {
        return Err(Error::InvalidChain(
            "momentum blocks need a ring with uniform couplings".into(),
        ));
    }
    let n = spec.n_sites();
    let gens = CircuitGenerators::new(spec);
    Ok((0..=(n - 1) / 2)
        .map(|m| {
            let q = momentum(n, m);
            let w = basis(n, q);
            MomentumBlock {
                k_index: m,
                theta_k: q,
                paired: !(n % 2 == 1 && m == 0),
                mixer: project(&gens.mixer, &w),
                target: project(&gens.target, &w),
                cd: project(&gens.cd, &w),
                xxt: project(&gens.xxt, &w),
                txt: project(&gens.txt, &w),
            }
        })
        .collect())
}

/// Rebuild a full BdG matrix from per-block matrices, adding the
/// particle–hole partners.
pub fn reassemble(n: usize, blocks: &[(f64, bool, Block)]) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    let mut add = |q: f64, h: &Block| {
        let w = basis(n, q);
        let hd = DMatrix::from_fn(2, 2, |i, j| h[(i, j)]);
        m += &w * hd * w.adjoint();
    };
    for (q, paired, h) in blocks {
        add(*q, h);
        if *paired {
            add(-*q, &partner(h));
        }
    }
    m
}

/// `exp(iθh)` for a 2×2 Hermitian `h`.
fn expi(h: &Block, theta: f64) -> Block {
    let a = (h[(0, 0)].re + h[(1, 1)].re) / 2.0;
    let z = (h[(0, 0)].re - h[(1, 1)].re) / 2.0;
    let r = (z * z + h[(0, 1)].norm_sqr()).sqrt();
    let phase = Complex64::from_polar(1.0, theta * a);
    if r == 0.0 {
        return Block::identity() * phase;
    }
    let traceless = h - Block::identity() * Complex64::from(a);
    (Block::identity() * Complex64::from((theta * r).cos())
        + traceless * Complex64::new(0.0, (theta * r).sin() / r))
        * phase
}

/// Circuit evaluation on the pseudo-spin blocks, `O(N p)` per schedule.
#[derive(Clone, Debug)]
pub struct MomentumCircuit {
    blocks: Vec<MomentumBlock>,
}

impl MomentumCircuit {
    pub fn new(spec: &ChainSpec) -> Result<Self> {
        Ok(MomentumCircuit {
            blocks: momentum_blocks(spec)?,
        })
    }

    pub fn blocks(&self) -> &[MomentumBlock] {
        &self.blocks
    }

    pub fn energy(&self, schedule: &AngleSchedule) -> Result<f64> {
        let s = if schedule.variant().is_constrained() {
            expand_constrained(schedule)?
        } else {
            schedule.clone()
        };
        let mut energy = 0.0;
        for b in &self.blocks {
            let mut g = Block::new(
                Complex64::from(0.0),
                Complex64::from(0.0),
                Complex64::from(0.0),
                Complex64::from(1.0),
            );
            let mut apply = |h: &Block, theta: f64| {
                let v = expi(h, theta);
                g = v * g * v.adjoint();
            };
            for row in s.rows() {
                if s.variant() == Variant::Qaoa2Cd {
                    let h = b.xxt * Complex64::from(row[DELTA]) - b.txt * Complex64::from(row[ZETA]);
                    apply(&h, 1.0);
                }
                if s.variant() != Variant::Qaoa {
                    apply(&b.cd, row[ALPHA]);
                }
                apply(&b.target, -row[GAMMA]);
                apply(&b.mixer, -row[BETA]);
            }
            let tr_hg = (b.target * g).trace().re;
            energy += if b.paired {
                0.5 * b.target.trace().re - tr_hg
            } else {
                -0.5 * tr_hg
            };
        }
        Ok(energy)
    }
}
