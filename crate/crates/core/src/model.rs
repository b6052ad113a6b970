//! Problem instances, circuit variants and angle schedules.
//!
//! A [`ChainSpec`] is a one-dimensional Ising chain
//! `H_T = Σ_i J_i σ^Z_i σ^Z_{i+1}` with either periodic or open boundaries.
//! Couplings are dimensionless (energies are in units of the exchange
//! coupling).

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Open,
}

/// A validated chain instance.
///
/// Periodic chains carry `n` couplings (bond `i` joins sites `i` and
/// `(i + 1) mod n`), open chains carry `n - 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChainRepr", into = "ChainRepr")]
pub struct ChainSpec {
    n_sites: usize,
    boundary: Boundary,
    couplings: Vec<f64>,
    seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct ChainRepr {
    n: usize,
    boundary: Boundary,
    couplings: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

impl TryFrom<ChainRepr> for ChainSpec {
    type Error = Error;

    fn try_from(r: ChainRepr) -> Result<Self> {
        let mut spec = ChainSpec::new(r.n, r.boundary, r.couplings)?;
        spec.seed = r.seed;
        Ok(spec)
    }
}

impl From<ChainSpec> for ChainRepr {
    fn from(s: ChainSpec) -> Self {
        ChainRepr {
            n: s.n_sites,
            boundary: s.boundary,
            couplings: s.couplings,
            seed: s.seed,
        }
    }
}

impl ChainSpec {
    pub fn new(n_sites: usize, boundary: Boundary, couplings: Vec<f64>) -> Result<Self> {
        let (min_n, n_bonds) = match boundary {
            Boundary::Periodic => (3, n_sites),
            Boundary::Open => (2, n_sites.saturating_sub(1)),
        };
        if n_sites < min_n {
            return Err(Error::InvalidChain(format!(
                "{boundary:?} chain needs at least {min_n} sites, got {n_sites}"
            )));
        }
        if n_sites > 64 {
            return Err(Error::InvalidChain(format!("{n_sites} sites exceeds 64")));
        }
        if couplings.len() != n_bonds {
            return Err(Error::InvalidChain(format!(
                "{boundary:?} chain of {n_sites} sites needs {n_bonds} couplings, got {}",
                couplings.len()
            )));
        }
        if let Some(bad) = couplings.iter().find(|j| !j.is_finite()) {
            return Err(Error::InvalidChain(format!("non-finite coupling {bad}")));
        }
        Ok(ChainSpec {
            n_sites,
            boundary,
            couplings,
            seed: None,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// Seed the couplings were drawn from, if the instance is random.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Bonds as `(left site, right site, J)`; the closing bond of a ring is
    /// `(n - 1, 0, J)`.
    pub fn bonds(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n_sites;
        self.couplings
            .iter()
            .enumerate()
            .map(move |(i, &j)| (i, (i + 1) % n, j))
    }

    /// True when every coupling equals the first one exactly.
    pub fn is_uniform(&self) -> bool {
        self.couplings.iter().all(|&j| j == self.couplings[0])
    }

    /// Ising energy of a classical configuration; bit `i` set means spin
    /// `i` points down (`σ^Z = -1`).
    pub fn classical_energy(&self, bits: u64) -> f64 {
        self.bonds()
            .map(|(a, b, j)| {
                let aligned = ((bits >> a) ^ (bits >> b)) & 1 == 0;
                if aligned {
                    j
                } else {
                    -j
                }
            })
            .sum()
    }
}

/// Uniform antiferromagnetic ring ("ring of disagrees").
pub fn make_ring_uniform(n: usize) -> Result<ChainSpec> {
    ChainSpec::new(n, Boundary::Periodic, vec![1.0; n])
}

pub fn make_open_uniform(n: usize) -> Result<ChainSpec> {
    ChainSpec::new(n, Boundary::Open, vec![1.0; n.saturating_sub(1)])
}

/// Open chain with couplings drawn i.i.d. from `U([-1, 1])`.
///
/// The generator is ChaCha8 (`rand_chacha`) keyed by `seed_from_u64(seed)`,
/// so a given `(n, seed)` yields bit-identical couplings on every platform.
pub fn make_open_random(n: usize, seed: u64) -> Result<ChainSpec> {
    if n < 2 {
        return Err(Error::InvalidChain(format!(
            "Open chain needs at least 2 sites, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let couplings = (0..n - 1).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let mut spec = ChainSpec::new(n, Boundary::Open, couplings)?;
    spec.seed = Some(seed);
    Ok(spec)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumBounds {
    pub e_min: f64,
    pub e_max: f64,
}

/// Exact extremal eigenvalues of the diagonal Ising Hamiltonian.
///
/// On a path every bond can be satisfied independently. On a ring the bond
/// constraints multiply to one, so when the product of the preferred signs
/// is negative exactly one bond (the weakest) must be broken.
pub fn spectrum_bounds(spec: &ChainSpec) -> SpectrumBounds {
    let total: f64 = spec.couplings.iter().map(|j| j.abs()).sum();
    match spec.boundary {
        Boundary::Open => SpectrumBounds {
            e_min: -total,
            e_max: total,
        },
        Boundary::Periodic => {
            let weakest = spec
                .couplings
                .iter()
                .map(|j| j.abs())
                .fold(f64::INFINITY, f64::min);
            let negatives = spec.couplings.iter().filter(|&&j| j < 0.0).count();
            let n = spec.couplings.len();
            // ground state wants s_i s_{i+1} = -sign(J_i); frustrated when
            // the product of (-J_i) is negative
            let min_frustrated = (n - negatives) % 2 == 1;
            let max_frustrated = negatives % 2 == 1;
            SpectrumBounds {
                e_min: if min_frustrated {
                    -total + 2.0 * weakest
                } else {
                    -total
                },
                e_max: if max_frustrated {
                    total - 2.0 * weakest
                } else {
                    total
                },
            }
        }
    }
}

/// Circuit family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "qaoa")]
    Qaoa,
    #[serde(rename = "qaoa-cd")]
    QaoaCd,
    #[serde(rename = "qaoa-2cd")]
    Qaoa2Cd,
    #[serde(rename = "qaoa-cd-2p")]
    QaoaCd2p,
    #[serde(rename = "qaoa-2cd-2p")]
    Qaoa2Cd2p,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Qaoa,
        Variant::QaoaCd,
        Variant::Qaoa2Cd,
        Variant::QaoaCd2p,
        Variant::Qaoa2Cd2p,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Qaoa => "qaoa",
            Variant::QaoaCd => "qaoa-cd",
            Variant::Qaoa2Cd => "qaoa-2cd",
            Variant::QaoaCd2p => "qaoa-cd-2p",
            Variant::Qaoa2Cd2p => "qaoa-2cd-2p",
        }
    }

    pub fn is_constrained(self) -> bool {
        matches!(self, Variant::QaoaCd2p | Variant::Qaoa2Cd2p)
    }

    /// Free-form variant a constrained schedule expands into.
    pub fn free_form(self) -> Variant {
        match self {
            Variant::QaoaCd2p => Variant::QaoaCd,
            Variant::Qaoa2Cd2p => Variant::Qaoa2Cd,
            v => v,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown variant '{s}'")))
    }
}

pub fn params_per_step(variant: Variant) -> usize {
    match variant {
        Variant::Qaoa | Variant::QaoaCd2p | Variant::Qaoa2Cd2p => 2,
        Variant::QaoaCd => 3,
        Variant::Qaoa2Cd => 5,
    }
}

/// Variational angles, one row per step.
///
/// Row layout is `(γ, β)` for QAOA and the constrained variants,
/// `(γ, β, α)` for QAOA-CD and `(γ, β, α, δ, ζ)` for QAOA-2CD.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleRepr", into = "ScheduleRepr")]
pub struct AngleSchedule {
    variant: Variant,
    steps: usize,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ScheduleRepr {
    variant: Variant,
    rows: Vec<Vec<f64>>,
}

impl TryFrom<ScheduleRepr> for AngleSchedule {
    type Error = Error;

    fn try_from(r: ScheduleRepr) -> Result<Self> {
        AngleSchedule::from_rows(r.variant, &r.rows)
    }
}

impl From<AngleSchedule> for ScheduleRepr {
    fn from(s: AngleSchedule) -> Self {
        ScheduleRepr {
            variant: s.variant,
            rows: s.rows().map(<[f64]>::to_vec).collect(),
        }
    }
}

pub const GAMMA: usize = 0;
pub const BETA: usize = 1;
pub const ALPHA: usize = 2;
pub const DELTA: usize = 3;
pub const ZETA: usize = 4;

impl AngleSchedule {
    pub fn zeros(variant: Variant, steps: usize) -> Result<Self> {
        Self::from_flat(variant, steps, vec![0.0; steps * params_per_step(variant)])
    }

    pub fn from_flat(variant: Variant, steps: usize, values: Vec<f64>) -> Result<Self> {
        let width = params_per_step(variant);
        if steps == 0 || values.len() != steps * width {
            return Err(Error::ScheduleShape {
                expected_rows: steps,
                expected_width: width,
                got: format!("{} values", values.len()),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("schedule contains non-finite angles".into()));
        }
        Ok(AngleSchedule {
            variant,
            steps,
            values,
        })
    }

    pub fn from_rows(variant: Variant, rows: &[Vec<f64>]) -> Result<Self> {
        let width = params_per_step(variant);
        if rows.is_empty() || rows.iter().any(|r| r.len() != width) {
            return Err(Error::ScheduleShape {
                expected_rows: rows.len(),
                expected_width: width,
                got: format!("row widths {:?}", rows.iter().map(Vec::len).collect::<Vec<_>>()),
            });
        }
        Self::from_flat(variant, rows.len(), rows.concat())
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn width(&self) -> usize {
        params_per_step(self.variant)
    }

    /// Total number of free parameters `N_p`.
    pub fn n_params(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let w = self.width();
        &self.values[k * w..(k + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.width())
    }

    /// One parameter family (e.g. all γ's) across steps.
    pub fn family(&self, index: usize) -> Vec<f64> {
        self.rows().map(|r| r[index]).collect()
    }
}

/// Replace a constrained schedule by the equivalent free-form one, with
/// `α = -βγ/2`, `δ = β²γ/6`, `ζ = βγ²/3` on every step.
pub fn expand_constrained(schedule: &AngleSchedule) -> Result<AngleSchedule> {
    let target = match schedule.variant {
        Variant::QaoaCd2p => Variant::QaoaCd,
        Variant::Qaoa2Cd2p => Variant::Qaoa2Cd,
        v => return Err(Error::WrongVariant(v, "expected a constrained variant")),
    };
    let mut values = Vec::with_capacity(schedule.steps * params_per_step(target));
    for row in schedule.rows() {
        let (gamma, beta) = (row[GAMMA], row[BETA]);
        values.extend_from_slice(&[gamma, beta, -beta * gamma / 2.0]);
        if target == Variant::Qaoa2Cd {
            values.push(beta * beta * gamma / 6.0);
            values.push(beta * gamma * gamma / 3.0);
        }
    }
    AngleSchedule::from_flat(target, schedule.steps, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_constructors() {
        let ring = make_ring_uniform(10).unwrap();
        assert_eq!(ring.boundary(), Boundary::Periodic);
        assert_eq!(ring.couplings(), &[1.0; 10]);
        assert_eq!(make_ring_uniform(3).unwrap().couplings().len(), 3);
        assert!(make_ring_uniform(2).is_err());
    }

    #[test]
    fn open_constructors() {
        let open = make_open_uniform(20).unwrap();
        assert_eq!(open.boundary(), Boundary::Open);
        assert_eq!(open.couplings(), &[1.0; 19]);
        assert_eq!(make_open_uniform(2).unwrap().couplings(), &[1.0]);
        assert!(make_open_uniform(1).is_err());
        assert!(make_open_random(1, 3).is_err());
    }

    #[test]
    fn rejects_bad_couplings() {
        assert!(ChainSpec::new(4, Boundary::Open, vec![1.0; 4]).is_err());
        assert!(ChainSpec::new(4, Boundary::Periodic, vec![1.0; 3]).is_err());
        assert!(ChainSpec::new(3, Boundary::Open, vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn random_chain_is_deterministic_and_in_range() {
        let a = make_open_random(10, 42).unwrap();
        let b = make_open_random(10, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.seed(), Some(42));
        assert!(a.couplings().iter().all(|j| (-1.0..=1.0).contains(j)));
        assert_ne!(a.couplings(), make_open_random(10, 43).unwrap().couplings());
    }

    #[test]
    fn random_couplings_have_zero_mean() {
        let mut sum = 0.0;
        let mut count = 0usize;
        for seed in 0..10_000u64 {
            let spec = make_open_random(10, seed).unwrap();
            sum += spec.couplings().iter().sum::<f64>();
            count += spec.couplings().len();
        }
        let mean = sum / count as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn ring_bounds() {
        let b = spectrum_bounds(&make_ring_uniform(10).unwrap());
        assert_eq!((b.e_min, b.e_max), (-10.0, 10.0));
        let b = spectrum_bounds(&make_ring_uniform(7).unwrap());
        assert_eq!((b.e_min, b.e_max), (-5.0, 7.0));
    }

    #[test]
    fn open_bounds() {
        let spec = ChainSpec::new(3, Boundary::Open, vec![0.5, -0.3]).unwrap();
        let b = spectrum_bounds(&spec);
        assert!((b.e_min + 0.8).abs() < 1e-15 && (b.e_max - 0.8).abs() < 1e-15);
    }

    #[test]
    fn bounds_match_enumeration() {
        let brute = |spec: &ChainSpec| {
            (0..1u64 << spec.n_sites())
                .map(|b| spec.classical_energy(b))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| {
                    (lo.min(e), hi.max(e))
                })
        };
        for seed in 0..30 {
            let n = 2 + (seed as usize % 13);
            let spec = make_open_random(n, seed).unwrap();
            let b = spectrum_bounds(&spec);
            let (lo, hi) = brute(&spec);
            assert!((b.e_min - lo).abs() < 1e-12 && (b.e_max - hi).abs() < 1e-12);
            // random rings exercise the frustration rule
            if n >= 3 {
                let ring =
                    ChainSpec::new(n, Boundary::Periodic, make_open_random(n + 1, seed).unwrap().couplings().to_vec())
                        .unwrap();
                let b = spectrum_bounds(&ring);
                let (lo, hi) = brute(&ring);
                assert!((b.e_min - lo).abs() < 1e-12, "{ring:?}");
                assert!((b.e_max - hi).abs() < 1e-12, "{ring:?}");
            }
        }
    }

    #[test]
    fn params_table() {
        let expect = [2, 3, 5, 2, 2];
        for (v, e) in Variant::ALL.into_iter().zip(expect) {
            assert_eq!(params_per_step(v), e);
        }
    }

    #[test]
    fn constrained_expansion() {
        let s = AngleSchedule::from_rows(Variant::Qaoa2Cd2p, &[vec![0.2, 0.5]]).unwrap();
        let e = expand_constrained(&s).unwrap();
        assert_eq!(e.variant(), Variant::Qaoa2Cd);
        let r = e.row(0);
        assert_eq!((r[GAMMA], r[BETA]), (0.2, 0.5));
        assert!((r[ALPHA] + 0.05).abs() < 1e-15);
        assert!((r[DELTA] - 0.008_333_333_333_333_333).abs() < 1e-15);
        assert!((r[ZETA] - 0.006_666_666_666_666_667).abs() < 1e-15);

        let s = AngleSchedule::from_rows(Variant::QaoaCd2p, &[vec![1.3, 0.0]]).unwrap();
        let e = expand_constrained(&s).unwrap();
        assert_eq!(e.variant(), Variant::QaoaCd);
        assert_eq!(e.row(0)[ALPHA], 0.0);
        assert_eq!(params_per_step(e.variant()), 3);

        let zero = expand_constrained(
            &AngleSchedule::from_rows(Variant::Qaoa2Cd2p, &[vec![0.7, 0.0]]).unwrap(),
        )
        .unwrap();
        assert!(zero.row(0)[ALPHA..].iter().all(|&v| v == 0.0));

        let free = AngleSchedule::zeros(Variant::QaoaCd, 2).unwrap();
        assert!(expand_constrained(&free).is_err());
    }

    #[test]
    fn schedule_shape_checked() {
        assert!(AngleSchedule::from_flat(Variant::QaoaCd, 2, vec![0.0; 5]).is_err());
        assert!(AngleSchedule::from_rows(Variant::Qaoa, &[vec![0.0, 0.0, 0.0]]).is_err());
        let s = AngleSchedule::zeros(Variant::Qaoa2Cd, 3).unwrap();
        assert_eq!(s.n_params(), 15);
    }

    #[test]
    fn chain_json_round_trip_is_bit_exact() {
        let spec = make_open_random(9, 7).unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"boundary\":\"open\""));
        let back: ChainSpec = serde_json::from_str(&text).unwrap();
        for (a, b) in spec.couplings().iter().zip(back.couplings()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back.seed(), Some(7));
        let bad = r#"{"n":4,"boundary":"periodic","couplings":[1,1]}"#;
        assert!(serde_json::from_str::<ChainSpec>(bad).is_err());
    }
}
