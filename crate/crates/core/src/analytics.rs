//! Closed forms and derived metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Boundary, ChainSpec, SpectrumBounds, Variant};

/// Energies this far below the ground energy are rejected rather than clamped.
pub const BELOW_GROUND_TOL: f64 = 1e-9;

/// `(e − e_min)/(e_max − e_min)`, clamped at zero within tolerance.
pub fn residual_energy(e: f64, bounds: SpectrumBounds) -> Result<f64> {
    let width = bounds.e_max - bounds.e_min;
    if !(width > 0.0) {
        return Err(Error::DegenerateBounds {
            e_min: bounds.e_min,
            e_max: bounds.e_max,
        });
    }
    if e < bounds.e_min - BELOW_GROUND_TOL {
        return Err(Error::BelowGround {
            energy: e,
            e_min: bounds.e_min,
        });
    }
    Ok(((e - bounds.e_min) / width).max(0.0))
}

/// Residual energy of the conjectured ring optimum.
///
/// Zero once `p ≥ ⌊N/2⌋`; for odd `N` the last step before that is where
/// the odd-branch expression would turn negative.
pub fn upper_bound_ring(n: usize, p: usize) -> f64 {
    if p >= n / 2 {
        return 0.0;
    }
    let (nf, pf) = (n as f64, p as f64);
    if n % 2 == 0 {
        1.0 / (2.0 * pf + 2.0)
    } else {
        nf / (nf - 1.0) * (1.0 / (2.0 * pf + 2.0) - 1.0 / nf)
    }
}

/// Conjectured optimum of the ring cost at depth `p`.
pub fn conjectured_min_ring(n: usize, p: usize) -> f64 {
    let (nf, pf) = (n as f64, p as f64);
    if p < n / 2 {
        -nf * pf / (pf + 1.0)
    } else if n % 2 == 0 {
        -nf
    } else {
        -nf + 2.0
    }
}

/// `E_1 = −(N/2) sin 4β sin 4γ` on the uniform ring.
pub fn cost_p1_ring(n: usize, beta: f64, gamma: f64) -> f64 {
    -0.5 * n as f64 * (4.0 * beta).sin() * (4.0 * gamma).sin()
}

/// Depth-one cost on an open chain with arbitrary couplings.
pub fn cost_p1_open(spec: &ChainSpec, beta: f64, gamma: f64) -> Result<f64> {
    if spec.boundary() != Boundary::Open {
        return Err(Error::InvalidChain("closed form needs an open chain".into()));
    }
    if spec.n_sites() < 4 {
        return Err(Error::InvalidChain("closed form needs at least 4 sites".into()));
    }
    let j = spec.couplings();
    let m = j.len();
    let s2 = |x: f64| (gamma * x).sin().powi(2);
    let c2 = |x: f64| (gamma * x).cos().powi(2);
    let bond = |x: f64| x * (2.0 * gamma * x).sin();
    let interior: f64 = (1..m - 1)
        .map(|i| bond(j[i]) * (1.0 - s2(j[i - 1]) - s2(j[i + 1])))
        .sum();
    let ends = bond(j[0]) * c2(j[1]) + bond(j[m - 1]) * c2(j[m - 2]);
    Ok(-(4.0 * beta).sin() * (interior + ends))
}

/// Convergence depth from the light-cone subgraph argument on a uniform ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergencePrediction {
    pub variant: Variant,
    /// Smallest `p` whose light-cone subgraph exceeds the ring.
    pub p_star: usize,
    /// Vertices of the subgraph at `p_star`.
    pub subgraph_vertices: usize,
    /// Growth of the subgraph per step: 2, 4 or 6.
    pub growth: usize,
    /// Smallest `p` with `2p ≥ N` (QAOA only).
    pub p_two_p_rule: Option<usize>,
}

impl ConvergencePrediction {
    /// `growth·p + 2`.
    pub fn subgraph_vertices_at(&self, p: usize) -> usize {
        self.growth * p + 2
    }
}

pub fn predicted_convergence_step(spec: &ChainSpec, variant: Variant) -> Result<ConvergencePrediction> {
    if spec.boundary() != Boundary::Periodic || !spec.is_uniform() {
        return Err(Error::InvalidChain(
            "convergence prediction needs a uniform ring".into(),
        ));
    }
    let growth = match variant {
        Variant::Qaoa => 2,
        Variant::QaoaCd => 4,
        Variant::Qaoa2Cd => 6,
        v => return Err(Error::WrongVariant(v, "no subgraph rule for constrained variants")),
    };
    let n = spec.n_sites();
    let p_star = (1..).find(|p| growth * p + 2 > n).unwrap();
    Ok(ConvergencePrediction {
        variant,
        p_star,
        subgraph_vertices: growth * p_star + 2,
        growth,
        p_two_p_rule: (variant == Variant::Qaoa).then(|| n.div_ceil(2)),
    })
}

/// Smallest depth (1-based) whose residual is at most `eps`.
pub fn threshold_crossing(residuals: &[f64], eps: f64) -> Option<usize> {
    residuals.iter().position(|&r| r <= eps).map(|i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_open_uniform, make_ring_uniform, spectrum_bounds};
    use std::f64::consts::PI;

    #[test]
    fn residual_basics() {
        let b = SpectrumBounds { e_min: -10.0, e_max: 10.0 };
        assert_eq!(residual_energy(-10.0, b).unwrap(), 0.0);
        assert_eq!(residual_energy(10.0, b).unwrap(), 1.0);
        assert_eq!(residual_energy(-5.0, b).unwrap(), 0.25);
        assert_eq!(residual_energy(-10.0 - 1e-10, b).unwrap(), 0.0);
        assert!(matches!(residual_energy(-10.1, b), Err(Error::BelowGround { .. })));
        let flat = SpectrumBounds { e_min: 1.0, e_max: 1.0 };
        assert!(matches!(residual_energy(1.0, flat), Err(Error::DegenerateBounds { .. })));
    }

    #[test]
    fn ring_bound_values() {
        assert_eq!(upper_bound_ring(10, 1), 0.25);
        assert_eq!(upper_bound_ring(10, 5), 0.0);
        assert!((upper_bound_ring(7, 1) - 0.125).abs() < 1e-15);
        assert_eq!(conjectured_min_ring(10, 3), -7.5);
        assert_eq!(conjectured_min_ring(10, 5), -10.0);
        assert_eq!(conjectured_min_ring(7, 4), -5.0);
    }

    #[test]
    fn bound_is_residual_of_conjecture() {
        for n in 4..=30 {
            let bounds = spectrum_bounds(&make_ring_uniform(n).unwrap());
            for p in 1..=20 {
                let r = residual_energy(conjectured_min_ring(n, p), bounds).unwrap();
                assert!((r - upper_bound_ring(n, p)).abs() < 1e-14, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn bound_monotone_and_vanishes() {
        for n in 3..=30 {
            for p in 1..=20 {
                assert!(upper_bound_ring(n, p + 1) <= upper_bound_ring(n, p));
                if 2 * p >= n {
                    assert_eq!(upper_bound_ring(n, p), 0.0);
                }
                assert!(upper_bound_ring(n, p) >= 0.0);
            }
        }
    }

    #[test]
    fn ring_closed_form() {
        assert!((cost_p1_ring(10, PI / 8.0, PI / 8.0) + 5.0).abs() < 1e-12);
        assert!((cost_p1_ring(10, 3.0 * PI / 8.0, 3.0 * PI / 8.0) + 5.0).abs() < 1e-12);
        assert_eq!(cost_p1_ring(10, 0.0, 0.4), 0.0);
        let mut best = f64::INFINITY;
        for i in 0..=400 {
            for j in 0..=400 {
                let (b, g) = (i as f64 * PI / 800.0, j as f64 * PI / 800.0);
                best = best.min(cost_p1_ring(12, b, g));
            }
        }
        assert!((best - conjectured_min_ring(12, 1)).abs() < 1e-9);
    }

    #[test]
    fn open_closed_form_uniform_specialization() {
        // N−3 interior bonds, each sin2γ cos2γ, plus two end bonds
        let spec = make_open_uniform(20).unwrap();
        for (b, g) in [(0.3f64, 0.2f64), (0.1, -0.7), (1.2, 0.45)] {
            let expect = -(4.0 * b).sin()
                * (17.0 * (2.0 * g).sin() * (2.0 * g).cos() + 2.0 * g.cos().powi(2) * (2.0 * g).sin());
            assert!((cost_p1_open(&spec, b, g).unwrap() - expect).abs() < 1e-12);
        }
        assert_eq!(cost_p1_open(&spec, 0.0, 0.3).unwrap(), 0.0);
        assert!(cost_p1_open(&make_ring_uniform(6).unwrap(), 0.1, 0.1).is_err());
        assert!(cost_p1_open(&make_open_uniform(3).unwrap(), 0.1, 0.1).is_err());
    }

    #[test]
    fn predicted_steps() {
        let ring = make_ring_uniform(10).unwrap();
        let q = predicted_convergence_step(&ring, Variant::Qaoa).unwrap();
        assert_eq!((q.p_star, q.subgraph_vertices, q.p_two_p_rule), (5, 12, Some(5)));
        let cd = predicted_convergence_step(&ring, Variant::QaoaCd).unwrap();
        assert_eq!((cd.p_star, cd.subgraph_vertices), (3, 14));
        let cd2 = predicted_convergence_step(&ring, Variant::Qaoa2Cd).unwrap();
        assert_eq!((cd2.p_star, cd2.subgraph_vertices), (2, 14));
        assert!(predicted_convergence_step(&ring, Variant::QaoaCd2p).is_err());
        assert!(predicted_convergence_step(&make_open_uniform(10).unwrap(), Variant::Qaoa).is_err());
    }

    #[test]
    fn crossings() {
        assert_eq!(threshold_crossing(&[0.5, 0.2, 0.009], 0.01), Some(3));
        assert_eq!(threshold_crossing(&[0.5, 0.2], 0.01), None);
    }
}
