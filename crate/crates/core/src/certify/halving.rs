//! `log|z_{n+1}| = 1/2 log|f_n|` on square-root towers, checked pointwise.

use crate::error::{Error, Result};
use crate::tower::{TowerKind, TowerSpec};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalvingReport {
    pub max_residual: f64,
    /// Largest residual per stage `1..=N`.
    pub per_stage: Vec<f64>,
    pub samples: usize,
    /// Points skipped because some `f_n` vanishes there.
    pub skipped: Vec<Complex64>,
}

/// Largest `|log|z_{n+1}| - 1/2 log|f_n(z_1..z_n)||` over the points and stages.
pub fn halving_identity_check(tower: &TowerSpec, points: &[Vec<Complex64>]) -> Result<HalvingReport> {
    if tower.kind != TowerKind::SquareRoot {
        return Err(Error::InvalidParameter("halving identity needs a square-root tower".into()));
    }
    let n = tower.len();
    let stack = tower.stack(n)?;
    let mut per_stage = vec![0.0f64; n];
    let mut skipped = Vec::new();
    let mut used = 0;
    'points: for z in points {
        if z.len() != n + 1 {
            return Err(Error::InvalidParameter(format!("point has {} coordinates, expected {}", z.len(), n + 1)));
        }
        let mut res = vec![0.0; n];
        for s in 1..=n {
            let f = stack.eval_f(s, z);
            if f.norm() == 0.0 || z[s].norm() == 0.0 {
                skipped.push(z[0]);
                continue 'points;
            }
            res[s - 1] = (z[s].norm().ln() - 0.5 * f.norm().ln()).abs();
        }
        used += 1;
        for (p, r) in per_stage.iter_mut().zip(res) {
            *p = p.max(r);
        }
    }
    Ok(HalvingReport {
        max_residual: per_stage.iter().fold(0.0, |a, &b| a.max(b)),
        per_stage,
        samples: used,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::{build_sqrt_tower, sqrt_fiber, SqrtTowerConfig};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn built_fibers_satisfy_identity() {
        let t = build_sqrt_tower(&SqrtTowerConfig::new(3, 5)).unwrap();
        let stack = t.stack(3).unwrap();
        let pts: Vec<Vec<Complex64>> = [c(0.1, 0.2), c(-0.5, 0.3), c(0.7, -0.6)]
            .iter()
            .flat_map(|&z| sqrt_fiber(&stack, z).unwrap().into_iter().map(|p| p.z))
            .collect();
        assert_eq!(pts.len(), 24);
        let r = halving_identity_check(&t, &pts).unwrap();
        assert!(r.max_residual <= 1e-12, "{}", r.max_residual);
        assert_eq!(r.samples, 24);
    }

    #[test]
    fn perturbation_propagates_at_half_rate() {
        let t = build_sqrt_tower(&SqrtTowerConfig::new(1, 2)).unwrap();
        let stack = t.stack(1).unwrap();
        let z1 = c(0.3, 0.1);
        let f = stack.eval_f(1, &[z1]);
        // z2^2 = f (1 + 1e-3): the log-modulus gap is 1/2 log(1.001).
        let z2 = (f * 1.001).sqrt();
        let r = halving_identity_check(&t, &[vec![z1, z2]]).unwrap();
        assert!((r.max_residual - 0.5 * 1.001f64.ln()).abs() < 1e-12);
        assert!((r.max_residual - 5e-4).abs() < 1e-6);
    }

    #[test]
    fn zero_values_are_skipped() {
        let t = build_sqrt_tower(&SqrtTowerConfig::new(1, 2)).unwrap();
        let r = halving_identity_check(&t, &[vec![c(0.0, 0.0), c(0.0, 0.0)]]).unwrap();
        assert_eq!(r.samples, 0);
        assert_eq!(r.skipped.len(), 1);
    }
}
