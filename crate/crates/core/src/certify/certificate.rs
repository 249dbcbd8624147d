//! The two inequalities a stage-`N` boundary measure must satisfy:
//! `||mu|| < 4 pi m_1...m_N - delta` and `|int zbar1 dmu| > 2 B m_1...m_N`.

use crate::quadrature::{MeasureMethod, MeasureReport};
use crate::tower::TowerSpec;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub stage: usize,
    pub k: usize,
    pub method: MeasureMethod,
    pub sheet_product: f64,
    pub target_delta: f64,
    pub lhs_norm: f64,
    /// `4 pi m_1...m_N - target_delta`.
    pub rhs_norm_bound: f64,
    /// Achieved margin `4 pi m_1...m_N - lhs_norm`.
    pub delta_margin: f64,
    pub moment_abs: f64,
    /// `2 B_lb m_1...m_N`.
    pub moment_bound: f64,
    pub b_lb: f64,
    pub pass_condition_8: bool,
    pub pass_condition_9: bool,
}

impl Certificate {
    pub fn new(report: &MeasureReport, sheet_product: f64, b_lb: f64, target_delta: f64) -> Self {
        let full = 4.0 * PI * sheet_product;
        let lhs_norm = report.total_variation;
        let rhs_norm_bound = full - target_delta;
        let moment_abs = report.moment_zbar.norm();
        let moment_bound = 2.0 * b_lb * sheet_product;
        Self {
            stage: report.stage,
            k: report.k,
            method: report.method,
            sheet_product,
            target_delta,
            lhs_norm,
            rhs_norm_bound,
            delta_margin: full - lhs_norm,
            moment_abs,
            moment_bound,
            b_lb,
            pass_condition_8: lhs_norm < rhs_norm_bound,
            pass_condition_9: moment_abs > moment_bound,
        }
    }

    pub fn passes(&self) -> bool {
        self.pass_condition_8 && self.pass_condition_9
    }

    /// Whether the stored booleans agree with the stored numbers.
    pub fn is_consistent(&self) -> bool {
        self.pass_condition_8 == (self.lhs_norm < self.rhs_norm_bound)
            && self.pass_condition_9 == (self.moment_abs > self.moment_bound)
    }

    pub fn summary(&self) -> String {
        let verdict = |b: bool| if b { "pass" } else { "FAIL" };
        format!(
            "N={} k={}: norm {:.6} < {:.6} [{}] (delta {:.6}); |moment| {:.6} > {:.6} [{}]",
            self.stage,
            self.k,
            self.lhs_norm,
            self.rhs_norm_bound,
            verdict(self.pass_condition_8),
            self.delta_margin,
            self.moment_abs,
            self.moment_bound,
            verdict(self.pass_condition_9),
        )
    }
}

/// Certificate for a measure of `tower` at the report's stage.
pub fn certify_conditions(tower: &TowerSpec, report: &MeasureReport, b_lb: f64, target_delta: f64) -> Certificate {
    Certificate::new(report, tower.sheet_product(report.stage), b_lb, target_delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cheese::{area, generate_cheese, AreaMethod};
    use crate::quadrature::stage0_measure;
    use proptest::prelude::*;

    #[test]
    fn stage0_passes_with_margin_pi() {
        for seed in 0..5 {
            let spec = generate_cheese(seed, 0.5, 12, 0.01).unwrap();
            for k in [0, 3, 12] {
                let r = stage0_measure(&spec, k).unwrap();
                let c = Certificate::new(&r, 1.0, spec.area_lower_bound(), PI);
                assert!(c.pass_condition_8, "{}", c.summary());
                assert!(c.delta_margin >= PI);
                assert!(c.pass_condition_9, "{}", c.summary());
            }
        }
    }

    #[test]
    fn moment_is_twice_monte_carlo_area() {
        let spec = generate_cheese(4, 0.5, 6, 0.01).unwrap();
        let r = stage0_measure(&spec, 6).unwrap();
        let (a, err) = area(&spec, 6, AreaMethod::MonteCarlo { samples: 400_000 }).unwrap();
        assert!((r.moment_zbar.norm() - 2.0 * a).abs() <= 2.0 * 4.0 * err);
        assert!(a >= spec.area_lower_bound() - 4.0 * err);
    }

    proptest! {
        #[test]
        fn booleans_recompute(tv in 0.0..40.0f64, mom in 0.0..30.0f64, m in 1u32..8, d in 0.0..3.0f64) {
            let mut r = stage0_measure(&crate::cheese::CheeseSpec::new(0, 0.5, 0.01, vec![]), 0).unwrap();
            r.total_variation = tv;
            r.moment_zbar = num_complex::Complex64::new(0.0, mom);
            let c = Certificate::new(&r, m as f64, 0.75 * PI, d);
            prop_assert!(c.is_consistent());
        }
    }
}
