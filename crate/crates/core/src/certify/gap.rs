//! The nontriviality gap `|int (zbar1 - g) dmu| / ||mu||` over a seeded family
//! of test functions holomorphic near `X_N^k`.
//!
//! Since every such `g` is annihilated by `mu`, the gap is the same for all of
//! them and lower-bounds the uniform distance from `zbar1` to each; sampled
//! sup norms on boundary and fiber points corroborate this.

use crate::cheese::CheeseSpec;
use crate::error::{Error, Result};
use crate::poly::{Polynomial, RationalFunction};
use crate::quadrature::{region_integral, Integrand, MeasureReport, POLE_TOLERANCE};
use crate::tower::dictionary::removed_point;
use crate::tower::path::StageStack;
use crate::tower::region::Region;
use crate::tower::{exp_fiber, grid_points};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub label: String,
    pub g: RationalFunction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub label: String,
    /// `int g dmu`.
    pub integral: Complex64,
    pub quadrature_error: f64,
    /// `|int (zbar1 - g) dmu| / ||mu||`.
    pub gap: f64,
    /// Largest sampled `|zbar1 - g|`.
    pub sampled_sup: f64,
    /// Largest sampled `|g|`.
    pub sampled_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NontrivialityReport {
    pub stage: usize,
    pub k: usize,
    pub measure_norm: f64,
    pub moment: Complex64,
    /// `B_lb / 2 pi`.
    pub theoretical_floor: f64,
    pub gap: f64,
    pub sampled_sup_norm_min: f64,
    pub annihilation_max: f64,
    pub max_test_norm: f64,
    pub sample_count: usize,
    pub tests: Vec<TestResult>,
    /// Tests dropped because of a pole near the sample set or the boundary.
    pub skipped: Vec<String>,
}

impl NontrivialityReport {
    /// `annihilation_max / (||mu|| max ||g||)`.
    pub fn annihilation_ratio(&self) -> f64 {
        let scale = self.measure_norm * self.max_test_norm;
        if scale > 0.0 { self.annihilation_max / scale } else { 0.0 }
    }

    /// Whether every sampled `||zbar1 - g||` is at least `gap - slack`.
    pub fn sup_bound_holds(&self, slack: f64) -> bool {
        self.tests.iter().all(|t| t.sampled_sup >= self.gap - slack)
    }
}

fn rand_coeff(rng: &mut ChaCha8Rng, scale: f64) -> Complex64 {
    Complex64::from_polar(scale * rng.gen_range(0.2..1.0), rng.gen_range(-PI..PI))
}

fn poly_z1(arity: usize, degree: u32, rng: &mut ChaCha8Rng) -> Polynomial {
    let z = Polynomial::variable(arity, 0);
    let mut p = Polynomial::constant(arity, rand_coeff(rng, 1.0));
    let mut pow = Polynomial::constant(arity, Complex64::new(1.0, 0.0));
    for _ in 0..degree {
        pow = pow.mul(&z);
        p = p.add(&pow.scale(rand_coeff(rng, 1.0)));
    }
    p
}

/// `count` seeded test functions of `z1..z_{stage+1}`: the zero function,
/// polynomials of degree at most 4 in `z1`, sums of simple poles placed in the
/// first `k` holes (outside the closed disc when `k = 0`), Mobius-type
/// quotients, and, for `stage >= 1`, polynomials in a lifted coordinate.
pub fn test_family(base: &CheeseSpec, k: usize, stage: usize, count: usize, seed: u64) -> Vec<TestFunction> {
    let arity = stage + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let (label, g) = match i % 4 {
            _ if i == 0 => ("zero".to_string(), RationalFunction::polynomial(Polynomial::zero(arity))),
            1 => {
                let d = rng.gen_range(1..=4);
                (format!("poly_z1_deg{d}"), RationalFunction::polynomial(poly_z1(arity, d, &mut rng)))
            }
            2 => {
                let h1 = if k > 0 { rng.gen_range(0..k) } else { 0 };
                let h2 = if k > 0 { rng.gen_range(0..k) } else { 0 };
                let p1 = removed_point(Some(base), k, &mut rng, h1);
                let p2 = removed_point(Some(base), k, &mut rng, h2);
                let (a1, a2) = (rand_coeff(&mut rng, 0.3), rand_coeff(&mut rng, 0.3));
                let l1 = Polynomial::shifted_variable(arity, 0, p1);
                let l2 = Polynomial::shifted_variable(arity, 0, p2);
                let num = l2.scale(a1).add(&l1.scale(a2));
                ("simple_poles".to_string(), RationalFunction::new(num, l1.mul(&l2)))
            }
            3 if stage >= 1 => {
                let j = rng.gen_range(1..=stage);
                let w = Polynomial::variable(arity, j);
                let z = Polynomial::variable(arity, 0);
                let p = Polynomial::constant(arity, rand_coeff(&mut rng, 1.0))
                    .add(&w.scale(rand_coeff(&mut rng, 0.2)))
                    .add(&w.mul(&z).scale(rand_coeff(&mut rng, 0.2)))
                    .add(&w.mul(&w).scale(rand_coeff(&mut rng, 0.02)));
                (format!("poly_z{}", j + 1), RationalFunction::polynomial(p))
            }
            3 => {
                let d = rng.gen_range(1..=4);
                (format!("poly_z1_deg{d}"), RationalFunction::polynomial(poly_z1(arity, d, &mut rng)))
            }
            _ => {
                let h = if k > 0 { rng.gen_range(0..k) } else { 0 };
                let p = removed_point(Some(base), k, &mut rng, h);
                let num = poly_z1(arity, 1, &mut rng).scale(Complex64::new(0.5, 0.0));
                let den = Polynomial::shifted_variable(arity, 0, p);
                ("mobius".to_string(), RationalFunction::new(num, den))
            }
        };
        out.push(TestFunction { label, g });
    }
    out
}

/// Points of `X_N^k` for sup-norm sampling: every lifted sample of the region
/// boundary, plus the fibers over a grid of spacing `h` in `X_0^k`.
pub fn sup_samples(
    region: &Region,
    stack: &StageStack,
    windows: &[(f64, usize)],
    base: &CheeseSpec,
    h: f64,
) -> Vec<Vec<Complex64>> {
    let mut pts: Vec<Vec<Complex64>> = region
        .pieces
        .iter()
        .flat_map(|p| p.path.samples.iter().map(|s| s.z.clone()))
        .collect();
    for z1 in grid_points(Some(base), region.k, h) {
        if let Ok(f) = exp_fiber(stack, windows, z1) {
            pts.extend(f.into_iter().map(|p| p.z));
        }
    }
    pts
}

fn sampled_norms(g: &RationalFunction, points: &[Vec<Complex64>]) -> Option<(f64, f64)> {
    let mut sup = 0.0f64;
    let mut norm = 0.0f64;
    for z in points {
        let (p, q) = g.eval_parts(z);
        if q.norm() < POLE_TOLERANCE {
            return None;
        }
        let v = p / q;
        sup = sup.max((z[0].conj() - v).norm());
        norm = norm.max(v.norm());
    }
    Some((sup, norm))
}

/// Gap, annihilation and sampled sup norms for each test function.
///
/// `report` must be a direct measure of `region`.
pub fn nontriviality_gap(
    report: &MeasureReport,
    region: &Region,
    stack: &StageStack,
    tests: &[TestFunction],
    samples: &[Vec<Complex64>],
    b_lb: f64,
    tol: f64,
) -> Result<NontrivialityReport> {
    if report.stage != region.stage || report.k != region.k {
        return Err(Error::InvalidParameter("measure report does not belong to the region".into()));
    }
    let norm = report.total_variation;
    let moment = report.moment_zbar;
    let outcomes: Vec<std::result::Result<TestResult, String>> = tests
        .par_iter()
        .map(|t| {
            let (sampled_sup, sampled_norm) = sampled_norms(&t.g, samples)
                .ok_or_else(|| format!("{}: pole near a sample point", t.label))?;
            let q = match region_integral(region, stack, &Integrand::Rational(t.g.clone()), tol) {
                Ok(q) => q,
                Err(Error::PoleProximity { .. }) => return Err(format!("{}: pole near the boundary", t.label)),
                Err(e) => return Err(format!("{}: {e}", t.label)),
            };
            Ok(TestResult {
                label: t.label.clone(),
                integral: q.value,
                quadrature_error: q.error,
                gap: (moment - q.value).norm() / norm,
                sampled_sup,
                sampled_norm,
            })
        })
        .collect();
    let mut results = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => results.push(r),
            Err(s) => skipped.push(s),
        }
    }
    let fold = |f: fn(&TestResult) -> f64, init: f64, op: fn(f64, f64) -> f64| results.iter().map(f).fold(init, op);
    Ok(NontrivialityReport {
        stage: report.stage,
        k: report.k,
        measure_norm: norm,
        moment,
        theoretical_floor: b_lb / (2.0 * PI),
        gap: fold(|r| r.gap, f64::INFINITY, f64::min),
        sampled_sup_norm_min: fold(|r| r.sampled_sup, f64::INFINITY, f64::min),
        annihilation_max: fold(|r| r.integral.norm(), 0.0, f64::max),
        max_test_norm: fold(|r| r.sampled_norm, 0.0, f64::max),
        sample_count: samples.len(),
        tests: results,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cheese::generate_cheese;
    use crate::quadrature::direct_measure;
    use crate::tower::region::stage0_region;
    use crate::tower::TowerKind;

    fn stage0(spec: &CheeseSpec, k: usize, count: usize) -> NontrivialityReport {
        let region = stage0_region(spec, k, 0.1).unwrap();
        let stack = StageStack::new(TowerKind::Exponential, Vec::new());
        let (report, _) = direct_measure(&region, &stack, 1e-12).unwrap();
        let tests = test_family(spec, k, 0, count, 9);
        let samples = sup_samples(&region, &stack, &[], spec, 0.05);
        nontriviality_gap(&report, &region, &stack, &tests, &samples, spec.area_lower_bound(), 1e-12).unwrap()
    }

    #[test]
    fn full_disc_gap_is_one() {
        let spec = generate_cheese(1, 0.5, 3, 0.01).unwrap();
        let r = stage0(&spec, 0, 12);
        assert!(r.skipped.is_empty());
        assert!((r.gap - 1.0).abs() < 1e-12, "{}", r.gap);
        assert!((r.tests[0].sampled_sup - 1.0).abs() < 1e-12);
        assert!(r.annihilation_ratio() < 1e-10);
    }

    #[test]
    fn cheese_gap_exceeds_floor() {
        let spec = generate_cheese(2, 0.5, 8, 0.01).unwrap();
        let r = stage0(&spec, 8, 20);
        assert_eq!(r.tests.len() + r.skipped.len(), 20);
        assert!(r.gap >= r.theoretical_floor, "{} < {}", r.gap, r.theoretical_floor);
        assert!(r.sup_bound_holds(1e-3));
        assert!(r.annihilation_ratio() < 1e-8);
    }

    #[test]
    fn family_is_seeded_and_pole_free_on_cheese() {
        let spec = generate_cheese(5, 0.5, 6, 0.01).unwrap();
        let a = test_family(&spec, 6, 2, 30, 4);
        assert_eq!(a, test_family(&spec, 6, 2, 30, 4));
        assert!(a.iter().all(|t| t.g.arity == 3));
        let pts: Vec<Vec<Complex64>> = grid_points(Some(&spec), 6, 0.05)
            .into_iter()
            .map(|z| vec![z, Complex64::new(0.1, 0.2), Complex64::new(-0.3, 1.0)])
            .collect();
        assert!(a.iter().all(|t| sampled_norms(&t.g, &pts).is_some()));
    }
}
