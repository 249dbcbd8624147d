//! Fitting real functions on the cheese boundary by real-linear combinations
//! of `log|g|` over a dictionary of rational functions zero-free on `X_0^k`.
//!
//! The L2 fit is a weighted least-squares solve (least-norm via SVD when the
//! dictionary is rank deficient); the sup fit refines it with Lawson's
//! iteratively reweighted least squares.

use crate::cheese::{boundary_chain, CheeseSpec};
use crate::error::{Error, Result};
use crate::poly::{Polynomial, RationalFunction};
use crate::tower::dictionary::{removed_point, unit_disc_point};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{E, PI};

/// Moduli below this count as a zero of a dictionary entry on the samples.
pub const ZERO_MARGIN: f64 = 1e-8;
/// Singular values below this fraction of the largest are dropped.
pub const RANK_TOLERANCE: f64 = 1e-12;
pub const LAWSON_ITERATIONS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitNorm {
    L2,
    Sup,
}

/// Quadrature points on `dX_0^k` with arc-length weights.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundarySamples {
    pub points: Vec<Complex64>,
    pub weights: Vec<f64>,
    pub arc: Vec<usize>,
}

/// Midpoint samples with spacing at most `h` along every boundary arc, and at
/// least four per arc.
pub fn boundary_samples(spec: &CheeseSpec, k: usize, h: f64) -> Result<BoundarySamples> {
    let chain = boundary_chain(spec, k)?;
    let mut s = BoundarySamples { points: Vec::new(), weights: Vec::new(), arc: Vec::new() };
    for (i, a) in chain.arcs.iter().enumerate() {
        let d = spec.circle(a.circle_index);
        let n = ((d.radius * a.extent() / h).ceil() as usize).max(4);
        let step = (a.end_angle - a.start_angle) / n as f64;
        for j in 0..n {
            s.points.push(d.point_at(a.start_angle + (j as f64 + 0.5) * step));
            s.weights.push(d.radius * step.abs());
            s.arc.push(i);
        }
    }
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityAtom {
    pub label: String,
    pub g: RationalFunction,
}

/// The first `size` entries of a seeded dictionary zero-free on `X_0^k`:
/// the constant `e`, `z - center` for each of the first `k` holes, then in turn
/// `z - a` with `a` in a hole, `z - a` with `|a| > 1`, and `(z - a)/(z - b)`
/// mixing both. Smaller sizes are prefixes of larger ones.
pub fn density_dictionary(spec: &CheeseSpec, k: usize, size: usize, seed: u64) -> Vec<DensityAtom> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(size);
    let lin = |a: Complex64| Polynomial::shifted_variable(1, 0, a);
    let outside = |rng: &mut ChaCha8Rng| Complex64::from_polar(rng.gen_range(1.2..3.0), rng.gen_range(-PI..PI));
    let inside = |rng: &mut ChaCha8Rng| {
        if k == 0 {
            return outside(rng);
        }
        let h = rng.gen_range(0..k);
        let d = spec.holes[h];
        d.center + unit_disc_point(rng) * (0.8 * d.radius)
    };
    for i in 0..size {
        let atom = if i == 0 {
            DensityAtom { label: "e".into(), g: RationalFunction::constant(1, Complex64::new(E, 0.0)) }
        } else if i <= k {
            let a = spec.holes[i - 1].center;
            DensityAtom { label: format!("z-c{i}"), g: RationalFunction::polynomial(lin(a)) }
        } else {
            match (i - k - 1) % 3 {
                0 => DensityAtom { label: "z-a_hole".into(), g: RationalFunction::polynomial(lin(inside(&mut rng))) },
                1 => DensityAtom { label: "z-a_out".into(), g: RationalFunction::polynomial(lin(outside(&mut rng))) },
                _ => {
                    let a = removed_point(Some(spec), k, &mut rng, i);
                    let b = outside(&mut rng);
                    DensityAtom { label: "mobius".into(), g: RationalFunction::new(lin(a), lin(b)) }
                }
            }
        };
        out.push(atom);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityFit {
    pub size: usize,
    pub norm: FitNorm,
    /// Residual in the requested norm.
    pub residual: f64,
    /// Weighted RMS residual `(sum w r^2 / sum w)^(1/2)`.
    pub residual_l2: f64,
    pub residual_sup: f64,
    pub coefficients: Vec<f64>,
    pub rank: usize,
    pub condition_estimate: f64,
    /// The larger dictionary's own solve did no better, so the previous
    /// coefficients (padded with zeros) were kept.
    pub reused_previous: bool,
}

/// `log|g_i|` at every sample, columnwise.
pub fn log_modulus_matrix(samples: &BoundarySamples, dict: &[DensityAtom]) -> Result<DMatrix<f64>> {
    let mut a = DMatrix::zeros(samples.points.len(), dict.len());
    for (j, atom) in dict.iter().enumerate() {
        for (i, &z) in samples.points.iter().enumerate() {
            let m = atom.g.eval(&[z]).norm();
            if !(m >= ZERO_MARGIN) || !m.is_finite() {
                return Err(Error::ZeroOnRegion { at: z, modulus: m });
            }
            a[(i, j)] = m.ln();
        }
    }
    Ok(a)
}

fn weighted_solve(a: &DMatrix<f64>, u: &[f64], w: &[f64]) -> (Vec<f64>, usize, f64) {
    let (rows, cols) = a.shape();
    let mut aw = DMatrix::zeros(rows, cols);
    let mut bw = DVector::zeros(rows);
    for i in 0..rows {
        let s = w[i].sqrt();
        bw[i] = s * u[i];
        for j in 0..cols {
            aw[(i, j)] = s * a[(i, j)];
        }
    }
    let scale: Vec<f64> = (0..cols).map(|j| aw.column(j).norm().max(1e-300)).collect();
    for j in 0..cols {
        aw.column_mut(j).scale_mut(1.0 / scale[j]);
    }
    let svd = aw.svd(true, true);
    let smax = svd.singular_values.max();
    let cut = RANK_TOLERANCE * smax;
    let rank = svd.singular_values.iter().filter(|&&s| s > cut).count();
    let smin = svd.singular_values.iter().filter(|&&s| s > cut).fold(f64::INFINITY, |a, &b| a.min(b));
    let x = svd.solve(&bw, cut).expect("SVD computed with both factors");
    let coeffs = (0..cols).map(|j| x[j] / scale[j]).collect();
    (coeffs, rank, if rank > 0 { smax / smin } else { f64::INFINITY })
}

fn residuals(a: &DMatrix<f64>, u: &[f64], t: &[f64], w: &[f64]) -> (f64, f64) {
    let mut l2 = 0.0;
    let mut sup = 0.0f64;
    let total: f64 = w.iter().fold(0.0, |a, b| a + b);
    for i in 0..u.len() {
        let r = u[i] - (0..t.len()).fold(0.0, |acc, j| acc + a[(i, j)] * t[j]);
        l2 += w[i] * r * r;
        sup = sup.max(r.abs());
    }
    ((l2 / total).sqrt(), sup)
}

fn fit_matrix(a: &DMatrix<f64>, samples: &BoundarySamples, u: &[f64], norm: FitNorm) -> DensityFit {
    let w = &samples.weights;
    let (mut t, rank, cond) = weighted_solve(a, u, w);
    let (mut l2, mut sup) = residuals(a, u, &t, w);
    if norm == FitNorm::Sup && sup > 0.0 {
        let mut v = w.clone();
        for _ in 0..LAWSON_ITERATIONS {
            let (ti, _, _) = weighted_solve(a, u, &v);
            let r: Vec<f64> = (0..u.len())
                .map(|i| (u[i] - (0..ti.len()).fold(0.0, |acc, j| acc + a[(i, j)] * ti[j])).abs())
                .collect();
            let (l2i, supi) = residuals(a, u, &ti, w);
            if supi < sup {
                (t, l2, sup) = (ti, l2i, supi);
            }
            let s: f64 = v.iter().zip(&r).fold(0.0, |acc, (vi, ri)| acc + vi * ri);
            if !(s > 0.0) {
                break;
            }
            for (vi, ri) in v.iter_mut().zip(&r) {
                *vi *= ri / s;
            }
        }
    }
    DensityFit {
        size: a.ncols(),
        norm,
        residual: if norm == FitNorm::L2 { l2 } else { sup },
        residual_l2: l2,
        residual_sup: sup,
        coefficients: t,
        rank,
        condition_estimate: cond,
        reused_previous: false,
    }
}

/// Best fit of `target` by `sum t_i log|g_i|` on the samples in the given norm.
pub fn dirichlet_residual(
    samples: &BoundarySamples,
    dict: &[DensityAtom],
    target: &[f64],
    norm: FitNorm,
) -> Result<DensityFit> {
    if target.len() != samples.points.len() {
        return Err(Error::InvalidParameter("target length differs from the sample count".into()));
    }
    let a = log_modulus_matrix(samples, dict)?;
    Ok(fit_matrix(&a, samples, target, norm))
}

/// Fits for the nested prefixes `dict[..sizes[i]]`; residuals are nonincreasing
/// because a larger dictionary falls back to the padded smaller solution when
/// its own solve is no better.
pub fn nested_residuals(
    samples: &BoundarySamples,
    dict: &[DensityAtom],
    sizes: &[usize],
    target: &[f64],
    norm: FitNorm,
) -> Result<Vec<DensityFit>> {
    if sizes.windows(2).any(|w| w[0] > w[1]) || sizes.last().is_some_and(|&s| s > dict.len()) {
        return Err(Error::InvalidParameter("sizes must be nondecreasing and within the dictionary".into()));
    }
    let full = log_modulus_matrix(samples, dict)?;
    let mut out: Vec<DensityFit> = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let a = full.columns(0, n).into_owned();
        let mut fit = fit_matrix(&a, samples, target, norm);
        if let Some(prev) = out.last() {
            if fit.residual > prev.residual {
                let mut t = prev.coefficients.clone();
                t.resize(n, 0.0);
                let (l2, sup) = residuals(&a, target, &t, &samples.weights);
                fit = DensityFit {
                    size: n,
                    residual: prev.residual,
                    residual_l2: l2,
                    residual_sup: sup,
                    coefficients: t,
                    reused_previous: true,
                    ..fit
                };
            }
        }
        out.push(fit);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cheese::generate_cheese;

    fn setup() -> (CheeseSpec, BoundarySamples, Vec<DensityAtom>) {
        let spec = generate_cheese(6, 0.5, 3, 0.01).unwrap();
        let s = boundary_samples(&spec, 3, 0.02).unwrap();
        let d = density_dictionary(&spec, 3, 50, 1);
        (spec, s, d)
    }

    #[test]
    fn member_target_is_exact() {
        let (_, s, d) = setup();
        let u: Vec<f64> = s.points.iter().map(|&z| d[1].g.eval(&[z]).norm().ln()).collect();
        let fit = dirichlet_residual(&s, &d[..5], &u, FitNorm::L2).unwrap();
        assert!(fit.residual < 1e-12, "{}", fit.residual);
        assert!((fit.coefficients[1] - 1.0).abs() < 1e-8);
        let sup = dirichlet_residual(&s, &d[..5], &u, FitNorm::Sup).unwrap();
        assert!(sup.residual < 1e-10);
    }

    #[test]
    fn constant_target_uses_e() {
        let (_, s, d) = setup();
        let u = vec![1.0; s.points.len()];
        let fit = dirichlet_residual(&s, &d[..1], &u, FitNorm::Sup).unwrap();
        assert!(fit.residual < 1e-14);
        assert!((fit.coefficients[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn nested_fits_are_monotone() {
        let (_, s, d) = setup();
        let u: Vec<f64> = s.points.iter().map(|z| z.re).collect();
        for norm in [FitNorm::L2, FitNorm::Sup] {
            let fits = nested_residuals(&s, &d, &[5, 15, 50], &u, norm).unwrap();
            assert!(fits.windows(2).all(|w| w[1].residual <= w[0].residual));
            assert!(fits[2].residual < fits[0].residual);
        }
    }

    #[test]
    fn dictionary_prefixes_nest_and_avoid_the_cheese() {
        let (spec, s, d) = setup();
        assert_eq!(density_dictionary(&spec, 3, 15, 1), d[..15].to_vec());
        assert!(log_modulus_matrix(&s, &d).is_ok());
    }

    #[test]
    fn samples_cover_every_arc() {
        let (spec, s, _) = setup();
        let chain = boundary_chain(&spec, 3).unwrap();
        for i in 0..chain.arcs.len() {
            assert!(s.arc.iter().filter(|&&a| a == i).count() >= 4);
        }
        let len: f64 = s.weights.iter().fold(0.0, |a, b| a + b);
        assert!((len - crate::cheese::chain_length(&spec, &chain)).abs() < 1e-12);
    }
}
