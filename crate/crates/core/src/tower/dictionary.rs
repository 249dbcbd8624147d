//! Finite seeded dictionaries `g_{L,1..J}` of rational functions on `X_L`.
//!
//! Exponential towers need entries that are zero-free on `X_L`:
//!
//! * level 0: products of Moebius factors `(z1 - a)/(z1 - b)` whose zeros and
//!   poles sit inside the anchor holes (or outside the closed disc when there
//!   are none), or constants;
//! * level `L >= 1`: `z_{L+1} - a` with `Im a` strictly outside the stage-`L`
//!   window, optionally times a level-0 Moebius factor.
//!
//! Square-root towers only need polynomials. Every exponential entry carries a
//! sampled zero-free certificate: the minimum of `|g|` over boundary samples
//! and a fiber grid, reduced by a first-order derivative pad.

use super::path::StageStack;
use crate::cheese::CheeseSpec;
use crate::error::{Error, Result};
use crate::poly::{Polynomial, RationalFunction};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

pub const ZERO_FREE_RETRIES: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DictionaryFamily {
    Mobius,
    Constant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DictionaryEntry {
    pub level: usize,
    /// 1-based index `j` of `g_{L,j}`.
    pub index: usize,
    pub g: RationalFunction,
    /// Padded sampled minimum of `|g|` (absent for polynomial dictionaries).
    pub min_modulus: Option<f64>,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dictionary {
    pub level: usize,
    pub seed: u64,
    pub entries: Vec<DictionaryEntry>,
}

impl Dictionary {
    pub fn entry(&self, index: usize) -> Result<&DictionaryEntry> {
        self.entries
            .get(index.wrapping_sub(1))
            .ok_or(Error::MissingDictionary { level: self.level, index })
    }
}

pub(crate) fn unit_disc_point(rng: &mut ChaCha8Rng) -> Complex64 {
    loop {
        let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if z.norm_sqr() < 1.0 {
            return z;
        }
    }
}

/// A point of the removed set: inside an anchor hole, or outside the closed
/// unit disc when there are no anchors.
pub(crate) fn removed_point(spec: Option<&CheeseSpec>, anchors: usize, rng: &mut ChaCha8Rng, hole: usize) -> Complex64 {
    match spec {
        Some(s) if anchors > 0 => {
            let d = s.holes[hole % anchors];
            d.center + unit_disc_point(rng) * (0.5 * d.radius)
        }
        _ => Complex64::from_polar(rng.gen_range(1.6..3.0), rng.gen_range(-PI..PI)),
    }
}

fn mobius_factor(spec: Option<&CheeseSpec>, anchors: usize, rng: &mut ChaCha8Rng) -> RationalFunction {
    let (ha, hb) = if anchors >= 2 {
        let ha = rng.gen_range(0..anchors);
        let mut hb = rng.gen_range(0..anchors - 1);
        if hb >= ha {
            hb += 1;
        }
        (ha, hb)
    } else {
        (0, 0)
    };
    let a = removed_point(spec, anchors, rng, ha);
    let b = removed_point(spec, anchors, rng, hb);
    RationalFunction::mobius(1, 0, a, b)
}

/// Uncertified level-0 candidate number `index` (1-based).
pub fn level0_candidate(
    spec: Option<&CheeseSpec>,
    anchors: usize,
    family: DictionaryFamily,
    index: usize,
    rng: &mut ChaCha8Rng,
) -> RationalFunction {
    match family {
        DictionaryFamily::Constant => {
            let modulus = 2.0 + (index - 1) as f64 * 0.5;
            let phase = if index == 1 { 0.0 } else { rng.gen_range(-PI..PI) };
            RationalFunction::constant(1, Complex64::from_polar(modulus, phase))
        }
        DictionaryFamily::Mobius => {
            let degree = if index <= 3 { 1 } else { 2 };
            let mut g = mobius_factor(spec, anchors, rng);
            for _ in 1..degree {
                g = g.mul(&mobius_factor(spec, anchors, rng));
            }
            g
        }
    }
}

/// Uncertified level-`L` candidate (`L >= 1`) for an exponential tower whose
/// stage-`L` window is `[c, c + 2 pi m]`.
pub fn upper_candidate(
    spec: Option<&CheeseSpec>,
    anchors: usize,
    level: usize,
    window: (f64, usize),
    index: usize,
    rng: &mut ChaCha8Rng,
) -> RationalFunction {
    let (c, m) = window;
    let gap = 1.0 + rng.gen_range(0.0..1.0);
    let im_a = if index % 2 == 1 { c - gap } else { c + TAU * m as f64 + gap };
    let a = Complex64::new(rng.gen_range(-1.0..1.0), im_a);
    let arity = level + 1;
    let g = RationalFunction::polynomial(Polynomial::shifted_variable(arity, level, a));
    if index % 2 == 0 {
        g.mul(&mobius_factor(spec, anchors, rng).with_arity(arity))
    } else {
        g
    }
}

/// Points of `X_L` used for zero-free certification, with the `z1`-spacing they
/// represent.
#[derive(Clone, Debug, Default)]
pub struct SamplePoints {
    pub points: Vec<Vec<Complex64>>,
    pub spacing: Vec<f64>,
}

impl SamplePoints {
    pub fn push(&mut self, z: Vec<Complex64>, spacing: f64) {
        self.points.push(z);
        self.spacing.push(spacing);
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Padded minimum modulus `min (|g| - spacing |dg/dz1| / 2)` over the samples.
pub fn padded_min_modulus(g: &RationalFunction, stack: &StageStack, samples: &SamplePoints) -> f64 {
    let mut best = f64::INFINITY;
    for (z, &h) in samples.points.iter().zip(&samples.spacing) {
        let (zj, _) = stack.jets(z);
        let v = g.eval_jet(&zj[..g.arity]);
        let padded = v.v.norm() - 0.5 * h * v.d.norm();
        if !padded.is_finite() {
            return f64::NEG_INFINITY;
        }
        best = best.min(padded);
    }
    best
}

/// Draws and certifies `size` exponential-tower entries at `level`.
#[allow(clippy::too_many_arguments)]
pub fn build_exp_dictionary(
    spec: Option<&CheeseSpec>,
    anchors: usize,
    level: usize,
    window: Option<(f64, usize)>,
    family: DictionaryFamily,
    size: usize,
    seed: u64,
    stack: &StageStack,
    samples: &SamplePoints,
    tol: f64,
) -> Result<Dictionary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(size);
    for index in 1..=size {
        let mut accepted = None;
        for _ in 0..ZERO_FREE_RETRIES {
            let g = match (level, window) {
                (0, _) => level0_candidate(spec, anchors, family, index, &mut rng),
                (_, Some(w)) => upper_candidate(spec, anchors, level, w, index, &mut rng),
                (_, None) => return Err(Error::InvalidParameter("upper dictionary needs a window".into())),
            };
            let min = padded_min_modulus(&g, stack, samples);
            if min >= tol {
                accepted = Some((g, min));
                break;
            }
        }
        let (g, min) = accepted.ok_or(Error::ZeroFreeCertificationFailed { level, attempts: ZERO_FREE_RETRIES })?;
        entries.push(DictionaryEntry { level, index, g, min_modulus: Some(min), samples: samples.len() });
    }
    Ok(Dictionary { level, seed, entries })
}

/// Seeded polynomial dictionary for square-root towers. Level-0 entries are
/// polynomials of degree at most 3 in `z1`; level-`L` entries involve `z_{L+1}`.
pub fn build_poly_dictionary(level: usize, size: usize, seed: u64) -> Dictionary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let arity = level + 1;
    let mut entries = Vec::with_capacity(size);
    for index in 1..=size {
        let mut p = Polynomial::zero(arity);
        let coeff = |rng: &mut ChaCha8Rng| unit_disc_point(rng);
        if level == 0 {
            let degree = 1 + (index % 3);
            let x = Polynomial::variable(arity, 0);
            let mut power = Polynomial::constant(arity, Complex64::new(1.0, 0.0));
            for _ in 0..=degree {
                p = p.add(&power.scale(coeff(&mut rng)));
                power = power.mul(&x);
            }
        } else {
            let x = Polynomial::variable(arity, 0);
            let y = Polynomial::variable(arity, level);
            let lead = coeff(&mut rng) * 0.5 + Complex64::new(1.0, 0.0);
            p = p
                .add(&Polynomial::constant(arity, coeff(&mut rng)))
                .add(&x.scale(coeff(&mut rng)))
                .add(&y.scale(lead))
                .add(&x.mul(&y).scale(coeff(&mut rng) * 0.5));
        }
        entries.push(DictionaryEntry {
            level,
            index,
            g: RationalFunction::polynomial(p),
            min_modulus: None,
            samples: 0,
        });
    }
    Dictionary { level, seed, entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cheese::generate_cheese;

    #[test]
    fn mobius_zeros_and_poles_lie_in_holes() {
        let spec = generate_cheese(3, 0.5, 6, 0.01).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for i in 1..=6 {
            let g = level0_candidate(Some(&spec), 3, DictionaryFamily::Mobius, i, &mut rng);
            // every root of numerator and denominator is inside some anchor hole
            for p in [&g.numerator, &g.denominator] {
                let z0 = spec.holes[..3]
                    .iter()
                    .map(|d| d.center)
                    .find(|&c| p.eval(&[c]).norm() < 1.0)
                    .is_some();
                assert!(z0 || p.degree() == 0);
            }
            // zero-free on the boundary of X_0^3
            for t in 0..200 {
                let z = Complex64::from_polar(1.0, t as f64 * 0.0314);
                assert!(g.eval(&[z]).norm() > 1e-3);
            }
        }
    }

    #[test]
    fn upper_entries_avoid_window() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for i in 1..=4 {
            let g = upper_candidate(None, 0, 1, (0.3, 2), i, &mut rng);
            for y in [0.3, 1.0, 0.3 + TAU, 0.3 + 2.0 * TAU] {
                let z = [Complex64::new(0.2, 0.1), Complex64::new(0.5, y)];
                assert!(g.eval(&z).norm() >= 1.0 - 1e-12 || g.support_arity() == 2);
            }
        }
    }

    #[test]
    fn poly_dictionary_is_deterministic() {
        let a = build_poly_dictionary(1, 5, 77);
        let b = build_poly_dictionary(1, 5, 77);
        assert_eq!(a, b);
        assert!(a.entries.iter().all(|e| e.g.support_arity() == 2));
        assert!(matches!(a.entry(9), Err(Error::MissingDictionary { level: 1, index: 9 })));
    }
}
