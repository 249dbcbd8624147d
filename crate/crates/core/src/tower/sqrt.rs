//! Square-root towers over the closed unit disc.
//!
//! Stage `M` uses `f_M = q_M - alpha_M` with `|alpha_M| < 1/M`, where `alpha_M`
//! must be a regular value of `q_M` on `Sigma_{M-1}`. The critical values of
//! `q_M` there come from two sources, both located by multistart Newton:
//!
//! * points where `dq/dz1 = 0` in the coordinate `z1`;
//! * branch points `f_n = 0` (`n < M`), where `z1` stops being a local
//!   coordinate and every `q` value over that `z1` is treated as critical.
//!
//! `alpha` is drawn until it keeps a prescribed distance from all of them.

use super::dictionary::{build_poly_dictionary, Dictionary, DictionaryFamily};
use super::path::StageStack;
use super::schedule::{dictionary_source, levels_needed, max_entry_needed, schedule};
use super::{derive_seed, grid_points, SqrtStage, Stage, TowerKind, TowerSpec, TowerTolerances};
use crate::error::{Error, Result};
use crate::io::format_version;
use crate::poly::RationalFunction;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ALPHA_RETRIES: usize = 64;
const TAG_DICTIONARY: u64 = 11;
const TAG_ALPHA: u64 = 12;
/// Multistart grid spacing and the padding of the disc searched by Newton.
const START_SPACING: f64 = 0.2;
const SEARCH_PAD: f64 = 0.05;
const NEWTON_ITERS: usize = 60;
const NEWTON_MAX_STEP: f64 = 0.2;
const FD_STEP: f64 = 1e-6;
const DEDUP_TOL: f64 = 1e-9;
const SAMPLE_SPACING: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct SqrtTowerConfig {
    pub stages: usize,
    pub dictionary_size: usize,
    pub seed: u64,
    pub tolerances: TowerTolerances,
}

impl SqrtTowerConfig {
    pub fn new(stages: usize, seed: u64) -> Self {
        Self { stages, dictionary_size: 4, seed, tolerances: TowerTolerances::default() }
    }
}

/// Every coordinate vector `(z1, ..., z_{n+1})` over `z1` (zeros allowed).
pub fn fiber_coordinates(stack: &StageStack, z1: Complex64) -> Vec<Vec<Complex64>> {
    let mut layer = vec![vec![z1]];
    for n in 1..=stack.len() {
        let mut next = Vec::with_capacity(layer.len() * 2);
        for z in &layer {
            let r = stack.eval_f(n, z).sqrt();
            for s in [r, -r] {
                let mut w = z.clone();
                w.push(s);
                next.push(w);
            }
        }
        layer = next;
    }
    layer
}

fn starts() -> Vec<Complex64> {
    let n = ((1.0 + SEARCH_PAD) / START_SPACING).ceil() as i64;
    let mut out = Vec::new();
    for i in -n..=n {
        for j in -n..=n {
            let z = Complex64::new(i as f64 * START_SPACING + 0.013, j as f64 * START_SPACING + 0.007);
            if z.norm() <= 1.0 + SEARCH_PAD {
                out.push(z);
            }
        }
    }
    out
}

fn push_unique(values: &mut Vec<Complex64>, v: Complex64) {
    if v.is_finite() && !values.iter().any(|w| (w - v).norm() < DEDUP_TOL * (1.0 + v.norm())) {
        values.push(v);
    }
}

/// Newton iteration on `F(z1)` along one sheet, where `eval` returns
/// `(F, dF/dz1)` at a lifted point. Returns the converged lifted point.
fn newton_on_sheet<E>(stack: &StageStack, z1: Complex64, offsets: &[i64], eval: E) -> Option<Vec<Complex64>>
where
    E: Fn(&[Complex64]) -> Option<(Complex64, Complex64)>,
{
    let (mut z, mut f) = stack.seed_point(z1, offsets).ok()?;
    for _ in 0..NEWTON_ITERS {
        let (v, d) = eval(&z)?;
        if v.norm() < 1e-14 {
            return Some(z);
        }
        if !(d.norm() > 0.0) {
            return None;
        }
        let mut step = -v / d;
        if step.norm() > NEWTON_MAX_STEP {
            step *= NEWTON_MAX_STEP / step.norm();
        }
        let (zn, fnv) = stack.continue_point(&z, &f, z[0] + step).ok()?;
        z = zn;
        f = fnv;
        if z[0].norm() > 1.5 {
            return None;
        }
        if step.norm() < 1e-14 * (1.0 + z[0].norm()) {
            return Some(z);
        }
    }
    let (v, _) = eval(&z)?;
    (v.norm() < 1e-10).then_some(z)
}

fn sheet_offsets(count: usize) -> Vec<Vec<i64>> {
    (0..1usize << count)
        .map(|mask| (0..count).map(|b| ((mask >> b) & 1) as i64).collect())
        .collect()
}

/// `z1`-locations of the zeros of `f_n` on `Sigma_{n-1}` within the padded disc.
pub fn branch_points(stack: &StageStack, n: usize) -> Vec<Complex64> {
    let below = stack.truncated(n - 1);
    let f = stack.fs[n - 1].clone();
    let mut found = Vec::new();
    for offsets in sheet_offsets(n - 1) {
        for s in starts() {
            let eval = |z: &[Complex64]| {
                let (zj, _) = below.jets(z);
                let v = f.eval_jet(&zj[..f.arity]);
                v.v.is_finite().then_some((v.v, v.d))
            };
            if let Some(z) = newton_on_sheet(&below, s, &offsets, eval) {
                if z[0].norm() <= 1.0 + SEARCH_PAD {
                    push_unique(&mut found, z[0]);
                }
            }
        }
    }
    found
}

/// Critical values of `q` on `Sigma_{M-1}` (with `stack` holding `f_1..f_{M-1}`),
/// given the branch points of every stage.
pub fn critical_values(q: &RationalFunction, stack: &StageStack, branch: &[Vec<Complex64>]) -> Vec<Complex64> {
    let d = q.support_arity().max(1);
    let below = stack.truncated(d - 1);
    let mut values = Vec::new();
    if q.support_arity() == 0 {
        push_unique(&mut values, q.eval(&vec![Complex64::new(0.0, 0.0); q.arity.max(1)]));
        return values;
    }
    let qd = q.with_arity(d);
    for offsets in sheet_offsets(d - 1) {
        for s in starts() {
            let eval = |z: &[Complex64]| {
                let h = |w: &[Complex64]| {
                    let (zj, _) = below.jets(w);
                    qd.eval_jet(&zj[..d]).d
                };
                let v = h(z);
                let f0 = (1..=below.len()).map(|n| below.eval_f(n, z)).collect::<Vec<_>>();
                let (zp, _) = below.continue_point(z, &f0, z[0] + FD_STEP).ok()?;
                let (zm, _) = below.continue_point(z, &f0, z[0] - FD_STEP).ok()?;
                let dv = (h(&zp) - h(&zm)) / (2.0 * FD_STEP);
                v.is_finite().then_some((v, dv))
            };
            if let Some(z) = newton_on_sheet(&below, s, &offsets, eval) {
                if z[0].norm() <= 1.0 + SEARCH_PAD {
                    push_unique(&mut values, qd.eval(&z[..d]));
                }
            }
        }
    }
    for z1 in branch.iter().flatten() {
        for z in fiber_coordinates(&below, *z1) {
            push_unique(&mut values, qd.eval(&z[..d]));
        }
    }
    values
}

/// Smallest `max(|q - alpha|, |dq/dz1|)` over grid fibers of `Sigma_{d-1}`.
pub fn sampled_regular_margin(q: &RationalFunction, stack: &StageStack, alpha: Complex64) -> f64 {
    let d = q.support_arity().max(1);
    let below = stack.truncated(d - 1);
    let qd = q.with_arity(d);
    let mut best = f64::INFINITY;
    for z1 in grid_points(None, 0, SAMPLE_SPACING) {
        for z in fiber_coordinates(&below, z1) {
            if z.iter().skip(1).any(|w| w.norm() < 1e-12) {
                continue;
            }
            let (zj, _) = below.jets(&z);
            let v = qd.eval_jet(&zj[..d]);
            best = best.min((v.v - alpha).norm().max(v.d.norm()));
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlphaChoice {
    pub alpha: Complex64,
    pub margin: f64,
    pub critical_values: usize,
    pub attempts: usize,
}

/// Draws `alpha` uniformly from the disc of radius `0.999 / M` until it keeps
/// distance `tol` from every critical value.
pub fn choose_alpha(critical: &[Complex64], m: usize, seed: u64, tol: f64) -> Result<AlphaChoice> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = 0.999 / m as f64;
    for attempt in 1..=ALPHA_RETRIES {
        let alpha = loop {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if z.norm_sqr() < 1.0 {
                break z * radius;
            }
        };
        let margin = critical.iter().map(|v| (v - alpha).norm()).fold(f64::INFINITY, f64::min);
        if margin >= tol {
            return Ok(AlphaChoice { alpha, margin, critical_values: critical.len(), attempts: attempt });
        }
    }
    Err(Error::NoRegularValue { stage: m, attempts: ALPHA_RETRIES })
}

pub fn build_sqrt_tower(cfg: &SqrtTowerConfig) -> Result<TowerSpec> {
    let tol = cfg.tolerances;
    if !(tol.regular_value > 0.0) {
        return Err(Error::InvalidParameter("regular-value tolerance must be positive".into()));
    }
    let n_stages = cfg.stages;
    let needed = if n_stages > 0 { levels_needed(n_stages as u64) } else { Vec::new() };
    let size_for = |level: usize| cfg.dictionary_size.max(max_entry_needed(level, n_stages as u64));
    let mut dictionaries: Vec<Dictionary> = Vec::new();
    if n_stages > 0 {
        dictionaries.push(build_poly_dictionary(0, size_for(0), derive_seed(cfg.seed, TAG_DICTIONARY, 0)));
    }
    let mut stack = StageStack::new(TowerKind::SquareRoot, Vec::new());
    let mut branch: Vec<Vec<Complex64>> = Vec::new();
    let mut stages = Vec::new();
    for m in 1..=n_stages {
        let (level, j) = dictionary_source(m as u64);
        let dict = dictionaries
            .iter()
            .find(|d| d.level == level)
            .ok_or(Error::MissingDictionary { level, index: j })?;
        let q = dict.entry(j)?.g.with_arity(m);
        let critical = critical_values(&q, &stack, &branch);
        let seed = derive_seed(cfg.seed, TAG_ALPHA, m as u64);
        let choice = choose_alpha(&critical, m, seed, tol.regular_value)?;
        let sampled_margin = sampled_regular_margin(&q, &stack, choice.alpha);
        let stage = SqrtStage {
            level: m,
            q,
            alpha: choice.alpha,
            regular_value_margin: choice.margin,
            sampled_margin,
            critical_values: choice.critical_values,
            attempts: choice.attempts,
            seed,
            schedule: schedule(m as u64),
            dict_source: (level, j),
        };
        stack = stack.pushed(stage.f());
        branch.push(branch_points(&stack, m));
        stages.push(Stage::SquareRoot(stage));
        if m < n_stages && needed.contains(&m) {
            dictionaries.push(build_poly_dictionary(m, size_for(m), derive_seed(cfg.seed, TAG_DICTIONARY, m as u64)));
        }
    }
    Ok(TowerSpec {
        version: format_version(),
        kind: TowerKind::SquareRoot,
        seed: cfg.seed,
        base: None,
        base_hash: None,
        truncations: Vec::new(),
        anchors: 0,
        family: DictionaryFamily::Mobius,
        dictionary_size: cfg.dictionary_size,
        tolerances: tol,
        stages,
        dictionaries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn square_has_single_critical_value_zero() {
        let x = Polynomial::variable(1, 0);
        let q = RationalFunction::polynomial(x.mul(&x));
        let stack = StageStack::new(TowerKind::SquareRoot, Vec::new());
        let v = critical_values(&q, &stack, &[]);
        assert_eq!(v.len(), 1);
        assert!(v[0].norm() < 1e-12);
    }

    #[test]
    fn cubic_critical_values_match_closed_form() {
        // q = z^3 - 3 a^2 z has critical points +-a with values -+2a^3
        let a = c(0.4, 0.3);
        let x = Polynomial::variable(1, 0);
        let p = x.mul(&x).mul(&x).add(&x.scale(-3.0 * a * a));
        let q = RationalFunction::polynomial(p);
        let stack = StageStack::new(TowerKind::SquareRoot, Vec::new());
        let v = critical_values(&q, &stack, &[]);
        let expected = [-2.0 * a * a * a, 2.0 * a * a * a];
        assert_eq!(v.len(), 2);
        for e in expected {
            assert!(v.iter().any(|w| (w - e).norm() < 1e-10));
        }
    }

    #[test]
    fn branch_points_of_linear_stage() {
        let stack = StageStack::new(
            TowerKind::SquareRoot,
            vec![RationalFunction::polynomial(Polynomial::shifted_variable(1, 0, c(0.2, -0.1)))],
        );
        let b = branch_points(&stack, 1);
        assert_eq!(b.len(), 1);
        assert!((b[0] - c(0.2, -0.1)).norm() < 1e-12);
    }

    #[test]
    fn alpha_stays_in_disc_and_avoids_values() {
        let crit = vec![c(0.0, 0.0), c(0.05, 0.0)];
        for m in 1..=8 {
            let a = choose_alpha(&crit, m, 3, 1e-3).unwrap();
            assert!(a.alpha.norm() < 1.0 / m as f64);
            assert!(a.margin >= 1e-3);
        }
    }

    #[test]
    fn tower_is_deterministic() {
        let cfg = SqrtTowerConfig::new(3, 9);
        let a = build_sqrt_tower(&cfg).unwrap();
        let b = build_sqrt_tower(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.stages.len(), 3);
    }
}
