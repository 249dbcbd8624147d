//! Finite-stage towers over a base set in the `z1`-plane.
//!
//! An exponential tower over a cheese `X0^k` adjoins `z_{n+1}` with
//! `exp z_{n+1} = f_n(z_1..z_n)` and keeps the window
//! `Im z_{n+1} in [c_n, c_n + 2 pi m_n]`; a square-root tower over the closed
//! unit disc adjoins `z_{n+1}^2 = q_n - alpha_n`. Stage `n` draws its function
//! from the dictionary entry named by the schedule.

pub mod cut;
pub mod dictionary;
pub mod exp;
pub mod path;
pub mod region;
pub mod schedule;
pub mod sqrt;

use crate::cheese::CheeseSpec;
use crate::error::{Error, Result};
use crate::poly::RationalFunction;
use cut::CutCertificate;
use dictionary::{Dictionary, DictionaryFamily};
use num_complex::Complex64;
use path::{StageStack, SINGULAR_MODULUS};
use schedule::ScheduleIndex;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

pub use exp::{ExpTower, ExpTowerConfig};
pub use sqrt::{SqrtTowerConfig, build_sqrt_tower};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TowerKind {
    Exponential,
    SquareRoot,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TowerTolerances {
    /// Largest turn of any stage function between consecutive lifted samples.
    pub max_step_arg: f64,
    /// Transversality margin for cut levels (slopes and level distances).
    pub transversality: f64,
    /// Padded minimum modulus required of dictionary entries and stage functions.
    pub zero_free: f64,
    /// Required distance of `alpha` from the critical values of `q`.
    pub regular_value: f64,
    /// Defining-equation residual allowed at lifted points.
    pub lift: f64,
    /// Target margin `delta` for the sheet counts.
    pub target_delta: f64,
}

impl Default for TowerTolerances {
    fn default() -> Self {
        Self {
            max_step_arg: 0.1,
            transversality: 1e-3,
            zero_free: 1e-3,
            regular_value: 1e-3,
            lift: 1e-10,
            target_delta: 1.0,
        }
    }
}

/// Per-truncation data of one exponential stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTruncation {
    pub k: usize,
    pub crossings: usize,
    pub curves: usize,
    /// Total `z1`-length of the cut curves in `X_{M-1}^k`.
    pub cut_length: f64,
    /// `delta_{M-1}` for this truncation.
    pub prev_delta: f64,
    /// `delta_M = m delta_{M-1} - 2 cut_length`.
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpStage {
    pub level: usize,
    pub f: RationalFunction,
    pub c: f64,
    pub m: usize,
    pub schedule: ScheduleIndex,
    pub dict_source: (usize, usize),
    pub cut: CutCertificate,
    pub target_delta: f64,
    pub truncations: Vec<StageTruncation>,
}

impl ExpStage {
    pub fn truncation(&self, k: usize) -> Result<&StageTruncation> {
        self.truncations
            .iter()
            .find(|t| t.k == k)
            .ok_or_else(|| Error::InvalidParameter(format!("truncation k={k} not built at stage {}", self.level)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqrtStage {
    pub level: usize,
    /// `q_M`; the stage function is `q_M - alpha`.
    pub q: RationalFunction,
    pub alpha: Complex64,
    /// Distance from `alpha` to the nearest computed critical value of `q`.
    pub regular_value_margin: f64,
    /// Smallest `max(|q - alpha|, |dq/dz1|)` over the sampled fibers.
    pub sampled_margin: f64,
    pub critical_values: usize,
    pub attempts: usize,
    pub seed: u64,
    pub schedule: ScheduleIndex,
    pub dict_source: (usize, usize),
}

impl SqrtStage {
    pub fn f(&self) -> RationalFunction {
        let shift = RationalFunction::constant(self.q.arity, -self.alpha);
        RationalFunction::new(
            self.q.numerator.add(&shift.numerator.mul(&self.q.denominator)),
            self.q.denominator.clone(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Stage {
    Exponential(ExpStage),
    SquareRoot(SqrtStage),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TowerSpec {
    pub version: String,
    pub kind: TowerKind,
    pub seed: u64,
    /// The cheese (exponential towers); square-root towers live over the closed disc.
    pub base: Option<CheeseSpec>,
    pub base_hash: Option<String>,
    pub truncations: Vec<usize>,
    /// Holes hosting the zeros and poles of level-0 entries.
    pub anchors: usize,
    pub family: DictionaryFamily,
    pub dictionary_size: usize,
    pub tolerances: TowerTolerances,
    pub stages: Vec<Stage>,
    pub dictionaries: Vec<Dictionary>,
}

impl TowerSpec {
    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn exp_stages(&self) -> Vec<&ExpStage> {
        self.stages
            .iter()
            .filter_map(|s| match s {
                Stage::Exponential(e) => Some(e),
                _ => None,
            })
            .collect()
    }

    pub fn sqrt_stages(&self) -> Vec<&SqrtStage> {
        self.stages
            .iter()
            .filter_map(|s| match s {
                Stage::SquareRoot(e) => Some(e),
                _ => None,
            })
            .collect()
    }

    pub fn exp_stage(&self, n: usize) -> Result<&ExpStage> {
        match self.stages.get(n.wrapping_sub(1)) {
            Some(Stage::Exponential(e)) => Ok(e),
            _ => Err(Error::StageOutOfRange { stage: n, built: self.stages.len() }),
        }
    }

    pub fn dictionary(&self, level: usize) -> Result<&Dictionary> {
        self.dictionaries
            .iter()
            .find(|d| d.level == level)
            .ok_or(Error::MissingDictionary { level, index: 1 })
    }

    /// Stage functions `f_1..f_n`.
    pub fn stack(&self, n: usize) -> Result<StageStack> {
        if n > self.stages.len() {
            return Err(Error::StageOutOfRange { stage: n, built: self.stages.len() });
        }
        let fs = self.stages[..n]
            .iter()
            .map(|s| match s {
                Stage::Exponential(e) => e.f.clone(),
                Stage::SquareRoot(q) => q.f(),
            })
            .collect();
        Ok(StageStack::new(self.kind, fs))
    }

    /// `(c_n, m_n)` for the exponential stages `1..=n`.
    pub fn windows(&self, n: usize) -> Vec<(f64, usize)> {
        self.exp_stages().iter().take(n).map(|s| (s.c, s.m)).collect()
    }

    /// Product `m_1 ... m_n`.
    pub fn sheet_product(&self, n: usize) -> f64 {
        self.exp_stages().iter().take(n).map(|s| s.m as f64).product()
    }

    pub fn to_json(&self) -> Result<String> {
        crate::io::to_pretty_json(self)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let t: TowerSpec = serde_json::from_str(s)?;
        crate::io::check_version(&t.version)?;
        Ok(t)
    }
}

/// The function of stage `n` prescribed by the schedule, as a function of
/// `z_1..z_n` (for square-root towers, `q_n` before the shift by `alpha_n`).
pub fn next_function(tower: &TowerSpec, n: usize) -> Result<RationalFunction> {
    let (level, j) = schedule::dictionary_source(n as u64);
    let dict = tower
        .dictionaries
        .iter()
        .find(|d| d.level == level)
        .ok_or(Error::MissingDictionary { level, index: j })?;
    let g = &dict.entry(j)?.g;
    Ok(g.with_arity(n))
}

/// Deterministic sub-seed for `(tag, index)`.
pub fn derive_seed(seed: u64, tag: u64, index: u64) -> u64 {
    let mut x = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftedPoint {
    pub z: Vec<Complex64>,
    pub residuals: Vec<f64>,
}

impl LiftedPoint {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |a, &b| a.max(b))
    }
}

/// All points of `X_N` over `z1` for an exponential tower with windows
/// `(c_n, m_n)`: at stage `n`, every logarithm of `f_n` whose imaginary part
/// lies in the closed window.
pub fn exp_fiber(stack: &StageStack, windows: &[(f64, usize)], z1: Complex64) -> Result<Vec<LiftedPoint>> {
    let mut layer = vec![vec![z1]];
    for n in 1..=stack.len() {
        let (c, m) = windows[n - 1];
        let top = c + TAU * m as f64;
        let mut next = Vec::new();
        for z in &layer {
            let f = stack.eval_f(n, z);
            if !(f.norm() > SINGULAR_MODULUS) || !f.is_finite() {
                return Err(Error::ZeroOfF { stage: n, at: z1 });
            }
            let l = f.ln();
            let j0 = ((c - l.im) / TAU).ceil() as i64;
            let mut j = j0;
            loop {
                let y = l.im + TAU * j as f64;
                if y > top {
                    break;
                }
                if y >= c {
                    let mut w = z.clone();
                    w.push(Complex64::new(l.re, y));
                    next.push(w);
                }
                j += 1;
            }
        }
        layer = next;
    }
    Ok(layer
        .into_iter()
        .map(|z| LiftedPoint { residuals: stack.residuals(&z), z })
        .collect())
}

/// All `2^N` sign combinations over `z1` for a square-root tower.
pub fn sqrt_fiber(stack: &StageStack, z1: Complex64) -> Result<Vec<LiftedPoint>> {
    let mut layer = vec![vec![z1]];
    for n in 1..=stack.len() {
        let mut next = Vec::with_capacity(layer.len() * 2);
        for z in &layer {
            let f = stack.eval_f(n, z);
            if f == Complex64::new(0.0, 0.0) || !f.is_finite() {
                return Err(Error::ZeroOfF { stage: n, at: z1 });
            }
            let r = f.sqrt();
            for s in [r, -r] {
                let mut w = z.clone();
                w.push(s);
                next.push(w);
            }
        }
        layer = next;
    }
    Ok(layer
        .into_iter()
        .map(|z| LiftedPoint { residuals: stack.residuals(&z), z })
        .collect())
}

/// Fiber of a built tower over `z1` at stage `n`.
pub fn fiber(tower: &TowerSpec, n: usize, z1: Complex64) -> Result<Vec<LiftedPoint>> {
    let stack = tower.stack(n)?;
    match tower.kind {
        TowerKind::Exponential => {
            if let Some(base) = &tower.base {
                let k = tower.truncations.iter().copied().min().unwrap_or(0);
                if !base.contains(k, z1) {
                    return Err(Error::InvalidParameter(format!("{z1} is not in the base set")));
                }
            }
            exp_fiber(&stack, &tower.windows(n), z1)
        }
        TowerKind::SquareRoot => {
            if z1.norm() > 1.0 {
                return Err(Error::InvalidParameter(format!("{z1} is not in the closed unit disc")));
            }
            sqrt_fiber(&stack, z1)
        }
    }
}

/// Grid points of `X0^k` with spacing `h`.
pub fn grid_points(base: Option<&CheeseSpec>, k: usize, h: f64) -> Vec<Complex64> {
    let n = (2.0 / h).floor() as i64;
    let mut out = Vec::new();
    for i in -n / 2..=n / 2 {
        for j in -n / 2..=n / 2 {
            let z = Complex64::new(i as f64 * h, j as f64 * h);
            let inside = match base {
                Some(s) => s.contains(k, z),
                None => z.norm_sqr() <= 1.0,
            };
            if inside {
                out.push(z);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn const_stack(v: Complex64) -> StageStack {
        StageStack::new(TowerKind::Exponential, vec![RationalFunction::constant(1, v)])
    }

    #[test]
    fn exp_fiber_interior_window() {
        let pts = exp_fiber(&const_stack(c(1.0, 0.0)), &[(0.1, 2)], c(0.0, 0.0)).unwrap();
        assert_eq!(pts.len(), 2);
        assert!((pts[0].z[1] - c(0.0, TAU)).norm() < 1e-15);
        assert!((pts[1].z[1] - c(0.0, 2.0 * TAU)).norm() < 1e-15);
    }

    #[test]
    fn exp_fiber_window_endpoints() {
        let pts = exp_fiber(&const_stack(c(1.0, 0.0)), &[(0.0, 2)], c(0.0, 0.0)).unwrap();
        assert_eq!(pts.len(), 3);
    }

    #[test]
    fn sqrt_fiber_has_four_points() {
        let stack = StageStack::new(
            TowerKind::SquareRoot,
            vec![
                RationalFunction::polynomial(Polynomial::shifted_variable(1, 0, c(0.3, 0.1))),
                RationalFunction::polynomial(Polynomial::shifted_variable(2, 1, c(-0.2, 0.0))),
            ],
        );
        let pts = sqrt_fiber(&stack, c(0.1, 0.5)).unwrap();
        assert_eq!(pts.len(), 4);
        assert!(pts.iter().all(|p| p.max_residual() < 1e-15));
    }

    #[test]
    fn sqrt_fiber_rejects_zero() {
        let stack = StageStack::new(
            TowerKind::SquareRoot,
            vec![RationalFunction::polynomial(Polynomial::variable(1, 0))],
        );
        assert!(matches!(sqrt_fiber(&stack, c(0.0, 0.0)), Err(Error::ZeroOfF { stage: 1, .. })));
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 1, 0), derive_seed(1, 1, 1));
        assert_ne!(derive_seed(1, 1, 0), derive_seed(1, 2, 0));
        assert_eq!(derive_seed(7, 3, 4), derive_seed(7, 3, 4));
    }
}
