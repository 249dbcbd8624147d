//! Stage-by-stage construction of the exponential tower over a cheese.
//!
//! Stage `M` takes its function from the schedule, picks one cut level `c_M`
//! admissible on every requested truncation, traces the cut curves, and takes
//! the least sheet count `m_M` that keeps the margin
//! `delta_M(k) = m_M delta_{M-1}(k) - 2 L_M(k)` above the target for every `k`,
//! starting from `delta_0(k) = 4 pi - length(dX0^k)`.
//!
//! Rebuilding from a stored [`TowerSpec`] runs the same code with the stored
//! levels, sheet counts and dictionaries.

use super::cut::{self, CutSet, RegionConstraints};
use super::dictionary::{build_exp_dictionary, Dictionary, DictionaryFamily, SamplePoints};
use super::path::StageStack;
use super::region::{advance_region, stage0_region, Region};
use super::schedule::{dictionary_source, levels_needed, max_entry_needed, schedule};
use super::{derive_seed, exp_fiber, grid_points, ExpStage, Stage, StageTruncation, TowerKind, TowerSpec, TowerTolerances};
use crate::cheese::{boundary_chain, chain_length, CheeseSpec};
use crate::error::{Error, Result};
use crate::io::{content_hash, format_version};
use num_complex::Complex64;
use std::f64::consts::PI;

const TAG_DICTIONARY: u64 = 1;
const TAG_CUT: u64 = 2;
/// Grid spacing of the fiber samples used for zero-free certification.
pub const CERTIFY_GRID: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct ExpTowerConfig {
    pub stages: usize,
    pub truncations: Vec<usize>,
    pub dictionary_size: usize,
    pub family: DictionaryFamily,
    pub seed: u64,
    /// Anchor holes for level-0 entries (default: the smallest truncation).
    pub anchors: Option<usize>,
    pub tolerances: TowerTolerances,
    /// Also build `X_N^k` (needed for direct measures at the top stage).
    pub keep_final_region: bool,
}

impl ExpTowerConfig {
    pub fn new(stages: usize, truncations: Vec<usize>, seed: u64) -> Self {
        Self {
            stages,
            truncations,
            dictionary_size: 4,
            family: DictionaryFamily::Mobius,
            seed,
            anchors: None,
            tolerances: TowerTolerances::default(),
            keep_final_region: false,
        }
    }
}

/// A built exponential tower with its boundary regions.
#[derive(Clone, Debug)]
pub struct ExpTower {
    pub spec: TowerSpec,
    pub base: CheeseSpec,
    /// `regions[i][n]` is the boundary of `X_n^{k_i}` for `k_i = spec.truncations[i]`.
    pub regions: Vec<Vec<Region>>,
    /// `cut_curves[i][n - 1]`: `z1` polylines of the stage-`n` cut curves in `X_{n-1}^{k_i}`.
    pub cut_curves: Vec<Vec<Vec<Vec<Complex64>>>>,
}

impl ExpTower {
    pub fn build(base: &CheeseSpec, cfg: &ExpTowerConfig) -> Result<ExpTower> {
        run(base, cfg, None)
    }

    /// Rebuilds the regions of a stored tower, optionally for other truncations.
    pub fn rebuild(tower: &TowerSpec, truncations: Option<Vec<usize>>, keep_final_region: bool) -> Result<ExpTower> {
        if tower.kind != TowerKind::Exponential {
            return Err(Error::InvalidParameter("not an exponential tower".into()));
        }
        let base = tower
            .base
            .clone()
            .ok_or_else(|| Error::InvalidParameter("exponential tower without a base cheese".into()))?;
        let cfg = ExpTowerConfig {
            stages: tower.stages.len(),
            truncations: truncations.unwrap_or_else(|| tower.truncations.clone()),
            dictionary_size: tower.dictionary_size,
            family: tower.family,
            seed: tower.seed,
            anchors: Some(tower.anchors),
            tolerances: tower.tolerances,
            keep_final_region,
        };
        run(&base, &cfg, Some(tower))
    }

    pub fn truncation_index(&self, k: usize) -> Result<usize> {
        self.spec
            .truncations
            .iter()
            .position(|&x| x == k)
            .ok_or_else(|| Error::InvalidParameter(format!("truncation k={k} not built")))
    }

    /// Boundary of `X_n^k`.
    pub fn region(&self, k: usize, n: usize) -> Result<&Region> {
        let i = self.truncation_index(k)?;
        self.regions[i]
            .get(n)
            .ok_or(Error::StageOutOfRange { stage: n, built: self.regions[i].len().saturating_sub(1) })
    }

    pub fn stack(&self, n: usize) -> Result<StageStack> {
        self.spec.stack(n)
    }
}

fn region_samples(region: &Region) -> SamplePoints {
    let mut out = SamplePoints::default();
    for piece in &region.pieces {
        let s = &piece.path.samples;
        for (i, p) in s.iter().enumerate() {
            let h = if i + 1 < s.len() {
                (s[i + 1].z[0] - p.z[0]).norm()
            } else if i > 0 {
                (p.z[0] - s[i - 1].z[0]).norm()
            } else {
                0.0
            };
            out.push(p.z.clone(), h);
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn make_dictionary(
    base: &CheeseSpec,
    cfg: &ExpTowerConfig,
    anchors: usize,
    level: usize,
    region: &Region,
    stack: &StageStack,
    windows: &[(f64, usize)],
    k_min: usize,
) -> Result<Dictionary> {
    let mut samples = region_samples(region);
    let h = CERTIFY_GRID * std::f64::consts::SQRT_2;
    for z1 in grid_points(Some(base), k_min, CERTIFY_GRID) {
        for p in exp_fiber(stack, windows, z1)? {
            samples.push(p.z, h);
        }
    }
    let size = cfg.dictionary_size.max(max_entry_needed(level, cfg.stages as u64));
    let window = if level == 0 { None } else { Some(windows[level - 1]) };
    build_exp_dictionary(
        Some(base),
        anchors,
        level,
        window,
        cfg.family,
        size,
        derive_seed(cfg.seed, TAG_DICTIONARY, level as u64),
        stack,
        &samples,
        cfg.tolerances.zero_free,
    )
}

fn run(base: &CheeseSpec, cfg: &ExpTowerConfig, fixed: Option<&TowerSpec>) -> Result<ExpTower> {
    let tol = cfg.tolerances;
    let mut ks = cfg.truncations.clone();
    ks.sort_unstable();
    ks.dedup();
    if ks.is_empty() {
        return Err(Error::InvalidParameter("at least one truncation is required".into()));
    }
    if let Some(&k) = ks.iter().find(|&&k| k > base.holes.len()) {
        return Err(Error::InvalidParameter(format!("truncation k={k} exceeds {} holes", base.holes.len())));
    }
    if !(tol.target_delta > 0.0 && tol.max_step_arg > 0.0 && tol.transversality > 0.0 && tol.zero_free > 0.0) {
        return Err(Error::InvalidParameter("tolerances must be positive".into()));
    }
    let k_min = ks[0];
    let anchors = cfg.anchors.unwrap_or(k_min).min(k_min);
    let n_stages = cfg.stages;

    let mut regions: Vec<Vec<Region>> = ks
        .iter()
        .map(|&k| Ok(vec![stage0_region(base, k, tol.max_step_arg)?]))
        .collect::<Result<_>>()?;
    let mut deltas = Vec::with_capacity(ks.len());
    let mut norms = Vec::with_capacity(ks.len());
    for &k in &ks {
        let len = chain_length(base, &boundary_chain(base, k)?);
        deltas.push(4.0 * PI - len);
        norms.push(len);
    }

    let needed = if n_stages > 0 { levels_needed(n_stages as u64) } else { Vec::new() };
    let mut dictionaries: Vec<Dictionary> = Vec::new();
    let mut stack = StageStack::new(TowerKind::Exponential, Vec::new());
    let mut stages: Vec<Stage> = Vec::new();
    let mut windows: Vec<(f64, usize)> = Vec::new();
    let mut cut_curves: Vec<Vec<Vec<Vec<Complex64>>>> = vec![Vec::new(); ks.len()];

    let add_dictionary = |level: usize,
                              dictionaries: &mut Vec<Dictionary>,
                              regions: &[Vec<Region>],
                              stack: &StageStack,
                              windows: &[(f64, usize)]|
     -> Result<()> {
        let d = match fixed {
            Some(t) => t.dictionary(level)?.clone(),
            None => make_dictionary(base, cfg, anchors, level, &regions[0][level], stack, windows, k_min)?,
        };
        dictionaries.push(d);
        Ok(())
    };

    if n_stages > 0 {
        add_dictionary(0, &mut dictionaries, &regions, &stack, &windows)?;
    }

    for m_idx in 1..=n_stages {
        let (level, j) = dictionary_source(m_idx as u64);
        let dict = dictionaries
            .iter()
            .find(|d| d.level == level)
            .ok_or(Error::MissingDictionary { level, index: j })?;
        let f = dict.entry(j)?.g.with_arity(m_idx);
        let stack_m = stack.pushed(f.clone());

        let prepared: Vec<Vec<cut::PreparedPiece>> = regions
            .iter()
            .map(|r| cut::prepare_region(&r[m_idx - 1], &stack_m, tol.max_step_arg, tol.zero_free))
            .collect::<Result<_>>()?;
        let stored = match fixed {
            Some(t) => Some(t.exp_stage(m_idx)?),
            None => None,
        };
        let (c, cert, crossings) = match stored {
            Some(st) => {
                let (mut cert, crossings) =
                    cut::certify_level_all(&stack_m, &prepared, st.c, tol.transversality, m_idx)?;
                cert.seed = st.cut.seed;
                cert.attempts = st.cut.attempts;
                (st.c, cert, crossings)
            }
            None => cut::choose_cut_level(
                &stack_m,
                &prepared,
                derive_seed(cfg.seed, TAG_CUT, m_idx as u64),
                tol.transversality,
                m_idx,
            )?,
        };

        let mut cut_sets: Vec<CutSet> = Vec::with_capacity(ks.len());
        for (i, (p, x)) in prepared.into_iter().zip(crossings).enumerate() {
            let cons = RegionConstraints::new(base, ks[i], windows.clone());
            cut_sets.push(cut::trace_cut_curves(&stack_m, p, x, c, &cons, tol.max_step_arg)?);
        }

        let m = match stored {
            Some(st) => st.m,
            None => cut_sets
                .iter()
                .enumerate()
                .map(|(i, cs)| cut::choose_sheet_count(norms[i], deltas[i], 2.0 * cs.length(), tol.target_delta))
                .max()
                .unwrap_or(1),
        };

        let mut truncations = Vec::with_capacity(ks.len());
        for (i, cs) in cut_sets.iter().enumerate() {
            let length = cs.length();
            let delta = m as f64 * deltas[i] - 2.0 * length;
            truncations.push(StageTruncation {
                k: ks[i],
                crossings: cs.crossings.len(),
                curves: cs.curves.len(),
                cut_length: length,
                prev_delta: deltas[i],
                delta,
            });
            deltas[i] = delta;
            norms[i] = m as f64 * norms[i] + 2.0 * length;
            cut_curves[i].push(
                cs.curves
                    .iter()
                    .map(|cv| cv.path.samples.iter().map(|s| s.z[0]).collect())
                    .collect(),
            );
        }

        if m_idx < n_stages || cfg.keep_final_region {
            for (i, cs) in cut_sets.iter().enumerate() {
                let next = advance_region(&regions[i][m_idx - 1], &stack_m, c, m, cs)?;
                regions[i].push(next);
            }
        }
        drop(cut_sets);

        stages.push(Stage::Exponential(ExpStage {
            level: m_idx,
            f,
            c,
            m,
            schedule: schedule(m_idx as u64),
            dict_source: (level, j),
            cut: cert,
            target_delta: tol.target_delta,
            truncations,
        }));
        windows.push((c, m));
        stack = stack_m;

        if m_idx < n_stages && needed.contains(&m_idx) {
            add_dictionary(m_idx, &mut dictionaries, &regions, &stack, &windows)?;
        }
    }

    let spec = TowerSpec {
        version: format_version(),
        kind: TowerKind::Exponential,
        seed: cfg.seed,
        base: Some(base.clone()),
        base_hash: Some(content_hash(base)?),
        truncations: ks,
        anchors,
        family: cfg.family,
        dictionary_size: cfg.dictionary_size,
        tolerances: tol,
        stages,
        dictionaries,
    };
    Ok(ExpTower { spec, base: base.clone(), regions, cut_curves })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cheese::{generate_cheese, Disc};

    #[test]
    fn constant_dictionary_has_empty_cuts() {
        let base = CheeseSpec::new(0, 0.5, 0.01, Vec::<Disc>::new());
        let mut cfg = ExpTowerConfig::new(1, vec![0], 5);
        cfg.family = DictionaryFamily::Constant;
        cfg.keep_final_region = true;
        let t = ExpTower::build(&base, &cfg).unwrap();
        let st = t.spec.exp_stage(1).unwrap();
        assert_eq!(st.truncations[0].curves, 0);
        assert_eq!(st.m, 1);
        assert!(t.region(0, 1).unwrap().is_closed(1e-9));
    }

    #[test]
    fn two_stage_regions_close_and_rebuild_identically() {
        let base = generate_cheese(7, 0.5, 5, 0.01).unwrap();
        let mut cfg = ExpTowerConfig::new(2, vec![5], 11);
        cfg.keep_final_region = true;
        let t = ExpTower::build(&base, &cfg).unwrap();
        for n in 0..=2 {
            assert!(t.region(5, n).unwrap().is_closed(1e-8), "stage {n} not closed");
        }
        for st in t.spec.exp_stages() {
            assert!(st.truncations[0].delta >= 1.0);
        }
        let r = ExpTower::rebuild(&t.spec, None, false).unwrap();
        assert_eq!(r.spec, t.spec);
    }
}
