//! End-to-end runs: cheese generation, tower construction, boundary measures,
//! certificates and the combined verdict.
//!
//! A [`Verdict`] keeps everything that must reproduce bit for bit in its
//! `payload`; wall-clock data lives in `metadata`.

use crate::certify::density::{boundary_samples, density_dictionary, nested_residuals, DensityFit, FitNorm};
use crate::certify::gap::{nontriviality_gap, sup_samples, test_family, NontrivialityReport};
use crate::certify::generators::{tower_generators, GeneratorReport};
use crate::certify::{certify_conditions, halving_identity_check, Certificate, HalvingReport};
use crate::cheese::{area, boundary_chain, generate_cheese, AreaMethod, CheeseSpec};
use crate::error::{Error, Result};
use crate::io::{content_hash, format_version};
use crate::quadrature::{direct_measure, integrate_chain, recursive_measures, Integrand, MeasureMethod, MeasureReport};
use crate::tower::dictionary::DictionaryFamily;
use crate::tower::{
    build_sqrt_tower, derive_seed, exp_fiber, grid_points, sqrt_fiber, ExpTower, ExpTowerConfig, SqrtTowerConfig,
    TowerKind, TowerSpec, TowerTolerances,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Relative agreement required between direct and recursive measures.
pub const AGREEMENT_TOL: f64 = 1e-6;
/// Allowed shortfall of the gap below `B_lb / 2 pi`.
pub const GAP_SLACK: f64 = 1e-4;
/// Allowed shortfall of a sampled sup norm below the gap.
pub const SUP_SLACK: f64 = 1e-3;
/// Bound on `|int g dmu| / (||mu|| ||g||)`.
pub const ANNIHILATION_TOL: f64 = 1e-8;
pub const RECOVERY_TOL: f64 = 1e-6;
pub const HALVING_TOL: f64 = 1e-12;
/// Residual that counts as an exact fit.
pub const DENSITY_EXACT_TOL: f64 = 1e-10;
/// Fiber points used for the generator identities.
pub const RECOVERY_SAMPLES: usize = 1000;
/// Grid spacing of the fiber points used for sup norms.
pub const SUP_GRID: f64 = 0.05;

const TAG_TESTS: u64 = 21;
const TAG_DENSITY: u64 = 22;
const TAG_SQRT_POINTS: u64 = 23;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub radius_budget: f64,
    pub hole_count: usize,
    pub min_crossing_angle: f64,
    pub truncations: Vec<usize>,
    pub stages: usize,
    pub kind: TowerKind,
    pub dictionary_size: usize,
    pub family: DictionaryFamily,
    pub target_delta: f64,
    pub quadrature_tol: f64,
    pub lift_tol: f64,
    pub transversality_tol: f64,
    /// Highest stage whose boundary is integrated directly; above it only the
    /// recursive measure is formed.
    pub direct_max_stage: usize,
    pub test_count: usize,
    pub density_truncation: usize,
    pub density_sizes: Vec<usize>,
    pub mc_samples: u64,
    pub sqrt_samples: usize,
    pub output_dir: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            radius_budget: 0.5,
            hole_count: 20,
            min_crossing_angle: 0.01,
            truncations: vec![5, 10, 20],
            stages: 2,
            kind: TowerKind::Exponential,
            dictionary_size: 4,
            family: DictionaryFamily::Mobius,
            target_delta: 1.0,
            quadrature_tol: 1e-10,
            lift_tol: 1e-10,
            transversality_tol: 1e-3,
            direct_max_stage: 2,
            test_count: 50,
            density_truncation: 3,
            density_sizes: vec![5, 15, 50],
            mc_samples: 1_000_000,
            sqrt_samples: 100,
            output_dir: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("target_delta", self.target_delta),
            ("quadrature_tol", self.quadrature_tol),
            ("lift_tol", self.lift_tol),
            ("transversality_tol", self.transversality_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.radius_budget > 0.0 && self.radius_budget < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "radius budget must lie in (0,1), got {}",
                self.radius_budget
            )));
        }
        if let Some(&k) = self.truncations.iter().find(|&&k| k > self.hole_count) {
            return Err(Error::InvalidParameter(format!(
                "truncation {k} exceeds the hole count {}",
                self.hole_count
            )));
        }
        if self.kind == TowerKind::Exponential && self.truncations.is_empty() {
            return Err(Error::InvalidParameter("at least one truncation is required".into()));
        }
        if self.density_sizes.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParameter("density sizes must be nondecreasing".into()));
        }
        Ok(())
    }

    pub fn tolerances(&self) -> TowerTolerances {
        TowerTolerances {
            lift: self.lift_tol,
            transversality: self.transversality_tol,
            target_delta: self.target_delta,
            ..TowerTolerances::default()
        }
    }

    /// Truncations in increasing order without repeats.
    pub fn sorted_truncations(&self) -> Vec<usize> {
        let mut ks = self.truncations.clone();
        ks.sort_unstable();
        ks.dedup();
        ks
    }

    pub fn to_json(&self) -> Result<String> {
        crate::io::to_pretty_json(self)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn generate_spec(cfg: &RunConfig) -> Result<CheeseSpec> {
    cfg.validate()?;
    generate_cheese(cfg.seed, cfg.radius_budget, cfg.hole_count, cfg.min_crossing_angle)
}

/// Builds the configured tower (the cheese is ignored for square-root towers).
pub fn build_tower(cfg: &RunConfig, spec: Option<&CheeseSpec>) -> Result<TowerSpec> {
    cfg.validate()?;
    match cfg.kind {
        TowerKind::Exponential => {
            let base = spec.ok_or_else(|| Error::InvalidParameter("exponential towers need a cheese".into()))?;
            Ok(ExpTower::build(base, &exp_config(cfg))?.spec)
        }
        TowerKind::SquareRoot => {
            let mut sc = SqrtTowerConfig::new(cfg.stages, cfg.seed);
            sc.dictionary_size = cfg.dictionary_size;
            sc.tolerances = cfg.tolerances();
            build_sqrt_tower(&sc)
        }
    }
}

fn exp_config(cfg: &RunConfig) -> ExpTowerConfig {
    let mut ec = ExpTowerConfig::new(cfg.stages, cfg.sorted_truncations(), cfg.seed);
    ec.dictionary_size = cfg.dictionary_size;
    ec.family = cfg.family;
    ec.tolerances = cfg.tolerances();
    ec.keep_final_region = cfg.stages <= cfg.direct_max_stage;
    ec
}

/// Regions of a stored exponential tower, with the top stage kept when it is
/// to be integrated directly.
pub fn rebuild(cfg: &RunConfig, tower: &TowerSpec) -> Result<ExpTower> {
    ExpTower::rebuild(tower, None, tower.len() <= cfg.direct_max_stage)
}

/// Recursive measures for every `(n, k)`, and direct ones up to `direct_max_stage`.
pub fn measures(cfg: &RunConfig, tower: &ExpTower) -> Result<Vec<MeasureReport>> {
    let mut out = Vec::new();
    for &k in &tower.spec.truncations {
        let rec = recursive_measures(&tower.spec, tower.spec.len(), k)?;
        for (n, r) in rec.into_iter().enumerate() {
            if n <= cfg.direct_max_stage {
                let region = tower.region(k, n)?;
                out.push(direct_measure(region, &tower.stack(n)?, cfg.quadrature_tol)?.0);
            }
            out.push(r);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub stage: usize,
    pub k: usize,
    pub moment_rel_diff: f64,
    pub variation_rel_diff: f64,
}

impl Agreement {
    pub fn passes(&self) -> bool {
        self.moment_rel_diff <= AGREEMENT_TOL && self.variation_rel_diff <= AGREEMENT_TOL
    }
}

/// `oint zbar dz1` over `dX_0^k` against `2 i` times a Monte Carlo area.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenCheck {
    pub k: usize,
    pub contour_integral: Complex64,
    pub area_mc: f64,
    pub sigma_mc: f64,
    pub discrepancy: f64,
    pub pass: bool,
}

pub fn green_check(spec: &CheeseSpec, k: usize, samples: u64, tol: f64) -> Result<GreenCheck> {
    let chain = boundary_chain(spec, k)?;
    let q = integrate_chain(spec, &chain, &Integrand::ConjugateZ1, tol)?;
    let (a, s) = area(spec, k, AreaMethod::MonteCarlo { samples })?;
    let discrepancy = (q.value - Complex64::new(0.0, 2.0 * a)).norm();
    Ok(GreenCheck {
        k,
        contour_integral: q.value,
        area_mc: a,
        sigma_mc: 2.0 * s,
        discrepancy,
        pass: discrepancy <= 3.0 * 2.0 * s,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub k: usize,
    pub sizes: Vec<usize>,
    /// Fits of `Re z` in L2 and in the sup norm.
    pub re_z_l2: Vec<DensityFit>,
    pub re_z_sup: Vec<DensityFit>,
    /// L2 residual when the target is `log|g|` for the second dictionary entry.
    pub member_residual: f64,
    pub monotone: bool,
}

pub fn density_report(spec: &CheeseSpec, k: usize, sizes: &[usize], seed: u64) -> Result<DensityReport> {
    let samples = boundary_samples(spec, k, 0.02)?;
    let largest = sizes.iter().copied().max().unwrap_or(0).max(2);
    let dict = density_dictionary(spec, k, largest, derive_seed(seed, TAG_DENSITY, k as u64));
    let re: Vec<f64> = samples.points.iter().map(|z| z.re).collect();
    let l2 = nested_residuals(&samples, &dict, sizes, &re, FitNorm::L2)?;
    let sup = nested_residuals(&samples, &dict, sizes, &re, FitNorm::Sup)?;
    let member: Vec<f64> = samples.points.iter().map(|&z| dict[1].g.eval(&[z]).norm().ln()).collect();
    let exact = nested_residuals(&samples, &dict, &[sizes.first().copied().unwrap_or(2).max(2)], &member, FitNorm::L2)?;
    let monotone = |f: &[DensityFit]| f.windows(2).all(|w| w[1].residual <= w[0].residual);
    Ok(DensityReport {
        k,
        sizes: sizes.to_vec(),
        monotone: monotone(&l2) && monotone(&sup),
        re_z_l2: l2,
        re_z_sup: sup,
        member_residual: exact[0].residual,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqrtChecks {
    pub stages: usize,
    pub base_points: usize,
    /// Every fiber had exactly `2^N` pairwise distinct points.
    pub fiber_cardinality_ok: bool,
    pub min_fiber_separation: f64,
    /// `|alpha_M| < 1/M` for every stage.
    pub alpha_bounds_ok: bool,
    pub alpha_ratios: Vec<f64>,
    pub halving: HalvingReport,
}

/// Fibers over `count` seeded base points in the unit disc, skipping points
/// where some stage function has modulus below `1e-6` on the fiber.
pub fn sqrt_checks(tower: &TowerSpec, count: usize, seed: u64) -> Result<SqrtChecks> {
    let n = tower.len();
    let stack = tower.stack(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, TAG_SQRT_POINTS, n as u64));
    let mut fibers = Vec::with_capacity(count);
    let mut draws = 0;
    while fibers.len() < count {
        draws += 1;
        if draws > 1000 * count.max(1) {
            return Err(Error::InvalidParameter("could not place base points away from zeros".into()));
        }
        let z1 = Complex64::from_polar(rng.gen::<f64>().sqrt(), rng.gen_range(-PI..PI));
        let Ok(fiber) = sqrt_fiber(&stack, z1) else { continue };
        let near_zero = fiber.iter().any(|p| (1..=n).any(|s| stack.eval_f(s, &p.z).norm() < 1e-6));
        if !near_zero {
            fibers.push(fiber);
        }
    }
    let mut ok = true;
    let mut sep = f64::INFINITY;
    for f in &fibers {
        ok &= f.len() == 1usize << n;
        for i in 0..f.len() {
            for j in i + 1..f.len() {
                let d = f[i].z.iter().zip(&f[j].z).fold(0.0f64, |a, (x, y)| a.max((x - y).norm()));
                sep = sep.min(d);
            }
        }
    }
    ok &= n == 0 || sep > 1e-9;
    let ratios: Vec<f64> = tower.sqrt_stages().iter().map(|s| s.alpha.norm() * s.level as f64).collect();
    let points: Vec<Vec<Complex64>> = fibers.into_iter().flatten().map(|p| p.z).collect();
    Ok(SqrtChecks {
        stages: n,
        base_points: count,
        fiber_cardinality_ok: ok,
        min_fiber_separation: sep,
        alpha_bounds_ok: ratios.iter().all(|&r| r < 1.0),
        alpha_ratios: ratios,
        halving: halving_identity_check(tower, &points)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, pass: bool, detail: String) -> Check {
    Check { name: name.into(), pass, detail }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictPayload {
    pub version: String,
    pub config_hash: String,
    pub spec_hash: Option<String>,
    pub tower_hash: String,
    pub kind: TowerKind,
    pub b_lb: Option<f64>,
    pub certificates: Vec<Certificate>,
    pub measures: Vec<MeasureReport>,
    pub agreements: Vec<Agreement>,
    pub green: Vec<GreenCheck>,
    pub nontriviality: Vec<NontrivialityReport>,
    pub density: Option<DensityReport>,
    pub generators: Option<GeneratorReport>,
    pub sqrt: Option<SqrtChecks>,
    /// Smallest achieved `delta_N` over the truncations, per stage `0..=N`.
    pub min_delta: Vec<f64>,
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictMetadata {
    pub created_unix_ms: u128,
    pub elapsed_ms: u128,
    pub threads: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub payload: VerdictPayload,
    pub metadata: VerdictMetadata,
}

impl Verdict {
    /// One line per certificate, then one per failed check.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.payload.certificates {
            s.push_str(&c.summary());
            s.push('\n');
        }
        for c in self.payload.checks.iter().filter(|c| !c.pass) {
            s.push_str(&format!("FAILED {}: {}\n", c.name, c.detail));
        }
        s
    }
}

fn metadata(start: std::time::Instant) -> VerdictMetadata {
    VerdictMetadata {
        created_unix_ms: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or(0),
        elapsed_ms: start.elapsed().as_millis(),
        threads: rayon::current_num_threads(),
    }
}

/// `count` fiber points of `X_n^k` over an evenly thinned grid.
pub fn fiber_points(tower: &ExpTower, n: usize, k: usize, count: usize) -> Result<Vec<Vec<Complex64>>> {
    let stack = tower.stack(n)?;
    let windows = tower.spec.windows(n);
    let mut h = 0.1;
    loop {
        let mut pts = Vec::new();
        for z1 in grid_points(Some(&tower.base), k, h) {
            if let Ok(f) = exp_fiber(&stack, &windows, z1) {
                pts.extend(f.into_iter().map(|p| p.z));
            }
        }
        if pts.len() >= count || h < 1e-3 {
            let stride = (pts.len() as f64 / count as f64).max(1.0);
            return Ok((0..count.min(pts.len())).map(|i| pts[(i as f64 * stride) as usize].clone()).collect());
        }
        h *= 0.7;
    }
}

/// Certificates and reports for a stored tower.
pub fn certify(cfg: &RunConfig, spec: Option<&CheeseSpec>, tower: &TowerSpec) -> Result<Verdict> {
    let start = std::time::Instant::now();
    cfg.validate()?;
    let config_hash = content_hash(cfg)?;
    let tower_hash = content_hash(tower)?;
    let payload = match tower.kind {
        TowerKind::SquareRoot => {
            let sq = sqrt_checks(tower, cfg.sqrt_samples, cfg.seed)?;
            let checks = vec![
                check("sqrt_fiber_cardinality", sq.fiber_cardinality_ok, format!("min separation {:e}", sq.min_fiber_separation)),
                check("sqrt_alpha_bounds", sq.alpha_bounds_ok, format!("M|alpha_M| = {:?}", sq.alpha_ratios)),
                check(
                    "halving_identity",
                    sq.halving.max_residual <= HALVING_TOL,
                    format!("max residual {:e}", sq.halving.max_residual),
                ),
            ];
            VerdictPayload {
                version: format_version(),
                config_hash,
                spec_hash: None,
                tower_hash,
                kind: tower.kind,
                b_lb: None,
                certificates: Vec::new(),
                measures: Vec::new(),
                agreements: Vec::new(),
                green: Vec::new(),
                nontriviality: Vec::new(),
                density: None,
                generators: None,
                sqrt: Some(sq),
                min_delta: Vec::new(),
                all_pass: checks.iter().all(|c| c.pass),
                checks,
            }
        }
        TowerKind::Exponential => {
            let base = tower
                .base
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("exponential tower without a base cheese".into()))?;
            if let Some(s) = spec {
                if s != base {
                    return Err(Error::InvalidParameter("tower was built over a different cheese".into()));
                }
            }
            exp_payload(cfg, base, tower, config_hash, tower_hash)?
        }
    };
    Ok(Verdict { payload, metadata: metadata(start) })
}

fn exp_payload(
    cfg: &RunConfig,
    base: &CheeseSpec,
    tower: &TowerSpec,
    config_hash: String,
    tower_hash: String,
) -> Result<VerdictPayload> {
    let et = rebuild(cfg, tower)?;
    let n_top = tower.len();
    let b_lb = base.area_lower_bound();
    let all = measures(cfg, &et)?;
    let mut checks = Vec::new();

    let mut certificates = Vec::new();
    let mut agreements = Vec::new();
    let mut min_delta = vec![f64::INFINITY; n_top + 1];
    for &k in &tower.truncations {
        for n in 0..=n_top {
            let of = |m: MeasureMethod| all.iter().find(|r| r.k == k && r.stage == n && r.method == m);
            let rec = of(MeasureMethod::Recursive).expect("recursive measure for every pair");
            let direct = of(MeasureMethod::Direct);
            if let Some(d) = direct {
                let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
                agreements.push(Agreement {
                    stage: n,
                    k,
                    moment_rel_diff: (d.moment_zbar - rec.moment_zbar).norm() / rec.moment_zbar.norm().max(1e-300),
                    variation_rel_diff: rel(d.total_variation, rec.total_variation),
                });
            }
            let c = certify_conditions(tower, direct.unwrap_or(rec), b_lb, cfg.target_delta);
            min_delta[n] = min_delta[n].min(c.delta_margin);
            certificates.push(c);
        }
    }
    for c in &certificates {
        checks.push(check(format!("conditions_N{}_k{}", c.stage, c.k), c.passes(), c.summary()));
    }
    for a in &agreements {
        checks.push(check(
            format!("direct_vs_recursive_N{}_k{}", a.stage, a.k),
            a.passes(),
            format!("moment {:e}, variation {:e}", a.moment_rel_diff, a.variation_rel_diff),
        ));
    }

    let mut green = Vec::new();
    for &k in &tower.truncations {
        let g = green_check(base, k, cfg.mc_samples, cfg.quadrature_tol)?;
        checks.push(check(
            format!("green_k{k}"),
            g.pass,
            format!("|oint - 2i area| = {:e}, 3 sigma = {:e}", g.discrepancy, 3.0 * g.sigma_mc),
        ));
        green.push(g);
    }

    let mut nontriviality = Vec::new();
    for &k in &tower.truncations {
        for n in 0..=n_top.min(cfg.direct_max_stage) {
            let region = et.region(k, n)?;
            let stack = et.stack(n)?;
            let report = all
                .iter()
                .find(|r| r.k == k && r.stage == n && r.method == MeasureMethod::Direct)
                .expect("direct measure below the direct stage limit");
            let tests = test_family(base, k, n, cfg.test_count, derive_seed(cfg.seed, TAG_TESTS, (n * 1000 + k) as u64));
            let samples = sup_samples(region, &stack, &tower.windows(n), base, SUP_GRID);
            let r = nontriviality_gap(report, region, &stack, &tests, &samples, b_lb, cfg.quadrature_tol)?;
            checks.push(check(
                format!("gap_N{n}_k{k}"),
                r.gap >= r.theoretical_floor - GAP_SLACK && r.sup_bound_holds(SUP_SLACK) && r.skipped.is_empty(),
                format!("gap {:.6} vs floor {:.6}, min sampled sup {:.6}", r.gap, r.theoretical_floor, r.sampled_sup_norm_min),
            ));
            checks.push(check(
                format!("annihilation_N{n}_k{k}"),
                r.annihilation_ratio() <= ANNIHILATION_TOL,
                format!("max |int g dmu| = {:e}, ratio {:e}", r.annihilation_max, r.annihilation_ratio()),
            ));
            nontriviality.push(r);
        }
    }

    let density = if cfg.density_sizes.is_empty() {
        None
    } else {
        let k = cfg.density_truncation.min(base.holes.len());
        let d = density_report(base, k, &cfg.density_sizes, cfg.seed)?;
        checks.push(check("density_monotone", d.monotone, format!("{:?}", d.re_z_l2.iter().map(|f| f.residual).collect::<Vec<_>>())));
        checks.push(check(
            "density_member_exact",
            d.member_residual <= DENSITY_EXACT_TOL,
            format!("residual {:e}", d.member_residual),
        ));
        Some(d)
    };

    let generators = if n_top >= 1 {
        let n = n_top.min(cfg.direct_max_stage);
        let k = tower.truncations[0];
        let region = et.region(k, n)?;
        let norm_points = sup_samples(region, &et.stack(n)?, &tower.windows(n), base, SUP_GRID);
        let rec_points = fiber_points(&et, n, k, RECOVERY_SAMPLES)?;
        let g = tower_generators(tower, n, &norm_points, &rec_points)?;
        let worst = g.recovery_residuals.iter().fold(0.0f64, |a, r| a.max(r.value));
        checks.push(check("generator_conditions", g.all_conditions(), format!("{:?}", g.condition_checks)));
        checks.push(check(
            "generator_recovery",
            worst <= RECOVERY_TOL && g.case_one_margins.iter().all(|m| m.value < 1.0),
            format!("max Case II residual {worst:e}"),
        ));
        Some(g)
    } else {
        None
    };

    Ok(VerdictPayload {
        version: format_version(),
        config_hash,
        spec_hash: Some(content_hash(base)?),
        tower_hash,
        kind: tower.kind,
        b_lb: Some(b_lb),
        certificates,
        measures: all,
        agreements,
        green,
        nontriviality,
        density,
        generators,
        sqrt: None,
        min_delta,
        all_pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

/// Everything a full run produces.
#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub spec: Option<CheeseSpec>,
    pub tower: TowerSpec,
    pub verdict: Verdict,
}

pub fn run(cfg: &RunConfig) -> Result<RunArtifacts> {
    let spec = match cfg.kind {
        TowerKind::Exponential => Some(generate_spec(cfg)?),
        TowerKind::SquareRoot => None,
    };
    let tower = build_tower(cfg, spec.as_ref())?;
    let verdict = certify(cfg, spec.as_ref(), &tower)?;
    Ok(RunArtifacts { spec, tower, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RunConfig {
        RunConfig {
            hole_count: 6,
            truncations: vec![3, 6],
            stages: 1,
            test_count: 8,
            density_sizes: vec![3, 6],
            mc_samples: 200_000,
            ..RunConfig::default()
        }
    }

    #[test]
    fn config_round_trips() {
        let c = small();
        assert_eq!(RunConfig::from_json(&c.to_json().unwrap()).unwrap(), c);
        assert_eq!(RunConfig::from_json("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn config_rejects_bad_values() {
        assert!(RunConfig { quadrature_tol: 0.0, ..small() }.validate().is_err());
        assert!(RunConfig { radius_budget: 1.5, ..small() }.validate().is_err());
        assert!(RunConfig { truncations: vec![9], ..small() }.validate().is_err());
        assert!(RunConfig::from_json("{\"bogus\": 1}").is_err());
    }

    #[test]
    fn small_run_passes_and_is_deterministic() {
        let a = run(&small()).unwrap();
        assert!(a.verdict.payload.all_pass, "{}", a.verdict.summary());
        assert_eq!(a.verdict.payload.certificates.len(), 4);
        let b = run(&small()).unwrap();
        assert_eq!(
            crate::io::to_pretty_json(&a.verdict.payload).unwrap(),
            crate::io::to_pretty_json(&b.verdict.payload).unwrap()
        );
    }

    #[test]
    fn sqrt_run_passes() {
        let cfg = RunConfig { kind: TowerKind::SquareRoot, stages: 3, sqrt_samples: 20, ..RunConfig::default() };
        let a = run(&cfg).unwrap();
        assert!(a.spec.is_none());
        assert!(a.verdict.payload.all_pass, "{}", a.verdict.summary());
    }
}
