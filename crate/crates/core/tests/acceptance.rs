//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use cheese_core::certify::certify_conditions;
use cheese_core::certify::density::{boundary_samples, density_dictionary, nested_residuals, FitNorm};
use cheese_core::certify::gap::sup_samples;
use cheese_core::certify::generators::tower_generators;
use cheese_core::cheese::{boundary_chain, chain_length, generate_cheese};
use cheese_core::io::to_pretty_json;
use cheese_core::pipeline::{self, fiber_points, green_check, sqrt_checks, RunConfig};
use cheese_core::quadrature::{direct_measure, recursive_measures};
use cheese_core::tower::schedule::{dictionary_source, schedule, ScheduleIndex};
use cheese_core::tower::{build_sqrt_tower, ExpTower, ExpTowerConfig, SqrtTowerConfig, Stage, TowerSpec};
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok { Ok(()) } else { Err(msg()) }
}

fn exp_tower(seed: u64, stages: usize, keep_final: bool) -> ExpTower {
    let base = generate_cheese(seed, 0.5, 20, 0.01).expect("cheese");
    let mut cfg = ExpTowerConfig::new(stages, vec![5, 10, 20], seed);
    cfg.keep_final_region = keep_final;
    ExpTower::build(&base, &cfg).expect("tower")
}

fn green_identity() -> Outcome {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 1..=10u64 {
        let spec = generate_cheese(seed, 0.5, 2 * seed as usize, 0.01).map_err(|e| e.to_string())?;
        let k = spec.holes.len();
        let g = green_check(&spec, k, 10_000_000, 1e-10).map_err(|e| e.to_string())?;
        ensure(g.pass, || format!("seed {seed}: |oint - 2i area| = {:e} > 3 sigma = {:e}", g.discrepancy, 3.0 * g.sigma_mc))?;
        worst = worst.max(g.discrepancy / g.sigma_mc);
    }
    let secs = t.elapsed().as_secs_f64();
    ensure(secs <= 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!("10 cheeses, worst discrepancy {worst:.2} sigma, {secs:.1} s"))
}

fn chain_length_bound() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for seed in 0..100u64 {
        let spec = generate_cheese(seed, 0.5, 20, 0.01).map_err(|e| e.to_string())?;
        for k in 0..=spec.holes.len() {
            let l = chain_length(&spec, &boundary_chain(&spec, k).map_err(|e| e.to_string())?);
            ensure(l < 3.0 * PI, || format!("seed {seed} k {k}: length {l}"))?;
            worst = worst.max(l);
            count += 1;
        }
    }
    Ok(format!("{count} chains, longest {worst:.6} < 3 pi"))
}

fn ei_law(towers: &[ExpTower]) -> Outcome {
    let mut worst: f64 = 0.0;
    for t in towers {
        for &k in &t.spec.truncations {
            let mut prev = None;
            for n in 0..=2 {
                let (r, _) = direct_measure(t.region(k, n).unwrap(), &t.stack(n).unwrap(), 1e-12).map_err(|e| e.to_string())?;
                if let Some(p) = prev {
                    let m = t.spec.exp_stage(n).unwrap().m as f64;
                    let want: num_complex::Complex64 = p * m;
                    let rel = (r.ei_moment - want).norm() / want.norm();
                    ensure(rel <= 1e-6, || format!("k {k} N {n}: relative error {rel:e}"))?;
                    worst = worst.max(rel);
                }
                prev = Some(r.moment_zbar);
            }
        }
    }
    Ok(format!("worst relative error {worst:.2e}"))
}

fn ej_cancellation(towers: &[ExpTower]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cuts = 0;
    for t in towers {
        for &k in &t.spec.truncations {
            for n in 1..=2 {
                let (r, _) = direct_measure(t.region(k, n).unwrap(), &t.stack(n).unwrap(), 1e-12).map_err(|e| e.to_string())?;
                let ej = r.ej_moment.norm();
                ensure(ej <= 1e-8 * r.ej_variation, || format!("k {k} N {n}: |E_J| {ej:e} vs variation {}", r.ej_variation))?;
                if r.ej_variation > 0.0 {
                    cuts += 1;
                    worst = worst.max(ej / r.ej_variation);
                }
            }
        }
    }
    Ok(format!("{cuts} nonempty cut sets, worst ratio {worst:.2e}"))
}

fn conditions(towers: &[ExpTower], build_secs: f64) -> Outcome {
    let t0 = Instant::now();
    let b_lb = PI * (1.0 - 0.25);
    let mut min_delta = f64::INFINITY;
    for t in towers {
        ensure((t.base.area_lower_bound() - b_lb).abs() < 1e-15, || "B_lb mismatch".into())?;
        for &k in &[5, 10, 20] {
            let rec = recursive_measures(&t.spec, 3, k).map_err(|e| e.to_string())?;
            for n in 1..=3 {
                let c = certify_conditions(&t.spec, &rec[n], b_lb, 1.0);
                ensure(c.passes() && c.delta_margin >= 1.0 && c.moment_abs > 2.0 * b_lb * t.spec.sheet_product(n), || {
                    c.summary()
                })?;
                min_delta = min_delta.min(c.delta_margin);
            }
        }
    }
    let secs = build_secs + t0.elapsed().as_secs_f64();
    ensure(secs <= 600.0, || format!("took {secs:.1} s"))?;
    Ok(format!("{} towers, N = 1..3, k = 5,10,20, min delta {min_delta:.4}, {secs:.2} s including builds", towers.len()))
}

fn gap(run: &pipeline::RunArtifacts) -> Outcome {
    let p = &run.verdict.payload;
    ensure(p.nontriviality.len() == 9, || format!("{} reports", p.nontriviality.len()))?;
    let mut min_gap = f64::INFINITY;
    for r in &p.nontriviality {
        ensure(r.tests.len() == 50 && r.skipped.is_empty(), || format!("N {} k {}: {} tests, skipped {:?}", r.stage, r.k, r.tests.len(), r.skipped))?;
        ensure(r.gap >= 0.375 - 1e-4, || format!("N {} k {}: gap {}", r.stage, r.k, r.gap))?;
        for t in &r.tests {
            ensure(t.sampled_sup >= r.gap - 1e-3, || format!("{}: sampled sup {} < gap {}", t.label, t.sampled_sup, r.gap))?;
        }
        min_gap = min_gap.min(r.gap);
    }
    Ok(format!("N = 0..2, k = 5,10,20, 50 tests each, min gap {min_gap:.6} >= 0.375"))
}

fn annihilation(run: &pipeline::RunArtifacts) -> Outcome {
    let mut worst: f64 = 0.0;
    for r in &run.verdict.payload.nontriviality {
        let bound = 1e-8 * r.measure_norm * r.max_test_norm;
        ensure(r.annihilation_max <= bound, || format!("N {} k {}: {:e} > {:e}", r.stage, r.k, r.annihilation_max, bound))?;
        worst = worst.max(r.annihilation_ratio());
    }
    Ok(format!("worst |int g dmu| / (||mu|| ||g||) = {worst:.2e}"))
}

fn truncated(t: &TowerSpec, n: usize) -> TowerSpec {
    TowerSpec { stages: t.stages[..n].to_vec(), ..t.clone() }
}

fn sqrt_tower() -> Outcome {
    let t = build_sqrt_tower(&SqrtTowerConfig::new(8, 1)).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for n in 1..=8 {
        let c = sqrt_checks(&truncated(&t, n), 100, 1).map_err(|e| e.to_string())?;
        ensure(c.fiber_cardinality_ok, || format!("N {n}: fiber cardinality, separation {:e}", c.min_fiber_separation))?;
        ensure(c.alpha_bounds_ok, || format!("N {n}: M |alpha_M| = {:?}", c.alpha_ratios))?;
        ensure(c.halving.max_residual <= 1e-12, || format!("N {n}: halving residual {:e}", c.halving.max_residual))?;
        worst = worst.max(c.halving.max_residual);
    }
    for s in &t.stages {
        if let Stage::SquareRoot(s) = s {
            ensure(s.alpha.norm() < 1.0 / s.level as f64, || format!("alpha_{} = {}", s.level, s.alpha))?;
        }
    }
    Ok(format!("N = 1..8, 2^N distinct points over 100 bases, halving residual {worst:.2e}"))
}

fn scheduler(tower3: &ExpTower) -> Outcome {
    // Brute force: sort every admissible pair in dictionary order.
    let mut pairs = vec![(0u64, 0u64)];
    let mut r = 1;
    while pairs.len() < 10_001 {
        for s in 1..=r {
            pairs.push((r, s));
        }
        r += 1;
    }
    pairs.sort();
    for n in 1..=10_000u64 {
        let (r, s) = pairs[(n - 1) as usize];
        ensure(schedule(n) == ScheduleIndex { r, s }, || format!("schedule({n}) = {:?}, expected ({r},{s})", schedule(n)))?;
    }
    ensure(dictionary_source(1) == (0, 1), || format!("N=1 draws {:?}", dictionary_source(1)))?;
    ensure(dictionary_source(3) == (1, 1), || format!("N=3 draws {:?}", dictionary_source(3)))?;
    let spec = &tower3.spec;
    let g01 = spec.dictionary(0).unwrap().entry(1).unwrap().g.with_arity(1);
    let g11 = spec.dictionary(1).unwrap().entry(1).unwrap().g.with_arity(3);
    ensure(spec.exp_stage(1).unwrap().f == g01, || "stage 1 is not g_{0,1}".into())?;
    ensure(spec.exp_stage(3).unwrap().f == g11, || "stage 3 is not g_{1,1}".into())?;
    Ok("schedule matches enumeration for N <= 10^4; f_1 = g_{0,1}, f_3 = g_{1,1}".into())
}

fn generators(t: &ExpTower) -> Outcome {
    let k = 5;
    let region = t.region(k, 2).unwrap();
    let stack = t.stack(2).unwrap();
    let norm_points = sup_samples(region, &stack, &t.spec.windows(2), &t.base, 0.05);
    let rec_points = fiber_points(t, 2, k, 1000).map_err(|e| e.to_string())?;
    ensure(rec_points.len() == 1000, || format!("{} fiber samples", rec_points.len()))?;
    let g = tower_generators(&t.spec, 2, &norm_points, &rec_points).map_err(|e| e.to_string())?;
    ensure(g.all_conditions(), || format!("conditions {:?}", g.condition_checks))?;
    let worst = g.recovery_residuals.iter().fold(0.0f64, |a, r| a.max(r.value));
    ensure(worst <= 1e-6, || format!("recovery residual {worst:e}"))?;
    ensure(g.case_one_margins.iter().all(|m| m.value < 1.0), || format!("{:?}", g.case_one_margins))?;
    Ok(format!("(i)-(iv) hold for c = {:.3e}..{:.3e}; Case II residual {worst:.2e}", g.coefficients[0], g.coefficients.last().unwrap()))
}

fn density() -> Outcome {
    let spec = generate_cheese(3, 0.5, 3, 0.01).map_err(|e| e.to_string())?;
    let s = boundary_samples(&spec, 3, 0.02).map_err(|e| e.to_string())?;
    let dict = density_dictionary(&spec, 3, 50, 7);
    let re: Vec<f64> = s.points.iter().map(|z| z.re).collect();
    let mut line = Vec::new();
    for norm in [FitNorm::L2, FitNorm::Sup] {
        let fits = nested_residuals(&s, &dict, &[5, 15, 50], &re, norm).map_err(|e| e.to_string())?;
        let res: Vec<f64> = fits.iter().map(|f| f.residual).collect();
        ensure(res.windows(2).all(|w| w[1] <= w[0]), || format!("{norm:?} residuals {res:?}"))?;
        line.push(format!("{norm:?} {:.2e}/{:.2e}/{:.2e}", res[0], res[1], res[2]));
    }
    for j in [1, 4, 20, 49] {
        let u: Vec<f64> = s.points.iter().map(|&z| dict[j].g.eval(&[z]).norm().ln()).collect();
        for f in nested_residuals(&s, &dict, &[5, 15, 50], &u, FitNorm::L2).map_err(|e| e.to_string())? {
            if f.size > j {
                ensure(f.residual <= 1e-10, || format!("member {j} at size {}: residual {:e}", f.size, f.residual))?;
            }
        }
    }
    Ok(format!("Re z: {}; member targets exact", line.join(", ")))
}

fn determinism(a: &pipeline::RunArtifacts, b: &pipeline::RunArtifacts) -> Outcome {
    let js = |r: &pipeline::RunArtifacts| {
        (
            r.spec.as_ref().unwrap().to_json().unwrap(),
            r.tower.to_json().unwrap(),
            to_pretty_json(&r.verdict.payload).unwrap(),
        )
    };
    let (x, y) = (js(a), js(b));
    ensure(x.0 == y.0, || "spec differs".into())?;
    ensure(x.1 == y.1, || "tower differs".into())?;
    ensure(x.2 == y.2, || "verdict payload differs".into())?;
    Ok(format!("spec {} B, tower {} B, verdict {} B identical", x.0.len(), x.1.len(), x.2.len()))
}

fn report(n: usize, name: &str, f: impl FnOnce() -> Outcome, failures: &mut usize) {
    let t = Instant::now();
    let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
    });
    let secs = t.elapsed().as_secs_f64();
    match out {
        Ok(msg) => println!("criterion {n:>2} PASS  {name}: {msg} [{secs:.1}s]"),
        Err(msg) => {
            *failures += 1;
            println!("criterion {n:>2} FAIL  {name}: {msg} [{secs:.1}s]");
        }
    }
}

fn main() {
    let mut failures = 0;
    let towers2: Vec<ExpTower> = (1..=3).map(|s| exp_tower(s, 2, true)).collect();
    let t3 = Instant::now();
    let towers3: Vec<ExpTower> = (1..=3).map(|s| exp_tower(s, 3, false)).collect();
    let build3 = t3.elapsed().as_secs_f64();
    let cfg = RunConfig::default();
    let run_a = pipeline::run(&cfg).expect("pipeline run");
    let run_b = pipeline::run(&cfg).expect("pipeline run");

    report(1, "Green identity", green_identity, &mut failures);
    report(2, "boundary length < 3 pi", chain_length_bound, &mut failures);
    report(3, "E_I multiplication law", || ei_law(&towers2), &mut failures);
    report(4, "E_J cancellation", || ej_cancellation(&towers2), &mut failures);
    report(5, "norm and moment conditions", || conditions(&towers3, build3), &mut failures);
    report(6, "nontriviality gap", || gap(&run_a), &mut failures);
    report(7, "Stokes annihilation", || annihilation(&run_a), &mut failures);
    report(8, "square-root tower", sqrt_tower, &mut failures);
    report(9, "scheduler and wiring", || scheduler(&towers3[0]), &mut failures);
    report(10, "generator coefficients", || generators(&towers2[0]), &mut failures);
    report(11, "density residual", density, &mut failures);
    report(12, "determinism", || determinism(&run_a, &run_b), &mut failures);

    println!("acceptance: {} of 12 criteria passed", 12 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
