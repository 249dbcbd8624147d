//! Cut levels, cut curves and sheet counts for one stage of the exponential tower.
//!
//! For a stage function `f` on the region `X_{M-1}^k`, a level `c` is admissible
//! when `arg f` (continued along each boundary piece) crosses every level
//! `c + 2 pi j` transversally, stays away from those levels at piece endpoints,
//! and has no near-tangencies. The level set `{arg f = c mod 2 pi}` inside the
//! region is then a finite union of arcs joining crossings in pairs; each arc is
//! traced by predictor-corrector continuation along `conj(f'/f)`. Along such a
//! direction `log|f|` strictly increases, so the level set has no closed loops.

use super::path::{BasePath, CurveNode, LiftedPath, PathSample, StageStack};
use super::region::Region;
use crate::cheese::{CheeseSpec, Disc};
use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

pub const CUT_RETRIES: usize = 64;
const BISECT_ITERS: usize = 64;
const CORRECTOR_TOL: f64 = 1e-13;
/// Largest predictor step along a cut curve.
pub const TRACE_MAX_STEP: f64 = 0.01;
const TRACE_MIN_STEP: f64 = 1e-4;
const MATCH_TOL: f64 = 1e-5;
const MAX_TRACE_STEPS: usize = 2_000_000;

fn im(x: f64) -> Complex64 {
    Complex64::new(0.0, x)
}

/// A piece of `X_{M-1}^k` lifted one stage further (provisionally), so that the
/// imaginary part of its last coordinate is a continuous argument of `f_M`.
#[derive(Clone, Debug)]
pub struct PreparedPiece {
    pub path: LiftedPath,
    pub orientation: i8,
}

/// Lifts every piece of `region` through the stack extended by `f_M`.
pub fn prepare_region(
    region: &Region,
    stack: &StageStack,
    max_step_arg: f64,
    zero_tol: f64,
) -> Result<Vec<PreparedPiece>> {
    let m = stack.len();
    region
        .pieces
        .par_iter()
        .map(|piece| {
            let start = piece.path.start();
            let fm = stack.eval_f(m, &start.z);
            if !(fm.norm() >= zero_tol) {
                return Err(Error::ZeroOnRegion { at: start.z[0], modulus: fm.norm() });
            }
            let mut z = start.z.clone();
            z.push(fm.ln());
            let mut f = start.f.clone();
            f.push(fm);
            let step = match piece.path.base {
                BasePath::Arc { .. } => super::region::ARC_STEP,
                _ => f64::INFINITY,
            };
            let path = LiftedPath::lift(
                piece.path.base.clone(),
                piece.path.t0,
                piece.path.t1,
                stack,
                (z, f),
                max_step_arg,
                step,
            )?;
            for s in &path.samples {
                let modulus = s.f[m - 1].norm();
                if modulus < zero_tol {
                    return Err(Error::ZeroOnRegion { at: s.z[0], modulus });
                }
            }
            Ok(PreparedPiece { path, orientation: piece.orientation })
        })
        .collect()
}

/// A transversal crossing of `arg f_M` with a level `c + 2 pi j` on a piece.
#[derive(Clone, Debug)]
pub struct Crossing {
    pub piece: usize,
    pub t: f64,
    /// Level index `j` in the piece's provisional argument branch.
    pub level: i64,
    /// Lifted point with the provisional last coordinate.
    pub z: Vec<Complex64>,
    pub f: Vec<Complex64>,
    /// `|d arg f / ds|` along the piece.
    pub slope: f64,
    /// Unit inward normal of the region at the crossing.
    pub inward: Complex64,
}

#[derive(Clone, Copy, Debug, Default)]
struct LevelStats {
    crossings: usize,
    min_slope: Option<f64>,
    min_corner: Option<f64>,
    min_extremum: Option<f64>,
}

fn opt_min(a: Option<f64>, b: f64) -> Option<f64> {
    Some(a.map_or(b, |x| x.min(b)))
}

fn level_distance(theta: f64, c: f64) -> f64 {
    let r = (theta - c).rem_euclid(TAU);
    r.min(TAU - r)
}

fn theta_at(stack: &StageStack, path: &LiftedPath, i: usize, t: f64) -> Result<(f64, Vec<Complex64>, Vec<Complex64>)> {
    let (z, f) = path.lift_from(stack, i, t)?;
    Ok((z.last().unwrap().im, z, f))
}

fn dtheta_dt(stack: &StageStack, path: &LiftedPath, z: &[Complex64], t: f64) -> (f64, Complex64) {
    let (zj, _) = stack.jets(z);
    let w = zj.last().unwrap().d;
    let (_, dz) = path.base.point(t);
    ((w * dz).im, dz)
}

/// Crossings of one piece with the levels `c + 2 pi j`, or `None` when a
/// transversality check fails.
fn piece_crossings(
    stack: &StageStack,
    index: usize,
    piece: &PreparedPiece,
    c: f64,
    tol: f64,
    stats: &mut LevelStats,
) -> Result<Option<Vec<Crossing>>> {
    let path = &piece.path;
    let ns = path.samples.len();
    let theta: Vec<f64> = path.samples.iter().map(|s| s.z.last().unwrap().im).collect();
    for &th in [theta[0], theta[ns - 1]].iter() {
        let d = level_distance(th, c);
        stats.min_corner = opt_min(stats.min_corner, d);
        if d < tol {
            return Ok(None);
        }
    }
    let dth: Vec<f64> = path
        .samples
        .iter()
        .map(|s| dtheta_dt(stack, path, &s.z, s.t).0)
        .collect();
    let mut out = Vec::new();
    for i in 0..ns - 1 {
        let (ta, tb) = (path.samples[i].t, path.samples[i + 1].t);
        let (tha, thb) = (theta[i], theta[i + 1]);
        // near-tangency: an extremum of theta inside the interval close to a level
        if dth[i] * dth[i + 1] < 0.0 {
            let (mut lo, mut hi) = (ta, tb);
            for _ in 0..BISECT_ITERS {
                let mid = 0.5 * (lo + hi);
                let (_, z, _) = theta_at(stack, path, i, mid)?;
                let d = dtheta_dt(stack, path, &z, mid).0;
                if (d > 0.0) == (dth[i] > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-15 * (1.0 + hi.abs()) {
                    break;
                }
            }
            let (th_e, _, _) = theta_at(stack, path, i, 0.5 * (lo + hi))?;
            let d = level_distance(th_e, c);
            stats.min_extremum = opt_min(stats.min_extremum, d);
            if d < tol {
                return Ok(None);
            }
        }
        let (lo_th, hi_th) = if tha < thb { (tha, thb) } else { (thb, tha) };
        let j_first = ((lo_th - c) / TAU).floor() as i64 + 1;
        let j_last = ((hi_th - c) / TAU).floor() as i64;
        for j in j_first..=j_last {
            let level = c + TAU * j as f64;
            let (mut lo, mut hi) = (ta, tb);
            let rising = thb > tha;
            for _ in 0..BISECT_ITERS {
                let mid = 0.5 * (lo + hi);
                let (th, _, _) = theta_at(stack, path, i, mid)?;
                if (th < level) == rising {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-16 * (1.0 + hi.abs()) {
                    break;
                }
            }
            let t = 0.5 * (lo + hi);
            let (_, z, f) = theta_at(stack, path, i, t)?;
            let (d, dz) = dtheta_dt(stack, path, &z, t);
            let slope = d.abs() / dz.norm();
            stats.min_slope = opt_min(stats.min_slope, slope);
            if slope < tol {
                return Ok(None);
            }
            let inward = im(1.0) * dz / dz.norm() * piece.orientation as f64;
            out.push(Crossing { piece: index, t, level: j, z, f, slope, inward });
        }
    }
    stats.crossings += out.len();
    Ok(Some(out))
}

fn region_crossings(
    stack: &StageStack,
    prepared: &[PreparedPiece],
    c: f64,
    tol: f64,
) -> Result<(Option<Vec<Crossing>>, LevelStats)> {
    let per: Vec<(Option<Vec<Crossing>>, LevelStats)> = prepared
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut st = LevelStats::default();
            let r = piece_crossings(stack, i, p, c, tol, &mut st)?;
            Ok((r, st))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut stats = LevelStats::default();
    let mut all = Some(Vec::new());
    for (r, st) in per {
        stats.crossings += st.crossings;
        if let Some(v) = st.min_slope {
            stats.min_slope = opt_min(stats.min_slope, v);
        }
        if let Some(v) = st.min_corner {
            stats.min_corner = opt_min(stats.min_corner, v);
        }
        if let Some(v) = st.min_extremum {
            stats.min_extremum = opt_min(stats.min_extremum, v);
        }
        match (r, all.as_mut()) {
            (Some(v), Some(acc)) => acc.extend(v),
            _ => all = None,
        }
    }
    Ok((all, stats))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutCertificate {
    pub c: f64,
    pub seed: u64,
    pub attempts: usize,
    pub tolerance: f64,
    pub crossings: usize,
    pub min_slope: Option<f64>,
    pub min_corner_distance: Option<f64>,
    pub min_extremum_distance: Option<f64>,
}

impl CutCertificate {
    /// Smallest of the recorded margins (infinite when nothing was constrained).
    pub fn margin(&self) -> f64 {
        [self.min_slope, self.min_corner_distance, self.min_extremum_distance]
            .iter()
            .flatten()
            .fold(f64::INFINITY, |a, &b| a.min(b))
    }

    pub fn passes(&self) -> bool {
        self.margin() >= self.tolerance
    }
}

/// Crossings of `arg f_M = c` on every piece of `prepared`, failing when the
/// transversality checks do not hold.
pub fn certify_level(
    stack: &StageStack,
    prepared: &[PreparedPiece],
    c: f64,
    tol: f64,
    stage: usize,
) -> Result<(Vec<Crossing>, CutCertificate)> {
    let (r, st) = region_crossings(stack, prepared, c, tol)?;
    let cert = CutCertificate {
        c,
        seed: 0,
        attempts: 1,
        tolerance: tol,
        crossings: st.crossings,
        min_slope: st.min_slope,
        min_corner_distance: st.min_corner,
        min_extremum_distance: st.min_extremum,
    };
    match r {
        Some(v) => Ok((v, cert)),
        None => Err(Error::NoAdmissibleCut { stage, attempts: 1 }),
    }
}

/// Crossings of `arg f_M = c` on every region jointly, with the combined
/// certificate; `None` when some region fails a transversality check.
fn evaluate_level(
    stack: &StageStack,
    regions: &[Vec<PreparedPiece>],
    c: f64,
    tol: f64,
) -> Result<(Option<Vec<Vec<Crossing>>>, CutCertificate)> {
    let mut all = Vec::with_capacity(regions.len());
    let mut stats = LevelStats::default();
    let mut ok = true;
    for prepared in regions {
        let (r, st) = region_crossings(stack, prepared, c, tol)?;
        stats.crossings += st.crossings;
        for (dst, src) in [
            (&mut stats.min_slope, st.min_slope),
            (&mut stats.min_corner, st.min_corner),
            (&mut stats.min_extremum, st.min_extremum),
        ] {
            if let Some(v) = src {
                *dst = opt_min(*dst, v);
            }
        }
        match r {
            Some(v) => all.push(v),
            None => {
                ok = false;
                break;
            }
        }
    }
    let cert = CutCertificate {
        c,
        seed: 0,
        attempts: 1,
        tolerance: tol,
        crossings: stats.crossings,
        min_slope: stats.min_slope,
        min_corner_distance: stats.min_corner,
        min_extremum_distance: stats.min_extremum,
    };
    Ok((ok.then_some(all), cert))
}

/// Certifies a given level `c` on every region jointly.
pub fn certify_level_all(
    stack: &StageStack,
    regions: &[Vec<PreparedPiece>],
    c: f64,
    tol: f64,
    stage: usize,
) -> Result<(CutCertificate, Vec<Vec<Crossing>>)> {
    match evaluate_level(stack, regions, c, tol)? {
        (Some(all), cert) => Ok((cert, all)),
        (None, _) => Err(Error::NoAdmissibleCut { stage, attempts: 1 }),
    }
}

/// Draws seeded candidates until one is admissible on every region simultaneously.
pub fn choose_cut_level(
    stack: &StageStack,
    regions: &[Vec<PreparedPiece>],
    seed: u64,
    tol: f64,
    stage: usize,
) -> Result<(f64, CutCertificate, Vec<Vec<Crossing>>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 1..=CUT_RETRIES {
        let c: f64 = rng.gen_range(-PI..PI);
        if let (Some(all), mut cert) = evaluate_level(stack, regions, c, tol)? {
            cert.seed = seed;
            cert.attempts = attempt;
            return Ok((c, cert, all));
        }
    }
    Err(Error::NoAdmissibleCut { stage, attempts: CUT_RETRIES })
}

/// Inequalities describing `X_{M-1}^k` near the boundary (all `>= 0` inside).
#[derive(Clone, Debug)]
pub struct RegionConstraints {
    pub holes: Vec<Disc>,
    /// `(c_n, m_n)` for the stages below the one being cut.
    pub windows: Vec<(f64, usize)>,
}

impl RegionConstraints {
    pub fn new(spec: &CheeseSpec, k: usize, windows: Vec<(f64, usize)>) -> Self {
        Self { holes: spec.holes[..k].to_vec(), windows }
    }

    /// Smallest constraint value, with window constraints scaled to `z1` units
    /// by the local rate `|d z_{n+1} / d z1|`.
    pub fn value(&self, z: &[Complex64], rates: &[Complex64]) -> f64 {
        let mut v = 1.0 - z[0].norm();
        for d in &self.holes {
            v = v.min(d.signed_distance(z[0]));
        }
        for (n, &(c, m)) in self.windows.iter().enumerate() {
            let y = z[n + 1].im;
            let r = rates[n].norm().max(1e-300);
            v = v.min((y - c) / r).min((c + TAU * m as f64 - y) / r);
        }
        v
    }
}

/// One component of the cut set, stored in the direction of `conj(f'/f)`.
#[derive(Clone, Debug)]
pub struct CutCurve {
    /// Lift to the region's stage (without the coordinate of the stage being cut).
    pub path: LiftedPath,
    pub start: usize,
    pub end: usize,
    pub length: f64,
}

impl CutCurve {
    /// Lift through the stack including the cut stage, starting on the principal branch.
    pub fn extended(&self, stack: &StageStack) -> Result<LiftedPath> {
        let m = stack.len();
        let s0 = self.path.start();
        let fm = stack.eval_f(m, &s0.z);
        let mut z = s0.z.clone();
        z.push(fm.ln());
        let mut f = s0.f.clone();
        f.push(fm);
        LiftedPath::lift(
            self.path.base.clone(),
            self.path.t0,
            self.path.t1,
            stack,
            (z, f),
            self.path.max_step_arg,
            f64::INFINITY,
        )
    }
}

/// `z1`-length of a Hermite curve.
pub fn curve_length(base: &BasePath, t0: f64, t1: f64) -> f64 {
    const X: [f64; 4] = [0.1834346424956498, 0.525532409916329, 0.7966664774136267, 0.9602898564975363];
    const W: [f64; 4] = [0.362683783378362, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763];
    let mut marks = vec![t0];
    marks.extend(base.breakpoints(t0, t1));
    marks.push(t1);
    let mut total = 0.0;
    for w in marks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let mut acc = 0.0;
        for (x, wt) in X.iter().zip(W.iter()) {
            acc += wt * (base.point(mid + half * x).1.norm() + base.point(mid - half * x).1.norm());
        }
        total += acc * half;
    }
    total
}

struct Tracer<'a> {
    stack: &'a StageStack,
    cons: &'a RegionConstraints,
    max_step_arg: f64,
}

struct Traced {
    nodes: Vec<(Complex64, Vec<Complex64>, Vec<Complex64>, Complex64)>,
    end: usize,
    sigma: f64,
}

impl Tracer<'_> {
    fn info(&self, z: &[Complex64]) -> (Complex64, Vec<Complex64>) {
        let (zj, _) = self.stack.jets(z);
        let m = self.stack.len();
        let rates: Vec<Complex64> = zj[1..=m].iter().map(|j| j.d).collect();
        (zj[m].d, rates)
    }

    fn membership(&self, z: &[Complex64]) -> f64 {
        let (_, rates) = self.info(z);
        self.cons.value(z, &rates)
    }

    fn correct(
        &self,
        from: &(Vec<Complex64>, Vec<Complex64>),
        guess: Complex64,
        level: f64,
    ) -> Option<(Vec<Complex64>, Vec<Complex64>)> {
        let m = self.stack.len();
        let mut q = guess;
        for _ in 0..16 {
            let (z, f) = self.stack.continue_point(&from.0, &from.1, q).ok()?;
            let phi = z[m].im - level;
            if phi.abs() < CORRECTOR_TOL {
                let turned = f.iter().zip(&from.1).any(|(a, b)| (a / b).arg().abs() > self.max_step_arg);
                return if turned { None } else { Some((z, f)) };
            }
            let (w, _) = self.info(&z);
            q -= im(phi) / w;
        }
        None
    }

    fn trace(&self, start: usize, crossings: &[Crossing], c: f64) -> Result<Traced> {
        let m = self.stack.len();
        let x = &crossings[start];
        let level = c + TAU * x.level as f64;
        let mut cur = (x.z.clone(), x.f.clone());
        let (w0, _) = self.info(&cur.0);
        let d0 = w0.conj() / w0.norm();
        let sigma = if (d0 * x.inward.conj()).re > 0.0 { 1.0 } else { -1.0 };
        let mut nodes = vec![(cur.0[0], cur.0[..m].to_vec(), cur.1[..m - 1].to_vec(), d0 * sigma)];
        let mut first = true;
        for _ in 0..MAX_TRACE_STEPS {
            let (w, rates) = self.info(&cur.0);
            let dir = w.conj() / w.norm() * sigma;
            let rate = rates.iter().map(|r| r.norm()).fold(0.0, f64::max);
            let dist = self.cons.value(&cur.0, &rates).max(0.0);
            let mut h = TRACE_MAX_STEP.min(0.8 * self.max_step_arg / rate).min((0.5 * dist).max(TRACE_MIN_STEP));
            loop {
                if h < 1e-12 {
                    return Err(Error::TracingDivergence { at: cur.0[0], reason: "step collapsed".into() });
                }
                let guess = cur.0[0] + dir * h;
                let q = match self.correct(&cur, guess, level) {
                    Some(q) => q,
                    None => {
                        h *= 0.5;
                        continue;
                    }
                };
                if (q.0[0] - guess).norm() > 0.25 * h {
                    h *= 0.5;
                    continue;
                }
                let (wq, _) = self.info(&q.0);
                if (wq.conj() / w.conj()).arg().abs() > 0.2 {
                    h *= 0.5;
                    continue;
                }
                if self.membership(&q.0) >= 0.0 {
                    let tangent = wq.conj() / wq.norm() * sigma;
                    nodes.push((q.0[0], q.0[..m].to_vec(), q.1[..m - 1].to_vec(), tangent));
                    cur = q;
                    first = false;
                    break;
                }
                if first {
                    h *= 0.25;
                    continue;
                }
                // left the region: bisect onto the boundary
                let (mut lo, mut hi) = (0.0, 1.0);
                let mut inside = cur.clone();
                for _ in 0..BISECT_ITERS {
                    let mid = 0.5 * (lo + hi);
                    match self.correct(&cur, cur.0[0] + dir * (h * mid), level) {
                        Some(p) if self.membership(&p.0) >= 0.0 => {
                            lo = mid;
                            inside = p;
                        }
                        Some(_) => hi = mid,
                        None => hi = mid,
                    }
                    if (hi - lo) * h < 1e-15 {
                        break;
                    }
                }
                let end = self.match_exit(&inside.0, crossings, start)?;
                let y = &crossings[end];
                let (wy, _) = self.info(&y.z);
                nodes.push((y.z[0], y.z[..m].to_vec(), y.f[..m - 1].to_vec(), wy.conj() / wy.norm() * sigma));
                return Ok(Traced { nodes, end, sigma });
            }
        }
        Err(Error::TracingDivergence { at: cur.0[0], reason: "step budget exhausted".into() })
    }

    fn match_exit(&self, z: &[Complex64], crossings: &[Crossing], start: usize) -> Result<usize> {
        let m = self.stack.len();
        let mut best: Option<(usize, f64)> = None;
        for (i, x) in crossings.iter().enumerate() {
            if i == start {
                continue;
            }
            let d = (0..m).map(|n| (x.z[n] - z[n]).norm()).fold(0.0, f64::max);
            if d < MATCH_TOL && best.is_none_or(|(_, b)| d < b) {
                best = Some((i, d));
            }
        }
        best.map(|(i, _)| i).ok_or_else(|| Error::TracingDivergence {
            at: z[0],
            reason: "exit point matches no boundary crossing".into(),
        })
    }
}

fn build_curve(traced: Traced, start: usize, max_step_arg: f64) -> CutCurve {
    let mut nodes = traced.nodes;
    let (first, last) = if traced.sigma > 0.0 { (start, traced.end) } else { (traced.end, start) };
    if traced.sigma < 0.0 {
        nodes.reverse();
        for n in &mut nodes {
            n.3 = -n.3;
        }
    }
    let mut s = 0.0;
    let mut curve_nodes = Vec::with_capacity(nodes.len());
    let mut samples = Vec::with_capacity(nodes.len());
    for (i, (z1, z, f, tangent)) in nodes.into_iter().enumerate() {
        if i > 0 {
            s += (z1 - curve_nodes.last().map(|n: &CurveNode| n.z).unwrap()).norm();
        }
        curve_nodes.push(CurveNode { s, z: z1, tangent });
        samples.push(PathSample { t: s, z, f });
    }
    let base = BasePath::Curve { nodes: curve_nodes };
    let length = curve_length(&base, 0.0, s);
    CutCurve {
        path: LiftedPath { base, t0: 0.0, t1: s, samples, max_step_arg },
        start: first,
        end: last,
        length,
    }
}

/// The prepared region, crossings and traced cut curves for one `(stage, k)`.
#[derive(Clone, Debug)]
pub struct CutSet {
    pub c: f64,
    pub prepared: Vec<PreparedPiece>,
    pub crossings: Vec<Crossing>,
    pub curves: Vec<CutCurve>,
}

impl CutSet {
    /// Total `z1`-length of the cut curves.
    pub fn length(&self) -> f64 {
        self.curves.iter().map(|c| c.length).fold(0.0, |a, b| a + b)
    }
}

/// Traces every component of `{arg f_M = c}` inside the region, pairing the
/// boundary crossings. Each component is traced from both ends and the two
/// traces must agree on the pairing.
pub fn trace_cut_curves(
    stack: &StageStack,
    prepared: Vec<PreparedPiece>,
    crossings: Vec<Crossing>,
    c: f64,
    cons: &RegionConstraints,
    max_step_arg: f64,
) -> Result<CutSet> {
    let tracer = Tracer { stack, cons, max_step_arg };
    let traced: Vec<Traced> = (0..crossings.len())
        .into_par_iter()
        .map(|i| tracer.trace(i, &crossings, c))
        .collect::<Result<Vec<_>>>()?;
    for (i, t) in traced.iter().enumerate() {
        if traced[t.end].end != i {
            return Err(Error::TracingDivergence {
                at: crossings[i].z[0],
                reason: format!("crossing {i} pairs with {} but not conversely", t.end),
            });
        }
    }
    let mut curves = Vec::new();
    for (i, t) in traced.into_iter().enumerate() {
        if i < t.end {
            curves.push(build_curve(t, i, max_step_arg));
        }
    }
    Ok(CutSet { c, prepared, crossings, curves })
}

/// Least `m >= 1` with `m * prev_delta - cut_cost >= target_delta`.
pub fn choose_sheet_count(prev_norm: f64, prev_delta: f64, cut_cost: f64, target_delta: f64) -> usize {
    assert!(prev_delta > 0.0 && cut_cost >= 0.0 && target_delta > 0.0);
    let _ = prev_norm;
    let mut m = ((cut_cost + target_delta) / prev_delta).ceil().max(1.0) as usize;
    while (m as f64) * prev_delta - cut_cost < target_delta {
        m += 1;
    }
    while m > 1 && ((m - 1) as f64) * prev_delta - cut_cost >= target_delta {
        m -= 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sheet_count_examples() {
        assert_eq!(choose_sheet_count(0.0, 0.5, 10.0, 1.0), 22);
        assert_eq!(choose_sheet_count(0.0, PI, 0.0, 1.0), 1);
        assert_eq!(choose_sheet_count(0.0, 4.0 * PI - 3.0 * PI, 0.0, 1.0), 1);
    }

    #[test]
    fn level_distance_wraps() {
        assert!((level_distance(0.1, TAU) - 0.1).abs() < 1e-15);
        assert!((level_distance(-0.1, 0.0) - 0.1).abs() < 1e-15);
    }
}
