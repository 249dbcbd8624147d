//! Swiss-cheese sets `K = closed unit disc minus a union of open discs`.
//!
//! A [`CheeseSpec`] lists the removed discs in order; the truncation `X0^k`
//! removes only the first `k` of them. [`boundary_chain`] decomposes the
//! boundary of `X0^k` into maximal circular arcs, oriented so the chain is
//! the positively oriented boundary (outer circle counterclockwise, hole
//! circles clockwise).

use crate::error::{Error, Result};
use crate::io::{check_version, format_version};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Minimum gap between a point of one circle pair's intersection and any third circle.
pub const TRIPLE_SEPARATION: f64 = 1e-6;
/// Holes smaller than this are refused by the generator.
pub const MIN_RADIUS: f64 = 1e-6;
/// Ratio of successive radii in the generated sequence.
pub const RADIUS_DECAY: f64 = 0.85;
/// Fraction of the budget the generated radii sum to.
pub const BUDGET_FILL: f64 = 0.95;
pub const PLACEMENT_ATTEMPTS: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "DiscRepr", into = "DiscRepr")]
pub struct Disc {
    pub center: Complex64,
    pub radius: f64,
}

#[derive(Serialize, Deserialize)]
struct DiscRepr {
    re: f64,
    im: f64,
    radius: f64,
}

impl From<DiscRepr> for Disc {
    fn from(d: DiscRepr) -> Self {
        Disc { center: Complex64::new(d.re, d.im), radius: d.radius }
    }
}

impl From<Disc> for DiscRepr {
    fn from(d: Disc) -> Self {
        DiscRepr { re: d.center.re, im: d.center.im, radius: d.radius }
    }
}

impl Disc {
    pub fn new(center: Complex64, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn unit() -> Self {
        Self::new(Complex64::new(0.0, 0.0), 1.0)
    }

    /// Whether `z` lies in the open disc.
    pub fn contains_open(&self, z: Complex64) -> bool {
        (z - self.center).norm_sqr() < self.radius * self.radius
    }

    /// Signed distance from `z` to the circle, positive outside.
    pub fn signed_distance(&self, z: Complex64) -> f64 {
        (z - self.center).norm() - self.radius
    }

    pub fn point_at(&self, theta: f64) -> Complex64 {
        self.center + Complex64::from_polar(self.radius, theta)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheeseSpec {
    pub version: String,
    pub seed: u64,
    pub radius_budget: f64,
    pub min_crossing_angle: f64,
    pub holes: Vec<Disc>,
}

impl CheeseSpec {
    pub fn new(seed: u64, radius_budget: f64, min_crossing_angle: f64, holes: Vec<Disc>) -> Self {
        Self {
            version: format_version(),
            seed,
            radius_budget,
            min_crossing_angle,
            holes,
        }
    }

    /// Circle `0` is the unit circle, circle `k >= 1` bounds hole `k`.
    pub fn circle(&self, index: usize) -> Disc {
        if index == 0 {
            Disc::unit()
        } else {
            self.holes[index - 1]
        }
    }

    pub fn radius_sum(&self) -> f64 {
        self.holes.iter().map(|d| d.radius).fold(0.0, |a, b| a + b)
    }

    /// Membership in `X0^k`: closed unit disc minus the first `k` open holes.
    pub fn contains(&self, k: usize, z: Complex64) -> bool {
        z.norm_sqr() <= 1.0 && !self.holes[..k].iter().any(|d| d.contains_open(z))
    }

    /// Smallest signed clearance of `z` from the boundary constraints of `X0^k`
    /// (positive inside).
    pub fn clearance(&self, k: usize, z: Complex64) -> f64 {
        let mut c = 1.0 - z.norm();
        for d in &self.holes[..k] {
            c = c.min(d.signed_distance(z));
        }
        c
    }

    /// Lower bound `pi (1 - r^2)` on the area of the full cheese for budget `r`.
    pub fn area_lower_bound(&self) -> f64 {
        PI * (1.0 - self.radius_budget * self.radius_budget)
    }

    pub fn validate_version(&self) -> Result<()> {
        check_version(&self.version)
    }

    pub fn to_json(&self) -> Result<String> {
        crate::io::to_pretty_json(self)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: CheeseSpec = serde_json::from_str(s)?;
        spec.validate_version()?;
        Ok(spec)
    }
}

/// How a pair of circles sits relative to each other.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PairRelation {
    Disjoint,
    Crossing { angle: f64 },
    /// Within the separation tolerance of tangency.
    NearTangent,
}

pub fn pair_relation(a: &Disc, b: &Disc) -> PairRelation {
    let d = (a.center - b.center).norm();
    let (r1, r2) = (a.radius, b.radius);
    if d >= r1 + r2 + TRIPLE_SEPARATION || d <= (r1 - r2).abs() - TRIPLE_SEPARATION {
        return PairRelation::Disjoint;
    }
    if d <= (r1 - r2).abs() + TRIPLE_SEPARATION || d >= r1 + r2 - TRIPLE_SEPARATION {
        return PairRelation::NearTangent;
    }
    let cos_gamma = ((r1 * r1 + r2 * r2 - d * d) / (2.0 * r1 * r2)).clamp(-1.0, 1.0);
    let gamma = cos_gamma.acos();
    PairRelation::Crossing { angle: gamma.min(PI - gamma) }
}

/// Intersection points of two crossing circles.
pub fn circle_intersections(a: &Disc, b: &Disc) -> Vec<Complex64> {
    let delta = b.center - a.center;
    let d = delta.norm();
    if d == 0.0 || d > a.radius + b.radius || d < (a.radius - b.radius).abs() {
        return Vec::new();
    }
    let along = (d * d + a.radius * a.radius - b.radius * b.radius) / (2.0 * d);
    let h = (a.radius * a.radius - along * along).max(0.0).sqrt();
    let u = delta / d;
    let base = a.center + u * along;
    let perp = Complex64::new(-u.im, u.re) * h;
    vec![base + perp, base - perp]
}

/// Summary of the invariants of a spec.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrangementSummary {
    pub radius_sum: f64,
    pub min_crossing_angle: Option<f64>,
    pub min_triple_separation: Option<f64>,
    pub crossing_pairs: usize,
}

/// Checks transversality and triple-point separation among circles `0..=k`.
pub fn check_arrangement(spec: &CheeseSpec, k: usize) -> Result<ArrangementSummary> {
    let circles: Vec<Disc> = (0..=k).map(|i| spec.circle(i)).collect();
    let mut min_angle: Option<f64> = None;
    let mut min_sep: Option<f64> = None;
    let mut crossing_pairs = 0;
    for i in 0..circles.len() {
        for j in i + 1..circles.len() {
            match pair_relation(&circles[i], &circles[j]) {
                PairRelation::Disjoint => {}
                PairRelation::NearTangent => {
                    return Err(Error::DegenerateArrangement {
                        a: i,
                        b: j,
                        reason: "near tangency".into(),
                    })
                }
                PairRelation::Crossing { angle } => {
                    if angle < spec.min_crossing_angle {
                        return Err(Error::DegenerateArrangement {
                            a: i,
                            b: j,
                            reason: format!("crossing angle {angle:e} below minimum"),
                        });
                    }
                    crossing_pairs += 1;
                    min_angle = Some(min_angle.map_or(angle, |m: f64| m.min(angle)));
                    for p in circle_intersections(&circles[i], &circles[j]) {
                        for (l, c) in circles.iter().enumerate() {
                            if l == i || l == j {
                                continue;
                            }
                            let sep = c.signed_distance(p).abs();
                            if sep < TRIPLE_SEPARATION {
                                return Err(Error::DegenerateArrangement {
                                    a: i,
                                    b: j,
                                    reason: format!("triple point with circle {l}"),
                                });
                            }
                            min_sep = Some(min_sep.map_or(sep, |m: f64| m.min(sep)));
                        }
                    }
                }
            }
        }
    }
    Ok(ArrangementSummary {
        radius_sum: circles[1..].iter().map(|d| d.radius).fold(0.0, |a, b| a + b),
        min_crossing_angle: min_angle,
        min_triple_separation: min_sep,
        crossing_pairs,
    })
}

fn placement_ok(existing: &[Disc], points: &[Complex64], cand: &Disc, min_angle: f64) -> Option<Vec<Complex64>> {
    let mut new_points = Vec::new();
    for c in existing {
        match pair_relation(c, cand) {
            PairRelation::Disjoint => {}
            PairRelation::NearTangent => return None,
            PairRelation::Crossing { angle } => {
                if angle < min_angle {
                    return None;
                }
                new_points.extend(circle_intersections(c, cand));
            }
        }
    }
    if points.iter().any(|&p| cand.signed_distance(p).abs() < TRIPLE_SEPARATION) {
        return None;
    }
    for &p in &new_points {
        let on_pair = |c: &Disc| c.signed_distance(p).abs() < 1e-9;
        let others = existing.iter().filter(|c| !on_pair(c));
        for c in others {
            if c.signed_distance(p).abs() < TRIPLE_SEPARATION {
                return None;
            }
        }
    }
    Some(new_points)
}

/// Generated radii: geometric decay summing to `BUDGET_FILL * budget`.
pub fn generated_radii(radius_budget: f64, hole_count: usize) -> Vec<f64> {
    if hole_count == 0 {
        return Vec::new();
    }
    let q = RADIUS_DECAY;
    let norm = (1.0 - q) / (1.0 - q.powi(hole_count as i32));
    (0..hole_count)
        .map(|k| BUDGET_FILL * radius_budget * norm * q.powi(k as i32))
        .collect()
}

/// Draws a seeded cheese whose holes meet the closed unit disc, whose radii sum
/// below the budget, and whose circles cross transversally with no triple points.
pub fn generate_cheese(
    seed: u64,
    radius_budget: f64,
    hole_count: usize,
    min_crossing_angle: f64,
) -> Result<CheeseSpec> {
    if !(radius_budget > 0.0 && radius_budget < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "radius budget must lie in (0,1), got {radius_budget}"
        )));
    }
    if !(min_crossing_angle > 0.0) {
        return Err(Error::InvalidParameter("min crossing angle must be positive".into()));
    }
    let radii = generated_radii(radius_budget, hole_count);
    if let Some(pos) = radii.iter().position(|&r| r < MIN_RADIUS) {
        return Err(Error::BudgetExhausted {
            placed: pos,
            requested: hole_count,
            min_radius: MIN_RADIUS,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut circles = vec![Disc::unit()];
    let mut points: Vec<Complex64> = Vec::new();
    for (k, &r) in radii.iter().enumerate() {
        let mut placed = false;
        for _ in 0..PLACEMENT_ATTEMPTS {
            let center = loop {
                let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                if z.norm_sqr() < 1.0 {
                    break z;
                }
            };
            let cand = Disc::new(center, r);
            if let Some(new_points) = placement_ok(&circles, &points, &cand, min_crossing_angle) {
                circles.push(cand);
                points.extend(new_points);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::TransversalityUnachievable {
                hole: k + 1,
                attempts: PLACEMENT_ATTEMPTS,
            });
        }
    }
    Ok(CheeseSpec::new(seed, radius_budget, min_crossing_angle, circles[1..].to_vec()))
}

/// One maximal arc of the boundary of `X0^k`.
///
/// The arc covers angles `start_angle..=end_angle` (with `start_angle <
/// end_angle`, possibly exceeding `2 pi`); `orientation` is the traversal
/// direction in the oriented boundary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcSegment {
    pub circle_index: usize,
    pub start_angle: f64,
    pub end_angle: f64,
    pub orientation: i8,
}

impl ArcSegment {
    pub fn extent(&self) -> f64 {
        self.end_angle - self.start_angle
    }

    /// Traversal start and end points.
    pub fn endpoints(&self, spec: &CheeseSpec) -> (Complex64, Complex64) {
        let c = spec.circle(self.circle_index);
        let a = c.point_at(self.start_angle);
        let b = c.point_at(self.end_angle);
        if self.orientation > 0 {
            (a, b)
        } else {
            (b, a)
        }
    }

    pub fn is_full_circle(&self) -> bool {
        (self.extent() - TAU).abs() < 1e-15
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryChain {
    pub truncation_k: usize,
    pub arcs: Vec<ArcSegment>,
}

/// Angular set `{theta : circle(theta) in open disc}` relative to a circle.
enum Cover {
    Nothing,
    Everything,
    Interval { mid: f64, half: f64 },
}

fn cover_of(circle: &Disc, disc: &Disc) -> Cover {
    let delta = disc.center - circle.center;
    let d = delta.norm();
    let rho = circle.radius;
    if d < 1e-15 {
        return if rho < disc.radius { Cover::Everything } else { Cover::Nothing };
    }
    let kappa = (rho * rho + d * d - disc.radius * disc.radius) / (2.0 * rho * d);
    if kappa >= 1.0 {
        Cover::Nothing
    } else if kappa <= -1.0 {
        Cover::Everything
    } else {
        Cover::Interval { mid: delta.arg(), half: kappa.acos() }
    }
}

fn interval_pieces(mid: f64, half: f64) -> Vec<(f64, f64)> {
    let a = (mid - half).rem_euclid(TAU);
    let b = a + 2.0 * half;
    if b <= TAU {
        vec![(a, b)]
    } else {
        vec![(a, TAU), (0.0, b - TAU)]
    }
}

fn subtract(set: &[(f64, f64)], cut: (f64, f64)) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(a, b) in set {
        if cut.1 <= a || cut.0 >= b {
            out.push((a, b));
            continue;
        }
        if cut.0 > a {
            out.push((a, cut.0));
        }
        if cut.1 < b {
            out.push((cut.1, b));
        }
    }
    out
}

fn kept_intervals(spec: &CheeseSpec, index: usize, k: usize) -> Vec<(f64, f64)> {
    let circle = spec.circle(index);
    let mut kept = vec![(0.0, TAU)];
    if index > 0 {
        // restrict to the closed unit disc: remove the complement of the inside interval
        match cover_of(&circle, &Disc::unit()) {
            Cover::Everything => {}
            Cover::Nothing => return Vec::new(),
            Cover::Interval { mid, half } => {
                for piece in interval_pieces(mid + PI, PI - half) {
                    kept = subtract(&kept, piece);
                }
            }
        }
    }
    for j in 1..=k {
        if j == index {
            continue;
        }
        match cover_of(&circle, &spec.circle(j)) {
            Cover::Nothing => {}
            Cover::Everything => return Vec::new(),
            Cover::Interval { mid, half } => {
                for piece in interval_pieces(mid, half) {
                    kept = subtract(&kept, piece);
                }
            }
        }
        if kept.is_empty() {
            break;
        }
    }
    kept.retain(|&(a, b)| b - a > 1e-14);
    // merge the arc wrapping through angle zero
    if kept.len() >= 2 {
        let first = kept[0];
        let last = *kept.last().unwrap();
        if first.0 == 0.0 && last.1 == TAU {
            kept.pop();
            kept[0] = (last.0, TAU + first.1);
        }
    }
    kept
}

/// Oriented maximal-arc decomposition of the boundary of `X0^k`.
pub fn boundary_chain(spec: &CheeseSpec, k: usize) -> Result<BoundaryChain> {
    if k > spec.holes.len() {
        return Err(Error::InvalidParameter(format!(
            "truncation {k} exceeds hole count {}",
            spec.holes.len()
        )));
    }
    check_arrangement(spec, k)?;
    let mut arcs = Vec::new();
    for index in 0..=k {
        let orientation = if index == 0 { 1 } else { -1 };
        for (a, b) in kept_intervals(spec, index, k) {
            arcs.push(ArcSegment { circle_index: index, start_angle: a, end_angle: b, orientation });
        }
    }
    Ok(BoundaryChain { truncation_k: k, arcs })
}

impl BoundaryChain {
    /// Greedy endpoint matching: every traversal end meets a traversal start.
    pub fn is_closed(&self, spec: &CheeseSpec, tol: f64) -> bool {
        let mut starts: Vec<Complex64> = Vec::new();
        let mut ends: Vec<Complex64> = Vec::new();
        for arc in &self.arcs {
            if arc.is_full_circle() {
                continue;
            }
            let (s, e) = arc.endpoints(spec);
            starts.push(s);
            ends.push(e);
        }
        for e in ends {
            match starts.iter().position(|s| (s - e).norm() < tol) {
                Some(i) => {
                    starts.swap_remove(i);
                }
                None => return false,
            }
        }
        starts.is_empty()
    }

    /// Closed-form `sum over arcs of the oriented integral of conj(z) dz`.
    pub fn conj_integral(&self, spec: &CheeseSpec) -> Complex64 {
        self.arcs.iter().map(|a| arc_conj_integral(spec, a)).fold(Complex64::new(0.0, 0.0), |a, b| a + b)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("circle_index,start_angle,end_angle,orientation\n");
        for a in &self.arcs {
            s.push_str(&format!(
                "{},{:?},{:?},{}\n",
                a.circle_index, a.start_angle, a.end_angle, a.orientation
            ));
        }
        s
    }
}

/// Oriented `integral of conj(z) dz` over one arc, in closed form.
pub fn arc_conj_integral(spec: &CheeseSpec, arc: &ArcSegment) -> Complex64 {
    let c = spec.circle(arc.circle_index);
    let rho = c.radius;
    let (a, b) = (arc.start_angle, arc.end_angle);
    let v = c.center.conj() * rho * (Complex64::from_polar(1.0, b) - Complex64::from_polar(1.0, a))
        + Complex64::new(0.0, rho * rho * (b - a));
    v * arc.orientation as f64
}

/// Total length of the chain, `sum of radius * angular extent`.
pub fn chain_length(spec: &CheeseSpec, chain: &BoundaryChain) -> f64 {
    chain
        .arcs
        .iter()
        .map(|a| spec.circle(a.circle_index).radius * a.extent())
        .fold(0.0, |a, b| a + b)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AreaMethod {
    BoundaryIntegral,
    MonteCarlo { samples: u64 },
}

pub const MC_BLOCK: u64 = 1 << 16;

/// Area of `X0^k` with an error estimate.
///
/// The boundary route evaluates `(1/2) |Im sum of conj(z) dz|` over the chain in
/// closed form; the Monte Carlo route counts hits in `[-1,1]^2` with per-block
/// streams derived from the spec seed, so the result does not depend on the
/// thread count.
pub fn area(spec: &CheeseSpec, k: usize, method: AreaMethod) -> Result<(f64, f64)> {
    let chain = boundary_chain(spec, k)?;
    match method {
        AreaMethod::BoundaryIntegral => {
            let v = chain.conj_integral(spec);
            let scale: f64 = chain
                .arcs
                .iter()
                .map(|a| spec.circle(a.circle_index).radius * (1.0 + a.extent()))
                .sum();
            Ok((0.5 * v.im.abs(), 1e-15 * scale * chain.arcs.len().max(1) as f64))
        }
        AreaMethod::MonteCarlo { samples } => {
            if samples == 0 {
                return Err(Error::InvalidParameter("Monte Carlo needs samples".into()));
            }
            let holes = &spec.holes[..k];
            let blocks = samples.div_ceil(MC_BLOCK);
            let hits: u64 = (0..blocks)
                .into_par_iter()
                .map(|b| {
                    let n = MC_BLOCK.min(samples - b * MC_BLOCK);
                    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                    rng.set_stream(b + 1);
                    let mut h = 0u64;
                    for _ in 0..n {
                        let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                        if z.norm_sqr() <= 1.0 && !holes.iter().any(|d| d.contains_open(z)) {
                            h += 1;
                        }
                    }
                    h
                })
                .collect::<Vec<_>>()
                .into_iter()
                .sum();
            let p = hits as f64 / samples as f64;
            let sigma = 4.0 * (p * (1.0 - p) / samples as f64).sqrt();
            Ok((4.0 * p, sigma))
        }
    }
}

/// SVG rendering of the cheese with optional polyline overlays (in the z1-plane).
pub fn render_svg(spec: &CheeseSpec, overlays: &[Vec<Complex64>]) -> String {
    let mut s = String::new();
    s.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-1.2 -1.2 2.4 2.4\" width=\"600\" height=\"600\">\n",
    );
    s.push_str("<g transform=\"scale(1,-1)\">\n");
    s.push_str("<circle cx=\"0\" cy=\"0\" r=\"1\" fill=\"#f2e6b8\" stroke=\"black\" stroke-width=\"0.004\"/>\n");
    for d in &spec.holes {
        s.push_str(&format!(
            "<circle cx=\"{:.6}\" cy=\"{:.6}\" r=\"{:.6}\" fill=\"white\" stroke=\"black\" stroke-width=\"0.003\"/>\n",
            d.center.re, d.center.im, d.radius
        ));
    }
    for line in overlays {
        if line.len() < 2 {
            continue;
        }
        let pts: Vec<String> = line.iter().map(|z| format!("{:.5},{:.5}", z.re, z.im)).collect();
        s.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"0.004\"/>\n",
            pts.join(" ")
        ));
    }
    s.push_str("</g>\n</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn empty_cheese_is_full_disc() {
        let spec = generate_cheese(1, 0.5, 0, 0.01).unwrap();
        assert!(spec.holes.is_empty());
        let chain = boundary_chain(&spec, 0).unwrap();
        assert_eq!(chain.arcs.len(), 1);
        assert_eq!(chain.arcs[0].orientation, 1);
        assert!(chain.arcs[0].is_full_circle());
        assert!((chain_length(&spec, &chain) - TAU).abs() < 1e-15);
        let (a, _) = area(&spec, 0, AreaMethod::BoundaryIntegral).unwrap();
        assert!((a - PI).abs() < 1e-14);
    }

    #[test]
    fn interior_hole_gives_two_full_arcs() {
        let spec = CheeseSpec::new(0, 0.5, 0.01, vec![Disc::new(c(0.5, 0.0), 0.2)]);
        let chain = boundary_chain(&spec, 1).unwrap();
        assert_eq!(chain.arcs.len(), 2);
        assert_eq!(chain.arcs[1].circle_index, 1);
        assert_eq!(chain.arcs[1].orientation, -1);
        assert!(chain.arcs.iter().all(|a| a.is_full_circle()));
        assert!((chain_length(&spec, &chain) - TAU * 1.2).abs() < 1e-14);
    }

    #[test]
    fn quarter_radius_hole_area() {
        let spec = CheeseSpec::new(0, 0.5, 0.01, vec![Disc::new(c(0.1, -0.2), 0.25)]);
        let (a, _) = area(&spec, 1, AreaMethod::BoundaryIntegral).unwrap();
        assert!((a - PI * (1.0 - 0.0625)).abs() < 1e-13);
        assert!((a - 2.945243).abs() < 1e-6);
    }

    #[test]
    fn hole_crossing_unit_circle_is_clipped() {
        let spec = CheeseSpec::new(0, 0.5, 0.01, vec![Disc::new(c(0.95, 0.0), 0.2)]);
        let chain = boundary_chain(&spec, 1).unwrap();
        assert_eq!(chain.arcs.len(), 2);
        assert!(chain.is_closed(&spec, 1e-10));
        assert!(chain.conj_integral(&spec).re.abs() < 1e-12);
        // hole arc points sit inside the unit disc
        let hole_arc = chain.arcs.iter().find(|a| a.circle_index == 1).unwrap();
        let mid = spec.circle(1).point_at(0.5 * (hole_arc.start_angle + hole_arc.end_angle));
        assert!(mid.norm() < 1.0);
    }

    #[test]
    fn degenerate_pair_is_reported() {
        // internally tangent to the unit circle
        let spec = CheeseSpec::new(0, 0.5, 0.01, vec![Disc::new(c(0.8, 0.0), 0.2)]);
        assert!(matches!(
            boundary_chain(&spec, 1),
            Err(Error::DegenerateArrangement { .. })
        ));
        // shallow crossing below the minimum angle
        let spec = CheeseSpec::new(0, 0.5, 0.5, vec![Disc::new(c(0.81, 0.0), 0.2)]);
        assert!(matches!(
            boundary_chain(&spec, 1),
            Err(Error::DegenerateArrangement { .. })
        ));
    }

    #[test]
    fn budget_out_of_range_is_rejected() {
        assert!(matches!(generate_cheese(1, 1.5, 3, 0.01), Err(Error::InvalidParameter(_))));
        assert!(matches!(generate_cheese(1, 0.0, 3, 0.01), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn too_many_holes_exhaust_the_budget() {
        assert!(matches!(
            generate_cheese(1, 0.5, 200, 0.01),
            Err(Error::BudgetExhausted { .. })
        ));
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_cheese(42, 0.5, 20, 0.01).unwrap();
        let b = generate_cheese(42, 0.5, 20, 0.01).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let c = generate_cheese(43, 0.5, 20, 0.01).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn spec_json_round_trip_and_version_gate() {
        let spec = generate_cheese(7, 0.4, 5, 0.02).unwrap();
        let back = CheeseSpec::from_json(&spec.to_json().unwrap()).unwrap();
        assert_eq!(spec, back);
        let bumped = spec.to_json().unwrap().replace("\"1.0\"", "\"2.0\"");
        assert!(matches!(CheeseSpec::from_json(&bumped), Err(Error::UnsupportedVersion { .. })));
    }

    #[test]
    fn csv_and_svg_exports() {
        let spec = generate_cheese(5, 0.5, 5, 0.01).unwrap();
        let chain = boundary_chain(&spec, 5).unwrap();
        let csv = chain.to_csv();
        assert_eq!(csv.lines().count(), chain.arcs.len() + 1);
        let svg = render_svg(&spec, &[]);
        assert_eq!(svg.matches("<circle").count(), 6);
    }
}
