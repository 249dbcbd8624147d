//! Base paths in the `z1`-plane and their lifts to a finite tower.
//!
//! Lifted coordinates are obtained by analytic continuation of the defining
//! relations along the path, never by evaluating a principal branch at an
//! isolated point: each new sample is continued from its predecessor, and the
//! step is refined until every stage function turns by at most `max_step_arg`.

use super::TowerKind;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::poly::RationalFunction;
use num_complex::Complex64;

const MIN_STEP: f64 = 1e-13;
/// Moduli below this are treated as zeros of a stage function.
pub const SINGULAR_MODULUS: f64 = 1e-12;

/// The stage functions `f_1..f_M` of a tower, with their defining relation.
#[derive(Clone, Debug)]
pub struct StageStack {
    pub kind: TowerKind,
    pub fs: Vec<RationalFunction>,
}

impl StageStack {
    pub fn new(kind: TowerKind, fs: Vec<RationalFunction>) -> Self {
        Self { kind, fs }
    }

    pub fn len(&self) -> usize {
        self.fs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fs.is_empty()
    }

    /// The first `m` stages.
    pub fn truncated(&self, m: usize) -> StageStack {
        StageStack::new(self.kind, self.fs[..m].to_vec())
    }

    pub fn pushed(&self, f: RationalFunction) -> StageStack {
        let mut fs = self.fs.clone();
        fs.push(f);
        StageStack::new(self.kind, fs)
    }

    /// `f_n` (1-based) at coordinates `z` (at least `n` entries).
    pub fn eval_f(&self, n: usize, z: &[Complex64]) -> Complex64 {
        let f = &self.fs[n - 1];
        f.eval(&z[..f.arity])
    }

    fn solve(&self, f: Complex64, prev_z: Complex64, prev_f: Complex64) -> Complex64 {
        match self.kind {
            TowerKind::Exponential => {
                Complex64::new(f.norm().ln(), prev_z.im + (f / prev_f).arg())
            }
            TowerKind::SquareRoot => {
                let r = f.sqrt();
                if (r - prev_z).norm_sqr() <= (r + prev_z).norm_sqr() {
                    r
                } else {
                    -r
                }
            }
        }
    }

    /// Continues a lifted point `(prev_z, prev_f)` to base point `z1`.
    pub fn continue_point(
        &self,
        prev_z: &[Complex64],
        prev_f: &[Complex64],
        z1: Complex64,
    ) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let mut z = Vec::with_capacity(self.len() + 1);
        let mut fv = Vec::with_capacity(self.len());
        z.push(z1);
        for n in 1..=self.len() {
            let f = self.eval_f(n, &z);
            if !(f.norm() > SINGULAR_MODULUS) || !f.is_finite() {
                return Err(Error::SingularityProximity { at: z1, distance: f.norm() });
            }
            z.push(self.solve(f, prev_z[n], prev_f[n - 1]));
            fv.push(f);
        }
        Ok((z, fv))
    }

    /// Lifts `z1` choosing, at every stage, the principal logarithm (exp) or the
    /// principal square root, shifted by `2 pi i offsets[n]` (exp) or negated when
    /// `offsets[n]` is odd (sqrt).
    pub fn seed_point(&self, z1: Complex64, offsets: &[i64]) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let mut z = vec![z1];
        let mut fv = Vec::new();
        for n in 1..=self.len() {
            let f = self.eval_f(n, &z);
            if !(f.norm() > SINGULAR_MODULUS) || !f.is_finite() {
                return Err(Error::ZeroOfF { stage: n, at: z1 });
            }
            let off = offsets.get(n - 1).copied().unwrap_or(0);
            let v = match self.kind {
                TowerKind::Exponential => f.ln() + Complex64::new(0.0, std::f64::consts::TAU * off as f64),
                TowerKind::SquareRoot => {
                    if off.rem_euclid(2) == 0 {
                        f.sqrt()
                    } else {
                        -f.sqrt()
                    }
                }
            };
            z.push(v);
            fv.push(f);
        }
        Ok((z, fv))
    }

    /// Coordinate jets `(z_1, ..., z_{M+1})` and stage jets `f_1..f_M` with
    /// respect to `z1` at a lifted point.
    pub fn jets(&self, z: &[Complex64]) -> (Vec<Jet>, Vec<Jet>) {
        let mut zj = Vec::with_capacity(self.len() + 1);
        let mut fj = Vec::with_capacity(self.len());
        zj.push(Jet::variable(z[0]));
        for n in 1..=self.len() {
            let f = &self.fs[n - 1];
            let fv = f.eval_jet(&zj[..f.arity]);
            let d = match self.kind {
                TowerKind::Exponential => fv.d / fv.v,
                TowerKind::SquareRoot => fv.d / (z[n] * 2.0),
            };
            zj.push(Jet::new(z[n], d));
            fj.push(fv);
        }
        (zj, fj)
    }

    /// Residuals of the defining equations at a lifted point.
    pub fn residuals(&self, z: &[Complex64]) -> Vec<f64> {
        (1..=self.len())
            .map(|n| {
                let f = self.eval_f(n, z);
                match self.kind {
                    TowerKind::Exponential => (z[n].exp() - f).norm(),
                    TowerKind::SquareRoot => (z[n] * z[n] - f).norm(),
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveNode {
    pub s: f64,
    pub z: Complex64,
    /// `dz/ds` at the node.
    pub tangent: Complex64,
}

/// A path in the `z1`-plane parameterized by `t`.
#[derive(Clone, Debug, PartialEq)]
pub enum BasePath {
    /// `z1 = center + radius e^{it}`.
    Arc { center: Complex64, radius: f64 },
    /// Piecewise cubic Hermite interpolant through the nodes, `t = s`.
    Curve { nodes: Vec<CurveNode> },
    /// `z1 = a + t (b - a)`.
    Segment { a: Complex64, b: Complex64 },
}

impl BasePath {
    /// Position and velocity at `t`.
    pub fn point(&self, t: f64) -> (Complex64, Complex64) {
        match self {
            BasePath::Arc { center, radius } => {
                let e = Complex64::from_polar(*radius, t);
                (center + e, Complex64::new(0.0, 1.0) * e)
            }
            BasePath::Segment { a, b } => (a + (b - a) * t, b - a),
            BasePath::Curve { nodes } => hermite(nodes, t),
        }
    }

    /// Natural parameter breakpoints strictly inside `(t0, t1)`.
    pub fn breakpoints(&self, t0: f64, t1: f64) -> Vec<f64> {
        match self {
            BasePath::Curve { nodes } => nodes.iter().map(|n| n.s).filter(|&s| s > t0 && s < t1).collect(),
            _ => Vec::new(),
        }
    }
}

fn hermite(nodes: &[CurveNode], t: f64) -> (Complex64, Complex64) {
    let n = nodes.len();
    let i = match nodes.binary_search_by(|nd| nd.s.partial_cmp(&t).unwrap()) {
        Ok(i) => i.min(n - 2),
        Err(i) => i.saturating_sub(1).min(n - 2),
    };
    let (a, b) = (&nodes[i], &nodes[i + 1]);
    let h = b.s - a.s;
    let u = (t - a.s) / h;
    let (u2, u3) = (u * u, u * u * u);
    let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    let h10 = u3 - 2.0 * u2 + u;
    let h01 = -2.0 * u3 + 3.0 * u2;
    let h11 = u3 - u2;
    let z = a.z * h00 + a.tangent * (h * h10) + b.z * h01 + b.tangent * (h * h11);
    let d00 = 6.0 * u2 - 6.0 * u;
    let d10 = 3.0 * u2 - 4.0 * u + 1.0;
    let d01 = -d00;
    let d11 = 3.0 * u2 - 2.0 * u;
    let dz = (a.z * d00 + b.z * d01) / h + a.tangent * d10 + b.tangent * d11;
    (z, dz)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathSample {
    pub t: f64,
    pub z: Vec<Complex64>,
    pub f: Vec<Complex64>,
}

/// A base path on `[t0, t1]` with lifted samples satisfying the step bound.
#[derive(Clone, Debug)]
pub struct LiftedPath {
    pub base: BasePath,
    pub t0: f64,
    pub t1: f64,
    pub samples: Vec<PathSample>,
    pub max_step_arg: f64,
}

impl LiftedPath {
    /// Lifts `base` over `[t0, t1]` starting from the lifted point `seed` at `t0`.
    pub fn lift(
        base: BasePath,
        t0: f64,
        t1: f64,
        stack: &StageStack,
        seed: (Vec<Complex64>, Vec<Complex64>),
        max_step_arg: f64,
        initial_step: f64,
    ) -> Result<LiftedPath> {
        let mut marks = vec![t0];
        marks.extend(base.breakpoints(t0, t1));
        marks.push(t1);
        let mut samples = vec![PathSample { t: t0, z: seed.0, f: seed.1 }];
        for w in marks.windows(2) {
            let (mut t, end) = (w[0], w[1]);
            while t < end {
                let last = samples.last().unwrap();
                let (_, dz) = base.point(t);
                // derivative-based bound on the turn of every stage function
                let speed = dz.norm();
                let mut h = (end - t).min(initial_step);
                if !stack.is_empty() {
                    let (_, fj) = stack.jets(&last.z);
                    let rate = fj
                        .iter()
                        .map(|j| (j.d / j.v).norm() * speed)
                        .fold(0.0, f64::max);
                    if rate > 0.0 {
                        h = h.min(0.8 * max_step_arg / rate);
                    }
                }
                loop {
                    if h < MIN_STEP {
                        return Err(Error::StepCollapse { at: base.point(t).0 });
                    }
                    let tn = if end - t <= h * (1.0 + 1e-12) { end } else { t + h };
                    let (zn, _) = base.point(tn);
                    match stack.continue_point(&last.z, &last.f, zn) {
                        Ok((z, f)) => {
                            let ok = f
                                .iter()
                                .zip(&last.f)
                                .all(|(a, b)| (a / b).arg().abs() <= max_step_arg);
                            if ok {
                                samples.push(PathSample { t: tn, z, f });
                                t = tn;
                                break;
                            }
                            h *= 0.5;
                        }
                        Err(e @ Error::SingularityProximity { .. }) => {
                            if h < 1e-9 {
                                return Err(e);
                            }
                            h *= 0.5;
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
        }
        Ok(LiftedPath { base, t0, t1, samples, max_step_arg })
    }

    pub fn stage(&self) -> usize {
        self.samples[0].f.len()
    }

    pub fn start(&self) -> &PathSample {
        &self.samples[0]
    }

    pub fn end(&self) -> &PathSample {
        self.samples.last().unwrap()
    }

    /// Index of the last sample with `t_i <= t`.
    pub fn sample_index(&self, t: f64) -> usize {
        match self.samples.binary_search_by(|s| s.t.partial_cmp(&t).unwrap()) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        }
    }

    /// Lifted point at `t` continued from sample `i`.
    pub fn lift_from(&self, stack: &StageStack, i: usize, t: f64) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let s = &self.samples[i];
        if s.t == t {
            return Ok((s.z.clone(), s.f.clone()));
        }
        let (z1, _) = self.base.point(t);
        stack.continue_point(&s.z, &s.f, z1)
    }

    pub fn lift_at(&self, stack: &StageStack, t: f64) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        self.lift_from(stack, self.sample_index(t), t)
    }

    /// Restriction to `[ta, tb]`.
    pub fn sub_path(&self, stack: &StageStack, ta: f64, tb: f64) -> Result<LiftedPath> {
        let (za, fa) = self.lift_at(stack, ta)?;
        let (zb, fb) = self.lift_at(stack, tb)?;
        let mut samples = vec![PathSample { t: ta, z: za, f: fa }];
        samples.extend(self.samples.iter().filter(|s| s.t > ta && s.t < tb).cloned());
        samples.push(PathSample { t: tb, z: zb, f: fb });
        Ok(LiftedPath { base: self.base.clone(), t0: ta, t1: tb, samples, max_step_arg: self.max_step_arg })
    }

    /// Continuous argument of `g` along the samples, starting at its principal value.
    pub fn unwrapped_arg(&self, values: &[Complex64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(values.len());
        let mut acc = values[0].arg();
        out.push(acc);
        for w in values.windows(2) {
            acc += (w[1] / w[0]).arg();
            out.push(acc);
        }
        out
    }

    /// Adds `shift` to the last coordinate of every sample.
    pub fn shift_last(&mut self, shift: Complex64) {
        for s in &mut self.samples {
            *s.z.last_mut().unwrap() += shift;
        }
    }

    /// Chord-length estimate of the `z1`-length.
    pub fn z1_length_estimate(&self) -> f64 {
        self.samples.windows(2).map(|w| (w[1].z[0] - w[0].z[0]).norm()).fold(0.0, |a, b| a + b)
    }

    pub fn to_csv(&self) -> String {
        let n = self.samples.first().map_or(1, |s| s.z.len());
        let mut s = String::from("t");
        for i in 1..=n {
            s.push_str(&format!(",z{i}_re,z{i}_im"));
        }
        s.push('\n');
        for p in &self.samples {
            s.push_str(&format!("{:?}", p.t));
            for z in &p.z {
                s.push_str(&format!(",{:?},{:?}", z.re, z.im));
            }
            s.push('\n');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;
    use std::f64::consts::{PI, TAU};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn identity_stack(kind: TowerKind) -> StageStack {
        StageStack::new(kind, vec![RationalFunction::polynomial(Polynomial::variable(1, 0))])
    }

    #[test]
    fn log_monodromy_around_unit_circle() {
        let stack = identity_stack(TowerKind::Exponential);
        let seed = stack.seed_point(c(1.0, 0.0), &[0]).unwrap();
        let base = BasePath::Arc { center: c(0.0, 0.0), radius: 1.0 };
        let p = LiftedPath::lift(base, 0.0, TAU, &stack, seed, 0.1, 0.05).unwrap();
        let gain = p.end().z[1] - p.start().z[1];
        assert!((gain - c(0.0, TAU)).norm() < 1e-12);
        for s in &p.samples {
            assert!(stack.residuals(&s.z)[0] < 1e-13);
        }
    }

    #[test]
    fn constant_stage_is_constant_along_path() {
        let stack = StageStack::new(
            TowerKind::Exponential,
            vec![RationalFunction::constant(1, c(2.0, 0.0))],
        );
        let seed = stack.seed_point(c(0.3, 0.0), &[0]).unwrap();
        let base = BasePath::Segment { a: c(0.3, 0.0), b: c(-0.2, 0.7) };
        let p = LiftedPath::lift(base, 0.0, 1.0, &stack, seed, 0.1, 0.05).unwrap();
        for s in &p.samples {
            assert!((s.z[1] - c(2f64.ln(), 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn sqrt_monodromy_flips_sign() {
        let stack = identity_stack(TowerKind::SquareRoot);
        let seed = stack.seed_point(c(0.5, 0.0), &[0]).unwrap();
        let base = BasePath::Arc { center: c(0.0, 0.0), radius: 0.5 };
        let p = LiftedPath::lift(base, 0.0, TAU, &stack, seed, 0.1, 0.05).unwrap();
        assert!((p.end().z[1] + p.start().z[1]).norm() < 1e-12);
    }

    #[test]
    fn hermite_reproduces_cubic_data() {
        let nodes: Vec<CurveNode> = (0..5)
            .map(|i| {
                let s = i as f64 * 0.25;
                CurveNode { s, z: c(s, s * s), tangent: c(1.0, 2.0 * s) }
            })
            .collect();
        let base = BasePath::Curve { nodes };
        let (z, dz) = base.point(0.6);
        assert!((z - c(0.6, 0.36)).norm() < 1e-14);
        assert!((dz - c(1.0, 1.2)).norm() < 1e-13);
    }

    #[test]
    fn sub_path_matches_parent() {
        let stack = identity_stack(TowerKind::Exponential);
        let seed = stack.seed_point(c(1.0, 0.0), &[0]).unwrap();
        let base = BasePath::Arc { center: c(0.0, 0.0), radius: 1.0 };
        let p = LiftedPath::lift(base, 0.0, 3.0 * PI, &stack, seed, 0.1, 0.05).unwrap();
        let q = p.sub_path(&stack, 2.5 * PI, 2.9 * PI).unwrap();
        assert!((q.start().z[1] - c(0.0, 2.5 * PI)).norm() < 1e-12);
        assert!((q.end().z[1] - c(0.0, 2.9 * PI)).norm() < 1e-12);
    }
}
