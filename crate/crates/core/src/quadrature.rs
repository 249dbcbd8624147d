//! Integration of `g dz1` over boundary chains and lifted boundaries, and the
//! boundary measures `mu_N^k` with their `E_I` / `E_J` split.
//!
//! Each lifted piece is integrated interval by interval between consecutive
//! lift samples with an adaptive Gauss-Kronrod (7, 15) rule; lifted integrands
//! are evaluated at the nodes by continuation from the left sample. Piece
//! results are reduced in piece order with pairwise summation, so values do
//! not depend on the thread count.

use crate::cheese::{boundary_chain, chain_length, BoundaryChain, CheeseSpec};
use crate::error::{Error, Result};
use crate::poly::RationalFunction;
use crate::tower::path::{BasePath, LiftedPath, StageStack};
use crate::tower::region::{PieceOrigin, Region};
use crate::tower::{ExpTower, TowerSpec};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
/// Denominator moduli below this count as a pole on the contour.
pub const POLE_TOLERANCE: f64 = 1e-8;
const MAX_DEPTH: usize = 30;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Clone, Debug, PartialEq)]
pub enum Integrand {
    Rational(RationalFunction),
    ConjugateZ1,
    One,
}

impl Integrand {
    /// Number of leading coordinates the integrand reads.
    pub fn arity(&self) -> usize {
        match self {
            Integrand::Rational(g) => g.support_arity().max(1),
            _ => 1,
        }
    }

    fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        match self {
            Integrand::One => Ok(Complex64::new(1.0, 0.0)),
            Integrand::ConjugateZ1 => Ok(z[0].conj()),
            Integrand::Rational(g) => {
                let (p, q) = g.eval_parts(z);
                if q.norm() < POLE_TOLERANCE {
                    return Err(Error::PoleProximity { at: z[0], distance: q.norm() });
                }
                Ok(p / q)
            }
        }
    }
}

/// `int g dz1` with an error estimate and the `z1`-length it covered.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub value: Complex64,
    pub variation: f64,
    pub error: f64,
    pub converged: bool,
}

impl Quadrature {
    fn add(self, o: Quadrature) -> Quadrature {
        Quadrature {
            value: self.value + o.value,
            variation: self.variation + o.variation,
            error: self.error + o.error,
            converged: self.converged && o.converged,
        }
    }

    fn scaled(self, s: f64) -> Quadrature {
        Quadrature { value: self.value * s, ..self }
    }
}

fn pairwise(items: &[Quadrature]) -> Quadrature {
    match items.len() {
        0 => Quadrature { converged: true, ..Default::default() },
        1 => items[0],
        n => pairwise(&items[..n / 2]).add(pairwise(&items[n / 2..])),
    }
}

struct Panel<'a> {
    path: &'a LiftedPath,
    stack: &'a StageStack,
    integrand: &'a Integrand,
    lifted: bool,
    tol: f64,
    sample: usize,
}

impl Panel<'_> {
    fn point(&self, t: f64) -> Result<(Complex64, Complex64)> {
        let (z1, dz) = self.path.base.point(t);
        let g = if self.lifted {
            let (z, _) = self.path.lift_from(self.stack, self.sample, t)?;
            self.integrand.eval(&z)?
        } else {
            self.integrand.eval(&[z1])?
        };
        Ok((g * dz, Complex64::new(dz.norm(), 0.0)))
    }

    fn rule(&self, a: f64, b: f64) -> Result<(Complex64, Complex64, f64, f64)> {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let (fc, vc) = self.point(mid)?;
        let mut k = fc * WGK[7];
        let mut g = fc * WG[3];
        let mut var = vc.re * WGK[7];
        let mut scale = fc.norm() * WGK[7];
        for j in 0..7 {
            let x = half * XGK[j];
            let (f1, v1) = self.point(mid - x)?;
            let (f2, v2) = self.point(mid + x)?;
            k += (f1 + f2) * WGK[j];
            var += (v1.re + v2.re) * WGK[j];
            scale += (f1.norm() + f2.norm()) * WGK[j];
            if j % 2 == 1 {
                g += (f1 + f2) * WG[j / 2];
            }
        }
        Ok((k * half, g * half, var * half, scale * half))
    }

    fn adapt(&self, a: f64, b: f64, depth: usize) -> Result<Quadrature> {
        let (k, g, var, scale) = self.rule(a, b)?;
        let err = (k - g).norm();
        if err <= self.tol * scale.max(1e-300) || err < 1e-17 {
            return Ok(Quadrature { value: k, variation: var, error: err, converged: true });
        }
        if depth >= MAX_DEPTH || b - a < 1e-14 * (1.0 + a.abs()) {
            return Ok(Quadrature { value: k, variation: var, error: err, converged: false });
        }
        let m = 0.5 * (a + b);
        Ok(self.adapt(a, m, depth + 1)?.add(self.adapt(m, b, depth + 1)?))
    }
}

/// `int g dz1` along a lifted path in the direction of increasing parameter.
pub fn integrate_path(path: &LiftedPath, stack: &StageStack, integrand: &Integrand, tol: f64) -> Result<Quadrature> {
    let lifted = integrand.arity() > 1;
    if lifted && integrand.arity() > path.samples[0].z.len() {
        return Err(Error::InvalidParameter(format!(
            "integrand reads {} coordinates but the path carries {}",
            integrand.arity(),
            path.samples[0].z.len()
        )));
    }
    let mut parts = Vec::with_capacity(path.samples.len());
    for i in 0..path.samples.len() - 1 {
        let (a, b) = (path.samples[i].t, path.samples[i + 1].t);
        if b <= a {
            continue;
        }
        let panel = Panel { path, stack, integrand, lifted, tol, sample: i };
        parts.push(panel.adapt(a, b, 0)?);
    }
    Ok(pairwise(&parts))
}

/// `int g dz1` over a cheese boundary chain (integrand in `z1` only).
pub fn integrate_chain(spec: &CheeseSpec, chain: &BoundaryChain, integrand: &Integrand, tol: f64) -> Result<Quadrature> {
    if integrand.arity() > 1 {
        return Err(Error::InvalidParameter("chain integrands may only read z1".into()));
    }
    let stack = StageStack::new(crate::tower::TowerKind::Exponential, Vec::new());
    let mut parts = Vec::with_capacity(chain.arcs.len());
    for arc in &chain.arcs {
        let d = spec.circle(arc.circle_index);
        let base = BasePath::Arc { center: d.center, radius: d.radius };
        let n = ((arc.extent() / 0.25).ceil() as usize).max(1);
        let h = (arc.end_angle - arc.start_angle) / n as f64;
        let mut acc = Vec::with_capacity(n);
        for i in 0..n {
            let a = arc.start_angle + h * i as f64;
            let b = if i + 1 == n { arc.end_angle } else { a + h };
            let samples = [a, b]
                .iter()
                .map(|&t| crate::tower::path::PathSample { t, z: vec![base.point(t).0], f: Vec::new() })
                .collect();
            let path = LiftedPath { base: base.clone(), t0: a, t1: b, samples, max_step_arg: 1.0 };
            acc.push(integrate_path(&path, &stack, integrand, tol)?);
        }
        parts.push(pairwise(&acc).scaled(arc.orientation as f64));
    }
    Ok(pairwise(&parts))
}

/// `int |dz1|` along a lifted path.
pub fn total_variation(path: &LiftedPath, stack: &StageStack) -> Result<f64> {
    Ok(integrate_path(path, stack, &Integrand::One, DEFAULT_TOLERANCE)?.variation)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureMethod {
    Direct,
    Recursive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub stage: usize,
    pub k: usize,
    pub method: MeasureMethod,
    pub total_variation: f64,
    pub moment_zbar: Complex64,
    pub ei_variation: f64,
    pub ej_variation: f64,
    pub ei_moment: Complex64,
    pub ej_moment: Complex64,
    pub quadrature_error: f64,
}

/// One boundary piece's share of a direct measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceContribution {
    pub piece: usize,
    pub origin: PieceOrigin,
    pub orientation: i8,
    pub variation: f64,
    pub moment: Complex64,
    pub error: f64,
}

pub fn contributions_csv(rows: &[PieceContribution]) -> String {
    let mut s = String::from("piece,kind,orientation,variation,moment_re,moment_im,error\n");
    for r in rows {
        let kind = match r.origin {
            PieceOrigin::Base { .. } => "base",
            PieceOrigin::Lifted { .. } => "ei",
            PieceOrigin::Cut { .. } => "ej",
        };
        s.push_str(&format!(
            "{},{},{},{:?},{:?},{:?},{:?}\n",
            r.piece, kind, r.orientation, r.variation, r.moment.re, r.moment.im, r.error
        ));
    }
    s
}

/// Oriented piece-by-piece integrals of `g dz1` over a region boundary.
pub fn region_pieces(region: &Region, stack: &StageStack, integrand: &Integrand, tol: f64) -> Result<Vec<Quadrature>> {
    region
        .pieces
        .par_iter()
        .map(|p| Ok(integrate_path(&p.path, stack, integrand, tol)?.scaled(p.orientation as f64)))
        .collect()
}

/// `int g dmu` over the boundary of a region.
pub fn region_integral(region: &Region, stack: &StageStack, integrand: &Integrand, tol: f64) -> Result<Quadrature> {
    Ok(pairwise(&region_pieces(region, stack, integrand, tol)?))
}

/// Direct measure of a region boundary, with per-piece contributions.
pub fn direct_measure(region: &Region, stack: &StageStack, tol: f64) -> Result<(MeasureReport, Vec<PieceContribution>)> {
    let parts = region_pieces(region, stack, &Integrand::ConjugateZ1, tol)?;
    let mut ei = Vec::new();
    let mut ej = Vec::new();
    let mut rows = Vec::with_capacity(parts.len());
    for (i, (q, p)) in parts.iter().zip(&region.pieces).enumerate() {
        if p.is_cut_of(region.stage) {
            ej.push(*q);
        } else {
            ei.push(*q);
        }
        rows.push(PieceContribution {
            piece: i,
            origin: p.origin,
            orientation: p.orientation,
            variation: q.variation,
            moment: q.value,
            error: q.error,
        });
    }
    let (ei, ej) = (pairwise(&ei), pairwise(&ej));
    let report = MeasureReport {
        stage: region.stage,
        k: region.k,
        method: MeasureMethod::Direct,
        total_variation: ei.variation + ej.variation,
        moment_zbar: ei.value + ej.value,
        ei_variation: ei.variation,
        ej_variation: ej.variation,
        ei_moment: ei.value,
        ej_moment: ej.value,
        quadrature_error: ei.error + ej.error,
    };
    Ok((report, rows))
}

/// Measure at stage 0 from the closed-form arc integrals.
pub fn stage0_measure(spec: &CheeseSpec, k: usize) -> Result<MeasureReport> {
    let chain = boundary_chain(spec, k)?;
    let len = chain_length(spec, &chain);
    let moment = chain.conj_integral(spec);
    Ok(MeasureReport {
        stage: 0,
        k,
        method: MeasureMethod::Recursive,
        total_variation: len,
        moment_zbar: moment,
        ei_variation: len,
        ej_variation: 0.0,
        ei_moment: moment,
        ej_moment: Complex64::new(0.0, 0.0),
        quadrature_error: 0.0,
    })
}

/// Recursive measures for stages `0..=n` from the stored sheet counts and cut lengths:
/// `E_I` scales the previous stage by `m`, `E_J` has variation `2 L` and zero moment.
pub fn recursive_measures(tower: &TowerSpec, n: usize, k: usize) -> Result<Vec<MeasureReport>> {
    let base = tower
        .base
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("recursive measures need a cheese base".into()))?;
    let mut out = vec![stage0_measure(base, k)?];
    for s in 1..=n {
        let st = tower.exp_stage(s)?;
        let tr = st.truncation(k)?;
        let prev = out.last().unwrap();
        let m = st.m as f64;
        let ei_variation = m * prev.total_variation;
        let ei_moment = prev.moment_zbar * m;
        let ej_variation = 2.0 * tr.cut_length;
        out.push(MeasureReport {
            stage: s,
            k,
            method: MeasureMethod::Recursive,
            total_variation: ei_variation + ej_variation,
            moment_zbar: ei_moment,
            ei_variation,
            ej_variation,
            ei_moment,
            ej_moment: Complex64::new(0.0, 0.0),
            quadrature_error: m * prev.quadrature_error,
        });
    }
    Ok(out)
}

pub fn boundary_measure(tower: &ExpTower, n: usize, k: usize, method: MeasureMethod, tol: f64) -> Result<MeasureReport> {
    match method {
        MeasureMethod::Recursive => Ok(recursive_measures(&tower.spec, n, k)?.pop().unwrap()),
        MeasureMethod::Direct => {
            let region = tower.region(k, n)?;
            Ok(direct_measure(region, &tower.stack(n)?, tol)?.0)
        }
    }
}
