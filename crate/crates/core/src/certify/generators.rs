//! Coefficients `c_n` that fold a tail `f_{N+1}, f_{N+2}, ...` of a generating
//! sequence into the single function `b_{N+1} = sum c_n f_n`.
//!
//! Each tail member is either the inverse of some `h_n` or a logarithm of some
//! `g_n` built from earlier members. The conditions checked are
//! (i) `c_n > 0`, (ii) `c_n ||f_n|| < 2^-n`,
//! (iii) `c_n ||f_n h_k|| < 2^-n c_k` for inverse `k < n`, and
//! (iv) `||sum_{n>k} c_n f_n|| < pi c_k` for logarithmic `k`, via the triangle
//! inequality.

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::tower::TowerSpec;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Sampled sup norms are multiplied by this before choosing coefficients.
pub const NORM_INFLATION: f64 = 1.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    #[serde(rename = "inverse_case")]
    Inverse,
    #[serde(rename = "log_case")]
    Log,
}

/// `||f_n h_k||` for a tail index `n` and an inverse-case index `k < n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossNorm {
    pub n: usize,
    pub k: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorProblem {
    /// Index of the first tail member (`N + 1`).
    pub first: usize,
    /// `||f_n||` for `n = first, first + 1, ...`.
    pub norms: Vec<f64>,
    pub tags: Vec<CaseTag>,
    pub cross_norms: Vec<CrossNorm>,
}

impl GeneratorProblem {
    fn cross(&self, n: usize, k: usize) -> Result<f64> {
        self.cross_norms
            .iter()
            .find(|c| c.n == n && c.k == k)
            .map(|c| c.value)
            .ok_or_else(|| Error::InvalidParameter(format!("missing ||f_{n} h_{k}||")))
    }

    fn index_range(&self) -> std::ops::Range<usize> {
        self.first..self.first + self.norms.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexedValue {
    pub k: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorReport {
    pub first: usize,
    pub coefficients: Vec<f64>,
    pub case_tags: Vec<CaseTag>,
    /// Conditions (i) to (iv).
    pub condition_checks: [bool; 4],
    /// Per log-case `k`: largest sampled relative residual of
    /// `exp(-sum_{n>k} (c_n/c_k) f_n) = g_k exp(-b_k / c_k)`.
    pub recovery_residuals: Vec<IndexedValue>,
    /// Per inverse-case `k`: largest sampled `|c_k - b_k h_k| / c_k` (below 1
    /// makes `b_k h_k` invertible).
    pub case_one_margins: Vec<IndexedValue>,
}

impl GeneratorReport {
    pub fn all_conditions(&self) -> bool {
        self.condition_checks.iter().all(|&b| b)
    }

    pub fn coefficient(&self, n: usize) -> f64 {
        self.coefficients[n - self.first]
    }
}

fn pow2(n: usize) -> f64 {
    0.5f64.powi(n as i32)
}

/// Greedy choice `c_n = 1/2 min(...)` over the constraints that involve `c_n`
/// and earlier coefficients, followed by a post hoc check of all four conditions.
pub fn generator_coefficients(p: &GeneratorProblem) -> Result<GeneratorReport> {
    if p.tags.len() != p.norms.len() {
        return Err(Error::InvalidParameter("one case tag per norm is required".into()));
    }
    if let Some(x) = p.norms.iter().chain(p.cross_norms.iter().map(|c| &c.value)).find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidParameter(format!("norms must be finite and positive, got {x}")));
    }
    let mut c: Vec<f64> = Vec::with_capacity(p.norms.len());
    for n in p.index_range() {
        let i = n - p.first;
        let mut bound = pow2(n) / p.norms[i];
        for k in p.first..n {
            let ck = c[k - p.first];
            let b = match p.tags[k - p.first] {
                CaseTag::Inverse => pow2(n) * ck / p.cross(n, k)?,
                CaseTag::Log => PI * ck * pow2(n - k) / p.norms[i],
            };
            bound = bound.min(b);
        }
        c.push(0.5 * bound);
    }
    let cond_i = c.iter().all(|&x| x > 0.0);
    let cond_ii = p.index_range().all(|n| c[n - p.first] * p.norms[n - p.first] < pow2(n));
    let mut cond_iii = true;
    let mut cond_iv = true;
    for k in p.index_range() {
        let ck = c[k - p.first];
        match p.tags[k - p.first] {
            CaseTag::Inverse => {
                for n in k + 1..p.first + p.norms.len() {
                    cond_iii &= c[n - p.first] * p.cross(n, k)? < pow2(n) * ck;
                }
            }
            CaseTag::Log => {
                let tail = (k + 1..p.first + p.norms.len()).fold(0.0, |a, n| a + c[n - p.first] * p.norms[n - p.first]);
                cond_iv &= tail < PI * ck;
            }
        }
    }
    Ok(GeneratorReport {
        first: p.first,
        coefficients: c,
        case_tags: p.tags.clone(),
        condition_checks: [cond_i, cond_ii, cond_iii, cond_iv],
        recovery_residuals: Vec::new(),
        case_one_margins: Vec::new(),
    })
}

/// A member of the sequence `z_1, 1/q_1, z_2, 1/q_2, ..., 1/q_N, z_{N+1}`
/// generating the stage-`N` algebra of an exponential tower, where
/// `f_s = p_s / q_s`.
#[derive(Clone, Debug, PartialEq)]
pub enum SequenceMember {
    /// `z_{j+1}` (0-based coordinate `j`).
    Coordinate(usize),
    /// `1 / q_s`.
    InverseDenominator(usize, Polynomial),
}

pub struct TowerSequence {
    pub members: Vec<SequenceMember>,
    stack: crate::tower::path::StageStack,
    denominators: Vec<Polynomial>,
}

impl TowerSequence {
    pub fn new(tower: &TowerSpec, n: usize) -> Result<Self> {
        let stages = tower.exp_stages();
        if n > stages.len() {
            return Err(Error::StageOutOfRange { stage: n, built: stages.len() });
        }
        let mut members = vec![SequenceMember::Coordinate(0)];
        let mut denominators = Vec::with_capacity(n);
        for (s, st) in stages.iter().take(n).enumerate() {
            members.push(SequenceMember::InverseDenominator(s + 1, st.f.denominator.clone()));
            members.push(SequenceMember::Coordinate(s + 1));
            denominators.push(st.f.denominator.clone());
        }
        Ok(Self { members, stack: tower.stack(n)?, denominators })
    }

    /// Tail tags from index 2 on (`z_1` alone is the head).
    pub fn tags(&self) -> Vec<CaseTag> {
        self.members[1..]
            .iter()
            .map(|m| match m {
                SequenceMember::Coordinate(_) => CaseTag::Log,
                SequenceMember::InverseDenominator(..) => CaseTag::Inverse,
            })
            .collect()
    }

    /// Value of member `idx` (1-based) at a point of `X_N`.
    pub fn value(&self, idx: usize, z: &[Complex64]) -> Complex64 {
        match &self.members[idx - 1] {
            SequenceMember::Coordinate(j) => z[*j],
            SequenceMember::InverseDenominator(_, q) => 1.0 / q.eval(z),
        }
    }

    /// `h_k` (inverse case) or `g_k` (log case) for member `idx >= 2`.
    pub fn companion(&self, idx: usize, z: &[Complex64]) -> Complex64 {
        match &self.members[idx - 1] {
            SequenceMember::Coordinate(j) => self.stack.eval_f(*j, z),
            SequenceMember::InverseDenominator(s, _) => self.denominators[s - 1].eval(z),
        }
    }

    /// Measured problem for the tail starting at index 2.
    pub fn problem(&self, points: &[Vec<Complex64>]) -> GeneratorProblem {
        let len = self.members.len();
        let sup = |f: &dyn Fn(&[Complex64]) -> Complex64| {
            NORM_INFLATION * points.iter().fold(0.0f64, |a, z| a.max(f(z).norm()))
        };
        let norms = (2..=len).map(|n| sup(&|z| self.value(n, z))).collect();
        let tags = self.tags();
        let mut cross_norms = Vec::new();
        for k in 2..=len {
            if tags[k - 2] == CaseTag::Inverse {
                for n in k + 1..=len {
                    cross_norms.push(CrossNorm { n, k, value: sup(&|z| self.value(n, z) * self.companion(k, z)) });
                }
            }
        }
        GeneratorProblem { first: 2, norms, tags, cross_norms }
    }

    /// Fills the sampled Case I margins and Case II recovery residuals.
    pub fn verify(&self, report: &mut GeneratorReport, points: &[Vec<Complex64>]) {
        let len = self.members.len();
        let c = |n: usize| report.coefficient(n);
        let mut rec = Vec::new();
        let mut inv = Vec::new();
        for k in 2..=len {
            let ck = c(k);
            let mut worst = 0.0f64;
            for z in points {
                let b_k = (k..=len).fold(Complex64::new(0.0, 0.0), |a, n| a + self.value(n, z) * c(n));
                let h_or_g = self.companion(k, z);
                let v = match report.case_tags[k - 2] {
                    CaseTag::Inverse => (ck - b_k * h_or_g).norm() / ck,
                    CaseTag::Log => {
                        let tail = (k + 1..=len).fold(Complex64::new(0.0, 0.0), |a, n| a + self.value(n, z) * (c(n) / ck));
                        let lhs = (-tail).exp();
                        let rhs = h_or_g * (-b_k / ck).exp();
                        (lhs - rhs).norm() / rhs.norm()
                    }
                };
                worst = worst.max(v);
            }
            let entry = IndexedValue { k, value: worst };
            match report.case_tags[k - 2] {
                CaseTag::Inverse => inv.push(entry),
                CaseTag::Log => rec.push(entry),
            }
        }
        report.recovery_residuals = rec;
        report.case_one_margins = inv;
    }
}

/// Coefficients for the stage-`n` sequence of `tower`, with norms measured on
/// `norm_points` and the identities checked on `recovery_points`.
pub fn tower_generators(
    tower: &TowerSpec,
    n: usize,
    norm_points: &[Vec<Complex64>],
    recovery_points: &[Vec<Complex64>],
) -> Result<GeneratorReport> {
    let seq = TowerSequence::new(tower, n)?;
    let mut report = generator_coefficients(&seq.problem(norm_points))?;
    seq.verify(&mut report, recovery_points);
    Ok(report)
}
