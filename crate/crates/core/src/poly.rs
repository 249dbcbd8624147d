//! Multivariate complex polynomials and rational functions in `z1..zn`.
//!
//! Coefficients serialize as exact decimal strings (shortest round-trip
//! representation of the underlying `f64`), so documents reload bit-identically.

use crate::jet::Jet;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TermRepr", into = "TermRepr")]
pub struct Term {
    pub exponents: Vec<u32>,
    pub coeff: Complex64,
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    exponents: Vec<u32>,
    re: String,
    im: String,
}

impl From<Term> for TermRepr {
    fn from(t: Term) -> Self {
        TermRepr {
            exponents: t.exponents,
            re: format!("{:?}", t.coeff.re),
            im: format!("{:?}", t.coeff.im),
        }
    }
}

impl TryFrom<TermRepr> for Term {
    type Error = String;
    fn try_from(r: TermRepr) -> Result<Self, String> {
        let re: f64 = r.re.parse().map_err(|e| format!("bad coefficient {:?}: {e}", r.re))?;
        let im: f64 = r.im.parse().map_err(|e| format!("bad coefficient {:?}: {e}", r.im))?;
        Ok(Term {
            exponents: r.exponents,
            coeff: Complex64::new(re, im),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub arity: usize,
    pub terms: Vec<Term>,
}

impl Polynomial {
    pub fn zero(arity: usize) -> Self {
        Self { arity, terms: Vec::new() }
    }

    pub fn constant(arity: usize, c: Complex64) -> Self {
        let mut p = Self::zero(arity);
        p.push(vec![0; arity], c);
        p
    }

    /// The coordinate function `z_{index+1}`.
    pub fn variable(arity: usize, index: usize) -> Self {
        assert!(index < arity, "variable index out of range");
        let mut e = vec![0; arity];
        e[index] = 1;
        Self {
            arity,
            terms: vec![Term { exponents: e, coeff: Complex64::new(1.0, 0.0) }],
        }
    }

    /// `z_{index+1} - a`.
    pub fn shifted_variable(arity: usize, index: usize, a: Complex64) -> Self {
        Self::variable(arity, index).add(&Self::constant(arity, -a))
    }

    fn push(&mut self, exponents: Vec<u32>, coeff: Complex64) {
        if coeff == Complex64::new(0.0, 0.0) {
            return;
        }
        if let Some(t) = self.terms.iter_mut().find(|t| t.exponents == exponents) {
            t.coeff += coeff;
        } else {
            self.terms.push(Term { exponents, coeff });
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let arity = self.arity.max(other.arity);
        let mut out = self.with_arity(arity);
        for t in &other.with_arity(arity).terms {
            out.push(t.exponents.clone(), t.coeff);
        }
        out.terms.retain(|t| t.coeff != Complex64::new(0.0, 0.0));
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let arity = self.arity.max(other.arity);
        let a = self.with_arity(arity);
        let b = other.with_arity(arity);
        let mut out = Polynomial::zero(arity);
        for s in &a.terms {
            for t in &b.terms {
                let e = s.exponents.iter().zip(&t.exponents).map(|(x, y)| x + y).collect();
                out.push(e, s.coeff * t.coeff);
            }
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Polynomial {
        Polynomial {
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .map(|t| Term { exponents: t.exponents.clone(), coeff: t.coeff * c })
                .collect(),
        }
    }

    /// Same polynomial regarded as a function of `arity` variables.
    ///
    /// Panics if a dropped variable actually occurs.
    pub fn with_arity(&self, arity: usize) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut e = t.exponents.clone();
                if arity < e.len() {
                    assert!(e[arity..].iter().all(|&x| x == 0), "cannot drop a used variable");
                }
                e.resize(arity, 0);
                Term { exponents: e, coeff: t.coeff }
            })
            .collect();
        Polynomial { arity, terms }
    }

    /// Number of leading variables the polynomial actually depends on.
    pub fn support_arity(&self) -> usize {
        self.terms
            .iter()
            .filter_map(|t| t.exponents.iter().rposition(|&e| e > 0))
            .map(|i| i + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.exponents.iter().sum()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff == Complex64::new(0.0, 0.0))
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let mut m = t.coeff;
            for (i, &e) in t.exponents.iter().enumerate() {
                if e > 0 {
                    m *= z[i].powu(e);
                }
            }
            acc += m;
        }
        acc
    }

    pub fn eval_jet(&self, z: &[Jet]) -> Jet {
        let mut acc = Jet::constant(Complex64::new(0.0, 0.0));
        for t in &self.terms {
            let mut m = Jet::constant(t.coeff);
            for (i, &e) in t.exponents.iter().enumerate() {
                if e > 0 {
                    m = m * z[i].powu(e);
                }
            }
            acc = acc + m;
        }
        acc
    }

    /// Partial derivative with respect to `z_{index+1}`.
    pub fn partial(&self, index: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.arity);
        for t in &self.terms {
            let e = t.exponents[index];
            if e > 0 {
                let mut ex = t.exponents.clone();
                ex[index] -= 1;
                out.push(ex, t.coeff * e as f64);
            }
        }
        out
    }

    /// Sum of coefficient moduli; bounds |p| on the closed polydisc of radius 1.
    pub fn coefficient_l1(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalFunction {
    pub arity: usize,
    pub numerator: Polynomial,
    pub denominator: Polynomial,
}

impl RationalFunction {
    pub fn new(numerator: Polynomial, denominator: Polynomial) -> Self {
        assert!(!denominator.is_zero(), "denominator must not vanish identically");
        let arity = numerator.arity.max(denominator.arity);
        Self {
            arity,
            numerator: numerator.with_arity(arity),
            denominator: denominator.with_arity(arity),
        }
    }

    pub fn polynomial(p: Polynomial) -> Self {
        let arity = p.arity;
        Self::new(p, Polynomial::constant(arity, Complex64::new(1.0, 0.0)))
    }

    pub fn constant(arity: usize, c: Complex64) -> Self {
        Self::polynomial(Polynomial::constant(arity, c))
    }

    /// `(z_{index+1} - a) / (z_{index+1} - b)`.
    pub fn mobius(arity: usize, index: usize, a: Complex64, b: Complex64) -> Self {
        Self::new(
            Polynomial::shifted_variable(arity, index, a),
            Polynomial::shifted_variable(arity, index, b),
        )
    }

    pub fn mul(&self, other: &RationalFunction) -> RationalFunction {
        RationalFunction::new(
            self.numerator.mul(&other.numerator),
            self.denominator.mul(&other.denominator),
        )
    }

    pub fn scale(&self, c: Complex64) -> RationalFunction {
        RationalFunction::new(self.numerator.scale(c), self.denominator.clone())
    }

    pub fn with_arity(&self, arity: usize) -> RationalFunction {
        RationalFunction {
            arity,
            numerator: self.numerator.with_arity(arity),
            denominator: self.denominator.with_arity(arity),
        }
    }

    pub fn support_arity(&self) -> usize {
        self.numerator.support_arity().max(self.denominator.support_arity())
    }

    pub fn is_polynomial(&self) -> bool {
        self.denominator.degree() == 0
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.numerator.eval(z) / self.denominator.eval(z)
    }

    pub fn eval_parts(&self, z: &[Complex64]) -> (Complex64, Complex64) {
        (self.numerator.eval(z), self.denominator.eval(z))
    }

    pub fn eval_jet(&self, z: &[Jet]) -> Jet {
        self.numerator.eval_jet(z) / self.denominator.eval_jet(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn mobius_evaluates() {
        let f = RationalFunction::mobius(1, 0, c(0.5, 0.0), c(-0.5, 0.0));
        let v = f.eval(&[c(0.0, 1.0)]);
        let expected = (c(0.0, 1.0) - 0.5) / (c(0.0, 1.0) + 0.5);
        assert!((v - expected).norm() < 1e-15);
    }

    #[test]
    fn arity_padding_keeps_values() {
        let p = Polynomial::variable(1, 0).mul(&Polynomial::variable(1, 0));
        let q = p.with_arity(3);
        let z = [c(0.2, 0.1), c(5.0, 0.0), c(-3.0, 1.0)];
        assert_eq!(q.eval(&z), p.eval(&z[..1]));
        assert_eq!(q.support_arity(), 1);
    }

    #[test]
    fn coefficients_round_trip_exactly() {
        let f = RationalFunction::mobius(2, 1, c(0.1, 1.0 / 3.0), c(std::f64::consts::PI, -1e-300));
        let s = serde_json::to_string(&f).unwrap();
        let g: RationalFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn partial_derivative_of_product() {
        let x = Polynomial::variable(2, 0);
        let y = Polynomial::variable(2, 1);
        let p = x.mul(&x).mul(&y);
        let dx = p.partial(0);
        let z = [c(0.3, 0.2), c(-1.1, 0.5)];
        assert!((dx.eval(&z) - 2.0 * z[0] * z[1]).norm() < 1e-15);
    }
}
