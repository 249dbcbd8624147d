//! First-order forward-mode jets over the complex numbers.
//!
//! A [`Jet`] carries a value together with its derivative with respect to the
//! base coordinate `z1`. Lifted coordinates on a covering surface are functions
//! of `z1` locally, so propagating jets through the defining relations gives
//! total derivatives along the surface.

use num_complex::Complex64;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub v: Complex64,
    pub d: Complex64,
}

impl Jet {
    pub const fn new(v: Complex64, d: Complex64) -> Self {
        Self { v, d }
    }

    pub fn constant(v: Complex64) -> Self {
        Self::new(v, Complex64::new(0.0, 0.0))
    }

    /// The independent variable at `z`.
    pub fn variable(z: Complex64) -> Self {
        Self::new(z, Complex64::new(1.0, 0.0))
    }

    pub fn powu(self, n: u32) -> Self {
        match n {
            0 => Self::constant(Complex64::new(1.0, 0.0)),
            1 => self,
            _ => {
                let p = self.v.powu(n - 1);
                Self::new(p * self.v, self.d * p * n as f64)
            }
        }
    }

    /// Logarithmic derivative `d/v`.
    pub fn log_derivative(self) -> Complex64 {
        self.d / self.v
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.v + o.v, self.d + o.d)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.v - o.v, self.d - o.d)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet::new(self.v * o.v, self.d * o.v + self.v * o.d)
    }
}

impl Mul<Complex64> for Jet {
    type Output = Jet;
    fn mul(self, c: Complex64) -> Jet {
        Jet::new(self.v * c, self.d * c)
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let q = self.v / o.v;
        Jet::new(q, (self.d - q * o.d) / o.v)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::new(-self.v, -self.d)
    }
}
