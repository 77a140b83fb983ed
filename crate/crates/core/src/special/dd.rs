//! Minimal double-double complex arithmetic for the polynomial recurrences.
//!
//! Near a zero the three-term recurrence for `p_n` cancels heavily; carrying
//! roughly 32 digits keeps the Newton ratio accurate to full double precision.

use num_complex::Complex64;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    #[inline]
    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// Exact scaling by a power of two.
    #[inline]
    pub fn scale(self, s: f64) -> Self {
        Dd {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * q1;
        let q2 = r.hi / b.hi;
        let r = r - b * q2;
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from_f64(q3)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct DdComplex {
    pub re: Dd,
    pub im: Dd,
}

impl DdComplex {
    #[inline]
    pub fn from_c64(z: Complex64) -> Self {
        DdComplex {
            re: Dd::from_f64(z.re),
            im: Dd::from_f64(z.im),
        }
    }

    #[inline]
    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    #[inline]
    pub fn scale(self, s: f64) -> Self {
        DdComplex {
            re: self.re.scale(s),
            im: self.im.scale(s),
        }
    }

    #[inline]
    pub fn add_real(self, x: f64) -> Self {
        DdComplex {
            re: self.re + Dd::from_f64(x),
            im: self.im,
        }
    }

    pub fn magnitude(self) -> f64 {
        self.to_c64().norm()
    }

    /// Low-order parts.
    #[inline]
    pub fn tail(self) -> Complex64 {
        Complex64::new(self.re.lo(), self.im.lo())
    }

    #[inline]
    pub fn from_parts(hi: Complex64, lo: Complex64) -> Self {
        DdComplex {
            re: Dd::from_f64(hi.re) + Dd::from_f64(lo.re),
            im: Dd::from_f64(hi.im) + Dd::from_f64(lo.im),
        }
    }
}

impl Add for DdComplex {
    type Output = DdComplex;
    #[inline]
    fn add(self, b: DdComplex) -> DdComplex {
        DdComplex {
            re: self.re + b.re,
            im: self.im + b.im,
        }
    }
}

impl Sub for DdComplex {
    type Output = DdComplex;
    #[inline]
    fn sub(self, b: DdComplex) -> DdComplex {
        DdComplex {
            re: self.re - b.re,
            im: self.im - b.im,
        }
    }
}

impl Mul for DdComplex {
    type Output = DdComplex;
    #[inline]
    fn mul(self, b: DdComplex) -> DdComplex {
        DdComplex {
            re: self.re * b.re - self.im * b.im,
            im: self.re * b.im + self.im * b.re,
        }
    }
}

impl Div for DdComplex {
    type Output = DdComplex;
    fn div(self, b: DdComplex) -> DdComplex {
        let den = b.re * b.re + b.im * b.im;
        DdComplex {
            re: (self.re * b.re + self.im * b.im) / den,
            im: (self.im * b.re - self.re * b.im) / den,
        }
    }
}

impl Mul<f64> for DdComplex {
    type Output = DdComplex;
    #[inline]
    fn mul(self, b: f64) -> DdComplex {
        DdComplex {
            re: self.re * b,
            im: self.im * b,
        }
    }
}
