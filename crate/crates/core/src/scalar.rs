//! Scalar types the series recurrence is generic over.
//!
//! The same recurrence runs on plain `f64` (coefficient tables), on [`Jet`]
//! (values carried together with their first two θ-derivatives, which gives
//! exact tangents and curvature of the sampled curves), and on [`MpReal`]
//! (multi-precision, used to measure truncation order below the `f64`
//! round-off floor).

use std::cell::RefCell;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, RoundingMode};

pub trait Real:
    Clone
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    /// Leading `f64` value (the value part for jets).
    fn value(&self) -> f64;
    fn powf(&self, e: f64) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn sinh(&self) -> Self;
    fn cosh(&self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn scale(&self, k: f64) -> Self {
        self.clone() * Self::from_f64(k)
    }

    fn powi(&self, n: usize) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc * self.clone();
        }
        acc
    }
}

impl Real for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn powf(&self, e: f64) -> Self {
        f64::powf(*self, e)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn sinh(&self) -> Self {
        f64::sinh(*self)
    }
    fn cosh(&self) -> Self {
        f64::cosh(*self)
    }
    fn scale(&self, k: f64) -> Self {
        self * k
    }
}

/// Truncated Taylor jet `(f, f', f'')` in one variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const fn new(v: f64, d1: f64, d2: f64) -> Self {
        Jet { v, d1, d2 }
    }

    /// The independent variable at `x`.
    pub const fn variable(x: f64) -> Self {
        Jet::new(x, 1.0, 0.0)
    }

    pub const fn constant(x: f64) -> Self {
        Jet::new(x, 0.0, 0.0)
    }

    // f∘self given f, f', f'' at self.v
    fn chain(self, f: f64, df: f64, ddf: f64) -> Jet {
        Jet::new(f, df * self.d1, ddf * self.d1 * self.d1 + df * self.d2)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.v + o.v, self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.v - o.v, self.d1 - o.d1, self.d2 - o.d2)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet::new(
            self.v * o.v,
            self.d1 * o.v + self.v * o.d1,
            self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        )
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let inv = o.chain(1.0 / o.v, -1.0 / (o.v * o.v), 2.0 / (o.v * o.v * o.v));
        self * inv
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::new(-self.v, -self.d1, -self.d2)
    }
}

impl Real for Jet {
    fn from_f64(v: f64) -> Self {
        Jet::constant(v)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn powf(&self, e: f64) -> Self {
        let f = self.v.powf(e);
        let df = e * self.v.powf(e - 1.0);
        let ddf = e * (e - 1.0) * self.v.powf(e - 2.0);
        self.chain(f, df, ddf)
    }
    fn sin(&self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(&self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }
    fn sinh(&self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(s, c, s)
    }
    fn cosh(&self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(c, s, c)
    }
    fn scale(&self, k: f64) -> Self {
        Jet::new(self.v * k, self.d1 * k, self.d2 * k)
    }
}

/// Working precision of [`MpReal`], in bits.
pub const MP_BITS: usize = 384;
const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants cache"));
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

/// Multi-precision real with [`MP_BITS`] bits of mantissa.
#[derive(Clone)]
pub struct MpReal(BigFloat);

impl MpReal {
    pub fn abs(&self) -> MpReal {
        MpReal(self.0.abs())
    }

    /// `log2 |self|` as an `f64`; `-inf` for zero.
    pub fn log2_abs(&self) -> f64 {
        if self.0.is_zero() {
            return f64::NEG_INFINITY;
        }
        let l = with_consts(|cc| self.0.abs().log2(MP_BITS, RM, cc));
        MpReal(l).value()
    }
}

impl fmt::Debug for MpReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Add for MpReal {
    type Output = MpReal;
    fn add(self, o: MpReal) -> MpReal {
        MpReal(self.0.add(&o.0, MP_BITS, RM))
    }
}

impl Sub for MpReal {
    type Output = MpReal;
    fn sub(self, o: MpReal) -> MpReal {
        MpReal(self.0.sub(&o.0, MP_BITS, RM))
    }
}

impl Mul for MpReal {
    type Output = MpReal;
    fn mul(self, o: MpReal) -> MpReal {
        MpReal(self.0.mul(&o.0, MP_BITS, RM))
    }
}

impl Div for MpReal {
    type Output = MpReal;
    fn div(self, o: MpReal) -> MpReal {
        MpReal(self.0.div(&o.0, MP_BITS, RM))
    }
}

impl Neg for MpReal {
    type Output = MpReal;
    fn neg(self) -> MpReal {
        MpReal(self.0.neg())
    }
}

impl Real for MpReal {
    fn from_f64(v: f64) -> Self {
        MpReal(BigFloat::from_f64(v, MP_BITS))
    }
    fn value(&self) -> f64 {
        if self.0.is_zero() {
            return 0.0;
        }
        self.0.to_string().parse().unwrap_or(f64::NAN)
    }
    fn powf(&self, e: f64) -> Self {
        let e = BigFloat::from_f64(e, MP_BITS);
        MpReal(with_consts(|cc| self.0.pow(&e, MP_BITS, RM, cc)))
    }
    fn sin(&self) -> Self {
        MpReal(with_consts(|cc| self.0.sin(MP_BITS, RM, cc)))
    }
    fn cos(&self) -> Self {
        MpReal(with_consts(|cc| self.0.cos(MP_BITS, RM, cc)))
    }
    fn sinh(&self) -> Self {
        MpReal(with_consts(|cc| self.0.sinh(MP_BITS, RM, cc)))
    }
    fn cosh(&self) -> Self {
        MpReal(with_consts(|cc| self.0.cosh(MP_BITS, RM, cc)))
    }
}
