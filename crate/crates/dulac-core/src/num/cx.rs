//! Complex numbers over [`Qd`].

use core::fmt;
use core::fmt::Write as _;
use core::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use super::Qd;

#[derive(Clone, Copy, Default, PartialEq)]
pub struct Cx {
    pub re: Qd,
    pub im: Qd,
}

impl Cx {
    pub const ZERO: Cx = Cx { re: Qd::ZERO, im: Qd::ZERO };
    pub const ONE: Cx = Cx { re: Qd::ONE, im: Qd::ZERO };
    pub const I: Cx = Cx { re: Qd::ZERO, im: Qd::ONE };

    #[inline]
    pub const fn new(re: Qd, im: Qd) -> Cx {
        Cx { re, im }
    }

    #[inline]
    pub const fn real(re: Qd) -> Cx {
        Cx { re, im: Qd::ZERO }
    }

    #[inline]
    pub const fn from_f64(re: f64, im: f64) -> Cx {
        Cx { re: Qd::from_f64(re), im: Qd::from_f64(im) }
    }

    /// 2πi at working precision.
    pub fn two_pi_i() -> Cx {
        Cx::new(Qd::ZERO, Qd::two_pi())
    }

    pub fn to_c64(self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn from_c64(z: num_complex::Complex64) -> Cx {
        Cx::from_f64(z.re, z.im)
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    #[inline]
    pub fn conj(self) -> Cx {
        Cx::new(self.re, -self.im)
    }

    #[inline]
    pub fn norm_sqr(self) -> Qd {
        self.re.sqr() + self.im.sqr()
    }

    pub fn abs(self) -> Qd {
        self.norm_sqr().sqrt()
    }

    /// Cheap magnitude in `f64`, adequate for tolerance tests.
    #[inline]
    pub fn abs_f64(self) -> f64 {
        libm::hypot(self.re.hi(), self.im.hi())
    }

    pub fn arg(self) -> Qd {
        Qd::atan2(self.im, self.re)
    }

    #[inline]
    pub fn scale(self, s: Qd) -> Cx {
        Cx::new(self.re * s, self.im * s)
    }

    #[inline]
    pub fn mul_i(self) -> Cx {
        Cx::new(-self.im, self.re)
    }

    pub fn recip(self) -> Cx {
        let d = self.norm_sqr();
        Cx::new(self.re / d, -self.im / d)
    }

    pub fn exp(self) -> Cx {
        let m = self.re.exp();
        if self.im.is_zero() {
            return Cx::real(m);
        }
        let (s, c) = self.im.sin_cos();
        Cx::new(m * c, m * s)
    }

    /// Principal logarithm, imaginary part in (-π, π].
    pub fn ln(self) -> Cx {
        Cx::new(self.abs().ln(), self.arg())
    }

    pub fn sqrt(self) -> Cx {
        if self.is_zero() {
            return Cx::ZERO;
        }
        let r = self.abs();
        let half = Qd::from_f64(0.5);
        let re = ((r + self.re) * half).sqrt();
        let im = ((r - self.re) * half).sqrt();
        if self.im.hi() < 0.0 {
            Cx::new(re, -im)
        } else {
            Cx::new(re, im)
        }
    }

    pub fn powi(self, n: i32) -> Cx {
        if n == 0 {
            return Cx::ONE;
        }
        let mut base = self;
        let mut e = n.unsigned_abs();
        let mut acc = Cx::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base = base * base;
            e >>= 1;
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }

    /// Principal power `self^w = exp(w·Log self)`.
    pub fn powc(self, w: Cx) -> Cx {
        if self.is_zero() {
            return Cx::ZERO;
        }
        (w * self.ln()).exp()
    }

    /// Equality under the relative rule `|u-v| ≤ eps·max(1,|u|,|v|)`.
    pub fn approx_eq(self, o: Cx, eps: f64) -> bool {
        let d = (self - o).abs_f64();
        d <= eps * 1f64.max(self.abs_f64()).max(o.abs_f64())
    }
}

impl From<Qd> for Cx {
    fn from(x: Qd) -> Cx {
        Cx::real(x)
    }
}

impl From<f64> for Cx {
    fn from(x: f64) -> Cx {
        Cx::from_f64(x, 0.0)
    }
}

impl fmt::Debug for Cx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.re, self.im)
    }
}

impl fmt::Display for Cx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = f.precision().unwrap_or(20);
        f.write_char('(')?;
        self.re.write_sci(f, d)?;
        f.write_char(',')?;
        self.im.write_sci(f, d)?;
        f.write_char(')')
    }
}

impl Neg for Cx {
    type Output = Cx;
    #[inline]
    fn neg(self) -> Cx {
        Cx::new(-self.re, -self.im)
    }
}

impl Add for Cx {
    type Output = Cx;
    #[inline]
    fn add(self, o: Cx) -> Cx {
        Cx::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Cx {
    type Output = Cx;
    #[inline]
    fn sub(self, o: Cx) -> Cx {
        Cx::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Cx {
    type Output = Cx;
    #[inline]
    fn mul(self, o: Cx) -> Cx {
        if self.im.is_zero() {
            return o.scale(self.re);
        }
        if o.im.is_zero() {
            return self.scale(o.re);
        }
        Cx::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

impl Div for Cx {
    type Output = Cx;
    fn div(self, o: Cx) -> Cx {
        if o.im.is_zero() {
            return Cx::new(self.re / o.re, self.im / o.re);
        }
        let d = o.norm_sqr();
        let n = self * o.conj();
        Cx::new(n.re / d, n.im / d)
    }
}

impl Mul<Qd> for Cx {
    type Output = Cx;
    #[inline]
    fn mul(self, s: Qd) -> Cx {
        self.scale(s)
    }
}

macro_rules! assign_ops {
    ($($tr:ident $m:ident $op:tt),*) => {$(
        impl $tr for Cx {
            #[inline]
            fn $m(&mut self, b: Cx) { *self = *self $op b; }
        }
    )*};
}
assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /);
