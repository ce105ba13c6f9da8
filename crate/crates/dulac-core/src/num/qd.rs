//! Quad-double reals: an unevaluated sum of four non-overlapping `f64`s,
//! about 212 bits (62 decimal digits) of mantissa.
//!
//! The add/mul/div kernels follow the classic Hida-Li-Bailey "sloppy"
//! variants: error is bounded relative to the operands rather than the
//! result, which is what truncated-series arithmetic needs.

use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

#[derive(Clone, Copy, Default, PartialEq)]
pub struct Qd(pub [f64; 4]);

#[inline(always)]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline(always)]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline(always)]
fn split(a: f64) -> (f64, f64) {
    const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1
    let t = SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

#[inline(always)]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

#[inline(always)]
fn three_sum(a: f64, b: f64, c: f64) -> (f64, f64, f64) {
    let (t1, t2) = two_sum(a, b);
    let (a, t3) = two_sum(c, t1);
    let (b, c) = two_sum(t2, t3);
    (a, b, c)
}

#[inline(always)]
fn three_sum2(a: f64, b: f64, c: f64) -> (f64, f64) {
    let (t1, t2) = two_sum(a, b);
    let (a, t3) = two_sum(c, t1);
    (a, t2 + t3)
}

#[inline]
fn renorm(c0: f64, c1: f64, c2: f64, c3: f64, c4: f64) -> Qd {
    if !c0.is_finite() {
        return Qd([c0, 0.0, 0.0, 0.0]);
    }
    let (s0, c4) = quick_two_sum(c3, c4);
    let (s0, c3) = quick_two_sum(c2, s0);
    let (s0, c2) = quick_two_sum(c1, s0);
    let (c0, c1) = quick_two_sum(c0, s0);

    let (mut s0, mut s1, mut s2, mut s3) = (c0, c1, 0.0, 0.0);
    if s1 != 0.0 {
        (s1, s2) = quick_two_sum(s1, c2);
        if s2 != 0.0 {
            (s2, s3) = quick_two_sum(s2, c3);
            if s3 != 0.0 {
                s3 += c4;
            } else {
                (s2, s3) = quick_two_sum(s2, c4);
            }
        } else {
            (s1, s2) = quick_two_sum(s1, c3);
            if s2 != 0.0 {
                (s2, s3) = quick_two_sum(s2, c4);
            } else {
                (s1, s2) = quick_two_sum(s1, c4);
            }
        }
    } else {
        (s0, s1) = quick_two_sum(s0, c2);
        if s1 != 0.0 {
            (s1, s2) = quick_two_sum(s1, c3);
            if s2 != 0.0 {
                (s2, s3) = quick_two_sum(s2, c4);
            } else {
                (s1, s2) = quick_two_sum(s1, c4);
            }
        } else {
            (s0, s1) = quick_two_sum(s0, c3);
            if s1 != 0.0 {
                (s1, s2) = quick_two_sum(s1, c4);
            } else {
                (s0, s1) = quick_two_sum(s0, c4);
            }
        }
    }
    Qd([s0, s1, s2, s3])
}

impl Qd {
    pub const ZERO: Qd = Qd([0.0; 4]);
    pub const ONE: Qd = Qd([1.0, 0.0, 0.0, 0.0]);
    pub const PI: Qd = Qd([
        3.141592653589793,
        1.2246467991473532e-16,
        -2.9947698097183397e-33,
        1.1124542208633653e-49,
    ]);
    pub const LN2: Qd = Qd([
        0.6931471805599453,
        2.3190468138462996e-17,
        5.707708438416212e-34,
        -3.5824322106018114e-50,
    ]);
    pub const LN10: Qd = Qd([
        2.302585092994046,
        -2.1707562233822494e-16,
        -9.984262454465777e-33,
        -4.023357454450206e-49,
    ]);
    /// Unit roundoff of the representation.
    pub const EPS: f64 = 1.21543267145725e-63;

    #[inline]
    pub const fn from_f64(x: f64) -> Qd {
        Qd([x, 0.0, 0.0, 0.0])
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.0[0] + self.0[1]
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.0[0]
    }

    pub fn from_i64(n: i64) -> Qd {
        let hi = n as f64;
        let lo = (n - hi as i64) as f64;
        renorm(hi, lo, 0.0, 0.0, 0.0)
    }

    pub fn two_pi() -> Qd {
        Qd::PI.mul_pwr2(2.0)
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0[0] == 0.0
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.0[0].is_finite()
    }

    #[inline]
    pub fn abs(self) -> Qd {
        if self.0[0] < 0.0 {
            -self
        } else {
            self
        }
    }

    /// Exact scaling by a power of two.
    #[inline]
    pub fn mul_pwr2(self, p: f64) -> Qd {
        Qd([self.0[0] * p, self.0[1] * p, self.0[2] * p, self.0[3] * p])
    }

    #[inline]
    pub fn sqr(self) -> Qd {
        self * self
    }

    pub fn recip(self) -> Qd {
        Qd::ONE / self
    }

    pub fn floor(self) -> Qd {
        let a = self.0;
        let x0 = libm::floor(a[0]);
        let (mut x1, mut x2, mut x3) = (0.0, 0.0, 0.0);
        if x0 == a[0] {
            x1 = libm::floor(a[1]);
            if x1 == a[1] {
                x2 = libm::floor(a[2]);
                if x2 == a[2] {
                    x3 = libm::floor(a[3]);
                }
            }
        }
        renorm(x0, x1, x2, x3, 0.0)
    }

    pub fn round(self) -> Qd {
        (self + Qd::from_f64(0.5)).floor()
    }

    pub fn powi(self, n: i32) -> Qd {
        if n == 0 {
            return Qd::ONE;
        }
        let mut base = self;
        let mut e = n.unsigned_abs();
        let mut acc = Qd::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base = base.sqr();
            e >>= 1;
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }

    pub fn sqrt(self) -> Qd {
        if self.is_zero() {
            return Qd::ZERO;
        }
        if self.0[0] < 0.0 {
            return Qd::from_f64(f64::NAN);
        }
        let mut r = Qd::from_f64(1.0 / libm::sqrt(self.0[0]));
        let h = self.mul_pwr2(0.5);
        for _ in 0..3 {
            r += (Qd::from_f64(0.5) - h * r.sqr()) * r;
        }
        r * self
    }

    pub fn exp(self) -> Qd {
        let a0 = self.0[0];
        if a0 > 709.0 {
            return Qd::from_f64(f64::INFINITY);
        }
        if a0 < -745.0 {
            return Qd::ZERO;
        }
        if self.is_zero() {
            return Qd::ONE;
        }
        const INV_K: f64 = 1.0 / 65536.0;
        let m = libm::floor(a0 / Qd::LN2.0[0] + 0.5);
        let r = (self - Qd::LN2 * Qd::from_f64(m)).mul_pwr2(INV_K);
        // expm1 on the reduced argument, |r| < 6e-6
        let mut s = r;
        let mut t = r;
        let mut i = 2.0;
        loop {
            t = t * r / Qd::from_f64(i);
            s += t;
            if libm::fabs(t.0[0]) <= 1e-66 * libm::fabs(s.0[0]) || t.is_zero() {
                break;
            }
            i += 1.0;
        }
        for _ in 0..16 {
            s = s.mul_pwr2(2.0) + s.sqr();
        }
        s += Qd::ONE;
        let p = libm::ldexp(1.0, m as i32);
        s.mul_pwr2(p)
    }

    pub fn ln(self) -> Qd {
        if self.0[0] <= 0.0 {
            return Qd::from_f64(f64::NAN);
        }
        if self == Qd::ONE {
            return Qd::ZERO;
        }
        let mut x = Qd::from_f64(libm::log(self.0[0]));
        for _ in 0..3 {
            x = x + self * (-x).exp() - Qd::ONE;
        }
        x
    }

    /// sin and cos together.
    pub fn sin_cos(self) -> (Qd, Qd) {
        if self.is_zero() {
            return (Qd::ZERO, Qd::ONE);
        }
        let two_pi = Qd::two_pi();
        let k = (self / two_pi).round();
        let r = self - two_pi * k;
        // quadrant reduction by pi/2
        let half_pi = Qd::PI.mul_pwr2(0.5);
        let q = (r / half_pi).round();
        let t = r - half_pi * q;
        const HALVINGS: i32 = 8;
        let u = t.mul_pwr2(libm::ldexp(1.0, -HALVINGS));
        let u2 = u.sqr();
        // Taylor series on |u| < 0.0031
        let mut s = u;
        let mut c = Qd::ONE;
        let mut term_s = u;
        let mut term_c = Qd::ONE;
        let mut n = 1.0;
        loop {
            term_c = -term_c * u2 / Qd::from_f64(n * (n + 1.0));
            term_s = -term_s * u2 / Qd::from_f64((n + 1.0) * (n + 2.0));
            c += term_c;
            s += term_s;
            if libm::fabs(term_c.0[0]) < 1e-68 {
                break;
            }
            n += 2.0;
        }
        for _ in 0..HALVINGS {
            let s2 = (s * c).mul_pwr2(2.0);
            let c2 = Qd::ONE - s.sqr().mul_pwr2(2.0);
            s = s2;
            c = c2;
        }
        match (q.to_f64() as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    pub fn atan2(y: Qd, x: Qd) -> Qd {
        if x.is_zero() && y.is_zero() {
            return Qd::ZERO;
        }
        let mut z = Qd::from_f64(libm::atan2(y.0[0], x.0[0]));
        let r = (x.sqr() + y.sqr()).sqrt();
        let xx = x / r;
        let yy = y / r;
        for _ in 0..3 {
            let (s, c) = z.sin_cos();
            if libm::fabs(xx.0[0]) > libm::fabs(yy.0[0]) {
                z += (yy - s) / c;
            } else {
                z -= (xx - c) / s;
            }
        }
        z
    }

    pub fn max(self, o: Qd) -> Qd {
        if self < o {
            o
        } else {
            self
        }
    }

    pub fn min(self, o: Qd) -> Qd {
        if o < self {
            o
        } else {
            self
        }
    }

    /// Parses a decimal literal such as `-1.25e-3`.
    pub fn parse(s: &str) -> Option<Qd> {
        let s = s.trim();
        let (neg, body) = match s.as_bytes().first()? {
            b'-' => (true, &s[1..]),
            b'+' => (false, &s[1..]),
            _ => (false, s),
        };
        let (mant, exp) = match body.find(['e', 'E']) {
            Some(i) => (&body[..i], body[i + 1..].parse::<i32>().ok()?),
            None => (body, 0),
        };
        let mut digits_seen = false;
        let mut acc = Qd::ZERO;
        let mut scale = exp;
        let mut after_dot = false;
        let ten = Qd::from_f64(10.0);
        for ch in mant.chars() {
            match ch {
                '0'..='9' => {
                    acc = acc * ten + Qd::from_f64((ch as u8 - b'0') as f64);
                    digits_seen = true;
                    if after_dot {
                        scale -= 1;
                    }
                }
                '.' if !after_dot => after_dot = true,
                '_' => {}
                _ => return None,
            }
        }
        if !digits_seen {
            return None;
        }
        let v = acc * ten.powi(scale);
        Some(if neg { -v } else { v })
    }

    /// Decimal scientific notation with `digits` significant digits.
    pub fn write_sci(self, f: &mut dyn fmt::Write, digits: usize) -> fmt::Result {
        if !self.is_finite() {
            return write!(f, "{}", self.0[0]);
        }
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut x = self;
        if x.0[0] < 0.0 {
            f.write_char('-')?;
            x = -x;
        }
        let ten = Qd::from_f64(10.0);
        let mut e = libm::floor(libm::log10(x.0[0])) as i32;
        x *= ten.powi(-e);
        if x.0[0] >= 10.0 {
            x /= ten;
            e += 1;
        } else if x.0[0] < 1.0 {
            x *= ten;
            e -= 1;
        }
        let digits = digits.clamp(1, 64);
        let mut ds: [u8; 66] = [0; 66];
        for d in ds.iter_mut().take(digits + 1) {
            let q = libm::floor(x.0[0]).clamp(0.0, 9.0);
            *d = q as u8;
            x = (x - Qd::from_f64(q)) * ten;
        }
        // round half up on the guard digit
        if ds[digits] >= 5 {
            let mut i = digits;
            loop {
                if i == 0 {
                    // carried out of the leading digit
                    ds.copy_within(0..digits, 1);
                    ds[0] = 1;
                    e += 1;
                    break;
                }
                i -= 1;
                if ds[i] == 9 {
                    ds[i] = 0;
                } else {
                    ds[i] += 1;
                    break;
                }
            }
        }
        let mut last = digits;
        while last > 1 && ds[last - 1] == 0 {
            last -= 1;
        }
        f.write_char((b'0' + ds[0]) as char)?;
        if last > 1 {
            f.write_char('.')?;
            for d in &ds[1..last] {
                f.write_char((b'0' + d) as char)?;
            }
        }
        if e != 0 {
            write!(f, "e{}", e)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Qd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_sci(f, 40)
    }
}

impl fmt::Display for Qd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = f.precision().unwrap_or(20);
        self.write_sci(f, d)
    }
}

impl From<f64> for Qd {
    fn from(x: f64) -> Qd {
        Qd::from_f64(x)
    }
}

impl Neg for Qd {
    type Output = Qd;
    #[inline]
    fn neg(self) -> Qd {
        Qd([-self.0[0], -self.0[1], -self.0[2], -self.0[3]])
    }
}

impl Add for Qd {
    type Output = Qd;
    #[inline]
    fn add(self, b: Qd) -> Qd {
        let a = self.0;
        let b = b.0;
        let (s0, t0) = two_sum(a[0], b[0]);
        let (s1, t1) = two_sum(a[1], b[1]);
        let (s2, t2) = two_sum(a[2], b[2]);
        let (s3, t3) = two_sum(a[3], b[3]);
        let (s1, t0) = two_sum(s1, t0);
        let (s2, t0, t1) = three_sum(s2, t0, t1);
        let (s3, t0) = three_sum2(s3, t0, t2);
        let t0 = t0 + t1 + t3;
        renorm(s0, s1, s2, s3, t0)
    }
}

impl Sub for Qd {
    type Output = Qd;
    #[inline]
    fn sub(self, b: Qd) -> Qd {
        self + (-b)
    }
}

impl Mul for Qd {
    type Output = Qd;
    #[inline]
    fn mul(self, b: Qd) -> Qd {
        let a = self.0;
        let b = b.0;
        let (p0, q0) = two_prod(a[0], b[0]);
        let (p1, q1) = two_prod(a[0], b[1]);
        let (p2, q2) = two_prod(a[1], b[0]);
        let (p3, q3) = two_prod(a[0], b[2]);
        let (p4, q4) = two_prod(a[1], b[1]);
        let (p5, q5) = two_prod(a[2], b[0]);

        let (p1, p2, q0) = three_sum(p1, p2, q0);
        let (p2, q1, q2) = three_sum(p2, q1, q2);
        let (p3, p4, p5) = three_sum(p3, p4, p5);
        let (s0, t0) = two_sum(p2, p3);
        let (s1, t1) = two_sum(q1, p4);
        let mut s2 = q2 + p5;
        let (mut s1, t0) = two_sum(s1, t0);
        s2 += t0 + t1;
        s1 += a[0] * b[3] + a[1] * b[2] + a[2] * b[1] + a[3] * b[0] + q0 + q3 + q4 + q5;
        renorm(p0, p1, s0, s1, s2)
    }
}

impl Div for Qd {
    type Output = Qd;
    fn div(self, b: Qd) -> Qd {
        let q0 = self.0[0] / b.0[0];
        let mut r = self - b * Qd::from_f64(q0);
        let q1 = r.0[0] / b.0[0];
        r -= b * Qd::from_f64(q1);
        let q2 = r.0[0] / b.0[0];
        r -= b * Qd::from_f64(q2);
        let q3 = r.0[0] / b.0[0];
        r -= b * Qd::from_f64(q3);
        let q4 = r.0[0] / b.0[0];
        renorm(q0, q1, q2, q3, q4)
    }
}

macro_rules! assign_ops {
    ($($tr:ident $m:ident $op:tt),*) => {$(
        impl $tr for Qd {
            #[inline]
            fn $m(&mut self, b: Qd) { *self = *self $op b; }
        }
    )*};
}
assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /);

impl PartialOrd for Qd {
    fn partial_cmp(&self, o: &Qd) -> Option<Ordering> {
        (*self - *o).0[0].partial_cmp(&0.0)
    }
}
