//! Working-precision numbers.
//!
//! Arithmetic is carried in quad-double (about 62 significant digits).
//! [`Prec`] only selects the zero threshold and how many digits are
//! printed, so it must not exceed [`Prec::MAX_DIGITS`].

mod cx;
mod qd;

pub use cx::Cx;
pub use qd::Qd;

/// Working precision in decimal digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Prec(u32);

impl Prec {
    pub const DEFAULT_DIGITS: u32 = 50;
    pub const MIN_DIGITS: u32 = 16;
    pub const MAX_DIGITS: u32 = 60;

    /// Clamps to the supported range.
    pub fn new(digits: u32) -> Prec {
        Prec(digits.clamp(Self::MIN_DIGITS, Self::MAX_DIGITS))
    }

    pub fn digits(self) -> u32 {
        self.0
    }

    /// Zero threshold `10^-(p-10)`.
    pub fn eps(self) -> f64 {
        libm::pow(10.0, -((self.0 as f64) - 10.0))
    }

    /// The looser of two precisions, used when combining operands.
    pub fn join(self, o: Prec) -> Prec {
        Prec(self.0.min(o.0))
    }
}

impl Default for Prec {
    fn default() -> Prec {
        Prec(Self::DEFAULT_DIGITS)
    }
}
