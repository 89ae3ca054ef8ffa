//! Exact rationals and the dual numbers `x + y·ε` with `ε² = 0`.
//!
//! [`Dual`] is generic over its component type. With [`Rational`]
//! components it is the exact scalar used by every recurrence in this
//! crate ([`DualScalar`]); with `Complex64` components it is the
//! dual-complex kind consumed by the elliptic layer through the
//! [`SmoothScalar`] contract.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always reduced with a positive denominator.
pub type Rational = BigRational;

/// The exact dual scalar `even + odd·ε`.
pub type DualScalar = Dual<Rational>;

/// Dual-complex floating scalar.
pub type DualComplex = Dual<Complex64>;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n/d` in lowest terms. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Returns `Some(q)` with `q² = r` when `r` is the square of a rational.
pub fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

/// An element `even + odd·ε` of the dual numbers over `T`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Dual<T> {
    pub even: T,
    pub odd: T,
}

impl<T> Dual<T> {
    pub const fn new(even: T, odd: T) -> Self {
        Dual { even, odd }
    }
}

impl<T: Zero> Dual<T> {
    /// A pure even element.
    pub fn from_even(even: T) -> Self {
        Dual {
            even,
            odd: T::zero(),
        }
    }

    /// `x ε`.
    pub fn from_odd(odd: T) -> Self {
        Dual {
            even: T::zero(),
            odd,
        }
    }

    /// Units are exactly the elements with nonzero even part.
    pub fn is_unit(&self) -> bool {
        !self.even.is_zero()
    }
}

impl<T> Add for Dual<T>
where
    T: Add<Output = T>,
{
    type Output = Dual<T>;
    fn add(self, rhs: Dual<T>) -> Dual<T> {
        Dual::new(self.even + rhs.even, self.odd + rhs.odd)
    }
}

impl<T> Sub for Dual<T>
where
    T: Sub<Output = T>,
{
    type Output = Dual<T>;
    fn sub(self, rhs: Dual<T>) -> Dual<T> {
        Dual::new(self.even - rhs.even, self.odd - rhs.odd)
    }
}

impl<T> Mul for Dual<T>
where
    T: Clone + Add<Output = T> + Mul<Output = T>,
{
    type Output = Dual<T>;
    fn mul(self, rhs: Dual<T>) -> Dual<T> {
        let odd = self.even.clone() * rhs.odd + self.odd * rhs.even.clone();
        Dual::new(self.even * rhs.even, odd)
    }
}

/// Division by a unit: `(a + bε)/(c + dε) = a/c + (bc − ad)/c² ε`.
///
/// Panics (through the component type) when the divisor is not a unit; exact
/// code paths go through [`DualScalar::checked_inv`] instead.
impl<T> Div for Dual<T>
where
    T: Clone + Sub<Output = T> + Mul<Output = T> + Div<Output = T>,
{
    type Output = Dual<T>;
    fn div(self, rhs: Dual<T>) -> Dual<T> {
        let c2 = rhs.even.clone() * rhs.even.clone();
        let odd = (self.odd * rhs.even.clone() - self.even.clone() * rhs.odd) / c2;
        Dual::new(self.even / rhs.even, odd)
    }
}

impl<T: Neg<Output = T>> Neg for Dual<T> {
    type Output = Dual<T>;
    fn neg(self) -> Dual<T> {
        Dual::new(-self.even, -self.odd)
    }
}

macro_rules! forward_ref_binop {
    ($tr:ident, $method:ident, $($bound:tt)+) => {
        impl<'a, T> $tr<&'a Dual<T>> for &'a Dual<T>
        where
            T: Clone + $($bound)+,
        {
            type Output = Dual<T>;
            fn $method(self, rhs: &'a Dual<T>) -> Dual<T> {
                $tr::$method(self.clone(), rhs.clone())
            }
        }
    };
}

forward_ref_binop!(Add, add, Add<Output = T>);
forward_ref_binop!(Sub, sub, Sub<Output = T>);
forward_ref_binop!(Mul, mul, Add<Output = T> + Mul<Output = T>);
forward_ref_binop!(
    Div,
    div,
    Sub<Output = T> + Mul<Output = T> + Div<Output = T>
);

impl<T: Clone + Neg<Output = T>> Neg for &Dual<T> {
    type Output = Dual<T>;
    fn neg(self) -> Dual<T> {
        -self.clone()
    }
}

impl<T: Clone + Add<Output = T>> AddAssign for Dual<T> {
    fn add_assign(&mut self, rhs: Dual<T>) {
        *self = self.clone() + rhs;
    }
}

impl<T: Clone + Sub<Output = T>> SubAssign for Dual<T> {
    fn sub_assign(&mut self, rhs: Dual<T>) {
        *self = self.clone() - rhs;
    }
}

impl<T: Clone + Add<Output = T> + Mul<Output = T>> MulAssign for Dual<T> {
    fn mul_assign(&mut self, rhs: Dual<T>) {
        *self = self.clone() * rhs;
    }
}

impl<T: Clone + Zero> Zero for Dual<T> {
    fn zero() -> Self {
        Dual::new(T::zero(), T::zero())
    }
    fn is_zero(&self) -> bool {
        self.even.is_zero() && self.odd.is_zero()
    }
}

impl<T: Clone + Zero + One + Add<Output = T> + Mul<Output = T>> One for Dual<T> {
    fn one() -> Self {
        Dual::new(T::one(), T::zero())
    }
}

impl DualScalar {
    pub fn from_int(n: i64) -> Self {
        Dual::from_even(int(n))
    }

    pub fn from_ints(even: i64, odd: i64) -> Self {
        Dual::new(int(even), int(odd))
    }

    /// `x⁻¹(1 − x⁻¹yε)`; fails with `VanishingEvenPart` on zero divisors.
    pub fn checked_inv(&self) -> Result<Self> {
        if self.even.is_zero() {
            return Err(Error::vanishing());
        }
        let inv = self.even.recip();
        let odd = -(&inv * &inv * &self.odd);
        Ok(Dual::new(inv, odd))
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        Ok(self * &rhs.checked_inv()?)
    }

    /// Scale both components by a rational.
    pub fn scale(&self, c: &Rational) -> Self {
        Dual::new(&self.even * c, &self.odd * c)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = DualScalar::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn to_complex(&self) -> DualComplex {
        Dual::new(
            Complex64::new(rat_to_f64(&self.even), 0.0),
            Complex64::new(rat_to_f64(&self.odd), 0.0),
        )
    }
}

/// Ring product of two exact dual scalars.
pub fn dual_mul(a: &DualScalar, b: &DualScalar) -> DualScalar {
    a * b
}

/// Reciprocal of a unit.
pub fn dual_inv(a: &DualScalar) -> Result<DualScalar> {
    a.checked_inv()
}

/// Parse the textual form `rat`, `rat±rat e` or `rat e`.
pub fn dual_parse(text: &str) -> Result<DualScalar> {
    let bytes = text.as_bytes();
    let mut pos = 0;
    let first = parse_rational(bytes, &mut pos)?;
    if pos == bytes.len() {
        return Ok(Dual::from_even(first));
    }
    match bytes[pos] {
        b'e' => {
            pos += 1;
            expect_end(bytes, pos)?;
            Ok(Dual::from_odd(first))
        }
        sign @ (b'+' | b'-') => {
            pos += 1;
            let mut second = parse_rational(bytes, &mut pos)?;
            if sign == b'-' {
                second = -second;
            }
            if pos >= bytes.len() || bytes[pos] != b'e' {
                return Err(parse_err(pos, "expected 'e' after the odd part"));
            }
            pos += 1;
            expect_end(bytes, pos)?;
            Ok(Dual::new(first, second))
        }
        _ => Err(parse_err(pos, "expected '+', '-', 'e' or end of input")),
    }
}

fn parse_err(position: usize, message: &str) -> Error {
    Error::Parse {
        position,
        message: message.to_string(),
    }
}

fn expect_end(bytes: &[u8], pos: usize) -> Result<()> {
    if pos == bytes.len() {
        Ok(())
    } else {
        Err(parse_err(pos, "trailing characters"))
    }
}

fn parse_digits(bytes: &[u8], pos: &mut usize) -> Result<BigInt> {
    let start = *pos;
    while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if *pos == start {
        return Err(parse_err(start, "expected digits"));
    }
    // the slice is pure ASCII digits
    let s = std::str::from_utf8(&bytes[start..*pos]).expect("ascii digits");
    Ok(s.parse::<BigInt>().expect("digit string parses"))
}

fn parse_rational(bytes: &[u8], pos: &mut usize) -> Result<Rational> {
    let negative = *pos < bytes.len() && bytes[*pos] == b'-';
    if negative {
        *pos += 1;
    }
    let numer = parse_digits(bytes, pos)?;
    let denom = if *pos < bytes.len() && bytes[*pos] == b'/' {
        *pos += 1;
        let at = *pos;
        let d = parse_digits(bytes, pos)?;
        if d.is_zero() {
            return Err(parse_err(at, "zero denominator"));
        }
        d
    } else {
        BigInt::one()
    };
    let r = Rational::new(numer, denom);
    Ok(if negative { -r } else { r })
}

impl FromStr for DualScalar {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        dual_parse(s)
    }
}

/// Canonical text form; `dual_parse` inverts it exactly.
impl fmt::Display for DualScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.odd.is_zero() {
            write!(f, "{}", self.even)
        } else if self.even.is_zero() {
            write!(f, "{}e", self.odd)
        } else if self.odd.is_negative() {
            write!(f, "{}-{}e", self.even, -&self.odd)
        } else {
            write!(f, "{}+{}e", self.even, self.odd)
        }
    }
}

/// Scalars the elliptic layer can run on: plain complex floats, or
/// dual-complex pairs carrying a first-order perturbation.
///
/// Branch decisions (square-root signs, lattice reduction, series
/// truncation) are taken on [`SmoothScalar::base`], so both instantiations
/// follow the same path and the odd part is the derivative of the even part.
pub trait SmoothScalar:
    Clone
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Short name of the scalar kind, used in reports.
    const KIND: &'static str;

    /// Embed a constant. The odd part of a dual embedding is zero.
    fn constant(c: Complex64) -> Self;

    /// Build from explicit components; plain complex drops `odd`.
    fn from_parts(even: Complex64, odd: Complex64) -> Self;

    /// The even (value) component.
    fn base(&self) -> Complex64;

    /// The odd (first-order) component; zero for plain complex.
    fn perturbation(&self) -> Complex64;

    /// Principal square root of the base, first-order rule on the odd part.
    fn sqrt(&self) -> Self;

    fn exp(&self) -> Self;

    /// Principal logarithm of the base, first-order rule on the odd part.
    fn ln(&self) -> Self;

    fn real(x: f64) -> Self {
        Self::constant(Complex64::new(x, 0.0))
    }

    fn magnitude(&self) -> f64 {
        self.base().norm()
    }

    fn is_finite(&self) -> bool {
        let b = self.base();
        let p = self.perturbation();
        b.re.is_finite() && b.im.is_finite() && p.re.is_finite() && p.im.is_finite()
    }

    fn scale(&self, c: Complex64) -> Self {
        self.clone() * Self::constant(c)
    }

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }

    /// Integer power by repeated squaring; negative powers go through division.
    fn powi(&self, k: i64) -> Self {
        let mut base = self.clone();
        let mut e = k.unsigned_abs();
        let mut acc = Self::real(1.0);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.square();
            e >>= 1;
        }
        if k < 0 {
            Self::real(1.0) / acc
        } else {
            acc
        }
    }
}

impl SmoothScalar for Complex64 {
    const KIND: &'static str = "complex";
    fn constant(c: Complex64) -> Self {
        c
    }
    fn from_parts(even: Complex64, _odd: Complex64) -> Self {
        even
    }
    fn base(&self) -> Complex64 {
        *self
    }
    fn perturbation(&self) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
    fn sqrt(&self) -> Self {
        Complex64::sqrt(*self)
    }
    fn exp(&self) -> Self {
        Complex64::exp(*self)
    }
    fn ln(&self) -> Self {
        Complex64::ln(*self)
    }
}

impl SmoothScalar for DualComplex {
    const KIND: &'static str = "dual-complex";
    fn constant(c: Complex64) -> Self {
        Dual::new(c, Complex64::new(0.0, 0.0))
    }
    fn from_parts(even: Complex64, odd: Complex64) -> Self {
        Dual::new(even, odd)
    }
    fn base(&self) -> Complex64 {
        self.even
    }
    fn perturbation(&self) -> Complex64 {
        self.odd
    }
    fn sqrt(&self) -> Self {
        let r = self.even.sqrt();
        Dual::new(r, self.odd / (r * 2.0))
    }
    fn exp(&self) -> Self {
        let e = self.even.exp();
        Dual::new(e, e * self.odd)
    }
    fn ln(&self) -> Self {
        Dual::new(self.even.ln(), self.odd / self.even)
    }
}
