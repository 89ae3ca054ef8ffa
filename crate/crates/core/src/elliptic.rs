//! Numerical Weierstrass functions and the sigma-function form of Somos-4
//! orbits,
//!
//! ```text
//! x_n = A Bⁿ σ(z₀ + n z) / σ(z)^{n²},   ℘(z) = λ,   ℘(z₀) = λ − d₀,
//! ```
//!
//! over complex floats or dual-complex pairs. The curve data `λ, g₂, g₃`
//! are exact; everything downstream is floating point and only ever used to
//! check the exact layer.
//!
//! σ, ζ and ℘ go through the Jacobi theta series after the period lattice
//! has been computed (complex AGM) and Gauss-reduced, so the nome satisfies
//! `|q| ≤ e^{−π√3/2}` and a fixed number of terms suffices. All branch
//! decisions read the even part only, so the dual instantiation follows the
//! same path and its odd part is a directional derivative.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::dualnum::{int, rat_to_f64, DualComplex, DualScalar, Rational, SmoothScalar};
use crate::error::{Error, Result};
use crate::shadow::shadow_iii_from_map;
use crate::somos::{dtoda_step, j_dual, j_even, MapState, SomosOrbit};

const THETA_TERMS: usize = 12;

/// End-to-end sequence tolerance.
pub const SEQUENCE_TOL: f64 = 1e-6;
/// Tolerance for the coefficient identities.
pub const COEFF_TOL: f64 = 1e-7;
/// Per-component tolerance for dual orbits.
pub const DUAL_TOL: f64 = 1e-5;

/// Exact scalars the curve data can be built from.
pub trait ExactScalar: Clone {
    fn lift<T: SmoothScalar>(&self) -> T;
    fn even_is_zero(&self) -> bool;
    fn to_dual(&self) -> DualScalar;
}

impl ExactScalar for Rational {
    fn lift<T: SmoothScalar>(&self) -> T {
        T::real(rat_to_f64(self))
    }
    fn even_is_zero(&self) -> bool {
        self.is_zero()
    }
    fn to_dual(&self) -> DualScalar {
        DualScalar::from_even(self.clone())
    }
}

impl ExactScalar for DualScalar {
    fn lift<T: SmoothScalar>(&self) -> T {
        T::from_parts(
            Complex64::new(rat_to_f64(&self.even), 0.0),
            Complex64::new(rat_to_f64(&self.odd), 0.0),
        )
    }
    fn even_is_zero(&self) -> bool {
        self.even.is_zero()
    }
    fn to_dual(&self) -> DualScalar {
        self.clone()
    }
}

/// `λ`, `g₂`, `g₃` and the discriminant `g₂³ − 27g₃²`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveData<S = Rational> {
    pub lambda: S,
    pub g2: S,
    pub g3: S,
    pub disc: S,
}

/// `λ = (J²/4 − β)/(3α)`, `g₂ = 12λ² − 2J`, `g₃ = 4λ³ − g₂λ − α`.
pub fn curve_data(alpha0: &Rational, beta0: &Rational, j0: &Rational) -> Result<CurveData> {
    if alpha0.is_zero() {
        return Err(Error::DegenerateAlpha);
    }
    let lambda = (j0 * j0 / int(4) - beta0) / (int(3) * alpha0);
    let g2 = int(12) * &lambda * &lambda - int(2) * j0;
    let g3 = int(4) * &lambda * &lambda * &lambda - &g2 * &lambda - alpha0;
    let disc = &g2 * &g2 * &g2 - int(27) * &g3 * &g3;
    Ok(CurveData {
        lambda,
        g2,
        g3,
        disc,
    })
}

/// [`curve_data`] over the dual rationals.
pub fn dual_curve_data(
    alpha: &DualScalar,
    beta: &DualScalar,
    j: &DualScalar,
) -> Result<CurveData<DualScalar>> {
    if alpha.even.is_zero() {
        return Err(Error::DegenerateAlpha);
    }
    let c = |n: i64| DualScalar::from_int(n);
    let lambda = (&(j * j).scale(&Rational::new(1.into(), 4.into())) - beta)
        .checked_div(&(&c(3) * alpha))?;
    let g2 = &(&c(12) * &(&lambda * &lambda)) - &j.scale(&int(2));
    let g3 = &(&(&c(4) * &(&lambda * &(&lambda * &lambda))) - &(&g2 * &lambda)) - alpha;
    let disc = &(&g2 * &(&g2 * &g2)) - &(&c(27) * &(&g3 * &g3));
    Ok(CurveData {
        lambda,
        g2,
        g3,
        disc,
    })
}

fn cst<T: SmoothScalar>(c: Complex64) -> T {
    T::constant(c)
}

fn i_unit() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

/// Roots of `4x³ − g₂x − g₃` by simultaneous iteration and Newton polish.
fn cubic_roots(g2: Complex64, g3: Complex64) -> [Complex64; 3] {
    let (p, q) = (-g2 / 4.0, -g3 / 4.0);
    let f = |x: Complex64| x * x * x + p * x + q;
    let scale = 1.0 + p.norm().sqrt().max(q.norm().cbrt());
    let seed = Complex64::new(0.4, 0.9);
    let mut r = [
        seed * scale,
        seed * seed * scale,
        seed * seed * seed * scale,
    ];
    for _ in 0..500 {
        let mut delta: f64 = 0.0;
        for i in 0..3 {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..3 {
                if j != i {
                    den *= r[i] - r[j];
                }
            }
            let step = f(r[i]) / den;
            r[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta <= 1e-17 * scale {
            break;
        }
    }
    for x in r.iter_mut() {
        for _ in 0..3 {
            let d = *x * *x * 3.0 + p;
            if d.norm() > 0.0 {
                *x -= f(*x) / d;
            }
        }
    }
    r
}

/// `r` rounded to a multiple of `2^-bits`.
fn round_dyadic(r: &Rational, bits: u32) -> Rational {
    let scale = Rational::from_integer(num_bigint::BigInt::one() << bits);
    (r * &scale).round() / scale
}

/// Roots of `4x³ − g₂x − g₃` for exact dual `g₂, g₃`.
///
/// The real root farthest from the other two is refined in rational
/// arithmetic; the remaining pair comes from the deflated quadratic
/// `x² + e₁x + e₁² − g₂/4`, whose discriminant `g₂ − 3e₁²` is formed exactly.
/// This keeps nearly coincident roots (a nearly singular curve) accurate to
/// working precision, including exact conjugate symmetry. Odd parts follow
/// from `e' = (g₂'e + g₃')/(12e² − g₂)`.
pub fn exact_roots<T: SmoothScalar>(g2: &DualScalar, g3: &DualScalar) -> Result<[T; 3]> {
    let (g2e, g3e) = (&g2.even, &g3.even);
    let approx = cubic_roots(
        Complex64::new(rat_to_f64(g2e), 0.0),
        Complex64::new(rat_to_f64(g3e), 0.0),
    );
    let spread = |i: usize| {
        (0..3)
            .filter(|&j| j != i)
            .map(|j| (approx[i] - approx[j]).norm())
            .fold(f64::INFINITY, f64::min)
    };
    let scale = approx.iter().map(|r| r.norm()).fold(1.0, f64::max);
    let real: Vec<usize> = (0..3)
        .filter(|&i| approx[i].im.abs() <= 1e-6 * scale)
        .collect();
    let pick = real
        .iter()
        .copied()
        .max_by(|&a, &b| spread(a).total_cmp(&spread(b)))
        .ok_or_else(|| Error::Domain("cubic with real coefficients has no real root".into()))?;
    let mut e1 = Rational::from_float(approx[pick].re)
        .ok_or_else(|| Error::Domain("non-finite cubic root".into()))?;
    let four = int(4);
    for _ in 0..3 {
        let p = &four * &e1 * &e1 * &e1 - g2e * &e1 - g3e;
        let dp = int(12) * &e1 * &e1 - g2e;
        if dp.is_zero() {
            break;
        }
        e1 = round_dyadic(&(&e1 - p / dp), 240);
    }
    let q = g2e - int(3) * &e1 * &e1;
    let dp1 = int(12) * &e1 * &e1 - g2e;
    if dp1.is_zero() || q.is_zero() {
        return Err(Error::SingularCurve);
    }
    let e1_odd = (&g2.odd * &e1 + &g3.odd) / &dp1;
    let r = &g3.odd - &g2.odd * &e1 / int(2);
    let qf = rat_to_f64(&q);
    let root_q = if qf >= 0.0 {
        Complex64::new(qf.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-qf).sqrt())
    };
    let (e1f, rf, g2o) = (rat_to_f64(&e1), rat_to_f64(&r), rat_to_f64(&g2.odd));
    let pair = [1.0, -1.0].map(|sign| {
        let even = Complex64::new(-e1f / 2.0, 0.0) + root_q * (sign / 2.0);
        let num = Complex64::new(rf, 0.0) + root_q * (sign * g2o / 2.0);
        let den = Complex64::new(2.0 * qf, 0.0) - root_q * (6.0 * sign * e1f);
        T::from_parts(even, num / den)
    });
    let [a, b] = pair;
    Ok([
        T::from_parts(
            Complex64::new(e1f, 0.0),
            Complex64::new(rat_to_f64(&e1_odd), 0.0),
        ),
        a,
        b,
    ])
}

/// Arithmetic-geometric mean with the optimal sign choice at every step.
fn agm<T: SmoothScalar>(mut a: T, mut b: T) -> T {
    let mut extra = 0;
    for _ in 0..80 {
        let (ab, bb) = (a.base(), b.base());
        if (ab - bb).norm() <= 1e-15 * ab.norm() {
            extra += 1;
            if extra > 3 {
                break;
            }
        }
        let a1 = (a.clone() + b.clone()).scale(Complex64::new(0.5, 0.0));
        let mut b1 = (a * b).sqrt();
        if (a1.base() - b1.base()).norm() > (a1.base() + b1.base()).norm() {
            b1 = -b1;
        }
        a = a1;
        b = b1;
    }
    a
}

/// Coordinates of `z` in the real basis `(w1, w3)`.
fn coordinates(z: Complex64, w1: Complex64, w3: Complex64) -> (f64, f64) {
    let s = (z * w3.conj()).im / (w1 * w3.conj()).im;
    let t = (z * w1.conj()).im / (w3 * w1.conj()).im;
    (s, t)
}

/// Gauss reduction of a lattice basis; returns `(w1, w3)` with `τ = w3/w1`
/// in the standard fundamental domain.
fn gauss_reduce<T: SmoothScalar>(mut w1: T, mut w3: T) -> (T, T) {
    for _ in 0..200 {
        if w3.base().norm() < w1.base().norm() {
            std::mem::swap(&mut w1, &mut w3);
        }
        let m = ((w3.base() * w1.base().conj()).re / w1.base().norm_sqr()).round();
        if m == 0.0 {
            break;
        }
        w3 = w3 - w1.scale(Complex64::new(m, 0.0));
    }
    if (w3.base() / w1.base()).im < 0.0 {
        w3 = -w3;
    }
    (w1, w3)
}

/// Carlson's symmetric integral `R_F(x, y, z)` by duplication.
pub fn carlson_rf(mut x: Complex64, mut y: Complex64, mut z: Complex64) -> Complex64 {
    for _ in 0..200 {
        let a = (x + y + z) / 3.0;
        let dev = (x - a).norm().max((y - a).norm()).max((z - a).norm());
        if dev <= 1e-4 * a.norm() {
            break;
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * sy + sx * sz + sy * sz;
        x = (x + lam) / 4.0;
        y = (y + lam) / 4.0;
        z = (z + lam) / 4.0;
    }
    let a = (x + y + z) / 3.0;
    let xx = Complex64::new(1.0, 0.0) - x / a;
    let yy = Complex64::new(1.0, 0.0) - y / a;
    let zz = -(xx + yy);
    let e2 = xx * yy - zz * zz;
    let e3 = xx * yy * zz;
    (Complex64::new(1.0, 0.0) - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - e2 * e3 * (3.0 / 44.0))
        / a.sqrt()
}

/// Weierstrass functions for one lattice, given by `g₂, g₃`.
#[derive(Clone, Debug)]
pub struct Weierstrass<T> {
    pub g2: T,
    pub g3: T,
    pub roots: [T; 3],
    /// Half periods with `Im(ω₃/ω₁) > 0`, Gauss-reduced.
    pub omega1: T,
    pub omega3: T,
    pub eta1: T,
    pub eta3: T,
    /// `iπτ n(n+1)`, the exponents of the rescaled theta series.
    exponents: Vec<T>,
    theta1p0: T,
}

impl<T: SmoothScalar> Weierstrass<T> {
    pub fn new(g2: T, g3: T) -> Result<Self> {
        if !g2.is_finite() || !g3.is_finite() {
            return Err(Error::Domain("non-finite invariants".into()));
        }
        let (g2b, g3b) = (g2.base(), g3.base());
        let disc = g2b * g2b * g2b - g3b * g3b * 27.0;
        let scale = 1.0 + g2b.norm().powf(1.5) + g3b.norm();
        if disc.norm() <= 1e-13 * scale * scale {
            return Err(Error::SingularCurve);
        }
        let roots = cubic_roots(g2b, g3b).map(|r| {
            let x: T = cst(r);
            let p = x.clone() * x.clone() * x.clone() * T::real(4.0)
                - g2.clone() * x.clone()
                - g3.clone();
            let dp = x.clone() * x.clone() * T::real(12.0) - g2.clone();
            x - p / dp
        });
        Self::with_roots(g2, g3, roots)
    }

    /// Lattice from invariants whose cubic roots are already known.
    pub fn with_roots(g2: T, g3: T, roots: [T; 3]) -> Result<Self> {
        let spread = (0..3)
            .flat_map(|i| (i + 1..3).map(move |j| (i, j)))
            .map(|(i, j)| (roots[i].base() - roots[j].base()).norm())
            .fold(f64::INFINITY, f64::min);
        let size = roots.iter().map(|r| r.base().norm()).fold(1.0, f64::max);
        // written negated so that a NaN spread also counts as singular
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(spread > 1e-14 * size) {
            return Err(Error::SingularCurve);
        }

        let mut candidates: Vec<T> = Vec::new();
        for (i, j, k) in [
            (0, 1, 2),
            (0, 2, 1),
            (1, 0, 2),
            (1, 2, 0),
            (2, 0, 1),
            (2, 1, 0),
        ] {
            let a = (roots[i].clone() - roots[k].clone()).sqrt();
            let mut b = (roots[i].clone() - roots[j].clone()).sqrt();
            if (a.base() - b.base()).norm() > (a.base() + b.base()).norm() {
                b = -b;
            }
            let m = agm(a, b);
            let w = T::real(PI) / m;
            if w.is_finite() && w.base().norm() > 0.0 {
                candidates.push(w);
            }
        }
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..candidates.len() {
            for b in a + 1..candidates.len() {
                let (wa, wb) = (candidates[a].base(), candidates[b].base());
                let area = (wa.conj() * wb).im.abs();
                if area <= 1e-8 * wa.norm() * wb.norm() {
                    continue;
                }
                if best.is_none_or(|(m, _, _)| area < m * (1.0 - 1e-9)) {
                    best = Some((area, a, b));
                }
            }
        }
        let (_, a, b) = best
            .ok_or_else(|| Error::Domain("period computation found no independent pair".into()))?;
        let (w1, w3) = gauss_reduce(candidates[a].clone(), candidates[b].clone());
        let half = Complex64::new(0.5, 0.0);
        let (omega1, omega3) = (w1.scale(half), w3.scale(half));
        let tau = omega3.clone() / omega1.clone();
        if tau.base().im > 100.0 {
            return Err(Error::Domain(
                "lattice too elongated for the theta series".into(),
            ));
        }
        let exponents: Vec<T> = (0..THETA_TERMS)
            .map(|n| tau.scale(i_unit() * PI * (n * (n + 1)) as f64))
            .collect();
        let mut theta1p0 = T::real(0.0);
        let mut theta3p0 = T::real(0.0);
        for (n, e) in exponents.iter().enumerate() {
            let sign = if n % 2 == 0 { 2.0 } else { -2.0 };
            let q = e.exp();
            let k = (2 * n + 1) as f64;
            theta1p0 = theta1p0 + q.scale(Complex64::new(sign * k, 0.0));
            theta3p0 = theta3p0 - q.scale(Complex64::new(sign * k * k * k, 0.0));
        }
        let eta1 = -(theta3p0 / theta1p0.clone()).scale(Complex64::new(PI * PI / 12.0, 0.0))
            / omega1.clone();
        let eta3 = (eta1.clone() * omega3.clone() - cst(i_unit() * (PI / 2.0))) / omega1.clone();
        let w = Weierstrass {
            g2,
            g3,
            roots,
            omega1,
            omega3,
            eta1,
            eta3,
            exponents,
            theta1p0,
        };
        w.check_half_periods()?;
        Ok(w)
    }

    /// `℘` at the three half periods must reproduce the roots.
    fn check_half_periods(&self) -> Result<()> {
        let scale = 1.0
            + self
                .roots
                .iter()
                .map(|r| r.base().norm())
                .fold(0.0, f64::max);
        let points = [
            self.omega1.clone(),
            self.omega3.clone(),
            self.omega1.clone() + self.omega3.clone(),
        ];
        for p in points {
            let v = self.wp(&p)?.base();
            let close = self
                .roots
                .iter()
                .map(|r| (r.base() - v).norm())
                .fold(f64::INFINITY, f64::min);
            if close > 1e-8 * scale {
                return Err(Error::Domain(format!(
                    "period lattice check failed (half-period value off by {close:e})"
                )));
            }
        }
        Ok(())
    }

    /// The same lattice with odd parts dropped.
    pub fn base_view(&self) -> Weierstrass<Complex64> {
        Weierstrass {
            g2: self.g2.base(),
            g3: self.g3.base(),
            roots: [
                self.roots[0].base(),
                self.roots[1].base(),
                self.roots[2].base(),
            ],
            omega1: self.omega1.base(),
            omega3: self.omega3.base(),
            eta1: self.eta1.base(),
            eta3: self.eta3.base(),
            exponents: self.exponents.iter().map(|e| e.base()).collect(),
            theta1p0: self.theta1p0.base(),
        }
    }

    fn v_factor(&self) -> T {
        T::real(PI / 2.0) / self.omega1.clone()
    }

    /// `θ₁` and its first three derivatives at `v`, rescaled by `q^{−1/4}`.
    fn theta(&self, v: &T) -> [T; 4] {
        let zero = || T::real(0.0);
        let mut out = [zero(), zero(), zero(), zero()];
        for (n, e) in self.exponents.iter().enumerate() {
            let k = (2 * n + 1) as f64;
            let arg = v.scale(i_unit() * k);
            let plus = (e.clone() + arg.clone()).exp();
            let minus = (e.clone() - arg).exp();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let s = (plus.clone() - minus.clone()).scale(Complex64::new(0.0, -sign));
            let c = (plus + minus).scale(Complex64::new(sign, 0.0));
            out[0] = out[0].clone() + s.clone();
            out[1] = out[1].clone() + c.scale(Complex64::new(k, 0.0));
            out[2] = out[2].clone() - s.scale(Complex64::new(k * k, 0.0));
            out[3] = out[3].clone() - c.scale(Complex64::new(k * k * k, 0.0));
        }
        out
    }

    /// Split `z = z_r + 2mω₁ + 2nω₃` with `z_r` in the centred period
    /// parallelogram.
    pub fn reduce(&self, z: &T) -> Result<(T, i64, i64)> {
        if !z.is_finite() {
            return Err(Error::Domain("non-finite argument".into()));
        }
        let (w1, w3) = (self.omega1.base() * 2.0, self.omega3.base() * 2.0);
        let (s, t) = coordinates(z.base(), w1, w3);
        if s.abs() > 1e6 || t.abs() > 1e6 {
            return Err(Error::Domain(format!(
                "argument {} is too far from the origin",
                z.base()
            )));
        }
        let (m, n) = (s.round(), t.round());
        let shift = self.omega1.scale(Complex64::new(2.0 * m, 0.0))
            + self.omega3.scale(Complex64::new(2.0 * n, 0.0));
        Ok((z.clone() - shift, m as i64, n as i64))
    }

    fn eta_of(&self, m: i64, n: i64) -> T {
        self.eta1.scale(Complex64::new(2.0 * m as f64, 0.0))
            + self.eta3.scale(Complex64::new(2.0 * n as f64, 0.0))
    }

    fn guard(&self, zr: &T) -> Result<()> {
        if zr.base().norm() <= 1e-12 * self.omega1.base().norm() {
            return Err(Error::Domain("argument is at a lattice point".into()));
        }
        Ok(())
    }

    /// σ straight from the theta series, without lattice reduction.
    pub fn sigma_series(&self, z: &T) -> T {
        let k = self.v_factor();
        let v = k.clone() * z.clone();
        let [t0, ..] = self.theta(&v);
        let gauss = (self.eta1.clone() * z.clone() * z.clone() / self.omega1.clone())
            .scale(Complex64::new(0.5, 0.0));
        gauss.exp() * t0 / (self.theta1p0.clone() * k)
    }

    pub fn sigma(&self, z: &T) -> Result<T> {
        let (zr, m, n) = self.reduce(z)?;
        let base = self.sigma_series(&zr);
        if m == 0 && n == 0 {
            return Ok(base);
        }
        let w = z.clone() - zr.clone();
        let factor = (self.eta_of(m, n) * (zr + w.scale(Complex64::new(0.5, 0.0)))).exp();
        let sign = if (m + n + m * n).rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        };
        Ok((factor * base).scale(Complex64::new(sign, 0.0)))
    }

    /// A logarithm of σ(z) (branch unspecified), free of the overflow that
    /// the quasi-periodic factor causes far from the origin.
    pub fn ln_sigma(&self, z: &T) -> Result<T> {
        let (zr, m, n) = self.reduce(z)?;
        let base = self.sigma_series(&zr);
        if base.base().norm() == 0.0 {
            return Err(Error::Domain("σ vanishes at a lattice point".into()));
        }
        let w = z.clone() - zr.clone();
        let mut out = base.ln() + self.eta_of(m, n) * (zr + w.scale(Complex64::new(0.5, 0.0)));
        if (m + n + m * n).rem_euclid(2) != 0 {
            out = out + cst(i_unit() * PI);
        }
        Ok(out)
    }

    pub fn zeta(&self, z: &T) -> Result<T> {
        let (zr, m, n) = self.reduce(z)?;
        self.guard(&zr)?;
        let k = self.v_factor();
        let [t0, t1, ..] = self.theta(&(k.clone() * zr.clone()));
        Ok(self.eta1.clone() * zr / self.omega1.clone() + k * t1 / t0 + self.eta_of(m, n))
    }

    pub fn wp(&self, z: &T) -> Result<T> {
        let (zr, _, _) = self.reduce(z)?;
        self.guard(&zr)?;
        let k = self.v_factor();
        let [t0, t1, t2, _] = self.theta(&(k.clone() * zr));
        let r1 = t1 / t0.clone();
        let log2 = t2 / t0 - r1.square();
        Ok(-(self.eta1.clone() / self.omega1.clone()) - k.square() * log2)
    }

    pub fn wp_prime(&self, z: &T) -> Result<T> {
        let (zr, _, _) = self.reduce(z)?;
        self.guard(&zr)?;
        let k = self.v_factor();
        let [t0, t1, t2, t3] = self.theta(&(k.clone() * zr));
        let (r1, r2, r3) = (t1 / t0.clone(), t2 / t0.clone(), t3 / t0);
        let log3 = r3 - (r2 * r1.clone()).scale(Complex64::new(3.0, 0.0))
            + r1.powi(3).scale(Complex64::new(2.0, 0.0));
        Ok(-(k.powi(3) * log3))
    }

    /// `℘'' = 6℘² − g₂/2`.
    pub fn wp_second(&self, z: &T) -> Result<T> {
        let p = self.wp(z)?;
        Ok(p.square().scale(Complex64::new(6.0, 0.0)) - self.g2.scale(Complex64::new(0.5, 0.0)))
    }

    /// Some `z` with `℘(z) = c`: Carlson integral or grid search on the
    /// even part, Newton polish, then one Newton step in `T` to lift the
    /// odd part.
    pub fn inverse_wp(&self, c: &T) -> Result<T> {
        let base = self.base_view();
        let cb = c.base();
        let zb = base.inverse_wp_base(cb)?;
        let z0: T = cst(zb);
        let (p, dp) = (self.wp(&z0)?, self.wp_prime(&z0)?);
        if dp.base().norm() <= 1e-10 * (1.0 + cb.norm()) {
            return Err(Error::Domain(
                "℘-preimage is a half period; odd part undefined".into(),
            ));
        }
        Ok(z0 - (p - c.clone()) / dp)
    }
}

impl Weierstrass<Complex64> {
    fn newton_polish(&self, mut z: Complex64, c: Complex64) -> Option<Complex64> {
        let tol = 1e-11 * (1.0 + c.norm());
        for _ in 0..60 {
            let p = self.wp(&z).ok()?;
            if (p - c).norm() <= tol * 1e-3 {
                break;
            }
            let dp = self.wp_prime(&z).ok()?;
            if dp.norm() == 0.0 {
                break;
            }
            let step = (p - c) / dp;
            z -= step;
            if step.norm() <= 1e-16 * self.omega1.norm() {
                break;
            }
        }
        let p = self.wp(&z).ok()?;
        ((p - c).norm() <= tol).then_some(z)
    }

    fn inverse_wp_base(&self, c: Complex64) -> Result<Complex64> {
        let [e1, e2, e3] = self.roots;
        let guess = carlson_rf(c - e1, c - e2, c - e3);
        if guess.re.is_finite() && guess.im.is_finite() {
            if let Some(z) = self.newton_polish(guess, c) {
                return Ok(z);
            }
        }
        let (w1, w3) = (self.omega1 * 2.0, self.omega3 * 2.0);
        let steps = 24;
        let mut seeds: Vec<(f64, Complex64)> = Vec::new();
        for a in 0..steps {
            for b in 0..steps {
                let s = (a as f64 + 0.5) / steps as f64 - 0.5;
                let t = (b as f64 + 0.5) / steps as f64 - 0.5;
                let z = w1 * s + w3 * t;
                if let Ok(p) = self.wp(&z) {
                    seeds.push(((p - c).norm(), z));
                }
            }
        }
        seeds.sort_by(|x, y| x.0.total_cmp(&y.0));
        for (_, z) in seeds.into_iter().take(8) {
            if let Some(z) = self.newton_polish(z, c) {
                return Ok(z);
            }
        }
        Err(Error::Domain(format!("no ℘-preimage found for {c}")))
    }
}

/// `℘(z)` on the lattice with invariants `g₂, g₃`.
pub fn wp<T: SmoothScalar>(z: &T, g2: &T, g3: &T) -> Result<T> {
    Weierstrass::new(g2.clone(), g3.clone())?.wp(z)
}

pub fn wp_prime<T: SmoothScalar>(z: &T, g2: &T, g3: &T) -> Result<T> {
    Weierstrass::new(g2.clone(), g3.clone())?.wp_prime(z)
}

pub fn zeta_w<T: SmoothScalar>(z: &T, g2: &T, g3: &T) -> Result<T> {
    Weierstrass::new(g2.clone(), g3.clone())?.zeta(z)
}

pub fn sigma_w<T: SmoothScalar>(z: &T, g2: &T, g3: &T) -> Result<T> {
    Weierstrass::new(g2.clone(), g3.clone())?.sigma(z)
}

/// A sigma-function parametrization of one orbit, based at index 0.
#[derive(Clone, Debug)]
pub struct EllipticChart<T> {
    pub lattice: Weierstrass<T>,
    pub lambda: T,
    pub z: T,
    pub z0: T,
    pub a: T,
    pub b: T,
    /// Whether `z`, `z₀` were negated relative to the raw ℘-preimages.
    pub flip_z: bool,
    pub flip_z0: bool,
    /// Worst relative mismatch at indices 2 and 3 for the chosen branch.
    pub residual: f64,
}

impl<T: SmoothScalar> EllipticChart<T> {
    pub fn kind(&self) -> &'static str {
        T::KIND
    }

    fn shifted(&self, n: i64) -> T {
        self.z0.clone() + self.z.scale(Complex64::new(n as f64, 0.0))
    }

    /// `A Bⁿ σ(z₀ + n z) / σ(z)^{n²}`, assembled in log form.
    pub fn predict(&self, n: i64) -> Result<T> {
        let l = &self.lattice;
        let (nf, n2) = (
            Complex64::new(n as f64, 0.0),
            Complex64::new((n * n) as f64, 0.0),
        );
        let log = self.a.ln() + self.b.ln().scale(nf) + l.ln_sigma(&self.shifted(n))?
            - l.ln_sigma(&self.z)?.scale(n2);
        Ok(log.exp())
    }

    /// `℘(z) − ℘(z₀ + n z)`.
    pub fn d(&self, n: i64) -> Result<T> {
        Ok(self.lambda.clone() - self.lattice.wp(&self.shifted(n))?)
    }

    /// `ζ(z₀ + (n+1)z) − ζ(z₀ + n z) − ζ(z)`.
    pub fn v(&self, n: i64) -> Result<T> {
        let l = &self.lattice;
        Ok(l.zeta(&self.shifted(n + 1))? - l.zeta(&self.shifted(n))? - l.zeta(&self.z)?)
    }

    /// `x_n (n ζ(z) + ζ(z₀) − ζ(z₀ + n z))` for a given `x_n`.
    pub fn zeta_shadow(&self, n: i64, x: T) -> Result<T> {
        let l = &self.lattice;
        let inner = l.zeta(&self.z)?.scale(Complex64::new(n as f64, 0.0)) + l.zeta(&self.z0)?
            - l.zeta(&self.shifted(n))?;
        Ok(x * inner)
    }
}

fn rel_err(pred: Complex64, exact: Complex64, floor: f64) -> f64 {
    (pred - exact).norm() / exact.norm().max(floor)
}

/// Error of a dual prediction, per component: the odd part is measured
/// against `max(|odd|, |even|)` of the exact value.
fn component_errors<T: SmoothScalar>(pred: &T, exact: &T) -> (f64, f64) {
    let even = rel_err(pred.base(), exact.base(), 1e-300);
    let scale = exact.perturbation().norm().max(exact.base().norm());
    let odd = (pred.perturbation() - exact.perturbation()).norm() / scale.max(1e-300);
    (even, odd)
}

/// Build a chart from exact curve data, recurrence coefficients and the
/// window `x₋₁, x₀, x₁, x₂`.
///
/// The four sign choices `(±z, ±z₀)` are scored by the relative mismatch of
/// the predicted `x₂` and `x₃` (the latter from one recurrence step); the
/// best one is kept if it is below [`SEQUENCE_TOL`].
pub fn uniformize<S: ExactScalar, T: SmoothScalar>(
    curve: &CurveData<S>,
    alpha: &S,
    beta: &S,
    window: &[S; 4],
) -> Result<EllipticChart<T>> {
    let chart = uniformize_best(curve, alpha, beta, window)?;
    if chart.residual > SEQUENCE_TOL {
        return Err(Error::BranchFailure {
            best: chart.residual,
        });
    }
    Ok(chart)
}

/// The best of the four branch choices, whatever its residual.
pub fn uniformize_best<S: ExactScalar, T: SmoothScalar>(
    curve: &CurveData<S>,
    alpha: &S,
    beta: &S,
    window: &[S; 4],
) -> Result<EllipticChart<T>> {
    if curve.disc.even_is_zero() {
        return Err(Error::SingularCurve);
    }
    let roots = exact_roots(&curve.g2.to_dual(), &curve.g3.to_dual())?;
    let lattice = Weierstrass::<T>::with_roots(curve.g2.lift(), curve.g3.lift(), roots)?;
    let lambda: T = curve.lambda.lift();
    let [xm, x0, x1, x2]: [T; 4] = [
        window[0].lift(),
        window[1].lift(),
        window[2].lift(),
        window[3].lift(),
    ];
    let (al, be): (T, T) = (alpha.lift(), beta.lift());
    let x3 = (al * x2.clone() * x0.clone() + be * x1.square()) / xm.clone();
    let d0 = x1.clone() * xm / x0.square();
    let z_raw = lattice.inverse_wp(&lambda)?;
    let z0_raw = lattice.inverse_wp(&(lambda.clone() - d0))?;

    let mut best: Option<EllipticChart<T>> = None;
    for (flip_z, flip_z0) in [(false, false), (false, true), (true, false), (true, true)] {
        let z = if flip_z {
            -z_raw.clone()
        } else {
            z_raw.clone()
        };
        let z0 = if flip_z0 {
            -z0_raw.clone()
        } else {
            z0_raw.clone()
        };
        let s0 = lattice.sigma(&z0)?;
        let a = x0.clone() / s0;
        let b = x1.clone() * lattice.sigma(&z)?
            / (a.clone() * lattice.sigma(&(z0.clone() + z.clone()))?);
        let mut chart = EllipticChart {
            lattice: lattice.clone(),
            lambda: lambda.clone(),
            z,
            z0,
            a,
            b,
            flip_z,
            flip_z0,
            residual: f64::INFINITY,
        };
        let mut worst: f64 = 0.0;
        for (n, exact) in [(2, &x2), (3, &x3)] {
            let (e, o) = component_errors(&chart.predict(n)?, exact);
            worst = worst.max(e).max(o);
        }
        chart.residual = if worst.is_nan() { f64::INFINITY } else { worst };
        if best.as_ref().is_none_or(|b| chart.residual < b.residual) {
            best = Some(chart);
        }
    }
    Ok(best.expect("four candidates"))
}

/// Decimal-string rendering of a complex or dual-complex value.
#[derive(Clone, Debug, Serialize)]
pub struct ScalarRepr {
    pub re: String,
    pub im: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub odd_re: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub odd_im: Option<String>,
}

fn dec(x: f64) -> String {
    format!("{x:.17e}")
}

impl ScalarRepr {
    pub fn of<T: SmoothScalar>(x: &T) -> Self {
        let (b, p) = (x.base(), x.perturbation());
        let dual = T::KIND == DualComplex::KIND;
        ScalarRepr {
            re: dec(b.re),
            im: dec(b.im),
            odd_re: dual.then(|| dec(p.re)),
            odd_im: dual.then(|| dec(p.im)),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ChartSummary {
    pub scalar_kind: &'static str,
    pub roots: Vec<ScalarRepr>,
    pub omega1: ScalarRepr,
    pub omega3: ScalarRepr,
    pub z: ScalarRepr,
    pub z0: ScalarRepr,
    pub a: ScalarRepr,
    pub b: ScalarRepr,
    pub flip_z: bool,
    pub flip_z0: bool,
    pub branch_residual: f64,
}

impl ChartSummary {
    pub fn of<T: SmoothScalar>(c: &EllipticChart<T>) -> Self {
        ChartSummary {
            scalar_kind: T::KIND,
            roots: c.lattice.roots.iter().map(ScalarRepr::of).collect(),
            omega1: ScalarRepr::of(&c.lattice.omega1),
            omega3: ScalarRepr::of(&c.lattice.omega3),
            z: ScalarRepr::of(&c.z),
            z0: ScalarRepr::of(&c.z0),
            a: ScalarRepr::of(&c.a),
            b: ScalarRepr::of(&c.b),
            flip_z: c.flip_z,
            flip_z0: c.flip_z0,
            branch_residual: c.residual,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CurveSummary {
    pub lambda: String,
    pub g2: String,
    pub g3: String,
    pub disc: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct IndexResidual {
    pub n: i64,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TermResidual {
    pub n: i64,
    pub exact: String,
    pub predicted: ScalarRepr,
    pub rel_err: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_err_odd: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoefficientResiduals {
    /// `σ(2z)²/σ(z)⁸` against α.
    pub ab_alpha: f64,
    /// `−σ(3z)/σ(z)⁹` against β.
    pub ab_beta: f64,
    /// `℘'(z)²` against α.
    pub sys_alpha: f64,
    /// `℘(2z) − ℘(z)` against β/α.
    pub sys_beta_over_alpha: f64,
    /// `℘''(z)` against J.
    pub sys_j: f64,
}

impl CoefficientResiduals {
    pub fn max(&self) -> f64 {
        [
            self.ab_alpha,
            self.ab_beta,
            self.sys_alpha,
            self.sys_beta_over_alpha,
            self.sys_j,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SignedResiduals {
    /// The overall sign that was applied to the analytic side.
    pub sign: i8,
    pub values: Vec<IndexResidual>,
    pub max: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DualSection {
    pub chart: ChartSummary,
    pub terms: Vec<TermResidual>,
    pub max_rel_err_even: f64,
    pub max_rel_err_odd: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SigmaReport {
    pub curve: CurveSummary,
    pub chart: ChartSummary,
    pub terms: Vec<TermResidual>,
    pub max_rel_err: f64,
    pub coefficients: CoefficientResiduals,
    pub d_residuals: Vec<IndexResidual>,
    pub max_d_residual: f64,
    /// Absent when the map route is unavailable for this orbit.
    pub v_residuals: Option<SignedResiduals>,
    pub zeta_shadow: Option<SignedResiduals>,
    pub dual: Option<DualSection>,
    pub passed: bool,
}

fn max_of(values: &[IndexResidual]) -> f64 {
    values.iter().map(|r| r.residual).fold(0.0, f64::max)
}

/// Compare `exact` against `±analytic` and keep the better sign.
fn signed(exact: &[(i64, f64)], analytic: &[Complex64]) -> SignedResiduals {
    let run = |s: f64| -> Vec<IndexResidual> {
        exact
            .iter()
            .zip(analytic)
            .map(|(&(n, e), a)| IndexResidual {
                n,
                residual: rel_err(*a * s, Complex64::new(e, 0.0), 1.0),
            })
            .collect()
    };
    let (plus, minus) = (run(1.0), run(-1.0));
    let (sign, values) = if max_of(&plus) <= max_of(&minus) {
        (1, plus)
    } else {
        (-1, minus)
    };
    let max = max_of(&values);
    SignedResiduals { sign, values, max }
}

fn rel_to(pred: Complex64, exact: f64) -> f64 {
    rel_err(pred, Complex64::new(exact, 0.0), 1e-300)
}

/// Check the sigma-function solution against an exact orbit over indices
/// `-1..=hi` (the orbit is extended as needed).
pub fn verify_sigma_solution(orbit: &SomosOrbit, hi: i64) -> Result<SigmaReport> {
    let mut orbit = orbit.clone();
    orbit.extend_to(-1, hi.max(3))?;
    let p = &orbit.params;
    let (a0, b0) = (p.alpha0().clone(), p.beta0().clone());
    let xs = orbit.even_window(-1)?;
    let j0 = j_even(&xs, &a0, &b0)?;
    let curve = curve_data(&a0, &b0, &j0)?;
    let chart: EllipticChart<Complex64> = uniformize(&curve, &a0, &b0, &xs)?;
    let x = |n: i64| -> Result<f64> { Ok(rat_to_f64(orbit.x(n)?)) };

    let mut terms = Vec::new();
    for n in -1..=hi {
        let pred = chart.predict(n)?;
        terms.push(TermResidual {
            n,
            exact: orbit.x(n)?.to_string(),
            predicted: ScalarRepr::of(&pred),
            rel_err: rel_to(pred, x(n)?),
            rel_err_odd: None,
        });
    }
    let max_rel_err = terms.iter().map(|t| t.rel_err).fold(0.0, f64::max);

    let l = &chart.lattice;
    let z = &chart.z;
    let sz = l.sigma(z)?;
    let (af, bf, jf) = (rat_to_f64(&a0), rat_to_f64(&b0), rat_to_f64(&j0));
    let coefficients = CoefficientResiduals {
        ab_alpha: rel_to(l.sigma(&(z * 2.0))?.powi(2) / sz.powi(8), af),
        ab_beta: rel_to(-l.sigma(&(z * 3.0))? / sz.powi(9), bf),
        sys_alpha: rel_to(l.wp_prime(z)?.powi(2), af),
        sys_beta_over_alpha: rel_to(l.wp(&(z * 2.0))? - l.wp(z)?, bf / af),
        sys_j: rel_to(l.wp_second(z)?, jf),
    };

    let mut d_residuals = Vec::new();
    for n in 0..hi {
        let exact = rat_to_f64(&crate::somos::ratios_d(&orbit, n)?);
        d_residuals.push(IndexResidual {
            n,
            residual: rel_err(chart.d(n)?, Complex64::new(exact, 0.0), 1.0),
        });
    }
    let max_d_residual = max_of(&d_residuals);

    let (v_residuals, zeta_shadow) = match MapState::from_orbit(&orbit) {
        Ok(map0) => {
            let mut state = map0.clone();
            let mut exact_v = Vec::new();
            let mut analytic_v = Vec::new();
            for n in 0..hi {
                exact_v.push((n, rat_to_f64(&state.v)));
                analytic_v.push(chart.v(n)?);
                state = dtoda_step(&state)?;
            }
            let y3 = shadow_iii_from_map(&orbit, &map0)?;
            let mut exact_y = Vec::new();
            let mut analytic_y = Vec::new();
            for n in 0..=hi {
                exact_y.push((n, rat_to_f64(y3.get(n)?)));
                analytic_y.push(chart.zeta_shadow(n, Complex64::new(x(n)?, 0.0))?);
            }
            (
                Some(signed(&exact_v, &analytic_v)),
                Some(signed(&exact_y, &analytic_y)),
            )
        }
        Err(Error::Consistency(_)) => (None, None),
        Err(e) => return Err(e),
    };

    let has_odd = orbit.iter().any(|(_, t)| !t.odd.is_zero())
        || !p.alpha1().is_zero()
        || !p.beta1().is_zero();
    let dual = if has_odd {
        Some(dual_section(&orbit, hi)?)
    } else {
        None
    };

    let passed = max_rel_err <= SEQUENCE_TOL
        && coefficients.max() <= COEFF_TOL
        && max_d_residual <= COEFF_TOL
        && v_residuals.as_ref().is_none_or(|r| r.max <= COEFF_TOL)
        && zeta_shadow.as_ref().is_none_or(|r| r.max <= SEQUENCE_TOL)
        && dual
            .as_ref()
            .is_none_or(|d| d.max_rel_err_even <= DUAL_TOL && d.max_rel_err_odd <= DUAL_TOL);

    Ok(SigmaReport {
        curve: CurveSummary {
            lambda: curve.lambda.to_string(),
            g2: curve.g2.to_string(),
            g3: curve.g3.to_string(),
            disc: curve.disc.to_string(),
        },
        chart: ChartSummary::of(&chart),
        terms,
        max_rel_err,
        coefficients,
        d_residuals,
        max_d_residual,
        v_residuals,
        zeta_shadow,
        dual,
        passed,
    })
}

/// The dual-complex chart of a dual orbit and its per-index errors.
pub fn dual_chart(orbit: &SomosOrbit) -> Result<EllipticChart<DualComplex>> {
    let window = orbit.window(-1)?;
    let p = &orbit.params;
    let j = j_dual(&window, p)?;
    let curve = dual_curve_data(&p.alpha, &p.beta, &j)?;
    uniformize(&curve, &p.alpha, &p.beta, &window)
}

fn dual_section(orbit: &SomosOrbit, hi: i64) -> Result<DualSection> {
    let chart = dual_chart(orbit)?;
    let mut terms = Vec::new();
    for n in -1..=hi {
        let exact = orbit.term(n)?;
        let pred = chart.predict(n)?;
        let (even, odd) = component_errors(&pred, &exact.lift::<DualComplex>());
        terms.push(TermResidual {
            n,
            exact: exact.to_string(),
            predicted: ScalarRepr::of(&pred),
            rel_err: even,
            rel_err_odd: Some(odd),
        });
    }
    Ok(DualSection {
        chart: ChartSummary::of(&chart),
        max_rel_err_even: terms.iter().map(|t| t.rel_err).fold(0.0, f64::max),
        max_rel_err_odd: terms
            .iter()
            .filter_map(|t| t.rel_err_odd)
            .fold(0.0, f64::max),
        terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dualnum::{dual_parse, rat, Dual};
    use crate::somos::SomosParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn classical_lattice() -> Weierstrass<Complex64> {
        Weierstrass::new(c(4.0, 0.0), c(-1.0, 0.0)).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn classical_curve_data() {
        let cd = curve_data(&int(1), &int(1), &int(4)).unwrap();
        assert_eq!(
            (cd.lambda, cd.g2, cd.g3, cd.disc),
            (int(1), int(4), int(-1), int(37))
        );
        let cd2 = curve_data(&int(1), &int(2), &int(4)).unwrap();
        assert_eq!(cd2.lambda, rat(2, 3));
        assert_eq!(cd2.g2, int(12) * rat(4, 9) - int(8));
        assert_eq!(cd2.g3, int(4) * rat(8, 27) - &cd2.g2 * rat(2, 3) - int(1));
        assert_eq!(
            curve_data(&int(0), &int(1), &int(4)),
            Err(Error::DegenerateAlpha)
        );
    }

    #[test]
    fn dual_curve_data_matches_even_part() {
        let d = |s: &str| dual_parse(s).unwrap();
        let cd = dual_curve_data(&d("1"), &d("1+1e"), &d("4+1e")).unwrap();
        assert_eq!(cd.lambda.even, int(1));
        assert_eq!(cd.g2.even, int(4));
        assert_eq!(cd.g3.even, int(-1));
        // odd part of λ is (J J₁/2 − β₁)/3 = (2 − 1)/3
        assert_eq!(cd.lambda.odd, rat(1, 3));
    }

    #[test]
    fn singular_curve_is_rejected() {
        assert!(matches!(
            Weierstrass::new(c(3.0, 0.0), c(1.0, 0.0)),
            Err(Error::SingularCurve)
        ));
        // α = 1, β = 2, J = 2√2 is irrational; use g₂ = 12, g₃ = 8 (disc 0) via uniformize
        let curve = CurveData {
            lambda: int(1),
            g2: int(12),
            g3: int(8),
            disc: int(0),
        };
        let w = [int(1), int(1), int(1), int(1)];
        assert!(matches!(
            uniformize::<Rational, Complex64>(&curve, &int(1), &int(1), &w),
            Err(Error::SingularCurve)
        ));
    }

    #[test]
    fn roots_and_half_periods() {
        let w = classical_lattice();
        for r in &w.roots {
            let p = *r * *r * *r * 4.0 - *r * 4.0 + 1.0;
            assert!(p.norm() < 1e-13);
        }
        // positive discriminant: rectangular lattice
        assert!((w.omega3 / w.omega1).re.abs() < 1e-12);
    }

    #[test]
    fn zeta_is_odd() {
        let w = classical_lattice();
        for z in [c(0.3, 0.1), c(-0.7, 0.9), c(1.4, -0.2)] {
            let (a, b) = (w.zeta(&z).unwrap(), w.zeta(&-z).unwrap());
            assert!((a + b).norm() < 1e-10 * a.norm().max(1.0));
        }
    }

    #[test]
    fn differential_equation_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let g2 = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let g3 = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let w = Weierstrass::new(g2, g3).unwrap();
            for _ in 0..5 {
                let z = w.omega1 * rng.gen_range(-1.0..1.0) + w.omega3 * rng.gen_range(-1.0..1.0);
                let (p, dp) = (w.wp(&z).unwrap(), w.wp_prime(&z).unwrap());
                let rhs = p * p * p * 4.0 - g2 * p - g3;
                assert!(
                    (dp * dp - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()),
                    "g2={g2} g3={g3} z={z}"
                );
            }
        }
    }

    #[test]
    fn legendre_and_quasi_periodicity() {
        let w = classical_lattice();
        let legendre = w.eta1 * w.omega3 - w.eta3 * w.omega1;
        assert!(close(legendre, c(0.0, PI / 2.0), 1e-10));
        let z = c(0.31, 0.17);
        for (shift, eta) in [(w.omega1 * 2.0, w.eta1), (w.omega3 * 2.0, w.eta3)] {
            let direct = w.sigma_series(&(z + shift));
            let law = -(eta * 2.0 * (z + shift / 2.0)).exp() * w.sigma_series(&z);
            assert!(close(direct, law, 1e-8), "{direct} vs {law}");
            assert!(close(w.sigma(&(z + shift)).unwrap(), direct, 1e-8));
        }
    }

    #[test]
    fn addition_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = classical_lattice();
        for _ in 0..20 {
            let a = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let b = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let cc = -(a + b);
            let s = w.zeta(&a).unwrap() + w.zeta(&b).unwrap() + w.zeta(&cc).unwrap();
            let p = w.wp(&a).unwrap() + w.wp(&b).unwrap() + w.wp(&cc).unwrap();
            assert!(close(s * s, p, 1e-8), "{} vs {p}", s * s);
        }
    }

    #[test]
    fn dual_matches_finite_differences() {
        let (g2, g3) = (c(4.0, 0.0), c(-1.0, 0.0));
        let z = c(0.37, 0.21);
        let h = 1e-6;
        let directions = [
            (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)),
            (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
            (c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)),
        ];
        for (dg2, dg3, dz) in directions {
            let wd =
                Weierstrass::<DualComplex>::new(Dual::new(g2, dg2), Dual::new(g3, dg3)).unwrap();
            let zd = Dual::new(z, dz);
            let plus = Weierstrass::new(g2 + dg2 * h, g3 + dg3 * h).unwrap();
            let minus = Weierstrass::new(g2 - dg2 * h, g3 - dg3 * h).unwrap();
            let (zp, zm) = (z + dz * h, z - dz * h);
            type F = fn(&Weierstrass<Complex64>, &Complex64) -> Result<Complex64>;
            type G = fn(&Weierstrass<DualComplex>, &DualComplex) -> Result<DualComplex>;
            let pairs: [(F, G); 4] = [
                (Weierstrass::wp, Weierstrass::wp),
                (Weierstrass::wp_prime, Weierstrass::wp_prime),
                (Weierstrass::zeta, Weierstrass::zeta),
                (Weierstrass::sigma, Weierstrass::sigma),
            ];
            for (f, g) in pairs {
                let fd = (f(&plus, &zp).unwrap() - f(&minus, &zm).unwrap()) / (2.0 * h);
                let ad = g(&wd, &zd).unwrap().odd;
                assert!(
                    (fd - ad).norm() <= 1e-5 * fd.norm().max(1.0),
                    "{fd} vs {ad}"
                );
            }
        }
    }

    #[test]
    fn inverse_wp_round_trips() {
        let w = classical_lattice();
        for target in [c(1.0, 0.0), c(0.0, 0.0), c(-2.5, 0.3), c(0.5, -1.0)] {
            let z = w.inverse_wp(&target).unwrap();
            assert!(close(w.wp(&z).unwrap(), target, 1e-10));
        }
    }

    #[test]
    fn abjsys_at_classical_chart() {
        let cd = curve_data(&int(1), &int(1), &int(4)).unwrap();
        let one = || int(1);
        let chart: EllipticChart<Complex64> =
            uniformize(&cd, &int(1), &int(1), &[one(), one(), one(), one()]).unwrap();
        let l = &chart.lattice;
        let z = chart.z;
        assert!(close(l.wp_prime(&z).unwrap().powi(2), c(1.0, 0.0), 1e-7));
        assert!(close(
            l.wp(&(z * 2.0)).unwrap() - l.wp(&z).unwrap(),
            c(1.0, 0.0),
            1e-7
        ));
        assert!(close(l.wp_second(&z).unwrap(), c(4.0, 0.0), 1e-7));
        assert!(close(chart.predict(3).unwrap(), c(2.0, 0.0), 1e-8));
        assert!(close(chart.predict(4).unwrap(), c(3.0, 0.0), 1e-8));
    }

    #[test]
    fn classical_orbit_report() {
        let r = verify_sigma_solution(&SomosOrbit::classical(), 12).unwrap();
        assert!(r.max_rel_err <= 1e-6, "{}", r.max_rel_err);
        assert!(r.coefficients.max() <= 1e-7, "{:?}", r.coefficients);
        assert!(r.max_d_residual <= 1e-7);
        assert!(r.v_residuals.as_ref().unwrap().max <= 1e-7);
        assert!(r.zeta_shadow.as_ref().unwrap().max <= 1e-6);
        assert!(r.dual.is_none());
        assert!(r.passed);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"omega1\""));
    }

    #[test]
    fn dual_orbit_report() {
        let d = |s: &str| dual_parse(s).unwrap();
        let params = SomosParams::new(d("1"), d("1+1e")).unwrap();
        let orbit = SomosOrbit::new(params, 1, [d("1"), d("1"), d("2+1e"), d("3+2e")]);
        let r = verify_sigma_solution(&orbit, 8).unwrap();
        let dual = r.dual.as_ref().unwrap();
        assert!(
            dual.max_rel_err_even <= 1e-5 && dual.max_rel_err_odd <= 1e-5,
            "{dual:?}"
        );
        assert!(r.passed);
    }

    #[test]
    fn random_orbits_pass_or_fail_cleanly() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut unit = |lo: i64, hi: i64| loop {
            let v = rng.gen_range(lo..=hi);
            if v != 0 {
                return v;
            }
        };
        let (mut passed, mut degenerate, total) = (0, 0, 80);
        for _ in 0..total {
            let alpha = Dual::new(int(unit(-4, 4)), int(unit(-3, 3)));
            let beta = Dual::new(int(unit(-4, 4)), int(unit(-3, 3)));
            let seed: [DualScalar; 4] =
                std::array::from_fn(|_| Dual::new(rat(unit(-5, 5), unit(1, 3)), int(unit(-3, 3))));
            let orbit = SomosOrbit::new(SomosParams::new(alpha, beta).unwrap(), -1, seed);
            match verify_sigma_solution(&orbit, 10) {
                Ok(r) => {
                    assert!(r.passed, "report did not pass: {r:?}");
                    passed += 1;
                }
                Err(Error::VanishingEvenPart { .. }) | Err(Error::SingularCurve) => degenerate += 1,
                Err(Error::BranchFailure { .. }) | Err(Error::Domain(_)) => {}
                Err(e) => panic!("unexpected failure {e}"),
            }
        }
        assert!(
            passed * 10 >= (total - degenerate) * 9,
            "{passed} of {} passed",
            total - degenerate
        );
    }
}
