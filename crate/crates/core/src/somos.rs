//! Exact Somos-4 iteration over the dual rationals, the ratio (QRT) map,
//! the two rational first integrals, and the continued-fraction map on
//! `(v, d)` with its first integral `H`.
//!
//! The recurrence is
//!
//! ```text
//! X[n+4] X[n] = α X[n+3] X[n+1] + β X[n+2]²,   α, β dual
//! ```
//!
//! and splitting into even/odd parts gives the ordinary Somos-4 equation for
//! `x` plus an inhomogeneous linear equation for the shadow `y`.

use std::collections::VecDeque;

use num_traits::{One, Zero};

use crate::dualnum::{int, rational_sqrt, DualScalar, Rational};
use crate::error::{Error, Result};

/// Coefficients `α = α⁽⁰⁾ + α⁽¹⁾ε`, `β = β⁽⁰⁾ + β⁽¹⁾ε`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SomosParams {
    pub alpha: DualScalar,
    pub beta: DualScalar,
}

impl SomosParams {
    /// Rejects the degenerate recurrence with `α⁽⁰⁾ = β⁽⁰⁾ = 0`.
    pub fn new(alpha: DualScalar, beta: DualScalar) -> Result<Self> {
        if alpha.even.is_zero() && beta.even.is_zero() {
            return Err(Error::InvalidParams(
                "alpha and beta both have vanishing even part".into(),
            ));
        }
        Ok(SomosParams { alpha, beta })
    }

    /// `α = β = 1`.
    pub fn classical() -> Self {
        SomosParams {
            alpha: DualScalar::one(),
            beta: DualScalar::one(),
        }
    }

    pub fn alpha0(&self) -> &Rational {
        &self.alpha.even
    }
    pub fn alpha1(&self) -> &Rational {
        &self.alpha.odd
    }
    pub fn beta0(&self) -> &Rational {
        &self.beta.even
    }
    pub fn beta1(&self) -> &Rational {
        &self.beta.odd
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// One step of the dual recurrence.
///
/// `window` holds four consecutive terms `X[n..n+4]`. Forward returns
/// `X[n+4]`, backward returns `X[n-1]` (the recurrence is symmetric under
/// reversal, so this solves for the term below the window).
pub fn somos_step(
    window: &[DualScalar; 4],
    params: &SomosParams,
    direction: Direction,
) -> Result<DualScalar> {
    let [a, b, c, d] = window;
    let (divisor, outer, inner, mid) = match direction {
        Direction::Forward => (a, d, b, c),
        Direction::Backward => (d, a, c, b),
    };
    let numer = &(&params.alpha * &(outer * inner)) + &(&params.beta * &(mid * mid));
    numer.checked_div(divisor)
}

/// A dual Somos-4 orbit with its full indexed history.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SomosOrbit {
    pub params: SomosParams,
    base_index: i64,
    terms: VecDeque<DualScalar>,
}

impl SomosOrbit {
    /// Orbit seeded by `X[seed_index..seed_index + 4]`.
    pub fn new(params: SomosParams, seed_index: i64, seed: [DualScalar; 4]) -> Self {
        SomosOrbit {
            params,
            base_index: seed_index,
            terms: seed.into_iter().collect(),
        }
    }

    /// The classical sequence 1, 1, 1, 1, 2, 3, 7, 23, … indexed from `x₋₁`.
    pub fn classical() -> Self {
        SomosOrbit::new(
            SomosParams::classical(),
            -1,
            std::array::from_fn(|_| DualScalar::one()),
        )
    }

    pub fn lo(&self) -> i64 {
        self.base_index
    }

    pub fn hi(&self) -> i64 {
        self.base_index + self.terms.len() as i64 - 1
    }

    pub fn get(&self, n: i64) -> Option<&DualScalar> {
        if n < self.lo() || n > self.hi() {
            return None;
        }
        self.terms.get((n - self.base_index) as usize)
    }

    pub fn term(&self, n: i64) -> Result<&DualScalar> {
        self.get(n).ok_or(Error::IndexOutOfRange { n })
    }

    /// Even part `x_n`.
    pub fn x(&self, n: i64) -> Result<&Rational> {
        Ok(&self.term(n)?.even)
    }

    /// Odd part `y_n`.
    pub fn y(&self, n: i64) -> Result<&Rational> {
        Ok(&self.term(n)?.odd)
    }

    /// The four terms `X[n..n+4]`.
    pub fn window(&self, n: i64) -> Result<[DualScalar; 4]> {
        let mut out: [DualScalar; 4] = Default::default();
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = self.term(n + k as i64)?.clone();
        }
        Ok(out)
    }

    pub fn even_window(&self, n: i64) -> Result<[Rational; 4]> {
        Ok(self.window(n)?.map(|t| t.even))
    }

    pub fn odd_window(&self, n: i64) -> Result<[Rational; 4]> {
        Ok(self.window(n)?.map(|t| t.odd))
    }

    /// `(n, X_n)` pairs over the stored range.
    pub fn iter(&self) -> impl Iterator<Item = (i64, &DualScalar)> {
        (self.base_index..).zip(self.terms.iter())
    }

    /// Make every index in `[lo, hi]` available.
    pub fn extend_to(&mut self, lo: i64, hi: i64) -> Result<()> {
        while self.hi() < hi {
            let n = self.hi() - 3;
            let next = somos_step(&self.window(n)?, &self.params, Direction::Forward)
                .map_err(|e| e.at_index(n))?;
            self.terms.push_back(next);
        }
        while self.lo() > lo {
            let n = self.lo();
            let prev = somos_step(&self.window(n)?, &self.params, Direction::Backward)
                .map_err(|e| e.at_index(n + 3))?;
            self.terms.push_front(prev);
            self.base_index -= 1;
        }
        Ok(())
    }
}

/// Functional form of [`SomosOrbit::extend_to`].
pub fn extend_orbit(orbit: &SomosOrbit, lo: i64, hi: i64) -> Result<SomosOrbit> {
    let mut out = orbit.clone();
    out.extend_to(lo, hi)?;
    Ok(out)
}

/// `d_n = x_{n+1} x_{n-1} / x_n²` on the even parts.
pub fn ratios_d(orbit: &SomosOrbit, n: i64) -> Result<Rational> {
    let prev = orbit.x(n - 1)?;
    let cur = orbit.x(n)?;
    let next = orbit.x(n + 1)?;
    if prev.is_zero() || cur.is_zero() || next.is_zero() {
        return Err(Error::vanishing_at(n));
    }
    Ok(next * prev / (cur * cur))
}

/// `d_{n+1} = (α d_n + β) / (d_n² d_{n-1})`.
pub fn qrt_step(
    d_prev: &Rational,
    d_cur: &Rational,
    alpha0: &Rational,
    beta0: &Rational,
) -> Result<Rational> {
    let denom = d_cur * d_cur * d_prev;
    if denom.is_zero() {
        return Err(Error::DivisionByZero {
            context: "qrt_step",
        });
    }
    Ok((alpha0 * d_cur + beta0) / denom)
}

/// The QRT first integral `d d' + α(1/d + 1/d') + β/(d d')`.
pub fn qrt_invariant(
    d_prev: &Rational,
    d_cur: &Rational,
    alpha0: &Rational,
    beta0: &Rational,
) -> Result<Rational> {
    if d_prev.is_zero() || d_cur.is_zero() {
        return Err(Error::DivisionByZero {
            context: "qrt_invariant",
        });
    }
    let prod = d_prev * d_cur;
    Ok(&prod + alpha0 * (d_cur.recip() + d_prev.recip()) + beta0 / &prod)
}

/// Numerator of the Somos-4 first integral, generic over the scalar ring.
fn j_numerator<T>(w: &[T; 4], alpha: &T, beta: &T) -> T
where
    T: Clone + std::ops::Add<Output = T> + std::ops::Mul<Output = T>,
{
    let [a, b, c, d] = w.clone();
    let sq = |t: &T| t.clone() * t.clone();
    let cube = |t: &T| t.clone() * t.clone() * t.clone();
    sq(&a) * sq(&d)
        + alpha.clone() * (cube(&b) * d.clone() + a.clone() * cube(&c))
        + beta.clone() * sq(&b) * sq(&c)
}

/// `J⁽⁰⁾` on a window of four even parts.
pub fn j_even(window: &[Rational; 4], alpha0: &Rational, beta0: &Rational) -> Result<Rational> {
    let denom: Rational = window.iter().product();
    if denom.is_zero() {
        return Err(Error::DivisionByZero { context: "j_even" });
    }
    Ok(j_numerator(window, alpha0, beta0) / denom)
}

/// The first integral evaluated directly in dual arithmetic.
pub fn j_dual(window: &[DualScalar; 4], params: &SomosParams) -> Result<DualScalar> {
    let denom = window.iter().fold(DualScalar::one(), |acc, t| &acc * t);
    j_numerator(window, &params.alpha, &params.beta).checked_div(&denom)
}

/// The polynomials `C⁽⁰⁾..C⁽³⁾` and `D` attached to a window of even parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientRow {
    pub c: [Rational; 4],
    pub d: Rational,
}

pub fn coefficient_row(x: &[Rational; 4], params: &SomosParams) -> CoefficientRow {
    let [x0, x1, x2, x3] = x;
    let (a0, b0) = (params.alpha0(), params.beta0());
    let p = x1 * x1 * x1 * x3; // x_{n+1}³ x_{n+3}
    let q = x0 * x2 * x2 * x2; // x_n x_{n+2}³
    let r = x1 * x1 * x2 * x2; // x_{n+1}² x_{n+2}²
    let s = x0 * x0 * x3 * x3; // x_n² x_{n+3}²
    let two = int(2);
    let c0 = a0 * &p + b0 * &r - &s;
    let c1 = a0 * &q - &two * a0 * &p - b0 * &r + &s;
    let c2 = -(&two * a0 * &q) + a0 * &p - b0 * &r + &s;
    let c3 = a0 * &q + b0 * &r - &s;
    let d = params.alpha1() * &q + params.alpha1() * &p + params.beta1() * &r;
    CoefficientRow {
        c: [c0, c1, c2, c3],
        d,
    }
}

/// `J⁽¹⁾ = (D − Σ C⁽ʲ⁾ y/x) / (x_n x_{n+1} x_{n+2} x_{n+3})`.
pub fn j_odd(x: &[Rational; 4], y: &[Rational; 4], params: &SomosParams) -> Result<Rational> {
    if x.iter().any(Zero::is_zero) {
        return Err(Error::DivisionByZero { context: "j_odd" });
    }
    let row = coefficient_row(x, params);
    let weighted: Rational = (0..4).map(|j| &row.c[j] * &y[j] / &x[j]).sum();
    let denom: Rational = x.iter().product();
    Ok((row.d - weighted) / denom)
}

/// State `(u, f; v_{n-1}, d_n)` of the continued-fraction map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapState {
    pub u: Rational,
    pub f: Rational,
    pub v: Rational,
    pub d: Rational,
}

impl MapState {
    pub fn new(u: Rational, f: Rational, v: Rational, d: Rational) -> Self {
        MapState { u, f, v, d }
    }

    /// The state `(v₀, d₁)` matching a Somos orbit with indices `-1..=3`
    /// available, so that the map's `d`-orbit coincides with `ratios_d`.
    ///
    /// Takes `u = −√α⁽⁰⁾`; fails with `Consistency` when `α⁽⁰⁾` is not the
    /// square of a rational (the map route would leave the rationals).
    pub fn from_orbit(orbit: &SomosOrbit) -> Result<Self> {
        let a0 = orbit.params.alpha0();
        let b0 = orbit.params.beta0();
        let root = rational_sqrt(a0).ok_or_else(|| {
            Error::Consistency(format!(
                "alpha0 = {a0} is not a rational square; use the bordered Hankel route"
            ))
        })?;
        if root.is_zero() {
            return Err(Error::Consistency("alpha0 = 0 gives u = 0".into()));
        }
        let u = -root;
        let j = j_even(&orbit.even_window(-1)?, a0, b0)?;
        let f = (b0 - &j * &j / int(4)) / a0;
        let (d0, d1, d2) = (
            ratios_d(orbit, 0)?,
            ratios_d(orbit, 1)?,
            ratios_d(orbit, 2)?,
        );
        let v0_sq = -&d0 - &d1 - &f;
        let v1_sq = -&d1 - &d2 - &f;
        let v = (&u * &u / (&d1 * &d1) + &v0_sq - v1_sq) * &d1 / (int(2) * &u);
        if &v * &v != v0_sq {
            return Err(Error::Consistency(
                "orbit does not lie on the map level set (v0² mismatch)".into(),
            ));
        }
        let state = MapState::new(u, f, v, d1);
        if dtoda_invariant(&state) != -j / int(2) {
            return Err(Error::Consistency(
                "map invariant H differs from -J/2".into(),
            ));
        }
        Ok(state)
    }
}

/// `v' = −v + u/d`, `d' = −d − v'² − f`.
pub fn dtoda_step(s: &MapState) -> Result<MapState> {
    if s.d.is_zero() {
        return Err(Error::DivisionByZero {
            context: "dtoda_step",
        });
    }
    let v = -&s.v + &s.u / &s.d;
    let d = -&s.d - &v * &v - &s.f;
    Ok(MapState::new(s.u.clone(), s.f.clone(), v, d))
}

/// `H = d(v² + d + f) − u v`.
pub fn dtoda_invariant(s: &MapState) -> Rational {
    &s.d * (&s.v * &s.v + &s.d + &s.f) - &s.u * &s.v
}

/// Determinant of `∂(v', d')/∂(v, d)` from the closed-form partials.
pub fn dtoda_jacobian(s: &MapState) -> Result<Rational> {
    let next = dtoda_step(s)?;
    let ud2 = &s.u / (&s.d * &s.d);
    let (a, b) = (-Rational::one(), -ud2.clone());
    let (c, d) = (int(2) * &next.v, -Rational::one() + int(2) * &next.v * &ud2);
    Ok(a * d - b * c)
}

/// `(α, β, J)` with `α = u²`, `J = −2H`, `β = αf + J²/4`.
pub fn params_from_map(u: &Rational, f: &Rational, h: &Rational) -> (Rational, Rational, Rational) {
    let alpha = u * u;
    let j = -int(2) * h;
    let beta = &alpha * f + &j * &j / int(4);
    (alpha, beta, j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dualnum::{dual_parse, rat, Dual};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn d(s: &str) -> DualScalar {
        dual_parse(s).unwrap()
    }

    fn ones() -> [DualScalar; 4] {
        std::array::from_fn(|_| DualScalar::one())
    }

    fn ints(v: [i64; 4]) -> [Rational; 4] {
        v.map(int)
    }

    #[test]
    fn step_examples() {
        let p = SomosParams::classical();
        assert_eq!(somos_step(&ones(), &p, Direction::Forward).unwrap(), d("2"));
        let w = [d("1"), d("1"), d("2"), d("3")];
        assert_eq!(somos_step(&w, &p, Direction::Forward).unwrap(), d("7"));
        let p = SomosParams::new(d("1"), d("1+1e")).unwrap();
        assert_eq!(
            somos_step(&ones(), &p, Direction::Forward).unwrap(),
            d("2+1e")
        );
    }

    #[test]
    fn step_rejects_zero_divisor() {
        let p = SomosParams::classical();
        let w = [d("1e"), d("1"), d("1"), d("1")];
        assert_eq!(
            somos_step(&w, &p, Direction::Forward),
            Err(Error::VanishingEvenPart { index: None })
        );
    }

    #[test]
    fn degenerate_params_rejected() {
        assert!(SomosParams::new(d("1e"), d("0")).is_err());
    }

    #[test]
    fn classical_orbit_and_reversal() {
        let mut o = SomosOrbit::classical();
        o.extend_to(-4, 12).unwrap();
        let expected = [1, 1, 1, 1, 2, 3, 7, 23, 59, 314, 1529, 8209, 83313, 620297];
        for (k, e) in expected.iter().enumerate() {
            assert_eq!(o.x(k as i64 - 1).unwrap(), &int(*e));
        }
        assert_eq!(o.x(-2).unwrap(), &int(2));
        assert_eq!(o.x(-3).unwrap(), &int(3));
        assert_eq!(o.x(-4).unwrap(), &int(7));
    }

    #[test]
    fn extend_reports_offending_index() {
        // x_{n+4} x_n = x_{n+3} x_{n+1} - x_{n+2}² with seed 1,1,1,1 hits x_3 = 0.
        let p = SomosParams::new(d("1"), d("-1")).unwrap();
        let mut o = SomosOrbit::new(p, 0, ones());
        let err = o.extend_to(0, 10).unwrap_err();
        assert!(
            matches!(err, Error::VanishingEvenPart { index: Some(4) }),
            "{err:?}"
        );
    }

    #[test]
    fn shadow_of_beta_perturbation() {
        let p = SomosParams::new(d("1"), d("1+1e")).unwrap();
        let mut o = SomosOrbit::new(p, -1, ones());
        o.extend_to(-1, 6).unwrap();
        let odd: Vec<_> = (-1..=6).map(|n| o.y(n).unwrap().clone()).collect();
        assert_eq!(
            odd,
            ints([0, 0, 0, 0])
                .into_iter()
                .chain(ints([1, 2, 10, 48]))
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn ratios_and_qrt() {
        let mut o = SomosOrbit::classical();
        o.extend_to(-1, 8).unwrap();
        assert_eq!(ratios_d(&o, 0).unwrap(), int(1));
        assert_eq!(ratios_d(&o, 1).unwrap(), int(1));
        assert_eq!(ratios_d(&o, 2).unwrap(), int(2));
        assert_eq!(ratios_d(&o, 3).unwrap(), rat(3, 4));
        let one = int(1);
        assert_eq!(qrt_step(&one, &one, &one, &one).unwrap(), int(2));
        assert_eq!(qrt_step(&one, &int(2), &one, &one).unwrap(), rat(3, 4));
        for n in 1..7 {
            let next = qrt_step(
                &ratios_d(&o, n - 1).unwrap(),
                &ratios_d(&o, n).unwrap(),
                &one,
                &one,
            );
            assert_eq!(next.unwrap(), ratios_d(&o, n + 1).unwrap());
            let inv = qrt_invariant(
                &ratios_d(&o, n - 1).unwrap(),
                &ratios_d(&o, n).unwrap(),
                &one,
                &one,
            );
            assert_eq!(inv.unwrap(), int(4));
        }
        assert!(qrt_step(&int(0), &one, &one, &one).is_err());
    }

    #[test]
    fn j_even_examples() {
        let one = int(1);
        assert_eq!(j_even(&ints([1, 1, 1, 1]), &one, &one).unwrap(), int(4));
        assert_eq!(j_even(&ints([1, 1, 2, 3]), &one, &one).unwrap(), int(4));
        assert_eq!(j_even(&ints([1, 1, 1, 1]), &one, &int(2)).unwrap(), int(5));
        assert!(j_even(&ints([1, 0, 1, 1]), &one, &one).is_err());
    }

    #[test]
    fn coefficient_row_examples() {
        let row = coefficient_row(&ints([1, 1, 1, 1]), &SomosParams::classical());
        assert_eq!(row.c, ints([1, -1, -1, 1]));
        assert_eq!(row.d, int(0));
        let p = SomosParams::new(d("1+2e"), d("1+3e")).unwrap();
        let row = coefficient_row(&ints([1, 1, 1, 1]), &p);
        assert_eq!(row.d, int(2 + 2 + 3));
    }

    #[test]
    fn j_odd_examples() {
        let p = SomosParams::classical();
        assert_eq!(
            j_odd(&ints([1, 1, 1, 1]), &ints([0, 0, 0, 1]), &p).unwrap(),
            int(-1)
        );
        assert_eq!(
            j_odd(&ints([1, 1, 1, 1]), &ints([1, 1, 1, 1]), &p).unwrap(),
            int(0)
        );
        let p = SomosParams::new(d("1"), d("1+1e")).unwrap();
        assert_eq!(
            j_odd(&ints([1, 1, 1, 1]), &ints([0, 0, 0, 0]), &p).unwrap(),
            int(1)
        );
        assert_eq!(j_dual(&ones(), &p).unwrap(), d("4+1e"));
    }

    #[test]
    fn dtoda_examples() {
        let s0 = MapState::new(int(-1), int(-3), int(-1), int(1));
        assert_eq!(dtoda_invariant(&s0), int(-2));
        let s1 = dtoda_step(&s0).unwrap();
        assert_eq!((s1.v.clone(), s1.d.clone()), (int(0), int(2)));
        assert_eq!(dtoda_invariant(&s1), int(-2));
        let s2 = dtoda_step(&s1).unwrap();
        assert_eq!((s2.v.clone(), s2.d.clone()), (rat(-1, 2), rat(3, 4)));
        let zero_d = MapState::new(int(1), int(1), int(1), int(0));
        assert!(dtoda_step(&zero_d).is_err());
        let slice = MapState::new(int(5), int(-2), int(0), int(3));
        // H = d(d + f) at v = 0
        assert_eq!(dtoda_invariant(&slice), int(3));
    }

    #[test]
    fn map_params_examples() {
        assert_eq!(
            params_from_map(&int(-1), &int(-3), &int(-2)),
            (int(1), int(1), int(4))
        );
        let (u, f) = (rat(2, 3), int(5));
        assert_eq!(
            params_from_map(&u, &f, &int(0)),
            (&u * &u, &u * &u * &f, int(0))
        );
    }

    #[test]
    fn map_state_from_classical_orbit() {
        let mut o = SomosOrbit::classical();
        o.extend_to(-1, 4).unwrap();
        let s = MapState::from_orbit(&o).unwrap();
        assert_eq!(s, MapState::new(int(-1), int(-3), int(-1), int(1)));
    }

    #[test]
    fn map_state_refuses_irrational_u() {
        let p = SomosParams::new(d("2"), d("1")).unwrap();
        let mut o = SomosOrbit::new(p, -1, ones());
        o.extend_to(-1, 4).unwrap();
        assert!(matches!(
            MapState::from_orbit(&o),
            Err(Error::Consistency(_))
        ));
    }

    fn random_state(rng: &mut ChaCha8Rng) -> MapState {
        let mut r = |lo: i64, hi: i64| {
            let n = rng.gen_range(lo..=hi);
            let d = rng.gen_range(1..=4);
            rat(n, d)
        };
        let mut dd = r(-6, 6);
        while dd.is_zero() {
            dd = r(1, 6);
        }
        MapState::new(r(-5, 5), r(-5, 5), r(-5, 5), dd)
    }

    #[test]
    fn map_orbits_are_qrt_orbits() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 20 {
            let s0 = random_state(&mut rng);
            if s0.u.is_zero() {
                continue;
            }
            let (a, b, j) = params_from_map(&s0.u, &s0.f, &dtoda_invariant(&s0));
            let mut ds = vec![s0.d.clone()];
            let mut s = s0.clone();
            let mut ok = true;
            for _ in 0..6 {
                match dtoda_step(&s) {
                    Ok(next) if !next.d.is_zero() => {
                        ds.push(next.d.clone());
                        s = next;
                    }
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            for w in ds.windows(3) {
                assert_eq!(qrt_step(&w[0], &w[1], &a, &b).unwrap(), w[2]);
                assert_eq!(qrt_invariant(&w[0], &w[1], &a, &b).unwrap(), j);
            }
            checked += 1;
        }
    }

    fn unit() -> impl Strategy<Value = DualScalar> {
        ((-4i64..=4).prop_filter("unit", |n| *n != 0), -4i64..=4)
            .prop_map(|(e, o)| Dual::new(int(e), int(o)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn forward_backward_identity(w in prop::array::uniform4(unit()), a in unit(), b in unit()) {
            let p = SomosParams::new(a, b).unwrap();
            if let Ok(next) = somos_step(&w, &p, Direction::Forward) {
                if next.is_unit() {
                    let shifted = [w[1].clone(), w[2].clone(), w[3].clone(), next];
                    prop_assert_eq!(somos_step(&shifted, &p, Direction::Backward).unwrap(), w[0].clone());
                }
            }
        }

        #[test]
        fn dtoda_is_symplectic(u in -5i64..=5, f in -5i64..=5, v in -5i64..=5, dn in 1i64..=5, dd in 1i64..=3) {
            let s = MapState::new(int(u), int(f), int(v), rat(dn, dd));
            prop_assert_eq!(dtoda_jacobian(&s).unwrap(), int(1));
            let h = dtoda_invariant(&s);
            prop_assert_eq!(dtoda_invariant(&dtoda_step(&s).unwrap()), h);
        }
    }
}
