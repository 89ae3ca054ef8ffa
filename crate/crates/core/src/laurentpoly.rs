//! Sparse integer Laurent polynomials in the fixed generators
//! `x0..x3, a0, a1, b0, b1, y0..y3`, and the symbolic dual Somos-4 step.
//!
//! Only `x0..x3` may carry negative exponents. `a0, a1, b0, b1` stand for
//! `α⁽⁰⁾, α⁽¹⁾, β⁽⁰⁾, β⁽¹⁾`, so a successful symbolic iteration certifies
//! membership of every iterate in `ℤ[α, β, x^{±1}, y]` rather than only
//! integrality at particular parameter values.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::dualnum::{int, Dual, DualScalar, Rational};
use crate::error::{Error, Result};
use crate::somos::{Direction, SomosOrbit, SomosParams};

pub const NGEN: usize = 12;

/// Generator positions in an exponent vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    X0,
    X1,
    X2,
    X3,
    Alpha0,
    Alpha1,
    Beta0,
    Beta1,
    Y0,
    Y1,
    Y2,
    Y3,
}

impl Generator {
    pub const ALL: [Generator; NGEN] = [
        Generator::X0,
        Generator::X1,
        Generator::X2,
        Generator::X3,
        Generator::Alpha0,
        Generator::Alpha1,
        Generator::Beta0,
        Generator::Beta1,
        Generator::Y0,
        Generator::Y1,
        Generator::Y2,
        Generator::Y3,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn x(i: usize) -> Generator {
        Generator::ALL[i]
    }

    pub fn y(i: usize) -> Generator {
        Generator::ALL[8 + i]
    }

    /// Only the x-generators are inverted.
    pub fn is_laurent(self) -> bool {
        self.index() < 4
    }

    /// Generators that appear only in odd parts.
    pub fn is_odd(self) -> bool {
        matches!(
            self,
            Generator::Alpha1
                | Generator::Beta1
                | Generator::Y0
                | Generator::Y1
                | Generator::Y2
                | Generator::Y3
        )
    }

    pub fn name(self) -> &'static str {
        [
            "x0", "x1", "x2", "x3", "a0", "a1", "b0", "b1", "y0", "y1", "y2", "y3",
        ][self.index()]
    }
}

/// Exponent vector ordered graded-lexicographically (total degree first,
/// then by exponent of `x0`, `x1`, … in generator order).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    degree: i32,
    exps: [i16; NGEN],
}

impl Monomial {
    pub fn new(exps: [i16; NGEN]) -> Self {
        Monomial {
            degree: exps.iter().map(|&e| e as i32).sum(),
            exps,
        }
    }

    pub fn one() -> Self {
        Monomial::new([0; NGEN])
    }

    pub fn var(g: Generator) -> Self {
        let mut e = [0; NGEN];
        e[g.index()] = 1;
        Monomial::new(e)
    }

    pub fn exps(&self) -> &[i16; NGEN] {
        &self.exps
    }

    pub fn exp(&self, g: Generator) -> i16 {
        self.exps[g.index()]
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut e = self.exps;
        for (a, b) in e.iter_mut().zip(other.exps.iter()) {
            *a += *b;
        }
        Monomial {
            degree: self.degree + other.degree,
            exps: e,
        }
    }

    /// `self / other` when every exponent stays non-negative.
    fn divide(&self, other: &Monomial) -> Option<Monomial> {
        let e: [i16; NGEN] = std::array::from_fn(|i| self.exps[i] - other.exps[i]);
        if e.iter().any(|&k| k < 0) {
            return None;
        }
        Some(Monomial {
            degree: self.degree - other.degree,
            exps: e,
        })
    }
}

/// Finite map from monomials to nonzero integer coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LaurentPoly {
    terms: BTreeMap<Monomial, BigInt>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly::default()
    }

    pub fn constant(c: i64) -> Self {
        LaurentPoly::term(Monomial::one(), BigInt::from(c))
    }

    pub fn var(g: Generator) -> Self {
        LaurentPoly::term(Monomial::var(g), BigInt::one())
    }

    /// `x_g^{-1}`; only defined for x-generators.
    pub fn inverse_var(g: Generator) -> Self {
        assert!(g.is_laurent(), "{} is not invertible", g.name());
        let mut e = [0; NGEN];
        e[g.index()] = -1;
        LaurentPoly::term(Monomial::new(e), BigInt::one())
    }

    pub fn term(m: Monomial, c: BigInt) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        LaurentPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &BigInt)> {
        self.terms.iter().next_back()
    }

    fn add_term(&mut self, m: Monomial, c: BigInt) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                if !c.is_zero() {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, -c);
        }
        out
    }

    pub fn neg(&self) -> LaurentPoly {
        LaurentPoly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }

    pub fn scale(&self, k: i64) -> LaurentPoly {
        if k == 0 {
            return LaurentPoly::zero();
        }
        LaurentPoly {
            terms: self.terms.iter().map(|(m, c)| (*m, c * k)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> LaurentPoly {
        LaurentPoly {
            terms: self
                .terms
                .iter()
                .map(|(a, c)| (a.mul(m), c.clone()))
                .collect(),
        }
    }

    pub fn mul(&self, other: &LaurentPoly) -> LaurentPoly {
        lp_mul(self, other)
    }

    /// Largest exponent of generator `g`, or `None` for the zero polynomial.
    pub fn max_exp(&self, g: Generator) -> Option<i16> {
        self.terms.keys().map(|m| m.exp(g)).max()
    }

    pub fn min_exp(&self, g: Generator) -> Option<i16> {
        self.terms.keys().map(|m| m.exp(g)).min()
    }

    /// True when no monomial involves generator `g`.
    pub fn is_free_of(&self, g: Generator) -> bool {
        self.terms.keys().all(|m| m.exp(g) == 0)
    }

    /// Every monomial has total degree exactly `k` in the generators `gs`.
    pub fn is_homogeneous_in(&self, gs: &[Generator], k: i32) -> bool {
        self.terms
            .keys()
            .all(|m| gs.iter().map(|g| m.exp(*g) as i32).sum::<i32>() == k)
    }

    /// Exact evaluation. Fails if a generator with a negative exponent is
    /// assigned zero.
    pub fn eval(&self, values: &[Rational; NGEN]) -> Result<Rational> {
        let mut cache: HashMap<(usize, i16), Rational> = HashMap::new();
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut acc = Rational::from_integer(c.clone());
            for (i, &e) in m.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if e < 0 && values[i].is_zero() {
                    return Err(Error::vanishing());
                }
                let p = cache
                    .entry((i, e))
                    .or_insert_with(|| rational_pow(&values[i], e));
                acc *= &*p;
            }
            total += acc;
        }
        Ok(total)
    }

    /// Canonical dump: descending division order, decimal coefficients.
    pub fn to_canonical_string(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if k == 0 {
                if c.is_negative() {
                    out.push('-');
                }
            } else {
                out.push_str(&format!(" {sign} "));
            }
            let mag = c.abs();
            let factors: Vec<String> = Generator::ALL
                .iter()
                .filter(|g| m.exp(**g) != 0)
                .map(|g| match m.exp(*g) {
                    1 => g.name().to_string(),
                    e => format!("{}^{}", g.name(), e),
                })
                .collect();
            if factors.is_empty() {
                out.push_str(&mag.to_string());
            } else if mag.is_one() {
                out.push_str(&factors.join("*"));
            } else {
                out.push_str(&format!("{}*{}", mag, factors.join("*")));
            }
        }
        out
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical_string())
    }
}

fn rational_pow(base: &Rational, e: i16) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..e.unsigned_abs() {
        acc *= base;
    }
    if e < 0 {
        acc.recip()
    } else {
        acc
    }
}

/// Exact product.
pub fn lp_mul(a: &LaurentPoly, b: &LaurentPoly) -> LaurentPoly {
    if a.is_zero() || b.is_zero() {
        return LaurentPoly::zero();
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut acc: HashMap<Monomial, BigInt> = HashMap::with_capacity(large.len() * 2);
    for (ma, ca) in &small.terms {
        for (mb, cb) in &large.terms {
            let m = ma.mul(mb);
            *acc.entry(m).or_insert_with(BigInt::zero) += ca * cb;
        }
    }
    LaurentPoly {
        terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
    }
}

/// Shift x-exponents so each x-generator has minimum exponent zero.
/// Returns the shifted polynomial and the shift applied (as a monomial to
/// multiply back by).
fn clear_x_denominators(p: &LaurentPoly) -> (LaurentPoly, Monomial) {
    let mut shift = [0i16; NGEN];
    for (i, e) in shift.iter_mut().take(4).enumerate() {
        *e = p.min_exp(Generator::x(i)).unwrap_or(0);
    }
    let mut neg = shift;
    for e in neg.iter_mut() {
        *e = -*e;
    }
    (p.mul_monomial(&Monomial::new(neg)), Monomial::new(shift))
}

/// Exact quotient `num / den` in the Laurent ring, or `NotDivisible`.
///
/// Both sides are moved into the polynomial ring by monomial shifts, then
/// the numerator is reduced by leading-term cancellation in graded lex
/// order. A leading term not divisible by the divisor's leading term can
/// never be cancelled later, so the first such term proves non-divisibility.
pub fn lp_exact_div(num: &LaurentPoly, den: &LaurentPoly) -> Result<LaurentPoly> {
    if den.is_zero() {
        return Err(Error::DivisionByZero {
            context: "lp_exact_div",
        });
    }
    if num.is_zero() {
        return Ok(LaurentPoly::zero());
    }
    let (den_poly, den_shift) = clear_x_denominators(den);
    let (mut rem, num_shift) = clear_x_denominators(num);
    let (lead_m, lead_c) = {
        let (m, c) = den_poly.leading_term().expect("nonzero divisor");
        (*m, c.clone())
    };
    let mut quotient = BTreeMap::new();
    while let Some((m, c)) = rem.leading_term() {
        let t = m.divide(&lead_m).ok_or(Error::NotDivisible)?;
        let (q, r) = num_integer::Integer::div_rem(c, &lead_c);
        if !r.is_zero() {
            return Err(Error::NotDivisible);
        }
        for (dm, dc) in &den_poly.terms {
            rem.add_term(dm.mul(&t), -(&q * dc));
        }
        quotient.insert(t, q);
    }
    // quotient * x^{num_shift - den_shift}
    let mut shift = [0i16; NGEN];
    for (i, s) in shift.iter_mut().enumerate() {
        *s = num_shift.exps[i] - den_shift.exps[i];
    }
    let q = LaurentPoly { terms: quotient };
    Ok(q.mul_monomial(&Monomial::new(shift)))
}

/// A symbolic dual iterate `P + Qε`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DualLaurent {
    pub even: LaurentPoly,
    pub odd: LaurentPoly,
}

impl DualLaurent {
    pub fn new(even: LaurentPoly, odd: LaurentPoly) -> Self {
        DualLaurent { even, odd }
    }

    fn add(&self, o: &DualLaurent) -> DualLaurent {
        DualLaurent::new(self.even.add(&o.even), self.odd.add(&o.odd))
    }

    fn mul(&self, o: &DualLaurent) -> DualLaurent {
        let odd = lp_mul(&self.even, &o.odd).add(&lp_mul(&self.odd, &o.even));
        DualLaurent::new(lp_mul(&self.even, &o.even), odd)
    }

    /// The dual coefficient `α⁽⁰⁾ + α⁽¹⁾ε`.
    pub fn alpha() -> Self {
        DualLaurent::new(
            LaurentPoly::var(Generator::Alpha0),
            LaurentPoly::var(Generator::Alpha1),
        )
    }

    pub fn beta() -> Self {
        DualLaurent::new(
            LaurentPoly::var(Generator::Beta0),
            LaurentPoly::var(Generator::Beta1),
        )
    }

    /// Even part is free of the odd generators.
    pub fn even_is_pure(&self) -> bool {
        Generator::ALL
            .iter()
            .filter(|g| g.is_odd())
            .all(|g| self.even.is_free_of(*g))
    }

    /// Odd part has total degree exactly one in `y0..y3, a1, b1`.
    pub fn odd_is_affine_linear(&self) -> bool {
        let odd_gens: Vec<Generator> = Generator::ALL
            .iter()
            .copied()
            .filter(|g| g.is_odd())
            .collect();
        self.odd.is_homogeneous_in(&odd_gens, 1)
    }

    pub fn term_count(&self) -> (usize, usize) {
        (self.even.len(), self.odd.len())
    }
}

/// The initial window `x_i + y_i ε`, `i = 0..3`.
pub fn seed_window() -> [DualLaurent; 4] {
    std::array::from_fn(|i| {
        DualLaurent::new(
            LaurentPoly::var(Generator::x(i)),
            LaurentPoly::var(Generator::y(i)),
        )
    })
}

/// One symbolic step of the dual recurrence with α, β kept as generators.
///
/// With numerator `N = αX₃X₁ + βX₂²` (forward) and divisor `X₀ = P₀ + Q₀ε`,
/// the even part is `N_even / P₀` and the odd part `(N_odd − Q₀·P)/P₀`,
/// each an exact Laurent division.
pub fn symbolic_somos_step(window: &[DualLaurent; 4], direction: Direction) -> Result<DualLaurent> {
    let [a, b, c, d] = window;
    let (divisor, outer, inner, mid) = match direction {
        Direction::Forward => (a, d, b, c),
        Direction::Backward => (d, a, c, b),
    };
    if divisor.even.is_zero() {
        return Err(Error::vanishing());
    }
    let numer = DualLaurent::alpha()
        .mul(&outer.mul(inner))
        .add(&DualLaurent::beta().mul(&mid.mul(mid)));
    let even = lp_exact_div(&numer.even, &divisor.even)?;
    let odd_num = numer.odd.sub(&lp_mul(&divisor.odd, &even));
    let odd = lp_exact_div(&odd_num, &divisor.even)?;
    Ok(DualLaurent::new(even, odd))
}

/// Values for all twelve generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment(pub [Rational; NGEN]);

impl Assignment {
    pub fn new(x: [Rational; 4], y: [Rational; 4], alpha: &DualScalar, beta: &DualScalar) -> Self {
        let mut v: [Rational; NGEN] = Default::default();
        v[..4].clone_from_slice(&x);
        v[8..12].clone_from_slice(&y);
        v[Generator::Alpha0.index()] = alpha.even.clone();
        v[Generator::Alpha1.index()] = alpha.odd.clone();
        v[Generator::Beta0.index()] = beta.even.clone();
        v[Generator::Beta1.index()] = beta.odd.clone();
        Assignment(v)
    }

    pub fn params(&self) -> Result<SomosParams> {
        let v = &self.0;
        SomosParams::new(
            Dual::new(
                v[Generator::Alpha0.index()].clone(),
                v[Generator::Alpha1.index()].clone(),
            ),
            Dual::new(
                v[Generator::Beta0.index()].clone(),
                v[Generator::Beta1.index()].clone(),
            ),
        )
    }

    pub fn seed(&self) -> [DualScalar; 4] {
        std::array::from_fn(|i| Dual::new(self.0[i].clone(), self.0[8 + i].clone()))
    }
}

/// Specialize a symbolic iterate.
pub fn lp_eval(p: &DualLaurent, assignment: &Assignment) -> Result<DualScalar> {
    if assignment.0[..4].iter().any(Zero::is_zero) {
        return Err(Error::vanishing());
    }
    Ok(Dual::new(
        p.even.eval(&assignment.0)?,
        p.odd.eval(&assignment.0)?,
    ))
}

/// Symbolic iterates `X_lo..=X_hi` with the seed at indices `0..=3`.
#[derive(Clone, Debug)]
pub struct SymbolicOrbit {
    lo: i64,
    terms: Vec<DualLaurent>,
}

impl SymbolicOrbit {
    pub fn compute(lo: i64, hi: i64) -> Result<Self> {
        assert!(lo <= 0 && hi >= 3, "range must contain the seed window");
        let mut forward: Vec<DualLaurent> = seed_window().to_vec();
        while (forward.len() as i64) <= hi {
            let n = forward.len();
            let w: [DualLaurent; 4] = std::array::from_fn(|k| forward[n - 4 + k].clone());
            forward.push(symbolic_somos_step(&w, Direction::Forward)?);
        }
        let mut terms: std::collections::VecDeque<DualLaurent> = forward.into();
        for _ in lo..0 {
            let w: [DualLaurent; 4] = std::array::from_fn(|k| terms[k].clone());
            terms.push_front(symbolic_somos_step(&w, Direction::Backward)?);
        }
        Ok(SymbolicOrbit {
            lo,
            terms: terms.into(),
        })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.terms.len() as i64 - 1
    }

    pub fn get(&self, n: i64) -> Option<&DualLaurent> {
        if n < self.lo {
            return None;
        }
        self.terms.get((n - self.lo) as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &DualLaurent)> {
        (self.lo..).zip(self.terms.iter())
    }
}

/// Per-index outcome of the symbolic Laurent check.
#[derive(Clone, Debug, serde::Serialize)]
pub struct LaurentIterateReport {
    pub n: i64,
    pub even_terms: usize,
    pub odd_terms: usize,
    pub even_pure: bool,
    pub odd_affine_linear: bool,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct LaurentReport {
    pub depth: i64,
    pub iterates: Vec<LaurentIterateReport>,
    pub specializations: usize,
    pub specializations_matched: usize,
    pub passed: bool,
}

/// Random assignment with small nonzero integer units and small odd parts.
pub fn random_assignment<R: Rng>(rng: &mut R) -> Assignment {
    let unit = |rng: &mut R| loop {
        let v = rng.gen_range(-3i64..=3);
        if v != 0 {
            return int(v);
        }
    };
    let x: [Rational; 4] = std::array::from_fn(|_| unit(rng));
    let y: [Rational; 4] = std::array::from_fn(|_| int(rng.gen_range(-3i64..=3)));
    let alpha = Dual::new(unit(rng), int(rng.gen_range(-3i64..=3)));
    let beta = Dual::new(unit(rng), int(rng.gen_range(-3i64..=3)));
    Assignment::new(x, y, &alpha, &beta)
}

/// Compute `X_0..X_depth` symbolically and check the Laurent statement:
/// every division exact, even parts free of odd generators, odd parts
/// affine-linear, and `samples` random specializations agreeing with the
/// numeric orbit.
pub fn laurent_verify<R: Rng>(depth: i64, samples: usize, rng: &mut R) -> Result<LaurentReport> {
    let orbit = SymbolicOrbit::compute(0, depth.max(3))?;
    let iterates: Vec<LaurentIterateReport> = orbit
        .iter()
        .map(|(n, p)| LaurentIterateReport {
            n,
            even_terms: p.even.len(),
            odd_terms: p.odd.len(),
            even_pure: p.even_is_pure(),
            odd_affine_linear: p.odd_is_affine_linear(),
        })
        .collect();
    let mut matched = 0;
    let mut tried = 0;
    while tried < samples {
        let a = random_assignment(rng);
        let mut numeric = SomosOrbit::new(a.params()?, 0, a.seed());
        if numeric.extend_to(0, orbit.hi()).is_err() {
            // a zero even term along the numeric orbit; draw again
            continue;
        }
        tried += 1;
        let all = orbit
            .iter()
            .all(|(n, p)| lp_eval(p, &a).ok().as_ref() == numeric.get(n));
        if all {
            matched += 1;
        }
    }
    let passed = matched == samples && iterates.iter().all(|r| r.even_pure && r.odd_affine_linear);
    Ok(LaurentReport {
        depth: orbit.hi(),
        iterates,
        specializations: samples,
        specializations_matched: matched,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dualnum::dual_parse;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn x(i: usize) -> LaurentPoly {
        LaurentPoly::var(Generator::x(i))
    }

    fn all_ones(y: [i64; 4], a: &str, b: &str) -> Assignment {
        Assignment::new(
            std::array::from_fn(|_| int(1)),
            y.map(int),
            &dual_parse(a).unwrap(),
            &dual_parse(b).unwrap(),
        )
    }

    #[test]
    fn mul_examples() {
        let inv = LaurentPoly::inverse_var(Generator::X0);
        assert_eq!(lp_mul(&x(0), &inv), LaurentPoly::constant(1));
        let s = x(1).add(&x(2));
        let expect = lp_mul(&x(1), &x(1))
            .add(&lp_mul(&x(1), &x(2)).scale(2))
            .add(&lp_mul(&x(2), &x(2)));
        assert_eq!(lp_mul(&s, &s), expect);
    }

    #[test]
    fn exact_division_examples() {
        let num = lp_mul(&x(0), &x(0)).sub(&lp_mul(&x(1), &x(1)));
        assert_eq!(
            lp_exact_div(&num, &x(0).sub(&x(1))).unwrap(),
            x(0).add(&x(1))
        );

        let a0 = LaurentPoly::var(Generator::Alpha0);
        let b0 = LaurentPoly::var(Generator::Beta0);
        let n = lp_mul(&a0, &lp_mul(&x(3), &x(1))).add(&lp_mul(&b0, &lp_mul(&x(2), &x(2))));
        let q = lp_exact_div(&n, &x(0)).unwrap();
        assert_eq!(q, lp_mul(&n, &LaurentPoly::inverse_var(Generator::X0)));

        assert_eq!(
            lp_exact_div(&x(0).add(&x(1)), &x(0).add(&x(2))),
            Err(Error::NotDivisible)
        );
        assert!(lp_exact_div(&x(0), &LaurentPoly::zero()).is_err());
    }

    #[test]
    fn division_by_laurent_divisor() {
        // (x0 + x1^-1)(x2 - 3 x0^-2) / (x0 + x1^-1)
        let f = x(0).add(&LaurentPoly::inverse_var(Generator::X1));
        let g = x(2).sub(
            &lp_mul(
                &LaurentPoly::inverse_var(Generator::X0),
                &LaurentPoly::inverse_var(Generator::X0),
            )
            .scale(3),
        );
        assert_eq!(lp_exact_div(&lp_mul(&f, &g), &f).unwrap(), g);
        assert_eq!(lp_exact_div(&lp_mul(&f, &g), &g).unwrap(), f);
        assert_eq!(
            lp_exact_div(&lp_mul(&f, &g).add(&x(3)), &g),
            Err(Error::NotDivisible)
        );
    }

    #[test]
    fn first_symbolic_step() {
        let x4 = symbolic_somos_step(&seed_window(), Direction::Forward).unwrap();
        let a0 = LaurentPoly::var(Generator::Alpha0);
        let b0 = LaurentPoly::var(Generator::Beta0);
        let n = lp_mul(&a0, &lp_mul(&x(3), &x(1))).add(&lp_mul(&b0, &lp_mul(&x(2), &x(2))));
        assert_eq!(
            x4.even,
            lp_mul(&n, &LaurentPoly::inverse_var(Generator::X0))
        );
        assert_eq!(
            x4.even.to_canonical_string(),
            "x0^-1*x1*x3*a0 + x0^-1*x2^2*b0"
        );
        let v = lp_eval(&x4, &all_ones([0; 4], "1", "1")).unwrap();
        assert_eq!(v, DualScalar::from_int(2));
    }

    #[test]
    fn symbolic_iterates_specialize_to_classical_sequence() {
        let orbit = SymbolicOrbit::compute(0, 7).unwrap();
        let a = all_ones([0; 4], "1", "1");
        let vals: Vec<_> = (0..=7)
            .map(|n| lp_eval(orbit.get(n).unwrap(), &a).unwrap())
            .collect();
        let expected = [1, 1, 1, 1, 2, 3, 7, 23].map(DualScalar::from_int);
        assert_eq!(vals, expected.to_vec());
    }

    #[test]
    fn eval_agrees_with_numeric_step() {
        let x4 = symbolic_somos_step(&seed_window(), Direction::Forward).unwrap();
        let a = all_ones([0, 0, 0, 1], "1", "1");
        let numeric =
            crate::somos::somos_step(&a.seed(), &a.params().unwrap(), Direction::Forward).unwrap();
        assert_eq!(lp_eval(&x4, &a).unwrap(), numeric);
    }

    #[test]
    fn eval_rejects_zero_x() {
        let mut a = all_ones([0; 4], "1", "1");
        a.0[0] = int(0);
        let x4 = symbolic_somos_step(&seed_window(), Direction::Forward).unwrap();
        assert_eq!(
            lp_eval(&x4, &a),
            Err(Error::VanishingEvenPart { index: None })
        );
    }

    #[test]
    fn backward_then_forward_is_identity() {
        let w = seed_window();
        let prev = symbolic_somos_step(&w, Direction::Backward).unwrap();
        let shifted = [prev, w[0].clone(), w[1].clone(), w[2].clone()];
        assert_eq!(
            symbolic_somos_step(&shifted, Direction::Forward).unwrap(),
            w[3]
        );
    }

    #[test]
    fn laurent_structure_to_depth_eight() {
        let orbit = SymbolicOrbit::compute(-2, 8).unwrap();
        for (n, p) in orbit.iter() {
            assert!(p.even_is_pure(), "n={n}");
            assert!(p.odd_is_affine_linear(), "n={n}");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let a = random_assignment(&mut rng);
            let mut numeric = SomosOrbit::new(a.params().unwrap(), 0, a.seed());
            if numeric.extend_to(-2, 8).is_err() {
                continue;
            }
            for (n, p) in orbit.iter() {
                assert_eq!(&lp_eval(p, &a).unwrap(), numeric.get(n).unwrap(), "n={n}");
            }
        }
    }
}
