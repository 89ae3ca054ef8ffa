//! Shadow sequences: solutions `y` of the odd part of the dual recurrence
//! along a fixed even orbit `x`.
//!
//! The odd equation is linear of fourth order in `y`. Fixing the odd part
//! `J⁽¹⁾` of the first integral reduces it to the third-order equation
//! `L_n(y) = F_n`, which is what [`shadow_iv_step`] and
//! [`variation_of_parameters`] solve.

use num_traits::Zero;

use crate::dualnum::{int, DualScalar, Rational};
use crate::error::{Error, Result};
use crate::hankel::rational_det;
use crate::somos::{
    coefficient_row, dtoda_invariant, dtoda_step, j_even, j_odd, params_from_map, ratios_d,
    MapState, SomosOrbit, SomosParams,
};

/// A rational sequence indexed from `lo`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sequence {
    pub lo: i64,
    pub values: Vec<Rational>,
}

impl Sequence {
    pub fn new(lo: i64, values: Vec<Rational>) -> Self {
        Sequence { lo, values }
    }

    /// Last stored index (`lo - 1` when empty).
    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    pub fn get(&self, n: i64) -> Result<&Rational> {
        if n < self.lo {
            return Err(Error::IndexOutOfRange { n });
        }
        self.values
            .get((n - self.lo) as usize)
            .ok_or(Error::IndexOutOfRange { n })
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &Rational)> {
        (self.lo..).zip(self.values.iter())
    }

    /// The subsequence on `[lo, hi]`.
    pub fn slice(&self, lo: i64, hi: i64) -> Result<Sequence> {
        let values = (lo..=hi)
            .map(|n| self.get(n).cloned())
            .collect::<Result<_>>()?;
        Ok(Sequence::new(lo, values))
    }

    fn window<const K: usize>(&self, n: i64) -> Result<[Rational; K]> {
        let mut out: [Rational; K] = std::array::from_fn(|_| Rational::zero());
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = self.get(n + k as i64)?.clone();
        }
        Ok(out)
    }
}

/// The even parts of an orbit as a plain sequence.
pub fn even_sequence(orbit: &SomosOrbit) -> Sequence {
    Sequence::new(
        orbit.lo(),
        orbit.iter().map(|(_, t)| t.even.clone()).collect(),
    )
}

fn x_window<const K: usize>(orbit: &SomosOrbit, n: i64) -> Result<[Rational; K]> {
    let mut out: [Rational; K] = std::array::from_fn(|_| Rational::zero());
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = orbit.x(n + k as i64)?.clone();
    }
    Ok(out)
}

/// The homogeneous parameters `(α⁽⁰⁾, β⁽⁰⁾)` of an orbit.
fn homogeneous(params: &SomosParams) -> SomosParams {
    SomosParams {
        alpha: DualScalar::from_even(params.alpha0().clone()),
        beta: DualScalar::from_even(params.beta0().clone()),
    }
}

/// Odd equation residual on a five-term window:
///
/// ```text
/// x_n y_{n+4} − α⁽⁰⁾x_{n+1}y_{n+3} − 2β⁽⁰⁾x_{n+2}y_{n+2} − α⁽⁰⁾x_{n+3}y_{n+1} + x_{n+4}y_n
///   − (α⁽¹⁾x_{n+1}x_{n+3} + β⁽¹⁾x_{n+2}²)
/// ```
pub fn shadow_residual_4(x: &[Rational; 5], y: &[Rational; 5], params: &SomosParams) -> Rational {
    let (a0, b0) = (params.alpha0(), params.beta0());
    let lhs = &x[0] * &y[4] - a0 * &x[1] * &y[3] - int(2) * b0 * &x[2] * &y[2] - a0 * &x[3] * &y[1]
        + &x[4] * &y[0];
    let rhs = params.alpha1() * &x[1] * &x[3] + params.beta1() * &x[2] * &x[2];
    lhs - rhs
}

/// `L_n(y) = Σ_j C⁽ʲ⁾ y_{n+j} / x_{n+j}`.
pub fn apply_l(x: &[Rational; 4], y: &[Rational; 4], params: &SomosParams) -> Result<Rational> {
    if x.iter().any(Zero::is_zero) {
        return Err(Error::DivisionByZero { context: "apply_l" });
    }
    let row = coefficient_row(x, params);
    Ok((0..4).map(|j| &row.c[j] * &y[j] / &x[j]).sum())
}

/// `F_n = D_n − J⁽¹⁾ x_n x_{n+1} x_{n+2} x_{n+3}`.
pub fn inhomogeneity(x: &[Rational; 4], j1: &Rational, params: &SomosParams) -> Rational {
    let prod: Rational = x.iter().product();
    coefficient_row(x, params).d - j1 * prod
}

/// Solve `L_n(y) = F_n` for `y_{n+3}` given `y_n, y_{n+1}, y_{n+2}`.
///
/// `n` is only used to label errors.
pub fn shadow_iv_step(
    x: &[Rational; 4],
    y: &[Rational; 3],
    j1: &Rational,
    params: &SomosParams,
    n: i64,
) -> Result<Rational> {
    if x.iter().any(Zero::is_zero) {
        return Err(Error::vanishing_at(n));
    }
    let row = coefficient_row(x, params);
    if row.c[3].is_zero() {
        return Err(Error::SingularLeadingCoefficient { n });
    }
    let prod: Rational = x.iter().product();
    let f = &row.d - j1 * prod;
    let partial: Rational = (0..3).map(|j| &row.c[j] * &y[j] / &x[j]).sum();
    Ok(&x[3] * (f - partial) / &row.c[3])
}

/// Iterate [`shadow_iv_step`] from three seed values at `seed_lo..seed_lo+2`
/// up to index `hi`.
pub fn shadow_iv_sequence(
    orbit: &SomosOrbit,
    seed_lo: i64,
    seed: [Rational; 3],
    j1: &Rational,
    params: &SomosParams,
    hi: i64,
) -> Result<Sequence> {
    let mut values: Vec<Rational> = seed.into();
    let mut n = seed_lo;
    while n + 3 <= hi {
        let k = (n - seed_lo) as usize;
        let y = [
            values[k].clone(),
            values[k + 1].clone(),
            values[k + 2].clone(),
        ];
        let next = shadow_iv_step(&x_window(orbit, n)?, &y, j1, params, n)?;
        values.push(next);
        n += 1;
    }
    values.truncate((hi - seed_lo + 1).max(0) as usize);
    Ok(Sequence::new(seed_lo, values))
}

/// Solve the homogeneous odd equation for `y_n` from `y_{n+1..n+4}`.
pub fn homogeneous_backward_step(
    x: &[Rational; 5],
    y: &[Rational; 4],
    params: &SomosParams,
    n: i64,
) -> Result<Rational> {
    if x[4].is_zero() {
        return Err(Error::vanishing_at(n + 4));
    }
    let (a0, b0) = (params.alpha0(), params.beta0());
    let rest =
        a0 * &x[1] * &y[2] + int(2) * b0 * &x[2] * &y[1] + a0 * &x[3] * &y[0] - &x[0] * &y[3];
    Ok(rest / &x[4])
}

/// `y_n = −x_n Σ_{j<n} v_j` for `0 ≤ n ≤ orbit.hi()`, plus `y₋₁` from one
/// backward homogeneous step. `map0` is the state `(v₀, d₁)`.
pub fn shadow_iii_from_map(orbit: &SomosOrbit, map0: &MapState) -> Result<Sequence> {
    let params = homogeneous(&orbit.params);
    let (alpha, beta, j_map) = params_from_map(&map0.u, &map0.f, &dtoda_invariant(map0));
    let j0 = j_even(&orbit.even_window(-1)?, params.alpha0(), params.beta0())?;
    if &alpha != params.alpha0() || &beta != params.beta0() || j_map != j0 {
        return Err(Error::Consistency(format!(
            "map parameters (α, β, J) = ({alpha}, {beta}, {j_map}) do not match the orbit ({}, {}, {j0})",
            params.alpha0(),
            params.beta0()
        )));
    }
    if map0.d != ratios_d(orbit, 1)? {
        return Err(Error::Consistency("map d₁ differs from x₂x₀/x₁²".into()));
    }
    let hi = orbit.hi();
    if hi < 3 || orbit.lo() > -1 {
        return Err(Error::Consistency(
            "host orbit must cover indices -1..=3".into(),
        ));
    }
    let mut values = vec![Rational::zero()];
    let mut state = map0.clone();
    let mut sum = Rational::zero();
    for n in 1..=hi {
        // state holds (v_{n-1}, d_n)
        sum += &state.v;
        values.push(-orbit.x(n)? * &sum);
        if n < hi {
            state = dtoda_step(&state)?;
            if n + 1 < hi && state.d != ratios_d(orbit, n + 1)? {
                return Err(Error::Consistency(format!(
                    "map d_{} disagrees with the orbit",
                    n + 1
                )));
            }
        }
    }
    let x = x_window::<5>(orbit, -1)?;
    let y = [
        values[0].clone(),
        values[1].clone(),
        values[2].clone(),
        values[3].clone(),
    ];
    let below = homogeneous_backward_step(&x, &y, &params, -1)?;
    values.insert(0, below);
    Ok(Sequence::new(-1, values))
}

/// The accumulators `f_n⁽ⁱ⁾, f_n⁽ⁱⁱ⁾, f_n⁽ⁱⁱⁱ⁾` at index `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VoPState {
    pub f: [Rational; 3],
    pub n: i64,
}

impl VoPState {
    pub fn zero(n: i64) -> Self {
        VoPState {
            f: std::array::from_fn(|_| Rational::zero()),
            n,
        }
    }
}

/// Determinant of the basis values at `n, n+1, n+2`.
pub fn casoratian3(basis: [&Sequence; 3], n: i64) -> Result<Rational> {
    let rows = (0..3)
        .map(|k| {
            basis
                .iter()
                .map(|s| s.get(n + k).cloned())
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rational_det(rows))
}

/// General solution `y_n = Σ_j f_n⁽ʲ⁾ y_n⁽ʲ⁾` of `L_n(y) = F_n` from the
/// seed accumulators, for indices `seed.n..=hi`.
///
/// Basis sequences must cover `seed.n..=hi`; the last step taken is at
/// `n = hi − 3`, and the top two values use the constraints of that step.
pub fn variation_of_parameters(
    orbit: &SomosOrbit,
    basis: [&Sequence; 3],
    j1: &Rational,
    params: &SomosParams,
    seed: &VoPState,
    hi: i64,
) -> Result<Sequence> {
    let combine = |f: &[Rational; 3], m: i64| -> Result<Rational> {
        let mut acc = Rational::zero();
        for (fj, s) in f.iter().zip(basis.iter()) {
            acc += fj * s.get(m)?;
        }
        Ok(acc)
    };
    let mut f = seed.f.clone();
    let mut values = Vec::new();
    let mut n = seed.n;
    while n + 3 <= hi {
        values.push(combine(&f, n)?);
        let x = x_window::<4>(orbit, n)?;
        if x.iter().any(Zero::is_zero) {
            return Err(Error::vanishing_at(n));
        }
        let row = coefficient_row(&x, params);
        if row.c[3].is_zero() {
            return Err(Error::SingularLeadingCoefficient { n });
        }
        let det = casoratian3(basis, n + 1)?;
        if det.is_zero() {
            return Err(Error::SingularCasoratian { n });
        }
        let r = &x[3] * inhomogeneity(&x, j1, params) / &row.c[3] / det;
        let at = |s: usize, k: i64| basis[s].get(n + k);
        let (a1, a2) = (at(0, 1)?, at(0, 2)?);
        let (b1, b2) = (at(1, 1)?, at(1, 2)?);
        let (c1, c2) = (at(2, 1)?, at(2, 2)?);
        let cof = [b1 * c2 - c1 * b2, c1 * a2 - a1 * c2, a1 * b2 - b1 * a2];
        for (fj, cj) in f.iter_mut().zip(cof) {
            *fj += &r * cj;
        }
        n += 1;
    }
    for m in n..=hi {
        values.push(combine(&f, m)?);
    }
    Ok(Sequence::new(seed.n, values))
}

/// Four shadows along one host orbit: `y⁽ⁱ⁾ = x`, `y⁽ⁱⁱ⁾ = n x`, the
/// map-sum `y⁽ⁱⁱⁱ⁾`, and `y⁽ⁱᵛ⁾` with `J⁽¹⁾ = −1` and zero seed at `-1..=1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShadowBasis {
    pub y_i: Sequence,
    pub y_ii: Sequence,
    pub y_iii: Sequence,
    pub y_iv: Sequence,
}

impl ShadowBasis {
    /// Basis on `-1..=hi` for a host orbit seeded at index `-1`.
    pub fn for_orbit(orbit: &SomosOrbit, hi: i64) -> Result<Self> {
        let mut host = orbit.clone();
        host.extend_to(-1, hi.max(3))?;
        let params = homogeneous(&host.params);
        let y_i = Sequence::new(
            -1,
            (-1..=hi)
                .map(|n| host.x(n).cloned())
                .collect::<Result<_>>()?,
        );
        let y_ii = Sequence::new(-1, y_i.iter().map(|(n, x)| int(n) * x).collect());
        let map0 = MapState::from_orbit(&host)?;
        let y_iii = shadow_iii_from_map(&host, &map0)?.slice(-1, hi)?;
        let zero = || Rational::zero();
        let y_iv = shadow_iv_sequence(&host, -1, [zero(), zero(), zero()], &int(-1), &params, hi)?;
        Ok(ShadowBasis {
            y_i,
            y_ii,
            y_iii,
            y_iv,
        })
    }

    /// The four Table-1 shadows of 1, 1, 1, 1, 2, 3, 7, 23, ….
    pub fn classical(hi: i64) -> Result<Self> {
        ShadowBasis::for_orbit(&SomosOrbit::classical(), hi)
    }

    pub fn rows(&self) -> [&Sequence; 4] {
        [&self.y_i, &self.y_ii, &self.y_iii, &self.y_iv]
    }

    pub fn row(&self, name: &str) -> Option<&Sequence> {
        match name {
            "i" => Some(&self.y_i),
            "ii" => Some(&self.y_ii),
            "iii" => Some(&self.y_iii),
            "iv" => Some(&self.y_iv),
            _ => None,
        }
    }

    /// Determinant of the 4×4 matrix of the four rows at `n..n+3`.
    pub fn independence_det(&self, n: i64) -> Result<Rational> {
        let rows = (0..4)
            .map(|k| {
                self.rows()
                    .iter()
                    .map(|s| s.get(n + k).cloned())
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(rational_det(rows))
    }
}

/// First index `≥ from` where the sequence is not strictly positive.
pub fn positivity_scan(seq: &Sequence, from: i64) -> Option<i64> {
    seq.iter()
        .find(|(n, v)| *n >= from && !(*v > &Rational::zero()))
        .map(|(n, _)| n)
}

/// Residuals of the odd equation over every five-term window of `y`.
pub fn residuals(
    orbit: &SomosOrbit,
    y: &Sequence,
    params: &SomosParams,
) -> Result<Vec<(i64, Rational)>> {
    (y.lo..=y.hi() - 4)
        .map(|n| {
            Ok((
                n,
                shadow_residual_4(&x_window(orbit, n)?, &y.window(n)?, params),
            ))
        })
        .collect()
}

/// `L_n(y)` over every four-term window of `y`.
pub fn l_values(
    orbit: &SomosOrbit,
    y: &Sequence,
    params: &SomosParams,
) -> Result<Vec<(i64, Rational)>> {
    (y.lo..=y.hi() - 3)
        .map(|n| Ok((n, apply_l(&x_window(orbit, n)?, &y.window(n)?, params)?)))
        .collect()
}

/// `J⁽¹⁾` over every four-term window of `y`.
pub fn j_odd_values(
    orbit: &SomosOrbit,
    y: &Sequence,
    params: &SomosParams,
) -> Result<Vec<(i64, Rational)>> {
    (y.lo..=y.hi() - 3)
        .map(|n| Ok((n, j_odd(&x_window(orbit, n)?, &y.window(n)?, params)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dualnum::{rat, Dual};

    const TABLE: [[i64; 14]; 4] = [
        [1, 1, 1, 1, 2, 3, 7, 23, 59, 314, 1529, 8209, 83313, 620297],
        [
            -1, 0, 1, 2, 6, 12, 35, 138, 413, 2512, 13761, 82090, 916443, 7443564,
        ],
        [
            0, 0, 1, 1, 3, 7, 15, 70, 202, 1107, 6906, 36386, 420371, 3594979,
        ],
        [
            0, 0, 0, 1, 1, 3, 10, 22, 108, 472, 2174, 17792, 120536, 1161627,
        ],
    ];

    fn table_row(k: usize) -> Sequence {
        Sequence::new(-1, TABLE[k].iter().map(|&v| int(v)).collect())
    }

    fn host(hi: i64) -> SomosOrbit {
        let mut o = SomosOrbit::classical();
        o.extend_to(-1, hi).unwrap();
        o
    }

    #[test]
    fn classical_basis_reproduces_table() {
        let b = ShadowBasis::classical(12).unwrap();
        for (k, row) in b.rows().iter().enumerate() {
            assert_eq!(**row, table_row(k), "row {k}");
        }
    }

    #[test]
    fn table_rows_solve_the_odd_equation() {
        let o = host(12);
        let p = SomosParams::classical();
        for k in 0..4 {
            for (n, r) in residuals(&o, &table_row(k), &p).unwrap() {
                assert!(r.is_zero(), "row {k} window {n}");
            }
        }
    }

    #[test]
    fn l_kernel_and_inhomogeneity() {
        let o = host(12);
        let p = SomosParams::classical();
        for k in 0..3 {
            assert!(l_values(&o, &table_row(k), &p)
                .unwrap()
                .iter()
                .all(|(_, v)| v.is_zero()));
            assert!(j_odd_values(&o, &table_row(k), &p)
                .unwrap()
                .iter()
                .all(|(_, v)| v.is_zero()));
        }
        let iv = table_row(3);
        for (n, v) in l_values(&o, &iv, &p).unwrap() {
            let x = x_window::<4>(&o, n).unwrap();
            assert_eq!(v, inhomogeneity(&x, &int(-1), &p));
        }
        assert_eq!(l_values(&o, &iv, &p).unwrap()[0], (-1, int(1)));
        assert!(j_odd_values(&o, &iv, &p)
            .unwrap()
            .iter()
            .all(|(_, v)| *v == int(-1)));
    }

    #[test]
    fn iv_step_examples() {
        let o = host(12);
        let p = SomosParams::classical();
        let z = || Rational::zero();
        let one = x_window::<4>(&o, -1).unwrap();
        assert_eq!(
            shadow_iv_step(&one, &[z(), z(), z()], &int(-1), &p, -1).unwrap(),
            int(1)
        );
        let zeros = shadow_iv_sequence(&o, -1, [z(), z(), z()], &int(0), &p, 12).unwrap();
        assert!(zeros.values.iter().all(Zero::is_zero));
        assert_eq!(zeros.hi(), 12);
    }

    #[test]
    fn singular_leading_coefficient() {
        // α = β = 2, x = (1,1,1,2): C3 = 2 + 2 − 4
        let x = [int(1), int(1), int(1), int(2)];
        let p = SomosParams::new(Dual::from_even(int(2)), Dual::from_even(int(2))).unwrap();
        let c3 = coefficient_row(&x, &p).c[3].clone();
        assert!(c3.is_zero());
        let z = || Rational::zero();
        assert_eq!(
            shadow_iv_step(&x, &[z(), z(), z()], &int(1), &p, 7),
            Err(Error::SingularLeadingCoefficient { n: 7 })
        );
    }

    #[test]
    fn map_route_and_backward_step() {
        let o = host(12);
        let map0 = MapState::new(int(-1), int(-3), int(-1), int(1));
        let y = shadow_iii_from_map(&o, &map0).unwrap();
        assert_eq!(y, table_row(2));
        assert_eq!(y.get(-1).unwrap(), &int(0));
        let bad = MapState::new(int(-1), int(-3), int(-1), int(2));
        assert!(matches!(
            shadow_iii_from_map(&o, &bad),
            Err(Error::Consistency(_))
        ));
        let wrong_f = MapState::new(int(-1), int(-2), int(-1), int(1));
        assert!(matches!(
            shadow_iii_from_map(&o, &wrong_f),
            Err(Error::Consistency(_))
        ));
    }

    #[test]
    fn irrational_u_refuses_map_route() {
        let p = SomosParams::new(Dual::from_even(int(2)), Dual::from_even(int(1))).unwrap();
        let o = SomosOrbit::new(p, -1, std::array::from_fn(|_| DualScalar::from_int(1)));
        match ShadowBasis::for_orbit(&o, 8) {
            Err(Error::Consistency(msg)) => assert!(msg.contains("bordered")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn casoratian_properties() {
        let b = ShadowBasis::classical(6).unwrap();
        let c = casoratian3([&b.y_i, &b.y_ii, &b.y_iii], 0).unwrap();
        assert!(!c.is_zero());
        assert!(casoratian3([&b.y_i, &b.y_i, &b.y_iii], 0)
            .unwrap()
            .is_zero());
        let scale =
            |s: &Sequence| Sequence::new(s.lo, s.values.iter().map(|v| v * int(3)).collect());
        let scaled = casoratian3([&scale(&b.y_i), &scale(&b.y_ii), &scale(&b.y_iii)], 0).unwrap();
        assert_eq!(scaled, c * int(27));
        assert!(!b.independence_det(-1).unwrap().is_zero());
    }

    #[test]
    fn vop_matches_direct_recurrence() {
        let o = host(12);
        let b = ShadowBasis::classical(12).unwrap();
        let p = SomosParams::classical();
        let basis = [&b.y_i, &b.y_ii, &b.y_iii];
        let y = variation_of_parameters(&o, basis, &int(-1), &p, &VoPState::zero(-1), 12).unwrap();
        assert_eq!(y, table_row(3));
        let zero =
            variation_of_parameters(&o, basis, &int(0), &p, &VoPState::zero(-1), 12).unwrap();
        assert!(zero.values.iter().all(Zero::is_zero));
    }

    #[test]
    fn vop_with_odd_coefficients() {
        let o = host(12);
        let b = ShadowBasis::classical(12).unwrap();
        let p = SomosParams::new(Dual::new(int(1), int(1)), Dual::new(int(1), int(1))).unwrap();
        let seed = VoPState {
            f: [rat(1, 2), int(-3), rat(2, 7)],
            n: -1,
        };
        let y = variation_of_parameters(&o, [&b.y_i, &b.y_ii, &b.y_iii], &int(2), &p, &seed, 12)
            .unwrap();
        for (n, v) in l_values(&o, &y, &p).unwrap() {
            assert_eq!(
                v,
                inhomogeneity(&x_window(&o, n).unwrap(), &int(2), &p),
                "n={n}"
            );
        }
        for (n, r) in residuals(&o, &y, &p).unwrap() {
            assert!(r.is_zero(), "n={n}");
        }
        let direct = shadow_iv_sequence(
            &o,
            -1,
            [
                y.get(-1).unwrap().clone(),
                y.get(0).unwrap().clone(),
                y.get(1).unwrap().clone(),
            ],
            &int(2),
            &p,
            12,
        )
        .unwrap();
        assert_eq!(direct, y);
    }

    #[test]
    fn positivity() {
        let b = ShadowBasis::classical(20).unwrap();
        assert_eq!(positivity_scan(&b.y_iii, 1), None);
        assert_eq!(positivity_scan(&b.y_iv, 2), None);
        assert_eq!(positivity_scan(&b.y_iv, -1), Some(-1));
    }
}
