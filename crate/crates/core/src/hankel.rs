//! Moment sequences from the quadratic recursion
//!
//! ```text
//! s_j = â s_{j-2} + b̂ Σ s_i s_{j-2-i} + ĉ Σ s_i s_{j-3-i}
//! ```
//!
//! and the Hankel / bordered Hankel determinants built from them. Over the
//! dual numbers, `X_n = Δ_{n-1}` solves the dual Somos-4 recurrence; over
//! the rationals the bordered determinants give a third shadow sequence.

use num_traits::{One, Zero};

use crate::dualnum::{int, Dual, DualScalar, Rational};
use crate::error::{Error, Result};
use crate::shadow::Sequence;
use crate::somos::{SomosOrbit, SomosParams};

/// The five parameters `â, b̂, ĉ, s₀, s₁`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentSpec {
    pub a_hat: DualScalar,
    pub b_hat: DualScalar,
    pub c_hat: DualScalar,
    pub s0: DualScalar,
    pub s1: DualScalar,
}

impl MomentSpec {
    /// `â, b̂, ĉ, s₀` must be units; `s₁` is unrestricted.
    pub fn new(
        a_hat: DualScalar,
        b_hat: DualScalar,
        c_hat: DualScalar,
        s0: DualScalar,
        s1: DualScalar,
    ) -> Result<Self> {
        for (name, v) in [
            ("a_hat", &a_hat),
            ("b_hat", &b_hat),
            ("c_hat", &c_hat),
            ("s0", &s0),
        ] {
            if !v.is_unit() {
                return Err(Error::InvalidParams(format!("{name} = {v} is not a unit")));
            }
        }
        Ok(MomentSpec {
            a_hat,
            b_hat,
            c_hat,
            s0,
            s1,
        })
    }

    /// Parse the comma-separated form `â,b̂,ĉ,s₀,s₁`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').collect();
        if parts.len() != 5 {
            return Err(Error::Parse {
                position: 0,
                message: format!(
                    "expected 5 comma-separated dual scalars, got {}",
                    parts.len()
                ),
            });
        }
        let mut offset = 0;
        let mut vals = Vec::with_capacity(5);
        for p in parts {
            let v = crate::dualnum::dual_parse(p).map_err(|e| match e {
                Error::Parse { position, message } => Error::Parse {
                    position: position + offset,
                    message,
                },
                other => other,
            })?;
            vals.push(v);
            offset += p.len() + 1;
        }
        let [a, b, c, s0, s1]: [DualScalar; 5] = vals.try_into().expect("five values");
        MomentSpec::new(a, b, c, s0, s1)
    }

    /// `â = b̂ = ĉ = s₀ = 1`, `s₁ = 0`: the classical Somos-4 moments.
    pub fn classical() -> Self {
        let one = DualScalar::one();
        MomentSpec {
            a_hat: one.clone(),
            b_hat: one.clone(),
            c_hat: one.clone(),
            s0: one,
            s1: DualScalar::zero(),
        }
    }
}

impl std::fmt::Display for MomentSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{},{},{},{},{}",
            self.a_hat, self.b_hat, self.c_hat, self.s0, self.s1
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentSeq {
    pub spec: MomentSpec,
    pub s: Vec<DualScalar>,
}

impl MomentSeq {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    fn need(&self, top: usize) -> Result<()> {
        if top < self.s.len() {
            Ok(())
        } else {
            Err(Error::Consistency(format!(
                "moment s_{top} requested but only {} moments computed",
                self.s.len()
            )))
        }
    }

    /// The rational moment sequence of even parts.
    pub fn even_parts(&self) -> Vec<Rational> {
        self.s.iter().map(|t| t.even.clone()).collect()
    }
}

/// `s_0, …, s_{count-1}`.
pub fn moments(spec: &MomentSpec, count: usize) -> MomentSeq {
    let mut s: Vec<DualScalar> = Vec::with_capacity(count.max(2));
    s.push(spec.s0.clone());
    s.push(spec.s1.clone());
    for j in 2..count {
        let conv2 = (0..=j - 2).fold(DualScalar::zero(), |acc, i| &acc + &(&s[i] * &s[j - 2 - i]));
        let conv3 = if j >= 3 {
            (0..=j - 3).fold(DualScalar::zero(), |acc, i| &acc + &(&s[i] * &s[j - 3 - i]))
        } else {
            DualScalar::zero()
        };
        let next =
            &(&(&spec.a_hat * &s[j - 2]) + &(&spec.b_hat * &conv2)) + &(&spec.c_hat * &conv3);
        s.push(next);
    }
    s.truncate(count);
    MomentSeq {
        spec: spec.clone(),
        s,
    }
}

/// Determinant of a square rational matrix by fraction-free (Bareiss)
/// elimination with row pivoting.
pub fn rational_det(mut m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    if n == 0 {
        return Rational::one();
    }
    let mut sign = Rational::one();
    let mut prev = Rational::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return Rational::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[k][k] * &m[i][j] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// `det(A + εB) = det A + ε Σ_i det(A with row i taken from B)`.
pub fn dual_det(m: &[Vec<DualScalar>]) -> DualScalar {
    let n = m.len();
    let even: Vec<Vec<Rational>> = m
        .iter()
        .map(|r| r.iter().map(|t| t.even.clone()).collect())
        .collect();
    let mut odd = Rational::zero();
    for i in 0..n {
        if m[i].iter().all(|t| t.odd.is_zero()) {
            continue;
        }
        let mut a = even.clone();
        a[i] = m[i].iter().map(|t| t.odd.clone()).collect();
        odd += rational_det(a);
    }
    Dual::new(rational_det(even), odd)
}

/// `Δ_n = det(s_{i+j})_{0≤i,j<n}`, with `Δ_0 = 1`.
pub fn hankel_det(m: &MomentSeq, n: usize) -> Result<DualScalar> {
    if n == 0 {
        return Ok(DualScalar::one());
    }
    m.need(2 * n - 2)?;
    let mat: Vec<Vec<DualScalar>> = (0..n)
        .map(|i| (0..n).map(|j| m.s[i + j].clone()).collect())
        .collect();
    Ok(dual_det(&mat))
}

/// Bordered determinant `Δ*_n`: Hankel columns `s_{i+j}` for `j < n-1` and
/// a last column `s_{i+n}`; `Δ*_0 = 0`.
pub fn bordered_det(m: &MomentSeq, n: usize) -> Result<DualScalar> {
    if n == 0 {
        return Ok(DualScalar::zero());
    }
    m.need(2 * n - 1)?;
    let mat: Vec<Vec<DualScalar>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if j + 1 < n {
                        m.s[i + j].clone()
                    } else {
                        m.s[i + n].clone()
                    }
                })
                .collect()
        })
        .collect();
    Ok(dual_det(&mat))
}

/// Coefficients and first integral fixed by a moment spec.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentParams {
    pub u: DualScalar,
    pub f: DualScalar,
    pub alpha: DualScalar,
    pub beta: DualScalar,
    pub j: DualScalar,
}

impl MomentParams {
    pub fn somos_params(&self) -> Result<SomosParams> {
        SomosParams::new(self.alpha.clone(), self.beta.clone())
    }
}

/// `U = −s₀ĉ − s₁b̂`, `F = −â − 2s₀b̂`, `J = 2(s₀âb̂ + s₀²b̂² + s₁ĉ)`,
/// `α = U²`, `β = αF + J²/4`.
pub fn params_from_moments(spec: &MomentSpec) -> MomentParams {
    let MomentSpec {
        a_hat,
        b_hat,
        c_hat,
        s0,
        s1,
    } = spec;
    let two = int(2);
    let u = -(&(s0 * c_hat) + &(s1 * b_hat));
    let f = -(a_hat + &(s0 * b_hat).scale(&two));
    let j = (&(&(&(s0 * a_hat) * b_hat) + &(&(s0 * s0) * &(b_hat * b_hat))) + &(s1 * c_hat))
        .scale(&two);
    let alpha = &u * &u;
    let beta = &(&alpha * &f) + &(&j * &j).scale(&Rational::new(1.into(), 4.into()));
    MomentParams {
        u,
        f,
        alpha,
        beta,
        j,
    }
}

/// `X_n = Δ_{n−1}` for `n = 1..=hi`, as a dual sequence starting at `n = 1`.
pub fn hankel_terms(m: &MomentSeq, hi: usize) -> Result<Vec<DualScalar>> {
    (1..=hi).map(|n| hankel_det(m, n - 1)).collect()
}

/// `v_n = Δ*_{n−1}/Δ_{n−1} − Δ*_n/Δ_n` on the even parts, `n ≥ 1`.
pub fn v_from_hankel(m: &MomentSeq, n: usize) -> Result<Rational> {
    if n == 0 {
        return Err(Error::InvalidParams("v_from_hankel needs n >= 1".into()));
    }
    let (d_prev, d_cur) = (hankel_det(m, n - 1)?.even, hankel_det(m, n)?.even);
    if d_prev.is_zero() || d_cur.is_zero() {
        return Err(Error::DivisionByZero {
            context: "v_from_hankel",
        });
    }
    let (b_prev, b_cur) = (bordered_det(m, n - 1)?.even, bordered_det(m, n)?.even);
    Ok(b_prev / d_prev - b_cur / d_cur)
}

/// Third shadow representative `y_n = Δ*_{n−1}` for `n = 1..=hi`, checked
/// against the host orbit through `Δ_{n−1} = x_n`.
///
/// The result differs from the map-sum normalization by `−v₀·x_n`.
pub fn shadow_iii_from_bordered(m: &MomentSeq, host: &SomosOrbit, hi: i64) -> Result<Sequence> {
    if hi < 1 || m.len() < 2 * hi as usize - 2 {
        return Err(Error::Consistency(format!(
            "{} moments are not enough for the bordered route up to n = {hi}",
            m.len()
        )));
    }
    let mut values = Vec::with_capacity(hi as usize);
    for n in 1..=hi {
        let k = (n - 1) as usize;
        let delta = hankel_det(m, k)?.even;
        if &delta != host.x(n)? {
            return Err(Error::Consistency(format!(
                "Δ_{k} = {delta} differs from host x_{n} = {}",
                host.x(n)?
            )));
        }
        values.push(bordered_det(m, k)?.even);
    }
    Ok(Sequence::new(1, values))
}
