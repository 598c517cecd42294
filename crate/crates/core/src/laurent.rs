//! Exact Laurent polynomials over Q, cyclotomic polynomials and root diagnostics.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::dd::{Dd, DdComplex};
use crate::error::{Error, Result};
use crate::linalg::C64;

/// Numeric roots count when `|p(z)| < ROOT_TOL * (1 + sum |coeff|)`.
pub const ROOT_TOL: f64 = 1e-8;

/// Laurent polynomial `sum_i coeffs[i] t^(low + i)` with trimmed ends.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    low: i64,
    coeffs: Vec<BigRational>,
}

fn q(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly {
            low: 0,
            coeffs: Vec::new(),
        }
    }

    pub fn one() -> Self {
        Self::monomial(BigRational::one(), 0)
    }

    /// The variable `t`.
    pub fn t() -> Self {
        Self::monomial(BigRational::one(), 1)
    }

    pub fn monomial(c: BigRational, exp: i64) -> Self {
        Self::from_parts(exp, vec![c])
    }

    /// `sum_i coeffs[i] t^(low + i)` with integer coefficients.
    pub fn from_ints(low: i64, coeffs: &[i64]) -> Self {
        Self::from_parts(low, coeffs.iter().map(|&c| q(c)).collect())
    }

    pub fn from_parts(low: i64, mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        let lead = coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead == coeffs.len() {
            return Self::zero();
        }
        coeffs.drain(..lead);
        LaurentPoly {
            low: low + lead as i64,
            coeffs,
        }
    }

    /// `t^e - 1` for any integer `e` (zero when `e = 0`).
    pub fn t_pow_minus_one(e: i64) -> Self {
        &Self::monomial(BigRational::one(), e) - &Self::one()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn low(&self) -> i64 {
        self.low
    }

    pub fn high(&self) -> i64 {
        self.low + self.coeffs.len() as i64 - 1
    }

    /// `high - low` (0 for constants and for zero).
    pub fn span(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, exp: i64) -> BigRational {
        let i = exp - self.low;
        if i < 0 || i as usize >= self.coeffs.len() {
            BigRational::zero()
        } else {
            self.coeffs[i as usize].clone()
        }
    }

    /// `(exponent, coefficient)` for nonzero coefficients, ascending.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigRational)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.low + i as i64, c))
    }

    pub fn leading(&self) -> BigRational {
        self.coeffs
            .last()
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn shift(&self, by: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        LaurentPoly {
            low: self.low + by,
            coeffs: self.coeffs.clone(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::from_parts(self.low, self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Integer coefficient vector from `low` to `high`, if all coefficients are integers.
    pub fn integer_coeffs(&self) -> Option<Vec<i64>> {
        self.coeffs
            .iter()
            .map(|c| {
                if c.is_integer() {
                    c.to_integer().to_i64()
                } else {
                    None
                }
            })
            .collect()
    }

    /// Formal derivative `d/dt`.
    pub fn derivative(&self) -> Self {
        Self::from_parts(
            self.low - 1,
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c * q(self.low + i as i64))
                .collect(),
        )
    }

    /// Value at `t = 1`.
    pub fn at_one(&self) -> BigRational {
        self.coeffs.iter().fold(BigRational::zero(), |a, c| a + c)
    }

    /// Exact quotient `self / d`; fails when the division leaves a remainder.
    pub fn divexact(&self, d: &LaurentPoly) -> Result<Self> {
        if d.is_zero() {
            return Err(Error::InexactDivision);
        }
        if self.is_zero() {
            return Ok(Self::zero());
        }
        let (quo, rem) = poly_div_rem(&self.coeffs, &d.coeffs);
        if rem.iter().any(|c| !c.is_zero()) {
            return Err(Error::InexactDivision);
        }
        Ok(Self::from_parts(self.low - d.low, quo))
    }

    /// Gcd in `Q[t^{±1}]`, returned in normal form (see [`LaurentPoly::normalized`]).
    pub fn gcd(&self, other: &LaurentPoly) -> Self {
        let mut a = self.coeffs.clone();
        let mut b = other.coeffs.clone();
        while b.iter().any(|c| !c.is_zero()) {
            let (_, r) = poly_div_rem(&a, &b);
            a = b;
            b = trim(r);
        }
        Self::from_parts(0, a).normalized()
    }

    /// Normal form: lowest exponent 0, primitive integer coefficients, positive leading coefficient.
    pub fn normalized(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let lcm = self
            .coeffs
            .iter()
            .fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
        let sign = if ints.last().unwrap().is_negative() {
            -BigInt::one()
        } else {
            BigInt::one()
        };
        Self::from_parts(
            0,
            ints.into_iter()
                .map(|x| BigRational::from_integer(x / &g * &sign))
                .collect(),
        )
    }

    /// Alexander normalization: normal form, then sign flipped so the constant
    /// term is positive. Returns the polynomial and its value at `t = 1`.
    pub fn alexander_normalized(&self) -> (Self, BigRational) {
        let mut p = self.normalized();
        if p.coeff(0).is_negative() {
            p = -&p;
        }
        let v = p.at_one();
        (p, v)
    }

    /// Coefficients read the same reversed, up to a global sign.
    pub fn is_symmetric(&self) -> bool {
        let rev: Vec<BigRational> = self.coeffs.iter().rev().cloned().collect();
        rev == self.coeffs || rev.iter().zip(&self.coeffs).all(|(a, b)| *a == -b.clone())
    }

    /// `p(z)` in double-double arithmetic (Horner on the shifted polynomial).
    pub fn evaluate_dd(&self, z: DdComplex) -> DdComplex {
        let mut acc = DdComplex::ZERO;
        for c in self.coeffs.iter().rev() {
            acc = acc * z + DdComplex::from_real(rational_to_dd(c));
        }
        acc * z.powi(self.low)
    }

    pub fn evaluate(&self, z: &RootSpec) -> C64 {
        self.evaluate_dd(z.value_dd()).to_c64()
    }

    pub fn abs_coeff_sum(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::INFINITY).abs())
            .sum()
    }

    /// Largest `e` with `cyclotomic(m)^e | self`.
    pub fn cyclotomic_multiplicity(&self, m: u64) -> usize {
        let phi = cyclotomic(m);
        let mut p = self.clone();
        let mut e = 0;
        while !p.is_zero() {
            match p.divexact(&phi) {
                Ok(quo) => {
                    p = quo;
                    e += 1;
                }
                Err(_) => break,
            }
        }
        e
    }

    /// Multiplicity of `z` as a root; exact for cyclotomic specs.
    pub fn root_multiplicity(&self, z: &RootSpec) -> usize {
        assert!(!self.is_zero(), "root multiplicity of the zero polynomial");
        match z {
            RootSpec::Cyclotomic { order, .. } => self.cyclotomic_multiplicity(*order),
            RootSpec::Numeric(_) => {
                let zd = z.value_dd();
                let mut p = self.clone();
                for e in 0..=self.span() + 1 {
                    let v = p.evaluate_dd(zd).to_c64().norm();
                    if v > ROOT_TOL * (1.0 + p.abs_coeff_sum()) {
                        return e;
                    }
                    p = p.derivative();
                    if p.is_zero() {
                        return e + 1;
                    }
                }
                self.span() + 1
            }
        }
    }

    /// Splits off cyclotomic factors: `self = unit * prod Phi_m^e * cofactor`.
    pub fn cyclotomic_factorization(&self) -> (Vec<(u64, usize)>, LaurentPoly) {
        let mut rest = self.normalized();
        let mut factors = Vec::new();
        let deg = rest.span() as u64;
        if deg == 0 {
            return (factors, rest);
        }
        // phi(m) >= sqrt(m/2), so phi(m) <= deg forces m <= 2 deg^2
        for m in 1..=(2 * deg * deg).max(2) {
            if (rest.span() as u64) < euler_phi(m) {
                continue;
            }
            let e = rest.cyclotomic_multiplicity(m);
            if e > 0 {
                rest = rest
                    .divexact(&cyclotomic(m).pow(e as u32))
                    .expect("divisible")
                    .normalized();
                factors.push((m, e));
            }
            if rest.span() == 0 {
                break;
            }
        }
        (factors, rest)
    }

    /// `c0 + c1*t + c2*t^2 ...` with explicit coefficients, ascending.
    pub fn ascending_string(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.terms()
            .map(|(e, c)| match e {
                0 => format!("{c}"),
                1 => format!("{c}*t"),
                _ => format!("{c}*t^{e}"),
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }

    /// Descending form without spaces, e.g. `t^2-t+1`.
    pub fn compact_string(&self) -> String {
        self.to_string().replace(' ', "")
    }

    /// `(t^2-t+1)(t^4-t^2+1)` style string of the cyclotomic factorization.
    pub fn factored_string(&self) -> String {
        let (factors, rest) = self.cyclotomic_factorization();
        let mut out = String::new();
        let unit = rest.span() == 0;
        if !unit {
            out.push_str(&format!("({})", rest.compact_string()));
        } else if rest.leading() != BigRational::one() {
            out.push_str(&format!("{}", rest.leading()));
        }
        for (m, e) in factors {
            out.push_str(&format!("({})", cyclotomic(m).compact_string()));
            if e > 1 {
                out.push_str(&format!("^{e}"));
            }
        }
        if out.is_empty() {
            out.push('1');
        }
        out
    }
}

impl fmt::Display for LaurentPoly {
    /// Descending powers: `t^2 - t + 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<(i64, &BigRational)> = self.terms().collect();
        for (idx, (e, c)) in terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let one = a.is_one();
            match *e {
                0 => write!(f, "{a}")?,
                1 if one => write!(f, "t")?,
                1 => write!(f, "{a}t")?,
                _ if one => write!(f, "t^{e}")?,
                _ => write!(f, "{a}t^{e}")?,
            }
        }
        Ok(())
    }
}

impl<'a> Add<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, b: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() {
            return b.clone();
        }
        if b.is_zero() {
            return self.clone();
        }
        let low = self.low.min(b.low);
        let high = self.high().max(b.high());
        let v = (low..=high).map(|e| self.coeff(e) + b.coeff(e)).collect();
        LaurentPoly::from_parts(low, v)
    }
}

impl<'a> Sub<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, b: &LaurentPoly) -> LaurentPoly {
        self + &(-b)
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            low: self.low,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl<'a> Mul<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, b: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() || b.is_zero() {
            return LaurentPoly::zero();
        }
        let mut v = vec![BigRational::zero(); self.coeffs.len() + b.coeffs.len() - 1];
        for (i, x) in self.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                v[i + j] += x * y;
            }
        }
        LaurentPoly::from_parts(self.low + b.low, v)
    }
}

fn trim(mut v: Vec<BigRational>) -> Vec<BigRational> {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
    v
}

/// Ordinary polynomial long division over Q on ascending coefficient vectors.
fn poly_div_rem(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let b = trim(b.to_vec());
    let mut r = trim(a.to_vec());
    assert!(!b.is_empty(), "division by zero polynomial");
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut quo = vec![BigRational::zero(); r.len() - b.len() + 1];
    let lb = b.last().unwrap().clone();
    while r.len() >= b.len() && !r.is_empty() {
        let shift = r.len() - b.len();
        let c = r.last().unwrap() / &lb;
        for (i, bi) in b.iter().enumerate() {
            let d = &c * bi;
            r[shift + i] -= d;
        }
        quo[shift] = c;
        r.pop();
        r = trim(r);
    }
    (quo, r)
}

fn rational_to_dd(c: &BigRational) -> Dd {
    let num = bigint_to_dd(c.numer());
    if c.denom().is_one() {
        num
    } else {
        num.div(bigint_to_dd(c.denom()))
    }
}

fn bigint_to_dd(x: &BigInt) -> Dd {
    let hi = x.to_f64().unwrap_or(f64::INFINITY);
    if !hi.is_finite() {
        return Dd::from_f64(hi);
    }
    let rest = x - BigInt::from_f64_exact(hi);
    Dd { hi, lo: 0.0 } + Dd::from_f64(rest.to_f64().unwrap_or(0.0))
}

trait FromF64Exact {
    fn from_f64_exact(x: f64) -> Self;
}

impl FromF64Exact for BigInt {
    fn from_f64_exact(x: f64) -> BigInt {
        num_traits::FromPrimitive::from_f64(x).unwrap_or_default()
    }
}

/// Euler's totient.
pub fn euler_phi(m: u64) -> u64 {
    let mut n = m;
    let mut result = m;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// The m-th cyclotomic polynomial, by exact division of `t^m - 1` by the
/// cyclotomic polynomials of the proper divisors.
pub fn cyclotomic(m: u64) -> LaurentPoly {
    assert!(m >= 1, "cyclotomic order must be positive");
    let mut p = LaurentPoly::t_pow_minus_one(m as i64);
    for d in 1..m {
        if m.is_multiple_of(d) {
            p = p
                .divexact(&cyclotomic(d))
                .expect("cyclotomic division is exact");
        }
    }
    p
}

/// A nonzero complex point: an exact root of unity or a numeric value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RootSpec {
    /// `exp(2 pi i numerator / order)`, reduced (`order = 1, numerator = 0` is 1).
    Cyclotomic {
        order: u64,
        numerator: u64,
    },
    Numeric(C64),
}

impl RootSpec {
    /// `exp(2 pi i k / m)`, reduced to lowest terms (`k` may be any integer).
    pub fn cyclotomic(m: u64, k: i64) -> Self {
        assert!(m >= 1);
        let k = k.rem_euclid(m as i64) as u64;
        let g = m.gcd(&k);
        RootSpec::Cyclotomic {
            order: m / g,
            numerator: k / g,
        }
    }

    pub fn numeric(z: C64) -> Result<Self> {
        if z.norm() == 0.0 || !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::BadRoot(format!("num:{},{}", z.re, z.im)));
        }
        Ok(RootSpec::Numeric(z))
    }

    pub fn one() -> Self {
        RootSpec::Cyclotomic {
            order: 1,
            numerator: 0,
        }
    }

    pub fn value(&self) -> C64 {
        match *self {
            RootSpec::Cyclotomic { order, numerator } => C64::from_polar(
                1.0,
                2.0 * std::f64::consts::PI * numerator as f64 / order as f64,
            ),
            RootSpec::Numeric(z) => z,
        }
    }

    pub fn value_dd(&self) -> DdComplex {
        match *self {
            RootSpec::Cyclotomic { order, numerator } => DdComplex::root_of_unity(order, numerator),
            RootSpec::Numeric(z) => DdComplex::from_c64(z),
        }
    }

    pub fn is_one(&self) -> bool {
        match *self {
            RootSpec::Cyclotomic { order, .. } => order == 1,
            RootSpec::Numeric(z) => (z - C64::new(1.0, 0.0)).norm() < 1e-14,
        }
    }

    pub fn pow(&self, e: i64) -> Self {
        match *self {
            RootSpec::Cyclotomic { order, numerator } => {
                let k = ((numerator as i128 * e as i128).rem_euclid(order as i128)) as i64;
                RootSpec::cyclotomic(order, k)
            }
            RootSpec::Numeric(z) => RootSpec::Numeric(z.powi(e as i32)),
        }
    }

    pub fn inverse(&self) -> Self {
        self.pow(-1)
    }

    /// `self / other`, exact when both are roots of unity.
    pub fn ratio(&self, other: &RootSpec) -> Self {
        match (*self, *other) {
            (
                RootSpec::Cyclotomic {
                    order: m1,
                    numerator: k1,
                },
                RootSpec::Cyclotomic {
                    order: m2,
                    numerator: k2,
                },
            ) => {
                let m = m1.lcm(&m2);
                let k = (k1 * (m / m1)) as i64 - (k2 * (m / m2)) as i64;
                RootSpec::cyclotomic(m, k)
            }
            _ => RootSpec::Numeric(self.value() / other.value()),
        }
    }

    pub fn mul(&self, other: &RootSpec) -> Self {
        self.ratio(&other.inverse())
    }
}

impl fmt::Display for RootSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RootSpec::Cyclotomic { order, numerator } => write!(f, "cyc:{order}/{numerator}"),
            RootSpec::Numeric(z) => write!(f, "num:{},{}", z.re, z.im),
        }
    }
}

impl FromStr for RootSpec {
    type Err = Error;

    /// `cyc:m/k` or `num:re,im`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadRoot(s.to_string());
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("cyc:") {
            let (m, k) = rest.split_once('/').ok_or_else(bad)?;
            let m: u64 = m.trim().parse().map_err(|_| bad())?;
            let k: i64 = k.trim().parse().map_err(|_| bad())?;
            if m == 0 {
                return Err(bad());
            }
            Ok(RootSpec::cyclotomic(m, k))
        } else if let Some(rest) = s.strip_prefix("num:") {
            let (re, im) = rest.split_once(',').ok_or_else(bad)?;
            let re: f64 = re.trim().parse().map_err(|_| bad())?;
            let im: f64 = im.trim().parse().map_err(|_| bad())?;
            RootSpec::numeric(C64::new(re, im)).map_err(|_| bad())
        } else {
            Err(bad())
        }
    }
}

/// Parses a comma list of root specs; `num:re,im` entries consume two fields.
pub fn parse_root_list(s: &str) -> Result<Vec<RootSpec>> {
    let parts: Vec<&str> = s
        .split(',')
        .map(|p| p.trim())
        .filter(|p| !p.is_empty())
        .collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < parts.len() {
        if parts[i].starts_with("num:") {
            let im = parts
                .get(i + 1)
                .ok_or_else(|| Error::BadRoot(parts[i].to_string()))?;
            out.push(format!("{},{}", parts[i], im).parse()?);
            i += 2;
        } else {
            out.push(parts[i].parse()?);
            i += 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(low: i64, c: &[i64]) -> LaurentPoly {
        LaurentPoly::from_ints(low, c)
    }

    /// Independent convolution on plain integer vectors.
    fn convolve(a: &[i64], b: &[i64]) -> Vec<i64> {
        let mut out = vec![0; a.len() + b.len() - 1];
        for i in 0..a.len() {
            for j in 0..b.len() {
                out[i + j] += a[i] * b[j];
            }
        }
        out
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(p(0, &[-1, 0, 1]).gcd(&p(0, &[-1, 0, 0, 1])), p(0, &[-1, 1]));
        let prod = &p(0, &[1, -1, 1]) * &p(0, &[1, 0, -1, 0, 1]);
        let oracle = convolve(&[1, -1, 1], &[1, 0, -1, 0, 1]);
        assert_eq!(oracle, vec![1, -1, 0, 1, 0, -1, 1]);
        assert_eq!(prod, p(0, &oracle));
        assert_eq!(
            p(0, &[-1, 0, 1]).divexact(&p(0, &[-1, 1])).unwrap(),
            p(0, &[1, 1])
        );
        assert_eq!(
            p(0, &[1, 0, 1]).divexact(&p(0, &[-1, 1])),
            Err(Error::InexactDivision)
        );
        // Laurent shifts
        assert_eq!(
            p(-2, &[1, 1]).divexact(&p(3, &[1])).unwrap(),
            p(-5, &[1, 1])
        );
    }

    #[test]
    fn evaluate_examples() {
        let tref = p(0, &[1, -1, 1]);
        assert!(tref.evaluate(&RootSpec::cyclotomic(6, 1)).norm() < 1e-12);
        assert!((tref.evaluate(&RootSpec::one()) - C64::new(1.0, 0.0)).norm() < 1e-15);
        let z = RootSpec::numeric(C64::new(2.0, 0.0)).unwrap();
        assert!((p(0, &[-1, 1]).evaluate(&z) - C64::new(1.0, 0.0)).norm() < 1e-15);
        // the double-double path resolves the root far below f64 noise
        assert!(tref.evaluate(&RootSpec::cyclotomic(6, 5)).norm() < 1e-28);
    }

    #[test]
    fn multiplicity_examples() {
        let tref = p(0, &[1, -1, 1]);
        assert_eq!(tref.root_multiplicity(&RootSpec::cyclotomic(6, 1)), 1);
        let t34 = &tref * &p(0, &[1, 0, -1, 0, 1]);
        assert_eq!(t34.root_multiplicity(&RootSpec::cyclotomic(12, 1)), 1);
        assert_eq!(t34.root_multiplicity(&RootSpec::cyclotomic(4, 1)), 0);
        let sq = p(0, &[-2, 1]).pow(2);
        let two = RootSpec::numeric(C64::new(2.0, 0.0)).unwrap();
        assert_eq!(sq.root_multiplicity(&two), 2);
        // a numeric spec for a root of unity agrees with the exact path
        let eta = RootSpec::numeric(RootSpec::cyclotomic(6, 1).value()).unwrap();
        assert_eq!(tref.root_multiplicity(&eta), 1);
        assert_eq!(tref.pow(3).root_multiplicity(&eta), 3);
    }

    #[test]
    fn cyclotomic_examples() {
        assert_eq!(cyclotomic(1), p(0, &[-1, 1]));
        assert_eq!(cyclotomic(6), p(0, &[1, -1, 1]));
        assert_eq!(cyclotomic(12), p(0, &[1, 0, -1, 0, 1]));
        assert_eq!(cyclotomic(6).to_string(), "t^2 - t + 1");
    }

    #[test]
    fn cyclotomic_product_identity() {
        for m in 1..=60u64 {
            let prod = (1..=m)
                .filter(|d| m % d == 0)
                .fold(LaurentPoly::one(), |acc, d| &acc * &cyclotomic(d));
            assert_eq!(prod, LaurentPoly::t_pow_minus_one(m as i64), "m = {m}");
            assert_eq!(cyclotomic(m).span() as u64, euler_phi(m));
        }
    }

    #[test]
    fn factorization_and_printing() {
        let t34 = p(0, &[1, -1, 0, 1, 0, -1, 1]);
        assert_eq!(t34.factored_string(), "(t^2-t+1)(t^4-t^2+1)");
        assert_eq!(t34.to_string(), "t^6 - t^5 + t^3 - t + 1");
        assert_eq!(p(0, &[1, -3, 1]).factored_string(), "(t^2-3t+1)");
        assert_eq!(p(0, &[1, -1, 1]).ascending_string(), "1 + -1*t + 1*t^2");
        assert!(t34.is_symmetric());
        assert!(!p(0, &[1, 2]).is_symmetric());
    }

    #[test]
    fn alexander_normalization() {
        let raw = p(-3, &[-1, 1, -1]);
        let (n, at1) = raw.alexander_normalized();
        assert_eq!(n, p(0, &[1, -1, 1]));
        assert_eq!(at1, q(1));
    }

    #[test]
    fn root_spec_parsing() {
        assert_eq!(
            "cyc:36/4".parse::<RootSpec>().unwrap(),
            RootSpec::cyclotomic(9, 1)
        );
        assert_eq!(
            "cyc:12/-1".parse::<RootSpec>().unwrap(),
            RootSpec::cyclotomic(12, 11)
        );
        assert_eq!("cyc:5/0".parse::<RootSpec>().unwrap(), RootSpec::one());
        assert!("cyc:0/1".parse::<RootSpec>().is_err());
        assert!("num:0,0".parse::<RootSpec>().is_err());
        let l = parse_root_list("cyc:12/1,num:0.5,-1.5,cyc:3/1").unwrap();
        assert_eq!(l.len(), 3);
        assert_eq!(l[1], RootSpec::Numeric(C64::new(0.5, -1.5)));
        let r = RootSpec::cyclotomic(12, 1).ratio(&RootSpec::cyclotomic(12, 11));
        assert_eq!(r, RootSpec::cyclotomic(6, 1));
    }

    proptest! {
        #[test]
        fn evaluate_is_multiplicative(a in prop::collection::vec(-5i64..5, 1..6),
                                      b in prop::collection::vec(-5i64..5, 1..6),
                                      la in -3i64..3, lb in -3i64..3,
                                      re in -1.5f64..1.5, im in -1.5f64..1.5) {
            prop_assume!(re.abs() + im.abs() > 0.2);
            let pa = LaurentPoly::from_ints(la, &a);
            let pb = LaurentPoly::from_ints(lb, &b);
            let z = RootSpec::numeric(C64::new(re, im)).unwrap();
            let lhs = (&pa * &pb).evaluate(&z);
            let rhs = pa.evaluate(&z) * pb.evaluate(&z);
            prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
        }

        #[test]
        fn divexact_inverts_mul(a in prop::collection::vec(-5i64..5, 1..6),
                                b in prop::collection::vec(-5i64..5, 1..6)) {
            let pa = LaurentPoly::from_ints(0, &a);
            let pb = LaurentPoly::from_ints(-1, &b);
            prop_assume!(!pb.is_zero());
            prop_assert_eq!((&pa * &pb).divexact(&pb).unwrap(), pa);
        }
    }
}
