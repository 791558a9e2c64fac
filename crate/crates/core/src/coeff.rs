//! Exact coefficient rings.
//!
//! [`GaussianRational`] is `Q(i)`. [`PiPoly`] is a Laurent polynomial in a
//! formal symbol `Pi` with Gaussian-rational coefficients; it carries the
//! powers of pi produced by even zeta values until a specialisation cancels
//! them. The [`Coefficient`] trait lets the series code run unchanged over
//! exact coefficients and over `Complex64`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    // Ratio<BigInt>::to_f64 handles large numerators and denominators.
    r.to_f64().unwrap_or(f64::NAN)
}

/// Canonical `p/q` (or `p`) string.
pub fn rat_to_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Serialises a rational as its `rat_to_string` form.
pub fn serialize_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rat_to_string(r))
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(Rational::new(n, d))
    } else {
        let n: BigInt = s.parse().ok()?;
        Some(Rational::from_integer(n))
    }
}

/// Exact element of `Q(i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussianRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussianRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        Self { re, im }
    }

    pub fn real(re: Rational) -> Self {
        Self { re, im: Rational::zero() }
    }

    pub fn i() -> Self {
        Self { re: Rational::zero(), im: Rational::one() }
    }

    pub fn from_int(n: i64) -> Self {
        Self::real(rat_int(n))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn norm_sqr(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(Self { re: &self.re / &n, im: -(&self.im / &n) })
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Self { re: &self.re * r, im: &self.im * r }
    }

    /// `i^k` for any integer `k`.
    pub fn i_pow(k: i64) -> Self {
        match k.rem_euclid(4) {
            0 => Self::from_int(1),
            1 => Self::i(),
            2 => Self::from_int(-1),
            _ => -Self::i(),
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }
}

impl Zero for GaussianRational {
    fn zero() -> Self {
        Self::real(Rational::zero())
    }
    fn is_zero(&self) -> bool {
        GaussianRational::is_zero(self)
    }
}

impl One for GaussianRational {
    fn one() -> Self {
        Self::from_int(1)
    }
}

impl Add for GaussianRational {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for GaussianRational {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Mul for GaussianRational {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Neg for GaussianRational {
    type Output = Self;
    fn neg(self) -> Self {
        Self { re: -self.re, im: -self.im }
    }
}

impl Div for GaussianRational {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        self * o.inv().expect("division by zero Gaussian rational")
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", rat_to_string(&self.re)),
            (true, false) => write!(f, "{}i", rat_to_string(&self.im)),
            (false, false) => {
                let sign = if self.im.is_negative() { "-" } else { "+" };
                write!(f, "({}{}{}i)", rat_to_string(&self.re), sign, rat_to_string(&self.im.abs()))
            }
        }
    }
}

/// Laurent polynomial in the formal symbol `Pi`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PiPoly {
    terms: BTreeMap<i32, GaussianRational>,
}

impl PiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(GaussianRational::from_int(1))
    }

    pub fn constant(c: GaussianRational) -> Self {
        Self::monomial(c, 0)
    }

    pub fn rational(r: Rational) -> Self {
        Self::constant(GaussianRational::real(r))
    }

    pub fn int(n: i64) -> Self {
        Self::rational(rat_int(n))
    }

    /// `c * Pi^k`.
    pub fn monomial(c: GaussianRational, k: i32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(k, c);
        }
        Self { terms }
    }

    pub fn pi_pow(k: i32) -> Self {
        Self::monomial(GaussianRational::from_int(1), k)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &GaussianRational)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_pi_free(&self) -> bool {
        self.terms.keys().all(|k| *k == 0)
    }

    /// The `Pi^0` coefficient when the value has no other powers.
    pub fn as_gaussian(&self) -> Option<GaussianRational> {
        if self.is_pi_free() {
            Some(self.terms.get(&0).cloned().unwrap_or_else(GaussianRational::zero))
        } else {
            None
        }
    }

    pub fn coefficient(&self, k: i32) -> GaussianRational {
        self.terms.get(&k).cloned().unwrap_or_else(GaussianRational::zero)
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        let mut out = Self::zero();
        for (k, v) in &self.terms {
            out.add_term(*k, v.clone() * c.clone());
        }
        out
    }

    pub fn scale_rational(&self, r: &Rational) -> Self {
        self.scale(&GaussianRational::real(r.clone()))
    }

    pub fn shift_pi(&self, by: i32) -> Self {
        Self { terms: self.terms.iter().map(|(k, v)| (k + by, v.clone())).collect() }
    }

    fn add_term(&mut self, k: i32, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(k).or_insert_with(GaussianRational::zero);
        *entry = entry.clone() + c;
        if entry.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        self.terms
            .iter()
            .map(|(k, c)| c.to_complex() * std::f64::consts::PI.powi(*k))
            .sum()
    }

    /// Exact quotient when `other` is a single `Pi` monomial.
    pub fn div_monomial(&self, other: &PiPoly) -> Option<PiPoly> {
        if other.terms.len() != 1 {
            return None;
        }
        let (k, c) = other.terms.iter().next()?;
        let inv = c.inv()?;
        Some(self.scale(&inv).shift_pi(-k))
    }
}

impl Add for PiPoly {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        for (k, c) in o.terms {
            self.add_term(k, c);
        }
        self
    }
}

impl AddAssign for PiPoly {
    fn add_assign(&mut self, o: Self) {
        for (k, c) in o.terms {
            self.add_term(k, c);
        }
    }
}

impl Sub for PiPoly {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for PiPoly {
    type Output = Self;
    fn neg(self) -> Self {
        Self { terms: self.terms.into_iter().map(|(k, c)| (k, -c)).collect() }
    }
}

impl Mul for PiPoly {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut out = Self::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                out.add_term(a + b, ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl fmt::Display for PiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, c)| if *k == 0 { format!("{c}") } else { format!("{c} * Pi^{k}") })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Ring operations shared by exact and floating coefficients.
pub trait Coefficient:
    Clone
    + fmt::Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_rational(r: &Rational) -> Self;
    fn from_i64(n: i64) -> Self {
        Self::from_rational(&rat_int(n))
    }
    fn magnitude(&self) -> f64;
}

impl Coefficient for PiPoly {
    fn zero() -> Self {
        PiPoly::zero()
    }
    fn one() -> Self {
        PiPoly::one()
    }
    fn is_zero(&self) -> bool {
        PiPoly::is_zero(self)
    }
    fn from_rational(r: &Rational) -> Self {
        PiPoly::rational(r.clone())
    }
    fn magnitude(&self) -> f64 {
        self.to_complex().norm()
    }
}

impl Coefficient for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn from_rational(r: &Rational) -> Self {
        Complex64::new(rat_to_f64(r), 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Binomial coefficient `C(n, k)` as an integer (zero outside `0..=n`).
pub fn binomial(n: i64, k: i64) -> i64 {
    if k < 0 || k > n || n < 0 {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for j in 0..k {
        acc = acc * (n - j) as i128 / (j + 1) as i128;
    }
    acc as i64
}

/// Generalised binomial coefficient `C(e, j)` for rational `e`.
pub fn gen_binomial(e: &Rational, j: u32) -> Rational {
    let mut acc = Rational::one();
    for i in 0..j {
        acc = acc * (e - rat_int(i as i64)) / rat_int(i as i64 + 1);
    }
    acc
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}
