//! Exact series in the genus-counting parameter `u` and the curve-class
//! variable `q`, plus a univariate rational Laurent series used to build them.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::coeff::{factorial, rat_int, rat_to_f64, GaussianRational, PiPoly, Rational};
use crate::error::{Error, Result};

/// Lowest admissible power of `u`.
pub const U_FLOOR: i32 = -2;

/// A truncated rational Laurent series `sum_j c_j x^j` with `j <= max_pow`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatLaurent {
    max_pow: i32,
    terms: BTreeMap<i32, Rational>,
}

impl RatLaurent {
    pub fn zero(max_pow: i32) -> Self {
        Self { max_pow, terms: BTreeMap::new() }
    }

    pub fn monomial(c: Rational, pow: i32, max_pow: i32) -> Self {
        let mut s = Self::zero(max_pow);
        s.add_term(pow, c);
        s
    }

    pub fn one(max_pow: i32) -> Self {
        Self::monomial(Rational::one(), 0, max_pow)
    }

    pub fn max_pow(&self) -> i32 {
        self.max_pow
    }

    pub fn add_term(&mut self, pow: i32, c: Rational) {
        if pow > self.max_pow || c.is_zero() {
            return;
        }
        let e = self.terms.entry(pow).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&pow);
        }
    }

    pub fn coefficient(&self, pow: i32) -> Rational {
        self.terms.get(&pow).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &Rational)> {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    pub fn valuation(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = Self::zero(self.max_pow.min(o.max_pow));
        for (k, v) in self.terms.iter().chain(&o.terms) {
            out.add_term(*k, v.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&rat_int(-1)))
    }

    pub fn scale(&self, r: &Rational) -> Self {
        let mut out = Self::zero(self.max_pow);
        for (k, v) in &self.terms {
            out.add_term(*k, v * r);
        }
        out
    }

    /// Product truncated at `max_pow`; the caller must supply factors known to
    /// enough order for the result to be exact there.
    pub fn mul(&self, o: &Self, max_pow: i32) -> Self {
        let mut out = Self::zero(max_pow);
        for (i, a) in &self.terms {
            for (j, b) in &o.terms {
                if i + j <= max_pow {
                    out.add_term(i + j, a * b);
                }
            }
        }
        out
    }

    /// Reciprocal of a series with nonzero constant term, to `max_pow`.
    pub fn reciprocal(&self, max_pow: i32) -> Result<Self> {
        let c0 = self.coefficient(0);
        if c0.is_zero() || self.valuation() != Some(0) {
            return Err(Error::Invalid("reciprocal needs a unit constant term".into()));
        }
        let mut inv: Vec<Rational> = Vec::new();
        for n in 0..=max_pow.max(0) {
            let mut acc = if n == 0 { Rational::one() } else { Rational::zero() };
            for k in 1..=n {
                acc -= self.coefficient(k) * &inv[(n - k) as usize];
            }
            inv.push(acc / &c0);
        }
        let mut out = Self::zero(max_pow);
        for (n, v) in inv.into_iter().enumerate() {
            out.add_term(n as i32, v);
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32, max_pow: i32) -> Self {
        let mut acc = Self::one(max_pow);
        for _ in 0..k {
            acc = acc.mul(self, max_pow);
        }
        acc
    }

    /// `x -> r x`.
    pub fn rescale(&self, r: &Rational) -> Self {
        let mut out = Self::zero(self.max_pow);
        for (k, v) in &self.terms {
            out.add_term(*k, v * rat_pow(r, *k));
        }
        out
    }

    /// `x -> i x` on an even series.
    pub fn rotate_even(&self) -> Result<Self> {
        let mut out = Self::zero(self.max_pow);
        for (k, v) in &self.terms {
            if k % 2 != 0 {
                return Err(Error::Invalid(format!("rotation of odd power x^{k}")));
            }
            let sign = if (k / 2).rem_euclid(2) == 0 { 1 } else { -1 };
            out.add_term(*k, v * rat_int(sign));
        }
        Ok(out)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|(k, v)| rat_to_f64(v) * x.powi(*k)).sum()
    }
}

pub fn rat_pow(r: &Rational, k: i32) -> Rational {
    if k >= 0 {
        num_traits::pow(r.clone(), k as usize)
    } else {
        num_traits::pow(r.recip(), (-k) as usize)
    }
}

/// `2 sin(x/2) / x = sum_j (-1)^j x^{2j} / (4^j (2j+1)!)`.
pub fn sin_half_ratio(max_pow: i32) -> RatLaurent {
    let mut s = RatLaurent::zero(max_pow);
    let mut j = 0;
    while 2 * j <= max_pow {
        let den = BigInt::from(4u32).pow(j as u32) * factorial(2 * j as u32 + 1);
        let sign = if j % 2 == 0 { 1 } else { -1 };
        s.add_term(2 * j, Rational::new(BigInt::from(sign), den));
        j += 1;
    }
    s
}

/// `(2 sin(x/2))^p` for any integer `p`, exact through `x^{max_pow}`.
pub fn two_sin_half_pow(p: i32, max_pow: i32) -> RatLaurent {
    // x^p h^p with h = 2 sin(x/2)/x a unit series
    let inner = max_pow - p;
    if inner < 0 {
        return RatLaurent::zero(max_pow);
    }
    let h = sin_half_ratio(inner);
    let hp = if p >= 0 {
        h.pow(p as u32, inner)
    } else {
        h.reciprocal(inner).expect("h(0) = 1").pow((-p) as u32, inner)
    };
    let mut out = RatLaurent::zero(max_pow);
    for (k, v) in hp.terms() {
        out.add_term(k + p, v.clone());
    }
    out
}

/// An exact series `sum c_{j,r} u^j q^r` with `U_FLOOR <= j <= u_order`, `1 <= r <= q_order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UqSeries {
    u_order: i32,
    q_order: u32,
    terms: BTreeMap<(i32, u32), PiPoly>,
}

impl UqSeries {
    pub fn zero(u_order: i32, q_order: u32) -> Self {
        Self { u_order, q_order, terms: BTreeMap::new() }
    }

    pub fn u_order(&self) -> i32 {
        self.u_order
    }

    pub fn q_order(&self) -> u32 {
        self.q_order
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(i32, u32), &PiPoly)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, u: i32, q: u32) -> PiPoly {
        self.terms.get(&(u, q)).cloned().unwrap_or_default()
    }

    /// Adds `c u^j q^r`, dropping terms beyond the truncation.
    pub fn add_term(&mut self, u: i32, q: u32, c: PiPoly) -> Result<()> {
        if u < U_FLOOR {
            return Err(Error::Invalid(format!("u^{u} below the Laurent floor u^{U_FLOOR}")));
        }
        if q == 0 {
            return Err(Error::Invalid("q-powers must be positive".into()));
        }
        if u > self.u_order || q > self.q_order || c.is_zero() {
            return Ok(());
        }
        let e = self.terms.entry((u, q)).or_default();
        *e += c;
        if e.is_zero() {
            self.terms.remove(&(u, q));
        }
        Ok(())
    }

    /// Adds `coeff * L(u) q^r`.
    pub fn add_laurent(&mut self, q: u32, l: &RatLaurent, coeff: &PiPoly) -> Result<()> {
        for (k, v) in l.terms() {
            self.add_term(k, q, coeff.scale_rational(v))?;
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if (self.u_order, self.q_order) != (o.u_order, o.q_order) {
            return Err(Error::Invalid(format!(
                "truncation orders differ: (u^{}, q^{}) vs (u^{}, q^{})",
                self.u_order, self.q_order, o.u_order, o.q_order
            )));
        }
        let mut out = self.clone();
        for (&(u, q), c) in &o.terms {
            out.add_term(u, q, c.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.scale(&PiPoly::int(-1)))
    }

    pub fn scale(&self, c: &PiPoly) -> Self {
        let mut out = Self::zero(self.u_order, self.q_order);
        for (&(u, q), v) in &self.terms {
            out.add_term(u, q, v.clone() * c.clone()).expect("indices already valid");
        }
        out
    }

    /// Applies `f(q)` to the coefficient row of each `q^r`.
    pub fn map_q(&self, f: impl Fn(u32, &PiPoly) -> PiPoly) -> Self {
        let mut out = Self::zero(self.u_order, self.q_order);
        for (&(u, q), v) in &self.terms {
            out.add_term(u, q, f(q, v)).expect("indices already valid");
        }
        out
    }

    /// Restricts to lower truncation orders.
    pub fn truncate(&self, u_order: i32, q_order: u32) -> Self {
        let mut out = Self::zero(u_order, q_order);
        for (&(u, q), v) in &self.terms {
            out.add_term(u, q, v.clone()).expect("indices already valid");
        }
        out
    }

    pub fn is_pi_free(&self) -> bool {
        self.terms.values().all(PiPoly::is_pi_free)
    }

    /// Numeric value at `(u, q)`.
    pub fn eval(&self, u: f64, q: num_complex::Complex64) -> num_complex::Complex64 {
        self.terms
            .iter()
            .map(|(&(j, r), c)| c.to_complex() * u.powi(j) * q.powu(r))
            .sum()
    }

    /// `{"(u,q)": [re_num, re_den, im_num, im_den]}`; fails on a residual `Pi`.
    pub fn to_json(&self) -> Result<serde_json::Value> {
        let mut map = serde_json::Map::new();
        for (&(u, q), c) in &self.terms {
            let g = c.as_gaussian().ok_or_else(|| Error::ResidualPi(format!("u^{u} q^{q}: {c}")))?;
            let parts = [g.re.numer(), g.re.denom(), g.im.numer(), g.im.denom()];
            let row: Vec<serde_json::Value> = parts.iter().map(|b| big_to_json(b)).collect();
            map.insert(format!("({u},{q})"), serde_json::Value::Array(row));
        }
        Ok(serde_json::Value::Object(map))
    }

    pub fn from_json(v: &serde_json::Value, u_order: i32, q_order: u32) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| Error::Invalid("series JSON must be an object".into()))?;
        let mut out = Self::zero(u_order, q_order);
        for (key, row) in obj {
            let bad = || Error::Invalid(format!("series key {key}: expected \"(u,q)\""));
            let inner = key.strip_prefix('(').and_then(|k| k.strip_suffix(')')).ok_or_else(bad)?;
            let (u, q) = inner.split_once(',').ok_or_else(bad)?;
            let u: i32 = u.trim().parse().map_err(|_| bad())?;
            let q: u32 = q.trim().parse().map_err(|_| bad())?;
            let nums: Vec<BigInt> = row
                .as_array()
                .filter(|a| a.len() == 4)
                .ok_or_else(|| Error::Invalid(format!("series entry {key}: expected four integers")))?
                .iter()
                .map(|x| match x {
                    serde_json::Value::Number(n) => n.to_string().parse::<BigInt>().ok(),
                    serde_json::Value::String(s) => s.parse::<BigInt>().ok(),
                    _ => None,
                })
                .collect::<Option<_>>()
                .ok_or_else(|| Error::Invalid(format!("series entry {key}: malformed integer")))?;
            if nums[1].is_zero() || nums[3].is_zero() {
                return Err(Error::Invalid(format!("series entry {key}: zero denominator")));
            }
            let g = GaussianRational::new(
                Rational::new(nums[0].clone(), nums[1].clone()),
                Rational::new(nums[2].clone(), nums[3].clone()),
            );
            out.add_term(u, q, PiPoly::constant(g))?;
        }
        Ok(out)
    }
}

fn big_to_json(b: &BigInt) -> serde_json::Value {
    match b.to_i64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::String(b.to_string()),
    }
}

impl fmt::Display for UqSeries {
    /// One line per coefficient and `Pi` power: `{coeff} * Pi^{k} * u^{j} * q^{r}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (&(u, q), c) in &self.terms {
            for (k, g) in c.terms() {
                writeln!(f, "{g} * Pi^{k} * u^{u} * q^{q}")?;
            }
        }
        Ok(())
    }
}
