//! Closed forms of the curve-class function `F_beta(t)` in Gopakumar-Vafa form,
//! their exact `(u, q)` expansions, and the differential identity relating
//! them to the Gromov-Witten partition function.
//!
//! Conventions: `q = e^{2 pi i v}` with `v = i (omega . beta)`, `w = e^{i pi eps}`,
//! and the specialisation `eps = u / 2pi`, `t = u / (2pi)^2`. Exact
//! coefficients carry the transcendental `pi` as a formal symbol.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::coeff::{binomial, factorial, rat, rat_int, GaussianRational, PiPoly, Rational};
use crate::error::{Error, Result};
use crate::maulik_toda::{GenusSeries, OmegaTable};
use crate::uq_series::{two_sin_half_pow, RatLaurent, UqSeries};

/// `B_0 ..= B_n` from `sum_{j=0}^{m} C(m+1, j) B_j = 0`, so `B_1 = -1/2`.
pub fn bernoulli_numbers(n: u32) -> Vec<Rational> {
    let mut b: Vec<Rational> = vec![Rational::one()];
    for m in 1..=n as usize {
        let mut acc = Rational::zero();
        for (j, bj) in b.iter().enumerate() {
            acc += bj * Rational::from_integer(binomial_big(m + 1, j));
        }
        b.push(-acc / Rational::from_integer(BigInt::from(m + 1)));
    }
    b
}

fn binomial_big(n: usize, k: usize) -> BigInt {
    factorial(n as u32) / (factorial(k as u32) * factorial((n - k) as u32))
}

/// The Bernoulli number `B_k` for even `k` (including `k = 0`).
pub fn bernoulli(k: u32) -> Result<Rational> {
    if k % 2 == 1 {
        return Err(Error::OddBernoulliIndex(k));
    }
    Ok(bernoulli_numbers(k).pop().expect("nonempty"))
}

/// `zeta(2s) = |B_{2s}| (2 pi)^{2s} / (2 (2s)!)`.
pub fn zeta_even(s: u32) -> Result<PiPoly> {
    if s == 0 {
        return Err(Error::Invalid("zeta_even needs s >= 1".into()));
    }
    let b = bernoulli(2 * s)?.abs();
    let r = b * Rational::from_integer(BigInt::from(2).pow(2 * s)) / Rational::from_integer(2 * factorial(2 * s));
    Ok(PiPoly::monomial(GaussianRational::real(r), 2 * s as i32))
}

/// Sign convention for the expansion of `(2 sin(x/2))^{-2}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum SignMode {
    /// `1/x^2 - 1/12 + sum_{s>=2} (-1)^{s-1} |B_{2s}| / ((2s)(2s-2)!) x^{2s-2}` taken literally,
    /// with the right-hand side normalised by `-i d/dv` alone.
    Literal,
    /// Kernel and normalisation fixed by the numeric oracles.
    #[default]
    Resolved,
}

impl FromStr for SignMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(Self::Literal),
            "resolved" | "oracle-resolved" => Ok(Self::Resolved),
            other => Err(Error::Invalid(format!("sign mode must be literal or resolved, got {other}"))),
        }
    }
}

impl fmt::Display for SignMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Literal => "literal",
            Self::Resolved => "resolved",
        })
    }
}

/// `c_s = |B_{2s}| / ((2s) (2s-2)!)`.
pub fn bracket_coefficient(s: u32) -> Rational {
    let b = bernoulli(2 * s).expect("even index").abs();
    b / Rational::from_integer(BigInt::from(2 * s) * factorial(2 * s - 2))
}

/// `sum_{s>=1} (-1)^{s-1} c_s x^{2s-2}`, the kernel produced by the Bernoulli expansion.
pub fn alternating_kernel(max_pow: i32) -> RatLaurent {
    let mut out = RatLaurent::zero(max_pow);
    let mut s = 1u32;
    while 2 * s as i32 - 2 <= max_pow {
        let sign = if s % 2 == 1 { 1 } else { -1 };
        out.add_term(2 * s as i32 - 2, bracket_coefficient(s) * rat_int(sign));
        s += 1;
    }
    out
}

/// `[(2 sin(x/2))^{-2}]_+ = (2 sin(x/2))^{-2} - 1/x^2 + 1/6` through `x^{max_pow}`.
pub fn regularized_bracket_series(max_pow: i32, mode: SignMode) -> RatLaurent {
    let expansion = match mode {
        SignMode::Literal => {
            let mut e = RatLaurent::monomial(rat_int(1), -2, max_pow);
            e.add_term(0, rat(-1, 12));
            for (k, v) in alternating_kernel(max_pow).terms() {
                if k >= 2 {
                    e.add_term(k, v.clone());
                }
            }
            e
        }
        SignMode::Resolved => two_sin_half_pow(-2, max_pow),
    };
    let mut out = expansion.sub(&RatLaurent::monomial(rat_int(1), -2, max_pow));
    out.add_term(0, rat(1, 6));
    out
}

/// Kernel `K` and prefactor `N` with `RHS = N (-i d/dv) sum_g n_g sum_r (1/r) (2 sin(ru/2))^{2g} K(ru) q^r`.
pub fn theorem_kernel(max_pow: i32, mode: SignMode) -> (RatLaurent, PiPoly) {
    match mode {
        SignMode::Literal => (regularized_bracket_series(max_pow, mode), PiPoly::one()),
        SignMode::Resolved => {
            // K(x) = [(2 sin(ix/2))^{-2}]_+ - 1/6 = 1/x^2 - (2 sinh(x/2))^{-2}
            let rotated = regularized_bracket_series(max_pow, mode).rotate_even().expect("even series");
            let k = rotated.sub(&RatLaurent::monomial(rat(1, 6), 0, max_pow));
            (k, PiPoly::pi_pow(1).scale_rational(&rat_int(2)))
        }
    }
}

/// A Laurent polynomial in `w = e^{i pi eps}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EpsilonLaurent {
    pub terms: BTreeMap<i64, i64>,
}

impl EpsilonLaurent {
    fn add(&mut self, pow: i64, c: i64) {
        let e = self.terms.entry(pow).or_insert(0);
        *e += c;
        if *e == 0 {
            self.terms.remove(&pow);
        }
    }

    /// `sum_n Omega_n w^{-2mn}`.
    pub fn from_omega(omega: &OmegaTable, m: u32) -> Self {
        let mut out = Self::default();
        for (&n, &v) in omega {
            out.add(-2 * m as i64 * n, v);
        }
        out
    }

    /// `sum_g n_g (-1)^g (w^{-m} - w^m)^{2g}`.
    pub fn from_genus(gv: &GenusSeries, m: u32) -> Self {
        let mut out = Self::default();
        let m = m as i64;
        for (&g, &ng) in gv {
            let g = g as i64;
            for h in 0..=2 * g {
                // (w^{-m})^{2g-h} (-w^m)^h
                let sign = if (g + h) % 2 == 0 { 1 } else { -1 };
                out.add(m * (2 * h - 2 * g), sign * ng * binomial(2 * g, h));
            }
        }
        out
    }

    pub fn eval(&self, eps: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(&j, &c)| Complex64::from_polar(c as f64, PI * eps * j as f64))
            .sum()
    }

    /// Value at `w = 1`, the `eps -> 0` limit.
    pub fn at_zero(&self) -> i64 {
        self.terms.values().sum()
    }

    /// Expansion in `u` under `w^j = e^{i j u / 2}`, through `u^{max_pow}`.
    pub fn specialize(&self, max_pow: i32) -> BTreeMap<i32, GaussianRational> {
        let mut out: BTreeMap<i32, GaussianRational> = BTreeMap::new();
        for (&j, &c) in &self.terms {
            let half = rat(j, 2);
            let mut power = Rational::one();
            for n in 0..=max_pow.max(-1) {
                let term = GaussianRational::i_pow(n as i64)
                    .scale(&(rat_int(c) * &power / Rational::from_integer(factorial(n as u32))));
                let e = out.entry(n).or_insert_with(GaussianRational::zero);
                *e = e.clone() + term;
                power *= &half;
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }
}

/// How the `eps`-dependence is specialised.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum EpsilonChoice {
    /// `eps = u / 2 pi`.
    #[default]
    Coupled,
    /// `eps -> 0` at fixed `t = u / (2 pi)^2`.
    Zero,
}

/// Coefficients of `t^j` in `T_m(t) = 2 sum_k k^{-2} t / (1 + (2 pi m t / k)^2)`.
fn lattice_t_series(m: u32, max_t_pow: i32) -> Result<BTreeMap<i32, PiPoly>> {
    let mut out = BTreeMap::new();
    let mut s = 1u32;
    while 2 * s as i32 - 1 <= max_t_pow {
        // 2 (-1)^{s-1} (2 pi m)^{2s-2} zeta(2s)
        let sign = if s % 2 == 1 { 2 } else { -2 };
        let c = zeta_even(s)?
            .scale_rational(&(rat_int(sign) * Rational::from_integer(BigInt::from(2 * m).pow(2 * s - 2))))
            .shift_pi(2 * s as i32 - 2);
        out.insert(2 * s as i32 - 1, c);
        s += 1;
    }
    Ok(out)
}

/// `t^j -> u^j / (4^j pi^{2j})`.
fn specialize_t(series: &BTreeMap<i32, PiPoly>) -> BTreeMap<i32, PiPoly> {
    series
        .iter()
        .map(|(&j, c)| {
            let four = Rational::from_integer(BigInt::from(4).pow(j as u32));
            (j, c.scale_rational(&four.recip()).shift_pi(-2 * j))
        })
        .collect()
}

fn epsilon_part(gv: &GenusSeries, m: u32, max_pow: i32, choice: EpsilonChoice) -> BTreeMap<i32, GaussianRational> {
    let e = EpsilonLaurent::from_genus(gv, m);
    match choice {
        EpsilonChoice::Coupled => e.specialize(max_pow),
        EpsilonChoice::Zero => {
            let mut out = BTreeMap::new();
            if e.at_zero() != 0 {
                out.insert(0, GaussianRational::from_int(e.at_zero()));
            }
            out
        }
    }
}

fn combine(
    out: &mut UqSeries,
    q: u32,
    eps: &BTreeMap<i32, GaussianRational>,
    t_part: &BTreeMap<i32, PiPoly>,
) -> Result<()> {
    for (&a, ca) in eps {
        for (&b, cb) in t_part {
            out.add_term(a + b, q, cb.scale(ca))?;
        }
    }
    Ok(())
}

/// Exact `(u, q)` expansion of `F_beta` in genus form at `eps = u/2pi`, `t = u/(2pi)^2`.
pub fn f_beta_series_exact(gv: &GenusSeries, n_u: i32, n_q: u32) -> Result<UqSeries> {
    let mut out = UqSeries::zero(n_u, n_q);
    for m in 1..=n_q {
        let t_part = specialize_t(&lattice_t_series(m, n_u)?);
        combine(&mut out, m, &epsilon_part(gv, m, n_u, EpsilonChoice::Coupled), &t_part)?;
    }
    if let Some(((u, q), c)) = out.terms().find(|(_, c)| !c.is_pi_free()) {
        return Err(Error::ResidualPi(format!("u^{u} q^{q}: {c}")));
    }
    Ok(out)
}

/// `d/dt F_beta`, differentiated before specialising.
pub fn dt_f_beta_series(gv: &GenusSeries, n_u: i32, n_q: u32, choice: EpsilonChoice) -> Result<UqSeries> {
    let mut out = UqSeries::zero(n_u, n_q);
    for m in 1..=n_q {
        let raw = lattice_t_series(m, n_u + 1)?;
        let derived: BTreeMap<i32, PiPoly> = raw
            .iter()
            .filter(|(&j, _)| j >= 1)
            .map(|(&j, c)| (j - 1, c.scale_rational(&rat_int(j as i64))))
            .collect();
        combine(&mut out, m, &epsilon_part(gv, m, n_u, choice), &specialize_t(&derived))?;
    }
    Ok(out)
}

/// `int (d/dt F_beta) dv`: each `q^m` coefficient of [`dt_f_beta_series`] divided by `2 pi i m`.
pub fn diff_equ_proof_series(gv: &GenusSeries, n_u: i32, n_q: u32, choice: EpsilonChoice) -> Result<UqSeries> {
    let dt = dt_f_beta_series(gv, n_u, n_q, choice)?;
    Ok(dt.map_q(|m, c| {
        let inv = GaussianRational::new(Rational::zero(), rat(-1, 2 * m as i64));
        c.scale(&inv).shift_pi(-1)
    }))
}

/// `sum_g n_g sum_r (1/r) (2 sin(ru/2))^{2g} K(ru) q^r` for a kernel `K`.
fn genus_kernel_series(gv: &GenusSeries, kernel: &RatLaurent, n_u: i32, n_q: u32, shift: i32) -> Result<UqSeries> {
    let mut out = UqSeries::zero(n_u, n_q);
    let inner_order = n_u + 4;
    for r in 1..=n_q {
        let rr = rat_int(r as i64);
        let k = kernel.rescale(&rr);
        for (&g, &ng) in gv {
            let p = 2 * g as i32 + shift;
            let sin_part = two_sin_half_pow(p, inner_order).rescale(&rr);
            let term = sin_part.mul(&k, n_u);
            out.add_laurent(r, &term, &PiPoly::rational(rat(ng, r as i64)))?;
        }
    }
    Ok(out)
}

/// `sum_g n_g sum_r (1/r) (2 sin(ru/2))^{2g-2} q^r`.
pub fn gw_gv_series(gv: &GenusSeries, n_u: i32, n_q: u32) -> Result<UqSeries> {
    genus_kernel_series(gv, &RatLaurent::one(n_u + 4), n_u, n_q, -2)
}

/// `sum_g n_g sum_r (1/r) (2 sin(ru/2))^{2g} (1/(ru)^2 - 1/6) q^r`.
pub fn missing_term_series(gv: &GenusSeries, n_u: i32, n_q: u32) -> Result<UqSeries> {
    let mut k = RatLaurent::monomial(rat_int(1), -2, n_u + 4);
    k.add_term(0, rat(-1, 6));
    genus_kernel_series(gv, &k, n_u, n_q, 0)
}

/// `sum_g n_g sum_r (1/r) (2 sin(ru/2))^{2g} [(2 sin(ru/2))^{-2}]_+ q^r`.
pub fn regularized_gv_series(gv: &GenusSeries, n_u: i32, n_q: u32, mode: SignMode) -> Result<UqSeries> {
    genus_kernel_series(gv, &regularized_bracket_series(n_u + 4, mode), n_u, n_q, 0)
}

/// `-i d/dv` on `q`-series: `q^r -> 2 pi r q^r`.
pub fn minus_i_dv(series: &UqSeries) -> UqSeries {
    series.map_q(|r, c| c.scale_rational(&rat_int(2 * r as i64)).shift_pi(1))
}

/// Right-hand side of the differential identity in the given mode.
pub fn theorem_rhs(gv: &GenusSeries, n_u: i32, n_q: u32, mode: SignMode) -> Result<UqSeries> {
    let (kernel, norm) = theorem_kernel(n_u + 4, mode);
    Ok(minus_i_dv(&genus_kernel_series(gv, &kernel, n_u, n_q, 0)?).scale(&norm))
}

#[derive(Clone, Debug, Serialize)]
pub struct CoefficientRow {
    pub u: i32,
    pub q: u32,
    pub lhs: String,
    pub rhs: String,
    pub equal: bool,
}

/// Coefficientwise comparison of two exact series.
#[derive(Clone, Debug, Serialize)]
pub struct SeriesComparison {
    pub u_order: i32,
    pub q_order: u32,
    pub rows: Vec<CoefficientRow>,
    pub discrepancies: Vec<(i32, u32)>,
    /// `lhs / rhs` when every differing coefficient has the same single-`Pi` ratio.
    pub common_ratio: Option<String>,
    pub passed: bool,
}

pub fn compare_series(lhs: &UqSeries, rhs: &UqSeries) -> SeriesComparison {
    let mut keys: Vec<(i32, u32)> = lhs.terms().chain(rhs.terms()).map(|(k, _)| *k).collect();
    keys.sort_unstable();
    keys.dedup();
    let mut rows = Vec::new();
    let mut discrepancies = Vec::new();
    let mut ratios = Vec::new();
    for (u, q) in keys {
        let (l, r) = (lhs.coefficient(u, q), rhs.coefficient(u, q));
        let equal = l == r;
        if !equal {
            discrepancies.push((u, q));
            ratios.push(l.div_monomial(&r));
        }
        rows.push(CoefficientRow { u, q, lhs: l.to_string(), rhs: r.to_string(), equal });
    }
    let common_ratio = match ratios.first() {
        Some(Some(first)) if ratios.iter().all(|x| x.as_ref() == Some(first)) => Some(first.to_string()),
        _ => None,
    };
    SeriesComparison {
        u_order: lhs.u_order(),
        q_order: lhs.q_order(),
        passed: discrepancies.is_empty(),
        rows,
        discrepancies,
        common_ratio,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoremReport {
    pub sign_mode: SignMode,
    pub comparison: SeriesComparison,
    pub passed: bool,
}

/// Compares `d/dt F_beta` (specialised) against [`theorem_rhs`] up to `(u^{n_u}, q^{n_q})`.
pub fn check_main_theorem(gv: &GenusSeries, n_u: i32, n_q: u32, mode: SignMode) -> Result<TheoremReport> {
    let lhs = dt_f_beta_series(gv, n_u, n_q, EpsilonChoice::Coupled)?;
    let rhs = theorem_rhs(gv, n_u, n_q, mode)?;
    let comparison = compare_series(&lhs, &rhs);
    Ok(TheoremReport { sign_mode: mode, passed: comparison.passed, comparison })
}

/// `i n_0 sum_m (1/m) ((2 sin(mu/2))^{-2} - 1/(mu)^2 + 1/6) q^m`.
pub fn bridgeland_iwaki_target(n0: i64, n_u: i32, n_q: u32) -> Result<UqSeries> {
    let bracket = regularized_bracket_series(n_u + 4, SignMode::Resolved);
    let mut out = UqSeries::zero(n_u, n_q);
    for m in 1..=n_q {
        let c = PiPoly::constant(GaussianRational::new(Rational::zero(), rat(n0, m as i64)));
        out.add_laurent(m, &bracket.rescale(&rat_int(m as i64)), &c)?;
    }
    Ok(out)
}

/// The `eps -> 0` limit of [`diff_equ_proof_series`] against [`bridgeland_iwaki_target`].
pub fn check_bridgeland_iwaki(gv: &GenusSeries, n_u: i32, n_q: u32) -> Result<SeriesComparison> {
    let lhs = diff_equ_proof_series(gv, n_u, n_q, EpsilonChoice::Zero)?;
    let n0 = gv.get(&0).copied().unwrap_or(0);
    Ok(compare_series(&lhs, &bridgeland_iwaki_target(n0, n_u, n_q)?))
}

/// How the sum over `k` is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KSum {
    Partial(u32),
    /// The full sum through the `coth` identity.
    Closed,
}

/// `sum_k k^{-2} t / (1 + (2 pi m t / k)^2)`.
pub fn lattice_sum(m: u32, t: f64, k: KSum) -> f64 {
    match k {
        KSum::Closed => crate::asymptotics::coth_sum(m, t),
        KSum::Partial(kmax) => {
            let x = 2.0 * PI * m as f64 * t;
            (1..=kmax).rev().map(|k| t / ((k as f64).powi(2) + x * x)).sum()
        }
    }
}

fn zeta2_partial(k: KSum) -> f64 {
    match k {
        KSum::Closed => PI * PI / 6.0,
        KSum::Partial(kmax) => (1..=kmax).rev().map(|k| 1.0 / (k as f64 * k as f64)).sum(),
    }
}

/// Numeric value with a bound on the neglected tails.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ClosedFormValue {
    pub value: Complex64,
    pub tail_bound: f64,
}

/// Real-parameter inputs shared by the numeric closed forms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Point {
    pub t: f64,
    pub epsilon: f64,
    pub degree: f64,
}

impl Point {
    pub fn q(&self) -> f64 {
        (-2.0 * PI * self.degree).exp()
    }
}

/// `2 sum_n Omega_n sum_{k<=K} k^{-2} sum_{m=1}^{M_q} t/(1 + (2 pi m t/k)^2) e^{-2 pi i m n eps} q^m`,
/// plus the `m = 0` term `t (sum_n Omega_n) sum_{k<=K} k^{-2}` when `zero_mode` is set.
pub fn f_beta_closed(p: Point, omega: &OmegaTable, k_max: u32, m_q: u32, zero_mode: bool) -> Result<ClosedFormValue> {
    if !(p.t > 0.0) || !(p.degree > 0.0) || k_max == 0 || m_q == 0 {
        return Err(Error::Invalid(format!("f_beta_closed needs t, degree, K, M_q > 0: {p:?}")));
    }
    let q = p.q();
    let mut value = Complex64::new(0.0, 0.0);
    for m in 1..=m_q {
        let lat = lattice_sum(m, p.t, KSum::Partial(k_max));
        let phase = EpsilonLaurent::from_omega(omega, m).eval(p.epsilon);
        value += 2.0 * lat * phase * q.powi(m as i32);
    }
    let total: i64 = omega.values().sum();
    if zero_mode {
        value += p.t * total as f64 * zeta2_partial(KSum::Partial(k_max));
    }
    let abs: f64 = omega.values().map(|v| v.abs() as f64).sum();
    let k_tail = 2.0 * abs * (p.t / k_max as f64) * q / (1.0 - q) + if zero_mode { abs * p.t / k_max as f64 } else { 0.0 };
    let q_tail = 2.0 * abs * p.t * (PI * PI / 6.0) * q.powi(m_q as i32 + 1) / (1.0 - q);
    Ok(ClosedFormValue { value, tail_bound: k_tail + q_tail })
}

/// The coefficient of `q^m` in the genus form.
pub fn genus_form_q_coefficient(t: f64, epsilon: f64, gv: &GenusSeries, m: u32, k: KSum) -> Complex64 {
    2.0 * EpsilonLaurent::from_genus(gv, m).eval(epsilon) * lattice_sum(m, t, k)
}

/// `2 sum_g n_g (-1)^g sum_{m=1}^{M_q} (e^{-i pi m eps} - e^{i pi m eps})^{2g} q^m sum_k k^{-2} t/(1 + (2 pi m t/k)^2)`.
pub fn f_beta_genus_form(p: Point, gv: &GenusSeries, k: KSum, m_q: u32, zero_mode: bool) -> Complex64 {
    let q = p.q();
    let mut value: Complex64 = (1..=m_q)
        .map(|m| genus_form_q_coefficient(p.t, p.epsilon, gv, m, k) * q.powi(m as i32))
        .sum();
    if zero_mode {
        value += p.t * gv.get(&0).copied().unwrap_or(0) as f64 * zeta2_partial(k);
    }
    value
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maulik_toda::{omega_from_gv, GvTable};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gs(pairs: &[(u32, i64)]) -> GenusSeries {
        pairs.iter().copied().collect()
    }

    fn omega_of(g: &GenusSeries) -> OmegaTable {
        let mut t = GvTable::new();
        for (&k, &v) in g {
            t.set(vec![1], k, v);
        }
        omega_from_gv(&t, &[1])
    }

    #[test]
    fn bernoulli_and_zeta() {
        assert_eq!(bernoulli(0).unwrap(), rat_int(1));
        assert_eq!(bernoulli(2).unwrap(), rat(1, 6));
        assert_eq!(bernoulli(4).unwrap(), rat(-1, 30));
        assert_eq!(bernoulli(12).unwrap(), rat(-691, 2730));
        assert_eq!(bernoulli_numbers(1)[1], rat(-1, 2));
        assert_eq!(bernoulli(3), Err(Error::OddBernoulliIndex(3)));
        assert_eq!(zeta_even(1).unwrap(), PiPoly::pi_pow(2).scale_rational(&rat(1, 6)));
        assert_eq!(zeta_even(2).unwrap(), PiPoly::pi_pow(4).scale_rational(&rat(1, 90)));
        assert_eq!(zeta_even(3).unwrap(), PiPoly::pi_pow(6).scale_rational(&rat(1, 945)));
        let direct: f64 = (1..200_000).rev().map(|k| (k as f64).powi(-4)).sum();
        assert!((zeta_even(2).unwrap().to_complex().re - direct).abs() < 1e-14);
    }

    #[test]
    fn bracket_modes() {
        let literal = regularized_bracket_series(8, SignMode::Literal);
        assert_eq!(literal.valuation(), Some(0));
        assert_eq!(literal.coefficient(0), rat(1, 12));
        assert_eq!(literal.coefficient(2), rat(-1, 240));
        let resolved = regularized_bracket_series(16, SignMode::Resolved);
        let x = 0.1f64;
        let direct = (2.0 * (x / 2.0).sin()).powi(-2) - 1.0 / (x * x) + 1.0 / 6.0;
        assert!((resolved.eval(x) - direct).abs() < 1e-10);
        assert!((regularized_bracket_series(16, SignMode::Literal).eval(x) - direct).abs() > 1e-4);
        // the resolved series is the Bernoulli expansion with all signs positive
        for s in 2..=8u32 {
            assert_eq!(resolved.coefficient(2 * s as i32 - 2), bracket_coefficient(s));
        }
        assert_eq!(resolved.coefficient(0), rat(1, 4));
    }

    #[test]
    fn resolved_kernel_is_hyperbolic() {
        let (k, _) = theorem_kernel(12, SignMode::Resolved);
        assert_eq!(k, alternating_kernel(12));
        let x = 0.4f64;
        let direct = 1.0 / (x * x) - (2.0 * (x / 2.0).sinh()).powi(-2);
        assert!((k.eval(x) - direct).abs() < 1e-10);
    }

    #[test]
    fn epsilon_laurent_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let g: GenusSeries = (0..=4).map(|k| (k, rng.gen_range(-3..=3))).collect();
            let omega = omega_of(&g);
            for m in 1..=4 {
                assert_eq!(EpsilonLaurent::from_omega(&omega, m), EpsilonLaurent::from_genus(&g, m));
            }
        }
    }

    #[test]
    fn closed_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = gs(&[(0, 2), (1, 3), (2, 1)]);
        let omega = omega_of(&g);
        for _ in 0..5 {
            let p = Point { t: rng.gen_range(0.05..2.0), epsilon: rng.gen_range(-0.5..0.5), degree: rng.gen_range(0.2..1.5) };
            let a = f_beta_closed(p, &omega, 50, 40, false).unwrap().value;
            let b = f_beta_genus_form(p, &g, KSum::Partial(50), 40, false);
            assert!((a - b).norm() < 1e-10);
        }
        let p = Point { t: 0.3, epsilon: 0.17, degree: 0.5 };
        assert_eq!(f_beta_closed(p, &OmegaTable::new(), 20, 10, true).unwrap().value, Complex64::new(0.0, 0.0));
        let small = Point { t: 1e-9, ..p };
        assert!(f_beta_closed(small, &omega, 20, 10, true).unwrap().value.norm() < 1e-7);
        let partial = f_beta_genus_form(p, &g, KSum::Partial(100_000), 30, false);
        let closed = f_beta_genus_form(p, &g, KSum::Closed, 30, false);
        assert!((partial - closed).norm() < 1e-4);
    }

    #[test]
    fn exact_f_series() {
        assert!(f_beta_series_exact(&GenusSeries::new(), 6, 3).unwrap().is_zero());
        let g = gs(&[(0, 1)]);
        let s = f_beta_series_exact(&g, 8, 3).unwrap();
        assert_eq!(s.coefficient(1, 1), PiPoly::rational(rat(1, 12)));
        // numeric oracle on the q^1 coefficient
        let u = 0.01f64;
        let row: f64 = (0..=8).map(|j| s.coefficient(j, 1).to_complex().re * u.powi(j)).sum();
        let numeric = genus_form_q_coefficient(u / (4.0 * PI * PI), u / (2.0 * PI), &g, 1, KSum::Closed);
        assert!((row - numeric.re).abs() < 1e-8 && numeric.im.abs() < 1e-15);
        let big = gs(&[(0, 2), (1, 3), (2, 1)]);
        let lo = f_beta_series_exact(&big, 6, 3).unwrap();
        let hi = f_beta_series_exact(&big, 8, 3).unwrap();
        assert_eq!(hi.truncate(6, 3), lo);
    }

    #[test]
    fn gw_and_missing_examples() {
        let g0 = gs(&[(0, 1)]);
        let gw = gw_gv_series(&g0, 4, 4).unwrap();
        let miss = missing_term_series(&g0, 4, 4).unwrap();
        for r in 1..=4i64 {
            assert_eq!(gw.coefficient(-2, r as u32), PiPoly::rational(rat(1, r * r * r)));
            assert_eq!(miss.coefficient(-2, r as u32), PiPoly::rational(rat(1, r * r * r)));
            assert_eq!(miss.coefficient(0, r as u32), PiPoly::rational(rat(-1, 6 * r)));
        }
        let g1 = gs(&[(1, 1)]);
        let gw1 = gw_gv_series(&g1, 4, 4).unwrap();
        assert_eq!(gw1.len(), 4);
        for r in 1..=4i64 {
            assert_eq!(gw1.coefficient(0, r as u32), PiPoly::rational(rat(1, r)));
        }
        assert!(gw_gv_series(&GenusSeries::new(), 4, 4).unwrap().is_zero());
    }

    #[test]
    fn regrouping_identity() {
        let g = gs(&[(0, 2), (1, 3), (2, 1)]);
        let gw = gw_gv_series(&g, 6, 3).unwrap();
        let miss = missing_term_series(&g, 6, 3).unwrap();
        let resolved = regularized_gv_series(&g, 6, 3, SignMode::Resolved).unwrap();
        assert!(gw.sub(&resolved).unwrap().sub(&miss).unwrap().is_zero());
        let literal = regularized_gv_series(&g, 6, 3, SignMode::Literal).unwrap();
        assert!(!gw.sub(&literal).unwrap().sub(&miss).unwrap().is_zero());
    }

    #[test]
    fn theorem_small_orders() {
        let empty = check_main_theorem(&GenusSeries::new(), 4, 2, SignMode::Resolved).unwrap();
        assert!(empty.passed && empty.comparison.rows.is_empty());
        let g = gs(&[(0, 1)]);
        assert!(check_main_theorem(&g, 4, 3, SignMode::Resolved).unwrap().passed);
        let literal = check_main_theorem(&g, 4, 3, SignMode::Literal).unwrap();
        assert!(!literal.passed);
        assert_eq!(literal.comparison.common_ratio.as_deref(), Some("2 * Pi^1"));
    }

    #[test]
    fn diff_equ_constant_and_fd_oracle() {
        let g = gs(&[(0, 1)]);
        let d = diff_equ_proof_series(&g, 6, 2, EpsilonChoice::Coupled).unwrap();
        // -2 pi i * (1/12)
        assert_eq!(d.coefficient(0, 1), PiPoly::monomial(GaussianRational::new(rat_int(0), rat(-1, 6)), 1));
        let big = gs(&[(0, 2), (1, 3), (2, 1)]);
        let d = diff_equ_proof_series(&big, 10, 2, EpsilonChoice::Coupled).unwrap();
        let u = 0.05f64;
        let (t, eps, h) = (u / (4.0 * PI * PI), u / (2.0 * PI), 1e-4 * u / (4.0 * PI * PI));
        for m in 1..=2u32 {
            let fd = (genus_form_q_coefficient(t + h, eps, &big, m, KSum::Closed)
                - genus_form_q_coefficient(t - h, eps, &big, m, KSum::Closed))
                / (2.0 * h);
            let series: Complex64 = (0..=10)
                .map(|j| d.coefficient(j, m).to_complex() * u.powi(j))
                .sum::<Complex64>()
                * Complex64::new(0.0, 2.0 * PI * m as f64);
            assert!((fd - series).norm() < 1e-6 * fd.norm().max(1.0), "m = {m}: {fd} vs {series}");
        }
        assert!(diff_equ_proof_series(&GenusSeries::new(), 4, 2, EpsilonChoice::Coupled).unwrap().is_zero());
    }

    #[test]
    fn epsilon_zero_limit_is_genus_zero_only() {
        let g = gs(&[(0, 2), (1, 3), (2, 1)]);
        let d = diff_equ_proof_series(&g, 6, 3, EpsilonChoice::Zero).unwrap();
        let only0 = diff_equ_proof_series(&gs(&[(0, 2)]), 6, 3, EpsilonChoice::Zero).unwrap();
        assert_eq!(d, only0);
        // -2 pi i n_0 sum_m (1/m) K(mu) q^m with K = 1/x^2 - (2 sinh(x/2))^{-2}
        let (k, _) = theorem_kernel(10, SignMode::Resolved);
        let mut expected = UqSeries::zero(6, 3);
        for m in 1..=3u32 {
            let c = PiPoly::monomial(GaussianRational::new(rat_int(0), rat(-4, m as i64)), 1);
            expected.add_laurent(m, &k.rescale(&rat_int(m as i64)), &c).unwrap();
        }
        assert_eq!(d, expected);
    }
}
