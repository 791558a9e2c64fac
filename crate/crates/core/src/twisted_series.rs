//! Truncated power series in `s` over the twisted group algebra `C[Gamma]`.
//!
//! Products follow `x_a x_b = (-1)^<a,b> x_{a+b}` and the Poisson bracket is
//! `[x_a, x_b] = (-1)^<a,b> <a,b> x_{a+b}`. Everything is taken modulo
//! `s^{N+1}` where `N` is the series' truncation order.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::coeff::{rat, rat_int, Coefficient, PiPoly, Rational};
use crate::error::{Error, Result};
use crate::lattice::{CentralChargeSpec, LatticeElement, SkewPairing};

/// `s^{s_power} x_{charge}`; ordered by `(s_power, charge)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub s_power: u32,
    pub charge: LatticeElement,
}

impl Monomial {
    pub fn new(charge: LatticeElement, s_power: u32) -> Self {
        Self { s_power, charge }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s^{} * x[{}]", self.s_power, self.charge)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwistedSeries<C> {
    order: u32,
    rank: usize,
    terms: BTreeMap<Monomial, C>,
}

pub type ExactSeries = TwistedSeries<PiPoly>;
pub type NumericSeries = TwistedSeries<Complex64>;

impl<C: Coefficient> TwistedSeries<C> {
    pub fn zero(rank: usize, order: u32) -> Self {
        Self { order, rank, terms: BTreeMap::new() }
    }

    pub fn one(rank: usize, order: u32) -> Self {
        Self::monomial(LatticeElement::zero(rank), 0, C::one(), order)
    }

    pub fn monomial(charge: LatticeElement, s_power: u32, coeff: C, order: u32) -> Self {
        let rank = charge.rank();
        let mut out = Self::zero(rank, order);
        out.add_term(Monomial::new(charge, s_power), coeff);
        out
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    /// Adds `c * m`, dropping it when beyond the truncation order.
    pub fn add_term(&mut self, m: Monomial, c: C) {
        if m.s_power > self.order || c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v = v.clone() + c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn has_constant_term(&self) -> bool {
        self.terms.keys().any(|m| m.s_power == 0)
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero(self.rank, self.order);
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v.clone() * c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = -v.clone();
        }
        out
    }

    fn check_order(&self, o: &Self) -> Result<()> {
        if self.order != o.order {
            return Err(Error::TruncationMismatch(self.order, o.order));
        }
        if self.rank != o.rank {
            return Err(Error::RankMismatch { expected: self.rank, got: o.rank });
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check_order(o)?;
        let mut out = self.clone();
        for (m, v) in &o.terms {
            out.add_term(m.clone(), v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    /// Reduces modulo `s^{order+1}` for a smaller order.
    pub fn truncate(&self, order: u32) -> Self {
        let mut out = Self::zero(self.rank, order.min(self.order));
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v.clone());
        }
        out
    }

    /// Same terms, larger nominal order (no new information is created).
    pub fn with_order(&self, order: u32) -> Self {
        let mut out = Self::zero(self.rank, order);
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v.clone());
        }
        out
    }

    pub fn map_coefficients<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> TwistedSeries<D> {
        let mut out = TwistedSeries::zero(self.rank, self.order);
        for (m, v) in &self.terms {
            out.add_term(m.clone(), f(v));
        }
        out
    }

    /// Maximum coefficient magnitude at each `s` power `0..=order`.
    pub fn max_by_s_order(&self) -> Vec<f64> {
        let mut out = vec![0.0f64; self.order as usize + 1];
        for (m, v) in &self.terms {
            let slot = &mut out[m.s_power as usize];
            *slot = slot.max(v.magnitude());
        }
        out
    }

    /// Specialise `s = 1` and every `x_a = 1`.
    pub fn sum_coefficients(&self) -> C {
        self.terms.values().fold(C::zero(), |acc, v| acc + v.clone())
    }
}

impl ExactSeries {
    pub fn to_numeric(&self) -> NumericSeries {
        self.map_coefficients(|c| c.to_complex())
    }
}

impl fmt::Display for ExactSeries {
    /// One term per line: `coeff * Pi^k * s^j * x[(c1,...,cr)]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return writeln!(f, "0");
        }
        for (m, c) in &self.terms {
            for (k, g) in c.terms() {
                writeln!(f, "{g} * Pi^{k} * s^{} * x[{}]", m.s_power, m.charge)?;
            }
        }
        Ok(())
    }
}

/// `C[Gamma][[s]]` for a fixed skew form.
#[derive(Clone, Debug)]
pub struct TwistedAlgebra {
    pairing: SkewPairing,
}

impl TwistedAlgebra {
    pub fn new(pairing: SkewPairing) -> Self {
        Self { pairing }
    }

    pub fn pairing(&self) -> &SkewPairing {
        &self.pairing
    }

    pub fn rank(&self) -> usize {
        self.pairing.rank()
    }

    /// Product of two monomials: the combined monomial and the sign `(-1)^<a,b>`.
    pub fn mono_mul(&self, a: &Monomial, b: &Monomial) -> (Monomial, i64, i64) {
        let p = self.pairing.pair_unchecked(&a.charge, &b.charge);
        let sign = if p.rem_euclid(2) == 0 { 1 } else { -1 };
        (Monomial::new(&a.charge + &b.charge, a.s_power + b.s_power), sign, p)
    }

    fn check<C: Coefficient>(&self, f: &TwistedSeries<C>, g: &TwistedSeries<C>) -> Result<()> {
        if f.rank != self.rank() {
            return Err(Error::RankMismatch { expected: self.rank(), got: f.rank });
        }
        f.check_order(g)
    }

    pub fn mul<C: Coefficient>(&self, f: &TwistedSeries<C>, g: &TwistedSeries<C>) -> Result<TwistedSeries<C>> {
        self.check(f, g)?;
        let mut out = TwistedSeries::zero(f.rank, f.order);
        for (a, ca) in &f.terms {
            for (b, cb) in &g.terms {
                if a.s_power + b.s_power > f.order {
                    // terms are sorted by s-power
                    break;
                }
                let (m, sign, _) = self.mono_mul(a, b);
                let c = ca.clone() * cb.clone();
                out.add_term(m, if sign < 0 { -c } else { c });
            }
        }
        Ok(out)
    }

    pub fn bracket<C: Coefficient>(&self, f: &TwistedSeries<C>, g: &TwistedSeries<C>) -> Result<TwistedSeries<C>> {
        self.check(f, g)?;
        let mut out = TwistedSeries::zero(f.rank, f.order);
        for (a, ca) in &f.terms {
            for (b, cb) in &g.terms {
                if a.s_power + b.s_power > f.order {
                    break;
                }
                let (m, sign, p) = self.mono_mul(a, b);
                if p == 0 {
                    continue;
                }
                let c = ca.clone() * cb.clone() * C::from_i64(sign * p);
                out.add_term(m, c);
            }
        }
        Ok(out)
    }

    pub fn pow<C: Coefficient>(&self, f: &TwistedSeries<C>, k: u32) -> Result<TwistedSeries<C>> {
        let mut acc = TwistedSeries::one(f.rank, f.order);
        for _ in 0..k {
            acc = self.mul(&acc, f)?;
        }
        Ok(acc)
    }

    /// Sum `coeffs[j] * f^j`; `f` must have no `s^0` term so the sum is finite.
    fn nilpotent_sum<C: Coefficient>(
        &self,
        f: &TwistedSeries<C>,
        coeff: impl Fn(u32) -> Rational,
    ) -> Result<TwistedSeries<C>> {
        if f.has_constant_term() {
            return Err(Error::NonzeroConstantTerm);
        }
        let mut out = TwistedSeries::zero(f.rank, f.order);
        let mut power = TwistedSeries::one(f.rank, f.order);
        for j in 0..=f.order {
            let c = coeff(j);
            let term = power.scale(&C::from_rational(&c));
            out = out.add(&term)?;
            power = self.mul(&power, f)?;
            if power.is_zero() {
                break;
            }
        }
        Ok(out)
    }

    pub fn exp<C: Coefficient>(&self, f: &TwistedSeries<C>) -> Result<TwistedSeries<C>> {
        let mut fact = vec![rat_int(1)];
        for j in 1..=f.order {
            let prev = fact[j as usize - 1].clone();
            fact.push(prev * rat_int(j as i64));
        }
        self.nilpotent_sum(f, |j| rat_int(1) / fact[j as usize].clone())
    }

    /// `log(1 + f)`.
    pub fn log1p<C: Coefficient>(&self, f: &TwistedSeries<C>) -> Result<TwistedSeries<C>> {
        self.nilpotent_sum(f, |j| {
            if j == 0 {
                rat_int(0)
            } else {
                let sign = if j % 2 == 1 { 1 } else { -1 };
                rat(sign, j as i64)
            }
        })
    }

    /// `(1 + y)^e` by the generalised binomial series.
    pub fn binomial_pow<C: Coefficient>(&self, y: &TwistedSeries<C>, e: &Rational) -> Result<TwistedSeries<C>> {
        self.nilpotent_sum(y, |j| crate::coeff::gen_binomial(e, j))
    }

    pub fn apply_derivation<C: Coefficient>(
        &self,
        d: &Derivation<C>,
        x: &TwistedSeries<C>,
    ) -> Result<TwistedSeries<C>> {
        match d {
            Derivation::Inner(g) => self.bracket(g, x),
            Derivation::CentralCharge(values) => {
                let mut out = TwistedSeries::zero(x.rank, x.order);
                for (m, c) in &x.terms {
                    let z = m
                        .charge
                        .coords()
                        .iter()
                        .zip(values)
                        .fold(C::zero(), |acc, (k, v)| acc + C::from_i64(*k) * v.clone());
                    out.add_term(m.clone(), c.clone() * z);
                }
                Ok(out)
            }
        }
    }

    /// `sum_j D^j(x) / j!`, which terminates when `D = ad(g)` with `g` in `s C[Gamma][[s]]`.
    pub fn apply_exp_ad<C: Coefficient>(
        &self,
        d: &Derivation<C>,
        x: &TwistedSeries<C>,
    ) -> Result<TwistedSeries<C>> {
        match d {
            Derivation::Inner(g) if g.has_constant_term() => return Err(Error::NonNilpotent),
            Derivation::CentralCharge(_) => return Err(Error::NonNilpotent),
            _ => {}
        }
        let mut out = x.clone();
        let mut term = x.clone();
        for j in 1..=x.order + 1 {
            term = self.apply_derivation(d, &term)?.scale(&C::from_rational(&rat(1, j as i64)));
            if term.is_zero() {
                return Ok(out);
            }
            out = out.add(&term)?;
        }
        if term.is_zero() {
            Ok(out)
        } else {
            Err(Error::NonNilpotent)
        }
    }
}

/// A derivation of the commutative algebra.
#[derive(Clone, Debug)]
pub enum Derivation<C> {
    /// `ad(g) = [g, -]`.
    Inner(TwistedSeries<C>),
    /// `x_a -> Z(a) x_a`, with basis values of `Z`.
    CentralCharge(Vec<C>),
}

impl Derivation<Complex64> {
    pub fn from_central_charge(spec: &CentralChargeSpec) -> Self {
        Derivation::CentralCharge(spec.values.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{rat, GaussianRational};
    use proptest::prelude::*;

    fn le(v: &[i64]) -> LatticeElement {
        LatticeElement(v.to_vec())
    }

    fn alg() -> TwistedAlgebra {
        TwistedAlgebra::new(SkewPairing::new(vec![vec![0, 1, 2], vec![-1, 0, -1], vec![-2, 1, 0]]).unwrap())
    }

    fn mono(c: &[i64], s: u32, v: i64, order: u32) -> ExactSeries {
        TwistedSeries::monomial(le(c), s, PiPoly::int(v), order)
    }

    #[test]
    fn mono_mul_signs() {
        let a2 = TwistedAlgebra::new(SkewPairing::standard_2d());
        let x = mono(&[1, 0], 0, 1, 3);
        let y = mono(&[0, 1], 0, 1, 3);
        assert_eq!(a2.mul(&x, &y).unwrap(), mono(&[1, 1], 0, -1, 3));
        assert_eq!(a2.mul(&x, &x).unwrap(), mono(&[2, 0], 0, 1, 3));
        // pairing 2 gives sign +1 and bracket 2 x_{a+b}
        let z = mono(&[0, 2], 0, 1, 3);
        assert_eq!(a2.mul(&x, &z).unwrap(), mono(&[1, 2], 0, 1, 3));
        assert_eq!(a2.bracket(&x, &z).unwrap(), mono(&[1, 2], 0, 2, 3));
        assert!(a2.bracket(&x, &x).unwrap().is_zero());
    }

    #[test]
    fn truncation_and_mismatch() {
        let a = alg();
        let f = mono(&[1, 0, 0], 2, 1, 3);
        assert!(a.mul(&f, &f).unwrap().is_zero());
        let g = mono(&[1, 0, 0], 1, 1, 4);
        assert!(matches!(a.mul(&f, &g), Err(Error::TruncationMismatch(3, 4))));
    }

    #[test]
    fn exp_of_zero_and_constant_term() {
        let a = alg();
        let z = ExactSeries::zero(3, 4);
        assert_eq!(a.exp(&z).unwrap(), ExactSeries::one(3, 4));
        assert!(matches!(a.exp(&mono(&[1, 0, 0], 0, 1, 4)), Err(Error::NonzeroConstantTerm)));
    }

    #[test]
    fn log1p_of_minus_s_x() {
        let a = alg();
        let n = 5;
        let f = mono(&[0, 1, 0], 1, -1, n);
        let got = a.log1p(&f).unwrap();
        let mut want = ExactSeries::zero(3, n);
        for k in 1..=n {
            // x_b^k = x_{kb} since <b,b> = 0
            want.add_term(Monomial::new(le(&[0, k as i64, 0]), k), PiPoly::rational(rat(-1, k as i64)));
        }
        assert_eq!(got, want);
    }

    #[test]
    fn exp_ad_closed_form_single_generator() {
        // g = s x_b with <b, a> = c: exp(ad g) x_a = x_a exp(c s x_b) because
        // [x_b, x_a] = c x_b x_a and x_b is central for ad(g).
        let a2 = TwistedAlgebra::new(SkewPairing::standard_2d());
        let n = 6;
        let g = mono(&[1, 0], 1, 1, n);
        let xa = mono(&[0, 3], 0, 1, n);
        let c = a2.pairing().pair_unchecked(&le(&[1, 0]), &le(&[0, 3]));
        let got = a2.apply_exp_ad(&Derivation::Inner(g.clone()), &xa).unwrap();
        let e = a2.exp(&g.scale(&PiPoly::int(c))).unwrap();
        let want = a2.mul(&e, &xa).unwrap();
        assert_eq!(got, want);
        assert_eq!(a2.apply_exp_ad(&Derivation::Inner(ExactSeries::zero(2, n)), &xa).unwrap(), xa);
    }

    #[test]
    fn canonical_text() {
        let mut f = mono(&[1, 0, 0], 1, 2, 3);
        f.add_term(Monomial::new(le(&[0, 0, 0]), 0), PiPoly::monomial(GaussianRational::new(rat(1, 2), rat(0, 1)), 2));
        assert_eq!(f.to_string(), "1/2 * Pi^2 * s^0 * x[(0,0,0)]\n2 * Pi^0 * s^1 * x[(1,0,0)]\n");
    }

    #[test]
    fn central_charge_derivation_is_leibniz() {
        let a = alg();
        let d = Derivation::CentralCharge(vec![PiPoly::int(2), PiPoly::int(-1), PiPoly::int(5)]);
        let f = mono(&[1, 2, 0], 1, 3, 4).add(&mono(&[0, 1, 1], 2, -1, 4)).unwrap();
        let g = mono(&[2, 0, -1], 1, 1, 4);
        let lhs = a.apply_derivation(&d, &a.mul(&f, &g).unwrap()).unwrap();
        let rhs = a
            .mul(&a.apply_derivation(&d, &f).unwrap(), &g)
            .unwrap()
            .add(&a.mul(&f, &a.apply_derivation(&d, &g).unwrap()).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
        assert!(matches!(a.apply_exp_ad(&d, &f), Err(Error::NonNilpotent)));
    }

    fn series_strategy(order: u32, min_s: u32) -> impl Strategy<Value = ExactSeries> {
        proptest::collection::vec(
            (proptest::collection::vec(-2i64..=2, 3), min_s..=order, -3i64..=3),
            0..4,
        )
        .prop_map(move |terms| {
            let mut f = ExactSeries::zero(3, order);
            for (c, s, v) in terms {
                f.add_term(Monomial::new(LatticeElement(c), s), PiPoly::int(v));
            }
            f
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn product_laws(f in series_strategy(6, 0), g in series_strategy(6, 0), h in series_strategy(6, 0)) {
            let a = alg();
            prop_assert_eq!(a.mul(&f, &g).unwrap(), a.mul(&g, &f).unwrap());
            prop_assert_eq!(
                a.mul(&a.mul(&f, &g).unwrap(), &h).unwrap(),
                a.mul(&f, &a.mul(&g, &h).unwrap()).unwrap()
            );
            prop_assert_eq!(a.mul(&f, &ExactSeries::one(3, 6)).unwrap(), f.clone());
        }

        #[test]
        fn bracket_laws(f in series_strategy(5, 0), g in series_strategy(5, 0), h in series_strategy(5, 0)) {
            let a = alg();
            prop_assert_eq!(a.bracket(&f, &g).unwrap(), a.bracket(&g, &f).unwrap().neg());
            let jac = a.bracket(&f, &a.bracket(&g, &h).unwrap()).unwrap()
                .add(&a.bracket(&g, &a.bracket(&h, &f).unwrap()).unwrap()).unwrap()
                .add(&a.bracket(&h, &a.bracket(&f, &g).unwrap()).unwrap()).unwrap();
            prop_assert!(jac.is_zero());
            let lhs = a.bracket(&f, &a.mul(&g, &h).unwrap()).unwrap();
            let rhs = a.mul(&a.bracket(&f, &g).unwrap(), &h).unwrap()
                .add(&a.mul(&g, &a.bracket(&f, &h).unwrap()).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn exp_inverts_log1p(f in series_strategy(5, 1)) {
            let a = alg();
            let e = a.exp(&a.log1p(&f).unwrap()).unwrap();
            prop_assert_eq!(e, ExactSeries::one(3, 5).add(&f).unwrap());
        }

        #[test]
        fn exp_ad_is_multiplicative(g in series_strategy(5, 1), f in series_strategy(5, 0), h in series_strategy(5, 0)) {
            let a = alg();
            let d = Derivation::Inner(g);
            let lhs = a.apply_exp_ad(&d, &a.mul(&f, &h).unwrap()).unwrap();
            let rhs = a.mul(&a.apply_exp_ad(&d, &f).unwrap(), &a.apply_exp_ad(&d, &h).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
