//! Charge lattice, skew pairing, central charge and BPS spectrum.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::coeff::{parse_rational, rat_to_string, Rational};
use crate::error::{Error, Result};

/// Integer charge vector in a fixed basis of the lattice.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeElement(pub Vec<i64>);

impl LatticeElement {
    pub fn new(coords: Vec<i64>) -> Self {
        Self(coords)
    }

    pub fn zero(rank: usize) -> Self {
        Self(vec![0; rank])
    }

    pub fn basis(rank: usize, i: usize) -> Self {
        let mut v = vec![0; rank];
        v[i] = 1;
        Self(v)
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| *c == 0)
    }

    /// L1 norm in the declared basis.
    pub fn norm(&self) -> u32 {
        self.0.iter().map(|c| c.unsigned_abs() as u32).sum()
    }

    pub fn scale(&self, k: i64) -> Self {
        Self(self.0.iter().map(|c| c * k).collect())
    }

    /// Primitive generator `p` and multiplicity `k` with `self = k p`, `k > 0`.
    pub fn primitive(&self) -> (LatticeElement, i64) {
        let g = self.0.iter().fold(0i64, |g, c| num_integer::gcd(g, *c));
        if g == 0 {
            return (self.clone(), 1);
        }
        (Self(self.0.iter().map(|c| c / g).collect()), g)
    }

    pub(crate) fn check_rank(&self, rank: usize) -> Result<()> {
        if self.rank() != rank {
            return Err(Error::RankMismatch { expected: rank, got: self.rank() });
        }
        Ok(())
    }
}

impl Add for &LatticeElement {
    type Output = LatticeElement;
    fn add(self, o: &LatticeElement) -> LatticeElement {
        LatticeElement(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &LatticeElement {
    type Output = LatticeElement;
    fn sub(self, o: &LatticeElement) -> LatticeElement {
        LatticeElement(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &LatticeElement {
    type Output = LatticeElement;
    fn neg(self) -> LatticeElement {
        LatticeElement(self.0.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for LatticeElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Skew-symmetric integer form `<a, b> = a^T M b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkewPairing {
    matrix: Vec<Vec<i64>>,
}

impl SkewPairing {
    pub fn new(matrix: Vec<Vec<i64>>) -> Result<Self> {
        let n = matrix.len();
        if matrix.iter().any(|row| row.len() != n) {
            return Err(Error::BadMatrixShape(n));
        }
        for i in 0..n {
            for j in 0..n {
                if matrix[i][j] + matrix[j][i] != 0 {
                    return Err(Error::NotSkew { row: i, col: j });
                }
            }
        }
        Ok(Self { matrix })
    }

    pub fn zero(rank: usize) -> Self {
        Self { matrix: vec![vec![0; rank]; rank] }
    }

    /// Standard symplectic form on `Z^2`: `<e1, e2> = 1`.
    pub fn standard_2d() -> Self {
        Self { matrix: vec![vec![0, 1], vec![-1, 0]] }
    }

    pub fn rank(&self) -> usize {
        self.matrix.len()
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    pub fn pair(&self, a: &LatticeElement, b: &LatticeElement) -> Result<i64> {
        a.check_rank(self.rank())?;
        b.check_rank(self.rank())?;
        Ok(self.pair_unchecked(a, b))
    }

    /// Pairing without rank validation; callers guarantee matching ranks.
    pub fn pair_unchecked(&self, a: &LatticeElement, b: &LatticeElement) -> i64 {
        let mut acc = 0i64;
        for (i, ai) in a.0.iter().enumerate() {
            if *ai == 0 {
                continue;
            }
            let row = &self.matrix[i];
            for (j, bj) in b.0.iter().enumerate() {
                acc += ai * row[j] * bj;
            }
        }
        acc
    }
}

/// Values of `Z` on the basis; `Z` extends linearly.
#[derive(Clone, Debug, PartialEq)]
pub struct CentralChargeSpec {
    pub values: Vec<Complex64>,
}

impl CentralChargeSpec {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn rank(&self) -> usize {
        self.values.len()
    }

    pub fn central_charge(&self, a: &LatticeElement) -> Result<Complex64> {
        a.check_rank(self.rank())?;
        Ok(self.eval_unchecked(a))
    }

    pub(crate) fn eval_unchecked(&self, a: &LatticeElement) -> Complex64 {
        a.0.iter()
            .zip(&self.values)
            .filter(|(c, _)| **c != 0)
            .map(|(c, z)| z * (*c as f64))
            .sum()
    }
}

/// Finitely supported spectrum `Omega`; absent keys are zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BpsSpectrumTable {
    entries: BTreeMap<LatticeElement, Rational>,
}

impl BpsSpectrumTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, charge: LatticeElement, value: Rational) {
        if value.is_zero() {
            self.entries.remove(&charge);
        } else {
            self.entries.insert(charge, value);
        }
    }

    pub fn get(&self, charge: &LatticeElement) -> Rational {
        self.entries.get(charge).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LatticeElement, &Rational)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Same support with every value negated (inverts `S_l`).
    pub fn negated(&self) -> Self {
        Self { entries: self.entries.iter().map(|(k, v)| (k.clone(), -v.clone())).collect() }
    }
}

impl FromIterator<(LatticeElement, Rational)> for BpsSpectrumTable {
    fn from_iter<I: IntoIterator<Item = (LatticeElement, Rational)>>(iter: I) -> Self {
        let mut t = Self::new();
        for (k, v) in iter {
            t.insert(k, v);
        }
        t
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StructureFlags {
    pub integral: bool,
    pub symmetric: bool,
    pub uncoupled: bool,
}

/// A BPS structure `(Gamma, <,>, Z, Omega)` with cached flags.
#[derive(Clone, Debug)]
pub struct BpsStructure {
    pairing: SkewPairing,
    charge: CentralChargeSpec,
    spectrum: BpsSpectrumTable,
    flags: StructureFlags,
}

impl BpsStructure {
    pub fn new(pairing: SkewPairing, charge: CentralChargeSpec, spectrum: BpsSpectrumTable) -> Result<Self> {
        let rank = pairing.rank();
        charge.values.len().eq(&rank).then_some(()).ok_or(Error::RankMismatch {
            expected: rank,
            got: charge.rank(),
        })?;
        for (a, _) in spectrum.iter() {
            a.check_rank(rank)?;
        }
        let flags = compute_flags(&pairing, &spectrum);
        Ok(Self { pairing, charge, spectrum, flags })
    }

    pub fn rank(&self) -> usize {
        self.pairing.rank()
    }

    pub fn pairing(&self) -> &SkewPairing {
        &self.pairing
    }

    pub fn charge(&self) -> &CentralChargeSpec {
        &self.charge
    }

    pub fn spectrum(&self) -> &BpsSpectrumTable {
        &self.spectrum
    }

    pub fn flags(&self) -> StructureFlags {
        self.flags
    }

    pub fn omega(&self, a: &LatticeElement) -> Rational {
        self.spectrum.get(a)
    }

    pub fn z(&self, a: &LatticeElement) -> Complex64 {
        self.charge.eval_unchecked(a)
    }

    /// Same lattice and central charge with a replaced spectrum.
    pub fn with_spectrum(&self, spectrum: BpsSpectrumTable) -> Result<Self> {
        Self::new(self.pairing.clone(), self.charge.clone(), spectrum)
    }

    pub fn with_charge(&self, charge: CentralChargeSpec) -> Result<Self> {
        Self::new(self.pairing.clone(), charge, self.spectrum.clone())
    }

    /// First pair of support charges with nonzero pairing, if any.
    pub fn coupling_witness(&self) -> Option<(LatticeElement, LatticeElement)> {
        let support: Vec<&LatticeElement> = self.spectrum.iter().map(|(a, _)| a).collect();
        for (i, a) in support.iter().enumerate() {
            for b in &support[i + 1..] {
                if self.pairing.pair_unchecked(a, b) != 0 {
                    return Some(((*a).clone(), (*b).clone()));
                }
            }
        }
        None
    }

    pub fn require_uncoupled(&self) -> Result<()> {
        match self.coupling_witness() {
            None => Ok(()),
            Some((a, b)) => Err(Error::NotUncoupled(a.to_string(), b.to_string())),
        }
    }

    /// Support charges whose central charge lies on `ray`.
    pub fn charges_on_ray(&self, ray: &Ray, norm_bound: u32) -> Vec<(LatticeElement, Rational)> {
        let mut out: Vec<(LatticeElement, Rational)> = self
            .spectrum
            .iter()
            .filter(|(a, _)| a.norm() <= norm_bound)
            .filter(|(a, _)| ray.contains(self.z(a)))
            .map(|(a, v)| (a.clone(), v.clone()))
            .collect();
        out.sort_by(|(a, _), (b, _)| a.norm().cmp(&b.norm()).then_with(|| a.cmp(b)));
        out
    }

    /// Distinct rays `R_{>0} Z(a)` over the support with `||a|| <= norm_bound`.
    pub fn active_rays(&self, norm_bound: u32) -> Result<Vec<Ray>> {
        let mut zero = Vec::new();
        let mut rays: Vec<Ray> = Vec::new();
        for (a, _) in self.spectrum.iter() {
            if a.norm() > norm_bound {
                continue;
            }
            let z = self.z(a);
            if z.norm() == 0.0 {
                zero.push(a.to_string());
                continue;
            }
            let r = Ray::new(z)?;
            if !rays.iter().any(|x| *x == r) {
                rays.push(r);
            }
        }
        if !zero.is_empty() {
            return Err(Error::ZeroCentralCharge(zero.join(", ")));
        }
        rays.sort_by(|a, b| a.angle().total_cmp(&b.angle()));
        Ok(rays)
    }
}

fn compute_flags(pairing: &SkewPairing, spectrum: &BpsSpectrumTable) -> StructureFlags {
    let integral = spectrum.iter().all(|(_, v)| v.denom().is_one());
    let symmetric = spectrum.iter().all(|(a, v)| spectrum.get(&-a) == *v);
    let support: Vec<&LatticeElement> = spectrum.iter().map(|(a, _)| a).collect();
    let uncoupled = support
        .iter()
        .enumerate()
        .all(|(i, a)| support[i + 1..].iter().all(|b| pairing.pair_unchecked(a, b) == 0));
    StructureFlags { integral, symmetric, uncoupled }
}

/// Relative tolerance used to decide that two directions are collinear.
pub const RAY_TOLERANCE: f64 = 1e-12;

/// Open ray `R_{>0} direction` in `C*`.
#[derive(Clone, Copy, Debug)]
pub struct Ray {
    direction: Complex64,
}

impl Ray {
    pub fn new(direction: Complex64) -> Result<Self> {
        if direction.norm() == 0.0 || !direction.norm().is_finite() {
            return Err(Error::DegenerateRay);
        }
        Ok(Self { direction: direction / direction.norm() })
    }

    pub fn from_angle(theta: f64) -> Self {
        Self { direction: Complex64::from_polar(1.0, theta) }
    }

    /// Unit direction.
    pub fn direction(&self) -> Complex64 {
        self.direction
    }

    pub fn angle(&self) -> f64 {
        self.direction.arg()
    }

    pub fn opposite(&self) -> Ray {
        Ray { direction: -self.direction }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let n = z.norm();
        if n == 0.0 {
            return false;
        }
        let w = z / n;
        let cross = self.direction.re * w.im - self.direction.im * w.re;
        let dot = self.direction.re * w.re + self.direction.im * w.im;
        dot > 0.0 && cross.abs() <= RAY_TOLERANCE
    }

    /// Unsigned angular distance in `[0, pi]`.
    pub fn angular_distance(&self, z: Complex64) -> f64 {
        (z / self.direction).arg().abs()
    }

    pub fn point(&self, radius: f64) -> Complex64 {
        self.direction * radius
    }
}

impl PartialEq for Ray {
    fn eq(&self, o: &Ray) -> bool {
        self.contains(o.direction)
    }
}

impl fmt::Display for Ray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R>0*({:.6}{:+.6}i)", self.direction.re, self.direction.im)
    }
}

/// JSON document for a BPS structure.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BpsStructureDoc {
    pub rank: usize,
    pub pairing: Vec<Vec<i64>>,
    /// `[re, im]` as decimal strings, one per basis element.
    pub charges: Vec<[String; 2]>,
    /// `(coords, rational string)` pairs.
    pub spectrum: Vec<(Vec<i64>, String)>,
}

impl BpsStructureDoc {
    pub fn into_structure(self) -> Result<BpsStructure> {
        if self.pairing.len() != self.rank {
            return Err(Error::RankMismatch { expected: self.rank, got: self.pairing.len() });
        }
        if self.charges.len() != self.rank {
            return Err(Error::RankMismatch { expected: self.rank, got: self.charges.len() });
        }
        let pairing = SkewPairing::new(self.pairing)?;
        let mut values = Vec::with_capacity(self.rank);
        for (i, [re, im]) in self.charges.iter().enumerate() {
            let re: f64 = re
                .trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("charges[{i}].re: not a decimal: {re:?}")))?;
            let im: f64 = im
                .trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("charges[{i}].im: not a decimal: {im:?}")))?;
            values.push(Complex64::new(re, im));
        }
        let mut spectrum = BpsSpectrumTable::new();
        for (i, (coords, v)) in self.spectrum.into_iter().enumerate() {
            let r = parse_rational(&v)
                .ok_or_else(|| Error::Invalid(format!("spectrum[{i}]: malformed rational {v:?}")))?;
            let a = LatticeElement(coords);
            a.check_rank(self.rank)?;
            spectrum.insert(a, r);
        }
        BpsStructure::new(pairing, CentralChargeSpec::new(values), spectrum)
    }

    pub fn from_structure(bps: &BpsStructure) -> Self {
        Self {
            rank: bps.rank(),
            pairing: bps.pairing.matrix.clone(),
            charges: bps
                .charge
                .values
                .iter()
                .map(|z| [format!("{:?}", z.re), format!("{:?}", z.im)])
                .collect(),
            spectrum: bps.spectrum.iter().map(|(a, v)| (a.0.clone(), rat_to_string(v))).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{rat, rat_int};
    use proptest::prelude::*;

    fn le(v: &[i64]) -> LatticeElement {
        LatticeElement(v.to_vec())
    }

    #[test]
    fn pairing_examples() {
        let m = SkewPairing::standard_2d();
        assert_eq!(m.pair(&le(&[1, 0]), &le(&[0, 1])).unwrap(), 1);
        assert_eq!(m.pair(&le(&[3, -2]), &le(&[3, -2])).unwrap(), 0);
        assert!(matches!(m.pair(&le(&[1]), &le(&[0, 1])), Err(Error::RankMismatch { .. })));
        assert!(SkewPairing::new(vec![vec![0, 1], vec![1, 0]]).is_err());
    }

    #[test]
    fn norm_examples() {
        assert_eq!(le(&[0, 0, 0]).norm(), 0);
        assert_eq!(le(&[2, -3, 1]).norm(), 6);
    }

    #[test]
    fn central_charge_examples() {
        // (m, beta, n) with omega.beta = 0.5, eps = 0.1.
        let spec = CentralChargeSpec::new(vec![
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 0.5),
            Complex64::new(0.1, 0.0),
        ]);
        let z = spec.central_charge(&le(&[1, 1, 2])).unwrap();
        assert!((z - Complex64::new(-1.0 + 0.2, 0.5)).norm() < 1e-15);
        assert_eq!(spec.central_charge(&le(&[0, 0, 0])).unwrap(), Complex64::new(0.0, 0.0));
    }

    fn one_charge(z: Complex64, charges: &[(&[i64], i64)]) -> BpsStructure {
        let spectrum = charges.iter().map(|(c, v)| (le(c), rat_int(*v))).collect();
        BpsStructure::new(
            SkewPairing::standard_2d(),
            CentralChargeSpec::new(vec![z, Complex64::new(0.0, 1.0)]),
            spectrum,
        )
        .unwrap()
    }

    #[test]
    fn active_rays_examples() {
        let empty = one_charge(Complex64::new(1.0, 1.0), &[]);
        assert!(empty.active_rays(10).unwrap().is_empty());

        let single = one_charge(Complex64::new(1.0, 1.0), &[(&[1, 0], 1)]);
        let rays = single.active_rays(10).unwrap();
        assert_eq!(rays.len(), 1);
        assert!(rays[0].contains(Complex64::new(1.0, 1.0)));

        let collinear = one_charge(Complex64::new(1.0, 1.0), &[(&[1, 0], 1), (&[2, 0], 3)]);
        assert_eq!(collinear.active_rays(10).unwrap().len(), 1);

        let bad = BpsStructure::new(
            SkewPairing::standard_2d(),
            CentralChargeSpec::new(vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)]),
            [(le(&[1, 0]), rat_int(1))].into_iter().collect(),
        )
        .unwrap();
        assert!(matches!(bad.active_rays(5), Err(Error::ZeroCentralCharge(_))));
    }

    #[test]
    fn flags() {
        let s = one_charge(Complex64::new(1.0, 0.0), &[(&[1, 0], 1), (&[-1, 0], 1)]);
        assert_eq!(s.flags(), StructureFlags { integral: true, symmetric: true, uncoupled: true });
        let coupled = one_charge(Complex64::new(1.0, 0.0), &[(&[1, 0], 1), (&[0, 1], 1)]);
        assert!(!coupled.flags().uncoupled);
        assert!(!coupled.flags().symmetric);
        let frac = BpsStructure::new(
            SkewPairing::standard_2d(),
            CentralChargeSpec::new(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]),
            [(le(&[1, 0]), rat(1, 4))].into_iter().collect(),
        )
        .unwrap();
        assert!(!frac.flags().integral);
    }

    #[test]
    fn json_round_trip() {
        let doc = r#"{"rank":2,"pairing":[[0,1],[-1,0]],"charges":[["1.0","0.5"],["0","1"]],
                     "spectrum":[[[1,0],"1"],[[2,0],"1/4"]]}"#;
        let d: BpsStructureDoc = serde_json::from_str(doc).unwrap();
        let s = d.into_structure().unwrap();
        assert_eq!(s.omega(&le(&[2, 0])), rat(1, 4));
        let back = BpsStructureDoc::from_structure(&s).into_structure().unwrap();
        assert_eq!(back.spectrum(), s.spectrum());

        let bad = r#"{"rank":2,"pairing":[[0,1],[-1,0]],"charges":[["1.0","0.5"],["0","1"]],
                     "spectrum":[[[1,0],"1/x"]]}"#;
        let d: BpsStructureDoc = serde_json::from_str(bad).unwrap();
        assert!(matches!(d.into_structure(), Err(Error::Invalid(msg)) if msg.contains("spectrum[0]")));
    }

    fn skew_matrix(n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
        proptest::collection::vec(-3i64..=3, n * n).prop_map(move |v| {
            let mut m = vec![vec![0; n]; n];
            for i in 0..n {
                for j in (i + 1)..n {
                    m[i][j] = v[i * n + j];
                    m[j][i] = -v[i * n + j];
                }
            }
            m
        })
    }

    proptest! {
        #[test]
        fn pairing_bilinear_antisymmetric(
            m in skew_matrix(3),
            a in proptest::collection::vec(-5i64..=5, 3),
            b in proptest::collection::vec(-5i64..=5, 3),
            c in proptest::collection::vec(-5i64..=5, 3),
            k in -4i64..=4,
        ) {
            let p = SkewPairing::new(m).unwrap();
            let (a, b, c) = (le(&a), le(&b), le(&c));
            prop_assert_eq!(p.pair_unchecked(&a, &b), -p.pair_unchecked(&b, &a));
            prop_assert_eq!(p.pair_unchecked(&a, &a), 0);
            prop_assert_eq!(
                p.pair_unchecked(&(&a + &c), &b),
                p.pair_unchecked(&a, &b) + p.pair_unchecked(&c, &b)
            );
            prop_assert_eq!(p.pair_unchecked(&a.scale(k), &b), k * p.pair_unchecked(&a, &b));
        }

        #[test]
        fn norm_is_a_norm(
            a in proptest::collection::vec(-50i64..=50, 4),
            b in proptest::collection::vec(-50i64..=50, 4),
            k in -6i64..=6,
        ) {
            let (a, b) = (le(&a), le(&b));
            prop_assert!((&a + &b).norm() <= a.norm() + b.norm());
            prop_assert_eq!(a.scale(k).norm(), k.unsigned_abs() as u32 * a.norm());
            prop_assert_eq!(a.norm() == 0, a.is_zero());
        }

        #[test]
        fn central_charge_additive(
            a in proptest::collection::vec(-9i64..=9, 3),
            b in proptest::collection::vec(-9i64..=9, 3),
        ) {
            let spec = CentralChargeSpec::new(vec![
                Complex64::new(0.3, -1.0), Complex64::new(2.0, 0.7), Complex64::new(-0.4, 0.1),
            ]);
            let (a, b) = (le(&a), le(&b));
            let lhs = spec.central_charge(&(&a + &b)).unwrap();
            let rhs = spec.central_charge(&a).unwrap() + spec.central_charge(&b).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }
    }
}
