//! Gopakumar-Vafa, sheaf-theoretic and BPS invariants of curve classes, and
//! the Maulik-Toda BPS structure they define.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coeff::{binomial, rat_int};
use crate::error::{Error, Result};
use crate::lattice::{BpsSpectrumTable, BpsStructure, CentralChargeSpec, LatticeElement, SkewPairing};

/// Genus-indexed GV invariants `n_{g,beta}` of one curve class.
pub type GenusSeries = BTreeMap<u32, i64>;

/// GV invariants for finitely many curve classes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GvTable {
    pub classes: BTreeMap<Vec<i64>, GenusSeries>,
}

#[derive(Serialize, Deserialize)]
struct GvEntry {
    class: Vec<i64>,
    degrees: BTreeMap<u32, i64>,
}

impl GvTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(class: Vec<i64>, degrees: &[(u32, i64)]) -> Self {
        let mut t = Self::new();
        for &(g, n) in degrees {
            t.set(class.clone(), g, n);
        }
        t
    }

    pub fn set(&mut self, class: Vec<i64>, genus: u32, value: i64) {
        let entry = self.classes.entry(class.clone()).or_default();
        if value == 0 {
            entry.remove(&genus);
        } else {
            entry.insert(genus, value);
        }
        if entry.is_empty() {
            self.classes.remove(&class);
        }
    }

    pub fn genus_series(&self, class: &[i64]) -> GenusSeries {
        self.classes.get(class).cloned().unwrap_or_default()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Parses `[{"class": [..], "degrees": {"g": n_g}}]`.
    pub fn from_json(text: &str) -> Result<Self> {
        let entries: Vec<GvEntry> =
            serde_json::from_str(text).map_err(|e| Error::Invalid(format!("GV table: {e}")))?;
        let mut t = Self::new();
        for (i, e) in entries.into_iter().enumerate() {
            if e.class.is_empty() {
                return Err(Error::Invalid(format!("GV table entry {i}: empty class")));
            }
            for (g, n) in e.degrees {
                t.set(e.class.clone(), g, n);
            }
        }
        Ok(t)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<GvEntry> = self
            .classes
            .iter()
            .map(|(c, d)| GvEntry { class: c.clone(), degrees: d.clone() })
            .collect();
        serde_json::to_value(entries).expect("GV table serializes")
    }
}

/// `n -> S_n(beta)` for one class.
pub type SheafTable = BTreeMap<i64, i64>;
/// `n -> Omega_n(beta)` for one class.
pub type OmegaTable = BTreeMap<i64, i64>;

fn prune(mut t: BTreeMap<i64, i64>) -> BTreeMap<i64, i64> {
    t.retain(|_, v| *v != 0);
    t
}

/// `S_n = sum_g n_g C(2g, g+n)`.
pub fn sheaf_from_gv(gv: &GvTable, class: &[i64]) -> SheafTable {
    let mut out = SheafTable::new();
    for (&g, &ng) in &gv.genus_series(class) {
        let g = g as i64;
        for n in -g..=g {
            *out.entry(n).or_insert(0) += ng * binomial(2 * g, g + n);
        }
    }
    prune(out)
}

/// Inverse of [`sheaf_from_gv`] by back-substitution from the top degree.
pub fn gv_from_sheaf(sheaf: &SheafTable) -> Result<GenusSeries> {
    if let Some(n) = first_asymmetry(sheaf) {
        return Err(Error::AsymmetricTable { n });
    }
    let mut residual = prune(sheaf.clone());
    let mut out = GenusSeries::new();
    while let Some((&top, &value)) = residual.iter().next_back() {
        if top < 0 {
            // symmetric input leaves nothing below zero once the top is cleared
            return Err(Error::AsymmetricTable { n: top });
        }
        let g = top;
        out.insert(g as u32, value);
        for n in -g..=g {
            *residual.entry(n).or_insert(0) -= value * binomial(2 * g, g + n);
        }
        residual = prune(residual);
    }
    Ok(out)
}

/// `Omega_n = (-1)^n S_n`.
pub fn omega_from_sheaf(sheaf: &SheafTable) -> OmegaTable {
    prune(sheaf.iter().map(|(&n, &s)| (n, if n.rem_euclid(2) == 0 { s } else { -s })).collect())
}

/// `S_n = (-1)^n Omega_n`, inverse of [`omega_from_sheaf`].
pub fn sheaf_from_omega(omega: &OmegaTable) -> SheafTable {
    omega_from_sheaf(omega)
}

/// `Omega_n = sum_g n_g (-1)^n C(2g, g+n)`, computed directly.
pub fn omega_from_gv(gv: &GvTable, class: &[i64]) -> OmegaTable {
    let mut out = OmegaTable::new();
    for (&g, &ng) in &gv.genus_series(class) {
        let g = g as i64;
        for n in -g..=g {
            let sign = if n.rem_euclid(2) == 0 { 1 } else { -1 };
            *out.entry(n).or_insert(0) += sign * ng * binomial(2 * g, g + n);
        }
    }
    prune(out)
}

/// Smallest positive `n` with `T_n != T_{-n}`, or `None` if symmetric.
pub fn first_asymmetry(t: &BTreeMap<i64, i64>) -> Option<i64> {
    let mut bad: Vec<i64> = t
        .iter()
        .filter(|(&n, &v)| t.get(&-n).copied().unwrap_or(0) != v)
        .map(|(&n, _)| n.abs())
        .collect();
    bad.sort_unstable();
    bad.first().copied()
}

pub fn check_omega_symmetry(omega: &OmegaTable) -> bool {
    first_asymmetry(omega).is_none()
}

/// Input geometry: Kahler degrees and intersection numbers on `H_2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MtGeometry {
    pub b2: usize,
    /// `omega . e_i` for the curve basis `e_i`.
    pub kahler: Vec<f64>,
    pub epsilon: f64,
    /// Row `j` lists `D_j . e_i` for the divisor basis `D_j`; identity if omitted.
    #[serde(default)]
    pub intersections: Option<Vec<Vec<i64>>>,
    /// The distinguished divisor class in the `D_j` basis; `D_1` if omitted.
    #[serde(default)]
    pub divisor: Option<Vec<i64>>,
    /// Generators of the effective cone; the coordinate orthant if omitted.
    #[serde(default)]
    pub cone: Option<Vec<Vec<i64>>>,
}

impl MtGeometry {
    pub fn new(kahler: Vec<f64>, epsilon: f64) -> Self {
        Self { b2: kahler.len(), kahler, epsilon, intersections: None, divisor: None, cone: None }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: Self = serde_json::from_str(text).map_err(|e| Error::Invalid(format!("geometry: {e}")))?;
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let check_len = |what: &str, got: usize| {
            if got != self.b2 {
                Err(Error::Invalid(format!("geometry.{what}: expected length {}, got {got}", self.b2)))
            } else {
                Ok(())
            }
        };
        if self.b2 == 0 {
            return Err(Error::Invalid("geometry.b2: must be positive".into()));
        }
        check_len("kahler", self.kahler.len())?;
        if !self.epsilon.is_finite() {
            return Err(Error::Invalid("geometry.epsilon: must be finite".into()));
        }
        if let Some(m) = &self.intersections {
            check_len("intersections", m.len())?;
            for row in m {
                check_len("intersections[row]", row.len())?;
            }
        }
        if let Some(d) = &self.divisor {
            check_len("divisor", d.len())?;
        }
        for g in self.cone_generators() {
            check_len("cone[generator]", g.len())?;
            let deg = self.degree_unchecked(&g);
            if !(deg > 0.0) {
                return Err(Error::NonPositiveDegree(deg));
            }
        }
        Ok(())
    }

    pub fn cone_generators(&self) -> Vec<Vec<i64>> {
        self.cone.clone().unwrap_or_else(|| {
            (0..self.b2).map(|i| (0..self.b2).map(|j| i64::from(i == j)).collect()).collect()
        })
    }

    fn degree_unchecked(&self, class: &[i64]) -> f64 {
        class.iter().zip(&self.kahler).map(|(&c, &w)| c as f64 * w).sum()
    }

    /// `omega . beta`.
    pub fn degree(&self, class: &[i64]) -> Result<f64> {
        if class.len() != self.b2 {
            return Err(Error::RankMismatch { expected: self.b2, got: class.len() });
        }
        Ok(self.degree_unchecked(class))
    }

    /// Whether `class` is a nonzero nonnegative integer combination of the cone generators.
    pub fn is_effective(&self, class: &[i64]) -> bool {
        if class.len() != self.b2 || class.iter().all(|&c| c == 0) {
            return false;
        }
        let gens = self.cone_generators();
        fn search(rest: &[i64], gens: &[Vec<i64>], from: usize, geom: &MtGeometry) -> bool {
            if rest.iter().all(|&c| c == 0) {
                return true;
            }
            if geom.degree_unchecked(rest) <= 0.0 {
                return false;
            }
            (from..gens.len()).any(|i| {
                let next: Vec<i64> = rest.iter().zip(&gens[i]).map(|(a, b)| a - b).collect();
                search(&next, gens, i, geom)
            })
        }
        search(class, &gens, 0, self)
    }

    /// `<D, beta>` for the distinguished divisor.
    pub fn divisor_pairing(&self, class: &[i64]) -> i64 {
        let d = self.divisor_vector();
        (0..self.b2)
            .map(|j| d[j] * (0..self.b2).map(|i| self.intersection(j, i) * class[i]).sum::<i64>())
            .sum()
    }

    fn divisor_vector(&self) -> Vec<i64> {
        self.divisor.clone().unwrap_or_else(|| (0..self.b2).map(|j| i64::from(j == 0)).collect())
    }

    fn intersection(&self, j: usize, i: usize) -> i64 {
        match &self.intersections {
            Some(m) => m[j][i],
            None => i64::from(i == j),
        }
    }
}

/// Coordinates of `Gamma = H_0 + H_2 + H_4 + H_6 + E`, in that order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MtLayout {
    pub b2: usize,
}

impl MtLayout {
    pub fn rank(&self) -> usize {
        2 * self.b2 + 3
    }

    /// The charge `(m, beta, n)`.
    pub fn charge(&self, m: i64, class: &[i64], n: i64) -> LatticeElement {
        let mut v = vec![0; self.rank()];
        v[0] = m;
        v[1..=self.b2].copy_from_slice(class);
        v[self.rank() - 1] = n;
        LatticeElement(v)
    }

    /// The H_4 element with coordinates `d` in the divisor basis.
    pub fn divisor(&self, d: &[i64]) -> LatticeElement {
        let mut v = vec![0; self.rank()];
        v[1 + self.b2..1 + 2 * self.b2].copy_from_slice(d);
        LatticeElement(v)
    }

    /// Splits a charge into `(m, beta, n)`, ignoring H_4 and H_6.
    pub fn split(&self, a: &LatticeElement) -> (i64, Vec<i64>, i64) {
        (a.0[0], a.0[1..=self.b2].to_vec(), a.0[self.rank() - 1])
    }
}

/// The Maulik-Toda structure and the coordinates it lives in.
#[derive(Clone, Debug)]
pub struct MtBps {
    pub structure: BpsStructure,
    pub layout: MtLayout,
    pub geometry: MtGeometry,
    pub m_window: i64,
}

impl MtBps {
    /// The lattice element of the distinguished divisor `[D]`.
    pub fn divisor_charge(&self) -> LatticeElement {
        self.layout.divisor(&self.geometry.divisor_vector())
    }
}

pub fn mt_pairing(geom: &MtGeometry) -> SkewPairing {
    let layout = MtLayout { b2: geom.b2 };
    let r = layout.rank();
    let mut m = vec![vec![0i64; r]; r];
    for j in 0..geom.b2 {
        for i in 0..geom.b2 {
            let v = geom.intersection(j, i);
            m[1 + geom.b2 + j][1 + i] = v;
            m[1 + i][1 + geom.b2 + j] = -v;
        }
    }
    SkewPairing::new(m).expect("block form is skew")
}

pub fn mt_central_charge(geom: &MtGeometry) -> CentralChargeSpec {
    let layout = MtLayout { b2: geom.b2 };
    let mut z = vec![Complex64::new(0.0, 0.0); layout.rank()];
    z[0] = Complex64::new(-1.0, 0.0);
    for i in 0..geom.b2 {
        z[1 + i] = Complex64::new(0.0, geom.kahler[i]);
    }
    z[layout.rank() - 1] = Complex64::new(geom.epsilon, 0.0);
    CentralChargeSpec::new(z)
}

/// Builds the structure with `Omega(m, beta, n) = Omega_n(beta)` for `|m| <= m_window`
/// and effective `beta`, extended by `Omega(-gamma) = Omega(gamma)`.
pub fn build_mt_bps(geom: &MtGeometry, gv: &GvTable, m_window: i64) -> Result<MtBps> {
    geom.validate()?;
    let layout = MtLayout { b2: geom.b2 };
    let mut spectrum = BpsSpectrumTable::new();
    for class in gv.classes.keys() {
        if class.len() != geom.b2 {
            return Err(Error::RankMismatch { expected: geom.b2, got: class.len() });
        }
        let deg = geom.degree(class)?;
        if !(deg > 0.0) {
            return Err(Error::NonPositiveDegree(deg));
        }
        if !geom.is_effective(class) {
            return Err(Error::NotEffective(format!("{class:?}")));
        }
        let neg: Vec<i64> = class.iter().map(|c| -c).collect();
        for (n, omega) in omega_from_gv(gv, class) {
            for m in -m_window..=m_window {
                spectrum.insert(layout.charge(m, class, n), rat_int(omega));
                spectrum.insert(layout.charge(-m, &neg, -n), rat_int(omega));
            }
        }
    }
    let structure = BpsStructure::new(mt_pairing(geom), mt_central_charge(geom), spectrum)?;
    Ok(MtBps { structure, layout, geometry: geom.clone(), m_window })
}
