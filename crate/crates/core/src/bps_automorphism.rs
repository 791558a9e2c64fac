//! The wall-crossing automorphism `S_l` of a ray, its DT logarithm, and a
//! Poisson-automorphism checker.

use std::collections::BTreeMap;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coeff::{rat_int, rat_to_string, Coefficient, PiPoly, Rational};
use crate::error::{Error, Result};
use crate::lattice::{BpsStructure, LatticeElement, Ray};
use crate::twisted_series::{Derivation, ExactSeries, Monomial, TwistedAlgebra, TwistedSeries};

/// A map on `C[Gamma][[s]]`, given by its values on monomials and extended
/// `C[[s]]`-linearly.
pub trait SeriesMap<C: Coefficient> {
    fn image(&self, charge: &LatticeElement) -> Result<TwistedSeries<C>>;

    fn apply(&self, f: &TwistedSeries<C>) -> Result<TwistedSeries<C>> {
        let mut out = TwistedSeries::zero(f.rank(), f.order());
        for (m, c) in f.terms() {
            let img = self.image(&m.charge)?;
            for (n, d) in img.terms() {
                out.add_term(Monomial::new(n.charge.clone(), n.s_power + m.s_power), d.clone() * c.clone());
            }
        }
        Ok(out)
    }
}

/// `S_l(x_a) = x_a prod_{Z(b) in l} (1 - s^{||b||} x_b)^{Omega(b) <a,b>}`.
#[derive(Clone, Debug)]
pub struct BpsAutomorphism {
    algebra: TwistedAlgebra,
    ray: Ray,
    order: u32,
    /// Support charges on the ray in canonical order (norm, then lexicographic).
    factors: Vec<(LatticeElement, Rational)>,
}

impl BpsAutomorphism {
    pub fn new(bps: &BpsStructure, ray: Ray, order: u32) -> Result<Self> {
        bps.require_uncoupled()?;
        let factors = bps.charges_on_ray(&ray, order);
        Ok(Self { algebra: TwistedAlgebra::new(bps.pairing().clone()), ray, order, factors })
    }

    pub fn ray(&self) -> Ray {
        self.ray
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn algebra(&self) -> &TwistedAlgebra {
        &self.algebra
    }

    pub fn factors(&self) -> &[(LatticeElement, Rational)] {
        &self.factors
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    /// `S_l` for `-Omega`, the inverse automorphism.
    pub fn inverse(&self) -> Self {
        Self {
            factors: self.factors.iter().map(|(b, v)| (b.clone(), -v.clone())).collect(),
            ..self.clone()
        }
    }

    /// The multiplier `prod (1 - s^{||b||} x_b)^{Omega(b)<a,b>}` for a charge `a`.
    pub fn multiplier(&self, a: &LatticeElement) -> Result<ExactSeries> {
        let rank = self.algebra.rank();
        let mut acc = ExactSeries::one(rank, self.order);
        for (b, omega) in &self.factors {
            let e = omega * rat_int(self.algebra.pairing().pair(a, b)?);
            if e.is_zero() || b.norm() > self.order {
                continue;
            }
            let y = ExactSeries::monomial(b.clone(), b.norm(), PiPoly::int(-1), self.order);
            let factor = self.algebra.binomial_pow(&y, &e)?;
            acc = self.algebra.mul(&acc, &factor)?;
        }
        Ok(acc)
    }
}

impl SeriesMap<PiPoly> for BpsAutomorphism {
    fn image(&self, a: &LatticeElement) -> Result<ExactSeries> {
        let xa = ExactSeries::monomial(a.clone(), 0, PiPoly::one(), self.order);
        self.algebra.mul(&xa, &self.multiplier(a)?)
    }
}

/// DT numbers on a ray, plus charges the automorphism cannot see.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DtTable {
    pub entries: BTreeMap<LatticeElement, Rational>,
    /// Charges on the ray lying in the radical of the pairing; `ad(x_a) = 0`
    /// there so no value is determined.
    pub radical: Vec<LatticeElement>,
}

impl DtTable {
    pub fn get(&self, a: &LatticeElement) -> Rational {
        self.entries.get(a).cloned().unwrap_or_else(Rational::zero)
    }

    /// The inner derivation `ad(sum dt(a) s^{||a||} x_a)`.
    pub fn generator(&self, rank: usize, order: u32) -> ExactSeries {
        let mut g = ExactSeries::zero(rank, order);
        for (a, v) in &self.entries {
            g.add_term(Monomial::new(a.clone(), a.norm()), PiPoly::rational(v.clone()));
        }
        g
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Row {
            charge: Vec<i64>,
            dt: String,
        }
        let rows: Vec<Row> = self
            .entries
            .iter()
            .map(|(a, v)| Row { charge: a.0.clone(), dt: rat_to_string(v) })
            .collect();
        serde_json::json!({ "dt": rows, "radical": self.radical.iter().map(|a| a.0.clone()).collect::<Vec<_>>() })
    }
}

/// DT numbers by matching `exp(ad g)` against `S_l` one power of `s` at a time.
pub fn dt_invariants(bps: &BpsStructure, ray: Ray, order: u32) -> Result<DtTable> {
    let s = BpsAutomorphism::new(bps, ray, order)?;
    let rank = bps.rank();
    let algebra = s.algebra().clone();
    let probes: Vec<LatticeElement> = (0..rank).map(|i| LatticeElement::basis(rank, i)).collect();
    let targets: Vec<ExactSeries> = probes.iter().map(|p| s.image(p)).collect::<Result<_>>()?;

    let mut table = DtTable::default();
    for p in 1..=order {
        let g = table.generator(rank, order);
        let d = Derivation::Inner(g);
        let mut found: BTreeMap<LatticeElement, Rational> = BTreeMap::new();
        for (probe, target) in probes.iter().zip(&targets) {
            let xp = ExactSeries::monomial(probe.clone(), 0, PiPoly::one(), order);
            let residual = target.sub(&algebra.apply_exp_ad(&d, &xp)?)?;
            for (m, c) in residual.terms() {
                if m.s_power < p {
                    return Err(Error::DtMatchFailure {
                        order: m.s_power,
                        detail: format!("residual {} at {}", c, m),
                    });
                }
                if m.s_power > p {
                    continue;
                }
                let gamma = &m.charge - probe;
                if gamma.norm() != p {
                    return Err(Error::DtMatchFailure {
                        order: p,
                        detail: format!("residual at {} not explained by a charge of norm {p}", m),
                    });
                }
                // residual coefficient = dt * <gamma, probe> * (-1)^<gamma, probe>
                let pairing = algebra.pairing().pair_unchecked(&gamma, probe);
                if pairing == 0 {
                    continue;
                }
                let sign = if pairing.rem_euclid(2) == 0 { 1 } else { -1 };
                let value = c.as_gaussian().filter(|g| g.im.is_zero()).ok_or_else(|| {
                    Error::DtMatchFailure { order: p, detail: format!("non-rational residual {c}") }
                })?;
                let dt = value.re / rat_int(sign * pairing);
                if let Some(prev) = found.get(&gamma) {
                    if *prev != dt {
                        return Err(Error::DtMatchFailure {
                            order: p,
                            detail: format!("probes disagree at {gamma}: {prev} vs {dt}"),
                        });
                    }
                } else {
                    found.insert(gamma, dt);
                }
            }
        }
        for (gamma, dt) in found {
            if !dt.is_zero() {
                table.entries.insert(gamma, dt);
            }
        }
    }
    // final consistency: exp(ad g) reproduces S_l on every probe
    let d = Derivation::Inner(table.generator(rank, order));
    for (probe, target) in probes.iter().zip(&targets) {
        let xp = ExactSeries::monomial(probe.clone(), 0, PiPoly::one(), order);
        if algebra.apply_exp_ad(&d, &xp)? != *target {
            return Err(Error::DtMatchFailure { order, detail: format!("probe {probe} mismatch") });
        }
    }
    table.radical = radical_charges_on_ray(bps, &ray, order, &algebra);
    Ok(table)
}

fn radical_charges_on_ray(bps: &BpsStructure, ray: &Ray, order: u32, algebra: &TwistedAlgebra) -> Vec<LatticeElement> {
    let rank = bps.rank();
    bps.charges_on_ray(ray, order)
        .into_iter()
        .map(|(a, _)| a)
        .filter(|a| (0..rank).all(|i| algebra.pairing().pair_unchecked(a, &LatticeElement::basis(rank, i)) == 0))
        .collect()
}

/// `dt(a) = sum_{a = k b} Omega(b) / k^2` over charges on the ray.
pub fn dt_closed_form(bps: &BpsStructure, ray: Ray, order: u32) -> DtTable {
    let algebra = TwistedAlgebra::new(bps.pairing().clone());
    let radical = radical_charges_on_ray(bps, &ray, order, &algebra);
    let mut entries: BTreeMap<LatticeElement, Rational> = BTreeMap::new();
    for (b, omega) in bps.charges_on_ray(&ray, order) {
        if radical.contains(&b) {
            continue;
        }
        let n = b.norm().max(1);
        for k in 1..=(order / n) as i64 {
            let e = entries.entry(b.scale(k)).or_insert_with(Rational::zero);
            *e += omega.clone() / rat_int(k * k);
        }
    }
    entries.retain(|_, v| !v.is_zero());
    DtTable { entries, radical }
}

/// First failure of multiplicativity or bracket preservation.
#[derive(Clone, Debug, PartialEq)]
pub struct PoissonViolation {
    pub kind: &'static str,
    pub left: LatticeElement,
    pub right: LatticeElement,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoissonReport {
    pub checked: usize,
    pub violation: Option<PoissonViolation>,
}

impl PoissonReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Sampling parameters for [`verify_poisson_automorphism`].
#[derive(Clone, Copy, Debug)]
pub struct PoissonCheck {
    pub samples: usize,
    pub seed: u64,
    pub coord_bound: i64,
}

impl Default for PoissonCheck {
    fn default() -> Self {
        Self { samples: 32, seed: 7, coord_bound: 2 }
    }
}

/// Checks `phi(fg) = phi(f) phi(g)` and `phi([f,g]) = [phi f, phi g]` mod `s^{N+1}` on
/// random monomial pairs.
pub fn verify_poisson_automorphism<M: SeriesMap<PiPoly>>(
    phi: &M,
    algebra: &TwistedAlgebra,
    order: u32,
    check: PoissonCheck,
) -> Result<PoissonReport> {
    let rank = algebra.rank();
    let mut rng = ChaCha8Rng::seed_from_u64(check.seed);
    let sample = |rng: &mut ChaCha8Rng| {
        let c: Vec<i64> = (0..rank).map(|_| rng.gen_range(-check.coord_bound..=check.coord_bound)).collect();
        let s = rng.gen_range(0..=order);
        let v = rng.gen_range(1..=3i64) * if rng.gen_bool(0.5) { 1 } else { -1 };
        (LatticeElement(c), s, v)
    };
    for i in 0..check.samples {
        let (a, sa, va) = sample(&mut rng);
        let (b, sb, vb) = sample(&mut rng);
        let f = ExactSeries::monomial(a.clone(), sa, PiPoly::int(va), order);
        let g = ExactSeries::monomial(b.clone(), sb, PiPoly::int(vb), order);
        let (pf, pg) = (phi.apply(&f)?, phi.apply(&g)?);

        let lhs = phi.apply(&algebra.mul(&f, &g)?)?;
        let rhs = algebra.mul(&pf, &pg)?;
        if lhs != rhs {
            return Ok(PoissonReport {
                checked: i,
                violation: Some(PoissonViolation {
                    kind: "product",
                    left: a,
                    right: b,
                    detail: format!("phi(fg) - phi(f)phi(g) =\n{}", lhs.sub(&rhs)?),
                }),
            });
        }
        let lhs = phi.apply(&algebra.bracket(&f, &g)?)?;
        let rhs = algebra.bracket(&pf, &pg)?;
        if lhs != rhs {
            return Ok(PoissonReport {
                checked: i,
                violation: Some(PoissonViolation {
                    kind: "bracket",
                    left: a,
                    right: b,
                    detail: format!("phi([f,g]) - [phi f, phi g] =\n{}", lhs.sub(&rhs)?),
                }),
            });
        }
    }
    Ok(PoissonReport { checked: check.samples, violation: None })
}

/// The identity map, for checks and composition.
pub struct IdentityMap {
    pub order: u32,
}

impl SeriesMap<PiPoly> for IdentityMap {
    fn image(&self, a: &LatticeElement) -> Result<ExactSeries> {
        Ok(ExactSeries::monomial(a.clone(), 0, PiPoly::one(), self.order))
    }
}

/// `x_a -> c x_a`; multiplicative only for `c` in `{0, 1}`.
pub struct ScalingMap {
    pub order: u32,
    pub factor: i64,
}

impl SeriesMap<PiPoly> for ScalingMap {
    fn image(&self, a: &LatticeElement) -> Result<ExactSeries> {
        Ok(ExactSeries::monomial(a.clone(), 0, PiPoly::int(self.factor), self.order))
    }
}
