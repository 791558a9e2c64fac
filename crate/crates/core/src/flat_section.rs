//! Cauchy-type ray integrals `F_a(t)`, the canonical flat section built from
//! them, and numerical checks of its jump and small-`t` behaviour.
//!
//! Each ray integral is evaluated in the logarithmic variable `z = Z e^tau`,
//! where the integrand is smooth, decays doubly exponentially as `tau -> -inf`
//! and like `e^{-tau}` as `tau -> +inf`. The far right tail is added in closed
//! form.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::bps_automorphism::{BpsAutomorphism, SeriesMap};
use crate::error::{Error, Result};
use crate::lattice::{BpsStructure, LatticeElement, Ray};
use crate::maulik_toda::{MtLayout, OmegaTable};
use crate::quadrature;
use crate::twisted_series::{Monomial, NumericSeries, TwistedAlgebra};

/// Which exponential prefactor multiplies `x_a` in the flat section.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum ExponentialFactor {
    /// `x_a e^{Z(a)/t} exp(...)`.
    Plus,
    /// `x_a e^{-Z(a)/t} exp(...)`; the jump across an active ray is then `S_l`.
    #[default]
    Minus,
}

impl ExponentialFactor {
    pub fn factor(self, z: Complex64, t: Complex64) -> Complex64 {
        match self {
            Self::Plus => (z / t).exp(),
            Self::Minus => (-z / t).exp(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadratureConfig {
    pub abs_tolerance: f64,
    pub max_subdivisions: usize,
    /// Truncation order in `s`.
    pub s_order: u32,
    /// Largest power `k` kept in the expansion of the logarithm.
    pub k_max: u32,
    /// Smallest admissible angle between `t` and an integration ray.
    pub min_angle: f64,
    pub exponential: ExponentialFactor,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tolerance: 1e-13,
            max_subdivisions: 4000,
            s_order: 3,
            k_max: 20,
            min_angle: 1e-3,
            exponential: ExponentialFactor::default(),
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tolerance > 0.0) {
            return Err(Error::Invalid(format!("quadrature tolerance must be positive, got {}", self.abs_tolerance)));
        }
        if !(self.min_angle > 0.0) {
            return Err(Error::Invalid("minimum angle must be positive".into()));
        }
        Ok(())
    }
}

/// `I_k(Z, t) = int_{R>0 Z} e^{-kZ/z} / ((z - t) z) dz`.
pub fn cauchy_ray_integral(z: Complex64, k: u32, t: Complex64, cfg: &QuadratureConfig) -> Result<Complex64> {
    if z.norm() == 0.0 {
        return Err(Error::DegenerateRay);
    }
    let kf = k as f64;
    let pole = (t / z).norm().ln();
    let lo = (kf / 40.0).ln().min(pole - 2.0);
    let hi = kf.ln().max(pole) + 24.0;
    let integrand = |tau: f64| {
        let rho = tau.exp();
        Complex64::new((-kf / rho).exp(), 0.0) / (z * rho - t)
    };
    let mut breaks = vec![kf.ln()];
    breaks.extend([pole - 0.5, pole, pole + 0.5]);
    let est = quadrature::integrate(integrand, lo, hi, &breaks, cfg.abs_tolerance, cfg.max_subdivisions)?;
    // beyond `hi`: int_0^W dw / (Z - t w) with W = e^{-hi}, k W^2 corrections negligible
    let w = (-hi).exp();
    let x = t * w / z;
    let tail = (w / z) * (1.0 + x / 2.0 + x * x / 3.0);
    Ok(est.value + tail)
}

fn check_off_ray(z: Complex64, t: Complex64, min_angle: f64, what: &LatticeElement) -> Result<()> {
    let ray = Ray::new(z)?;
    if ray.angular_distance(t) < min_angle || ray.opposite().angular_distance(t) < min_angle {
        return Err(Error::OnIntegrationRay(format!("t = {t} vs Z({what}) = {z}")));
    }
    Ok(())
}

/// Coefficients `c_k` of `(s^{||a||} x_a)^k` in `F_a(t)` for `Omega(a) = 1`:
/// `c_k = -(1/k) (t / 2 pi i) I_k(Z(a), t)`.
pub fn unit_coefficients(z: Complex64, t: Complex64, k_max: u32, cfg: &QuadratureConfig) -> Result<Vec<Complex64>> {
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    (1..=k_max)
        .map(|k| Ok(-(t / two_pi_i) * cauchy_ray_integral(z, k, t, cfg)? / k as f64))
        .collect()
}

fn series_from_coefficients(a: &LatticeElement, coeffs: &[Complex64], omega: f64, order: u32) -> NumericSeries {
    let mut out = NumericSeries::zero(a.rank(), order);
    let n = a.norm();
    for (i, c) in coeffs.iter().enumerate() {
        let k = i as u32 + 1;
        if k * n > order {
            break;
        }
        out.add_term(Monomial::new(a.scale(k as i64), k * n), c * omega);
    }
    out
}

/// `F_a(t) = Omega(a) (t / 2 pi i) int_{R>0 Z(a)} log(1 - s^{||a||} x_a e^{-Z(a)/z}) / (z - t) dz / z`
/// truncated at `cfg.s_order` and `k <= cfg.k_max`.
pub fn eval_f_alpha(bps: &BpsStructure, a: &LatticeElement, t: Complex64, cfg: &QuadratureConfig) -> Result<NumericSeries> {
    cfg.validate()?;
    let order = cfg.s_order;
    let omega = crate::coeff::rat_to_f64(&bps.omega(a));
    if omega == 0.0 {
        return Ok(NumericSeries::zero(bps.rank(), order));
    }
    let z = bps.charge().central_charge(a)?;
    check_off_ray(z, t, cfg.min_angle, a)?;
    let k_max = if a.norm() == 0 { cfg.k_max } else { cfg.k_max.min(order / a.norm()) };
    let coeffs = unit_coefficients(z, t, k_max, cfg)?;
    Ok(series_from_coefficients(a, &coeffs, omega, order))
}

/// `F^+` and `F^-` of a Maulik-Toda charge `(m, beta, n)`.
#[derive(Clone, Debug)]
pub struct PmPair {
    pub plus: NumericSeries,
    pub minus: NumericSeries,
}

/// The two integrals over `+-R>0 Z(m, beta, n)` for real `t > 0`.
#[allow(clippy::too_many_arguments)]
pub fn eval_f_pm(
    layout: MtLayout,
    m: i64,
    class: &[i64],
    n: i64,
    z: Complex64,
    t: f64,
    omega_n: i64,
    cfg: &QuadratureConfig,
) -> Result<PmPair> {
    let gamma = layout.charge(m, class, n);
    let order = cfg.s_order;
    if z.norm() == 0.0 {
        return Err(Error::DegenerateRay);
    }
    if omega_n == 0 {
        let zero = NumericSeries::zero(layout.rank(), order);
        return Ok(PmPair { plus: zero.clone(), minus: zero });
    }
    let tc = Complex64::new(t, 0.0);
    check_off_ray(z, tc, cfg.min_angle, &gamma)?;
    let k_max = cfg.k_max.min(order / gamma.norm().max(1));
    let plus = unit_coefficients(z, tc, k_max, cfg)?;
    let minus = unit_coefficients(-z, tc, k_max, cfg)?;
    let neg = -&gamma;
    Ok(PmPair {
        plus: series_from_coefficients(&gamma, &plus, omega_n as f64, order),
        // F^- = -F_{-gamma} with Omega(-gamma) = Omega_n
        minus: series_from_coefficients(&neg, &minus, -(omega_n as f64), order),
    })
}

/// `sum_{m, n, k} (F^+ + F^-)` at `s = x = 1` over a window, with the analytic
/// correction for `|m| > m_window`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpecializedSum {
    pub window: Complex64,
    pub tail: Complex64,
    pub total: Complex64,
    pub integrals: usize,
}

pub fn specialized_mt_sum(
    t: f64,
    epsilon: f64,
    degree: f64,
    omega: &OmegaTable,
    m_window: i64,
    k_max: u32,
    cfg: &QuadratureConfig,
) -> Result<SpecializedSum> {
    if !(t > 0.0) {
        return Err(Error::Invalid(format!("t must be positive, got {t}")));
    }
    if !(degree > 0.0) {
        return Err(Error::NonPositiveDegree(degree));
    }
    let tc = Complex64::new(t, 0.0);
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let mut window = Complex64::new(0.0, 0.0);
    let mut tail = Complex64::new(0.0, 0.0);
    let mut integrals = 0;
    for (&n, &om) in omega {
        let a = Complex64::new(n as f64 * epsilon, degree);
        for k in 1..=k_max {
            let pre = -(om as f64) / k as f64 * (tc / two_pi_i);
            for m in -m_window..=m_window {
                let z = a - m as f64;
                let diff = cauchy_ray_integral(z, k, tc, cfg)? - cauchy_ray_integral(-z, k, tc, cfg)?;
                window += pre * diff;
                integrals += 2;
            }
            // I_k(Z) - I_k(-Z) ~ sum_{j even} 2 j! t^j / (k Z)^{j+1} for large |Z|
            let kf = k as f64;
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, fact) in [(0, 1.0), (2, 2.0), (4, 24.0)] {
                let p = j + 1;
                acc += 2.0 * fact * t.powi(j as i32) / kf.powi(p as i32) * inverse_power_tail(a, p, m_window);
            }
            tail += pre * acc;
        }
    }
    Ok(SpecializedSum { window, tail, total: window + tail, integrals })
}

/// `sum_{|m| > M} (a - m)^{-p}`, by direct summation and an integral remainder.
fn inverse_power_tail(a: Complex64, p: u32, m_window: i64) -> Complex64 {
    const DIRECT: i64 = 4000;
    let mut acc = Complex64::new(0.0, 0.0);
    for m in (m_window + 1..=m_window + DIRECT).rev() {
        let mf = m as f64;
        acc += (a - mf).powi(-(p as i32)) + (a + mf).powi(-(p as i32));
    }
    let x = (m_window + DIRECT) as f64 + 0.5;
    let rest = if p == 1 {
        -((x + a) / (x - a)).ln()
    } else {
        let q = 1 - p as i32;
        ((a + x).powi(q) - (a - x).powi(q)) / (p as f64 - 1.0)
    };
    acc + rest
}

/// The flat section along the ray of `t`, cached per evaluation point.
#[derive(Clone, Debug)]
pub struct FlatSection {
    t: Complex64,
    algebra: TwistedAlgebra,
    cfg: QuadratureConfig,
    charges: Vec<(LatticeElement, Complex64)>,
    exponents: Vec<NumericSeries>,
}

impl FlatSection {
    /// Evaluates every `F_b(t)` with `||b|| <= cfg.s_order`. Fails when `t` lies on
    /// an active ray or on `R<0`.
    pub fn at(bps: &BpsStructure, t: Complex64, cfg: &QuadratureConfig) -> Result<Self> {
        cfg.validate()?;
        if t.norm() == 0.0 {
            return Err(Error::DegenerateRay);
        }
        let negative_axis = Ray::from_angle(PI);
        if negative_axis.angular_distance(t) < cfg.min_angle {
            return Err(Error::RayCollision(format!("t = {t} lies on R<0")));
        }
        let mut charges = Vec::new();
        let mut exponents = Vec::new();
        for (b, _) in bps.spectrum().iter() {
            if b.norm() > cfg.s_order {
                continue;
            }
            let z = bps.charge().central_charge(b)?;
            if z.norm() == 0.0 {
                return Err(Error::ZeroCentralCharge(b.to_string()));
            }
            if Ray::new(z)?.angular_distance(t) < cfg.min_angle {
                return Err(Error::RayCollision(format!("t = {t} lies on the ray of Z({b}) = {z}")));
            }
            let f = eval_f_alpha(bps, b, t, cfg)?;
            charges.push((b.clone(), z));
            exponents.push(f);
        }
        Ok(Self { t, algebra: TwistedAlgebra::new(bps.pairing().clone()), cfg: *cfg, charges, exponents })
    }

    pub fn t(&self) -> Complex64 {
        self.t
    }

    /// `exp(sum_b <a, b> F_b(t))`.
    pub fn dressing(&self, a: &LatticeElement) -> Result<NumericSeries> {
        let mut exponent = NumericSeries::zero(self.algebra.rank(), self.cfg.s_order);
        for ((b, _), f) in self.charges.iter().zip(&self.exponents) {
            let p = self.algebra.pairing().pair(a, b)?;
            if p != 0 {
                exponent = exponent.add(&f.scale(&Complex64::new(p as f64, 0.0)))?;
            }
        }
        self.algebra.exp(&exponent)
    }

    /// `x_a exp(sum_b <a, b> F_b(t))`, without the exponential prefactor.
    pub fn stripped_image(&self, a: &LatticeElement) -> Result<NumericSeries> {
        let xa = NumericSeries::monomial(a.clone(), 0, Complex64::new(1.0, 0.0), self.cfg.s_order);
        self.algebra.mul(&xa, &self.dressing(a)?)
    }

    /// The prefactor `e^{+-Z(a)/t}` times [`Self::stripped_image`].
    pub fn image(&self, bps: &BpsStructure, a: &LatticeElement) -> Result<NumericSeries> {
        let z = bps.charge().central_charge(a)?;
        Ok(self.stripped_image(a)?.scale(&self.cfg.exponential.factor(z, self.t)))
    }

    /// Linear extension to a series: `s^p x_g -> s^p X(x_g)`.
    pub fn apply(&self, bps: &BpsStructure, f: &NumericSeries) -> Result<NumericSeries> {
        let mut out = NumericSeries::zero(f.rank(), f.order());
        for (m, c) in f.terms() {
            for (n, d) in self.image(bps, &m.charge)?.terms() {
                out.add_term(Monomial::new(n.charge.clone(), n.s_power + m.s_power), c * d);
            }
        }
        Ok(out)
    }
}

/// `X_r(t)` at one point.
#[derive(Clone, Debug)]
pub struct FlatSectionSample {
    pub t: Complex64,
    pub value: NumericSeries,
}

pub fn eval_flat_section(
    bps: &BpsStructure,
    r: Ray,
    t: Complex64,
    target: &LatticeElement,
    cfg: &QuadratureConfig,
) -> Result<FlatSectionSample> {
    if r.angular_distance(t) > 1e-9 {
        return Err(Error::Invalid(format!("t = {t} is not on the ray {r}")));
    }
    let section = FlatSection::at(bps, t, cfg)?;
    Ok(FlatSectionSample { t, value: section.image(bps, target)? })
}

/// Evaluation of `X^+ - S_l o X^-` on either side of an active ray.
#[derive(Clone, Debug, Serialize)]
pub struct JumpReport {
    pub ray_angle: f64,
    pub t_abs: f64,
    pub target: Vec<i64>,
    pub offsets: Vec<f64>,
    /// `[offset][s_order]` max absolute coefficient of the difference.
    pub raw: Vec<Vec<f64>>,
    /// Extrapolated to zero offset, per s-order.
    pub extrapolated: Vec<f64>,
    pub tolerance: f64,
    pub passed: bool,
}

pub const JUMP_OFFSETS: [f64; 4] = [4e-2, 2e-2, 1e-2, 5e-3];

/// Lagrange weights for extrapolation to zero from the given nodes.
pub fn extrapolation_weights(nodes: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|i| {
            (0..nodes.len())
                .filter(|&j| j != i)
                .map(|j| nodes[j] / (nodes[j] - nodes[i]))
                .product()
        })
        .collect()
}

pub fn check_jump(
    bps: &BpsStructure,
    ray: Ray,
    t_abs: f64,
    target: &LatticeElement,
    cfg: &QuadratureConfig,
    tolerance: f64,
) -> Result<JumpReport> {
    let widest = JUMP_OFFSETS[0];
    for other in bps.active_rays(cfg.s_order)? {
        if other != ray && ray.angular_distance(other.direction()) < 2.0 * widest {
            return Err(Error::OverlappingRays(widest));
        }
    }
    let mut local = *cfg;
    local.min_angle = cfg.min_angle.min(0.5 * JUMP_OFFSETS[JUMP_OFFSETS.len() - 1]);
    let automorphism = BpsAutomorphism::new(bps, ray, cfg.s_order)?;
    let jumped = automorphism.image(target)?.to_numeric();

    let mut diffs = Vec::new();
    for delta in JUMP_OFFSETS {
        let t_plus = Ray::from_angle(ray.angle() + delta).point(t_abs);
        let t_minus = Ray::from_angle(ray.angle() - delta).point(t_abs);
        let plus = FlatSection::at(bps, t_plus, &local)?.image(bps, target)?;
        let minus = FlatSection::at(bps, t_minus, &local)?.apply(bps, &jumped)?;
        diffs.push(plus.sub(&minus)?);
    }
    let weights = extrapolation_weights(&JUMP_OFFSETS);
    let mut limit = NumericSeries::zero(bps.rank(), cfg.s_order);
    for (d, w) in diffs.iter().zip(&weights) {
        limit = limit.add(&d.scale(&Complex64::new(*w, 0.0)))?;
    }
    let per_order = |s: &NumericSeries| {
        let mut v = s.max_by_s_order();
        v.resize(cfg.s_order as usize + 1, 0.0);
        v
    };
    let extrapolated = per_order(&limit);
    let passed = extrapolated.iter().all(|d| *d < tolerance);
    Ok(JumpReport {
        ray_angle: ray.angle(),
        t_abs,
        target: target.0.clone(),
        offsets: JUMP_OFFSETS.to_vec(),
        raw: diffs.iter().map(per_order).collect(),
        extrapolated,
        tolerance,
        passed,
    })
}

/// Distance of the stripped flat section from `x_a` along a decreasing `t` sequence.
#[derive(Clone, Debug, Serialize)]
pub struct SmallTReport {
    pub ts: Vec<f64>,
    pub distances: Vec<f64>,
    pub monotone: bool,
    /// Least-squares slope of `log distance` against `log |t|`.
    pub log_log_slope: f64,
}

pub fn check_small_t(
    bps: &BpsStructure,
    r: Ray,
    target: &LatticeElement,
    ts: &[f64],
    cfg: &QuadratureConfig,
) -> Result<SmallTReport> {
    if ts.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Invalid("t sequence must be strictly decreasing".into()));
    }
    let mut distances = Vec::with_capacity(ts.len());
    for &t in ts {
        let section = FlatSection::at(bps, r.point(t), cfg)?;
        let xa = NumericSeries::monomial(target.clone(), 0, Complex64::new(1.0, 0.0), cfg.s_order);
        let diff = section.stripped_image(target)?.sub(&xa)?;
        distances.push(diff.terms().map(|(_, c)| c.norm()).fold(0.0, f64::max));
    }
    let monotone = distances.windows(2).all(|w| w[1] <= w[0]);
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .zip(&distances)
        .filter(|(_, d)| **d > 0.0)
        .map(|(t, d)| (t.ln(), d.ln()))
        .collect();
    let log_log_slope = crate::asymptotics::least_squares(&pts).map_or(f64::NAN, |fit| fit.slope);
    Ok(SmallTReport { ts: ts.to_vec(), distances, monotone, log_log_slope })
}
