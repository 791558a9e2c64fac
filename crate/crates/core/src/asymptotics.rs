//! Large-`t` behaviour of the Gopakumar-Vafa resummation.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::coeff::{binomial, rat, Rational};
use crate::error::{Error, Result};
use crate::gv_partition::{f_beta_genus_form, lattice_sum, EpsilonLaurent, KSum, Point};
use crate::maulik_toda::GenusSeries;

/// Result of an ordinary least-squares line fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_std_error: f64,
}

impl LineFit {
    /// Two-sided 95% interval for the slope from Student's t.
    pub fn slope_interval(&self, points: usize) -> (f64, f64) {
        let half = student_t_975(points.saturating_sub(2)) * self.slope_std_error;
        (self.slope - half, self.slope + half)
    }
}

fn student_t_975(dof: usize) -> f64 {
    const TABLE: [f64; 10] = [12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228];
    match dof {
        0 => f64::INFINITY,
        d if d <= TABLE.len() => TABLE[d - 1],
        _ => 1.96,
    }
}

/// Fits `y = slope x + intercept`; `None` with fewer than two distinct abscissae.
pub fn least_squares(points: &[(f64, f64)]) -> Option<LineFit> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_std_error = if points.len() > 2 {
        let rss: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some(LineFit { slope, intercept, slope_std_error })
}

/// `sum_{k>0} t / (k^2 + (2 pi m t)^2) = (2 pi^2 m t coth(2 pi^2 m t) - 1) / (8 pi^2 m^2 t)`.
pub fn coth_sum(m: u32, t: f64) -> f64 {
    let m = m as f64;
    let x = 2.0 * PI * PI * m * t;
    let numerator = if x < 1e-3 {
        let x2 = x * x;
        x2 / 3.0 - x2 * x2 / 45.0 + 2.0 * x2 * x2 * x2 / 945.0
    } else {
        x / x.tanh() - 1.0
    };
    numerator / (8.0 * PI * PI * m * m * t)
}

/// `sum_{k=1}^{K}` of the same terms.
pub fn coth_partial_sum(m: u32, t: f64, k_max: u32) -> f64 {
    lattice_sum(m, t, KSum::Partial(k_max))
}

/// Bound on `coth_sum - coth_partial_sum`, from `sum_{k>K} t/k^2 < t/K`.
pub fn coth_tail_bound(t: f64, k_max: u32) -> f64 {
    t / k_max as f64
}

/// Exact `q^m` coefficient of the large-`t` limit: `prefactor * laurent(w)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitCoefficient {
    pub m: u32,
    #[serde(serialize_with = "crate::coeff::serialize_rational")]
    pub prefactor: Rational,
    pub laurent: EpsilonLaurent,
}

/// `(1/2) sum_g n_g (-1)^g (1/m) (w^{-m} - w^m)^{2g}` for `m = 1..=m_q`.
pub fn large_t_limit_exact(gv: &GenusSeries, m_q: u32) -> Vec<LimitCoefficient> {
    (1..=m_q)
        .map(|m| LimitCoefficient { m, prefactor: rat(1, 2 * m as i64), laurent: EpsilonLaurent::from_genus(gv, m) })
        .filter(|c| !c.laurent.terms.is_empty())
        .collect()
}

/// Numeric value of the large-`t` limit truncated at `q^{m_q}`.
pub fn large_t_limit(gv: &GenusSeries, epsilon: f64, degree: f64, m_q: u32) -> Complex64 {
    let q = (-2.0 * PI * degree).exp();
    large_t_limit_exact(gv, m_q)
        .iter()
        .map(|c| c.laurent.eval(epsilon) * q.powi(c.m as i32) * crate::coeff::rat_to_f64(&c.prefactor))
        .sum()
}

/// One factor `(1 - base)^{exponent}` of the product formula.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentRow {
    pub g: u32,
    pub h: u32,
    pub base_re: f64,
    pub base_im: f64,
    pub exponent_num: i64,
    pub exponent_den: i64,
}

impl ExponentRow {
    pub fn exponent(&self) -> Rational {
        rat(self.exponent_num, self.exponent_den)
    }

    pub fn base(&self) -> Complex64 {
        Complex64::new(self.base_re, self.base_im)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProductFormula {
    pub rows: Vec<ExponentRow>,
    /// Genera with `n_g <D, beta>` odd.
    pub half_integer_genera: Vec<u32>,
    pub log_value: Complex64,
    pub value: Complex64,
}

/// `prod_g prod_{h=0}^{2g} (1 - e^{2 pi i ((g-h) eps + v)})^{-(1/2)(-1)^{g+h} C(2g,h) n_g <D,beta>}`
/// evaluated as `exp(sum exponent * Log(1 - base))`.
pub fn product_formula(gv: &GenusSeries, d_beta: i64, epsilon: f64, degree: f64) -> Result<ProductFormula> {
    if !(degree > 0.0) {
        return Err(Error::NonPositiveDegree(degree));
    }
    let q = (-2.0 * PI * degree).exp();
    let mut rows = Vec::new();
    let mut half_integer_genera = Vec::new();
    let mut log_value = Complex64::new(0.0, 0.0);
    for (&g, &ng) in gv {
        if ng == 0 {
            continue;
        }
        if (ng * d_beta) % 2 != 0 {
            half_integer_genera.push(g);
        }
        for h in 0..=2 * g {
            let sign = if (g + h) % 2 == 0 { -1 } else { 1 };
            let e = rat(sign * binomial(2 * g as i64, h as i64) * ng * d_beta, 2);
            if e == rat(0, 1) {
                continue;
            }
            let base = Complex64::from_polar(q, 2.0 * PI * (g as f64 - h as f64) * epsilon);
            let one_minus = Complex64::new(1.0, 0.0) - base;
            if one_minus.norm() < 1e-8 {
                return Err(Error::Resonance(one_minus.norm()));
            }
            log_value += crate::coeff::rat_to_f64(&e) * one_minus.ln();
            rows.push(ExponentRow {
                g,
                h,
                base_re: base.re,
                base_im: base.im,
                exponent_num: i64::try_from(e.numer()).expect("small exponent"),
                exponent_den: i64::try_from(e.denom()).expect("small exponent"),
            });
        }
    }
    Ok(ProductFormula { rows, half_integer_genera, value: log_value.exp(), log_value })
}

/// Recovers `(g, n_g <D,beta>)` from the exponent table, averaging over `h`.
pub fn genus_weights_from_table(rows: &[ExponentRow]) -> Vec<(u32, Rational)> {
    let mut out: Vec<(u32, Rational)> = Vec::new();
    for r in rows {
        // exponent = -(1/2)(-1)^{g+h} C(2g,h) n_g D, so n_g D = -2 (-1)^{g+h} exponent / C(2g,h)
        let sign = if (r.g + r.h) % 2 == 0 { -2 } else { 2 };
        let w = r.exponent() * rat(sign, binomial(2 * r.g as i64, r.h as i64));
        match out.last_mut() {
            Some((g, acc)) if *g == r.g => {
                *acc += w;
            }
            _ => out.push((r.g, w)),
        }
    }
    for (g, acc) in &mut out {
        *acc /= rat(2 * *g as i64 + 1, 1);
    }
    out
}

/// Log-log decay fit of `|F_beta(t) - limit|` in `t`.
#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub ts: Vec<f64>,
    pub distances: Vec<f64>,
    pub fit: LineFit,
    pub slope_ci95: (f64, f64),
}

fn fit_log_log(ts: &[f64], distances: &[f64]) -> Result<(LineFit, (f64, f64))> {
    let pts: Vec<(f64, f64)> = ts.iter().zip(distances).map(|(t, d)| (t.ln(), d.ln())).collect();
    if pts.iter().any(|p| !p.1.is_finite()) {
        return Err(Error::Invalid("decay fit needs nonzero distances".into()));
    }
    let fit = least_squares(&pts).ok_or_else(|| Error::Invalid("decay fit needs two distinct t".into()))?;
    Ok((fit, fit.slope_interval(pts.len())))
}

/// Uses the full `k`-sum and no `m = 0` term.
pub fn fit_decay(gv: &GenusSeries, epsilon: f64, degree: f64, ts: &[f64], m_q: u32) -> Result<DecayFit> {
    let limit = large_t_limit(gv, epsilon, degree, m_q);
    let distances: Vec<f64> = ts
        .iter()
        .map(|&t| (f_beta_genus_form(Point { t, epsilon, degree }, gv, KSum::Closed, m_q, false) - limit).norm())
        .collect();
    let (fit, slope_ci95) = fit_log_log(ts, &distances)?;
    Ok(DecayFit { ts: ts.to_vec(), distances, fit, slope_ci95 })
}

#[derive(Clone, Debug, Serialize)]
pub struct QPowerRow {
    pub m: u32,
    pub t: f64,
    pub partial_sum: f64,
    pub closed_form: f64,
    pub tail_bound: f64,
    pub limit: f64,
    pub decay_exponent: f64,
    pub decay_ci95: (f64, f64),
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticsConfig {
    pub epsilon: f64,
    pub degree: f64,
    pub d_beta: i64,
    pub m_q: u32,
    pub k_partial: u32,
    pub t_sample: f64,
    pub decay_ts: Vec<f64>,
}

impl Default for AsymptoticsConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.17,
            degree: 0.5,
            d_beta: 1,
            m_q: 6,
            k_partial: 100_000,
            t_sample: 0.7,
            decay_ts: vec![10.0, 20.0, 40.0, 80.0],
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticsReport {
    pub config: AsymptoticsConfig,
    pub rows: Vec<QPowerRow>,
    /// `None` when every `n_g` vanishes and the distance is identically zero.
    pub decay: Option<DecayFit>,
    pub limit: Complex64,
    pub product: ProductFormula,
    /// `|log(product) - <D,beta> * limit|` with the limit summed to negligible tail.
    pub product_log_residual: f64,
    pub passed: bool,
}

pub fn asymptotics_report(gv: &GenusSeries, cfg: &AsymptoticsConfig) -> Result<AsymptoticsReport> {
    if cfg.m_q == 0 || cfg.k_partial == 0 || !(cfg.t_sample > 0.0) {
        return Err(Error::Invalid("asymptotics needs m_q, k_partial, t_sample > 0".into()));
    }
    let mut rows = Vec::new();
    let mut ok = true;
    for m in 1..=cfg.m_q {
        let partial_sum = coth_partial_sum(m, cfg.t_sample, cfg.k_partial);
        let closed_form = coth_sum(m, cfg.t_sample);
        let tail_bound = coth_tail_bound(cfg.t_sample, cfg.k_partial);
        let limit = 0.25 / m as f64;
        let d: Vec<f64> = cfg.decay_ts.iter().map(|&t| (coth_sum(m, t) - limit).abs()).collect();
        let (fit, ci) = fit_log_log(&cfg.decay_ts, &d)?;
        ok &= (closed_form - partial_sum).abs() <= tail_bound && (fit.slope + 1.0).abs() <= 0.1;
        rows.push(QPowerRow {
            m,
            t: cfg.t_sample,
            partial_sum,
            closed_form,
            tail_bound,
            limit,
            decay_exponent: fit.slope,
            decay_ci95: ci,
        });
    }
    let trivial = gv.values().all(|&v| v == 0);
    let decay = if trivial { None } else { Some(fit_decay(gv, cfg.epsilon, cfg.degree, &cfg.decay_ts, cfg.m_q)?) };
    let limit = large_t_limit(gv, cfg.epsilon, cfg.degree, cfg.m_q);
    let product = product_formula(gv, cfg.d_beta, cfg.epsilon, cfg.degree)?;
    let full = large_t_limit(gv, cfg.epsilon, cfg.degree, resummation_order(gv, cfg.degree));
    let product_log_residual = (product.log_value - cfg.d_beta as f64 * full).norm();
    let decay_ok = decay.as_ref().map_or(true, |d| (d.fit.slope + 1.0).abs() <= 0.1);
    let passed = ok && decay_ok && product_log_residual < 1e-10;
    Ok(AsymptoticsReport { config: cfg.clone(), rows, decay, limit, product, product_log_residual, passed })
}

/// `q`-order at which the neglected tail of the limit is far below `1e-13`.
pub fn resummation_order(gv: &GenusSeries, degree: f64) -> u32 {
    let q = (-2.0 * PI * degree).exp();
    let g_max = gv.keys().max().copied().unwrap_or(0) as f64;
    let scale: f64 = gv.values().map(|v| v.unsigned_abs() as f64).sum::<f64>().max(1.0) * 4f64.powf(g_max);
    let needed = ((1e-16 / scale).ln() / q.ln()).ceil();
    needed.clamp(1.0, 5000.0) as u32
}
