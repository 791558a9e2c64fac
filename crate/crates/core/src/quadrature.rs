//! Globally adaptive Gauss-Kronrod (7/15) quadrature for complex integrands
//! on finite real intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
    pub subdivisions: usize,
}

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let pair = f(c - x) + f(c + x);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).norm())
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error).then_with(|| o.a.total_cmp(&self.a))
    }
}

/// Integrates `f` over `a < b` split at `breaks`, bisecting the worst panel until
/// the summed error estimate is below `abs_tol`.
pub fn integrate<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    abs_tol: f64,
    max_subdivisions: usize,
) -> Result<Estimate> {
    let mut nodes = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|x| *x > a && *x < b).collect();
    inner.sort_by(f64::total_cmp);
    nodes.extend(inner);
    nodes.push(b);

    let mut heap = BinaryHeap::new();
    for w in nodes.windows(2) {
        if w[1] > w[0] {
            let (value, error) = gk15(&f, w[0], w[1]);
            heap.push(Panel { a: w[0], b: w[1], value, error });
        }
    }
    let mut subdivisions = 0;
    loop {
        let total_err: f64 = heap.iter().map(|p| p.error).sum();
        let value: Complex64 = heap.iter().map(|p| p.value).sum();
        if !value.is_finite() {
            return Err(Error::QuadratureFailure { error: f64::INFINITY, subdivisions });
        }
        if total_err <= abs_tol {
            return Ok(Estimate { value, error: total_err, subdivisions });
        }
        if subdivisions >= max_subdivisions {
            return Err(Error::QuadratureFailure { error: total_err, subdivisions });
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::QuadratureFailure { error: total_err, subdivisions });
        }
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = gk15(&f, lo, hi);
            heap.push(Panel { a: lo, b: hi, value, error });
        }
        subdivisions += 1;
    }
}

/// Composite trapezoid rule with `n` panels.
pub fn trapezoid<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, n: usize) -> Complex64 {
    let h = (b - a) / n as f64;
    let mut acc = (f(a) + f(b)) * 0.5;
    for i in 1..n {
        acc += f(a + h * i as f64);
    }
    acc * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let e = integrate(|x| Complex64::new(x.powi(5), -x * x), -1.0, 2.0, &[], 1e-14, 10).unwrap();
        assert!((e.value - Complex64::new(63.0 / 6.0, -3.0)).norm() < 1e-13);
        assert_eq!(e.subdivisions, 0);
    }

    #[test]
    fn oscillatory_and_peaked() {
        let e = integrate(|x| Complex64::new(0.0, 20.0 * x).exp(), 0.0, 3.0, &[], 1e-12, 200).unwrap();
        let exact = (Complex64::new(0.0, 60.0).exp() - 1.0) / Complex64::new(0.0, 20.0);
        assert!((e.value - exact).norm() < 1e-11);
        let eps = 1e-3;
        let e = integrate(|x| Complex64::new(1.0 / (x * x + eps * eps), 0.0), -1.0, 1.0, &[0.0], 1e-9, 500).unwrap();
        let exact = 2.0 * (1.0 / eps).atan() / eps;
        assert!((e.value.re - exact).abs() < 1e-8);
    }

    #[test]
    fn reports_failure() {
        let r = integrate(|x| Complex64::new(1.0 / x.abs().sqrt().max(1e-300), 0.0), -1.0, 1.0, &[], 1e-15, 5);
        assert!(matches!(r, Err(Error::QuadratureFailure { .. })));
    }

    #[test]
    fn trapezoid_agrees_on_smooth_periodic() {
        let f = |x: f64| Complex64::new(x.cos().exp(), 0.0);
        let t = trapezoid(f, 0.0, std::f64::consts::TAU, 64);
        let g = integrate(f, 0.0, std::f64::consts::TAU, &[], 1e-13, 100).unwrap();
        assert!((t - g.value).norm() < 1e-12);
    }
}
