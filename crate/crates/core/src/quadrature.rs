//! Quadrature rules: Kress (Martensen–Kussmaul) log weights, Gauss–Legendre,
//! and trigonometric interpolation of periodic node data.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use num_complex::Complex64;

/// Weight of node `t_k` in `∫_0^{2π} log|2 sin((t-s)/2)| f(s) ds ≈ Σ_k w(t - t_k) f(t_k)`
/// for `m` equispaced nodes (`m` even), evaluated at offset `x = t - t_k`.
///
/// Half of the classical weight for the kernel `log(4 sin²((t-s)/2))`.
pub fn log_sine_weight(m: usize, x: f64) -> f64 {
    let n = m / 2;
    let nf = n as f64;
    let series: f64 = (1..n).map(|l| (l as f64 * x).cos() / l as f64).sum();
    0.5 * (-(TAU / nf) * series - PI / (nf * nf) * (nf * x).cos())
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let nf = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

/// 16-point Gauss–Legendre rule, computed once.
pub fn gauss_legendre_16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// Trigonometric interpolant of real samples at `t_k = 2πk/m`, `m` even.
#[derive(Clone, Debug)]
pub struct TrigInterpolant {
    m: usize,
    // a_p for p = 0..=m/2
    coefficients: Vec<Complex64>,
}

impl TrigInterpolant {
    pub fn new(samples: &[f64]) -> Self {
        let m = samples.len();
        assert!(m >= 2 && m.is_multiple_of(2), "trigonometric interpolation needs an even sample count");
        let coefficients = (0..=m / 2)
            .map(|p| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, &f) in samples.iter().enumerate() {
                    let angle = -TAU * ((p * k) % m) as f64 / m as f64;
                    acc += f * Complex64::from_polar(1.0, angle);
                }
                acc / m as f64
            })
            .collect();
        Self { m, coefficients }
    }

    pub fn eval(&self, s: f64) -> f64 {
        let half = self.m / 2;
        let unit = Complex64::new(s.cos(), s.sin());
        let mut power = Complex64::new(1.0, 0.0);
        let mut acc = self.coefficients[0].re;
        for p in 1..half {
            power *= unit;
            acc += 2.0 * (self.coefficients[p] * power).re;
        }
        acc + self.coefficients[half].re * (half as f64 * s).cos()
    }
}
