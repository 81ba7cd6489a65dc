//! Shared helpers for the integration tests: parameter builders and a small
//! Gauss-Legendre quadrature that is independent of the library's own.
#![allow(dead_code)]

use fermion_duality::functions::ModelParams;

/// `Γ = 1`, `μ = 0`.
pub fn theta(detuning: f64, temperature: f64) -> ModelParams {
    ModelParams::new(detuning, 0.0, temperature, 1.0).unwrap()
}

/// The five parameter sets used throughout the acceptance checks.
pub fn five_thetas() -> Vec<ModelParams> {
    [(0.5, 0.25), (1.0, 0.5), (0.2, 1.0), (1.5, 0.2), (-0.7, 0.3)].iter().map(|&(d, t)| theta(d, t)).collect()
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss-Legendre integral of a vector-valued `f` over `[a, b]`.
pub fn integrate_vec(f: impl Fn(f64) -> Vec<num_complex::Complex64>, a: f64, b: f64, panels: usize, order: usize) -> Vec<num_complex::Complex64> {
    let rule = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut acc: Vec<num_complex::Complex64> = Vec::new();
    for p in 0..panels {
        let lo = a + h * p as f64;
        for &(x, w) in &rule {
            let v = f(lo + 0.5 * h * (x + 1.0));
            if acc.is_empty() {
                acc = vec![num_complex::Complex64::new(0.0, 0.0); v.len()];
            }
            for (a, b) in acc.iter_mut().zip(v) {
                *a += b * (0.5 * h * w);
            }
        }
    }
    acc
}

/// Scalar version of [`integrate_vec`].
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    integrate_vec(|t| vec![num_complex::Complex64::new(f(t), 0.0)], a, b, panels, order)[0].re
}

/// Fourth-order central difference.
pub fn derivative(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
    (-f(t + 2.0 * h) + 8.0 * f(t + h) - 8.0 * f(t - h) + f(t - 2.0 * h)) / (12.0 * h)
}
