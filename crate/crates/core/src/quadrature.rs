//! Adaptive Gauss–Kronrod (7/15) quadrature for scalar, complex and
//! matrix-valued integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

/// Values that can be accumulated by the integrator.
pub trait Integrand: Clone {
    fn scaled(&self, a: f64) -> Self;
    fn add_scaled(&mut self, a: f64, x: &Self);
    fn max_abs(&self) -> f64;
}

impl Integrand for f64 {
    fn scaled(&self, a: f64) -> Self {
        a * self
    }
    fn add_scaled(&mut self, a: f64, x: &Self) {
        *self += a * x;
    }
    fn max_abs(&self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn scaled(&self, a: f64) -> Self {
        self * a
    }
    fn add_scaled(&mut self, a: f64, x: &Self) {
        *self += x * a;
    }
    fn max_abs(&self) -> f64 {
        self.norm()
    }
}

impl Integrand for DMatrix<Complex64> {
    fn scaled(&self, a: f64) -> Self {
        self * Complex64::new(a, 0.0)
    }
    fn add_scaled(&mut self, a: f64, x: &Self) {
        for (s, v) in self.iter_mut().zip(x.iter()) {
            *s += v * a;
        }
    }
    fn max_abs(&self) -> f64 {
        self.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Tolerances and limits for one adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_subdivisions: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-10, rel: 1e-10, max_subdivisions: 20_000 }
    }
}

/// Result of an adaptive integration together with its error estimate.
#[derive(Debug, Clone)]
pub struct Estimate<V> {
    pub value: V,
    pub error: f64,
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Multiple of machine epsilon times `∫|f|` accepted as the roundoff floor.
const ROUNDOFF_FACTOR: f64 = 50.0;

/// One 15-point Kronrod rule on `[a, b]`; returns (value, |K15 - G7|).
/// The error is reported as zero once it is at the roundoff level of `∫|f|`.
pub fn gk15<V: Integrand, F: Fn(f64) -> V>(f: &F, a: f64, b: f64) -> (V, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resabs = WGK[7] * fc.max_abs();
    let mut kron = fc.scaled(WGK[7]);
    let mut gauss = fc.scaled(WG[3]);
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        resabs += WGK[j] * (f1.max_abs() + f2.max_abs());
        kron.add_scaled(WGK[j], &f1);
        kron.add_scaled(WGK[j], &f2);
        if j % 2 == 1 {
            gauss.add_scaled(WG[j / 2], &f1);
            gauss.add_scaled(WG[j / 2], &f2);
        }
    }
    let kron = kron.scaled(h);
    let mut diff = gauss.scaled(-h);
    diff.add_scaled(1.0, &kron);
    let resabs = h.abs() * resabs;
    let mut err = diff.max_abs();
    // Rules agreeing to roundoff are as converged as they can get.
    if err <= ROUNDOFF_FACTOR * f64::EPSILON * resabs {
        err = 0.0;
    }
    (kron, err)
}

struct Panel<V> {
    a: f64,
    b: f64,
    value: V,
    error: f64,
}

impl<V> PartialEq for Panel<V> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<V> Eq for Panel<V> {}
impl<V> PartialOrd for Panel<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Panel<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[a, b]`, starting from panels no wider than
/// `panel_width`, bisecting the worst panel until the summed error estimate
/// meets the tolerance.
pub fn integrate<V, F>(f: F, a: f64, b: f64, panel_width: f64, tol: Tolerance) -> Result<Estimate<V>>
where
    V: Integrand,
    F: Fn(f64) -> V,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite integration bounds [{a}, {b}]")));
    }
    if b <= a {
        let (v, _) = gk15(&f, a, a.max(b));
        return Ok(Estimate { value: v.scaled(0.0), error: 0.0 });
    }
    let width = if panel_width.is_finite() && panel_width > 0.0 { panel_width } else { b - a };
    let n0 = ((b - a) / width).ceil().clamp(1.0, 100_000.0) as usize;
    let step = (b - a) / n0 as f64;
    let mut heap = BinaryHeap::with_capacity(n0 + 16);
    for i in 0..n0 {
        let lo = a + step * i as f64;
        let hi = if i + 1 == n0 { b } else { a + step * (i + 1) as f64 };
        let (value, error) = gk15(&f, lo, hi);
        heap.push(Panel { a: lo, b: hi, value, error });
    }
    let sum = |heap: &BinaryHeap<Panel<V>>| {
        let mut it = heap.iter();
        let first = it.next().expect("nonempty heap");
        let mut total = first.value.clone();
        let mut err = first.error;
        for p in it {
            total.add_scaled(1.0, &p.value);
            err += p.error;
        }
        (total, err)
    };

    let mut subdivisions = 0usize;
    loop {
        let (total, err) = sum(&heap);
        let target = tol.abs.max(tol.rel * total.max_abs());
        if err <= target {
            return Ok(Estimate { value: total, error: err });
        }
        if subdivisions >= tol.max_subdivisions {
            return Err(Error::Quadrature { achieved: err, requested: target });
        }
        // Refine a batch of the worst panels before re-summing.
        let batch = (heap.len() / 8).clamp(1, 64);
        for _ in 0..batch {
            let Some(worst) = heap.pop() else { break };
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                heap.push(worst);
                let (total, err) = sum(&heap);
                return Err(Error::Quadrature {
                    achieved: err,
                    requested: tol.abs.max(tol.rel * total.max_abs()),
                });
            }
            let (v1, e1) = gk15(&f, worst.a, mid);
            let (v2, e2) = gk15(&f, mid, worst.b);
            heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
            heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
            subdivisions += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x: f64| x.powi(5) - 3.0 * x * x, 0.0, 2.0, 10.0, Tolerance::default()).unwrap();
        assert!((r.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_decaying() {
        // ∫₀^∞ e^{-x} sin(5x) dx = 5/26
        let r = integrate(|x: f64| (-x).exp() * (5.0 * x).sin(), 0.0, 50.0, 0.5, Tolerance::default()).unwrap();
        assert!((r.value - 5.0 / 26.0).abs() < 1e-10);
    }

    #[test]
    fn complex_and_matrix_values() {
        let z = integrate(|x: f64| Complex64::new(0.0, x).exp(), 0.0, std::f64::consts::PI, 1.0, Tolerance::default())
            .unwrap();
        assert!((z.value - Complex64::new(0.0, 2.0)).norm() < 1e-12);
        let m = integrate(
            |x: f64| DMatrix::from_element(2, 2, Complex64::new(x, -x)),
            0.0,
            1.0,
            1.0,
            Tolerance::default(),
        )
        .unwrap();
        assert!((m.value[(1, 0)] - Complex64::new(0.5, -0.5)).norm() < 1e-14);
    }

    #[test]
    fn sharp_peak_needs_refinement() {
        let r = integrate(|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0, 2.0, Tolerance::default()).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((r.value - exact).abs() / exact < 1e-9);
    }
}
