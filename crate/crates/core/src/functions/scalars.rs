use std::f64::consts::PI;

use num_complex::Complex64;

use super::{digamma, ModelParams, QuadratureConfig};
use crate::quadrature::integrate;
use crate::{Error, Result};

/// Memory function `k(t) = 2T sin(Δt)/sinh(πTt)`.
pub fn k_of_t(t: f64, theta: &ModelParams) -> f64 {
    let delta = theta.detuning();
    let temp = theta.temperature;
    let x = PI * temp * t;
    if x == 0.0 {
        return 2.0 * delta / PI;
    }
    let s = (delta * t).sin();
    if x < 1e-4 {
        let x2 = x * x;
        2.0 * temp * s / (x * (1.0 + x2 / 6.0 + x2 * x2 / 120.0))
    } else if x > 20.0 {
        let e = (-x).exp();
        4.0 * temp * s * e / (1.0 - e * e)
    } else {
        2.0 * temp * s / x.sinh()
    }
}

/// `e^{−rate·t} k(t)`, with the exponentials merged so that a growing
/// weight does not overflow where `k` is already negligible.
pub(crate) fn damped_k(t: f64, rate: f64, theta: &ModelParams) -> f64 {
    let x = PI * theta.temperature * t;
    if x > 20.0 {
        let e = (-x).exp();
        4.0 * theta.temperature * (theta.detuning() * t).sin() * (-rate * t - x).exp() / (1.0 - e * e)
    } else {
        (-rate * t).exp() * k_of_t(t, theta)
    }
}

/// Panel width resolving the oscillation and thermal decay of `k`.
fn panel_width(theta: &ModelParams) -> f64 {
    let mut w = 1.0 / (PI * theta.temperature);
    let delta = theta.detuning().abs();
    if delta > 0.0 {
        w = w.min(PI / delta);
    }
    if theta.gamma != 0.0 {
        w = w.min(4.0 / theta.gamma.abs());
    }
    w
}

/// Time beyond which `∫ |k(s)| e^{−rate·s} ds` is below `tol`, if the
/// integrand decays.
fn decay_cutoff(theta: &ModelParams, rate: f64, tol: f64) -> Option<f64> {
    let a = PI * theta.temperature + rate;
    if a <= 0.0 {
        return None;
    }
    // |k(s)| ≤ 4T e^{−πTs}/(1 − e^{−2πTs}); the tail beyond s_c is bounded by
    // 4T e^{−a s_c} / (a (1 − e^{−2πT s_c})).
    let amplitude = 4.0 * theta.temperature / a;
    let s = ((amplitude / tol).max(1.0)).ln() / a;
    let guard = 1.0 / (1.0 - (-2.0 * PI * theta.temperature * s.max(1e-300)).exp());
    Some(((amplitude * guard / tol).max(1.0)).ln() / a + 1.0 / a)
}

/// `∫_{t0}^{t1} e^{−Γs/2} k(s) ds`.
pub fn g_increment(t0: f64, t1: f64, theta: &ModelParams, cfg: &QuadratureConfig) -> Result<f64> {
    if t0 < 0.0 || t1 < t0 {
        return Err(Error::InvalidInput(format!("invalid integration window [{t0}, {t1}]")));
    }
    if theta.detuning() == 0.0 || t1 == t0 {
        return Ok(0.0);
    }
    let end = match decay_cutoff(theta, 0.5 * theta.gamma, cfg.abs_tol * 1e-3) {
        Some(cut) => t1.min(cut.max(t0)),
        None => t1,
    };
    if end <= t0 {
        return Ok(0.0);
    }
    let half = 0.5 * theta.gamma;
    let f = |s: f64| damped_k(s, half, theta);
    Ok(integrate(f, t0, end, panel_width(theta), cfg.tolerance())?.value)
}

/// `g(t) = ∫₀ᵗ e^{−Γs/2} k(s) ds`.
pub fn g_of_t(t: f64, theta: &ModelParams, cfg: &QuadratureConfig) -> Result<f64> {
    g_increment(0.0, t, theta, cfg)
}

/// `ḡ(t)`: `g` evaluated at dual parameters (weight `e^{+Γs/2}`).
pub fn g_dual_of_t(t: f64, theta: &ModelParams, cfg: &QuadratureConfig) -> Result<f64> {
    g_of_t(t, &theta.dual(), cfg)
}

/// `g(∞)` by quadrature up to the decay horizon.
pub fn g_infinity_quadrature(theta: &ModelParams, cfg: &QuadratureConfig) -> Result<f64> {
    let half = 0.5 * theta.gamma;
    let end = decay_cutoff(theta, half, cfg.abs_tol * 1e-3).ok_or_else(|| {
        Error::InvalidInput(format!("g integral diverges: πT + Γ/2 = {} ≤ 0", PI * theta.temperature + half))
    })?;
    let f = |s: f64| damped_k(s, half, theta);
    Ok(integrate(f, 0.0, end, panel_width(theta), cfg.tolerance())?.value)
}

/// `sinh(Γ(t−s)/2) / sinh(Γt/2)`, even in `Γ`.
fn p_kernel(s: f64, t: f64, gamma: f64) -> f64 {
    let a = gamma.abs();
    if a * t < 1e-6 {
        return (t - s) / t;
    }
    (-0.5 * a * s).exp() * (-a * (t - s)).exp_m1() / (-a * t).exp_m1()
}

/// `p(t)`.
///
/// Combining `(1 − e^{−Γt}) p = g + e^{−Γt} ḡ` into a single integral gives
/// `p(t) = ∫₀ᵗ k(s) sinh(Γ(t−s)/2)/sinh(Γt/2) ds`, free of cancellation and
/// manifestly odd under the dual map.
pub fn p_of_t(t: f64, theta: &ModelParams, cfg: &QuadratureConfig) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::InvalidInput(format!("negative time {t}")));
    }
    if t == 0.0 || theta.detuning() == 0.0 {
        return Ok(0.0);
    }
    let gamma = theta.gamma;
    let end = match decay_cutoff(theta, 0.5 * gamma.abs(), cfg.abs_tol * 1e-3) {
        Some(cut) => t.min(cut),
        None => t,
    };
    let f = |s: f64| k_of_t(s, theta) * p_kernel(s, t, gamma);
    Ok(integrate(f, 0.0, end, panel_width(theta), cfg.tolerance())?.value)
}

/// Laplace transform `k̂(ω) = (i/π) Σ_η η ψ(½ − i[ω + ηΔ]/(2πT))`, valid in
/// the whole complex plane away from the pole ladder.
pub fn k_hat(omega: Complex64, theta: &ModelParams) -> Result<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    let delta = theta.detuning();
    let scale = 2.0 * PI * theta.temperature;
    let arg = |eta: f64| 0.5 - i * (omega + eta * delta) / scale;
    let plus = digamma(arg(1.0)).map_err(|_| Error::Pole(format!("k̂ pole at ω = {omega}")))?;
    let minus = digamma(arg(-1.0)).map_err(|_| Error::Pole(format!("k̂ pole at ω = {omega}")))?;
    Ok(i / PI * (plus - minus))
}

/// Pole `ω = −ηΔ − iπT(2n+1)` of `k̂`.
pub fn k_pole(n: usize, eta: f64, theta: &ModelParams) -> Complex64 {
    Complex64::new(-eta * theta.detuning(), -PI * theta.temperature * (2 * n + 1) as f64)
}

/// Stationary value `g(∞) = k̂(iΓ/2) = (2/π) Im ψ(½ + [Γ/2 + iΔ]/(2πT))`,
/// continued analytically for dual parameters.
pub fn stationary_g(theta: &ModelParams) -> Result<f64> {
    Ok(k_hat(Complex64::new(0.0, 0.5 * theta.gamma), theta)?.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn theta(delta: f64, temp: f64, gamma: f64) -> ModelParams {
        ModelParams::new(0.3 + delta, 0.3, temp, gamma).unwrap()
    }

    #[test]
    fn k_limits_and_duality() {
        let th = theta(0.5, 0.25, 1.0);
        assert!((k_of_t(0.0, &th) - 1.0 / PI).abs() < 1e-15);
        assert!((k_of_t(1e-9, &th) - 1.0 / PI).abs() < 1e-12);
        // Both sides of the series switch-over agree.
        let t_switch = 1e-4 / (PI * 0.25);
        let (a, b) = (k_of_t(t_switch * (1.0 - 1e-9), &th), k_of_t(t_switch * (1.0 + 1e-9), &th));
        assert!((a - b).abs() < 1e-12);
        for &t in &[0.0, 0.1, 2.0, 30.0, 400.0] {
            assert_eq!(k_of_t(t, &th.dual()), -k_of_t(t, &th));
            assert_eq!(k_of_t(t, &theta(0.0, 0.25, 1.0)), 0.0);
        }
    }

    #[test]
    fn g_and_p_trivial_values() {
        let cfg = QuadratureConfig::default();
        let th = theta(0.5, 0.25, 1.0);
        assert_eq!(g_of_t(0.0, &th, &cfg).unwrap(), 0.0);
        assert_eq!(p_of_t(0.0, &th, &cfg).unwrap(), 0.0);
        assert_eq!(g_of_t(3.0, &theta(0.0, 0.25, 1.0), &cfg).unwrap(), 0.0);
        // p(t) ≈ k(0⁺) t / 2 at short times.
        let t = 1e-5;
        assert!((p_of_t(t, &th, &cfg).unwrap() - k_of_t(0.0, &th) * t / 2.0).abs() < 1e-9);
    }

    #[test]
    fn k_hat_matches_closed_form_at_half_gamma() {
        let th = theta(0.5, 0.25, 1.0);
        let z = Complex64::new(0.5, 0.0) + Complex64::new(0.5, 0.5) / (2.0 * PI * 0.25);
        let expected = 2.0 / PI * digamma(z).unwrap().im;
        let got = k_hat(Complex64::new(0.0, 0.5), &th).unwrap();
        assert!((got.re - expected).abs() < 1e-14 && got.im.abs() < 1e-14);
        assert_eq!(k_hat(Complex64::new(0.3, 0.1), &theta(0.0, 0.25, 1.0)).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn k_hat_poles_rejected() {
        let th = theta(0.5, 0.25, 1.0);
        for n in 0..3 {
            for eta in [1.0, -1.0] {
                assert!(k_hat(k_pole(n, eta, &th), &th).is_err());
            }
        }
    }

    #[test]
    fn dual_p_is_exactly_odd() {
        let cfg = QuadratureConfig::default();
        let th = theta(0.7, 0.2, 1.3);
        for &t in &[0.2, 1.0, 5.0] {
            assert_eq!(p_of_t(t, &th.dual(), &cfg).unwrap(), -p_of_t(t, &th, &cfg).unwrap());
        }
    }
}
