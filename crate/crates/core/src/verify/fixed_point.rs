use num_complex::Complex64;
use serde_json::json;

use super::family::SuperOpFamily;
use super::relations::{finish, heisenberg_generator, CheckOptions};
use super::report::{worst, SamplePoint};
use crate::functions::ModelParams;
use crate::liouville::{spectral_decompose, superadjoint, SuperOperator};
use crate::quadrature::{integrate, Tolerance};
use crate::verify::ResidualReport;
use crate::{Error, Result, I};

/// `∫₀^∞ K(t) e^{itG(∞)} dt` by sampling `K̂` at the eigenvalues of `G(∞)`.
pub fn stationary_rhs_sampled(family: &dyn SuperOpFamily, theta: &ModelParams, g_inf: &SuperOperator) -> Result<SuperOperator> {
    let sd = spectral_decompose(g_inf)?;
    let mut out = SuperOperator::zeros(family.dim());
    for mode in &sd.modes {
        let k = family.kernel_hat(theta, mode.eigenvalue)?;
        out = &out + &(&k * &mode.projector());
    }
    Ok(out)
}

/// `K_δ + ∫₀^∞ K_s(t) e^{itG(∞)} dt` by direct quadrature over doubling
/// windows until the tail is negligible.
pub fn stationary_rhs_quadrature(
    family: &dyn SuperOpFamily,
    theta: &ModelParams,
    g_inf: &SuperOperator,
    tol: f64,
) -> Result<SuperOperator> {
    let dim = family.dim();
    let unit = 1.0 / family.gamma_sum(theta).abs().max(1e-3);
    let mut total = family.kernel_delta(theta)?.into_entries();
    let quad_tol = Tolerance { abs: 1e-3 * tol, rel: 1e-12, max_subdivisions: 20000 };
    let err_cell = std::cell::RefCell::new(None::<Error>);
    let f = |t: f64| {
        let mut local = None;
        let phase = g_inf.scale(I * t).exp();
        let value = match family.kernel_smooth(theta, t) {
            Ok(k) => (&k * &phase).into_entries(),
            Err(e) => {
                local = Some(e);
                nalgebra::DMatrix::<Complex64>::zeros(dim * dim, dim * dim)
            }
        };
        if let Some(e) = local {
            err_cell.borrow_mut().get_or_insert(e);
        }
        value
    };
    let (mut a, mut b) = (0.0, unit);
    let mut quiet = 0;
    for _ in 0..40 {
        let chunk = integrate(&f, a, b, (b - a) / 8.0, quad_tol)?.value;
        if let Some(e) = err_cell.borrow_mut().take() {
            return Err(e);
        }
        let size = chunk.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !size.is_finite() {
            break;
        }
        total += chunk;
        quiet = if size < 1e-3 * tol { quiet + 1 } else { 0 };
        if quiet >= 2 {
            return SuperOperator::new(total);
        }
        a = b;
        b *= 2.0;
    }
    Err(Error::InvalidInput("stationary fixed-point integral does not converge".into()))
}

/// `G(∞) = ∫₀^∞ K(t) e^{itG(∞)} dt` by frequency sampling and by direct
/// quadrature.
pub fn check_fixed_point_stationary(family: &dyn SuperOpFamily, theta: &ModelParams, opts: &CheckOptions) -> ResidualReport {
    let outcome = (|| {
        let (rhs_theta, _) = opts.rhs_same(family, theta);
        let g_inf = family.stationary_generator(theta)?;
        let sampled = stationary_rhs_sampled(family, &rhs_theta, &g_inf)?;
        let r_sampled = g_inf.max_abs_diff(&sampled);
        let (r_direct, direct_error) = match stationary_rhs_quadrature(family, &rhs_theta, &g_inf, opts.tol) {
            Ok(direct) => (g_inf.max_abs_diff(&direct), None),
            Err(e) => (f64::INFINITY, Some(e.to_string())),
        };
        let witness = json!({
            "sampling_residual": r_sampled,
            "quadrature_residual": if r_direct.is_finite() { Some(r_direct) } else { None },
            "quadrature_error": direct_error,
        });
        Ok((worst(r_sampled, r_direct), witness))
    })();
    finish("stationary_fixed_point", theta, vec![SamplePoint::Stationary], opts.tol, outcome)
}

/// Picture in which the functional fixed point is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Picture {
    /// `G(t) = ∫₀ᵗ ds K(t−s) T→ e^{i∫ₛᵗ G}`.
    Schroedinger,
    /// `G^H(t) = ∫₀ᵗ ds K(t−s)‡ T→ e^{−i∫ₛᵗ G^H}`.
    Heisenberg,
}

/// `‖G(t) − K̂[G](t)‖_max` with `n` steps: midpoint factors for the ordered
/// exponential (earlier times leftmost) and the trapezoid rule in `s`; the
/// `δ` part of the kernel is applied analytically at `s = t`.
pub fn functional_fixed_point_residual(
    family: &dyn SuperOpFamily,
    theta: &ModelParams,
    kernel_theta: &ModelParams,
    t: f64,
    n: usize,
    picture: Picture,
) -> Result<f64> {
    if !(t > 0.0) || n == 0 {
        return Err(Error::InvalidInput(format!("need t > 0 and n > 0, got t = {t}, n = {n}")));
    }
    let generator = |r: f64| -> Result<SuperOperator> {
        match picture {
            Picture::Schroedinger => family.generator(theta, r),
            Picture::Heisenberg => heisenberg_generator(family, theta, r),
        }
    };
    let kernel = |tau: f64| -> Result<SuperOperator> {
        let k = family.kernel_smooth(kernel_theta, tau)?;
        Ok(match picture {
            Picture::Schroedinger => k,
            Picture::Heisenberg => superadjoint(&k),
        })
    };
    let sign = match picture {
        Picture::Schroedinger => I,
        Picture::Heisenberg => -I,
    };
    let dim = family.dim();
    let step = t / n as f64;
    let delta = family.kernel_delta(kernel_theta)?;
    let mut rhs = match picture {
        Picture::Schroedinger => delta,
        Picture::Heisenberg => superadjoint(&delta),
    };
    // U_j = exp(sign·G(r_j)Δ) U_{j+1}, U_n = 𝟙.
    let mut u = SuperOperator::identity(dim);
    rhs = &rhs + &kernel(0.0)?.scale(Complex64::new(0.5 * step, 0.0));
    for j in (0..n).rev() {
        let r = (j as f64 + 0.5) * step;
        u = &generator(r)?.scale(sign * step).exp() * &u;
        let s = j as f64 * step;
        let w = if j == 0 { 0.5 * step } else { step };
        rhs = &rhs + &(&kernel(t - s)? * &u).scale(Complex64::new(w, 0.0));
    }
    Ok(generator(t)?.max_abs_diff(&rhs))
}

/// Functional fixed point at `t` with `n` and `2n` steps; the residual of the
/// finer grid is compared with the tolerance and the halving ratio is
/// reported.
pub fn check_functional_fixed_point(
    family: &dyn SuperOpFamily,
    theta: &ModelParams,
    t: f64,
    n: usize,
    picture: Picture,
    opts: &CheckOptions,
) -> ResidualReport {
    let outcome = (|| {
        let (kernel_theta, _) = opts.rhs_same(family, theta);
        let coarse = functional_fixed_point_residual(family, theta, &kernel_theta, t, n, picture)?;
        let fine = functional_fixed_point_residual(family, theta, &kernel_theta, t, 2 * n, picture)?;
        Ok((fine, json!({ "steps": [n, 2 * n], "residuals": [coarse, fine], "ratio": coarse / fine })))
    })();
    let id = match picture {
        Picture::Schroedinger => "functional_fixed_point",
        Picture::Heisenberg => "functional_fixed_point_heisenberg",
    };
    finish(id, theta, vec![SamplePoint::Time(t)], opts.tol, outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::RlmFamily;

    fn theta() -> ModelParams {
        ModelParams::new(0.5, 0.0, 0.25, 1.0).unwrap()
    }

    #[test]
    fn stationary_fixed_point_both_paths() {
        let fam = RlmFamily::new();
        let r = check_fixed_point_stationary(&fam, &theta(), &CheckOptions::new(1e-6));
        assert!(r.pass, "{r:?}");
        let bad = check_fixed_point_stationary(&fam, &theta(), &CheckOptions::new(1e-6).with_rhs_gamma_factor(1.01));
        assert!(!bad.pass);
    }

    #[test]
    fn functional_fixed_point_converges_quadratically() {
        let fam = RlmFamily::new();
        let th = theta();
        let s = check_functional_fixed_point(&fam, &th, 2.0, 400, Picture::Schroedinger, &CheckOptions::new(1e-4));
        let ratio = s.witness.as_ref().unwrap()["ratio"].as_f64().unwrap();
        assert!((3.5..=4.5).contains(&ratio), "{s:?}");
        assert!(s.pass, "{s:?}");
        let h = check_functional_fixed_point(&fam, &th, 2.0, 400, Picture::Heisenberg, &CheckOptions::new(1e-4));
        assert!(h.max_residual < 10.0 * s.max_residual, "{h:?}");
    }
}
