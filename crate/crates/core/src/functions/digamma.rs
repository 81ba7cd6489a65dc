use std::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

/// `B_{2k} / (2k)` for k = 1..7.
const ASYMPTOTIC: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
];

/// `cot(w)` evaluated without overflow for large `|Im w|`.
fn cot(w: Complex64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    if w.im > 0.0 {
        let e = (2.0 * i * w).exp();
        i * (e + 1.0) / (e - 1.0)
    } else {
        let e = (-2.0 * i * w).exp();
        i * (1.0 + e) / (1.0 - e)
    }
}

/// Complex digamma function `ψ(z) = Γ'(z)/Γ(z)`.
pub fn digamma(z: Complex64) -> Result<Complex64> {
    if z.im.abs() < 1e-12 && z.re <= 1e-12 && (z.re - z.re.round()).abs() < 1e-12 {
        return Err(Error::Pole(format!("digamma pole at {z}")));
    }
    if z.re < 0.0 {
        // ψ(z) = ψ(1 − z) − π cot(πz)
        return Ok(digamma(1.0 - z)? - PI * cot(PI * z));
    }
    let mut z = z;
    let mut acc = Complex64::new(0.0, 0.0);
    while z.re < 10.0 {
        acc -= 1.0 / z;
        z += 1.0;
    }
    let inv2 = 1.0 / (z * z);
    let mut series = Complex64::new(0.0, 0.0);
    let mut power = inv2;
    for c in ASYMPTOTIC {
        series += c * power;
        power *= inv2;
    }
    Ok(acc + z.ln() - 0.5 / z - series)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

    #[test]
    fn special_values() {
        let one = digamma(Complex64::new(1.0, 0.0)).unwrap();
        assert!((one.re + EULER_GAMMA).abs() < 1e-14 && one.im == 0.0);
        let half = digamma(Complex64::new(0.5, 0.0)).unwrap();
        assert!((half.re + EULER_GAMMA + 2.0 * 2f64.ln()).abs() < 1e-14);
        // Im ψ(1 + iy) = −1/(2y) + (π/2) coth(πy)
        let y: f64 = 0.7;
        let v = digamma(Complex64::new(1.0, y)).unwrap();
        let expected = -0.5 / y + 0.5 * PI / (PI * y).tanh();
        assert!((v.im - expected).abs() < 1e-13);
        // Im ψ(½ + iy) = (π/2) tanh(πy)
        let v = digamma(Complex64::new(0.5, y)).unwrap();
        assert!((v.im - 0.5 * PI * (PI * y).tanh()).abs() < 1e-13);
    }

    #[test]
    fn recurrence_and_reflection() {
        for &(re, im) in &[(0.3, 0.2), (-2.7, 1.1), (-0.4, -3.0), (5.5, -40.0), (-30.2, 0.01), (0.01, 0.0)] {
            let z = Complex64::new(re, im);
            let lhs = digamma(z + 1.0).unwrap() - digamma(z).unwrap();
            assert!((lhs - 1.0 / z).norm() < 1e-11 * (1.0 / z).norm().max(1.0), "z = {z}");
        }
    }

    #[test]
    fn poles_rejected() {
        for n in 0..4 {
            assert!(digamma(Complex64::new(-(n as f64), 0.0)).is_err());
        }
        assert!(digamma(Complex64::new(-1.0, 1e-6)).is_ok());
    }

    #[test]
    fn large_imaginary_part_is_finite() {
        let v = digamma(Complex64::new(-3.3, 800.0)).unwrap();
        assert!(v.re.is_finite() && v.im.is_finite());
        assert!((v.im - 0.5 * PI).abs() < 1e-2);
    }
}
