//! Bergman kernels on the diagonal for both ellipsoid families, and the
//! `Ω_m` automorphism used by the kernel transformation-rule test.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::domain::{ComplexPair, EllipsoidSpec};
use crate::error::Error;

const PI2: f64 = PI * PI;

/// Point validation for `Ω_m` (strictly interior).
fn check_interior_em(m: f64, w: ComplexPair) -> Result<(), Error> {
    if !(m >= 0.5) {
        return Err(Error::Param(format!("m = {m} must be >= 1/2")));
    }
    let s = w.0.norm().powf(2.0 * m) + w.1.norm_sqr();
    if !(s < 1.0) {
        return Err(Error::Domain(format!(
            "|w1|^(2m)+|w2|^2 = {s} is not < 1"
        )));
    }
    // guard for exp(log) evaluation of (1-|w2|^2)^(1/m)
    if 1.0 - w.1.norm_sqr() <= 1e-300 {
        return Err(Error::Domain("w2 too close to the unit circle".into()));
    }
    Ok(())
}

/// Bergman kernel of `Ω_m = {|z1|^{2m} + |z2|^2 < 1}` on the diagonal.
///
/// `K(w) = (1/π²) (1-|w2|²)^{1/m-2} [(1/m+1)(1-|w2|²)^{1/m} + (1/m-1)|w1|²]
///          / ((1-|w2|²)^{1/m} - |w1|²)³`.
pub fn kernel_em_point(m: f64, w: ComplexPair) -> Result<f64, Error> {
    check_interior_em(m, w)?;
    let s = 1.0 - w.1.norm_sqr();
    let a1 = w.0.norm_sqr();
    // powers via exp(log); s in (0,1]
    let s_pow = |e: f64| (e * s.ln()).exp();
    let num = (1.0 / m + 1.0) * s_pow(1.0 / m) + (1.0 / m - 1.0) * a1;
    let den = (s_pow(1.0 / m) - a1).powi(3);
    Ok(s_pow(1.0 / m - 2.0) * num / (PI2 * den))
}

/// `K_{Ω_m}((b,0)) = (m + 1 + (1-m) b²) / (π² m (1-b²)³)`.
pub fn kernel_em(m: f64, b: f64) -> Result<f64, Error> {
    if !(m >= 0.5) {
        return Err(Error::Param(format!("m = {m} must be >= 1/2")));
    }
    EllipsoidSpec::ExponentFamily { m }.check_b(b)?;
    Ok((m + 1.0 + (1.0 - m) * b * b) / (PI2 * m * (1.0 - b * b).powi(3)))
}

/// Bergman kernel of the l¹-ball `{|z1| + |z2| < 1}` on the diagonal.
pub fn kernel_l1_point(w: ComplexPair) -> Result<f64, Error> {
    let (r1, r2) = (w.0.norm(), w.1.norm());
    if !(r1 + r2 < 1.0) {
        return Err(Error::Domain(format!("|w1|+|w2| = {} is not < 1", r1 + r2)));
    }
    let q = r1 * r1 + r2 * r2;
    let p = r1 * r1 * r2 * r2;
    let num = 3.0 * (1.0 - q).powi(2) * (1.0 + q) + 4.0 * p * (5.0 - 3.0 * q);
    let den = ((1.0 - q).powi(2) - 4.0 * p).powi(3);
    Ok(2.0 / PI2 * num / den)
}

/// `K_Ω((b,b)) = 2 (3 - 6b² + 8b⁴) / (π² (1-4b²)³)` on the diagonal.
pub fn kernel_l1_diag(b: f64) -> Result<f64, Error> {
    EllipsoidSpec::L1Diagonal.check_b(b)?;
    Ok(2.0 * (3.0 - 6.0 * b * b + 8.0 * b.powi(4)) / (PI2 * (1.0 - 4.0 * b * b).powi(3)))
}

/// `K_Ω((b,0))` for the l¹-ball (off-diagonal fixture).
pub fn kernel_l1_offdiag(b: f64) -> Result<f64, Error> {
    EllipsoidSpec::L1OffDiagonal.check_b(b)?;
    kernel_l1_point((Complex64::new(b, 0.0), Complex64::new(0.0, 0.0)))
}

/// The holomorphic automorphism of `Ω_m`
///
/// `Φ(z) = ( e^{it} (1-|a|²)^{1/2m} / (1-āz2)^{1/m} · z1, (z2-a)/(1-āz2) )`
///
/// with `a ∈ Δ`, `t ∈ R`.
pub fn automorphism_em(
    m: f64,
    a: Complex64,
    t: f64,
    z: ComplexPair,
) -> Result<ComplexPair, Error> {
    if !(a.norm() < 1.0) {
        return Err(Error::Param(format!("|a| = {} must be < 1", a.norm())));
    }
    check_interior_em(m, z)?;
    let den = Complex64::new(1.0, 0.0) - a.conj() * z.1;
    // 1 - ā z2 has positive real part, so the principal power is fine
    let w1 = Complex64::from_polar(1.0, t) * (1.0 - a.norm_sqr()).powf(0.5 / m)
        / den.powf(1.0 / m)
        * z.0;
    let w2 = (z.1 - a) / den;
    Ok((w1, w2))
}

/// Complex Jacobian determinant of [`automorphism_em`]:
/// `det Φ'(z) = e^{it} (1-|a|²)^{1/2m + 1} / (1-āz2)^{1/m + 2}`.
///
/// The map is triangular in `z1`, so the determinant is the product of
/// `∂Φ1/∂z1` and `∂Φ2/∂z2`; the paper does not print it.
pub fn automorphism_jacobian_em(
    m: f64,
    a: Complex64,
    t: f64,
    z: ComplexPair,
) -> Result<Complex64, Error> {
    if !(a.norm() < 1.0) {
        return Err(Error::Param(format!("|a| = {} must be < 1", a.norm())));
    }
    let den = Complex64::new(1.0, 0.0) - a.conj() * z.1;
    Ok(Complex64::from_polar(1.0, t) * (1.0 - a.norm_sqr()).powf(0.5 / m + 1.0)
        / den.powf(1.0 / m + 2.0))
}
