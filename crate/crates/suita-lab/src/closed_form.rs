//! Closed-form indicatrix volumes: the exponent family `Ω_m` at `(b, 0)`
//! (generic exponent plus the printed `m = 2/3` and `m = 2` special cases),
//! the l¹-ball on the diagonal `(b, b)` (polynomial branch for `b ≤ 1/4`,
//! arccos/arctan branch for `b > 1/4`), the per-case component volumes, and
//! the off-diagonal l¹ fixture at `(b, 0)`.
//!
//! Polynomial coefficients are integers (exact in f64); the `π`-power factor
//! is applied as the last step so that branch-matching tests can run at the
//! 1e-13·π² level.

use std::f64::consts::PI;

use crate::domain::{Branch, EllipsoidSpec, VolumeResult};
use crate::error::Error;

const PI2: f64 = PI * PI;

/// Horner evaluation with ascending integer coefficients.
fn poly(coeffs: &[i64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c as f64)
}

fn check_m(m: f64) -> Result<(), Error> {
    if !(m >= 0.5) || !m.is_finite() {
        return Err(Error::Param(format!("exponent m = {m} must be >= 1/2")));
    }
    Ok(())
}

/// Generic Theorem-1 volume, valid away from the singular exponents 2/3 and 2.
fn volume_em_generic(m: f64, b: f64) -> f64 {
    PI2 * (-(m - 1.0) / (2.0 * m * (3.0 * m - 2.0) * (3.0 * m - 1.0)) * b.powf(6.0 * m + 2.0)
        - 3.0 * (m - 1.0) / (2.0 * m * (m - 2.0) * (m + 1.0)) * b.powf(2.0 * m + 2.0)
        + m / (2.0 * (m - 2.0) * (3.0 * m - 2.0)) * b.powi(6)
        + 3.0 * m / (3.0 * m - 1.0) * b.powi(4)
        - (4.0 * m - 1.0) / (2.0 * m) * b.powi(2)
        + m / (m + 1.0))
}

/// Printed special case `m = 2/3`.
fn volume_em_two_thirds(b: f64) -> f64 {
    if b == 0.0 {
        return PI2 / 80.0 * 32.0;
    }
    PI2 / 80.0
        * (-65.0 * b.powi(6) + 40.0 * b.powi(6) * b.ln() + 160.0 * b.powi(4)
            - 27.0 * b.powf(10.0 / 3.0)
            - 100.0 * b.powi(2)
            + 32.0)
}

/// Printed special case `m = 2`.
fn volume_em_two(b: f64) -> f64 {
    if b == 0.0 {
        return PI2 / 240.0 * 160.0;
    }
    PI2 / 240.0
        * (-3.0 * b.powi(14) - 25.0 * b.powi(6) - 120.0 * b.powi(6) * b.ln() + 288.0 * b.powi(4)
            - 420.0 * b.powi(2)
            + 160.0)
}

const SINGULAR_M: [f64; 2] = [2.0 / 3.0, 2.0];
const BLEND_INNER: f64 = 1e-9;
const BLEND_OUTER: f64 = 1e-4;

/// `λ(I_{Ω_m}((b,0)))` per Theorem 1.
///
/// Within `1e-4` of a singular exponent the generic formula loses digits by
/// cancellation, so the value is a quadratic interpolation through
/// `(m0 - 1e-4, generic)`, `(m0, special)`, `(m0 + 1e-4, generic)`; within
/// `1e-9` the printed special formula is returned directly.
pub fn volume_em(m: f64, b: f64) -> Result<VolumeResult, Error> {
    check_m(m)?;
    let spec = EllipsoidSpec::ExponentFamily { m };
    spec.check_b(b)?;

    for (idx, &m0) in SINGULAR_M.iter().enumerate() {
        let d = m - m0;
        if d.abs() <= BLEND_INNER {
            let value = if idx == 0 { volume_em_two_thirds(b) } else { volume_em_two(b) };
            return Ok(VolumeResult::closed(spec, b, value, Branch::SpecialM));
        }
        if d.abs() < BLEND_OUTER {
            let special = if idx == 0 { volume_em_two_thirds(b) } else { volume_em_two(b) };
            let lo = volume_em_generic(m0 - BLEND_OUTER, b);
            let hi = volume_em_generic(m0 + BLEND_OUTER, b);
            // quadratic through (-h, lo), (0, special), (+h, hi)
            let h = BLEND_OUTER;
            let c1 = (hi - lo) / (2.0 * h);
            let c2 = (hi - 2.0 * special + lo) / (2.0 * h * h);
            let value = special + c1 * d + c2 * d * d;
            return Ok(VolumeResult::closed(spec, b, value, Branch::SpecialM));
        }
    }
    Ok(VolumeResult::closed(spec, b, volume_em_generic(m, b), Branch::GenericM))
}

/// Printed evaluation of `λ(I_12)` for `Ω_m` (eq. valid away from m = 2/3, 2).
fn i12_em(m: f64, b: f64) -> f64 {
    PI2 * ((1.0 - 2.0 * m).powi(2) / (m * m * (3.0 * m - 1.0) * (3.0 * m - 2.0))
        * b.powf(6.0 * m + 2.0)
        - 3.0 / (m * m * (m + 1.0) * (m - 2.0)) * b.powf(2.0 * m + 2.0)
        - 3.0 / (2.0 * m * m) * b.powf(4.0 * m + 2.0)
        + m / (2.0 * (m - 2.0) * (3.0 * m - 2.0)) * b.powi(6)
        + 3.0 * m / (3.0 * m - 1.0) * b.powi(4)
        - (4.0 * m * m - m + 1.0) / (2.0 * m * m) * b.powi(2)
        + m / (m + 1.0))
}

/// `λ(I_2) = π² b² (1-b^{2m})³ / (2m²)` for `Ω_m`.
pub fn i2_em(m: f64, b: f64) -> f64 {
    PI2 * b * b * (1.0 - b.powf(2.0 * m)).powi(3) / (2.0 * m * m)
}

/// The two geodesic-family components `(λ(I_12), λ(I_2))` of the Theorem-1
/// volume. Requires `m` at least 1e-9 away from the singular exponents.
pub fn volume_em_components(m: f64, b: f64) -> Result<(f64, f64), Error> {
    check_m(m)?;
    EllipsoidSpec::ExponentFamily { m }.check_b(b)?;
    for &m0 in &SINGULAR_M {
        if (m - m0).abs() <= BLEND_INNER {
            return Err(Error::Param(format!(
                "component split is printed only for m away from {m0}"
            )));
        }
    }
    Ok((i12_em(m, b), i2_em(m, b)))
}

// ---------------------------------------------------------------------------
// l1-ball diagonal, Theorem 2
// ---------------------------------------------------------------------------

/// (b14) polynomial, ascending coefficients of `6 λ / π²`.
const CHI_MINUS_POLY: [i64; 9] = [1, 0, -8, -16, 76, -80, 80, -64, 30];

/// Polynomial branch `χ_-`, printed for `b ≤ 1/4` (analytic continuation is
/// literal evaluation beyond 1/4).
pub fn chi_minus(b: f64) -> f64 {
    PI2 / 6.0 * poly(&CHI_MINUS_POLY, b)
}

/// Principal arctan of `num/den` for `den ≥ 0`, giving `±π/2` when `den = 0`.
/// Keeps the `b → 1/4⁺` limits of the arccos/arctan branch finite.
fn atan_ratio(num: f64, den: f64) -> f64 {
    num.atan2(den)
}

/// `arccos(-1 + (4b-1)/(2b²))` evaluated from `u = 4b - 1` with clamping.
fn arccos_branch(b: f64) -> f64 {
    let u = 4.0 * b - 1.0;
    let arg = (-1.0 + u / (2.0 * b * b)).clamp(-1.0, 1.0);
    arg.acos()
}

const P10: [i64; 11] = [1, -18, 89, -144, -76, 424, -260, -176, 238, -124, 30];
const P7: [i64; 8] = [37, -305, 922, -1214, 754, -554, 444, -180];

/// Arccos/arctan branch `χ_+` of Theorem 2, printed for `1/4 ≤ b < 1/2`.
pub fn chi_plus(b: f64) -> f64 {
    let s = (4.0 * b - 1.0).max(0.0).sqrt();
    let omb = 1.0 - b;
    let t1 = 2.0 * PI2 * b * (1.0 - 2.0 * b).powi(3) * (-2.0 * b.powi(3) + 3.0 * b * b - 6.0 * b + 4.0)
        / (3.0 * omb * omb);
    let t2 = PI * poly(&P10, b) / (6.0 * omb * omb) * arccos_branch(b);
    let t3 = PI * (1.0 - 2.0 * b) * poly(&P7, b) / (72.0 * omb) * s;
    let t4 = 4.0 * PI * b * (1.0 - 2.0 * b).powi(4) * (7.0 * b * b + 2.0 * b - 2.0) / (3.0 * omb * omb)
        * s.atan();
    let t5 = 4.0 * PI * b * b * (1.0 - 2.0 * b).powi(4) * (2.0 - b) / (omb * omb)
        * atan_ratio(1.0 - 3.0 * b, omb * s);
    t1 + t2 + t3 + t4 + t5
}

/// Alternative representation of `χ_+` on `(1/4, 1 - 1/√2)`, used as a
/// validation fixture (the arctan denominator `2b² - 4b + 1` vanishes at the
/// right endpoint).
pub fn chi_plus_alternative(b: f64) -> Result<f64, Error> {
    let hi = 1.0 - 1.0 / std::f64::consts::SQRT_2;
    if !(b > 0.25 && b < hi) {
        return Err(Error::Param(format!(
            "alternative representation printed only on (1/4, {hi}); got {b}"
        )));
    }
    let s = (4.0 * b - 1.0).sqrt();
    let omb = 1.0 - b;
    let t1 = PI2 / 6.0 * poly(&CHI_MINUS_POLY, b);
    let t2 = PI * (1.0 - 2.0 * b) * poly(&P7, b) / (72.0 * omb) * s;
    let t3 = 4.0 * PI * b * (1.0 - 2.0 * b).powi(4) * (7.0 * b * b + 2.0 * b - 2.0) / (3.0 * omb * omb)
        * s.atan();
    let t4 = PI * poly(&P10, b) / (6.0 * omb * omb)
        * ((1.0 - 2.0 * b) * s / (2.0 * b * b - 4.0 * b + 1.0)).atan();
    let t5 = 4.0 * PI * b * b * (1.0 - 2.0 * b).powi(4) * (2.0 - b) / (omb * omb)
        * (omb * s / (1.0 - 3.0 * b)).atan();
    Ok(t1 + t2 + t3 - t4 - t5)
}

/// `λ(I_Ω((b,b)))` for the l¹-ball per Theorem 2.
pub fn volume_l1_diag(b: f64) -> Result<VolumeResult, Error> {
    let spec = EllipsoidSpec::L1Diagonal;
    spec.check_b(b)?;
    let (value, branch) = if b <= 0.25 {
        (chi_minus(b), Branch::BelowQuarter)
    } else {
        (chi_plus(b), Branch::AboveQuarter)
    };
    Ok(VolumeResult::closed(spec, b, value, branch))
}

// Component volumes of the Theorem-2 decomposition λ = λ(I_0) + 2λ(I_1) + λ(I_12).

const I12_BELOW: [i64; 9] = [1, 0, -32, 80, -12, -112, 176, -192, 110];

/// `λ(I_12)`, printed polynomial for `b ≤ 1/4`.
pub fn i12_l1(b: f64) -> f64 {
    if b <= 0.25 {
        PI2 / 6.0 * poly(&I12_BELOW, b)
    } else {
        let s = (4.0 * b - 1.0).sqrt();
        PI / 72.0
            * poly(&[37, -140, 270, -528, 530, -712, 660], b)
            * (1.0 - 2.0 * b)
            * s
            + PI / 6.0 * poly(&I12_BELOW, b) * arccos_branch(b)
    }
}

/// `λ(I_1)` (the `A = {1}` case; the `A = {2}` case contributes the same
/// volume once more).
pub fn i1_l1(b: f64) -> f64 {
    if b <= 0.25 {
        2.0 * PI2 / 3.0 * (1.0 - b) * b * b * poly(&[3, -9, 2, 6, -6, 10], b)
    } else {
        let s = (4.0 * b - 1.0).sqrt();
        let omb = 1.0 - b;
        let t1 = -PI2 * b * poly(&[-4, 21, -6, -166, 414, -375, 84, 54, -36, 10], b)
            / (3.0 * omb * omb);
        let t2 = PI * b * (1.0 - 2.0 * b) * poly(&[-8, 32, -26, -19, 43, -58, 30], b)
            / (9.0 * omb)
            * s;
        let t3 = 4.0 * PI * (1.0 - 2.0 * b).powi(4) * b * (2.0 * b * b - 2.0 * b - 1.0)
            / (3.0 * omb * omb)
            * ((3.0 * b - 1.0) / (2.0 * b.powf(1.5))).clamp(-1.0, 1.0).acos();
        let t4 = 2.0 / 3.0 * PI * omb * b * b * poly(&[3, -9, 2, 6, -6, 10], b)
            * atan_ratio(2.0 * b * b - 4.0 * b + 1.0, (1.0 - 2.0 * b) * s);
        t1 + t2 + t3 + t4
    }
}

/// `λ(I_0)` (the `A = ∅` case); zero for `b ≤ 1/4`.
pub fn i0_l1(b: f64) -> f64 {
    if b <= 0.25 {
        return 0.0;
    }
    let s = (4.0 * b - 1.0).sqrt();
    let omb = 1.0 - b;
    let q3 = (1.0 - 2.0 * b).powi(3);
    let q4 = (1.0 - 2.0 * b).powi(4);
    2.0 * PI2 * b * b * q3 * (-6.0 * b * b + 9.0 * b - 2.0) / (omb * omb)
        - 8.0 * PI * b.powi(3) * q3 / omb * arccos_branch(b)
        + 4.0 * PI * b * b * q4 * (b + 2.0) / (omb * omb) * s.atan()
        + 4.0 * PI * b * b * q4 * (2.0 - b) / (omb * omb) * atan_ratio(1.0 - 3.0 * b, omb * s)
}

/// The `(I_12, I_1, I_0)` components; they recombine as `I_12 + 2 I_1 + I_0`.
pub fn volume_l1_diag_components(b: f64) -> Result<(f64, f64, f64), Error> {
    if !(b > 0.0 && b < 0.5) {
        return Err(Error::Param(format!("b = {b} outside (0, 1/2)")));
    }
    Ok((i12_l1(b), i1_l1(b), i0_l1(b)))
}

/// Off-diagonal l¹-ball volume `λ(I_Ω((b,0))) = π²/6 (1-b)^4 ((1-b)^4 + 8b)`.
pub fn volume_l1_offdiag(b: f64) -> Result<f64, Error> {
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::Param(format!("b = {b} outside (0, 1)")));
    }
    let q = (1.0 - b).powi(4);
    Ok(PI2 / 6.0 * q * (q + 8.0 * b))
}

/// One-sided derivative at 1/4, with exact rational value when finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuarterDerivative {
    /// `(p/q)·π²`
    Exact { num: i64, den: i64 },
    Divergent,
}

impl QuarterDerivative {
    pub fn value(&self) -> Option<f64> {
        match self {
            QuarterDerivative::Exact { num, den } => Some(*num as f64 / *den as f64 * PI2),
            QuarterDerivative::Divergent => None,
        }
    }
}

/// The paper's table of one-sided derivatives of `b ↦ λ(I_Ω((b,b)))` at 1/4:
/// orders 0..4, `(left, right)`.
pub fn chi_derivatives_at_quarter() -> [(QuarterDerivative, QuarterDerivative); 5] {
    use QuarterDerivative::*;
    [
        (Exact { num: 15887, den: 196608 }, Exact { num: 15887, den: 196608 }),
        (Exact { num: -3521, den: 6144 }, Exact { num: -3521, den: 6144 }),
        (Exact { num: -215, den: 1536 }, Exact { num: -215, den: 1536 }),
        (Exact { num: 1785, den: 64 }, Exact { num: 1785, den: 64 }),
        (Exact { num: 1549, den: 16 }, Divergent),
    ]
}
