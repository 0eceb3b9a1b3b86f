use num_complex::Complex64;
use serde::Serialize;

use crate::error::Error;

/// A point or tangent vector in C^2, stored as two complex scalars.
pub type ComplexPair = (Complex64, Complex64);

/// Which convex ellipsoid a computation refers to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EllipsoidSpec {
    /// `Ω_m = { |z1|^{2m} + |z2|^2 < 1 }`, `m ≥ 1/2`, evaluated at `w = (b, 0)`.
    ExponentFamily { m: f64 },
    /// The l¹-ball `{ |z1| + |z2| < 1 } = E(1/2, 1/2)` on the diagonal `w = (b, b)`.
    L1Diagonal,
    /// The l¹-ball off the diagonal, at `w = (b, 0)`.
    L1OffDiagonal,
}

impl EllipsoidSpec {
    /// Validity interval for the base-point parameter `b`.
    pub fn b_range(&self) -> (f64, f64) {
        match self {
            EllipsoidSpec::ExponentFamily { .. } => (0.0, 1.0),
            EllipsoidSpec::L1Diagonal => (0.0, 0.5),
            EllipsoidSpec::L1OffDiagonal => (0.0, 1.0),
        }
    }

    pub fn check_b(&self, b: f64) -> Result<(), Error> {
        let (lo, hi) = self.b_range();
        if !(b >= lo && b < hi) {
            return Err(Error::Param(format!(
                "b = {b} outside [{lo}, {hi}) for {self:?}"
            )));
        }
        Ok(())
    }
}

/// How a volume value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    Shadow,
    Gauge,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::ClosedForm => "closed-form",
            Method::Quadrature => "quadrature",
            Method::Shadow => "shadow",
            Method::Gauge => "gauge",
        };
        f.write_str(s)
    }
}

/// Which closed-form branch produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// Theorem-2 polynomial branch, `b ≤ 1/4`.
    BelowQuarter,
    /// Theorem-2 arccos/arctan branch, `b > 1/4`.
    AboveQuarter,
    /// One of the printed special exponents `m = 2/3` or `m = 2`.
    SpecialM,
    /// Generic Theorem-1 exponent.
    GenericM,
    /// Not branch-dependent (oracles, off-diagonal formula).
    None,
}

/// A 4-dimensional Lebesgue volume together with its provenance.
#[derive(Debug, Clone, Copy)]
pub struct VolumeResult {
    pub value: f64,
    pub method: Method,
    pub branch: Branch,
    pub b: f64,
    pub spec: EllipsoidSpec,
    /// Error estimate; 0 for exact closed forms.
    pub err_est: f64,
}

impl VolumeResult {
    pub fn closed(spec: EllipsoidSpec, b: f64, value: f64, branch: Branch) -> Self {
        VolumeResult {
            value,
            method: Method::ClosedForm,
            branch,
            b,
            spec,
            err_est: 0.0,
        }
    }
}
