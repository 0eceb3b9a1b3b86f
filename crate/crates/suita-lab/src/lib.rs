//! Closed-form Bergman kernels and Kobayashi-indicatrix volumes for two
//! families of convex ellipsoids in C^2, together with independent numerical
//! oracles (parameter-space quadrature, Reinhardt-shadow integration and a
//! Monte-Carlo gauge method) that cross-validate every closed form.
//!
//! The two domains are
//!
//! * `Ω_m = { |z1|^{2m} + |z2|^2 < 1 }` with `m ≥ 1/2`, evaluated at `w = (b, 0)`,
//! * the l¹-ball `{ |z1| + |z2| < 1 }`, evaluated on the diagonal `w = (b, b)`
//!   (plus an off-diagonal `(b, 0)` fixture).
//!
//! On top of the volume formulas the crate computes the invariant
//! `F(w) = (K(w) λ(I(w)))^{1/2}`, scans and maximizes it, verifies the bound
//! `1 ≤ F ≤ 4`, and probes the regularity breakdown of the diagonal volume
//! function at `b = 1/4` (it is C³ but not C^{3,1} there).

pub mod analysis;
pub mod bergman;
pub mod cli;
pub mod closed_form;
pub mod domain;
pub mod error;
pub mod geodesics;
pub mod jacobian;
pub mod oracle;
pub mod quadrature;

pub use domain::{Branch, ComplexPair, EllipsoidSpec, Method, VolumeResult};
pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
