//! The Jacobian lemma for maps `F(ζ, z) = ζ (f(z), g(z))` and the closed-form
//! `H` factors of each boundary chart.
//!
//! The real 4x4 Jacobian of `F` equals `|ζ|² H(z)` with
//!
//! ```text
//! H = |f|²(|g_z̄|² - |g_z|²) + |g|²(|f_z̄|² - |f_z|²)
//!     + 2 Re( f ḡ ( f̄_z g_z - f̄_z̄ g_z̄ ) )
//! ```
//!
//! For the radial `Ω_m` charts the chart parameter `r` relates to the complex
//! variable `z = r e^{it}` and the closed `H` carries the extra factor `r`
//! (so that the volume is `π² ∫ |H| dr`); the l¹ charts use their parameters
//! as the complex variable directly.

use num_complex::Complex64;

use crate::error::Error;
use crate::geodesics::{em_i12_gammas, em_i2_gammas, l1_i0_discriminant, BoundaryChart};

/// Values and Wirtinger derivatives of `(f, g)` at one point.
#[derive(Debug, Clone, Copy)]
pub struct WirtingerData {
    pub f: Complex64,
    pub g: Complex64,
    pub f_z: Complex64,
    pub f_zbar: Complex64,
    pub g_z: Complex64,
    pub g_zbar: Complex64,
}

impl WirtingerData {
    fn validate(&self) -> Result<(), Error> {
        let all = [self.f, self.g, self.f_z, self.f_zbar, self.g_z, self.g_zbar];
        if all.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Param("non-finite Wirtinger data".into()));
        }
        Ok(())
    }
}

/// `H` per the lemma; the real Jacobian of `(ζ, z) ↦ ζ(f, g)` is `|ζ|² H`.
pub fn h_factor(d: &WirtingerData) -> Result<f64, Error> {
    d.validate()?;
    Ok(d.f.norm_sqr() * (d.g_zbar.norm_sqr() - d.g_z.norm_sqr())
        + d.g.norm_sqr() * (d.f_zbar.norm_sqr() - d.f_z.norm_sqr())
        + 2.0
            * (d.f * d.g.conj() * (d.f_z.conj() * d.g_z - d.f_zbar.conj() * d.g_zbar)).re)
}

/// Central-difference Wirtinger derivatives of a complex-valued map, with
/// step `1e-6 · max(1, |z|)`.
pub fn wirtinger_numeric<F: Fn(Complex64) -> Complex64>(
    f: &F,
    z: Complex64,
) -> (Complex64, Complex64) {
    let h = 1e-6 * z.norm().max(1.0);
    let du = (f(z + Complex64::new(h, 0.0)) - f(z - Complex64::new(h, 0.0))) / (2.0 * h);
    let dv = (f(z + Complex64::new(0.0, h)) - f(z - Complex64::new(0.0, h))) / (2.0 * h);
    let i = Complex64::new(0.0, 1.0);
    ((du - i * dv) / 2.0, (du + i * dv) / 2.0)
}

/// Assembles [`WirtingerData`] for `(f, g)` numerically at `z`.
pub fn wirtinger_data_numeric<F, G>(f: &F, g: &G, z: Complex64) -> WirtingerData
where
    F: Fn(Complex64) -> Complex64,
    G: Fn(Complex64) -> Complex64,
{
    let (f_z, f_zbar) = wirtinger_numeric(f, z);
    let (g_z, g_zbar) = wirtinger_numeric(g, z);
    WirtingerData {
        f: f(z),
        g: g(z),
        f_z,
        f_zbar,
        g_z,
        g_zbar,
    }
}

/// Closed-form `H` of a chart at parameters `(u, v)`.
///
/// `EmI12`/`EmI2` return `γ_1 γ_2 (γ_1 γ_2' - γ_1' γ_2)` (volume element per
/// `dr`); the l¹ charts return the lemma `H` per parameter area. For `L1I0`
/// the value diverges like `1/√D` toward the `D = 0` curve (integrable);
/// `D ≤ 0` is reported as a domain error.
pub fn h_closed(chart: &BoundaryChart, u: f64, v: f64) -> Result<f64, Error> {
    match *chart {
        BoundaryChart::EmI12 { m, b } => {
            if !(u > b && u < 1.0) {
                return Err(Error::Domain(format!("r = {u} outside ({b}, 1)")));
            }
            let r = u;
            let w = (b / r).powf(2.0 * m);
            let t1 = w * (-m * r * r + m - 1.0) + 1.0;
            let t2 = (m - 1.0) * r * r + m - (2.0 * m - 1.0) * r * r * w;
            let t3 = r * r * w + (m - 1.0) * r * r - m;
            Ok(-(b * b / (m * m)) / (r * r * r) * t1 * t2 * t3)
        }
        BoundaryChart::EmI2 { m, b } => {
            if !(u > 0.0 && u < 1.0) {
                return Err(Error::Domain(format!("r = {u} outside (0, 1)")));
            }
            Ok(-b * b * (1.0 - b.powf(2.0 * m)).powi(3) * u / (m * m))
        }
        BoundaryChart::L1I12 { b } => {
            if !chart.contains(u, v) {
                return Err(Error::Domain(format!("({u}, {v}) outside L1I12 domain")));
            }
            let (x, cy) = (u, v.cos());
            Ok(b * b
                * (2.0 * b * b * (1.0 + cy) - 1.0)
                * (4.0 * b.powi(3) * cy * cy + 4.0 * b.powi(3) * cy
                    - 2.0 * b * b * x * (1.0 + cy)
                    + b * x * x
                    - x
                    + 2.0 * b))
        }
        BoundaryChart::L1I1 { b } => {
            if !chart.contains(u, v) {
                return Err(Error::Domain(format!("({u}, {v}) outside L1I1 domain")));
            }
            let (x, y) = (u, v);
            let s = x * x + y * y;
            let a1 = b * b * (1.0 + 2.0 * x) - (1.0 - b) * (1.0 + b * s);
            let b1 = -1.0 + 2.0 * b + b.powi(3) - 2.0 * b * b * (1.0 - b) * x
                + b * (1.0 - b).powi(2) * s;
            Ok(4.0 * (1.0 - b) * b * b * a1 * b1)
        }
        BoundaryChart::L1I0 { b } => {
            let d = l1_i0_discriminant(b, u, v);
            if d <= 0.0 {
                return Err(Error::Domain(
                    "D <= 0: singular edge of the A = {} region".into(),
                ));
            }
            if !chart.contains(u, v) {
                return Err(Error::Domain(format!("({u}, {v}) outside L1I0 domain")));
            }
            Ok(16.0 * b.powi(3) * (1.0 - 2.0 * b).powi(3) / (1.0 - b)
                * (1.0 + b.powf(1.5) * u / d.sqrt()))
        }
    }
}

/// Finite-difference 4x4 real Jacobian determinant of
/// `(ζ, z) ↦ ζ (f(z), g(z))` at `(ζ, z)`, for checking the lemma.
pub fn fd_jacobian_det<F, G>(f: &F, g: &G, zeta: Complex64, z: Complex64) -> f64
where
    F: Fn(Complex64) -> Complex64,
    G: Fn(Complex64) -> Complex64,
{
    let map = |v: [f64; 4]| -> [f64; 4] {
        let zt = Complex64::new(v[0], v[1]);
        let zz = Complex64::new(v[2], v[3]);
        let w1 = zt * f(zz);
        let w2 = zt * g(zz);
        [w1.re, w1.im, w2.re, w2.im]
    };
    let x0 = [zeta.re, zeta.im, z.re, z.im];
    let h = 1e-5;
    let mut jac = [[0.0f64; 4]; 4];
    for col in 0..4 {
        let mut xp = x0;
        let mut xm = x0;
        xp[col] += h;
        xm[col] -= h;
        let fp = map(xp);
        let fm = map(xm);
        for row in 0..4 {
            jac[row][col] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    det4(&jac)
}

/// Cofactor expansion of a 4x4 determinant.
pub fn det4(m: &[[f64; 4]; 4]) -> f64 {
    let det3 = |a: [[f64; 3]; 3]| -> f64 {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let mut acc = 0.0;
    for col in 0..4 {
        let mut minor = [[0.0f64; 3]; 3];
        for (i, row) in (1..4).enumerate() {
            let mut k = 0;
            for c0 in 0..4 {
                if c0 == col {
                    continue;
                }
                minor[i][k] = m[row][c0];
                k += 1;
            }
        }
        let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * m[0][col] * det3(minor);
    }
    acc
}

/// The chart's `(f, g)` as functions of its complex parameter, plus the
/// factor relating `h_closed` to the lemma `H` (the radial charts carry `r`).
pub fn chart_complex_repr(
    chart: &BoundaryChart,
    u: f64,
    v: f64,
) -> (
    Box<dyn Fn(Complex64) -> Complex64>,
    Box<dyn Fn(Complex64) -> Complex64>,
    Complex64,
    f64,
) {
    match *chart {
        BoundaryChart::EmI12 { m, b } => {
            let f = move |z: Complex64| {
                let r = z.norm();
                Complex64::from(em_i12_gammas(m, b, r).0) * z / r
            };
            let g = move |z: Complex64| Complex64::from(em_i12_gammas(m, b, z.norm()).1);
            (Box::new(f), Box::new(g), Complex64::from_polar(u, 0.3), u)
        }
        BoundaryChart::EmI2 { m, b } => {
            let c = b * (1.0 - b.powf(2.0 * m)) / m;
            let f = move |z: Complex64| c * z;
            let g = move |z: Complex64| Complex64::from(em_i2_gammas(m, b, z.norm()).1);
            (Box::new(f), Box::new(g), Complex64::from_polar(u, 1.1), u)
        }
        BoundaryChart::L1I12 { b } => {
            let f = move |z: Complex64| crate::geodesics::l1_i12_fg(b, z.re, z.im).0;
            let g = move |z: Complex64| crate::geodesics::l1_i12_fg(b, z.re, z.im).1;
            (Box::new(f), Box::new(g), Complex64::new(u, v), 1.0)
        }
        BoundaryChart::L1I1 { b } => {
            let f = move |z: Complex64| crate::geodesics::l1_i1_fg(b, z.re, z.im).0;
            let g = move |z: Complex64| crate::geodesics::l1_i1_fg(b, z.re, z.im).1;
            (Box::new(f), Box::new(g), Complex64::new(u, v), 1.0)
        }
        BoundaryChart::L1I0 { b } => {
            let q_of = move |z: Complex64| {
                let d = l1_i0_discriminant(b, z.re, z.im).max(0.0);
                (b.powf(1.5) * z.re + d.sqrt()) / (b.sqrt() * (1.0 - b))
            };
            let f = move |z: Complex64| crate::geodesics::l1_i0_fg(b, q_of(z), z.re, z.im).0;
            let g = move |z: Complex64| crate::geodesics::l1_i0_fg(b, q_of(z), z.re, z.im).1;
            (Box::new(f), Box::new(g), Complex64::new(u, v), 1.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn h_factor_simple_cases() {
        // f = z, g = 1: only |g|^2 (|f_zbar|^2 - |f_z|^2) survives -> -1
        let d = WirtingerData {
            f: c(0.37, 0.11),
            g: c(1.0, 0.0),
            f_z: c(1.0, 0.0),
            f_zbar: c(0.0, 0.0),
            g_z: c(0.0, 0.0),
            g_zbar: c(0.0, 0.0),
        };
        assert_eq!(h_factor(&d).unwrap(), -1.0);
        // symmetric case f = 1, g = z
        let d = WirtingerData {
            f: c(1.0, 0.0),
            g: c(-0.2, 0.8),
            f_z: c(0.0, 0.0),
            f_zbar: c(0.0, 0.0),
            g_z: c(1.0, 0.0),
            g_zbar: c(0.0, 0.0),
        };
        assert_eq!(h_factor(&d).unwrap(), -1.0);
    }

    #[test]
    fn h_factor_rejects_nan() {
        let d = WirtingerData {
            f: c(f64::NAN, 0.0),
            g: c(1.0, 0.0),
            f_z: c(0.0, 0.0),
            f_zbar: c(0.0, 0.0),
            g_z: c(0.0, 0.0),
            g_zbar: c(0.0, 0.0),
        };
        assert!(h_factor(&d).is_err());
    }

    #[test]
    fn h_factor_degree_four_homogeneity() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let mut rand_c = || c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            let d = WirtingerData {
                f: rand_c(),
                g: rand_c(),
                f_z: rand_c(),
                f_zbar: rand_c(),
                g_z: rand_c(),
                g_zbar: rand_c(),
            };
            let s = 1.0 + 2.0 * rng.gen::<f64>();
            let scaled = WirtingerData {
                f: s * d.f,
                g: s * d.g,
                f_z: s * d.f_z,
                f_zbar: s * d.f_zbar,
                g_z: s * d.g_z,
                g_zbar: s * d.g_zbar,
            };
            let h0 = h_factor(&d).unwrap();
            let h1 = h_factor(&scaled).unwrap();
            assert!((h1 - s.powi(4) * h0).abs() < 1e-12 * h0.abs().max(1.0));
        }
    }

    /// |zeta|^2 |H| equals the finite-difference 4x4 real Jacobian of
    /// (zeta, z) -> zeta (f(z), g(z)) for random holomorphic-ish pairs.
    #[test]
    fn lemma_matches_fd_determinant_random_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..40 {
            // random low-degree polynomial parts in z and zbar
            let coef: Vec<Complex64> = (0..8)
                .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let f = {
                let c0 = coef[0];
                let c1 = coef[1];
                let c2 = coef[2];
                let c3 = coef[3];
                move |z: Complex64| c0 + c1 * z + c2 * z * z + c3 * z.conj()
            };
            let g = {
                let c4 = coef[4];
                let c5 = coef[5];
                let c6 = coef[6];
                let c7 = coef[7];
                move |z: Complex64| c4 + c5 * z + c6 * z.conj() * z + c7 * z.conj()
            };
            let z = c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            let zeta = c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            let d = wirtinger_data_numeric(&f, &g, z);
            let h = h_factor(&d).unwrap();
            let det = fd_jacobian_det(&f, &g, zeta, z);
            let expect = zeta.norm_sqr() * h;
            assert!(
                (det - expect).abs() <= 1e-6 * expect.abs().max(1e-6),
                "det {det} vs {expect}"
            );
        }
    }

    #[test]
    fn h_closed_em_i2_display() {
        let chart = BoundaryChart::EmI2 { m: 2.0, b: 0.5 };
        for &r in &[0.2, 0.7] {
            let expect = -0.25 * (1.0 - 0.5f64.powi(4)).powi(3) * r / 4.0;
            assert!((h_closed(&chart, r, 0.0).unwrap() - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn h_closed_em_i12_matches_gamma_product() {
        // gamma-product via finite differences of the gamma functions
        for &(m, b) in &[(2.0, 0.5), (0.6, 0.3), (64.0, 0.9)] {
            let chart = BoundaryChart::EmI12 { m, b };
            for i in 1..10 {
                let r = b + (1.0 - b) * i as f64 / 10.0;
                let h = 1e-6;
                let (g1, g2) = em_i12_gammas(m, b, r);
                let (g1p, g2p) = em_i12_gammas(m, b, r + h);
                let (g1m, g2m) = em_i12_gammas(m, b, r - h);
                let d1 = (g1p - g1m) / (2.0 * h);
                let d2 = (g2p - g2m) / (2.0 * h);
                let gp = g1 * g2 * (g1 * d2 - d1 * g2);
                let hc = h_closed(&chart, r, 0.0).unwrap();
                assert!(
                    (hc - gp).abs() < 1e-5 * gp.abs().max(1e-10),
                    "m={m} b={b} r={r}: {hc} vs {gp}"
                );
            }
        }
    }

    #[test]
    fn h_closed_consistent_with_lemma_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let charts: Vec<BoundaryChart> = vec![
            BoundaryChart::EmI12 { m: 2.0, b: 0.5 },
            BoundaryChart::EmI2 { m: 0.8, b: 0.4 },
            BoundaryChart::L1I12 { b: 0.22 },
            BoundaryChart::L1I12 { b: 0.34 },
            BoundaryChart::L1I1 { b: 0.3 },
            BoundaryChart::L1I0 { b: 0.31 },
            BoundaryChart::L1I0 { b: 0.44 },
        ];
        for chart in charts {
            let mut tested = 0usize;
            let mut tries = 0usize;
            while tested < 1000 && tries < 40000 {
                tries += 1;
                let (u, v) = match chart {
                    BoundaryChart::EmI12 { b, .. } => {
                        (b + (1.0 - b) * (0.02 + 0.96 * rng.gen::<f64>()), 0.0)
                    }
                    BoundaryChart::EmI2 { .. } => (0.02 + 0.96 * rng.gen::<f64>(), 0.0),
                    BoundaryChart::L1I12 { b } => {
                        let y = rng.gen::<f64>() * std::f64::consts::PI;
                        let xm = 1.0 / b + 2.0 * b * (1.0 + y.cos()) - 2.0;
                        (2.0 + (xm - 2.0) * rng.gen::<f64>(), y)
                    }
                    _ => (rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0),
                };
                if !chart.contains(u, v) {
                    continue;
                }
                // keep clear of the 1/sqrt(D) edge where FD derivatives blow up
                if let BoundaryChart::L1I0 { b } = chart {
                    if l1_i0_discriminant(b, u, v) < 1e-3 {
                        continue;
                    }
                }
                tested += 1;
                let (f, g, z, factor) = chart_complex_repr(&chart, u, v);
                let data = wirtinger_data_numeric(&f, &g, z);
                let lemma = h_factor(&data).unwrap() * factor;
                let closed = h_closed(&chart, u, v).unwrap();
                assert!(
                    (closed - lemma).abs() <= 1e-6 * closed.abs().max(1e-9),
                    "{chart:?} at ({u},{v}): closed {closed} vs lemma {lemma}"
                );
            }
            assert!(tested >= 500, "{chart:?}: only {tested} points");
        }
    }

    #[test]
    fn h_positive_on_l1_one_and_both_grids() {
        // "One can check that H > 0" on the case {1,2} and {1} regions
        for &b in &[0.2, 0.3, 0.45] {
            let chart = BoundaryChart::L1I12 { b };
            for i in 0..200 {
                for j in 0..200 {
                    let y = std::f64::consts::PI * (j as f64 + 0.5) / 200.0;
                    let xm = 1.0 / b + 2.0 * b * (1.0 + y.cos()) - 2.0;
                    if xm <= 2.0 {
                        continue;
                    }
                    let x = 2.0 + (xm - 2.0) * (i as f64 + 0.5) / 200.0;
                    if chart.contains(x, y) {
                        assert!(h_closed(&chart, x, y).unwrap() > 0.0, "I12 b={b} ({x},{y})");
                    }
                }
            }
            let chart = BoundaryChart::L1I1 { b };
            for i in 0..200 {
                for j in 0..200 {
                    let x = -1.0 + 2.0 * (i as f64 + 0.5) / 200.0;
                    let y = -1.0 + 2.0 * (j as f64 + 0.5) / 200.0;
                    if chart.contains(x, y) {
                        assert!(h_closed(&chart, x, y).unwrap() > 0.0, "I1 b={b} ({x},{y})");
                    }
                }
            }
        }
    }

    #[test]
    fn h_closed_l1_i0_singular_edge_reported() {
        let chart = BoundaryChart::L1I0 { b: 0.45 };
        // a point with D < 0 (outside the surface)
        assert!(h_closed(&chart, 0.0, 0.9).is_err());
    }
}
