//! Independent numerical volume computations validating the closed forms:
//!
//! 1. parameter-space quadrature of `|H|` over the geodesic charts (the
//!    integration route behind the closed forms, re-executed numerically),
//! 2. Reinhardt-shadow integration for rotation-invariant indicatrices at
//!    `(b, 0)` (area of the squared-modulus shadow times `π²`),
//! 3. a quasi-Monte-Carlo gauge method for the l¹-ball at `(b, b)`: for each
//!    direction on the unit 3-sphere the boundary radius is found by solving
//!    the chart equations, and the volume is `(2π²/4)·mean(r⁴)`.
//!
//! Also hosts the fixtures re-checking the paper's indefinite integrals.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::domain::{Branch, ComplexPair, EllipsoidSpec, Method, VolumeResult};
use crate::error::Error;
use crate::geodesics::{
    em_i12_gammas, em_i2_gammas, l1_i0_fg, l1_i12_fg, l1_i1_fg, BoundaryChart, ChartBounds,
};
use crate::jacobian::{h_closed, h_factor, WirtingerData};
use crate::quadrature::{integrate_1d, integrate_2d_iterated, QuadratureSpec};

const PI: f64 = std::f64::consts::PI;
const PI2: f64 = PI * PI;

// ---------------------------------------------------------------------------
// 1. parameter-space integration
// ---------------------------------------------------------------------------

/// Re-executes the paper's chart integration numerically:
/// `π² ∫ |H| dr` per radial chart for `Ω_m` and the l¹-ball at `(b, 0)`;
/// `π ∬ |H|` (with the stated conjugation doublings) for the diagonal case.
pub fn volume_param_integral(spec: EllipsoidSpec, b: f64) -> Result<VolumeResult, Error> {
    spec.check_b(b)?;
    if b == 0.0 {
        return Err(Error::Param("parameter integral needs b > 0".into()));
    }
    let (value, err_est) = match spec {
        EllipsoidSpec::ExponentFamily { m } => {
            let i12 = BoundaryChart::EmI12 { m, b };
            let q1 = integrate_1d(
                |r| h_closed(&i12, r, 0.0).map(f64::abs).unwrap_or(0.0),
                b,
                1.0,
                &QuadratureSpec {
                    singular_lo: true,
                    ..Default::default()
                },
            )?;
            let i2 = BoundaryChart::EmI2 { m, b };
            let q2 = integrate_1d(
                |r| h_closed(&i2, r, 0.0).map(f64::abs).unwrap_or(0.0),
                0.0,
                1.0,
                &QuadratureSpec::default(),
            )?;
            (PI2 * (q1.value + q2.value), PI2 * (q1.err_est + q2.err_est))
        }
        EllipsoidSpec::L1Diagonal => {
            let (v12, e12) = l1_i12_quad(b)?;
            let (v1, e1) = l1_i1_quad(b)?;
            let (v0, e0) = l1_i0_quad(b)?;
            (v12 + 2.0 * v1 + v0, e12 + 2.0 * e1 + e0)
        }
        EllipsoidSpec::L1OffDiagonal => {
            let q1 = integrate_1d(
                |r| l1_offdiag_h12(b, r).abs(),
                b,
                1.0,
                &QuadratureSpec::default(),
            )?;
            let q2 = integrate_1d(
                |r| l1_offdiag_h2(b, r).abs(),
                0.0,
                1.0,
                &QuadratureSpec::default(),
            )?;
            (PI2 * (q1.value + q2.value), PI2 * (q1.err_est + q2.err_est))
        }
    };
    Ok(VolumeResult {
        value,
        method: Method::Quadrature,
        branch: Branch::None,
        b,
        spec,
        err_est,
    })
}

/// `λ(I_12)` of the diagonal l¹ case by 2D quadrature (the π∬ includes the
/// conjugation doubling).
pub fn l1_i12_quad(b: f64) -> Result<(f64, f64), Error> {
    let chart = BoundaryChart::L1I12 { b };
    let bounds = chart.chart_domain_bounds()?;
    let y0 = match bounds {
        ChartBounds::L1Both { y0, .. } => y0,
        _ => unreachable!(),
    };
    let q = integrate_2d_iterated(
        |x, y| h_closed(&chart, x, y).map(f64::abs).unwrap_or(0.0),
        0.0,
        y0,
        |y| (2.0, bounds.x_max(y)),
        &QuadratureSpec::default(),
    )?;
    Ok((PI * q.value, PI * q.err_est))
}

/// `λ(I_1)` of the diagonal l¹ case by polar quadrature around the
/// constraint-disc center (`H` depends only on the polar radius there).
pub fn l1_i1_quad(b: f64) -> Result<(f64, f64), Error> {
    let bounds = BoundaryChart::L1I1 { b }.chart_domain_bounds()?;
    let (r_full, r_max) = match bounds {
        ChartBounds::L1One { r_full, r_max, .. } => (r_full, r_max),
        _ => unreachable!(),
    };
    let h = |r: f64| 4.0 * b * b * (1.0 - 2.0 * b).powi(2) - 4.0 * b.powi(4) * (1.0 - b).powi(4) * r.powi(4);
    let q1 = integrate_1d(|r| r * h(r), 0.0, r_full, &QuadratureSpec::default())?;
    let q2 = integrate_1d(
        |r| r * (PI - bounds.t_cut(r)) * h(r),
        r_full,
        r_max,
        &QuadratureSpec {
            singular_lo: true,
            ..Default::default()
        },
    )?;
    Ok((PI2 * q1.value + PI * q2.value, PI2 * q1.err_est + PI * q2.err_est))
}

/// `λ(I_0)` of the diagonal l¹ case.
///
/// The `A = ∅` surface is parametrized by `(q, x)` with
/// `Im α_2 = Y(q, x) ≥ 0` solved from the constraint (this covers both roots
/// of the `α_1`-quadratic in one sheet, which matters for
/// `b > (3-√5)/2`). `Y² = (x - x_-)(x_+ - x)` factors per `q`, so the inner
/// integral uses `x = x_- + (x_+ - x_-)(1 - cos θ)/2`, cancelling the `1/Y`
/// edge singularity of `|H|` exactly.
pub fn l1_i0_quad(b: f64) -> Result<(f64, f64), Error> {
    if b <= 0.25 {
        return Ok((0.0, 0.0));
    }
    let inner_spec = QuadratureSpec::with_tols(1e-14, 1e-12);
    let inner = |q: f64| -> f64 {
        let bb = b * q / (1.0 - b);
        let cc = (1.0 - 2.0 * b - b * (1.0 - b) * q * q) / (b * (1.0 - b));
        let disc = bb * bb + cc;
        if disc <= 0.0 {
            return 0.0;
        }
        let xm = bb - disc.sqrt();
        let xp = bb + disc.sqrt();
        if xm >= 1.0 || xm <= -1.0 {
            return 0.0;
        }
        let xc = (b * (1.0 - b) * (1.0 + q * q) - (1.0 - 2.0 * b)) / (2.0 * b * b * q);
        let xhi = xp.min(xc);
        if xhi <= xm {
            return 0.0;
        }
        let half = 0.5 * (xp - xm);
        let th_hi = (1.0 - 2.0 * (xhi - xm) / (xp - xm)).clamp(-1.0, 1.0).acos();
        let f_theta = |th: f64| -> f64 {
            let x = xm + half * (1.0 - th.cos());
            let y = half * th.sin();
            if y <= 0.0 {
                return 0.0;
            }
            l1_i0_lemma_h(b, q, x, y).abs() * half * th.sin()
        };
        match integrate_1d(f_theta, 0.0, th_hi, &inner_spec) {
            Ok(q) => q.value,
            Err(Error::Convergence { value, .. }) => value,
            Err(_) => f64::NAN,
        }
    };
    let q = integrate_1d(inner, 0.0, 1.0, &QuadratureSpec::with_tols(1e-13, 1e-11))?;
    Ok((PI * q.value, PI * q.err_est))
}

/// Lemma `H` of the `A = ∅` surface w.r.t. the complex parameter `q + ix`,
/// with the `Y`-partials taken analytically.
fn l1_i0_lemma_h(b: f64, q: f64, x: f64, y: f64) -> f64 {
    let yq = (b * x - (1.0 - b) * q) / ((1.0 - b) * y);
    let yx = (b * q / (1.0 - b) - x) / y;
    let i = Complex64::new(0.0, 1.0);
    let f_q = Complex64::new(2.0 * b * (b - 1.0), -2.0 * b * b * yq);
    let f_x = Complex64::new(2.0 * b * b, -2.0 * b * b * yx);
    let g_q = Complex64::new(2.0 * b * b, 2.0 * b * (1.0 - b) * yq);
    let g_x = Complex64::new(2.0 * b * (b - 1.0), 2.0 * b * (1.0 - b) * yx);
    let (f, g) = l1_i0_fg(b, q, x, y);
    let data = WirtingerData {
        f,
        g,
        f_z: (f_q - i * f_x) / 2.0,
        f_zbar: (f_q + i * f_x) / 2.0,
        g_z: (g_q - i * g_x) / 2.0,
        g_zbar: (g_q + i * g_x) / 2.0,
    };
    h_factor(&data).unwrap_or(f64::NAN)
}

/// `H` per `dr` of the l¹-ball `(b, 0)` case-`{1,2}` curve.
fn l1_offdiag_h12(b: f64, r: f64) -> f64 {
    let u = r + 1.0 / r;
    let du = 1.0 - 1.0 / (r * r);
    let g1 = b * (u - 2.0 * b);
    let g2 = 1.0 + b * b - b * u;
    // gamma1 gamma2' - gamma1' gamma2 = b u'(b^2 - 1)
    g1 * g2 * b * (b * b - 1.0) * du
}

/// `H` per `dr` of the l¹-ball `(b, 0)` case-`{2}` curve.
fn l1_offdiag_h2(b: f64, r: f64) -> f64 {
    let c = 2.0 * b * (1.0 - b);
    let e = 1.0 - b;
    -c * c * e * e * r * (1.0 - b * b * r.powi(4))
}

// ---------------------------------------------------------------------------
// 2. Reinhardt shadow
// ---------------------------------------------------------------------------

/// Volume of a Reinhardt body from its modulus-shadow boundary curves: in
/// squared coordinates `(u², v²)` the volume is `π²` times the enclosed
/// area, computed by the shoelace rule over a dense polyline.
///
/// `curves` yields `(u, v)` along the shadow boundary from the `u`-axis to
/// the `v`-axis; the polyline is closed through the axes and the origin.
fn shadow_volume(points: &[(f64, f64)]) -> Result<f64, Error> {
    // star-shapedness check: polar angle in squared coordinates must be
    // non-decreasing (a fold would self-intersect the radial graph)
    let sq: Vec<(f64, f64)> = points.iter().map(|&(u, v)| (u * u, v * v)).collect();
    let mut prev_angle = -1.0f64;
    for &(x, y) in &sq {
        if x == 0.0 && y == 0.0 {
            continue;
        }
        let ang = y.atan2(x);
        if ang < prev_angle - 1e-9 {
            return Err(Error::Geometry(format!(
                "shadow polyline folds back at angle {ang}"
            )));
        }
        prev_angle = prev_angle.max(ang);
    }
    let mut poly: Vec<(f64, f64)> = Vec::with_capacity(sq.len() + 3);
    poly.push((sq[0].0, 0.0));
    poly.extend_from_slice(&sq);
    poly.push((0.0, sq[sq.len() - 1].1));
    poly.push((0.0, 0.0));
    let mut area2 = 0.0;
    for w in poly.windows(2) {
        let ((x1, y1), (x2, y2)) = (w[0], w[1]);
        area2 += x1 * y2 - x2 * y1;
    }
    // close back to the first vertex
    let (x1, y1) = poly[poly.len() - 1];
    let (x2, y2) = poly[0];
    area2 += x1 * y2 - x2 * y1;
    Ok(PI2 * area2.abs() / 2.0)
}

/// Cosine-graded samples of `[lo, hi]` (clustered at both endpoints, where
/// the shadow curves have square-root behaviour).
fn graded(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| {
        let t = 0.5 * (1.0 - (PI * k as f64 / (n - 1) as f64).cos());
        lo + (hi - lo) * t
    })
}

/// Indicatrix volume of `Ω_m` at `(b, 0)` via the shadow method.
pub fn volume_reinhardt_shadow(m: f64, b: f64) -> Result<VolumeResult, Error> {
    let spec = EllipsoidSpec::ExponentFamily { m };
    if !(m >= 0.5) {
        return Err(Error::Param(format!("m = {m} must be >= 1/2")));
    }
    spec.check_b(b)?;
    if b == 0.0 {
        return Err(Error::Param("shadow method needs b > 0".into()));
    }
    let n = 10_000;
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(2 * n);
    // I12 piece from the u-axis (r -> b) out to the junction (r = 1)
    for r in graded(b, 1.0, n) {
        let r = r.clamp(b * (1.0 + 1e-14), 1.0);
        let (g1, g2) = em_i12_gammas(m, b, r);
        pts.push((g1.abs(), g2));
    }
    // I2 piece from the junction (r = 1) down to the v-axis (r -> 0)
    for r in graded(0.0, 1.0, n).collect::<Vec<_>>().into_iter().rev().skip(1) {
        let (g1, g2) = em_i2_gammas(m, b, r);
        pts.push((g1, g2));
    }
    let value = shadow_volume(&pts)?;
    Ok(VolumeResult {
        value,
        method: Method::Shadow,
        branch: Branch::None,
        b,
        spec,
        err_est: value * 3e-8,
    })
}

/// Shadow-method volume of the l¹-ball at `(b, 0)` (same construction with
/// that domain's two curves).
pub fn volume_shadow_l1_offdiag(b: f64) -> Result<VolumeResult, Error> {
    let spec = EllipsoidSpec::L1OffDiagonal;
    spec.check_b(b)?;
    if b == 0.0 {
        return Err(Error::Param("shadow method needs b > 0".into()));
    }
    let n = 10_000;
    let mut pts = Vec::with_capacity(2 * n);
    for r in graded(b, 1.0, n) {
        let u = r + 1.0 / r;
        pts.push((b * (u - 2.0 * b), 1.0 + b * b - b * u));
    }
    for r in graded(0.0, 1.0, n).collect::<Vec<_>>().into_iter().rev().skip(1) {
        pts.push((2.0 * b * (1.0 - b) * r, (1.0 - b) * (1.0 - b * r * r)));
    }
    let value = shadow_volume(&pts)?;
    Ok(VolumeResult {
        value,
        method: Method::Shadow,
        branch: Branch::None,
        b,
        spec,
        err_est: value * 3e-8,
    })
}

// ---------------------------------------------------------------------------
// 3. gauge (quasi-Monte-Carlo over directions)
// ---------------------------------------------------------------------------

/// One accepted direction solve.
#[derive(Debug, Clone, Copy)]
pub struct GaugeSolve {
    pub direction: [f64; 4],
    pub radius: f64,
    pub chart_used: GaugeChart,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeChart {
    I12,
    I1,
    I2,
    I0,
}

/// Aggregate result of a gauge run.
#[derive(Debug, Clone)]
pub struct GaugeReport {
    pub volume: VolumeResult,
    pub total_directions: usize,
    pub failed_directions: usize,
    /// Directions where several charts solved; radii agreed within the
    /// recorded spread.
    pub overlap_directions: usize,
    pub max_overlap_spread: f64,
}

fn halton(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Deterministic low-discrepancy directions on the unit 3-sphere
/// (Halton bases 2, 3, 5 through the uniform-quaternion map).
pub fn sphere_directions(n: usize) -> Vec<(Complex64, Complex64)> {
    (1..=n)
        .map(|i| {
            let u1 = halton(i, 2);
            let u2 = halton(i, 3);
            let u3 = halton(i, 5);
            let s1 = (1.0 - u1).sqrt();
            let s2 = u1.sqrt();
            (
                Complex64::new(s1 * (2.0 * PI * u2).sin(), s1 * (2.0 * PI * u2).cos()),
                Complex64::new(s2 * (2.0 * PI * u3).sin(), s2 * (2.0 * PI * u3).cos()),
            )
        })
        .collect()
}

const GAUGE_RESIDUAL_TOL: f64 = 1e-9;

struct ChartTask {
    chart: GaugeChart,
    /// (f, g) with domain test; parameters are the chart's (u, v)
    fg: Box<dyn Fn(f64, f64) -> Option<ComplexPair> + Sync>,
    grid_u: (f64, f64, usize),
    grid_v: (f64, f64, usize),
}

fn l1_chart_tasks(b: f64) -> Vec<ChartTask> {
    let mut tasks = Vec::new();
    let y0 = match (BoundaryChart::L1I12 { b }).chart_domain_bounds().unwrap() {
        ChartBounds::L1Both { y0, .. } => y0,
        _ => unreachable!(),
    };
    // case {1,2}; y extended to (-y0, y0): (x, -y) gives the conjugate sheet
    tasks.push(ChartTask {
        chart: GaugeChart::I12,
        fg: Box::new(move |x, y| {
            if y.abs() >= y0 || x <= 2.0 || x >= 1.0 / b + 2.0 * b * (1.0 + y.cos()) - 2.0 {
                return None;
            }
            Some(l1_i12_fg(b, x, y))
        }),
        grid_u: (2.0, 1.0 / b + 4.0 * b - 2.0, 9),
        grid_v: (-y0, y0, 11),
    });
    // case {1}: full disc-cap region covers conjugates itself
    let chart1 = BoundaryChart::L1I1 { b };
    tasks.push(ChartTask {
        chart: GaugeChart::I1,
        fg: Box::new(move |x, y| {
            if !chart1.contains(x, y) {
                return None;
            }
            Some(l1_i1_fg(b, x, y))
        }),
        grid_u: (-1.0, 1.0, 9),
        grid_v: (-1.0, 1.0, 9),
    });
    // case {2} = coordinate swap of case {1}
    tasks.push(ChartTask {
        chart: GaugeChart::I2,
        fg: Box::new(move |x, y| {
            if !chart1.contains(x, y) {
                return None;
            }
            let (f, g) = l1_i1_fg(b, x, y);
            Some((g, f))
        }),
        grid_u: (-1.0, 1.0, 9),
        grid_v: (-1.0, 1.0, 9),
    });
    if b > 0.25 {
        // case {}: (q, x) sheet with Im alpha_2 = +Y; conjugates via the
        // conjugated direction solve below
        tasks.push(ChartTask {
            chart: GaugeChart::I0,
            fg: Box::new(move |q, x| {
                let y = crate::geodesics::l1_i0_y(b, q, x)?;
                Some(l1_i0_fg(b, q, x, y))
            }),
            grid_u: (0.0, 1.0, 9),
            grid_v: (-1.0, 1.0, 9),
        });
    }
    tasks
}

/// Damped Newton on the 2-real-parameter complex equation
/// `f(u,v)·ξ2 - g(u,v)·ξ1 = 0`, with finite-difference Jacobian and a coarse
/// multistart grid; falls back to a fine-grid argmin refinement when Newton
/// stalls. Returns `(radius, residual)` of the best in-domain solution.
fn solve_chart_direction(
    task: &ChartTask,
    xi: (Complex64, Complex64),
    scale: f64,
) -> Option<(f64, f64)> {
    let residual = |u: f64, v: f64| -> Option<Complex64> {
        let (f, g) = (task.fg)(u, v)?;
        Some(f * xi.1 - g * xi.0)
    };
    // coarse grid: rank the starts
    let (u0, u1, nu) = task.grid_u;
    let (v0, v1, nv) = task.grid_v;
    let mut starts: Vec<(f64, f64, f64)> = Vec::new();
    for iu in 0..nu {
        for iv in 0..nv {
            let u = u0 + (u1 - u0) * (iu as f64 + 0.5) / nu as f64;
            let v = v0 + (v1 - v0) * (iv as f64 + 0.5) / nv as f64;
            if let Some(r) = residual(u, v) {
                starts.push((r.norm(), u, v));
            }
        }
    }
    if starts.is_empty() {
        return None;
    }
    starts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let hu = (u1 - u0) * 1e-8;
    let hv = (v1 - v0) * 1e-8;
    let mut best: Option<(f64, f64)> = None;
    for &(_, su, sv) in starts.iter().take(4) {
        let (mut u, mut v) = (su, sv);
        let mut cur = residual(u, v).map(|r| r.norm()).unwrap_or(f64::INFINITY);
        for _ in 0..80 {
            if cur < GAUGE_RESIDUAL_TOL * scale {
                break;
            }
            let r = match residual(u, v) {
                Some(r) => r,
                None => break,
            };
            let (rpu, rmu) = match (residual(u + hu, v), residual(u - hu, v)) {
                (Some(a), Some(b)) => (a, b),
                _ => break,
            };
            let (rpv, rmv) = match (residual(u, v + hv), residual(u, v - hv)) {
                (Some(a), Some(b)) => (a, b),
                _ => break,
            };
            let ju = (rpu - rmu) / (2.0 * hu);
            let jv = (rpv - rmv) / (2.0 * hv);
            let det = ju.re * jv.im - ju.im * jv.re;
            if det.abs() < 1e-300 {
                break;
            }
            let du = (-r.re * jv.im + r.im * jv.re) / det;
            let dv = (-ju.re * r.im + ju.im * r.re) / det;
            let mut lam = 1.0;
            let mut advanced = false;
            while lam > 1e-6 {
                let (uu, vv) = (u + lam * du, v + lam * dv);
                if let Some(rn) = residual(uu, vv) {
                    if rn.norm() < cur {
                        u = uu;
                        v = vv;
                        cur = rn.norm();
                        advanced = true;
                        break;
                    }
                }
                lam *= 0.5;
            }
            if !advanced {
                break;
            }
        }
        if cur < GAUGE_RESIDUAL_TOL * scale {
            if let Some((f, g)) = (task.fg)(u, v) {
                let radius = (f.norm_sqr() + g.norm_sqr()).sqrt();
                if best.map_or(true, |(r0, _)| radius > r0) {
                    best = Some((radius, cur));
                }
            }
        }
    }
    best
}

/// Gauge volume for the l¹-ball on the diagonal with `n_directions`
/// quasi-uniform directions.
pub fn volume_gauge_l1(b: f64, n_directions: usize) -> Result<GaugeReport, Error> {
    EllipsoidSpec::L1Diagonal.check_b(b)?;
    if b == 0.0 {
        return Err(Error::Param("gauge method needs b > 0".into()));
    }
    if n_directions < 10_000 {
        return Err(Error::Param(format!(
            "n_directions = {n_directions} must be >= 10^4"
        )));
    }
    let tasks = l1_chart_tasks(b);
    let dirs = sphere_directions(n_directions);
    let per_dir: Vec<Option<(GaugeSolve, usize, f64)>> = dirs
        .par_iter()
        .map(|&(x1, x2)| {
            let mut solves: Vec<GaugeSolve> = Vec::new();
            for task in &tasks {
                // both the direction and its conjugate (conjugate boundary sheets)
                for &xi in &[(x1, x2), (x1.conj(), x2.conj())] {
                    if let Some((radius, residual)) = solve_chart_direction(task, xi, 1.0) {
                        solves.push(GaugeSolve {
                            direction: [x1.re, x1.im, x2.re, x2.im],
                            radius,
                            chart_used: task.chart,
                            residual,
                        });
                    }
                }
            }
            let best = solves
                .iter()
                .cloned()
                .max_by(|a, b| a.radius.partial_cmp(&b.radius).unwrap())?;
            let spread = if solves.len() > 1 {
                let min = solves.iter().map(|s| s.radius).fold(f64::MAX, f64::min);
                (best.radius - min) / best.radius
            } else {
                0.0
            };
            Some((best, solves.len(), spread))
        })
        .collect();

    let total = per_dir.len();
    let failed = per_dir.iter().filter(|o| o.is_none()).count();
    if (failed as f64) > 0.001 * total as f64 {
        return Err(Error::Coverage { failed, total });
    }
    let mut sum_r4 = 0.0;
    let mut overlap = 0usize;
    let mut max_spread = 0.0f64;
    let mut solved = 0usize;
    for entry in per_dir.iter().flatten() {
        sum_r4 += entry.0.radius.powi(4);
        solved += 1;
        if entry.1 > 1 {
            overlap += 1;
            max_spread = max_spread.max(entry.2);
        }
    }
    let mean_r4 = sum_r4 / solved as f64;
    let value = 0.25 * mean_r4 * 2.0 * PI2;
    Ok(GaugeReport {
        volume: VolumeResult {
            value,
            method: Method::Gauge,
            branch: Branch::None,
            b,
            spec: EllipsoidSpec::L1Diagonal,
            err_est: value * 5e-3,
        },
        total_directions: total,
        failed_directions: failed,
        overlap_directions: overlap,
        max_overlap_spread: max_spread,
    })
}

/// Gauge volume for the rotation-invariant indicatrices at `(b, 0)` (the
/// `Ω_m` family and the l¹-ball off the diagonal). The gauge radius depends
/// only on the moduli `(|ξ1|, |ξ2|)`, found by scanning the two shadow
/// curves for the parallel point and bisecting.
pub fn volume_gauge_reinhardt(
    spec: EllipsoidSpec,
    b: f64,
    n_directions: usize,
) -> Result<GaugeReport, Error> {
    spec.check_b(b)?;
    if b == 0.0 {
        return Err(Error::Param("gauge method needs b > 0".into()));
    }
    if n_directions < 10_000 {
        return Err(Error::Param(format!(
            "n_directions = {n_directions} must be >= 10^4"
        )));
    }
    let curves: [Box<dyn Fn(f64) -> (f64, f64) + Sync>; 2] = match spec {
        EllipsoidSpec::ExponentFamily { m } => [
            Box::new(move |r| {
                let (g1, g2) = em_i12_gammas(m, b, r);
                (g1.abs(), g2)
            }),
            Box::new(move |r| em_i2_gammas(m, b, r)),
        ],
        EllipsoidSpec::L1OffDiagonal => [
            Box::new(move |r| {
                let u = r + 1.0 / r;
                (b * (u - 2.0 * b), 1.0 + b * b - b * u)
            }),
            Box::new(move |r| (2.0 * b * (1.0 - b) * r, (1.0 - b) * (1.0 - b * r * r))),
        ],
        EllipsoidSpec::L1Diagonal => {
            return Err(Error::Param(
                "diagonal case is not rotation-invariant; use volume_gauge_l1".into(),
            ))
        }
    };
    let ranges = [(b + 1e-13, 1.0), (1e-13, 1.0)];
    let dirs = sphere_directions(n_directions);
    let radii: Vec<Option<f64>> = dirs
        .par_iter()
        .map(|&(x1, x2)| {
            let (p, q) = (x1.norm(), x2.norm());
            let mut best: Option<f64> = None;
            for (curve, range) in curves.iter().zip(ranges.iter()) {
                // G(r) = p*gamma2 - q*gamma1 changes sign at the parallel point
                let gfun = |r: f64| {
                    let (u, v) = curve(r);
                    p * v - q * u
                };
                let n = 64;
                let mut prev_r = range.0;
                let mut prev_g = gfun(prev_r);
                for k in 1..=n {
                    let r = range.0 + (range.1 - range.0) * k as f64 / n as f64;
                    let g = gfun(r);
                    if prev_g == 0.0 || prev_g.signum() != g.signum() {
                        // bisection
                        let (mut lo, mut hi) = (prev_r, r);
                        let mut glo = prev_g;
                        for _ in 0..80 {
                            let mid = 0.5 * (lo + hi);
                            let gm = gfun(mid);
                            if gm == 0.0 {
                                lo = mid;
                                hi = mid;
                                break;
                            }
                            if gm.signum() == glo.signum() {
                                lo = mid;
                                glo = gm;
                            } else {
                                hi = mid;
                            }
                        }
                        let (u, v) = curve(0.5 * (lo + hi));
                        let rad = (u * u + v * v).sqrt();
                        if best.map_or(true, |r0| rad > r0) {
                            best = Some(rad);
                        }
                    }
                    prev_r = r;
                    prev_g = g;
                }
            }
            // axis directions: the curves' endpoints realize them
            if best.is_none() {
                if q < 1e-12 {
                    let (u, _) = curves[0](ranges[0].0);
                    best = Some(u);
                } else if p < 1e-12 {
                    let (_, v) = curves[1](1e-13);
                    best = Some(v);
                }
            }
            best
        })
        .collect();
    let total = radii.len();
    let failed = radii.iter().filter(|r| r.is_none()).count();
    if (failed as f64) > 0.001 * total as f64 {
        return Err(Error::Coverage { failed, total });
    }
    let solved = total - failed;
    let mean_r4: f64 = radii.iter().flatten().map(|r| r.powi(4)).sum::<f64>() / solved as f64;
    let value = 0.25 * mean_r4 * 2.0 * PI2;
    Ok(GaugeReport {
        volume: VolumeResult {
            value,
            method: Method::Gauge,
            branch: Branch::None,
            b,
            spec,
            err_est: value * 5e-3,
        },
        total_directions: total,
        failed_directions: failed,
        overlap_directions: 0,
        max_overlap_spread: 0.0,
    })
}

// ---------------------------------------------------------------------------
// 4. indefinite-integral fixtures
// ---------------------------------------------------------------------------

/// Outcome of re-checking one printed formula.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FormulaCheck {
    pub name: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Report of the indefinite-integral and definite-display fixtures at one `b`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct IndefReport {
    pub b: f64,
    pub checks: Vec<FormulaCheck>,
}

impl IndefReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Antiderivative of `v arccos(a/v - v)`.
fn antider_v1(a: f64, v: f64) -> f64 {
    let r = (-a * a + 2.0 * a * v * v - v.powi(4) + v * v).max(0.0).sqrt();
    0.25 * r
        + (4.0 * a + 1.0) / 8.0 * ((2.0 * a - 2.0 * v * v + 1.0) / (2.0 * r)).atan()
        + v * v / 2.0 * (a / v - v).clamp(-1.0, 1.0).acos()
}

/// Antiderivative of `v^5 arccos(a/v - v)`.
fn antider_v5(a: f64, v: f64) -> f64 {
    let r = (-a * a + 2.0 * a * v * v - v.powi(4) + v * v).max(0.0).sqrt();
    (15.0 + 78.0 * a + 80.0 * a * a + (10.0 + 32.0 * a) * v * v + 8.0 * v.powi(4)) / 288.0 * r
        + (5.0 + 36.0 * a + 72.0 * a * a + 32.0 * a.powi(3)) / 192.0
            * ((2.0 * a - 2.0 * v * v + 1.0) / (2.0 * r)).atan()
        + v.powi(6) / 6.0 * (a / v - v).clamp(-1.0, 1.0).acos()
}

/// Antiderivative of `arctan(sqrt(-a v² + v - 1)) / v²`.
fn antider_atan(a: f64, v: f64) -> f64 {
    let r = (-a * v * v + v - 1.0).max(0.0).sqrt();
    0.5 / v * r - 1.0 / v * r.atan() - 0.5 * a * (2.0 * a * r / (-a * v - 2.0 * a + 1.0)).atan()
        + (2.0 * a - 1.0) / 4.0 * ((v - 2.0) * r / (2.0 * a * v * v - 2.0 * v + 2.0)).atan()
}

fn derivative_check<F, G>(anti: F, integrand: G, lo: f64, hi: f64, n: usize) -> f64
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let h = (hi - lo) * 1e-7;
    let mut worst = 0.0f64;
    for k in 0..n {
        let v = lo + (hi - lo) * (k as f64 + 0.5) / n as f64;
        let d = (anti(v + h) - anti(v - h)) / (2.0 * h);
        worst = worst.max((d - integrand(v)).abs());
    }
    worst
}

/// Differentiates each printed antiderivative against its integrand and
/// recomputes the two printed definite integrals by quadrature. Mismatches
/// are reported, not raised.
pub fn verify_indefinite_integrals(b: f64) -> Result<IndefReport, Error> {
    if !(b > 0.25 && b < 0.5) {
        return Err(Error::Param(format!("b = {b} outside (1/4, 1/2)")));
    }
    let mut checks = Vec::new();

    // the arccos antiderivatives arise from t(r) = arccos(a/v - v) with
    // v = (1-b) r / (2b), a = (1-2b)/(4b^2)
    let a12 = (1.0 - 2.0 * b) / (4.0 * b * b);
    let kap = (1.0 - b) / (2.0 * b);
    let r_full = (1.0 - 2.0 * b) / (1.0 - b);
    let r_max = (1.0 - 2.0 * b) / (b.sqrt() * (1.0 - b));
    let (vlo, vhi) = (kap * r_full, kap * r_max);
    let margin = (vhi - vlo) * 1e-4;
    let dev1 = derivative_check(
        |v| antider_v1(a12, v),
        |v| v * (a12 / v - v).clamp(-1.0, 1.0).acos(),
        vlo + margin,
        vhi - margin,
        100,
    );
    checks.push(FormulaCheck {
        name: "d/dv antiderivative of v*arccos(a/v - v)".into(),
        max_deviation: dev1,
        tolerance: 1e-8,
        pass: dev1 < 1e-8,
    });
    let dev2 = derivative_check(
        |v| antider_v5(a12, v),
        |v| v.powi(5) * (a12 / v - v).clamp(-1.0, 1.0).acos(),
        vlo + margin,
        vhi - margin,
        100,
    );
    checks.push(FormulaCheck {
        name: "d/dv antiderivative of v^5*arccos(a/v - v)".into(),
        max_deviation: dev2,
        tolerance: 1e-8,
        pass: dev2 < 1e-8,
    });

    // the arctan antiderivative arises with a = (1-b)/4
    let a3 = (1.0 - b) / 4.0;
    let disc = (1.0 - 4.0 * a3).sqrt();
    let (wlo, whi) = ((1.0 - disc) / (2.0 * a3), (1.0 + disc) / (2.0 * a3));
    let margin = (whi - wlo) * 1e-4;
    let dev3 = derivative_check(
        |v| antider_atan(a3, v),
        |v| (-a3 * v * v + v - 1.0).max(0.0).sqrt().atan() / (v * v),
        wlo + margin,
        whi - margin,
        100,
    );
    checks.push(FormulaCheck {
        name: "d/dv antiderivative of arctan(sqrt(-a v^2+v-1))/v^2".into(),
        max_deviation: dev3,
        tolerance: 1e-8,
        pass: dev3 < 1e-8,
    });

    // definite displays exist for r0 >= 0, i.e. b < (3-sqrt(5))/2
    let r0 = (1.0 - 2.0 * b - b.powf(1.5)) / (b.sqrt() * (1.0 - b));
    if r0 > 0.0 {
        let s = (4.0 * b - 1.0).sqrt();
        let quad1 = integrate_1d(
            |r| {
                let arg = (1.0 - 3.0 * b + b * b - b * (1.0 - b) * r * r) / (2.0 * b * b * r);
                r * arg.clamp(-1.0, 1.0).acos()
            },
            r0,
            1.0,
            &QuadratureSpec::singular(true, true),
        )?;
        let closed1 = PI * (2.0 * b.powi(3) - 8.0 * b * b + 6.0 * b - 1.0)
            / (4.0 * (b - 1.0).powi(2) * b)
            - 0.5 * (-1.0 + (4.0 * b - 1.0) / (2.0 * b * b)).clamp(-1.0, 1.0).acos()
            + (1.0 - 2.0 * b) / (4.0 * b * (1.0 - b)) * s
            + (1.0 - 2.0 * b).powi(2) / (2.0 * b * (1.0 - b).powi(2))
                * ((1.0 - 3.0 * b) / ((1.0 - b) * s)).atan();
        let rel1 = (quad1.value - closed1).abs() / closed1.abs();
        checks.push(FormulaCheck {
            name: "definite arccos display vs quadrature".into(),
            max_deviation: rel1,
            tolerance: 1e-9,
            pass: rel1 < 1e-9,
        });

        let quad2 = integrate_1d(
            |r| {
                let p = 1.0 - 3.0 * b + b * b - b * (1.0 - b) * r * r;
                let sden = 1.0 - b - b * b - b * (1.0 - b) * r * r;
                r * ((4.0 * b.powi(4) * r * r - p * p).max(0.0).sqrt() / sden).atan()
            },
            r0,
            1.0,
            &QuadratureSpec::singular(true, true),
        )?;
        let closed2 = PI * (1.0 - 2.0 * b) * (b + 1.0) / (8.0 * (1.0 - b).powi(2))
            + (1.0 - 2.0 * b) / (4.0 * b * (1.0 - b)) * s
            - (b + 2.0) * (1.0 - 2.0 * b) / (4.0 * b * (1.0 - b)) * s.atan()
            - (1.0 + b) * (1.0 - 2.0 * b) / (4.0 * (1.0 - b).powi(2))
                * ((1.0 - 3.0 * b) / ((1.0 - b) * s)).atan();
        let rel2 = (quad2.value - closed2).abs() / closed2.abs();
        checks.push(FormulaCheck {
            name: "definite arctan display vs quadrature".into(),
            max_deviation: rel2,
            tolerance: 1e-9,
            pass: rel2 < 1e-9,
        });
    }

    // t(r) continuity at the full-circle radius: arccos argument hits 1
    let bounds = BoundaryChart::L1I1 { b }.chart_domain_bounds()?;
    let t_end = bounds.t_cut(r_full + 1e-13);
    checks.push(FormulaCheck {
        name: "t(r) -> 0 at r = (1-2b)/(1-b)".into(),
        max_deviation: t_end,
        tolerance: 1e-5,
        pass: t_end < 1e-5,
    });

    Ok(IndefReport { b, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn param_integral_matches_ball() {
        let v = volume_param_integral(EllipsoidSpec::ExponentFamily { m: 1.0 }, 0.4).unwrap();
        let expect = PI2 * (1.0 - 0.16f64).powi(3) / 2.0;
        assert!(rel(v.value, expect) < 1e-8, "{} vs {expect}", v.value);
    }

    #[test]
    fn param_integral_matches_l1_both_branches() {
        for &b in &[0.2, 0.3] {
            let v = volume_param_integral(EllipsoidSpec::L1Diagonal, b).unwrap();
            let expect = closed_form::volume_l1_diag(b).unwrap().value;
            assert!(rel(v.value, expect) < 1e-8, "b={b}: {} vs {expect}", v.value);
        }
    }

    #[test]
    fn param_integral_matches_l1_offdiag() {
        for &b in &[0.2, 0.5, 0.8] {
            let v = volume_param_integral(EllipsoidSpec::L1OffDiagonal, b).unwrap();
            let expect = closed_form::volume_l1_offdiag(b).unwrap();
            assert!(rel(v.value, expect) < 1e-10, "b={b}");
        }
    }

    #[test]
    fn i0_quad_vanishes_below_quarter() {
        assert_eq!(l1_i0_quad(0.2).unwrap().0, 0.0);
    }

    #[test]
    fn i0_quad_matches_closed_form_above_382() {
        // the two-root regime: b > (3-sqrt(5))/2
        for &b in &[0.4, 0.45] {
            let (v, _) = l1_i0_quad(b).unwrap();
            assert!(rel(v, closed_form::i0_l1(b)) < 1e-9, "b={b}: {v}");
        }
    }

    #[test]
    fn shadow_matches_ball() {
        let v = volume_reinhardt_shadow(1.0, 0.5).unwrap();
        let expect = PI2 * 0.75f64.powi(3) / 2.0;
        assert!(rel(v.value, expect) < 1e-6);
    }

    #[test]
    fn shadow_matches_closed_m4() {
        let v = volume_reinhardt_shadow(4.0, 0.3).unwrap();
        let expect = closed_form::volume_em(4.0, 0.3).unwrap().value;
        assert!(rel(v.value, expect) < 1e-6);
    }

    #[test]
    fn shadow_small_b_approaches_center_volume() {
        for &m in &[0.5, 2.0, 8.0] {
            let v = volume_reinhardt_shadow(m, 1e-4).unwrap();
            assert!(rel(v.value, PI2 * m / (m + 1.0)) < 1e-3, "m={m}");
        }
    }

    #[test]
    fn shadow_rejects_folded_polyline() {
        let pts = vec![(1.0, 0.0), (0.8, 0.6), (0.9, 0.2), (0.0, 1.0)];
        assert!(matches!(shadow_volume(&pts), Err(Error::Geometry(_))));
    }

    #[test]
    fn gauge_reinhardt_matches_offdiag_closed() {
        let rep = volume_gauge_reinhardt(EllipsoidSpec::L1OffDiagonal, 0.3, 20_000).unwrap();
        let expect = closed_form::volume_l1_offdiag(0.3).unwrap();
        assert!(rel(rep.volume.value, expect) < 5e-3);
        assert_eq!(rep.failed_directions, 0);
    }

    #[test]
    fn gauge_rejects_small_n() {
        assert!(volume_gauge_l1(0.3, 100).is_err());
    }

    #[test]
    fn gauge_axis_direction_radius() {
        // along (1,0) the gauge radius is the largest |f| over g = 0 solutions;
        // for the diagonal case that is the I1 disc center value (1-2b)/(1-b)
        let b = 0.3;
        let tasks = l1_chart_tasks(b);
        let xi = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        let mut best: f64 = 0.0;
        for t in &tasks {
            if let Some((r, _)) = solve_chart_direction(t, xi, 1.0) {
                best = best.max(r);
            }
        }
        assert!(
            (best - (1.0 - 2.0 * b) / (1.0 - b)).abs() < 1e-9,
            "axis radius {best}"
        );
    }

    #[test]
    fn indefinite_integrals_report() {
        for &b in &[0.27, 0.3, 0.35] {
            let rep = verify_indefinite_integrals(b).unwrap();
            for c in &rep.checks {
                assert!(c.pass, "b={b}: {} deviated {}", c.name, c.max_deviation);
            }
        }
        assert!(verify_indefinite_integrals(0.2).is_err());
    }
}
