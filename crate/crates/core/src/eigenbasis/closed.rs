//! Closed-form eigenbases: sines on intervals and rectangles, Bessel modes on disks.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::domain::{Domain, DomainKind, Point};
use super::{
    label_pairs, Angular, BasisError, BoundaryQuadrature, EigenPair, Mode, PointEval,
    SpectralBasis, VolumeTable,
};
use crate::quadrature::{composite_rule, GaussLegendre};
use crate::special::{bessel_j_all, bessel_j_over_x, bessel_zeros};

/// Gauss points per panel for volume and boundary rules.
const PANEL_POINTS: usize = 12;

pub fn interval_basis(a: f64, b: f64, n: usize) -> Result<SpectralBasis, BasisError> {
    build(&Domain::interval(a, b)?, n)
}

pub fn rectangle_basis(
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    n: usize,
) -> Result<SpectralBasis, BasisError> {
    build(&Domain::rectangle(a, b, c, d)?, n)
}

/// Disk of radius `radius` centred at the origin.
pub fn disk_basis(radius: f64, n: usize) -> Result<SpectralBasis, BasisError> {
    build(&Domain::disk(radius, [0.0, 0.0])?, n)
}

pub(super) fn build(domain: &Domain, n: usize) -> Result<SpectralBasis, BasisError> {
    if n == 0 {
        return Err(BasisError::EmptyTruncation);
    }
    let spectrum = match &domain.kind {
        DomainKind::Interval { a, b } => interval_spectrum(b - a, n),
        DomainKind::Rectangle { a, b, c, d } => rectangle_spectrum(b - a, d - c, n),
        DomainKind::Disk { radius, .. } => disk_spectrum(*radius, n),
        DomainKind::Grid(_) => {
            unreachable!("grid domains are built by the finite-difference module")
        }
    };
    let pairs = label_pairs(spectrum);
    let volume = raw_volume_table(domain, &pairs, 1);
    let boundary = raw_boundary(domain, &pairs);
    Ok(SpectralBasis::assemble(
        domain.clone(),
        pairs,
        volume,
        boundary,
        None,
    ))
}

fn interval_spectrum(len: f64, n: usize) -> Vec<(f64, Mode)> {
    (1..=n)
        .map(|k| ((k as f64 * PI / len).powi(2), Mode::Sine { k }))
        .collect()
}

fn rectangle_spectrum(lx: f64, ly: f64, n: usize) -> Vec<(f64, Mode)> {
    let mut all = Vec::with_capacity(n * n);
    for j in 1..=n {
        for k in 1..=n {
            let lambda = (j as f64 * PI / lx).powi(2) + (k as f64 * PI / ly).powi(2);
            all.push((lambda, Mode::ProductSine { j, k }));
        }
    }
    all.sort_by(|x, y| {
        let (Mode::ProductSine { j: j1, k: k1 }, Mode::ProductSine { j: j2, k: k2 }) = (x.1, y.1)
        else {
            unreachable!()
        };
        x.0.total_cmp(&y.0).then(j1.cmp(&j2)).then(k1.cmp(&k2))
    });
    all.truncate(n);
    all
}

fn disk_spectrum(radius: f64, n: usize) -> Vec<(f64, Mode)> {
    // Weyl: about z²/4 modes have Bessel zero below z; grow the bound until
    // at least n modes (with multiplicity) are enclosed.
    let mut bound = 2.0 * (n as f64).sqrt() + 4.0;
    loop {
        let max_order = bound.ceil() as usize;
        let per_order = (bound / PI).ceil() as usize + 2;
        let mut modes: Vec<(f64, Mode)> = Vec::new();
        for m in 0..=max_order {
            for (l, &z) in bessel_zeros(m, per_order).iter().enumerate() {
                if z > bound {
                    break;
                }
                let angulars: &[Angular] = if m == 0 {
                    &[Angular::Radial]
                } else {
                    &[Angular::Cos, Angular::Sin]
                };
                for &angular in angulars {
                    modes.push((
                        z,
                        Mode::Bessel {
                            order: m,
                            zero_index: l + 1,
                            zero: z,
                            angular,
                        },
                    ));
                }
            }
        }
        if modes.len() >= n {
            modes.sort_by(|x, y| {
                let key = |m: &Mode| match *m {
                    Mode::Bessel {
                        order,
                        zero_index,
                        angular,
                        ..
                    } => (order, zero_index, angular as u8),
                    _ => unreachable!(),
                };
                x.0.total_cmp(&y.0).then(key(&x.1).cmp(&key(&y.1)))
            });
            modes.truncate(n);
            return modes
                .into_iter()
                .map(|(z, mode)| ((z / radius).powi(2), mode))
                .collect();
        }
        bound *= 1.5;
    }
}

/// Raw (unsigned) value and gradient of one mode.
fn mode_eval(domain: &Domain, mode: &Mode, p: Point) -> (f64, [f64; 2]) {
    match (&domain.kind, *mode) {
        (DomainKind::Interval { a, b }, Mode::Sine { k }) => {
            let len = b - a;
            let amp = (2.0 / len).sqrt();
            let w = k as f64 * PI / len;
            let arg = w * (p[0] - a);
            (amp * arg.sin(), [amp * w * arg.cos(), 0.0])
        }
        (DomainKind::Rectangle { a, b, c, d }, Mode::ProductSine { j, k }) => {
            let (lx, ly) = (b - a, d - c);
            let amp = 2.0 / (lx * ly).sqrt();
            let (wx, wy) = (j as f64 * PI / lx, k as f64 * PI / ly);
            let (sx, cx) = (wx * (p[0] - a)).sin_cos();
            let (sy, cy) = (wy * (p[1] - c)).sin_cos();
            (amp * sx * sy, [amp * wx * cx * sy, amp * wy * sx * cy])
        }
        (
            DomainKind::Disk { radius, center },
            Mode::Bessel {
                order,
                zero,
                angular,
                ..
            },
        ) => bessel_mode_eval(*radius, *center, order, zero, angular, p),
        _ => unreachable!("mode does not belong to this domain"),
    }
}

fn bessel_norm(radius: f64, order: usize, zero: f64) -> f64 {
    let jm1 = bessel_j_all(order + 1, zero)[order + 1];
    let angular = if order == 0 { 2.0 * PI } else { PI };
    1.0 / (angular * 0.5 * radius * radius * jm1 * jm1).sqrt()
}

fn bessel_mode_eval(
    radius: f64,
    center: Point,
    m: usize,
    zero: f64,
    angular: Angular,
    p: Point,
) -> (f64, [f64; 2]) {
    let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
    let r = (dx * dx + dy * dy).sqrt();
    let theta = dy.atan2(dx);
    let k = zero / radius;
    let z = k * r;
    let norm = bessel_norm(radius, m, zero);
    let j = bessel_j_all(m + 1, z);
    let jm = j[m];
    let djm = if m == 0 {
        -j[1]
    } else {
        0.5 * (j[m - 1] - j[m + 1])
    };
    let mt = m as f64 * theta;
    let (trig, dtrig) = match angular {
        Angular::Radial => (1.0, 0.0),
        Angular::Cos => (mt.cos(), -(m as f64) * mt.sin()),
        Angular::Sin => (mt.sin(), m as f64 * mt.cos()),
    };
    let value = norm * jm * trig;
    let d_r = norm * k * djm * trig;
    // (1/r) ∂_θ φ, using J_m(z)/r = k J_m(z)/z which stays finite at r = 0.
    let d_theta = if m == 0 {
        0.0
    } else {
        norm * k * bessel_j_over_x(m, z) * dtrig
    };
    let (st, ct) = theta.sin_cos();
    (value, [d_r * ct - d_theta * st, d_r * st + d_theta * ct])
}

pub(super) fn evaluate_raw(domain: &Domain, pairs: &[EigenPair], p: Point) -> PointEval {
    let n = pairs.len();
    let mut values = DVector::zeros(n);
    let mut grad_x = DVector::zeros(n);
    let mut grad_y = DVector::zeros(n);
    for (k, pair) in pairs.iter().enumerate() {
        let (v, g) = mode_eval(domain, &pair.mode, p);
        values[k] = v;
        grad_x[k] = g[0];
        grad_y[k] = g[1];
    }
    PointEval {
        values,
        grad_x,
        grad_y,
    }
}

fn max_indices(pairs: &[EigenPair]) -> (usize, usize) {
    pairs.iter().fold((1, 1), |(mx, my), p| match p.mode {
        Mode::Sine { k } => (mx.max(k), my),
        Mode::ProductSine { j, k } => (mx.max(j), my.max(k)),
        Mode::Bessel { order, .. } => (mx.max(order), my),
        Mode::Grid { .. } => (mx, my),
    })
}

/// Volume rule: tensor Gauss–Legendre (interval/rectangle) or Gauss in `r`
/// times trapezoid in `θ` (disk); panel counts follow the highest mode index.
fn volume_rule(domain: &Domain, pairs: &[EigenPair], refine: usize) -> (Vec<Point>, Vec<f64>) {
    let refine = refine.max(1);
    let (mx, my) = max_indices(pairs);
    match &domain.kind {
        DomainKind::Interval { a, b } => {
            let (x, w) = composite_rule(*a, *b, (mx + 1) * refine, PANEL_POINTS);
            (x.into_iter().map(|x| [x, 0.0]).collect(), w)
        }
        DomainKind::Rectangle { a, b, c, d } => {
            let (xs, wxs) = composite_rule(*a, *b, (mx + 1) * refine, PANEL_POINTS);
            let (ys, wys) = composite_rule(*c, *d, (my + 1) * refine, PANEL_POINTS);
            let mut nodes = Vec::with_capacity(xs.len() * ys.len());
            let mut weights = Vec::with_capacity(xs.len() * ys.len());
            for (x, wx) in xs.iter().zip(&wxs) {
                for (y, wy) in ys.iter().zip(&wys) {
                    nodes.push([*x, *y]);
                    weights.push(wx * wy);
                }
            }
            (nodes, weights)
        }
        DomainKind::Disk { radius, center } => {
            let zmax = pairs
                .iter()
                .map(|p| match p.mode {
                    Mode::Bessel { zero, .. } => zero,
                    _ => 0.0,
                })
                .fold(0.0, f64::max);
            let radial_panels = ((2.0 * zmax / PI).ceil() as usize + 2) * refine;
            let (rs, wrs) = composite_rule(0.0, *radius, radial_panels, PANEL_POINTS);
            let n_theta = (4 * mx + 16) * refine;
            let dtheta = 2.0 * PI / n_theta as f64;
            let mut nodes = Vec::with_capacity(rs.len() * n_theta);
            let mut weights = Vec::with_capacity(rs.len() * n_theta);
            for (r, wr) in rs.iter().zip(&wrs) {
                for l in 0..n_theta {
                    let (s, c) = (l as f64 * dtheta).sin_cos();
                    nodes.push([center[0] + r * c, center[1] + r * s]);
                    weights.push(wr * r * dtheta);
                }
            }
            (nodes, weights)
        }
        DomainKind::Grid(_) => unreachable!(),
    }
}

pub(super) fn raw_volume_table(domain: &Domain, pairs: &[EigenPair], refine: usize) -> VolumeTable {
    let (nodes, weights) = volume_rule(domain, pairs, refine);
    let n = pairs.len();
    let c = domain.star_center;
    let rows: Vec<(Vec<f64>, Vec<f64>)> = nodes
        .par_iter()
        .map(|p| {
            let mut vals = Vec::with_capacity(n);
            let mut rad = Vec::with_capacity(n);
            for pair in pairs {
                let (v, g) = mode_eval(domain, &pair.mode, *p);
                vals.push(v);
                rad.push((p[0] - c[0]) * g[0] + (p[1] - c[1]) * g[1]);
            }
            (vals, rad)
        })
        .collect();
    let q = nodes.len();
    let values = DMatrix::from_fn(q, n, |i, k| rows[i].0[k]);
    let radial = DMatrix::from_fn(q, n, |i, k| rows[i].1[k]);
    VolumeTable {
        nodes,
        weights,
        values,
        radial,
    }
}

fn raw_boundary(domain: &Domain, pairs: &[EigenPair]) -> BoundaryQuadrature {
    let (mx, my) = max_indices(pairs);
    let mut nodes: Vec<Point> = Vec::new();
    let mut weights = Vec::new();
    let mut normals: Vec<[f64; 2]> = Vec::new();
    let mut exact_degree = Some(2 * PANEL_POINTS - 1);
    match &domain.kind {
        DomainKind::Interval { a, b } => {
            nodes.extend([[*a, 0.0], [*b, 0.0]]);
            weights.extend([1.0, 1.0]);
            normals.extend([[-1.0, 0.0], [1.0, 0.0]]);
            exact_degree = None;
        }
        DomainKind::Rectangle { a, b, c, d } => {
            let rule = GaussLegendre::new(PANEL_POINTS);
            let (xs, wxs) = crate::quadrature::composite_with(&rule, *a, *b, mx + 1);
            let (ys, wys) = crate::quadrature::composite_with(&rule, *c, *d, my + 1);
            // bottom, right, top, left
            for (x, w) in xs.iter().zip(&wxs) {
                nodes.push([*x, *c]);
                weights.push(*w);
                normals.push([0.0, -1.0]);
            }
            for (y, w) in ys.iter().zip(&wys) {
                nodes.push([*b, *y]);
                weights.push(*w);
                normals.push([1.0, 0.0]);
            }
            for (x, w) in xs.iter().zip(&wxs) {
                nodes.push([*x, *d]);
                weights.push(*w);
                normals.push([0.0, 1.0]);
            }
            for (y, w) in ys.iter().zip(&wys) {
                nodes.push([*a, *y]);
                weights.push(*w);
                normals.push([-1.0, 0.0]);
            }
        }
        DomainKind::Disk { radius, center } => {
            let n_theta = 4 * mx + 16;
            let dtheta = 2.0 * PI / n_theta as f64;
            for l in 0..n_theta {
                let (s, c) = (l as f64 * dtheta).sin_cos();
                nodes.push([center[0] + radius * c, center[1] + radius * s]);
                weights.push(radius * dtheta);
                normals.push([c, s]);
            }
            exact_degree = None;
        }
        DomainKind::Grid(_) => unreachable!(),
    }
    let sc = domain.star_center;
    let support = nodes
        .iter()
        .zip(&normals)
        .map(|(p, nu)| (p[0] - sc[0]) * nu[0] + (p[1] - sc[1]) * nu[1])
        .collect();
    let n = pairs.len();
    let mut grad_x = DMatrix::zeros(nodes.len(), n);
    let mut grad_y = DMatrix::zeros(nodes.len(), n);
    for (b, p) in nodes.iter().enumerate() {
        for (k, pair) in pairs.iter().enumerate() {
            let (_, g) = mode_eval(domain, &pair.mode, *p);
            grad_x[(b, k)] = g[0];
            grad_y[(b, k)] = g[1];
        }
    }
    BoundaryQuadrature {
        nodes,
        weights,
        normals,
        support,
        grad_x,
        grad_y,
        exact_degree,
    }
}
