//! Grid scanning of `|Q|` over chart parameters, refinement of umbilical
//! points by Gauss-Newton on `(Re Q, Im Q)`, and predictor-corrector tracing
//! of umbilical curves.
//!
//! Tolerances are relative to the median `|Q|` of a scan: `Q` carries a
//! nonzero weight under scalings, so no absolute threshold is meaningful.
//! A point classifies as umbilical below `1e-8 *` median; refinement targets
//! `1e-10 *` median.

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::surfaces::SurfaceSpec;
use crate::tensor::{self, TensorSample};

/// `|Q| < CLASSIFY_FACTOR * median` classifies a point as umbilical.
pub const CLASSIFY_FACTOR: f64 = 1e-8;
/// Refinement drives `|Q|` below `REFINE_FACTOR * median`.
pub const REFINE_FACTOR: f64 = 1e-10;

const TAU: f64 = std::f64::consts::TAU;

/// Worker pool for scans, capped by the `UMBILIC_THREADS` environment variable.
fn pool() -> &'static rayon::ThreadPool {
    static POOL: Lazy<rayon::ThreadPool> = Lazy::new(|| {
        let threads = std::env::var("UMBILIC_THREADS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .unwrap_or(0);
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("worker pool")
    });
    &POOL
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanResult {
    pub grid: [usize; 3],
    pub samples: Vec<TensorSample>,
    pub min_abs_q: f64,
    pub min_at: [f64; 3],
    pub min_index: usize,
    pub median_abs_q: f64,
    pub min_abs_det: f64,
}

impl ScanResult {
    /// Classification threshold for this scan.
    pub fn q_tolerance(&self) -> f64 {
        CLASSIFY_FACTOR * self.median_abs_q
    }
}

/// Evaluate the invariant over a uniform half-open grid in chart parameters.
/// Deterministic: repeated runs produce bitwise-identical samples.
pub fn scan(s: &SurfaceSpec, n: [usize; 3]) -> Result<ScanResult> {
    if n.iter().any(|&k| k < 4) {
        return Err(Error::GridTooCoarse);
    }
    let domain = s.theta_domain();
    let total = n[0] * n[1] * n[2];
    let theta_of = |flat: usize| -> [f64; 3] {
        let i3 = flat % n[2];
        let i2 = (flat / n[2]) % n[1];
        let i1 = flat / (n[2] * n[1]);
        let frac = |(lo, hi): (f64, f64), i: usize, count: usize| {
            lo + (hi - lo) * i as f64 / count as f64
        };
        [frac(domain[0], i1, n[0]), frac(domain[1], i2, n[1]), frac(domain[2], i3, n[2])]
    };
    let samples: Vec<TensorSample> = pool().install(|| {
        (0..total)
            .into_par_iter()
            .map(|flat| {
                let theta = theta_of(flat);
                tensor::sample(s, theta).map_err(|e| match e {
                    Error::LeviDegenerate(j) => Error::ScanAborted { theta, j },
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let (min_index, min_abs_q) = samples
        .iter()
        .enumerate()
        .map(|(i, smp)| (i, smp.abs_q))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("grid is nonempty");
    let mut sorted: Vec<f64> = samples.iter().map(|smp| smp.abs_q).collect();
    sorted.sort_by(f64::total_cmp);
    let median_abs_q = sorted[sorted.len() / 2];
    let min_abs_det = samples
        .iter()
        .map(|smp| smp.det_a3().norm())
        .fold(f64::INFINITY, f64::min);
    Ok(ScanResult {
        grid: n,
        min_at: samples[min_index].theta,
        min_index,
        samples,
        min_abs_q,
        median_abs_q,
        min_abs_det,
    })
}

/// Nonvanishing evidence for a scan: for every grid cell, the smallest corner
/// value of `|Q|` minus a local finite-difference Lipschitz estimate (the
/// largest slope over the cell's edges) times the half-diagonal of the cell.
/// A positive slack in every cell is a strong numerical check that `|Q|`
/// cannot dip to zero between samples - not a formal certificate.
#[derive(Clone, Debug, Serialize)]
pub struct NonUmbilicReport {
    pub min_abs_q: f64,
    pub min_abs_det: f64,
    pub median_abs_q: f64,
    /// Largest finite-difference slope of |Q| between grid neighbors.
    pub slope_bound: f64,
    /// Largest grid spacing.
    pub max_spacing: f64,
    /// Smallest per-cell slack `min_corner - cell_slope * half_diagonal`.
    pub slack: f64,
    /// Number of cells with nonpositive slack.
    pub cells_nonpositive: usize,
}

impl NonUmbilicReport {
    pub fn positive(&self) -> bool {
        self.slack > 0.0 && self.min_abs_q > 0.0 && self.min_abs_det > 0.0
    }
}

pub fn non_umbilic_report(s: &SurfaceSpec, scan: &ScanResult) -> NonUmbilicReport {
    let n = scan.grid;
    let domain = s.theta_domain();
    let spacing = [
        (domain[0].1 - domain[0].0) / n[0] as f64,
        (domain[1].1 - domain[1].0) / n[1] as f64,
        (domain[2].1 - domain[2].0) / n[2] as f64,
    ];
    let half_diag = 0.5
        * (spacing[0] * spacing[0] + spacing[1] * spacing[1] + spacing[2] * spacing[2]).sqrt();
    let idx = |c: [usize; 3]| (c[0] * n[1] + c[1]) * n[2] + c[2];
    let periodic = [
        (domain[0].1 - domain[0].0 - TAU).abs() < 1e-12,
        (domain[1].1 - domain[1].0 - TAU).abs() < 1e-12,
        (domain[2].1 - domain[2].0 - TAU).abs() < 1e-12,
    ];
    // cells are indexed by their low corner; non-periodic axes have n-1 cells
    let cells = [
        if periodic[0] { n[0] } else { n[0] - 1 },
        if periodic[1] { n[1] } else { n[1] - 1 },
        if periodic[2] { n[2] } else { n[2] - 1 },
    ];
    let mut global_slope: f64 = 0.0;
    let mut min_slack = f64::INFINITY;
    let mut cells_nonpositive = 0usize;
    for c1 in 0..cells[0] {
        for c2 in 0..cells[1] {
            for c3 in 0..cells[2] {
                let low = [c1, c2, c3];
                let mut min_corner = f64::INFINITY;
                let mut cell_slope: f64 = 0.0;
                for corner in 0..8usize {
                    let offset = [corner & 1, (corner >> 1) & 1, (corner >> 2) & 1];
                    let here = [
                        (low[0] + offset[0]) % n[0],
                        (low[1] + offset[1]) % n[1],
                        (low[2] + offset[2]) % n[2],
                    ];
                    let value = scan.samples[idx(here)].abs_q;
                    min_corner = min_corner.min(value);
                    for axis in 0..3 {
                        if offset[axis] == 1 {
                            continue;
                        }
                        let mut other = here;
                        other[axis] = (here[axis] + 1) % n[axis];
                        let edge_slope =
                            (scan.samples[idx(other)].abs_q - value).abs() / spacing[axis];
                        cell_slope = cell_slope.max(edge_slope);
                    }
                }
                global_slope = global_slope.max(cell_slope);
                let slack = min_corner - cell_slope * half_diag;
                min_slack = min_slack.min(slack);
                if slack <= 0.0 {
                    cells_nonpositive += 1;
                }
            }
        }
    }
    let max_spacing = spacing.iter().cloned().fold(0.0, f64::max);
    NonUmbilicReport {
        min_abs_q: scan.min_abs_q,
        min_abs_det: scan.min_abs_det,
        median_abs_q: scan.median_abs_q,
        slope_bound: global_slope,
        max_spacing,
        slack: min_slack,
        cells_nonpositive,
    }
}

/// Median `|Q|` over a coarse internal grid, used when no scan is at hand.
pub fn local_q_scale(s: &SurfaceSpec) -> Result<f64> {
    Ok(scan(s, [8, 8, 8])?.median_abs_q)
}

#[derive(Clone, Debug, Serialize)]
pub struct RefinedZero {
    pub theta: [f64; 3],
    pub z_re: f64,
    pub z_im: f64,
    pub w_re: f64,
    pub w_im: f64,
    pub abs_q: f64,
    /// Median |Q| scale the tolerance was relative to.
    pub scale: f64,
    pub iterations: usize,
}

const JAC_STEP: f64 = 1e-6;
const REFINE_MAX_ITERS: usize = 100;

fn q_at(s: &SurfaceSpec, theta: [f64; 3]) -> Result<Complex64> {
    let p = s.chart_point(theta)?;
    Ok(tensor::q_from_jet(&s.rho_jet(p, 6)?)?.q)
}

/// 2x3 Jacobian of `(Re Q, Im Q)` in chart parameters, by central differences.
fn q_jacobian(s: &SurfaceSpec, theta: [f64; 3]) -> Result<[[f64; 3]; 2]> {
    let mut jac = [[0.0; 3]; 2];
    for axis in 0..3 {
        let mut plus = theta;
        let mut minus = theta;
        plus[axis] += JAC_STEP;
        minus[axis] -= JAC_STEP;
        let d = (q_at(s, plus)? - q_at(s, minus)?) / (2.0 * JAC_STEP);
        jac[0][axis] = d.re;
        jac[1][axis] = d.im;
    }
    Ok(jac)
}

/// Singular values (descending) of a 2x3 Jacobian.
fn singular_values(jac: &[[f64; 3]; 2]) -> (f64, f64) {
    let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let g11 = dot(&jac[0], &jac[0]);
    let g12 = dot(&jac[0], &jac[1]);
    let g22 = dot(&jac[1], &jac[1]);
    let tr = g11 + g22;
    let disc = ((g11 - g22) * (g11 - g22) + 4.0 * g12 * g12).sqrt();
    let l1 = 0.5 * (tr + disc);
    let l2 = 0.5 * (tr - disc);
    (l1.max(0.0).sqrt(), l2.max(0.0).sqrt())
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Gauss-Newton refinement with the scale taken from a coarse internal scan.
pub fn refine_zero(s: &SurfaceSpec, seed: [f64; 3]) -> Result<RefinedZero> {
    refine_zero_with(s, seed, local_q_scale(s)?)
}

/// Gauss-Newton on `theta -> (Re Q, Im Q)` from a seed; succeeds when
/// `|Q| <= REFINE_FACTOR * scale`.
pub fn refine_zero_with(s: &SurfaceSpec, seed: [f64; 3], scale: f64) -> Result<RefinedZero> {
    let tol = REFINE_FACTOR * scale;
    let mut theta = seed;
    let mut q = q_at(s, theta)?;
    let mut stalls = 0usize;
    for iter in 0..REFINE_MAX_ITERS {
        if q.norm() <= tol {
            let point = s.chart_point(theta)?;
            return Ok(RefinedZero {
                theta,
                z_re: point.0.re,
                z_im: point.0.im,
                w_re: point.1.re,
                w_im: point.1.im,
                abs_q: q.norm(),
                scale,
                iterations: iter,
            });
        }
        let jac = q_jacobian(s, theta)?;
        // minimum-norm step: delta = -J^T (J J^T)^-1 F
        let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let g11 = dot(&jac[0], &jac[0]);
        let g12 = dot(&jac[0], &jac[1]);
        let g22 = dot(&jac[1], &jac[1]);
        let reg = 1e-14 * (g11 + g22) + f64::MIN_POSITIVE;
        let det = (g11 + reg) * (g22 + reg) - g12 * g12;
        if det <= 0.0 || !det.is_finite() {
            return Err(Error::NoZeroFound(iter));
        }
        let f = [q.re, q.im];
        let y = [
            ((g22 + reg) * f[0] - g12 * f[1]) / det,
            (-g12 * f[0] + (g11 + reg) * f[1]) / det,
        ];
        let mut delta = [0.0f64; 3];
        for axis in 0..3 {
            delta[axis] = -(jac[0][axis] * y[0] + jac[1][axis] * y[1]);
        }
        let step_norm = norm3(&delta);
        if step_norm > 0.5 {
            for d in &mut delta {
                *d *= 0.5 / step_norm;
            }
        }
        // backtracking on |Q|
        let mut lambda = 1.0f64;
        let mut improved = false;
        for _ in 0..10 {
            let cand = [
                theta[0] + lambda * delta[0],
                theta[1] + lambda * delta[1],
                theta[2] + lambda * delta[2],
            ];
            if let Ok(qc) = q_at(s, cand) {
                if qc.norm() < q.norm() {
                    theta = cand;
                    q = qc;
                    improved = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !improved {
            stalls += 1;
            if stalls >= 5 {
                return Err(Error::NoZeroFound(iter + 1));
            }
        } else {
            stalls = 0;
        }
    }
    if q.norm() <= tol {
        let point = s.chart_point(theta)?;
        Ok(RefinedZero {
            theta,
            z_re: point.0.re,
            z_im: point.0.im,
            w_re: point.1.re,
            w_im: point.1.im,
            abs_q: q.norm(),
            scale,
            iterations: REFINE_MAX_ITERS,
        })
    } else {
        Err(Error::NoZeroFound(REFINE_MAX_ITERS))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct UmbilicCurve {
    pub thetas: Vec<[f64; 3]>,
    pub points: Vec<(f64, f64, f64, f64)>,
    pub closed: bool,
    /// Classification tolerance the vertices satisfy.
    pub tol_q: f64,
}

const RANK_RATIO_TOL: f64 = 1e-5;

/// Locus tangent in chart parameters: the null direction of the 2x3 Jacobian,
/// with a rank-2 check (rank deficiency signals a possible 2-surface locus).
pub fn locus_tangent(s: &SurfaceSpec, theta: [f64; 3], scale: f64) -> Result<[f64; 3]> {
    let jac = q_jacobian(s, theta)?;
    let (s1, s2) = singular_values(&jac);
    // derivative scale of a nonzero Jacobian for Q of this magnitude
    if s1 <= 1e-9 * scale.max(f64::MIN_POSITIVE) || s2 <= RANK_RATIO_TOL * s1 {
        return Err(Error::RankDeficientLocus);
    }
    let t = cross(&jac[0], &jac[1]);
    let n = norm3(&t);
    if n == 0.0 {
        return Err(Error::RankDeficientLocus);
    }
    Ok([t[0] / n, t[1] / n, t[2] / n])
}

/// Trace the umbilical curve through a refined zero by predictor steps along
/// the Jacobian null direction and Gauss-Newton correction.
pub fn trace_curve(s: &SurfaceSpec, start: [f64; 3], step: f64) -> Result<UmbilicCurve> {
    trace_curve_with(s, start, step, local_q_scale(s)?)
}

pub fn trace_curve_with(
    s: &SurfaceSpec,
    start: [f64; 3],
    step: f64,
    scale: f64,
) -> Result<UmbilicCurve> {
    let tol_q = CLASSIFY_FACTOR * scale;
    let q0 = q_at(s, start)?;
    if q0.norm() > tol_q {
        return Err(Error::NotUmbilical(q0.norm(), tol_q));
    }
    let mut tangent = locus_tangent(s, start, scale)?;
    let mut thetas = vec![start];
    let mut theta = start;
    let max_steps = 64 + (10.0 * TAU / step) as usize;
    let mut closed = false;
    for _ in 0..max_steps {
        let pred = [
            theta[0] + step * tangent[0],
            theta[1] + step * tangent[1],
            theta[2] + step * tangent[2],
        ];
        let corrected = refine_zero_with(s, pred, scale)?;
        theta = corrected.theta;
        let new_tangent = locus_tangent(s, theta, scale)?;
        let dot = tangent[0] * new_tangent[0] + tangent[1] * new_tangent[1] + tangent[2] * new_tangent[2];
        tangent = if dot < 0.0 {
            [-new_tangent[0], -new_tangent[1], -new_tangent[2]]
        } else {
            new_tangent
        };
        thetas.push(theta);
        if thetas.len() > 3 && s.theta_distance(theta, start) < step / 2.0 {
            closed = true;
            break;
        }
    }
    // vertices re-verified directly from the stored points
    let mut points = Vec::with_capacity(thetas.len());
    for t in &thetas {
        let p = s.chart_point(*t)?;
        let rho = s.rho_value(p).abs();
        if rho >= 1e-10 {
            return Err(Error::OffSurface(rho));
        }
        let q = tensor::q_from_jet(&s.rho_jet(p, 6)?)?.q;
        if q.norm() > tol_q {
            return Err(Error::NotUmbilical(q.norm(), tol_q));
        }
        points.push((p.0.re, p.0.im, p.1.re, p.1.im));
    }
    Ok(UmbilicCurve { thetas, points, closed, tol_q })
}

/// Indices of scan samples below `threshold`, grouped into connected
/// components over the (wrap-aware) grid adjacency.
pub fn low_q_clusters(s: &SurfaceSpec, scan: &ScanResult, threshold: f64) -> Vec<Vec<usize>> {
    let n = scan.grid;
    let domain = s.theta_domain();
    let low: Vec<usize> = (0..scan.samples.len())
        .filter(|&i| scan.samples[i].abs_q < threshold)
        .collect();
    if low.is_empty() {
        return vec![];
    }
    let mut rank_of = vec![usize::MAX; scan.samples.len()];
    for (r, &i) in low.iter().enumerate() {
        rank_of[i] = r;
    }
    let mut parent: Vec<usize> = (0..low.len()).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut root = x;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = x;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    let periodic = |axis: usize| (domain[axis].1 - domain[axis].0 - TAU).abs() < 1e-12;
    let coords = |flat: usize| {
        let i3 = flat % n[2];
        let i2 = (flat / n[2]) % n[1];
        let i1 = flat / (n[2] * n[1]);
        [i1, i2, i3]
    };
    let flat_of = |c: [usize; 3]| (c[0] * n[1] + c[1]) * n[2] + c[2];
    for &i in &low {
        let ci = coords(i);
        for axis in 0..3 {
            let mut cj = ci;
            if ci[axis] + 1 < n[axis] {
                cj[axis] = ci[axis] + 1;
            } else if periodic(axis) {
                cj[axis] = 0;
            } else {
                continue;
            }
            let j = flat_of(cj);
            if rank_of[j] != usize::MAX {
                let (a, b) = (find(&mut parent, rank_of[i]), find(&mut parent, rank_of[j]));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (r, &i) in low.iter().enumerate() {
        groups.entry(find(&mut parent, r)).or_default().push(i);
    }
    groups.into_values().collect()
}
