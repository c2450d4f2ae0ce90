//! Winding-number umbilical indices of closed curves.
//!
//! The index of a closed oriented curve avoiding the locus is `-1/2` times
//! the winding number of `Q` along it. Windings come from phase unwrapping
//! with adaptive sample doubling under a `π/2` step bound - an integer-valued
//! output needs combinatorial robustness, not quadrature accuracy. Indices
//! are exact rationals.
//!
//! Orientation conventions (the underlying sign is convention-relative):
//! curves are oriented by increasing parameter; the locus tangent sign is
//! normalized against the diagonal rotation direction `(0, 1, 1)` in chart
//! parameters; transverse-disk frames `(u, v, tangent)` are right-handed,
//! which makes the local indices of the stable circles of circle-invariant
//! sphere perturbations sum to `+chi(S^2) = +2`.

use num_complex::Complex64;
use num_rational::Rational64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::locus::{self, CLASSIFY_FACTOR};
use crate::surfaces::SurfaceSpec;
use crate::tensor;

const TAU: f64 = std::f64::consts::TAU;

/// A closed parametric curve in chart parameters, `t` in `[0, 1)`.
#[derive(Clone, Debug, Serialize)]
pub enum ParamCurve {
    /// `center + radius (u cos 2πt + v sin 2πt)`.
    Circle { center: [f64; 3], u: [f64; 3], v: [f64; 3], radius: f64 },
    /// Closed polygon, linearly interpolated between consecutive vertices.
    Polygon { vertices: Vec<[f64; 3]> },
}

impl ParamCurve {
    pub fn at(&self, t: f64) -> [f64; 3] {
        let t = t.rem_euclid(1.0);
        match self {
            ParamCurve::Circle { center, u, v, radius } => {
                let (sin, cos) = (TAU * t).sin_cos();
                [
                    center[0] + radius * (u[0] * cos + v[0] * sin),
                    center[1] + radius * (u[1] * cos + v[1] * sin),
                    center[2] + radius * (u[2] * cos + v[2] * sin),
                ]
            }
            ParamCurve::Polygon { vertices } => {
                let n = vertices.len();
                let x = t * n as f64;
                let i = (x.floor() as usize).min(n - 1);
                let frac = x - i as f64;
                let a = vertices[i];
                let b = vertices[(i + 1) % n];
                [
                    a[0] + (b[0] - a[0]) * frac,
                    a[1] + (b[1] - a[1]) * frac,
                    a[2] + (b[2] - a[2]) * frac,
                ]
            }
        }
    }

    /// Same curve with the opposite orientation.
    pub fn reversed(&self) -> ParamCurve {
        match self {
            ParamCurve::Circle { center, u, v, radius } => ParamCurve::Circle {
                center: *center,
                u: *u,
                v: [-v[0], -v[1], -v[2]],
                radius: *radius,
            },
            ParamCurve::Polygon { vertices } => {
                let mut rev = vertices.clone();
                rev.reverse();
                ParamCurve::Polygon { vertices: rev }
            }
        }
    }
}

/// Serialize a rational as an explicit numerator/denominator pair.
pub(crate) fn serialize_rational<S: serde::Serializer>(
    r: &Rational64,
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut s = ser.serialize_struct("Rational", 2)?;
    s.serialize_field("num", r.numer())?;
    s.serialize_field("den", r.denom())?;
    s.end()
}

/// Winding and index of one closed curve.
#[derive(Clone, Debug, Serialize)]
pub struct IndexReport {
    pub n_samples: usize,
    pub winding: i64,
    /// `-winding / 2`, exact.
    #[serde(serialize_with = "serialize_rational")]
    pub index: Rational64,
    pub max_phase_step: f64,
    /// `|Q|` statistics along the curve.
    pub min_abs_q: f64,
    pub median_abs_q: f64,
    #[serde(skip)]
    pub q_samples: Vec<Complex64>,
}

const MAX_SAMPLES: usize = 1 << 16;

/// Winding of an arbitrary complex-valued field along the parameter circle.
/// Samples double adaptively until the largest phase step is below `π/2`.
pub fn curve_index_of_field(
    field: &dyn Fn(f64) -> Result<Complex64>,
    n0: usize,
) -> Result<IndexReport> {
    let mut n = n0.max(8);
    loop {
        let mut samples = Vec::with_capacity(n);
        for k in 0..n {
            samples.push(field(k as f64 / n as f64)?);
        }
        let mut magnitudes: Vec<f64> = samples.iter().map(|q| q.norm()).collect();
        magnitudes.sort_by(f64::total_cmp);
        let median = magnitudes[magnitudes.len() / 2];
        let min = magnitudes[0];
        if median == 0.0 || min < CLASSIFY_FACTOR * median {
            return Err(Error::CurveMeetsLocus(min, median));
        }
        let mut total = 0.0f64;
        let mut max_step = 0.0f64;
        for k in 0..n {
            let step = (samples[(k + 1) % n] / samples[k]).arg();
            max_step = max_step.max(step.abs());
            total += step;
        }
        if max_step < std::f64::consts::FRAC_PI_2 {
            let winding = (total / TAU).round() as i64;
            return Ok(IndexReport {
                n_samples: n,
                winding,
                index: Rational64::new(-winding, 2),
                max_phase_step: max_step,
                min_abs_q: min,
                median_abs_q: median,
                q_samples: samples,
            });
        }
        n *= 2;
        if n > MAX_SAMPLES {
            return Err(Error::SamplingUnstable(n));
        }
    }
}

/// Winding of `Q` along a closed curve on `M`.
pub fn curve_index(s: &SurfaceSpec, curve: &ParamCurve, n0: usize) -> Result<IndexReport> {
    let field = |t: f64| -> Result<Complex64> {
        let p = s.chart_point(curve.at(t))?;
        Ok(tensor::q_from_jet(&s.rho_jet(p, 6)?)?.q)
    };
    curve_index_of_field(&field, n0)
}

/// Result of a local-index computation at a smooth locus point.
#[derive(Clone, Debug, Serialize)]
pub struct LocalIndex {
    #[serde(serialize_with = "serialize_rational")]
    pub index: Rational64,
    pub winding: i64,
    pub radius: f64,
    pub theta: [f64; 3],
}

fn normalize3(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Canonical sign for a locus tangent: positive component along the diagonal
/// rotation direction `(0, 1, 1)`, with axis fallbacks for ties.
fn orient_tangent(t: [f64; 3]) -> [f64; 3] {
    for reference in [[0.0, 1.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
        let dot = t[0] * reference[0] + t[1] * reference[1] + t[2] * reference[2];
        if dot.abs() > 1e-9 {
            return if dot < 0.0 { [-t[0], -t[1], -t[2]] } else { t };
        }
    }
    t
}

/// Frame `(u, v)` spanning the plane transverse to `tangent`, oriented so the
/// loop `u cos + v sin` gives stable circle-invariant perturbation circles
/// local index `+1/2` (see the module notes on conventions).
fn transverse_frame(tangent: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let axis = if tangent[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let u = normalize3(cross3(tangent, axis));
    let v = cross3(tangent, u);
    (u, v)
}

const LOCAL_INDEX_DEFAULT_RADIUS: f64 = 0.05;
const LOCAL_INDEX_MAX_SHRINKS: usize = 8;

/// Local index at a smooth umbilical-curve point: the index of a small
/// transverse-disk boundary, with the radius auto-shrunk until two successive
/// radii agree.
pub fn local_index(s: &SurfaceSpec, theta: [f64; 3]) -> Result<LocalIndex> {
    local_index_with(s, theta, locus::local_q_scale(s)?, LOCAL_INDEX_DEFAULT_RADIUS)
}

pub fn local_index_with(
    s: &SurfaceSpec,
    theta: [f64; 3],
    scale: f64,
    radius0: f64,
) -> Result<LocalIndex> {
    let q0 = {
        let p = s.chart_point(theta)?;
        tensor::q_from_jet(&s.rho_jet(p, 6)?)?.q
    };
    let tol = CLASSIFY_FACTOR * scale;
    if q0.norm() > tol {
        return Err(Error::NotUmbilical(q0.norm(), tol));
    }
    let tangent = orient_tangent(locus::locus_tangent(s, theta, scale)?);
    let (u, v) = transverse_frame(tangent);
    let index_at = |radius: f64| -> Result<IndexReport> {
        let curve = ParamCurve::Circle { center: theta, u, v, radius };
        curve_index(s, &curve, 64)
    };
    let mut radius = radius0;
    let mut previous: Option<(i64, IndexReport)> = None;
    let mut disagreements = 0usize;
    for _ in 0..LOCAL_INDEX_MAX_SHRINKS {
        match index_at(radius) {
            Ok(report) => {
                if let Some((w_prev, _)) = previous {
                    if w_prev == report.winding {
                        return Ok(LocalIndex {
                            index: report.index,
                            winding: report.winding,
                            radius,
                            theta,
                        });
                    }
                    disagreements += 1;
                    if disagreements >= 2 {
                        return Err(Error::UnstableIndex);
                    }
                }
                previous = Some((report.winding, report));
            }
            // the disk still touches the locus: shrink without judging
            Err(Error::CurveMeetsLocus(..)) => previous = None,
            Err(e) => return Err(e),
        }
        radius /= 2.0;
    }
    Err(Error::UnstableIndex)
}

/// Area vector of a closed curve (about its centroid): fixes the plane and
/// orientation of the surface the curve bounds.
fn area_vector(curve: &ParamCurve, samples: usize) -> [f64; 3] {
    let pts: Vec<[f64; 3]> = (0..samples).map(|k| curve.at(k as f64 / samples as f64)).collect();
    let mut centroid = [0.0f64; 3];
    for p in &pts {
        for i in 0..3 {
            centroid[i] += p[i] / samples as f64;
        }
    }
    let mut area = [0.0f64; 3];
    for k in 0..samples {
        let a = pts[k];
        let b = pts[(k + 1) % samples];
        let ra = [a[0] - centroid[0], a[1] - centroid[1], a[2] - centroid[2]];
        let rb = [b[0] - centroid[0], b[1] - centroid[1], b[2] - centroid[2]];
        let c = cross3(ra, rb);
        for i in 0..3 {
            area[i] += 0.5 * c[i];
        }
    }
    area
}

/// Stokes residual `I_{boundary} - Σ ι_p` over the supplied interior
/// umbilical points; zero when the interior list is complete.
///
/// The curve is assumed near-planar in chart parameters; interior disks are
/// taken in the plane of the boundary with the orientation induced by the
/// boundary traversal, so the residual is orientation-consistent by
/// construction.
pub fn stokes_check(
    s: &SurfaceSpec,
    boundary: &ParamCurve,
    interior: &[[f64; 3]],
) -> Result<Rational64> {
    let boundary_report = curve_index(s, boundary, 256)?;
    let mut residual = boundary_report.index;

    if interior.is_empty() {
        return Ok(residual);
    }
    let normal = normalize3(area_vector(boundary, 512));
    let axis = if normal[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let u = normalize3(cross3(normal, axis));
    let v = cross3(normal, u);

    // keep interior disks away from each other and from the boundary
    let min_sep = {
        let mut sep = f64::INFINITY;
        for (i, a) in interior.iter().enumerate() {
            for b in interior.iter().skip(i + 1) {
                sep = sep.min(s.theta_distance(*a, *b));
            }
            for k in 0..128 {
                sep = sep.min(s.theta_distance(*a, boundary.at(k as f64 / 128.0)));
            }
        }
        sep
    };
    let radius0 = (min_sep / 3.0).min(0.1);

    for &p in interior {
        let index_at = |radius: f64| -> Result<IndexReport> {
            let disk = ParamCurve::Circle { center: p, u, v, radius };
            curve_index(s, &disk, 64)
        };
        let mut radius = radius0;
        let mut prev: Option<i64> = None;
        let mut iota = None;
        for _ in 0..LOCAL_INDEX_MAX_SHRINKS {
            match index_at(radius) {
                Ok(report) => {
                    if prev == Some(report.winding) {
                        iota = Some(report.index);
                        break;
                    }
                    prev = Some(report.winding);
                }
                Err(Error::CurveMeetsLocus(..)) => prev = None,
                Err(e) => return Err(e),
            }
            radius /= 2.0;
        }
        let iota = iota.ok_or(Error::UnstableIndex)?;
        residual -= iota;
    }
    Ok(residual)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_unit_winding() {
        // Q = e^{2πit} along the loop: winding 1, index -1/2
        let field = |t: f64| Ok(Complex64::from_polar(1.0, TAU * t));
        let report = curve_index_of_field(&field, 16).unwrap();
        assert_eq!(report.winding, 1);
        assert_eq!(report.index, Rational64::new(-1, 2));
    }

    #[test]
    fn synthetic_multiwinding_and_reversal() {
        let field = |t: f64| Ok(Complex64::from_polar(2.0, -3.0 * TAU * t));
        let report = curve_index_of_field(&field, 16).unwrap();
        assert_eq!(report.winding, -3);
        assert_eq!(report.index, Rational64::new(3, 2));
        let reversed = |t: f64| Ok(Complex64::from_polar(2.0, 3.0 * TAU * t));
        let r2 = curve_index_of_field(&reversed, 16).unwrap();
        assert_eq!(r2.winding, 3);
        assert_eq!(r2.index, -report.index);
    }

    #[test]
    fn zero_field_meets_locus() {
        let field = |_t: f64| Ok(Complex64::ZERO);
        assert!(matches!(
            curve_index_of_field(&field, 16),
            Err(Error::CurveMeetsLocus(..))
        ));
    }

    #[test]
    fn adaptive_doubling_catches_fast_phase() {
        // winding 5 needs more than 8 samples for the π/2 bound
        let field = |t: f64| Ok(Complex64::from_polar(1.0, 5.0 * TAU * t));
        let report = curve_index_of_field(&field, 8).unwrap();
        assert_eq!(report.winding, 5);
        assert!(report.n_samples > 8);
        assert!(report.max_phase_step < std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn contractible_loop_on_log_torus_has_index_zero() {
        let s = SurfaceSpec::log_torus(0.5).unwrap();
        let curve = ParamCurve::Circle {
            center: [1.0, 2.0, 3.0],
            u: [1.0, 0.0, 0.0],
            v: [0.0, 0.7, 0.7],
            radius: 0.3,
        };
        let report = curve_index(&s, &curve, 64).unwrap();
        assert_eq!(report.winding, 0);
        assert_eq!(report.index, Rational64::new(0, 1));
    }

    #[test]
    fn stokes_with_empty_interior_is_boundary_index() {
        // a contractible loop avoiding the locus with nothing inside
        let s = SurfaceSpec::log_torus(0.5).unwrap();
        let curve = ParamCurve::Circle {
            center: [0.5, 1.5, 2.5],
            u: [1.0, 0.0, 0.0],
            v: [0.0, 1.0, 0.0],
            radius: 0.2,
        };
        let residual = stokes_check(&s, &curve, &[]).unwrap();
        assert_eq!(residual, Rational64::new(0, 1));
    }

    #[test]
    fn local_index_rejects_nonumbilical_point() {
        let s = SurfaceSpec::log_torus(0.5).unwrap();
        assert!(matches!(
            local_index(&s, [0.4, 1.0, 2.0]),
            Err(Error::NotUmbilical(..))
        ));
    }

    #[test]
    fn reparametrization_invariance() {
        // strictly monotone reparametrizations leave the winding unchanged
        let base = |t: f64| Complex64::from_polar(1.0 + 0.3 * (TAU * t).cos(), 2.0 * TAU * t);
        let reparams: Vec<Box<dyn Fn(f64) -> f64>> = vec![
            Box::new(|t| t),
            Box::new(|t| t * t),
            Box::new(|t| t.powf(0.37)),
            Box::new(|t| (t + 0.1 * (TAU * t).sin() / TAU).rem_euclid(1.0)),
        ];
        let mut windings = Vec::new();
        for phi in &reparams {
            let field = |t: f64| Ok(base(phi(t)));
            windings.push(curve_index_of_field(&field, 32).unwrap().winding);
        }
        assert!(windings.iter().all(|&w| w == windings[0]));
    }

    #[test]
    fn polygon_curve_evaluation() {
        let c = ParamCurve::Polygon {
            vertices: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]],
        };
        assert_eq!(c.at(0.0), [0.0, 0.0, 0.0]);
        assert_eq!(c.at(0.25), [1.0, 0.0, 0.0]);
        let mid = c.at(0.125);
        assert!((mid[0] - 0.5).abs() < 1e-15);
        // closure
        let end = c.at(0.999999);
        assert!((end[0] - 0.0).abs() < 1e-4);
    }
}
