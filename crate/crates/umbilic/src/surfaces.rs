//! Catalog of defining functions `rho` with closed-form jets and chart
//! parametrizations of `M = {rho = 0}`.
//!
//! Kinds: the unit sphere, polynomial perturbations `rho0 + eps * rho'` of
//! the sphere (the ellipsoid is the special case with the ellipsoidal
//! `rho'`), and the log torus `(log|z|)^2 + (log|w|)^2 - eps^2`, the boundary
//! of the Grauert tube of a flat 2-torus. The sign convention puts `rho < 0`
//! inside the domain.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{Jet, Multi, Var};
use crate::perturb::{BidegreePoly, TermSpec};
use crate::poly::MonomialPoly;

const TAU: f64 = std::f64::consts::TAU;

/// Which catalog family a [`SurfaceSpec`] belongs to.
#[derive(Clone, Debug, PartialEq)]
pub enum SurfaceKind {
    Sphere,
    PerturbedSphere { rho_prime: BidegreePoly, eps: f64 },
    Ellipsoid { a: f64, b: f64, eps: f64 },
    LogTorus { eps: f64 },
}

/// Conservative bound for `sup |Hess rho'|` over the closed unit bidisc:
/// every second derivative of `z^a w^b z̄^c w̄^d` is bounded by `t(t-1)` there,
/// `t` the total degree.
fn hessian_bound(rho_prime: &BidegreePoly) -> f64 {
    rho_prime
        .to_terms()
        .iter()
        .map(|t| {
            let total = (t.a + t.b + t.c + t.d) as f64;
            (t.re * t.re + t.im * t.im).sqrt() * total * (total - 1.0)
        })
        .sum()
}

/// A validated catalog surface: defining function, jet provider and chart.
#[derive(Clone, Debug)]
pub struct SurfaceSpec {
    kind: SurfaceKind,
    /// Cached defining polynomial for the sphere family; `None` for log_torus.
    poly: Option<MonomialPoly>,
}

impl SurfaceSpec {
    pub fn sphere() -> Self {
        SurfaceSpec { kind: SurfaceKind::Sphere, poly: Some(MonomialPoly::unit_sphere()) }
    }

    /// `rho = |z|^2 + |w|^2 - 1 + eps * rho'` with the O(eps^2) tail set to
    /// zero. `rho'` must be real-valued, have no constant or linear part, and
    /// pass the coarse strict-pseudoconvexity guard
    /// `eps * (Hessian bound of rho' on the unit bidisc) < 1/2`.
    pub fn perturbed_sphere(rho_prime: BidegreePoly, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidSurface("eps must be positive".into()));
        }
        if !rho_prime.is_real() {
            return Err(Error::NotRealSymmetric);
        }
        for (&(p, q), _) in rho_prime.buckets() {
            if (p + q) < 2 {
                return Err(Error::InvalidSurface(
                    "perturbation must have no constant or linear terms".into(),
                ));
            }
        }
        let guard = eps * hessian_bound(&rho_prime);
        if guard >= 0.5 {
            return Err(Error::PscGuard(guard));
        }
        let poly = MonomialPoly::unit_sphere()
            .add(&rho_prime.to_monomial_poly().scale(Complex64::new(eps, 0.0)));
        Ok(SurfaceSpec { kind: SurfaceKind::PerturbedSphere { rho_prime, eps }, poly: Some(poly) })
    }

    /// Real ellipsoid: the perturbed sphere with the ellipsoidal `rho'`,
    /// `A, B >= 0`, `AB != 0`.
    pub fn ellipsoid(a: f64, b: f64, eps: f64) -> Result<Self> {
        if !(a >= 0.0 && b >= 0.0 && a * b != 0.0) {
            return Err(Error::InvalidSurface("ellipsoid needs A, B >= 0 with AB != 0".into()));
        }
        let rho_prime = BidegreePoly::ellipsoidal(a, b)?;
        let inner = SurfaceSpec::perturbed_sphere(rho_prime, eps)?;
        Ok(SurfaceSpec { kind: SurfaceKind::Ellipsoid { a, b, eps }, poly: inner.poly })
    }

    /// `(log|z|)^2 + (log|w|)^2 - eps^2`, defined off the coordinate axes.
    pub fn log_torus(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidSurface("eps must be positive".into()));
        }
        Ok(SurfaceSpec { kind: SurfaceKind::LogTorus { eps }, poly: None })
    }

    pub fn kind(&self) -> &SurfaceKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            SurfaceKind::Sphere => "sphere",
            SurfaceKind::PerturbedSphere { .. } => "perturbed_sphere",
            SurfaceKind::Ellipsoid { .. } => "ellipsoid",
            SurfaceKind::LogTorus { .. } => "log_torus",
        }
    }

    /// Order-`order` jet of `rho` at `p`. For the log torus the jet of
    /// `log|z| = log(z z̄)/2` uses the closed forms
    /// `∂_z^k log|z| = (-1)^{k-1} (k-1)! / (2 z^k)`.
    pub fn rho_jet(&self, p: (Complex64, Complex64), order: usize) -> Result<Jet> {
        match &self.kind {
            SurfaceKind::LogTorus { eps } => {
                if p.0.norm_sqr() == 0.0 || p.1.norm_sqr() == 0.0 {
                    return Err(Error::AxisPoint);
                }
                let u = log_abs_jet(p, Var::Z, order)?;
                let v = log_abs_jet(p, Var::W, order)?;
                let e2 = Jet::constant(p, order, Complex64::new(eps * eps, 0.0))?;
                Ok(u.mul(&u)?.add(&v.mul(&v)?)?.sub(&e2)?.symmetrize_real())
            }
            _ => {
                let poly = self.poly.as_ref().expect("sphere family caches its polynomial");
                Ok(poly.to_jet(p, order)?.symmetrize_real())
            }
        }
    }

    /// Value of `rho` at a point of C^2.
    pub fn rho_value(&self, p: (Complex64, Complex64)) -> f64 {
        match &self.kind {
            SurfaceKind::LogTorus { eps } => {
                let lz = p.0.norm().ln();
                let lw = p.1.norm().ln();
                lz * lz + lw * lw - eps * eps
            }
            _ => self.poly.as_ref().unwrap().eval(p.0, p.1).re,
        }
    }

    /// Evaluation with independent conjugate slots (used by the
    /// finite-difference test oracle).
    pub fn rho_eval4(&self, z: Complex64, w: Complex64, zb: Complex64, wb: Complex64) -> Complex64 {
        match &self.kind {
            SurfaceKind::LogTorus { eps } => {
                let u = (z * zb).ln() * 0.5;
                let v = (w * wb).ln() * 0.5;
                u * u + v * v - eps * eps
            }
            _ => self.poly.as_ref().unwrap().eval4(z, w, zb, wb),
        }
    }

    /// Chart map onto `M`. The sphere family projects the Hopf-style
    /// direction `(cos t1 e^{i t2}, sin t1 e^{i t3})` radially onto
    /// `{rho = 0}` by scalar Newton; the log-torus chart lies on `M` exactly.
    pub fn chart_point(&self, theta: [f64; 3]) -> Result<(Complex64, Complex64)> {
        match &self.kind {
            SurfaceKind::LogTorus { eps } => {
                let z = Complex64::new(eps * theta[0].cos(), theta[1]).exp();
                let w = Complex64::new(eps * theta[0].sin(), theta[2]).exp();
                Ok((z, w))
            }
            _ => {
                let dz = Complex64::from_polar(theta[0].cos(), theta[1]);
                let dw = Complex64::from_polar(theta[0].sin(), theta[2]);
                let profile = self.poly.as_ref().unwrap().radial_profile(dz, dw);
                let r = radial_newton(&profile)?;
                Ok((dz * r, dw * r))
            }
        }
    }

    /// Chart parameters of an on-surface point (inverse of [`Self::chart_point`]).
    pub fn chart_invert(&self, p: (Complex64, Complex64)) -> [f64; 3] {
        match &self.kind {
            SurfaceKind::LogTorus { eps } => {
                let t1 = (p.1.norm().ln() / eps).atan2(p.0.norm().ln() / eps);
                [t1.rem_euclid(TAU), p.0.arg().rem_euclid(TAU), p.1.arg().rem_euclid(TAU)]
            }
            _ => {
                let t1 = p.1.norm().atan2(p.0.norm());
                let t2 = if p.0.norm() > 1e-14 { p.0.arg().rem_euclid(TAU) } else { 0.0 };
                let t3 = if p.1.norm() > 1e-14 { p.1.arg().rem_euclid(TAU) } else { 0.0 };
                [t1, t2, t3]
            }
        }
    }

    /// Scanning ranges of the chart parameters (half-open boxes).
    pub fn theta_domain(&self) -> [(f64, f64); 3] {
        match self.kind {
            SurfaceKind::LogTorus { .. } => [(0.0, TAU), (0.0, TAU), (0.0, TAU)],
            _ => [(0.0, std::f64::consts::FRAC_PI_2), (0.0, TAU), (0.0, TAU)],
        }
    }

    /// Wrapped distance between chart parameter triples; every slot of both
    /// chart families is 2π-periodic.
    pub fn theta_distance(&self, a: [f64; 3], b: [f64; 3]) -> f64 {
        let mut acc = 0.0;
        for i in 0..3 {
            let mut d = (a[i] - b[i]).abs() % TAU;
            if d > TAU / 2.0 {
                d = TAU - d;
            }
            acc += d * d;
        }
        acc.sqrt()
    }

    /// Fefferman determinant `J` at an on-surface point; positive values mean
    /// strict pseudoconvexity under the crate's sign convention.
    pub fn strict_psc_check(&self, p: (Complex64, Complex64)) -> Result<f64> {
        let rho = self.rho_value(p);
        if rho.abs() > 1e-8 {
            return Err(Error::OffSurface(rho.abs()));
        }
        let jet = self.rho_jet(p, 2)?;
        crate::tensor::fefferman_j(&jet)
    }

    pub fn to_file_spec(&self) -> SurfaceFile {
        match &self.kind {
            SurfaceKind::Sphere => SurfaceFile { kind: "sphere".into(), ..Default::default() },
            SurfaceKind::PerturbedSphere { rho_prime, eps } => SurfaceFile {
                kind: "perturbed_sphere".into(),
                eps: Some(*eps),
                term: rho_prime.to_terms(),
                ..Default::default()
            },
            SurfaceKind::Ellipsoid { a, b, eps } => SurfaceFile {
                kind: "ellipsoid".into(),
                eps: Some(*eps),
                a: Some(*a),
                b: Some(*b),
                ..Default::default()
            },
            SurfaceKind::LogTorus { eps } => {
                SurfaceFile { kind: "log_torus".into(), eps: Some(*eps), ..Default::default() }
            }
        }
    }

    pub fn from_file_spec(file: &SurfaceFile) -> Result<Self> {
        let eps = || file.eps.ok_or_else(|| Error::Config("missing eps".into()));
        match file.kind.as_str() {
            "sphere" => Ok(SurfaceSpec::sphere()),
            "log_torus" => SurfaceSpec::log_torus(eps()?),
            "ellipsoid" => {
                let a = file.a.ok_or_else(|| Error::Config("ellipsoid needs A".into()))?;
                let b = file.b.ok_or_else(|| Error::Config("ellipsoid needs B".into()))?;
                SurfaceSpec::ellipsoid(a, b, eps()?)
            }
            "perturbed_sphere" => {
                let rho_prime = BidegreePoly::from_terms(&file.term)?;
                SurfaceSpec::perturbed_sphere(rho_prime, eps()?)
            }
            other => Err(Error::Config(format!("unknown surface kind '{other}'"))),
        }
    }

    /// Parse a TOML or JSON surface description (format detected by the first
    /// non-space byte). The loader enforces reality symmetry of `rho'`.
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim_start();
        let file: SurfaceFile = if trimmed.starts_with('{') {
            serde_json::from_str(trimmed)?
        } else {
            toml::from_str(text)?
        };
        Self::from_file_spec(&file)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// On-disk description of a surface (TOML or JSON).
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SurfaceFile {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, alias = "A", skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, alias = "B", skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub term: Vec<TermSpec>,
}

/// Jet of `log|z|` (or `log|w|`) at a basepoint off the axis.
fn log_abs_jet(base: (Complex64, Complex64), which: Var, order: usize) -> Result<Jet> {
    let b = match which {
        Var::Z => base.0,
        Var::W => base.1,
        _ => unreachable!(),
    };
    let mut jet = Jet::constant(base, order, Complex64::new(b.norm().ln(), 0.0))?;
    let (hol, anti): (Multi, Multi) = match which {
        Var::Z => ([1, 0, 0, 0], [0, 0, 1, 0]),
        _ => ([0, 1, 0, 0], [0, 0, 0, 1]),
    };
    for k in 1..=order as u8 {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let coef = sign / (2.0 * k as f64 * b.powi(k as i32));
        let mh = hol.map(|e| e * k);
        let ma = anti.map(|e| e * k);
        *jet.coeff_mut(mh) = coef;
        *jet.coeff_mut(ma) = coef.conj();
    }
    Ok(jet)
}

const RADIAL_NEWTON_MAX_ITERS: usize = 50;
const RADIAL_NEWTON_TOL: f64 = 1e-13;

/// Positive root of the radial profile polynomial near `r = 1`.
fn radial_newton(profile: &[f64]) -> Result<f64> {
    let eval = |r: f64| -> (f64, f64) {
        let mut v = 0.0;
        let mut d = 0.0;
        for (k, c) in profile.iter().enumerate() {
            v += c * r.powi(k as i32);
            if k > 0 {
                d += c * k as f64 * r.powi(k as i32 - 1);
            }
        }
        (v, d)
    };
    let mut r = 1.0f64;
    for _ in 0..RADIAL_NEWTON_MAX_ITERS {
        let (v, d) = eval(r);
        if v.abs() <= RADIAL_NEWTON_TOL {
            return Ok(r);
        }
        if d == 0.0 || !d.is_finite() {
            break;
        }
        r -= v / d;
        if !(r.is_finite() && r > 0.0) {
            break;
        }
    }
    let (v, _) = eval(r);
    if v.abs() <= RADIAL_NEWTON_TOL && r.is_finite() && r > 0.0 {
        Ok(r)
    } else {
        Err(Error::ChartNoConvergence(RADIAL_NEWTON_MAX_ITERS))
    }
}
