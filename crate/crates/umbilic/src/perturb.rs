//! Exact polynomial calculus for perturbations of the unit sphere.
//!
//! Coefficients are complex numbers with `BigRational` parts, so the operator
//! identities (vanishing of `Q0` on low bidegrees, linearity, the bidegree
//! shift `(p,q) -> (p+2, q-2)`) hold exactly; floating point enters only when
//! a polynomial is evaluated at a numeric point.
//!
//! `Q0(P) = L̄0^4 (P_{Z^2}(L0, L0))` with `L0 = -w̄ ∂_z + z̄ ∂_w` and
//! `L̄0 = -w ∂_z̄ + z ∂_w̄`; `P_{Z^2}(L0,L0) = w̄² P_zz - 2 z̄ w̄ P_zw + z̄² P_ww`.
//! In the blow-up chart `z = ζ z̃, w = ζ` the sphere is `|ζ|²(1+|z̃|²) = 1`,
//! and eliminating `ζ̄` turns `Q' = Q0(ρ')` into a Laurent function of `ζ`
//! whose winding numbers are counted two independent ways: numerator roots
//! (companion-matrix eigenvalues) against phase-unwrapped circle sampling.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::Multi;
use crate::poly::MonomialPoly;
use crate::Var;

/// Complex number with exact rational real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl CRat {
    pub fn zero() -> Self {
        CRat { re: BigRational::zero(), im: BigRational::zero() }
    }

    pub fn from_int(re: i64, im: i64) -> Self {
        CRat { re: BigRational::from_integer(re.into()), im: BigRational::from_integer(im.into()) }
    }

    /// Exact conversion; every finite f64 is a rational number.
    pub fn from_f64(re: f64, im: f64) -> Option<Self> {
        Some(CRat { re: BigRational::from_float(re)?, im: BigRational::from_float(im)? })
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        CRat { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn add(&self, o: &Self) -> Self {
        CRat { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    pub fn mul(&self, o: &Self) -> Self {
        CRat {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    pub fn scale_int(&self, k: i64) -> Self {
        let k = BigRational::from_integer(k.into());
        CRat { re: &self.re * &k, im: &self.im * &k }
    }

    pub fn neg(&self) -> Self {
        CRat { re: -self.re.clone(), im: -self.im.clone() }
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }
}

/// Exact polynomial in `(z, w, z̄, w̄)`, zero coefficients pruned.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExactPoly {
    terms: BTreeMap<Multi, CRat>,
}

impl ExactPoly {
    pub fn zero() -> Self {
        ExactPoly::default()
    }

    pub fn monomial(m: Multi, c: CRat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        ExactPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Multi, &CRat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.iter().map(|&e| e as u32).sum())
            .max()
            .unwrap_or(0)
    }

    fn insert(&mut self, m: Multi, c: CRat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&c);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &ExactPoly) -> ExactPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(*m, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &ExactPoly) -> ExactPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(*m, c.neg());
        }
        out
    }

    pub fn mul(&self, other: &ExactPoly) -> ExactPoly {
        let mut out = ExactPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = [ma[0] + mb[0], ma[1] + mb[1], ma[2] + mb[2], ma[3] + mb[3]];
                out.insert(m, ca.mul(cb));
            }
        }
        out
    }

    pub fn scale(&self, c: &CRat) -> ExactPoly {
        let mut out = ExactPoly::zero();
        for (m, v) in &self.terms {
            out.insert(*m, v.mul(c));
        }
        out
    }

    pub fn wirtinger(&self, var: Var) -> ExactPoly {
        let slot = match var {
            Var::Z => 0,
            Var::W => 1,
            Var::ZBar => 2,
            Var::WBar => 3,
        };
        let mut out = ExactPoly::zero();
        for (m, c) in &self.terms {
            if m[slot] == 0 {
                continue;
            }
            let mut mm = *m;
            mm[slot] -= 1;
            out.insert(mm, c.scale_int(m[slot] as i64));
        }
        out
    }

    /// Polynomial of the conjugated function: swaps `(z,w) <-> (z̄,w̄)` and
    /// conjugates coefficients.
    pub fn conj_swap(&self) -> ExactPoly {
        let mut out = ExactPoly::zero();
        for (m, c) in &self.terms {
            out.insert([m[2], m[3], m[0], m[1]], c.conj());
        }
        out
    }

    /// Exact test for real-valuedness on real points.
    pub fn is_real(&self) -> bool {
        *self == self.conj_swap()
    }

    pub fn eval4(&self, z: Complex64, w: Complex64, zb: Complex64, wb: Complex64) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for (m, c) in &self.terms {
            acc += c.to_c64()
                * z.powi(m[0] as i32)
                * w.powi(m[1] as i32)
                * zb.powi(m[2] as i32)
                * wb.powi(m[3] as i32);
        }
        acc
    }

    pub fn eval(&self, z: Complex64, w: Complex64) -> Complex64 {
        self.eval4(z, w, z.conj(), w.conj())
    }

    pub fn to_monomial_poly(&self) -> MonomialPoly {
        MonomialPoly::new(self.terms.iter().map(|(m, c)| (*m, c.to_c64())).collect())
    }
}

/// One monomial `(re + i im) z^a w^b z̄^c w̄^d` in the surface/perturbation
/// file format.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct TermSpec {
    pub a: u8,
    pub b: u8,
    pub c: u8,
    pub d: u8,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// Polynomial in `(z, w, z̄, w̄)` stored by bidegree components `H_{p,q}`,
/// `p` the holomorphic and `q` the antiholomorphic degree.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BidegreePoly {
    buckets: BTreeMap<(u8, u8), ExactPoly>,
}

/// Exact bucket sort of monomials by bidegree.
pub fn decompose(p: &ExactPoly) -> BidegreePoly {
    let mut buckets: BTreeMap<(u8, u8), ExactPoly> = BTreeMap::new();
    for (m, c) in p.terms() {
        let key = (m[0] + m[1], m[2] + m[3]);
        buckets.entry(key).or_default().insert(*m, c.clone());
    }
    buckets.retain(|_, p| !p.is_zero());
    BidegreePoly { buckets }
}

impl BidegreePoly {
    pub fn from_terms(terms: &[TermSpec]) -> Result<Self> {
        let mut p = ExactPoly::zero();
        for t in terms {
            let c = CRat::from_f64(t.re, t.im)
                .ok_or_else(|| Error::Config("non-finite monomial coefficient".into()))?;
            p.insert([t.a, t.b, t.c, t.d], c);
        }
        Ok(decompose(&p))
    }

    pub fn to_terms(&self) -> Vec<TermSpec> {
        let mut out = Vec::new();
        for p in self.buckets.values() {
            for (m, c) in p.terms() {
                out.push(TermSpec {
                    a: m[0],
                    b: m[1],
                    c: m[2],
                    d: m[3],
                    re: c.re.to_f64().unwrap_or(f64::NAN),
                    im: c.im.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        out
    }

    /// The ellipsoidal perturbation `A(z² + z̄² + 2|z|²) + B(w² + w̄² + 2|w|²)`.
    pub fn ellipsoidal(a: f64, b: f64) -> Result<Self> {
        let terms = [
            TermSpec { a: 2, b: 0, c: 0, d: 0, re: a, im: 0.0 },
            TermSpec { a: 0, b: 0, c: 2, d: 0, re: a, im: 0.0 },
            TermSpec { a: 1, b: 0, c: 1, d: 0, re: 2.0 * a, im: 0.0 },
            TermSpec { a: 0, b: 2, c: 0, d: 0, re: b, im: 0.0 },
            TermSpec { a: 0, b: 0, c: 0, d: 2, re: b, im: 0.0 },
            TermSpec { a: 0, b: 1, c: 0, d: 1, re: 2.0 * b, im: 0.0 },
        ];
        Self::from_terms(&terms)
    }

    pub fn component(&self, p: u8, q: u8) -> Option<&ExactPoly> {
        self.buckets.get(&(p, q))
    }

    pub fn buckets(&self) -> impl Iterator<Item = (&(u8, u8), &ExactPoly)> {
        self.buckets.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.buckets.keys().map(|(p, q)| (*p + *q) as u32).max().unwrap_or(0)
    }

    /// Flatten back to a plain polynomial; the sum of the components
    /// reproduces the input of [`decompose`] exactly.
    pub fn to_poly(&self) -> ExactPoly {
        let mut out = ExactPoly::zero();
        for p in self.buckets.values() {
            out = out.add(p);
        }
        out
    }

    pub fn is_real(&self) -> bool {
        self.to_poly().is_real()
    }

    pub fn to_monomial_poly(&self) -> MonomialPoly {
        self.to_poly().to_monomial_poly()
    }
}

fn lbar0(f: &ExactPoly) -> ExactPoly {
    // -w f_z̄ + z f_w̄
    let w = ExactPoly::monomial([0, 1, 0, 0], CRat::from_int(-1, 0));
    let z = ExactPoly::monomial([1, 0, 0, 0], CRat::from_int(1, 0));
    w.mul(&f.wirtinger(Var::ZBar)).add(&z.mul(&f.wirtinger(Var::WBar)))
}

/// The operator `Q0` on a plain polynomial.
pub fn q0_poly(p: &ExactPoly) -> ExactPoly {
    let wb2 = ExactPoly::monomial([0, 0, 0, 2], CRat::from_int(1, 0));
    let zbwb = ExactPoly::monomial([0, 0, 1, 1], CRat::from_int(-2, 0));
    let zb2 = ExactPoly::monomial([0, 0, 2, 0], CRat::from_int(1, 0));
    let hess = wb2
        .mul(&p.wirtinger(Var::Z).wirtinger(Var::Z))
        .add(&zbwb.mul(&p.wirtinger(Var::Z).wirtinger(Var::W)))
        .add(&zb2.mul(&p.wirtinger(Var::W).wirtinger(Var::W)));
    let mut f = hess;
    for _ in 0..4 {
        f = lbar0(&f);
    }
    f
}

/// `Q0` applied componentwise; maps `H_{p,q}` into `H_{p+2,q-2}` and kills
/// every component with `p < 2` or `q < 2`.
pub fn q0(p: &BidegreePoly) -> BidegreePoly {
    decompose(&q0_poly(&p.to_poly()))
}

/// A polynomial is almost circular when `P_{p,q} = 0` for `|p - q| >= 4`.
pub fn is_almost_circular(p: &BidegreePoly) -> bool {
    p.buckets.keys().all(|(a, b)| (*a as i32 - *b as i32).abs() < 4)
}

/// Exact polynomial in the blow-up variables `(z̃, z̄̃)`.
pub type Poly2 = BTreeMap<(u8, u8), CRat>;

fn p2_insert(p: &mut Poly2, m: (u8, u8), c: CRat) {
    if c.is_zero() {
        return;
    }
    match p.entry(m) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            let s = e.get().add(&c);
            if s.is_zero() {
                e.remove();
            } else {
                *e.get_mut() = s;
            }
        }
    }
}

fn p2_eval(p: &Poly2, zt: Complex64) -> Complex64 {
    let mut acc = Complex64::ZERO;
    for ((a, c), v) in p {
        acc += v.to_c64() * zt.powi(*a as i32) * zt.conj().powi(*c as i32);
    }
    acc
}

/// One Laurent coefficient of `R`: `b_r(z̃, z̄̃) / (1 + |z̃|²)^{s_r}`.
#[derive(Clone, Debug)]
pub struct ZetaTerm {
    pub numer: Poly2,
    pub denom_pow: u32,
}

/// `R(ζ, z̃) = Σ_r ζ^r b_r(z̃)/(1+|z̃|²)^{s_r}`: the function `Q'` carried to
/// the blow-up chart with `ζ̄` eliminated through the sphere relation
/// `ζ̄ = 1/(ζ (1+|z̃|²))`.
#[derive(Clone, Debug, Default)]
pub struct ZetaLaurent {
    pub terms: BTreeMap<i32, ZetaTerm>,
}

impl ZetaLaurent {
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Numeric Laurent coefficients at a fixed `z̃`, sorted by exponent.
    pub fn coeffs_at(&self, zt: Complex64) -> Vec<(i32, Complex64)> {
        let denom = 1.0 + zt.norm_sqr();
        self.terms
            .iter()
            .map(|(r, t)| (*r, p2_eval(&t.numer, zt) / denom.powi(t.denom_pow as i32)))
            .collect()
    }

    /// Evaluate `R(ζ)` at fixed `z̃`.
    pub fn eval(&self, zt: Complex64, zeta: Complex64) -> Complex64 {
        self.coeffs_at(zt).into_iter().map(|(r, c)| c * zeta.powi(r)).sum()
    }
}

/// Substitute `z = ζ z̃, w = ζ` into `Q' = Q0(ρ')`, eliminate `ζ̄` on the
/// sphere, and collect powers of `ζ`.
///
/// A monomial `γ z^a w^b z̄^c w̄^d` of bidegree `(l, q) = (a+b, c+d)` becomes
/// `γ z̃^a z̄̃^c ζ^{l-q} / (1+|z̃|²)^q`; per power of `ζ` the contributions are
/// put over the largest denominator, which keeps the numerators polynomial.
pub fn zeta_laurent(rho_prime: &BidegreePoly) -> Result<ZetaLaurent> {
    if !rho_prime.is_real() {
        return Err(Error::NotRealSymmetric);
    }
    let qp = q0_poly(&rho_prime.to_poly());
    let mut groups: BTreeMap<i32, Vec<(Multi, CRat, u32)>> = BTreeMap::new();
    for (m, c) in qp.terms() {
        let l = (m[0] + m[1]) as i32;
        let q = (m[2] + m[3]) as u32;
        groups.entry(l - q as i32).or_default().push((*m, c.clone(), q));
    }
    let mut out = ZetaLaurent::default();
    for (r, contribs) in groups {
        let s_r = contribs.iter().map(|(_, _, q)| *q).max().unwrap_or(0);
        let mut numer = Poly2::new();
        for (m, c, q) in contribs {
            let k = s_r - q;
            for j in 0..=k {
                let coef = c.mul(&CRat {
                    re: BigRational::from_integer(binomial(k, j)),
                    im: BigRational::zero(),
                });
                p2_insert(&mut numer, (m[0] + j as u8, m[2] + j as u8), coef);
            }
        }
        if !numer.is_empty() {
            out.terms.insert(r, ZetaTerm { numer, denom_pow: s_r });
        }
    }
    Ok(out)
}

fn binomial(n: u32, k: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Outcome of the dual winding computation at one `z̃`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct WindingSample {
    pub zt_re: f64,
    pub zt_im: f64,
    pub winding: i64,
}

const BOUNDARY_ROOT_REL: f64 = 1e-9;

/// Winding number of `R(·, z̃)` along the circle `|ζ|² = 1/(1+|z̃|²)`,
/// computed as (numerator roots inside, by companion-matrix eigenvalues)
/// minus the pole order at `ζ = 0`, and cross-validated against direct
/// phase-unwrapped sampling on the circle. The two integers must agree.
pub fn winding_at(r: &ZetaLaurent, zt: Complex64) -> Result<i64> {
    let coeffs: Vec<(i32, Complex64)> = r
        .coeffs_at(zt)
        .into_iter()
        .filter(|(_, c)| c.norm_sqr() != 0.0)
        .collect();
    if coeffs.is_empty() {
        return Err(Error::DegenerateWinding);
    }
    let radius = 1.0 / (1.0 + zt.norm_sqr()).sqrt();
    let r_min = coeffs.first().unwrap().0;
    let r_max = coeffs.last().unwrap().0;
    let degree = (r_max - r_min) as usize;

    // dense numerator coefficients; constant term is the zeta^{r_min} one, so
    // winding = r_min + (numerator roots strictly inside the circle)
    let mut numer = vec![Complex64::ZERO; degree + 1];
    for (rr, c) in &coeffs {
        numer[(rr - r_min) as usize] = *c;
    }

    let inside = if degree == 0 {
        0
    } else {
        let lead = numer[degree];
        let n = degree;
        let mut companion = DMatrix::<Complex64>::zeros(n, n);
        for i in 1..n {
            companion[(i, i - 1)] = Complex64::ONE;
        }
        for i in 0..n {
            companion[(i, n - 1)] = -numer[i] / lead;
        }
        let eig = companion.eigenvalues().ok_or(Error::SamplingUnstable(0))?;
        let mut count = 0i64;
        for lambda in eig.iter() {
            let d = lambda.norm();
            if (d - radius).abs() < BOUNDARY_ROOT_REL * radius {
                return Err(Error::BoundaryRoot);
            }
            if d < radius {
                count += 1;
            }
        }
        count
    };
    let w_companion = r_min as i64 + inside;

    let w_phase = phase_winding(&coeffs, radius)?;
    if w_companion != w_phase {
        return Err(Error::WindingMismatch(w_companion, w_phase));
    }
    Ok(w_companion)
}

fn phase_winding(coeffs: &[(i32, Complex64)], radius: f64) -> Result<i64> {
    let eval = |zeta: Complex64| -> Complex64 { coeffs.iter().map(|(r, c)| c * zeta.powi(*r)).sum() };
    let mut n = 1024usize;
    loop {
        let samples: Vec<Complex64> = (0..n)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                eval(Complex64::from_polar(radius, t))
            })
            .collect();
        if samples.iter().any(|s| s.norm_sqr() == 0.0) {
            return Err(Error::BoundaryRoot);
        }
        let mut total = 0.0f64;
        let mut max_step = 0.0f64;
        for k in 0..n {
            let step = (samples[(k + 1) % n] / samples[k]).arg();
            max_step = max_step.max(step.abs());
            total += step;
        }
        if max_step < std::f64::consts::FRAC_PI_2 {
            return Ok((total / (2.0 * std::f64::consts::PI)).round() as i64);
        }
        n *= 2;
        if n > 1 << 16 {
            return Err(Error::SamplingUnstable(n));
        }
    }
}

/// Report of a scan over candidate blow-up parameters `z̃`.
#[derive(Clone, Debug, Default, Serialize)]
pub struct GenericityReport {
    /// First admissible `z̃` with nonzero winding, if any.
    pub witness: Option<WindingSample>,
    /// All successfully computed windings.
    pub windings: Vec<WindingSample>,
    /// Parameters skipped because a root sat on the circle or `R` degenerated.
    pub skipped: usize,
}

impl GenericityReport {
    pub fn found(&self) -> bool {
        self.witness.is_some()
    }
}

/// Scan `z̃` samples for a witness of nonvanishing winding. An empty report
/// flags the perturbation as potentially non-generic.
pub fn genericity_scan(rho_prime: &BidegreePoly, samples: &[Complex64]) -> Result<GenericityReport> {
    let r = zeta_laurent(rho_prime)?;
    let mut report = GenericityReport::default();
    if r.is_empty() {
        return Ok(report);
    }
    for &zt in samples {
        match winding_at(&r, zt) {
            Ok(w) => {
                let s = WindingSample { zt_re: zt.re, zt_im: zt.im, winding: w };
                report.windings.push(s);
                if w != 0 && report.witness.is_none() {
                    report.witness = Some(s);
                }
            }
            // a root on (or nearly on) the circle: pick another parameter
            Err(Error::BoundaryRoot)
            | Err(Error::DegenerateWinding)
            | Err(Error::SamplingUnstable(_)) => report.skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}

/// Default `z̃` samples: 16 points on each of the rings `|z̃| = 0.5` and
/// `|z̃| = 1.5`, with an angular offset keeping them off the coordinate axes.
pub fn default_zt_samples() -> Vec<Complex64> {
    let mut out = Vec::with_capacity(32);
    for &radius in &[0.5, 1.5] {
        for k in 0..16 {
            let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.37) / 16.0;
            out.push(Complex64::from_polar(radius, t));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono(a: u8, b: u8, c: u8, d: u8, re: i64, im: i64) -> ExactPoly {
        ExactPoly::monomial([a, b, c, d], CRat::from_int(re, im))
    }

    #[test]
    fn decompose_buckets() {
        // z^2 z̄ + z z̄^2 -> components at (2,1) and (1,2) only
        let p = mono(2, 0, 1, 0, 1, 0).add(&mono(1, 0, 2, 0, 1, 0));
        let b = decompose(&p);
        let keys: Vec<_> = b.buckets().map(|(k, _)| *k).collect();
        assert_eq!(keys, vec![(1, 2), (2, 1)]);
        assert_eq!(b.to_poly(), p);
    }

    #[test]
    fn decompose_ellipsoidal() {
        let b = BidegreePoly::ellipsoidal(0.3, 0.2).unwrap();
        let keys: Vec<_> = b.buckets().map(|(k, _)| *k).collect();
        assert_eq!(keys, vec![(0, 2), (1, 1), (2, 0)]);
        let c11 = b.component(1, 1).unwrap();
        // 2A z z̄ + 2B w w̄
        assert_eq!(c11.num_terms(), 2);
        assert!(b.is_real());
    }

    #[test]
    fn reality_of_symmetric_construction() {
        let p = mono(2, 1, 0, 1, 3, 4).add(&mono(0, 1, 2, 1, 3, -4));
        assert!(p.is_real());
        let q = mono(2, 1, 0, 1, 3, 4);
        assert!(!q.is_real());
    }

    #[test]
    fn q0_kills_low_bidegree() {
        for m in [
            [1u8, 0, 2, 0],
            [0, 1, 1, 1],
            [3, 1, 1, 0],
            [0, 0, 2, 2],
            [1, 0, 4, 1],
            [5, 1, 0, 0],
        ] {
            let p = ExactPoly::monomial(m, CRat::from_int(7, -3));
            assert!(q0_poly(&p).is_zero(), "{m:?}");
        }
    }

    #[test]
    fn q0_ellipsoidal_is_exactly_zero() {
        let b = BidegreePoly::ellipsoidal(0.3, 0.2).unwrap();
        assert!(q0(&b).is_empty());
    }

    #[test]
    fn q0_frozen_values() {
        // values pinned by independent computer-algebra expansion
        let cases: Vec<(ExactPoly, ExactPoly)> = vec![
            (mono(2, 0, 2, 0, 1, 0), mono(2, 2, 0, 0, 48, 0)),  // z²z̄² -> 48 z²w²
            (mono(0, 2, 0, 2, 1, 0), mono(2, 2, 0, 0, 48, 0)),  // w²w̄² -> 48 z²w²
            (mono(1, 1, 1, 1, 1, 0), mono(2, 2, 0, 0, -48, 0)), // zwz̄w̄ -> -48 z²w²
            (mono(2, 0, 0, 2, 1, 0), mono(4, 0, 0, 0, 48, 0)),  // z²w̄² -> 48 z⁴
            (mono(0, 2, 2, 0, 1, 0), mono(0, 4, 0, 0, 48, 0)),  // w²z̄² -> 48 w⁴
            (mono(2, 0, 1, 1, 1, 0), mono(3, 1, 0, 0, -48, 0)), // z²z̄w̄ -> -48 z³w
            (mono(1, 1, 2, 0, 1, 0), mono(1, 3, 0, 0, 48, 0)),  // zwz̄² -> 48 zw³
            // z³z̄³ -> -288 z²w³w̄ + 432 z³w²z̄
            (
                mono(3, 0, 3, 0, 1, 0),
                mono(2, 3, 0, 1, -288, 0).add(&mono(3, 2, 1, 0, 432, 0)),
            ),
        ];
        for (p, want) in cases {
            assert_eq!(q0_poly(&p), want);
        }
    }

    #[test]
    fn q0_linearity_exact() {
        let p = mono(2, 0, 2, 0, 3, 1).add(&mono(1, 1, 1, 1, -2, 5));
        let q = mono(0, 2, 2, 0, 7, 0).add(&mono(2, 0, 1, 1, 1, -1));
        let alpha = CRat::from_int(3, -4);
        let beta = CRat::from_int(-1, 2);
        let lhs = q0_poly(&p.scale(&alpha).add(&q.scale(&beta)));
        let rhs = q0_poly(&p).scale(&alpha).add(&q0_poly(&q).scale(&beta));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn q0_bidegree_shift() {
        // pseudo-random monomials with p, q >= 2 land exactly in H_{p+2, q-2}
        let mut state = 0x12345678u64;
        let mut next = |hi: u64| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) % hi
        };
        let mut checked = 0;
        while checked < 200 {
            let m = [next(4) as u8, next(4) as u8, next(4) as u8, next(4) as u8];
            let (p, q) = (m[0] + m[1], m[2] + m[3]);
            if p < 2 || q < 2 {
                continue;
            }
            let out = q0_poly(&ExactPoly::monomial(m, CRat::from_int(1 + next(9) as i64, 0)));
            for (mm, _) in out.terms() {
                assert_eq!((mm[0] + mm[1], mm[2] + mm[3]), (p + 2, q - 2));
            }
            checked += 1;
        }
    }

    #[test]
    fn almost_circular_checks() {
        let ell = BidegreePoly::ellipsoidal(1.0, 2.0).unwrap();
        assert!(is_almost_circular(&ell));
        // z^4 + z̄^4 has |p-q| = 4
        let p = decompose(&mono(4, 0, 0, 0, 1, 0).add(&mono(0, 0, 4, 0, 1, 0)));
        assert!(!is_almost_circular(&p));
        // circle-invariant: only p = q buckets
        let c = decompose(&mono(2, 0, 2, 0, 1, 0).add(&mono(1, 1, 1, 1, 2, 0)));
        assert!(is_almost_circular(&c));
    }

    #[test]
    fn zeta_laurent_of_z2zb2() {
        // rho' = z²z̄²: Q' = 48 z²w² gives the single term 48 z̃² ζ⁴ with s = 0
        let rp = decompose(&mono(2, 0, 2, 0, 1, 0));
        let r = zeta_laurent(&rp).unwrap();
        assert_eq!(r.terms.len(), 1);
        let term = &r.terms[&4];
        assert_eq!(term.denom_pow, 0);
        assert_eq!(term.numer.len(), 1);
        assert_eq!(term.numer[&(2, 0)], CRat::from_int(48, 0));
    }

    #[test]
    fn zeta_laurent_ellipsoidal_empty() {
        let ell = BidegreePoly::ellipsoidal(0.5, 0.25).unwrap();
        assert!(zeta_laurent(&ell).unwrap().is_empty());
    }

    #[test]
    fn zeta_laurent_almost_circular_vanishes_at_zero() {
        // nonzero (3,3) bucket, almost circular: every power r >= 1
        let rp = decompose(
            &mono(3, 0, 3, 0, 1, 0)
                .add(&mono(2, 1, 2, 1, 2, 0))
                .add(&mono(2, 0, 2, 0, 1, 0)),
        );
        assert!(is_almost_circular(&rp));
        let r = zeta_laurent(&rp).unwrap();
        assert!(!r.is_empty());
        assert!(r.terms.keys().all(|&k| k >= 1), "{:?}", r.terms.keys());
    }

    #[test]
    fn winding_of_monomial_term() {
        // R = 48 z̃² ζ⁴: winding 4 at every admissible z̃ != 0
        let rp = decompose(&mono(2, 0, 2, 0, 1, 0));
        let r = zeta_laurent(&rp).unwrap();
        for zt in [
            Complex64::new(0.5, 0.3),
            Complex64::new(-1.2, 0.8),
            Complex64::new(0.01, -2.0),
        ] {
            assert_eq!(winding_at(&r, zt).unwrap(), 4);
        }
        // identically zero at z̃ = 0
        assert!(matches!(winding_at(&r, Complex64::ZERO), Err(Error::DegenerateWinding)));
    }

    #[test]
    fn winding_dual_on_mixed_laurent() {
        // several buckets; companion/phase agreement is asserted inside winding_at
        let rp = decompose(
            &mono(2, 0, 2, 0, 3, 0)
                .add(&mono(3, 0, 3, 0, 1, 0))
                .add(&mono(2, 0, 1, 1, 1, 2))
                .add(&mono(1, 1, 2, 0, 1, -2))
                .add(&mono(1, 1, 1, 1, -2, 0)),
        );
        assert!(rp.is_real());
        let r = zeta_laurent(&rp).unwrap();
        let mut nonzero = 0;
        for zt in default_zt_samples() {
            match winding_at(&r, zt) {
                Ok(wd) => {
                    if wd != 0 {
                        nonzero += 1;
                    }
                }
                Err(Error::BoundaryRoot) => {}
                Err(e) => panic!("{e}"),
            }
        }
        assert!(nonzero > 0);
    }

    #[test]
    fn genericity_scan_reports() {
        let generic = decompose(&mono(2, 0, 2, 0, 1, 0));
        let rep = genericity_scan(&generic, &default_zt_samples()).unwrap();
        assert!(rep.found());
        assert!(rep.witness.unwrap().winding >= 1);

        let ell = BidegreePoly::ellipsoidal(0.3, 0.2).unwrap();
        let rep = genericity_scan(&ell, &default_zt_samples()).unwrap();
        assert!(!rep.found());
        assert!(rep.windings.is_empty());
    }

    #[test]
    fn nonreal_rejected() {
        let rp = decompose(&mono(2, 0, 1, 1, 1, 0));
        assert!(matches!(zeta_laurent(&rp), Err(Error::NotRealSymmetric)));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_poly() -> impl Strategy<Value = ExactPoly> {
            prop::collection::vec(
                ((0u8..4, 0u8..4, 0u8..4, 0u8..4), -9i64..10, -9i64..10),
                1..6,
            )
            .prop_map(|terms| {
                let mut p = ExactPoly::zero();
                for ((a, b, c, d), re, im) in terms {
                    p = p.add(&ExactPoly::monomial([a, b, c, d], CRat::from_int(re, im)));
                }
                p
            })
        }

        proptest! {
            #[test]
            fn decompose_reassembles_exactly(p in arb_poly()) {
                prop_assert_eq!(decompose(&p).to_poly(), p);
            }

            #[test]
            fn buckets_have_pure_bidegree(p in arb_poly()) {
                for (&(dp, dq), comp) in decompose(&p).buckets() {
                    for (m, _) in comp.terms() {
                        prop_assert_eq!((m[0] + m[1], m[2] + m[3]), (dp, dq));
                    }
                }
            }

            #[test]
            fn symmetrized_polynomials_are_real(p in arb_poly()) {
                let symmetric = p.add(&p.conj_swap());
                prop_assert!(symmetric.is_real());
            }

            #[test]
            fn zeta_laurent_reproduces_q_prime_on_the_sphere(
                p in arb_poly(),
                zt_re in -1.2f64..1.2,
                zt_im in -1.2f64..1.2,
                t in 0.0f64..1.0,
            ) {
                // on |zeta|^2 (1 + |zt|^2) = 1 the Laurent form must agree
                // with Q' evaluated at z = zeta zt, w = zeta
                let sym = p.add(&p.conj_swap());
                let rho_prime = decompose(&sym);
                let r = zeta_laurent(&rho_prime).unwrap();
                let zt = Complex64::new(zt_re, zt_im);
                let radius = 1.0 / (1.0 + zt.norm_sqr()).sqrt();
                let zeta = Complex64::from_polar(radius, t * std::f64::consts::TAU);
                let from_laurent = r.eval(zt, zeta);
                let q_prime = q0_poly(&sym);
                let direct = q_prime.eval(zeta * zt, zeta);
                let scale = from_laurent.norm().max(direct.norm()).max(1e-12);
                prop_assert!(
                    (from_laurent - direct).norm() <= 1e-10 * scale,
                    "laurent {} vs direct {}", from_laurent, direct
                );
            }
        }
    }
}
