//! Truncated power-series (jet) arithmetic in the four Wirtinger variables
//! `z, w, z̄, w̄` at a movable basepoint, up to total order 6.
//!
//! A [`Jet`] stores Taylor coefficients `c_(a,b,c,d) = ∂_z^a ∂_w^b ∂_z̄^c ∂_w̄^d f / (a! b! c! d!)`
//! evaluated at the basepoint, densely over the simplex `a+b+c+d <= order`.
//! Order 6 has 210 coefficients. Products truncate above the shared order,
//! so all operations are closed on a fixed order.

use num_complex::Complex64;
use once_cell::sync::Lazy;

use crate::error::JetError;

/// Highest supported truncation order.
pub const MAX_ORDER: usize = 6;

/// Number of multi-indices of total degree `<= k` in 4 variables, k = 0..=6.
pub(crate) const SIMPLEX_LEN: [usize; MAX_ORDER + 1] = [1, 5, 15, 35, 70, 126, 210];

/// One of the four Wirtinger differentiation slots.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    Z,
    W,
    ZBar,
    WBar,
}

impl Var {
    fn slot(self) -> usize {
        match self {
            Var::Z => 0,
            Var::W => 1,
            Var::ZBar => 2,
            Var::WBar => 3,
        }
    }
}

/// Multi-index `(a, b, c, d)` of exponents for `z^a w^b z̄^c w̄^d`.
pub type Multi = [u8; 4];

fn degree(m: Multi) -> usize {
    m.iter().map(|&e| e as usize).sum()
}

struct Tables {
    /// All multi-indices with total degree <= 6, graded by degree.
    multi: Vec<Multi>,
    /// Dense rank lookup, stride-7 per slot; `u16::MAX` marks degree > 6.
    rank: Vec<u16>,
    /// Product triples `(i, j, out)` sorted by `out`, for truncated products.
    prod: Vec<(u16, u16, u16)>,
}

static TABLES: Lazy<Tables> = Lazy::new(|| {
    let mut multi = Vec::with_capacity(SIMPLEX_LEN[MAX_ORDER]);
    for total in 0..=MAX_ORDER {
        for a in 0..=total {
            for b in 0..=total - a {
                for c in 0..=total - a - b {
                    let d = total - a - b - c;
                    multi.push([a as u8, b as u8, c as u8, d as u8]);
                }
            }
        }
    }
    debug_assert_eq!(multi.len(), SIMPLEX_LEN[MAX_ORDER]);

    let mut rank = vec![u16::MAX; 7 * 7 * 7 * 7];
    for (i, m) in multi.iter().enumerate() {
        rank[rank_slot(*m)] = i as u16;
    }

    let n = multi.len();
    let mut prod = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let (mi, mj) = (multi[i], multi[j]);
            if degree(mi) + degree(mj) <= MAX_ORDER {
                let sum = [mi[0] + mj[0], mi[1] + mj[1], mi[2] + mj[2], mi[3] + mj[3]];
                prod.push((i as u16, j as u16, rank[rank_slot(sum)]));
            }
        }
    }
    prod.sort_by_key(|t| t.2);
    Tables { multi, rank, prod }
});

fn rank_slot(m: Multi) -> usize {
    ((m[0] as usize * 7 + m[1] as usize) * 7 + m[2] as usize) * 7 + m[3] as usize
}

/// Rank of a multi-index in the graded coefficient layout.
pub(crate) fn index_of(m: Multi) -> usize {
    TABLES.rank[rank_slot(m)] as usize
}

/// Multi-index at a given rank.
pub(crate) fn multi_at(i: usize) -> Multi {
    TABLES.multi[i]
}

const FACTORIAL: [f64; 7] = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0];

/// Truncated jet of a smooth function of `(z, w, z̄, w̄)` at a basepoint.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    base: (Complex64, Complex64),
    order: usize,
    coeffs: Vec<Complex64>,
}

impl Jet {
    pub fn zero(base: (Complex64, Complex64), order: usize) -> Result<Self, JetError> {
        if order > MAX_ORDER {
            return Err(JetError::OrderTooLarge { max: MAX_ORDER });
        }
        Ok(Jet { base, order, coeffs: vec![Complex64::ZERO; SIMPLEX_LEN[order]] })
    }

    pub fn constant(base: (Complex64, Complex64), order: usize, c: Complex64) -> Result<Self, JetError> {
        let mut jet = Jet::zero(base, order)?;
        jet.coeffs[0] = c;
        Ok(jet)
    }

    /// Jet of one of the coordinate functions (`z̄` means the function `p ↦ conj(z(p))`).
    pub fn variable(base: (Complex64, Complex64), order: usize, var: Var) -> Result<Self, JetError> {
        if order < 1 {
            return Err(JetError::InsufficientOrder { needed: 1, have: order });
        }
        let mut jet = Jet::zero(base, order)?;
        jet.coeffs[0] = match var {
            Var::Z => base.0,
            Var::W => base.1,
            Var::ZBar => base.0.conj(),
            Var::WBar => base.1.conj(),
        };
        let mut unit = [0u8; 4];
        unit[var.slot()] = 1;
        jet.coeffs[index_of(unit)] = Complex64::ONE;
        Ok(jet)
    }

    pub fn from_coeffs(
        base: (Complex64, Complex64),
        order: usize,
        coeffs: Vec<Complex64>,
    ) -> Result<Self, JetError> {
        if order > MAX_ORDER {
            return Err(JetError::OrderTooLarge { max: MAX_ORDER });
        }
        if coeffs.len() != SIMPLEX_LEN[order] {
            return Err(JetError::CoefficientCount { expected: SIMPLEX_LEN[order], got: coeffs.len() });
        }
        Ok(Jet { base, order, coeffs })
    }

    pub fn basepoint(&self) -> (Complex64, Complex64) {
        self.base
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Value of the function at the basepoint.
    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Taylor coefficient for a multi-index (zero above the truncation order).
    pub fn coeff(&self, m: Multi) -> Complex64 {
        if degree(m) > self.order {
            return Complex64::ZERO;
        }
        self.coeffs[index_of(m)]
    }

    pub(crate) fn coeff_mut(&mut self, m: Multi) -> &mut Complex64 {
        debug_assert!(degree(m) <= self.order);
        &mut self.coeffs[index_of(m)]
    }

    /// Raw derivative value `∂^m f` (Taylor coefficient times factorials).
    pub fn derivative(&self, m: Multi) -> Complex64 {
        let fac: f64 = m.iter().map(|&e| FACTORIAL[e as usize]).product();
        self.coeff(m) * fac
    }

    fn check_compatible(&self, other: &Jet) -> Result<(), JetError> {
        if self.order != other.order {
            return Err(JetError::OrderMismatch(self.order, other.order));
        }
        if self.base != other.base {
            return Err(JetError::BasepointMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_compatible(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Jet { base: self.base, order: self.order, coeffs })
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_compatible(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(Jet { base: self.base, order: self.order, coeffs })
    }

    /// Truncated product: terms above the shared order are dropped.
    pub fn mul(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_compatible(other)?;
        let len = SIMPLEX_LEN[self.order];
        let mut coeffs = vec![Complex64::ZERO; len];
        for &(i, j, out) in &TABLES.prod {
            let out = out as usize;
            if out >= len {
                break; // sorted by output rank, all later entries overflow too
            }
            coeffs[out] += self.coeffs[i as usize] * other.coeffs[j as usize];
        }
        Ok(Jet { base: self.base, order: self.order, coeffs })
    }

    pub fn scale(&self, c: Complex64) -> Jet {
        let coeffs = self.coeffs.iter().map(|a| a * c).collect();
        Jet { base: self.base, order: self.order, coeffs }
    }

    pub fn neg(&self) -> Jet {
        self.scale(-Complex64::ONE)
    }

    /// Wirtinger derivative; the result has order one less.
    pub fn wirtinger(&self, var: Var) -> Result<Jet, JetError> {
        if self.order == 0 {
            return Err(JetError::InsufficientOrder { needed: 1, have: 0 });
        }
        let out_order = self.order - 1;
        let slot = var.slot();
        let mut coeffs = vec![Complex64::ZERO; SIMPLEX_LEN[out_order]];
        for (i, c) in coeffs.iter_mut().enumerate() {
            let mut m = multi_at(i);
            m[slot] += 1;
            *c = self.coeffs[index_of(m)] * (m[slot] as f64);
        }
        Ok(Jet { base: self.base, order: out_order, coeffs })
    }

    /// Drop coefficients above order `k`.
    pub fn truncated(&self, k: usize) -> Result<Jet, JetError> {
        if k > self.order {
            return Err(JetError::InsufficientOrder { needed: k, have: self.order });
        }
        Ok(Jet {
            base: self.base,
            order: k,
            coeffs: self.coeffs[..SIMPLEX_LEN[k]].to_vec(),
        })
    }

    /// Jet of `p ↦ conj(f(p))` at the same basepoint: swaps holomorphic and
    /// antiholomorphic slots and conjugates the coefficients.
    pub fn conj_jet(&self) -> Jet {
        let mut coeffs = vec![Complex64::ZERO; self.coeffs.len()];
        for (i, c) in self.coeffs.iter().enumerate() {
            let m = multi_at(i);
            coeffs[index_of([m[2], m[3], m[0], m[1]])] = c.conj();
        }
        Jet { base: self.base, order: self.order, coeffs }
    }

    /// Enforce the reality symmetry `c(a,b,c,d) = conj(c(c,d,a,b))` bitwise.
    ///
    /// Used by jet providers of real-valued defining functions so the
    /// symmetry survives rounding of intermediate arithmetic.
    pub fn symmetrize_real(mut self) -> Jet {
        for i in 0..self.coeffs.len() {
            let m = multi_at(i);
            let j = index_of([m[2], m[3], m[0], m[1]]);
            match j.cmp(&i) {
                std::cmp::Ordering::Greater => {
                    let avg = (self.coeffs[i] + self.coeffs[j].conj()) * 0.5;
                    self.coeffs[i] = avg;
                    self.coeffs[j] = avg.conj();
                }
                std::cmp::Ordering::Equal => {
                    self.coeffs[i] = Complex64::new(self.coeffs[i].re, 0.0);
                }
                std::cmp::Ordering::Less => {}
            }
        }
        self
    }

    /// Taylor evaluation at a displacement from the basepoint
    /// (antiholomorphic slots receive the conjugate displacements).
    pub fn evaluate(&self, dz: Complex64, dw: Complex64) -> Complex64 {
        let mut pows = [[Complex64::ONE; MAX_ORDER + 1]; 4];
        for (slot, base) in [dz, dw, dz.conj(), dw.conj()].into_iter().enumerate() {
            for k in 1..=self.order {
                pows[slot][k] = pows[slot][k - 1] * base;
            }
        }
        let mut acc = Complex64::ZERO;
        for (i, c) in self.coeffs.iter().enumerate() {
            let m = multi_at(i);
            acc += c
                * pows[0][m[0] as usize]
                * pows[1][m[1] as usize]
                * pows[2][m[2] as usize]
                * pows[3][m[3] as usize];
        }
        acc
    }

    /// Composition `f ∘ H` with a holomorphic map `H = (h1, h2)`.
    ///
    /// `self` must be based at `(h1.value(), h2.value())`; the result is based
    /// at the basepoint of `h1, h2`. Antiholomorphic dependence of `f` pulls
    /// back through the conjugated map jets.
    pub fn compose(&self, h1: &Jet, h2: &Jet) -> Result<Jet, JetError> {
        h1.check_compatible(h2)?;
        for (i, c) in h1.coeffs.iter().chain(&h2.coeffs).enumerate() {
            let m = multi_at(i % h1.coeffs.len());
            if (m[2] > 0 || m[3] > 0) && c.norm_sqr() != 0.0 {
                return Err(JetError::NotHolomorphic);
            }
        }
        let image = (h1.value(), h2.value());
        let tol = 1e-9;
        if (self.base.0 - image.0).norm() > tol * (1.0 + image.0.norm())
            || (self.base.1 - image.1).norm() > tol * (1.0 + image.1.norm())
        {
            return Err(JetError::BasepointMismatch);
        }
        let order = self.order.min(h1.order);
        let f = self.truncated(order)?;
        let base = h1.base;

        // displacement jets with zero constant term, and their conjugates
        let mut d1 = h1.truncated(order)?;
        d1.coeffs[0] = Complex64::ZERO;
        let mut d2 = h2.truncated(order)?;
        d2.coeffs[0] = Complex64::ZERO;
        let d1b = d1.conj_jet();
        let d2b = d2.conj_jet();

        let one = Jet::constant(base, order, Complex64::ONE)?;
        let mut pows: [Vec<Jet>; 4] = [vec![], vec![], vec![], vec![]];
        for (slot, delta) in [&d1, &d2, &d1b, &d2b].into_iter().enumerate() {
            pows[slot].push(one.clone());
            for k in 1..=order {
                let next = pows[slot][k - 1].mul(delta)?;
                pows[slot].push(next);
            }
        }

        let mut acc = Jet::zero(base, order)?;
        for (i, c) in f.coeffs.iter().enumerate() {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            let m = multi_at(i);
            let mut term = pows[0][m[0] as usize].clone();
            for slot in 1..4 {
                if m[slot] > 0 {
                    term = term.mul(&pows[slot][m[slot] as usize])?;
                }
            }
            acc = acc.add(&term.scale(*c))?;
        }
        Ok(acc)
    }
}

/// Iterate multi-indices with total degree `<= order`, with their ranks.
pub(crate) fn multis_up_to(order: usize) -> impl Iterator<Item = (usize, Multi)> {
    (0..SIMPLEX_LEN[order]).map(|i| (i, multi_at(i)))
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const ORIGIN: (Complex64, Complex64) = (Complex64::ZERO, Complex64::ZERO);

    #[test]
    fn table_sizes() {
        assert_eq!(TABLES.multi.len(), 210);
        assert_eq!(TABLES.prod.len(), 3003);
        for k in 0..=MAX_ORDER {
            assert_eq!(
                TABLES.multi.iter().filter(|m| degree(**m) <= k).count(),
                SIMPLEX_LEN[k]
            );
        }
    }

    #[test]
    fn one_plus_z_times_one_plus_zbar() {
        let one = Jet::constant(ORIGIN, 2, Complex64::ONE).unwrap();
        let z = Jet::variable(ORIGIN, 2, Var::Z).unwrap();
        let zb = Jet::variable(ORIGIN, 2, Var::ZBar).unwrap();
        let p = one.add(&z).unwrap().mul(&one.add(&zb).unwrap()).unwrap();
        assert_eq!(p.coeff([0, 0, 0, 0]), Complex64::ONE);
        assert_eq!(p.coeff([1, 0, 0, 0]), Complex64::ONE);
        assert_eq!(p.coeff([0, 0, 1, 0]), Complex64::ONE);
        assert_eq!(p.coeff([1, 0, 1, 0]), Complex64::ONE);
        assert_eq!(p.coeff([0, 1, 0, 0]), Complex64::ZERO);
        assert_eq!(p.coeff([2, 0, 0, 0]), Complex64::ZERO);
    }

    #[test]
    fn zero_annihilates() {
        let z = Jet::variable(ORIGIN, 3, Var::Z).unwrap();
        let zero = Jet::zero(ORIGIN, 3, ).unwrap();
        let p = z.mul(&zero).unwrap();
        assert!(p.coeffs.iter().all(|c| *c == Complex64::ZERO));
    }

    #[test]
    fn mismate_errors() {
        let a = Jet::variable(ORIGIN, 3, Var::Z).unwrap();
        let b = Jet::variable(ORIGIN, 2, Var::Z).unwrap();
        assert_eq!(a.mul(&b).unwrap_err(), JetError::OrderMismatch(3, 2));
        let c_base = Jet::variable((Complex64::ONE, Complex64::ZERO), 3, Var::Z).unwrap();
        assert_eq!(a.add(&c_base).unwrap_err(), JetError::BasepointMismatch);
        let zero_order = Jet::constant(ORIGIN, 0, Complex64::ONE).unwrap();
        assert!(matches!(
            zero_order.wirtinger(Var::Z).unwrap_err(),
            JetError::InsufficientOrder { .. }
        ));
    }

    /// Exact sparse polynomial in (z, w, z̄, w̄): the multiplication oracle.
    type Poly = BTreeMap<Multi, Complex64>;

    fn poly_mul(a: &Poly, b: &Poly) -> Poly {
        let mut out = Poly::new();
        for (ma, ca) in a {
            for (mb, cb) in b {
                let m = [ma[0] + mb[0], ma[1] + mb[1], ma[2] + mb[2], ma[3] + mb[3]];
                *out.entry(m).or_insert(Complex64::ZERO) += ca * cb;
            }
        }
        out
    }

    fn poly_jet(p: &Poly, base: (Complex64, Complex64), order: usize) -> Jet {
        // binomial-shift expansion around the basepoint
        let binom: [[f64; 13]; 13] = {
            let mut b = [[0.0; 13]; 13];
            for n in 0..13 {
                b[n][0] = 1.0;
                for k in 1..=n {
                    b[n][k] = b[n - 1][k - 1] + if k < n { b[n - 1][k] } else { 0.0 };
                }
            }
            b
        };
        let vals = [base.0, base.1, base.0.conj(), base.1.conj()];
        let mut jet = Jet::zero(base, order).unwrap();
        for (m, coef) in p {
            let m = *m;
            for a in 0..=m[0] {
                for b in 0..=m[1] {
                    for cc in 0..=m[2] {
                        for d in 0..=m[3] {
                            let idx = [a, b, cc, d];
                            if degree(idx) > order {
                                continue;
                            }
                            let mut term = *coef;
                            for (slot, (lo, hi)) in
                                [(a, m[0]), (b, m[1]), (cc, m[2]), (d, m[3])].into_iter().enumerate()
                            {
                                term *= binom[hi as usize][lo as usize]
                                    * vals[slot].powi((hi - lo) as i32);
                            }
                            *jet.coeff_mut(idx) += term;
                        }
                    }
                }
            }
        }
        jet
    }

    #[test]
    fn product_matches_symbolic_oracle() {
        // fixed pseudo-random degree-3 polynomials with small integer coefficients
        let mut a = Poly::new();
        let mut b = Poly::new();
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) % 19) as f64 - 9.0
        };
        for total in 0..=3u8 {
            for x in 0..=total {
                for y in 0..=total - x {
                    for zc in 0..=total - x - y {
                        let m = [x, y, zc, total - x - y - zc];
                        a.insert(m, c(next(), next()));
                        b.insert(m, c(next(), next()));
                    }
                }
            }
        }
        let base = (c(0.3, -0.7), c(-0.2, 0.5));
        let ja = poly_jet(&a, base, MAX_ORDER);
        let jb = poly_jet(&b, base, MAX_ORDER);
        let jprod = ja.mul(&jb).unwrap();
        let oracle = poly_jet(&poly_mul(&a, &b), base, MAX_ORDER);
        for (i, m) in multis_up_to(MAX_ORDER) {
            let got = jprod.coeffs[i];
            let want = oracle.coeffs[i];
            let denom = want.norm().max(1.0);
            assert!(
                (got - want).norm() <= 1e-12 * denom,
                "coeff {m:?}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn wirtinger_of_z_squared() {
        let base = (c(1.5, -0.25), c(0.0, 2.0));
        let z = Jet::variable(base, 4, Var::Z).unwrap();
        let z2 = z.mul(&z).unwrap();
        let dz = z2.wirtinger(Var::Z).unwrap();
        // 2z: value 2 z0, coefficient 2 on z, zero elsewhere
        assert_eq!(dz.value(), base.0 * 2.0);
        assert_eq!(dz.coeff([1, 0, 0, 0]), c(2.0, 0.0));
        assert_eq!(dz.coeff([0, 1, 0, 0]), Complex64::ZERO);
        assert_eq!(dz.coeff([2, 0, 0, 0]), Complex64::ZERO);
    }

    #[test]
    fn wirtinger_antiholomorphic_of_z_is_zero() {
        let z = Jet::variable(ORIGIN, 5, Var::Z).unwrap();
        let d = z.wirtinger(Var::ZBar).unwrap();
        assert!(d.coeffs.iter().all(|c| *c == Complex64::ZERO));
    }

    #[test]
    fn mixed_partial_of_exp_zzbar_matches_oracle() {
        // jet of exp(z z̄) at (1, 0) built from the truncated exponential series;
        // independent symbolic value: d_z^2 d_z̄^4 exp(z z̄) at z = 1 equals 21 e.
        let base = (c(1.0, 0.0), c(0.0, 0.0));
        let z = Jet::variable(base, MAX_ORDER, Var::Z).unwrap();
        let zb = Jet::variable(base, MAX_ORDER, Var::ZBar).unwrap();
        let g = z.mul(&zb).unwrap();
        let g0 = g.value();
        let dg = g.sub(&Jet::constant(base, MAX_ORDER, g0).unwrap()).unwrap();
        // exp(g) = e^{g0} * sum dg^k / k!
        let mut acc = Jet::constant(base, MAX_ORDER, Complex64::ONE).unwrap();
        let mut powk = Jet::constant(base, MAX_ORDER, Complex64::ONE).unwrap();
        for k in 1..=MAX_ORDER {
            powk = powk.mul(&dg).unwrap();
            acc = acc.add(&powk.scale(c(1.0 / FACTORIAL[k], 0.0))).unwrap();
        }
        let expjet = acc.scale(g0.exp());
        let mut d = expjet;
        for _ in 0..2 {
            d = d.wirtinger(Var::Z).unwrap();
        }
        for _ in 0..4 {
            d = d.wirtinger(Var::ZBar).unwrap();
        }
        let got = d.value();
        let want = 21.0 * std::f64::consts::E; // 57.0839183976399499...
        assert!(
            (got - c(want, 0.0)).norm() <= 1e-10 * want,
            "got {got}, want {want}"
        );
    }

    #[test]
    fn compose_identity() {
        let base = (c(0.4, 0.1), c(-0.3, 0.9));
        let mut p = Poly::new();
        p.insert([1, 0, 1, 0], Complex64::ONE);
        p.insert([0, 1, 0, 1], Complex64::ONE);
        p.insert([0, 0, 0, 0], c(-1.0, 0.0));
        let f = poly_jet(&p, base, MAX_ORDER);
        let h1 = Jet::variable(base, MAX_ORDER, Var::Z).unwrap();
        let h2 = Jet::variable(base, MAX_ORDER, Var::W).unwrap();
        let g = f.compose(&h1, &h2).unwrap();
        for i in 0..g.coeffs.len() {
            assert!((g.coeffs[i] - f.coeffs[i]).norm() < 1e-14);
        }
    }

    #[test]
    fn compose_diagonal_linear_map() {
        // |z|^2 + |w|^2 - 1 pulled back through H(z,w) = (2z, 4w) at (1/2, 0):
        // exact jet of 4|z|^2 + 16|w|^2 - 1 at the preimage.
        let delta = 2.0;
        let pre = (c(0.5, 0.0), c(0.0, 0.0));
        let img = (pre.0 * delta, pre.1 * delta * delta);
        let mut sphere = Poly::new();
        sphere.insert([1, 0, 1, 0], Complex64::ONE);
        sphere.insert([0, 1, 0, 1], Complex64::ONE);
        sphere.insert([0, 0, 0, 0], c(-1.0, 0.0));
        let f = poly_jet(&sphere, img, MAX_ORDER);
        let h1 = Jet::variable(pre, MAX_ORDER, Var::Z).unwrap().scale(c(delta, 0.0));
        let h2 = Jet::variable(pre, MAX_ORDER, Var::W).unwrap().scale(c(delta * delta, 0.0));
        let g = f.compose(&h1, &h2).unwrap();
        let mut want = Poly::new();
        want.insert([1, 0, 1, 0], c(4.0, 0.0));
        want.insert([0, 1, 0, 1], c(16.0, 0.0));
        want.insert([0, 0, 0, 0], c(-1.0, 0.0));
        let wj = poly_jet(&want, pre, MAX_ORDER);
        for i in 0..g.coeffs.len() {
            assert!(
                (g.coeffs[i] - wj.coeffs[i]).norm() < 1e-13,
                "coeff {:?}", multi_at(i)
            );
        }
    }

    #[test]
    fn compose_rejects_antiholomorphic_map() {
        let f = Jet::variable(ORIGIN, 3, Var::Z).unwrap();
        let h1 = Jet::variable(ORIGIN, 3, Var::ZBar).unwrap();
        let h2 = Jet::variable(ORIGIN, 3, Var::W).unwrap();
        assert_eq!(f.compose(&h1, &h2).unwrap_err(), JetError::NotHolomorphic);
    }

    /// Jet of log|z| (as a function of z) at a nonzero basepoint, to `order`.
    fn log_abs_jet(base: (Complex64, Complex64), which: Var, order: usize) -> Jet {
        let b = match which {
            Var::Z => base.0,
            Var::W => base.1,
            _ => unreachable!(),
        };
        let mut jet = Jet::constant(base, order, c(b.norm().ln(), 0.0)).unwrap();
        let (hol, anti): (Multi, Multi) = match which {
            Var::Z => ([1, 0, 0, 0], [0, 0, 1, 0]),
            _ => ([0, 1, 0, 0], [0, 0, 0, 1]),
        };
        for k in 1..=order as u8 {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            let coef = sign / (2.0 * k as f64 * b.powi(k as i32));
            let mut mh = [0u8; 4];
            let mut ma = [0u8; 4];
            for s in 0..4 {
                mh[s] = hol[s] * k;
                ma[s] = anti[s] * k;
            }
            *jet.coeff_mut(mh) = coef;
            *jet.coeff_mut(ma) = coef.conj();
        }
        jet
    }

    #[test]
    fn flat_torus_pullback_identity() {
        // (log|z|)^2 + (log|w|)^2 - eps^2 pulled back through H(ζ,ξ) = (e^{iζ}, e^{iξ})
        // equals (Im ζ)^2 + (Im ξ)^2 - eps^2.
        let eps = 0.5;
        let p = (c(0.3, 0.2), c(-0.8, 0.05));
        let img = (c(0.0, 1.0) * p.0, c(0.0, 1.0) * p.1);
        let img = (img.0.exp(), img.1.exp());

        let u = log_abs_jet(img, Var::Z, MAX_ORDER);
        let v = log_abs_jet(img, Var::W, MAX_ORDER);
        let rho = u
            .mul(&u)
            .unwrap()
            .add(&v.mul(&v).unwrap())
            .unwrap()
            .sub(&Jet::constant(img, MAX_ORDER, c(eps * eps, 0.0)).unwrap())
            .unwrap();

        // jets of e^{iζ}, e^{iξ} at p via the exponential series
        let exp_jet = |which: Var| {
            let zeta = Jet::variable(p, MAX_ORDER, which).unwrap().scale(c(0.0, 1.0));
            let z0 = zeta.value();
            let dz = zeta.sub(&Jet::constant(p, MAX_ORDER, z0).unwrap()).unwrap();
            let mut acc = Jet::constant(p, MAX_ORDER, Complex64::ONE).unwrap();
            let mut powk = Jet::constant(p, MAX_ORDER, Complex64::ONE).unwrap();
            for k in 1..=MAX_ORDER {
                powk = powk.mul(&dz).unwrap();
                acc = acc.add(&powk.scale(c(1.0 / FACTORIAL[k], 0.0))).unwrap();
            }
            acc.scale(z0.exp())
        };
        let h1 = exp_jet(Var::Z);
        let h2 = exp_jet(Var::W);
        let pulled = rho.compose(&h1, &h2).unwrap();

        // direct jet of (Im ζ)^2 + (Im ξ)^2 - eps^2 = -((ζ-ζ̄)^2 + (ξ-ξ̄)^2)/4 - eps^2
        let mut flat = Poly::new();
        flat.insert([2, 0, 0, 0], c(-0.25, 0.0));
        flat.insert([0, 0, 2, 0], c(-0.25, 0.0));
        flat.insert([1, 0, 1, 0], c(0.5, 0.0));
        flat.insert([0, 2, 0, 0], c(-0.25, 0.0));
        flat.insert([0, 0, 0, 2], c(-0.25, 0.0));
        flat.insert([0, 1, 0, 1], c(0.5, 0.0));
        flat.insert([0, 0, 0, 0], c(-eps * eps, 0.0));
        let want = poly_jet(&flat, p, MAX_ORDER);
        for i in 0..want.coeffs.len() {
            assert!(
                (pulled.coeffs[i] - want.coeffs[i]).norm() <= 1e-10,
                "coeff {:?}: {} vs {}", multi_at(i), pulled.coeffs[i], want.coeffs[i]
            );
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_coeffs(order: usize) -> impl Strategy<Value = Vec<Complex64>> {
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), SIMPLEX_LEN[order])
                .prop_map(|v| v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
        }

        fn arb_base() -> impl Strategy<Value = (Complex64, Complex64)> {
            ((-1.0f64..1.0, -1.0f64..1.0), (-1.0f64..1.0, -1.0f64..1.0)).prop_map(|(z, w)| {
                (Complex64::new(z.0, z.1), Complex64::new(w.0, w.1))
            })
        }

        fn arb_jet(order: usize) -> impl Strategy<Value = Jet> {
            (arb_coeffs(order), arb_base())
                .prop_map(move |(coeffs, base)| Jet::from_coeffs(base, order, coeffs).unwrap())
        }

        /// Two jets sharing one basepoint (products require it).
        fn arb_jet_pair(order: usize) -> impl Strategy<Value = (Jet, Jet)> {
            (arb_coeffs(order), arb_coeffs(order), arb_base()).prop_map(move |(ca, cb, base)| {
                (
                    Jet::from_coeffs(base, order, ca).unwrap(),
                    Jet::from_coeffs(base, order, cb).unwrap(),
                )
            })
        }

        proptest! {
            #[test]
            fn wirtinger_derivatives_commute(jet in arb_jet(5)) {
                let zw = jet.wirtinger(Var::Z).unwrap().wirtinger(Var::WBar).unwrap();
                let wz = jet.wirtinger(Var::WBar).unwrap().wirtinger(Var::Z).unwrap();
                prop_assert_eq!(zw, wz);
            }

            #[test]
            fn conjugation_is_an_involution(jet in arb_jet(4)) {
                prop_assert_eq!(jet.conj_jet().conj_jet(), jet);
            }

            #[test]
            fn evaluate_at_zero_displacement_gives_value(jet in arb_jet(4)) {
                let v = jet.evaluate(Complex64::ZERO, Complex64::ZERO);
                prop_assert_eq!(v, jet.value());
            }

            #[test]
            fn product_conjugates_termwise((a, b) in arb_jet_pair(4)) {
                // conj(a b) = conj(a) conj(b) for the truncated product
                let lhs = a.mul(&b).unwrap().conj_jet();
                let rhs = a.conj_jet().mul(&b.conj_jet()).unwrap();
                let scale: f64 =
                    lhs.coeffs.iter().map(|c| c.norm()).fold(1.0, f64::max);
                for i in 0..lhs.coeffs.len() {
                    prop_assert!((lhs.coeffs[i] - rhs.coeffs[i]).norm() <= 1e-13 * scale);
                }
            }
        }
    }

    #[test]
    fn product_associative_commutative() {
        let base = (c(0.1, 0.2), c(0.3, -0.4));
        let mk = |seed: u64| {
            let mut state = seed;
            let mut jet = Jet::zero(base, MAX_ORDER).unwrap();
            for i in 0..jet.coeffs.len() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                let re = ((state >> 33) as f64) / (1u64 << 31) as f64 - 1.0;
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                let im = ((state >> 33) as f64) / (1u64 << 31) as f64 - 1.0;
                jet.coeffs[i] = c(re, im);
            }
            jet
        };
        let (a, b, cc) = (mk(11), mk(22), mk(33));
        let ab_c = a.mul(&b).unwrap().mul(&cc).unwrap();
        let a_bc = a.mul(&b.mul(&cc).unwrap()).unwrap();
        let ba = b.mul(&a).unwrap();
        let ab = a.mul(&b).unwrap();
        let scale: f64 = ab_c.coeffs.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for i in 0..ab_c.coeffs.len() {
            assert!((ab_c.coeffs[i] - a_bc.coeffs[i]).norm() <= 1e-13 * scale);
            assert!((ab.coeffs[i] - ba.coeffs[i]).norm() <= 1e-13 * scale);
        }
    }
}
