//! Floating-point monomial polynomials in `(z, w, z̄, w̄)`.
//!
//! This is the numeric companion of the exact polynomials in [`crate::perturb`]:
//! surfaces cache their defining function here for fast jet extraction and
//! pointwise evaluation. The four slots are independent; evaluating with
//! `zb = conj(z), wb = conj(w)` recovers the function on real points.

use num_complex::Complex64;

use crate::error::JetError;
use crate::jets::{multis_up_to, Jet, Multi, Var};

const BINOM_N: usize = 24;

fn binom_table() -> &'static [[f64; BINOM_N]; BINOM_N] {
    use once_cell::sync::Lazy;
    static TABLE: Lazy<[[f64; BINOM_N]; BINOM_N]> = Lazy::new(|| {
        let mut b = [[0.0; BINOM_N]; BINOM_N];
        for n in 0..BINOM_N {
            b[n][0] = 1.0;
            for k in 1..=n {
                b[n][k] = b[n - 1][k - 1] + if k < n { b[n - 1][k] } else { 0.0 };
            }
        }
        b
    });
    &TABLE
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MonomialPoly {
    terms: Vec<(Multi, Complex64)>,
}

impl MonomialPoly {
    pub fn new(terms: Vec<(Multi, Complex64)>) -> Self {
        let mut p = MonomialPoly { terms };
        p.normalize();
        p
    }

    pub fn zero() -> Self {
        MonomialPoly::default()
    }

    /// `|z|^2 + |w|^2 - 1`
    pub fn unit_sphere() -> Self {
        MonomialPoly::new(vec![
            ([1, 0, 1, 0], Complex64::ONE),
            ([0, 1, 0, 1], Complex64::ONE),
            ([0, 0, 0, 0], -Complex64::ONE),
        ])
    }

    pub fn terms(&self) -> &[(Multi, Complex64)] {
        &self.terms
    }

    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .map(|(m, _)| m.iter().map(|&e| e as usize).sum())
            .max()
            .unwrap_or(0)
    }

    fn normalize(&mut self) {
        use std::collections::BTreeMap;
        let mut map: BTreeMap<Multi, Complex64> = BTreeMap::new();
        for (m, c) in self.terms.drain(..) {
            *map.entry(m).or_insert(Complex64::ZERO) += c;
        }
        self.terms = map
            .into_iter()
            .filter(|(_, c)| c.norm_sqr() != 0.0)
            .collect();
    }

    pub fn add(&self, other: &MonomialPoly) -> MonomialPoly {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        MonomialPoly::new(terms)
    }

    pub fn scale(&self, c: Complex64) -> MonomialPoly {
        MonomialPoly::new(self.terms.iter().map(|(m, v)| (*m, v * c)).collect())
    }

    /// Evaluation with all four slots independent.
    pub fn eval4(&self, z: Complex64, w: Complex64, zb: Complex64, wb: Complex64) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for (m, c) in &self.terms {
            acc += c
                * z.powi(m[0] as i32)
                * w.powi(m[1] as i32)
                * zb.powi(m[2] as i32)
                * wb.powi(m[3] as i32);
        }
        acc
    }

    /// Evaluation at an actual point of C^2 (conjugate slots tied).
    pub fn eval(&self, z: Complex64, w: Complex64) -> Complex64 {
        self.eval4(z, w, z.conj(), w.conj())
    }

    pub fn wirtinger(&self, var: Var) -> MonomialPoly {
        let slot = match var {
            Var::Z => 0,
            Var::W => 1,
            Var::ZBar => 2,
            Var::WBar => 3,
        };
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m[slot] > 0)
            .map(|(m, c)| {
                let mut out = *m;
                out[slot] -= 1;
                (out, c * m[slot] as f64)
            })
            .collect();
        MonomialPoly::new(terms)
    }

    /// The polynomial of the conjugated function: swaps `(z,w) <-> (z̄,w̄)`
    /// and conjugates coefficients.
    pub fn conj_swap(&self) -> MonomialPoly {
        MonomialPoly::new(
            self.terms
                .iter()
                .map(|(m, c)| ([m[2], m[3], m[0], m[1]], c.conj()))
                .collect(),
        )
    }

    /// Taylor jet at a basepoint via binomial shifts; exact for polynomials.
    pub fn to_jet(&self, base: (Complex64, Complex64), order: usize) -> Result<Jet, JetError> {
        let binom = binom_table();
        let vals = [base.0, base.1, base.0.conj(), base.1.conj()];
        let mut jet = Jet::zero(base, order)?;
        for (m, coef) in &self.terms {
            for (idx, target) in multis_up_to(order) {
                let _ = idx;
                if target[0] > m[0] || target[1] > m[1] || target[2] > m[2] || target[3] > m[3] {
                    continue;
                }
                let mut term = *coef;
                for slot in 0..4 {
                    let hi = m[slot] as usize;
                    let lo = target[slot] as usize;
                    term *= binom[hi][lo] * vals[slot].powi((hi - lo) as i32);
                }
                *jet.coeff_mut(target) += term;
            }
        }
        Ok(jet)
    }

    /// Coefficients of `t -> p(t*dz, t*dw)` as a real polynomial in `t`,
    /// indexed by degree. Imaginary parts cancel for real-valued `p`.
    pub fn radial_profile(&self, dz: Complex64, dw: Complex64) -> Vec<f64> {
        let mut coeffs = vec![Complex64::ZERO; self.degree() + 1];
        for (m, c) in &self.terms {
            let total: usize = m.iter().map(|&e| e as usize).sum();
            coeffs[total] += c
                * dz.powi(m[0] as i32)
                * dw.powi(m[1] as i32)
                * dz.conj().powi(m[2] as i32)
                * dw.conj().powi(m[3] as i32);
        }
        coeffs.into_iter().map(|c| c.re).collect()
    }
}
