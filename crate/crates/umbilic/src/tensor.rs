//! Pointwise assembly of the 5x5 matrix `A3`, its determinant, the complex
//! Monge-Ampere determinant `J`, and the normalized invariant `Q`.
//!
//! Rows of `A3` are `rho_w^3, rho_z rho_w^2, rho_z^2 rho_w, rho_z^3,
//! rho_{Z^2}(L, L)` with `L = (-rho_w, rho_z)`; column `k` applies
//! `L̄^k = (-rho_w̄ ∂_z̄ + rho_z̄ ∂_w̄)^k` for `k = 0..4`. The fifth row carries
//! second derivatives of `rho` and four applications of `L̄` differentiate
//! once more each, so an order-6 jet of `rho` is exactly enough.
//!
//! Sign convention: the 3x3 Fefferman form gives `J = +1` on the unit sphere
//! while the 2x2 tangential form gives `-1` there; the crate standardizes on
//! `D := J` restricted to `M`, requires `D > 0` (strict pseudoconvexity), and
//! sets `Q := det A3 / D^{25/3}` so the fractional power has a positive base.
//! Transformation rules are checked in moduli only; fractional powers of
//! `det H_Z` are multivalued.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jets::{Jet, Var};
use crate::surfaces::SurfaceSpec;

/// Exponent in `Q = det A3 / D^{25/3}`.
pub const Q_EXPONENT: f64 = 25.0 / 3.0;

const ON_SURFACE_TOL: f64 = 1e-8;

/// Per-point record produced by scans.
#[derive(Clone, Debug, Serialize)]
pub struct TensorSample {
    pub theta: [f64; 3],
    pub z_re: f64,
    pub z_im: f64,
    pub w_re: f64,
    pub w_im: f64,
    pub det_re: f64,
    pub det_im: f64,
    pub j_on_m: f64,
    pub q_re: f64,
    pub q_im: f64,
    pub abs_q: f64,
    /// Product of the row norms of `A3`: the conditioning scale of the
    /// determinant (entries span many orders of magnitude).
    pub row_scale: f64,
    /// `|det A3| / row_scale`: the determinant against its conditioning scale.
    pub abs_det_norm: f64,
}

impl TensorSample {
    pub fn q(&self) -> Complex64 {
        Complex64::new(self.q_re, self.q_im)
    }

    pub fn det_a3(&self) -> Complex64 {
        Complex64::new(self.det_re, self.det_im)
    }

    pub fn point(&self) -> (Complex64, Complex64) {
        (Complex64::new(self.z_re, self.z_im), Complex64::new(self.w_re, self.w_im))
    }
}

/// `L̄ f = -rho_w̄ f_z̄ + rho_z̄ f_w̄`, truncating the coefficient jets to the
/// derivative's order.
fn lbar(rwb: &Jet, rzb: &Jet, f: &Jet) -> Result<Jet> {
    let k = f.order() - 1;
    let fz = f.wirtinger(Var::ZBar)?;
    let fw = f.wirtinger(Var::WBar)?;
    let a = rwb.truncated(k)?.mul(&fz)?;
    let b = rzb.truncated(k)?.mul(&fw)?;
    Ok(b.sub(&a)?)
}

/// Assemble `A3` from an order-6 jet of `rho` at an on-surface basepoint.
pub fn a3_matrix(rho_jet: &Jet) -> Result<[[Complex64; 5]; 5]> {
    if rho_jet.order() < 6 {
        return Err(crate::error::JetError::InsufficientOrder { needed: 6, have: rho_jet.order() }.into());
    }
    let rho0 = rho_jet.value().norm();
    if rho0 > ON_SURFACE_TOL {
        return Err(Error::OffSurface(rho0));
    }
    let rz = rho_jet.wirtinger(Var::Z)?;
    let rw = rho_jet.wirtinger(Var::W)?;
    let rzb = rho_jet.wirtinger(Var::ZBar)?;
    let rwb = rho_jet.wirtinger(Var::WBar)?;
    let rzz = rz.wirtinger(Var::Z)?;
    let rzw = rz.wirtinger(Var::W)?;
    let rww = rw.wirtinger(Var::W)?;

    let rw2 = rw.mul(&rw)?;
    let rz2 = rz.mul(&rz)?;
    let rz4 = rz.truncated(4)?;
    let rw4 = rw.truncated(4)?;
    // rho_{Z^2}(L,L) with L = (-rho_w, rho_z)
    let row5 = rzz
        .mul(&rw4.mul(&rw4)?)?
        .sub(&rzw.mul(&rz4.mul(&rw4)?)?.scale(Complex64::new(2.0, 0.0)))?
        .add(&rww.mul(&rz4.mul(&rz4)?)?)?;

    let rows = [rw2.mul(&rw)?, rz.mul(&rw2)?, rz2.mul(&rw)?, rz2.mul(&rz)?, row5];

    let mut m = [[Complex64::ZERO; 5]; 5];
    for (i, row) in rows.into_iter().enumerate() {
        m[i][0] = row.value();
        let mut f = row;
        for entry in m[i].iter_mut().skip(1) {
            f = lbar(&rwb, &rzb, &f)?;
            *entry = f.value();
        }
    }
    Ok(m)
}

/// Determinant of a 5x5 complex matrix by partial-pivot LU, together with
/// the product of the row norms as a conditioning scale.
pub fn det5(m: &[[Complex64; 5]; 5]) -> (Complex64, f64) {
    let mut row_scale = 1.0f64;
    for row in m {
        let norm: f64 = row.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt();
        row_scale *= norm.max(f64::MIN_POSITIVE);
    }
    let mut a = *m;
    let mut det = Complex64::ONE;
    for col in 0..5 {
        let (pivot_row, pivot_norm) = (col..5)
            .map(|r| (r, a[r][col].norm_sqr()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if pivot_norm == 0.0 {
            return (Complex64::ZERO, row_scale);
        }
        if pivot_row != col {
            a.swap(pivot_row, col);
            det = -det;
        }
        let pivot = a[col][col];
        det *= pivot;
        #[allow(clippy::needless_range_loop)]
        for r in col + 1..5 {
            let factor = a[r][col] / pivot;
            for cc in col..5 {
                let sub = factor * a[col][cc];
                a[r][cc] -= sub;
            }
        }
    }
    (det, row_scale)
}

/// Fefferman's complex Monge-Ampere determinant
/// `J = -det [[rho, rho_z̄, rho_w̄], [rho_z, rho_zz̄, rho_zw̄], [rho_w, rho_wz̄, rho_ww̄]]`
/// from an order >= 2 jet. Real for real-valued `rho` (the matrix is
/// Hermitian); vanishes exactly where the Levi form of `M` degenerates.
pub fn fefferman_j(rho_jet: &Jet) -> Result<f64> {
    if rho_jet.order() < 2 {
        return Err(crate::error::JetError::InsufficientOrder { needed: 2, have: rho_jet.order() }.into());
    }
    let g = |m: [u8; 4]| rho_jet.coeff(m);
    let rows = [
        [g([0, 0, 0, 0]), g([0, 0, 1, 0]), g([0, 0, 0, 1])],
        [g([1, 0, 0, 0]), g([1, 0, 1, 0]), g([1, 0, 0, 1])],
        [g([0, 1, 0, 0]), g([0, 1, 1, 0]), g([0, 1, 0, 1])],
    ];
    let det = rows[0][0] * (rows[1][1] * rows[2][2] - rows[1][2] * rows[2][1])
        - rows[0][1] * (rows[1][0] * rows[2][2] - rows[1][2] * rows[2][0])
        + rows[0][2] * (rows[1][0] * rows[2][1] - rows[1][1] * rows[2][0]);
    Ok(-det.re)
}

/// `det A3` with its conditioning scale, from a jet.
pub fn det_a3_from_jet(rho_jet: &Jet) -> Result<(Complex64, f64)> {
    Ok(det5(&a3_matrix(rho_jet)?))
}

/// All tensor quantities at one basepoint.
#[derive(Clone, Copy, Debug)]
pub struct QValue {
    pub det_a3: Complex64,
    pub j_on_m: f64,
    pub q: Complex64,
    pub row_scale: f64,
}

/// `Q = det A3 / J^{25/3}`; requires `J > 0` on `M`.
pub fn q_from_jet(rho_jet: &Jet) -> Result<QValue> {
    let j = fefferman_j(rho_jet)?;
    let strictly_positive = j.is_finite() && j > 0.0;
    if !strictly_positive {
        return Err(Error::LeviDegenerate(j));
    }
    let (det, row_scale) = det_a3_from_jet(rho_jet)?;
    let q = det / j.powf(Q_EXPONENT);
    Ok(QValue { det_a3: det, j_on_m: j, q, row_scale })
}

pub fn det_a3(s: &SurfaceSpec, p: (Complex64, Complex64)) -> Result<Complex64> {
    Ok(det_a3_from_jet(&s.rho_jet(p, 6)?)?.0)
}

pub fn q_invariant(s: &SurfaceSpec, p: (Complex64, Complex64)) -> Result<Complex64> {
    Ok(q_from_jet(&s.rho_jet(p, 6)?)?.q)
}

/// Evaluate everything at a chart parameter triple.
pub fn sample(s: &SurfaceSpec, theta: [f64; 3]) -> Result<TensorSample> {
    let p = s.chart_point(theta)?;
    let v = q_from_jet(&s.rho_jet(p, 6)?)?;
    Ok(TensorSample {
        theta,
        z_re: p.0.re,
        z_im: p.0.im,
        w_re: p.1.re,
        w_im: p.1.im,
        det_re: v.det_a3.re,
        det_im: v.det_a3.im,
        j_on_m: v.j_on_m,
        q_re: v.q.re,
        q_im: v.q.im,
        abs_q: v.q.norm(),
        row_scale: v.row_scale,
        abs_det_norm: v.det_a3.norm() / v.row_scale,
    })
}
