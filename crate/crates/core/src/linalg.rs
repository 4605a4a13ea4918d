//! Small dense complex determinants and Vandermonde products.
//!
//! The matrices met in this crate are at most a dozen rows, but their
//! columns are polynomial values of very different magnitudes (π_k(μ) grows
//! like μ^k, Cauchy transforms decay like ε^{-k-1}). Rows and columns are
//! therefore equilibrated by powers of two before elimination, which leaves
//! the determinant exactly recoverable and makes the pivot ratio a usable
//! conditioning estimate.

use crate::C64;

/// Determinant together with the pivot-ratio conditioning estimate of the
/// equilibrated matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Determinant {
    pub value: C64,
    /// max |pivot| / min |pivot| after equilibration; infinite when a zero pivot was met.
    pub condition: f64,
}

impl Determinant {
    pub fn is_singular(&self, limit: f64) -> bool {
        !self.condition.is_finite() || self.condition > limit || self.value == C64::new(0.0, 0.0)
    }
}

fn pow2_scale(max_abs: f64) -> f64 {
    if max_abs == 0.0 || !max_abs.is_finite() {
        1.0
    } else {
        (-max_abs.log2().floor()).exp2()
    }
}

/// Determinant of a square matrix given as rows, by LU with partial pivoting.
///
/// An empty matrix has determinant one.
pub fn determinant(rows: &[Vec<C64>]) -> Determinant {
    let n = rows.len();
    if n == 0 {
        return Determinant { value: C64::new(1.0, 0.0), condition: 1.0 };
    }
    assert!(rows.iter().all(|r| r.len() == n), "determinant of a non-square matrix");

    let mut a: Vec<C64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
    // log2 of the accumulated equilibration factor, kept exact
    let mut log2_scale = 0.0f64;

    for j in 0..n {
        let max = (0..n).map(|i| a[i * n + j].norm()).fold(0.0, f64::max);
        let s = pow2_scale(max);
        log2_scale += s.log2();
        for i in 0..n {
            a[i * n + j] *= s;
        }
    }
    for i in 0..n {
        let max = a[i * n..(i + 1) * n].iter().map(|z| z.norm()).fold(0.0, f64::max);
        let s = pow2_scale(max);
        log2_scale += s.log2();
        for z in &mut a[i * n..(i + 1) * n] {
            *z *= s;
        }
    }

    let mut det = C64::new(1.0, 0.0);
    let mut pmax = 0.0f64;
    let mut pmin = f64::INFINITY;
    for k in 0..n {
        let (p, pnorm) = (k..n)
            .map(|i| (i, a[i * n + k].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pnorm == 0.0 {
            return Determinant { value: C64::new(0.0, 0.0), condition: f64::INFINITY };
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            det = -det;
        }
        let pivot = a[k * n + k];
        pmax = pmax.max(pnorm);
        pmin = pmin.min(pnorm);
        det *= pivot;
        for i in k + 1..n {
            let factor = a[i * n + k] / pivot;
            if factor == C64::new(0.0, 0.0) {
                continue;
            }
            for j in k + 1..n {
                let u = a[k * n + j];
                a[i * n + j] -= factor * u;
            }
        }
    }

    Determinant { value: det * (-log2_scale).exp2(), condition: pmax / pmin }
}

/// Vandermonde product Δ(x) = ∏_{i>j} (x_i − x_j), in input order.
pub fn vandermonde(x: &[C64]) -> C64 {
    let mut v = C64::new(1.0, 0.0);
    for i in 0..x.len() {
        for j in 0..i {
            v *= x[i] - x[j];
        }
    }
    v
}
