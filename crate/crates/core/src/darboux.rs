//! Finite Jacobi operators of dα and of its rational transforms, the
//! partition-function ladder Zₙ = n!∏cₗ², and checks of the Zₙ-ratio
//! expressions for the operator entries.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::measure::{stieltjes_recurrence, QuadratureMeasure, RecurrenceTable};
use crate::transforms::{transformed_measure, SpectralShift};

pub const DEFAULT_TILT_STEP: f64 = 1e-4;

/// Target accuracy of the tilt derivative; Richardson estimates from two
/// step sizes must agree to ten times this.
pub const TILT_TOLERANCE: f64 = 1e-7;

/// Truncated symmetric tridiagonal operator: diagonal a₁..a_d, off-diagonal b₁..b_{d−1}.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiOperator {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

impl JacobiOperator {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            m[(i, i)] = self.diag[i];
        }
        for (i, &b) in self.offdiag.iter().enumerate() {
            m[(i, i + 1)] = b;
            m[(i + 1, i)] = b;
        }
        m
    }

    /// Eigenvalues in increasing order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.to_matrix()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// CSV dump with columns index, a, b (b of the last row is empty).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,a,b\n");
        for i in 0..self.dim() {
            let b = self.offdiag.get(i).map(|b| format!("{b:e}")).unwrap_or_default();
            out.push_str(&format!("{},{:e},{}\n", i + 1, self.diag[i], b));
        }
        out
    }
}

pub fn build_jacobi(table: &RecurrenceTable, dim: usize) -> Result<JacobiOperator> {
    if dim == 0 || dim > table.n_max() {
        return Err(Error::DegreeOutOfRange { requested: dim, max: table.n_max() });
    }
    Ok(JacobiOperator { diag: table.diag()[..dim].to_vec(), offdiag: table.offdiag()[1..dim].to_vec() })
}

/// Jacobi operator of ∏(μⱼ − t)/∏(εⱼ − t) dα(t), for real shift points
/// that keep the transformed weight of one sign on the support.
pub fn transformed_jacobi(measure: &QuadratureMeasure, shift: &SpectralShift, dim: usize) -> Result<JacobiOperator> {
    let m = if shift.is_empty() { measure.clone() } else { transformed_measure(measure, shift)? };
    let table = stieltjes_recurrence(&m, dim)?;
    build_jacobi(&table, dim)
}

/// Z₀..Zₙ with Zₖ = k!·∏_{ℓ<k} cₗ².
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionLadder {
    pub z: Vec<f64>,
}

impl PartitionLadder {
    /// ln Zₖ, finite even where Zₖ itself over- or underflows.
    pub fn ln_z(&self, k: usize) -> f64 {
        self.z[k].ln()
    }
}

pub fn z_ladder(table: &RecurrenceTable, n: usize) -> Result<PartitionLadder> {
    if n > table.n_max() + 1 {
        return Err(Error::DegreeOutOfRange { requested: n, max: table.n_max() + 1 });
    }
    let mut z = Vec::with_capacity(n + 1);
    z.push(1.0);
    for k in 1..=n {
        z.push(z[k - 1] * k as f64 * table.c_sq()[k - 1]);
    }
    Ok(PartitionLadder { z })
}

/// Entry formulas against the recurrence at one index n.
///
/// `b_sq_formula` = (n+1)/(n+2)·ZₙZ_{n+2}/Z²_{n+1} is compared with both
/// b²ₙ and b²ₙ₊₁ of the operator; `a_formula` = d/ds|₀ ln(Zₙ/Zₙ₊₁) under the
/// tilt e^{st}dα is compared with ±aₙ₊₁. The identities that hold are
/// b_sq_formula = b²ₙ₊₁ and a_formula = −aₙ₊₁.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryReport {
    pub n: usize,
    pub b_sq_formula: f64,
    /// b²ₙ (one-based operator index; zero for n = 0).
    pub b_sq_same_index: f64,
    /// b²ₙ₊₁.
    pub b_sq_next_index: f64,
    pub a_formula: f64,
    /// aₙ₊₁ = diag entry of degree n.
    pub a_recurrence: f64,
    /// Change of the Richardson estimate when the step is halved.
    pub a_step_change: f64,
}

impl EntryReport {
    pub fn b_discrepancy(&self) -> f64 {
        (self.b_sq_formula - self.b_sq_next_index).abs()
    }

    pub fn b_discrepancy_same_index(&self) -> f64 {
        (self.b_sq_formula - self.b_sq_same_index).abs()
    }

    /// |a_formula + aₙ₊₁|.
    pub fn a_discrepancy(&self) -> f64 {
        (self.a_formula + self.a_recurrence).abs()
    }

    /// |a_formula − aₙ₊₁|, the comparison with the sign as often written.
    pub fn a_discrepancy_unsigned_convention(&self) -> f64 {
        (self.a_formula - self.a_recurrence).abs()
    }
}

fn ln_z_ratio(measure: &QuadratureMeasure, n: usize, s: f64) -> Result<f64> {
    let tilted = measure.tilted(s)?;
    let table = stieltjes_recurrence(&tilted, n + 1)?;
    let ladder = z_ladder(&table, n + 1)?;
    Ok(ladder.ln_z(n) - ladder.ln_z(n + 1))
}

fn richardson(measure: &QuadratureMeasure, n: usize, h: f64) -> Result<f64> {
    let central = |h: f64| -> Result<f64> { Ok((ln_z_ratio(measure, n, h)? - ln_z_ratio(measure, n, -h)?) / (2.0 * h)) };
    Ok((4.0 * central(h / 2.0)? - central(h)?) / 3.0)
}

pub fn verify_entry_formulas(measure: &QuadratureMeasure, n: usize, tilt_step: f64) -> Result<EntryReport> {
    if !(tilt_step > 0.0 && tilt_step.is_finite()) {
        return Err(Error::Config(format!("tilt step must be positive, got {tilt_step}")));
    }
    let table = stieltjes_recurrence(measure, n + 2)?;
    let z = z_ladder(&table, n + 2)?;
    let nf = n as f64;
    let b_sq_formula = (nf + 1.0) / (nf + 2.0) * (z.ln_z(n) + z.ln_z(n + 2) - 2.0 * z.ln_z(n + 1)).exp();

    let coarse = richardson(measure, n, tilt_step)?;
    let fine = richardson(measure, n, tilt_step / 2.0)?;
    let a_step_change = (coarse - fine).abs();
    if a_step_change > 10.0 * TILT_TOLERANCE {
        return Err(Error::PrecisionLoss(format!(
            "tilt derivative moved by {a_step_change:e} when the step was halved"
        )));
    }
    Ok(EntryReport {
        n,
        b_sq_formula,
        b_sq_same_index: table.offdiag()[n].powi(2),
        b_sq_next_index: table.offdiag()[n + 1].powi(2),
        a_formula: fine,
        a_recurrence: table.diag()[n],
        a_step_change,
    })
}

/// Real zeros of πₙ inside the support, by sign scan and bisection on the
/// recurrence values (independent of any eigen-solver).
pub fn monic_roots(table: &RecurrenceTable, n: usize, support: (f64, f64)) -> Result<Vec<f64>> {
    if n > table.n_max() {
        return Err(Error::DegreeOutOfRange { requested: n, max: table.n_max() });
    }
    let f = |x: f64| -> Result<f64> { Ok(table.monic_values_real(n, x)?[n]) };
    let (lo, hi) = support;
    let samples = 400 * (n + 1);
    let mut roots = Vec::with_capacity(n);
    let mut x0 = lo;
    let mut f0 = f(x0)?;
    for i in 1..=samples {
        let x1 = lo + (hi - lo) * i as f64 / samples as f64;
        let f1 = f(x1)?;
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0 * f1 < 0.0 {
            let (mut a, mut b, mut fa) = (x0, x1, f0);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let fm = f(m)?;
                if fm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if fa * fm < 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            roots.push(0.5 * (a + b));
        }
        x0 = x1;
        f0 = f1;
    }
    if f0 == 0.0 {
        roots.push(x0);
    }
    if roots.len() != n {
        return Err(Error::PrecisionLoss(format!("found {} of the {n} zeros of π_{n}", roots.len())));
    }
    Ok(roots)
}
