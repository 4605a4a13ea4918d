//! Cauchy transforms and the Christoffel / Uvarov determinant formulas for
//! the monic orthogonal polynomials of dα^[ℓ,m] = ∏(μⱼ − t)/∏(εⱼ − t) dα.
//!
//! Cauchy transforms are carried in scaled form H_k(ε) = ∫ π_k(t)/(t − ε) dα(t);
//! the normalized h_k = H_k/(2πi) is only materialized in [`CauchyValue`].
//! Every formula below has as many h-rows in its numerator as in its
//! denominator (or pairs each h with a γ), so the 2πi factors cancel and the
//! scaled values can be used directly.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{determinant, Determinant};
use crate::measure::{QuadratureMeasure, RecurrenceTable};
use crate::C64;

/// Minimum pairwise gap between shift points, relative to max(1, |largest point|).
pub const MIN_RELATIVE_GAP: f64 = 1e-6;

/// Pivot ratio above which a denominator determinant counts as singular.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e13;

/// Relative tolerance of the node-doubling check on Cauchy transforms.
pub const REFINEMENT_TOLERANCE: f64 = 1e-8;

/// Inserted roots μ and poles ε of a rational measure transform.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralShift {
    pub mu: Vec<C64>,
    pub eps: Vec<C64>,
}

impl SpectralShift {
    pub fn new(mu: Vec<C64>, eps: Vec<C64>) -> Self {
        SpectralShift { mu, eps }
    }

    pub fn empty() -> Self {
        SpectralShift { mu: vec![], eps: vec![] }
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty() && self.eps.is_empty()
    }

    /// All points pairwise distinct, every pole off the support.
    pub fn validate(&self, support: (f64, f64)) -> Result<()> {
        let all: Vec<C64> = self.mu.iter().chain(&self.eps).copied().collect();
        check_distinct(&all)?;
        for &e in &self.eps {
            check_pole(e, support)?;
        }
        Ok(())
    }

    /// True when every root is also off the support, so that dα^[ℓ,m] is a
    /// genuine (sign-definite) measure for real points.
    pub fn roots_off_support(&self, support: (f64, f64)) -> bool {
        self.mu.iter().all(|&m| !on_support(m, support))
    }

    /// ∏(μⱼ − t) / ∏(εⱼ − t).
    pub fn factor(&self, t: C64) -> C64 {
        let num: C64 = self.mu.iter().map(|&m| m - t).product();
        let den: C64 = self.eps.iter().map(|&e| e - t).product();
        num / den
    }
}

fn on_support(z: C64, (lo, hi): (f64, f64)) -> bool {
    z.im == 0.0 && z.re >= lo && z.re <= hi
}

/// Rejects a real pole inside the closed support interval.
pub fn check_pole(eps: C64, support: (f64, f64)) -> Result<()> {
    if on_support(eps, support) {
        Err(Error::PoleOnSupport(crate::config::format_complex(eps)))
    } else {
        Ok(())
    }
}

/// Rejects coincident or clustered points: a pair closer than
/// [`MIN_RELATIVE_GAP`]·max(1, |a|, |b|).
pub fn check_distinct(points: &[C64]) -> Result<()> {
    for i in 0..points.len() {
        for j in 0..i {
            let scale = points[i].norm().max(points[j].norm()).max(1.0);
            if (points[i] - points[j]).norm() < MIN_RELATIVE_GAP * scale {
                return Err(Error::DegenerateShift(format!(
                    "points {} and {} are closer than {:e}",
                    crate::config::format_complex(points[j]),
                    crate::config::format_complex(points[i]),
                    MIN_RELATIVE_GAP * scale
                )));
            }
        }
    }
    Ok(())
}

/// A Cauchy transform value in both normalizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyValue {
    /// H_k(ε) = ∫ π_k(t)/(t − ε) dα(t)
    pub scaled: C64,
    /// h_k(ε) = H_k(ε)/(2πi)
    pub normalized: C64,
}

impl CauchyValue {
    pub fn from_scaled(scaled: C64) -> Self {
        CauchyValue { scaled, normalized: scaled / C64::new(0.0, 2.0 * PI) }
    }
}

/// H_0..H_degree at each point, plus the L¹ size of each integrand.
///
/// Besides π_k(t)/(t − ε) the integrand π_k(t)·ρᵏ/(t − ε), ρ = (t − c)/(ε − c)
/// with c the centre of the support, is summed: the two differ by a
/// polynomial of degree < k, orthogonal to π_k. Whichever has the smaller L¹
/// size suffers less cancellation and is kept; far from the support the
/// plain form would lose all digits of H_k ~ ε^{-k-1}.
fn raw_transforms(measure: &QuadratureMeasure, table: &RecurrenceTable, points: &[C64], degree: usize) -> Result<(Vec<Vec<C64>>, Vec<Vec<f64>>)> {
    let pis: Vec<Vec<f64>> = measure
        .nodes()
        .iter()
        .map(|&t| table.monic_values_real(degree, t))
        .collect::<Result<_>>()?;
    let (lo, hi) = measure.support();
    let center = 0.5 * (lo + hi);
    let zero = C64::new(0.0, 0.0);
    let mut values = Vec::with_capacity(points.len());
    let mut sizes = Vec::with_capacity(points.len());
    for &eps in points {
        let mut plain = vec![zero; degree + 1];
        let mut plain_l1 = vec![0.0; degree + 1];
        let mut reduced = vec![zero; degree + 1];
        let mut reduced_l1 = vec![0.0; degree + 1];
        for ((&t, &w), pi) in measure.nodes().iter().zip(measure.weights()).zip(&pis) {
            let rho = C64::new(t - center, 0.0) / (eps - center);
            let base = w / (C64::new(t, 0.0) - eps);
            let base_norm = base.norm();
            let mut kernel = base;
            for k in 0..=degree {
                plain[k] += base * pi[k];
                plain_l1[k] += base_norm * pi[k].abs();
                reduced[k] += kernel * pi[k];
                reduced_l1[k] += kernel.norm() * pi[k].abs();
                kernel *= rho;
            }
        }
        let mut h = plain;
        let mut l1 = plain_l1;
        for k in 0..=degree {
            if reduced_l1[k] < l1[k] {
                h[k] = reduced[k];
                l1[k] = reduced_l1[k];
            }
        }
        values.push(h);
        sizes.push(l1);
    }
    Ok((values, sizes))
}

/// Scaled Cauchy transforms H_k(εᵢ), k = 0..=degree, for a list of points,
/// checked against the same weight on a rule with twice the nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyRows {
    points: Vec<C64>,
    values: Vec<Vec<C64>>,
    degree: usize,
}

impl CauchyRows {
    pub fn build(measure: &QuadratureMeasure, table: &RecurrenceTable, points: &[C64], degree: usize) -> Result<Self> {
        if degree > table.n_max() {
            return Err(Error::DegreeOutOfRange { requested: degree, max: table.n_max() });
        }
        for &p in points {
            check_pole(p, measure.support())?;
        }
        let (values, _) = raw_transforms(measure, table, points, degree)?;
        if let Some(refined) = measure.refined() {
            let refined = refined?;
            let (fine, sizes) = raw_transforms(refined, table, points, degree)?;
            let mut worst = 0.0f64;
            for i in 0..points.len() {
                for k in 0..=degree {
                    let floor = 64.0 * f64::EPSILON * sizes[i][k];
                    let change = (values[i][k] - fine[i][k]).norm() / fine[i][k].norm().max(floor);
                    worst = worst.max(change);
                }
            }
            if !(worst < REFINEMENT_TOLERANCE) {
                return Err(Error::RefinementFailure { change: worst, tolerance: REFINEMENT_TOLERANCE });
            }
        }
        Ok(CauchyRows { points: points.to_vec(), values, degree })
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Highest transform degree available.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// H_0..H_degree at the i-th point.
    pub fn row(&self, i: usize) -> &[C64] {
        &self.values[i]
    }

    pub fn scaled(&self, i: usize, k: usize) -> C64 {
        self.values[i][k]
    }

    pub fn value(&self, i: usize, k: usize) -> CauchyValue {
        CauchyValue::from_scaled(self.values[i][k])
    }

    /// Rows reordered / restricted to the given indices.
    pub fn select(&self, indices: &[usize]) -> CauchyRows {
        CauchyRows {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            values: indices.iter().map(|&i| self.values[i].clone()).collect(),
            degree: self.degree,
        }
    }

    pub(crate) fn require_degree(&self, d: usize) -> Result<()> {
        if d > self.degree {
            Err(Error::DegreeOutOfRange { requested: d, max: self.degree })
        } else {
            Ok(())
        }
    }
}

/// Cauchy transform of π_k at one point, with refinement check.
pub fn cauchy_transform(measure: &QuadratureMeasure, table: &RecurrenceTable, k: usize, eps: C64) -> Result<CauchyValue> {
    let rows = CauchyRows::build(measure, table, &[eps], k)?;
    Ok(rows.value(0, k))
}

/// βⱼ = ∏_{k≠j} 1/(εⱼ − ε_k), so that 1/∏(t − εⱼ) = Σ βⱼ/(t − εⱼ).
pub fn partial_fractions(points: &[C64]) -> Result<Vec<C64>> {
    check_distinct(points)?;
    Ok(points
        .iter()
        .enumerate()
        .map(|(j, &ej)| {
            points
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, &ek)| C64::new(1.0, 0.0) / (ej - ek))
                .product()
        })
        .collect())
}

pub(crate) fn monic_row(table: &RecurrenceTable, x: C64, from: usize, to: usize) -> Result<Vec<C64>> {
    Ok(table.monic_values(to, x)?[from..=to].to_vec())
}

pub(crate) fn cauchy_row(rows: &CauchyRows, i: usize, from: usize, to: usize) -> Result<Vec<C64>> {
    rows.require_degree(to)?;
    Ok(rows.row(i)[from..=to].to_vec())
}

/// num/den with a singularity check on the denominator; returns the
/// quotient and the worse of the two pivot ratios.
pub(crate) fn determinant_ratio(num: &[Vec<C64>], den: &[Vec<C64>]) -> Result<(C64, f64)> {
    let d: Determinant = determinant(den);
    if d.is_singular(SINGULAR_PIVOT_RATIO) {
        return Err(Error::SingularDenominator { condition: d.condition });
    }
    let n = determinant(num);
    Ok((n.value / d.value, n.condition.max(d.condition)))
}

fn check_not_root(t: C64, mu: &[C64]) -> Result<()> {
    let scale = mu.iter().fold(1.0f64, |m, z| m.max(z.norm())).max(t.norm());
    if mu.iter().any(|&m| (t - m).norm() < 1e-12 * scale) {
        return Err(Error::DegenerateShift(format!(
            "evaluation point {} coincides with an inserted root",
            crate::config::format_complex(t)
        )));
    }
    Ok(())
}

/// π_n^[ℓ,0](t) for dα^[ℓ,0] = ∏(μⱼ − t) dα, by Christoffel's determinant ratio.
pub fn christoffel_poly(table: &RecurrenceTable, mu: &[C64], n: usize, t: C64) -> Result<C64> {
    if mu.is_empty() {
        return Err(Error::UnsupportedRegime("christoffel_poly needs at least one root".into()));
    }
    combined_poly_inner(table, None, mu, n, t)
}

/// π_n^[0,m](t) for dα^[0,m] = dα/∏(εⱼ − t), m ≤ n, by Uvarov's determinant ratio.
/// The poles are the points of `rows`.
pub fn uvarov_poly(table: &RecurrenceTable, rows: &CauchyRows, n: usize, t: C64) -> Result<C64> {
    combined_poly_inner(table, Some(rows), &[], n, t)
}

/// π_n^[ℓ,m](t) for the full rational transform, m ≤ n.
pub fn combined_poly(table: &RecurrenceTable, rows: &CauchyRows, mu: &[C64], n: usize, t: C64) -> Result<C64> {
    combined_poly_inner(table, Some(rows), mu, n, t)
}

fn combined_poly_inner(table: &RecurrenceTable, rows: Option<&CauchyRows>, mu: &[C64], n: usize, t: C64) -> Result<C64> {
    let m = rows.map_or(0, |r| r.len());
    let l = mu.len();
    if m > n {
        return Err(Error::UnsupportedRegime(format!("{m} poles exceed degree {n}")));
    }
    if n + l > table.n_max() {
        return Err(Error::DegreeOutOfRange { requested: n + l, max: table.n_max() });
    }
    let mut all: Vec<C64> = mu.to_vec();
    if let Some(r) = rows {
        all.extend_from_slice(r.points());
    }
    check_distinct(&all)?;
    check_not_root(t, mu)?;

    let lo = n - m;
    let hi = n + l;
    let mut num = Vec::with_capacity(m + l + 1);
    let mut den = Vec::with_capacity(m + l);
    if let Some(r) = rows {
        for i in 0..m {
            let row = cauchy_row(r, i, lo, hi)?;
            den.push(row[..row.len() - 1].to_vec());
            num.push(row);
        }
    }
    for &x in mu {
        let row = monic_row(table, x, lo, hi)?;
        den.push(row[..row.len() - 1].to_vec());
        num.push(row);
    }
    num.push(monic_row(table, t, lo, hi)?);
    let (ratio, _) = determinant_ratio(&num, &den)?;
    let roots: C64 = mu.iter().map(|&x| t - x).product();
    Ok(ratio / roots)
}

/// Cauchy transform of π_n^[0,m] against dα^[0,m], evaluated at `eval_at`
/// whose base transforms H_0.. are `eval_row`. The poles are the points of `shift`.
pub fn uvarov_cauchy(shift: &CauchyRows, eval_at: C64, eval_row: &[C64], n: usize) -> Result<CauchyValue> {
    let m = shift.len();
    if m > n {
        return Err(Error::UnsupportedRegime(format!("{m} poles exceed degree {n}")));
    }
    if n >= eval_row.len() {
        return Err(Error::DegreeOutOfRange { requested: n, max: eval_row.len().saturating_sub(1) });
    }
    let mut all = shift.points().to_vec();
    all.push(eval_at);
    check_distinct(&all)?;

    let lo = n - m;
    let mut num = Vec::with_capacity(m + 1);
    let mut den = Vec::with_capacity(m);
    for i in 0..m {
        let row = cauchy_row(shift, i, lo, n)?;
        den.push(row[..m].to_vec());
        num.push(row);
    }
    num.push(eval_row[lo..=n].to_vec());
    let (ratio, _) = determinant_ratio(&num, &den)?;
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let prefactor: C64 = shift.points().iter().map(|&e| eval_at - e).product();
    Ok(CauchyValue::from_scaled(ratio * sign / prefactor))
}

/// The quadrature measure of dα^[ℓ,m], for real shift points only.
pub fn transformed_measure(measure: &QuadratureMeasure, shift: &SpectralShift) -> Result<QuadratureMeasure> {
    if shift.mu.iter().chain(&shift.eps).any(|z| z.im != 0.0) {
        return Err(Error::InvalidWeight("complex shift points give a complex measure".into()));
    }
    shift.validate(measure.support())?;
    measure.with_weight_factor(|t| shift.factor(C64::new(t, 0.0)).re, shift.mu.len())
}
