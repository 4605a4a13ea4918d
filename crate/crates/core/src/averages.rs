//! Closed-form averages of products and ratios of characteristic polynomials
//! over a unitary ensemble with weight dα, expressed through the monic
//! orthogonal polynomials π_k and their scaled Cauchy transforms H_k.
//!
//! Conventions shared by every formula:
//! - Δ(x) = ∏_{i>j}(xᵢ − xⱼ) in input order, and determinant rows follow input
//!   order, so each value is invariant under permutations of μ and of ε.
//! - Each γⱼ = −2πi/cⱼ² meets exactly one h = H/(2πi), so the pair is applied
//!   as −H/cⱼ² and no imaginary unit enters real-input computations.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{determinant, vandermonde};
use crate::measure::{QuadratureMeasure, RecurrenceTable};
use crate::transforms::{cauchy_row, check_distinct, determinant_ratio, monic_row, CauchyRows};
use crate::C64;

/// Largest number of poles accepted by [`ratio_via_products`] by default.
pub const DEFAULT_MAX_FOLD: usize = 2;

/// Relative change allowed when [`ratio_via_products`] is repeated on the doubled rule.
pub const PRODUCT_QUADRATURE_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormulaId {
    Product,
    Inverse,
    Ratio,
    Mixed,
    TwoPointProduct,
    TwoPointRatio,
    RatioViaProducts,
}

impl FormulaId {
    pub const ALL: [FormulaId; 7] = [
        FormulaId::Product,
        FormulaId::Inverse,
        FormulaId::Ratio,
        FormulaId::Mixed,
        FormulaId::TwoPointProduct,
        FormulaId::TwoPointRatio,
        FormulaId::RatioViaProducts,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FormulaId::Product => "product",
            FormulaId::Inverse => "inverse",
            FormulaId::Ratio => "ratio",
            FormulaId::Mixed => "mixed",
            FormulaId::TwoPointProduct => "two_point_product",
            FormulaId::TwoPointRatio => "two_point_ratio",
            FormulaId::RatioViaProducts => "ratio_via_products",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        let t = text.trim().to_ascii_lowercase().replace('-', "_");
        FormulaId::ALL.into_iter().find(|f| f.name() == t)
    }
}

impl fmt::Display for FormulaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AverageResult {
    pub value: C64,
    /// Largest pivot ratio among the determinants involved.
    pub condition: f64,
    pub formula: FormulaId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    WI,
    WII,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: C64,
    pub kind: KernelKind,
    pub degree: usize,
}

fn sign(exponent: usize) -> f64 {
    if exponent % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// ∏_{j=lo}^{hi−1} (−1/cⱼ²): the γ product with its 2πi factors removed.
fn gamma_product(table: &RecurrenceTable, lo: usize, hi: usize) -> f64 {
    (lo..hi).map(|j| -1.0 / table.c_sq()[j]).product()
}

fn need_degree(table: &RecurrenceTable, d: usize) -> Result<()> {
    if d > table.n_max() {
        Err(Error::DegreeOutOfRange { requested: d, max: table.n_max() })
    } else {
        Ok(())
    }
}

fn check_poles_vs_n(m: usize, n: usize) -> Result<()> {
    if m > n {
        Err(Error::UnsupportedRegime(format!("M = {m} exceeds N = {n}")))
    } else {
        Ok(())
    }
}

/// ⟨∏ᵢ D_N[μᵢ]⟩ = det(π_{N+j−1}(μᵢ)) / Δ(μ).
pub fn product_average(table: &RecurrenceTable, mu: &[C64], n: usize) -> Result<AverageResult> {
    if mu.is_empty() {
        return Err(Error::UnsupportedRegime("product average needs at least one μ".into()));
    }
    let l = mu.len();
    need_degree(table, n + l - 1)?;
    check_distinct(mu)?;
    let rows: Vec<Vec<C64>> = mu.iter().map(|&x| monic_row(table, x, n, n + l - 1)).collect::<Result<_>>()?;
    let d = determinant(&rows);
    Ok(AverageResult { value: d.value / vandermonde(mu), condition: d.condition, formula: FormulaId::Product })
}

/// ⟨∏ᵢ D_N[εᵢ]⁻¹⟩ for the poles held by `rows`, 1 ≤ M ≤ N.
pub fn inverse_average(table: &RecurrenceTable, rows: &CauchyRows, n: usize) -> Result<AverageResult> {
    let m = rows.len();
    if m == 0 {
        return Err(Error::UnsupportedRegime("inverse average needs at least one ε".into()));
    }
    check_poles_vs_n(m, n)?;
    let eps = rows.points();
    check_distinct(eps)?;
    let mat: Vec<Vec<C64>> = (0..m).map(|i| cauchy_row(rows, i, n - m, n - 1)).collect::<Result<_>>()?;
    let d = determinant(&mat);
    let pre = sign(m * (m - 1) / 2) * gamma_product(table, n - m, n);
    Ok(AverageResult { value: d.value * pre / vandermonde(eps), condition: d.condition, formula: FormulaId::Inverse })
}

/// The (M+K)×(M+K) matrix of M H-rows and K π-rows, degrees N−M..N+K−1.
fn mixed_matrix(table: &RecurrenceTable, rows: &CauchyRows, mu: &[C64], n: usize) -> Result<Vec<Vec<C64>>> {
    let (m, k) = (rows.len(), mu.len());
    let (lo, hi) = (n - m, n + k - 1);
    let mut mat = Vec::with_capacity(m + k);
    for i in 0..m {
        mat.push(cauchy_row(rows, i, lo, hi)?);
    }
    for &x in mu {
        mat.push(monic_row(table, x, lo, hi)?);
    }
    Ok(mat)
}

fn check_ratio_inputs(table: &RecurrenceTable, rows: &CauchyRows, mu: &[C64], n: usize) -> Result<()> {
    check_poles_vs_n(rows.len(), n)?;
    if !mu.is_empty() {
        need_degree(table, n + mu.len() - 1)?;
    }
    let all: Vec<C64> = mu.iter().chain(rows.points()).copied().collect();
    check_distinct(&all)
}

/// ⟨∏ D_N[μᵢ] / ∏ D_N[εⱼ]⟩ with K = |μ| roots and M = |ε| ≤ N poles.
pub fn ratio_average(table: &RecurrenceTable, rows: &CauchyRows, mu: &[C64], n: usize) -> Result<AverageResult> {
    check_ratio_inputs(table, rows, mu, n)?;
    if rows.is_empty() {
        return product_average(table, mu, n).map(|r| AverageResult { formula: FormulaId::Ratio, ..r });
    }
    let m = rows.len();
    let d = determinant(&mixed_matrix(table, rows, mu, n)?);
    let pre = sign(m * (m - 1) / 2) * gamma_product(table, n - m, n);
    let value = d.value * pre / (vandermonde(mu) * vandermonde(rows.points()));
    Ok(AverageResult { value, condition: d.condition, formula: FormulaId::Ratio })
}

/// ⟨∏ D_N[μᵢ]⟩ under the pole-transformed weight dα/∏(εⱼ − t).
pub fn mixed_average(table: &RecurrenceTable, rows: &CauchyRows, mu: &[C64], n: usize) -> Result<AverageResult> {
    check_ratio_inputs(table, rows, mu, n)?;
    if rows.is_empty() {
        return product_average(table, mu, n).map(|r| AverageResult { formula: FormulaId::Mixed, ..r });
    }
    let m = rows.len();
    let num = mixed_matrix(table, rows, mu, n)?;
    let den: Vec<Vec<C64>> = (0..m).map(|i| cauchy_row(rows, i, n - m, n - 1)).collect::<Result<_>>()?;
    let (ratio, condition) = determinant_ratio(&num, &den)?;
    Ok(AverageResult { value: ratio / vandermonde(mu), condition, formula: FormulaId::Mixed })
}

/// W_{I,deg}(x, y) = (π_deg(x)π_{deg−1}(y) − π_deg(y)π_{deg−1}(x))/(x − y),
/// switching to c²_{deg−1}·Σ_{i<deg} pᵢ(x)pᵢ(y) when x and y nearly coincide.
pub fn kernel_w_i(table: &RecurrenceTable, x: C64, y: C64, deg: usize) -> Result<KernelValue> {
    if deg == 0 {
        return Err(Error::UnsupportedRegime("kernel degree must be at least 1".into()));
    }
    need_degree(table, deg)?;
    let px = table.monic_values(deg, x)?;
    let py = table.monic_values(deg, y)?;
    let value = if (x - y).norm() <= 1e-8 * x.norm().max(1.0) {
        let c = table.c_sq();
        let sum: C64 = (0..deg).map(|i| px[i] * py[i] / c[i]).sum();
        sum * c[deg - 1]
    } else {
        (px[deg] * py[deg - 1] - py[deg] * px[deg - 1]) / (x - y)
    };
    Ok(KernelValue { value, kind: KernelKind::WI, degree: deg })
}

/// ⟨∏ᵢ D_N[λᵢ] ∏ⱼ D_N[μⱼ]⟩ through the K×K determinant of W_{I,N+K}(λᵢ, μⱼ).
pub fn two_point_product(table: &RecurrenceTable, lambda: &[C64], mu: &[C64], n: usize) -> Result<AverageResult> {
    let k = lambda.len();
    if k == 0 || mu.len() != k {
        return Err(Error::UnsupportedRegime("two-point product needs K ≥ 1 values of λ and of μ".into()));
    }
    need_degree(table, n + k)?;
    let all: Vec<C64> = lambda.iter().chain(mu).copied().collect();
    check_distinct(&all)?;
    let mut mat = Vec::with_capacity(k);
    for &l in lambda {
        mat.push(mu.iter().map(|&m| kernel_w_i(table, l, m, n + k).map(|w| w.value)).collect::<Result<Vec<_>>>()?);
    }
    let d = determinant(&mat);
    let c = table.c_sq();
    let num: f64 = (n..n + k).map(|l| c[l]).product();
    let cnk = num / c[n + k - 1].powi(k as i32);
    let value = d.value * cnk / (vandermonde(lambda) * vandermonde(mu));
    Ok(AverageResult { value, condition: d.condition, formula: FormulaId::TwoPointProduct })
}

/// Scaled W_{II,N}(ε, μ) = (H_N(ε)π_{N−1}(μ) − H_{N−1}(ε)π_N(μ))/(ε − μ),
/// with `h` the transforms H_0.. at ε.
pub fn kernel_w_ii(table: &RecurrenceTable, h: &[C64], eps: C64, mu: C64, n: usize) -> Result<KernelValue> {
    if n == 0 {
        return Err(Error::UnsupportedRegime("kernel degree must be at least 1".into()));
    }
    need_degree(table, n)?;
    if n >= h.len() {
        return Err(Error::DegreeOutOfRange { requested: n, max: h.len().saturating_sub(1) });
    }
    check_distinct(&[eps, mu])?;
    let p = table.monic_values(n, mu)?;
    let value = (h[n] * p[n - 1] - h[n - 1] * p[n]) / (eps - mu);
    Ok(KernelValue { value, kind: KernelKind::WII, degree: n })
}

/// ⟨∏ D_N[μⱼ] / ∏ D_N[εᵢ]⟩ with K = M ≤ N through the K×K determinant of
/// W_{II,N}(εᵢ, μⱼ). Δ(ε,μ) is the Vandermonde of ε followed by μ.
pub fn two_point_ratio(table: &RecurrenceTable, rows: &CauchyRows, mu: &[C64], n: usize) -> Result<AverageResult> {
    let k = rows.len();
    if k == 0 || mu.len() != k {
        return Err(Error::UnsupportedRegime("two-point ratio needs K ≥ 1 values of ε and of μ".into()));
    }
    check_poles_vs_n(k, n)?;
    let eps = rows.points();
    let all: Vec<C64> = eps.iter().chain(mu).copied().collect();
    check_distinct(&all)?;
    let mut mat = Vec::with_capacity(k);
    for (i, &e) in eps.iter().enumerate() {
        mat.push(mu.iter().map(|&m| kernel_w_ii(table, rows.row(i), e, m, n).map(|w| w.value)).collect::<Result<Vec<_>>>()?);
    }
    let d = determinant(&mat);
    let pre = sign(k * (k - 1) / 2) * (-1.0 / table.c_sq()[n - 1]).powi(k as i32);
    let de = vandermonde(eps);
    let dm = vandermonde(mu);
    let value = d.value * pre * vandermonde(&all) / (de * de * dm * dm);
    Ok(AverageResult { value, condition: d.condition, formula: FormulaId::TwoPointRatio })
}

/// Ratio average rebuilt from product averages: an M-fold quadrature over λ
/// of Δ(λ,μ)⟨∏D_{N−M}[λ]∏D_{N−M}[μ]⟩/∏(λⱼ − εⱼ). The inner average is
/// [`two_point_product`] when M = |μ| and [`product_average`] otherwise.
pub fn ratio_via_products(measure: &QuadratureMeasure, table: &RecurrenceTable, mu: &[C64], eps: &[C64], n: usize) -> Result<AverageResult> {
    ratio_via_products_with_limit(measure, table, mu, eps, n, DEFAULT_MAX_FOLD)
}

pub fn ratio_via_products_with_limit(
    measure: &QuadratureMeasure,
    table: &RecurrenceTable,
    mu: &[C64],
    eps: &[C64],
    n: usize,
    max_fold: usize,
) -> Result<AverageResult> {
    let (k, m) = (mu.len(), eps.len());
    check_poles_vs_n(m, n)?;
    if m > max_fold {
        return Err(Error::ComplexityLimit(format!("{m}-fold quadrature exceeds the limit of {max_fold}")));
    }
    let all: Vec<C64> = mu.iter().chain(eps).copied().collect();
    check_distinct(&all)?;
    for &e in eps {
        crate::transforms::check_pole(e, measure.support())?;
    }
    if m == 0 {
        return product_average(table, mu, n).map(|r| AverageResult { formula: FormulaId::RatioViaProducts, ..r });
    }
    if k > 0 {
        need_degree(table, n + k - 1)?;
    }

    let (integral, condition) = product_quadrature(measure, table, mu, eps, n)?;
    if let Some(fine) = measure.refined() {
        let (check, _) = product_quadrature(fine?, table, mu, eps, n)?;
        let change = (integral - check).norm() / check.norm().max(f64::MIN_POSITIVE);
        if !(change < PRODUCT_QUADRATURE_TOLERANCE) {
            return Err(Error::RefinementFailure { change, tolerance: PRODUCT_QUADRATURE_TOLERANCE });
        }
    }
    let pre = sign(m * (m - 1) / 2) * gamma_product(table, n - m, n);
    let value = integral * pre / (vandermonde(mu) * vandermonde(eps));
    Ok(AverageResult { value, condition, formula: FormulaId::RatioViaProducts })
}

/// Σ over the M-fold node grid of ∏wⱼ/(λⱼ − εⱼ) · Δ(λ,μ)·⟨products⟩.
fn product_quadrature(measure: &QuadratureMeasure, table: &RecurrenceTable, mu: &[C64], eps: &[C64], n: usize) -> Result<(C64, f64)> {
    let (k, m) = (mu.len(), eps.len());
    let inner = n - m;
    let nodes = measure.nodes();
    let weights = measure.weights();
    let q = nodes.len();
    let mut idx = vec![0usize; m];
    let mut total = C64::new(0.0, 0.0);
    let mut condition = 1.0f64;
    loop {
        // repeated nodes make Δ(λ,μ) vanish
        let distinct = (0..m).all(|i| (0..i).all(|j| idx[i] != idx[j]));
        if distinct {
            let lambda: Vec<C64> = idx.iter().map(|&i| C64::new(nodes[i], 0.0)).collect();
            let mut weight = C64::new(1.0, 0.0);
            for j in 0..m {
                weight *= weights[idx[j]] / (lambda[j] - eps[j]);
            }
            let points: Vec<C64> = lambda.iter().chain(mu).copied().collect();
            let avg = if k == m {
                two_point_product(table, &lambda, mu, inner)
            } else {
                product_average(table, &points, inner)
            };
            let term = match avg {
                Ok(a) => {
                    condition = condition.max(a.condition);
                    vandermonde(&points) * a.value
                }
                // a node too close to some μ: use Δ·⟨…⟩ = det(π rows) directly
                Err(Error::DegenerateShift(_)) => {
                    let rows: Vec<Vec<C64>> = points
                        .iter()
                        .map(|&x| monic_row(table, x, inner, inner + m + k - 1))
                        .collect::<Result<_>>()?;
                    determinant(&rows).value
                }
                Err(e) => return Err(e),
            };
            total += weight * term;
        }
        let mut d = 0;
        loop {
            if d == m {
                return Ok((total, condition));
            }
            idx[d] += 1;
            if idx[d] < q {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{build_quadrature, stieltjes_recurrence, WeightSpec};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn rel(a: C64, b: C64) -> f64 {
        (a - b).norm() / b.norm()
    }

    fn setup(spec: WeightSpec) -> (QuadratureMeasure, RecurrenceTable) {
        let m = build_quadrature(&spec, crate::measure::DEFAULT_NODES).unwrap();
        let t = stieltjes_recurrence(&m, 12).unwrap();
        (m, t)
    }

    #[test]
    fn product_examples() {
        let (_, t) = setup(WeightSpec::legendre());
        let r = product_average(&t, &[c(3.0)], 2).unwrap();
        assert!((r.value - c(9.0 - 1.0 / 3.0)).norm() < 1e-13);
        let (l, m) = (c(2.0), C64::new(0.5, 1.5));
        let r = product_average(&t, &[l, m], 1).unwrap();
        assert!(rel(r.value, l * m + 1.0 / 3.0) < 1e-13);
        let (_, g) = setup(WeightSpec::gaussian(6.0));
        let r = product_average(&g, &[l, m], 1).unwrap();
        assert!(rel(r.value, l * m + 0.5) < 1e-12);
        assert!(matches!(product_average(&t, &[l, l], 1), Err(Error::DegenerateShift(_))));
    }

    #[test]
    fn inverse_and_ratio_closed_forms() {
        let (q, t) = setup(WeightSpec::legendre());
        let ln3 = 3f64.ln();
        let rows = CauchyRows::build(&q, &t, &[c(2.0)], 12).unwrap();
        let r = inverse_average(&t, &rows, 1).unwrap();
        assert!((r.value - c(ln3 / 2.0)).norm() < 1e-14);
        let r = ratio_average(&t, &rows, &[c(3.0)], 1).unwrap();
        assert!((r.value - c((2.0 + ln3) / 2.0)).norm() < 1e-13);
        let r = mixed_average(&t, &rows, &[c(3.0)], 1).unwrap();
        assert!((r.value - c(3.0 - (2.0 - 2.0 / ln3))).norm() < 1e-13);
        let far = C64::new(0.0, 1e7);
        let rows = CauchyRows::build(&q, &t, &[far], 2).unwrap();
        let r = inverse_average(&t, &rows, 1).unwrap();
        assert!((r.value * far - c(1.0)).norm() < 1e-6);
    }

    #[test]
    fn reductions() {
        let (q, t) = setup(WeightSpec::legendre());
        let mu = [c(3.0), C64::new(1.0, 2.0)];
        let empty = CauchyRows::build(&q, &t, &[], 12).unwrap();
        let a = ratio_average(&t, &empty, &mu, 2).unwrap().value;
        let b = product_average(&t, &mu, 2).unwrap().value;
        assert_eq!(a, b);
        assert_eq!(mixed_average(&t, &empty, &mu, 2).unwrap().value, b);
        let rows = CauchyRows::build(&q, &t, &[c(2.0), c(-2.5)], 12).unwrap();
        let a = ratio_average(&t, &rows, &[], 3).unwrap().value;
        let b = inverse_average(&t, &rows, 3).unwrap().value;
        assert!(rel(a, b) < 1e-14);
        assert!(matches!(inverse_average(&t, &rows, 1), Err(Error::UnsupportedRegime(_))));
    }

    #[test]
    fn ratio_factorizes_through_mixed_and_inverse() {
        for spec in [WeightSpec::legendre(), WeightSpec::gaussian(6.0)] {
            let (q, t) = setup(spec);
            let rows = CauchyRows::build(&q, &t, &[c(7.0), C64::new(0.5, 1.0)], 12).unwrap();
            let mu = [c(3.0), C64::new(-1.0, 0.4), c(9.0)];
            for n in 2..=4 {
                let r = ratio_average(&t, &rows, &mu, n).unwrap().value;
                let mx = mixed_average(&t, &rows, &mu, n).unwrap().value;
                let inv = inverse_average(&t, &rows, n).unwrap().value;
                assert!(rel(mx * inv, r) < 1e-10);
            }
        }
    }

    #[test]
    fn kernel_w_i_forms() {
        let (_, t) = setup(WeightSpec::legendre());
        let (x, y) = (C64::new(0.3, 0.2), c(-1.7));
        let k = kernel_w_i(&t, x, y, 2).unwrap();
        assert!(rel(k.value, x * y + 1.0 / 3.0) < 1e-13);
        assert_eq!(k.kind, KernelKind::WI);
        for deg in 1..=8 {
            let a = kernel_w_i(&t, x, y, deg).unwrap().value;
            let b = kernel_w_i(&t, y, x, deg).unwrap().value;
            assert!(rel(a, b) < 1e-13);
            let p = t.orthonormal_values(deg, x).unwrap();
            let q = t.orthonormal_values(deg, y).unwrap();
            let sum: C64 = (0..deg).map(|i| p[i] * q[i]).sum();
            assert!(rel(a / t.c_sq()[deg - 1], sum) < 1e-10);
            // diagonal limit is continuous
            let on = kernel_w_i(&t, x, x, deg).unwrap().value;
            let near = kernel_w_i(&t, x, x + 1e-6, deg).unwrap().value;
            assert!(rel(on, near) < 1e-5);
        }
    }

    #[test]
    fn two_point_product_matches_products() {
        let (_, t) = setup(WeightSpec::legendre());
        let lam = [c(2.0), C64::new(0.1, 0.9)];
        let mu = [c(-3.0), c(5.0)];
        let r = two_point_product(&t, &lam[..1], &mu[..1], 1).unwrap();
        assert!(rel(r.value, lam[0] * mu[0] + 1.0 / 3.0) < 1e-13);
        let all = [lam[0], lam[1], mu[0], mu[1]];
        let a = two_point_product(&t, &lam, &mu, 2).unwrap().value;
        let b = product_average(&t, &all, 2).unwrap().value;
        assert!(rel(a, b) < 1e-10);
    }

    #[test]
    fn kernel_w_ii_matches_direct() {
        let (q, t) = setup(WeightSpec::legendre());
        let rows = CauchyRows::build(&q, &t, &[c(2.0)], 12).unwrap();
        let k = kernel_w_ii(&t, rows.row(0), c(2.0), c(3.0), 2).unwrap();
        let h = rows.row(0);
        let want = (h[2] * c(3.0) - h[1] * c(9.0 - 1.0 / 3.0)) / c(-1.0);
        assert!(rel(k.value, want) < 1e-12);
        let r = two_point_ratio(&t, &rows, &[c(3.0)], 1).unwrap();
        assert!((r.value - c((2.0 + 3f64.ln()) / 2.0)).norm() < 1e-13);
    }

    #[test]
    fn two_point_ratio_matches_ratio() {
        for spec in [WeightSpec::legendre(), WeightSpec::gaussian(6.0)] {
            let (q, t) = setup(spec);
            let rows = CauchyRows::build(&q, &t, &[c(7.0), C64::new(0.5, 1.0)], 12).unwrap();
            let mu = [c(3.0), C64::new(-1.0, 0.4)];
            for n in 2..=4 {
                let a = two_point_ratio(&t, &rows, &mu, n).unwrap().value;
                let b = ratio_average(&t, &rows, &mu, n).unwrap().value;
                assert!(rel(a, b) < 1e-9, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn ratio_via_products_matches_ratio() {
        let (q, t) = setup(WeightSpec::legendre());
        let rows = CauchyRows::build(&q, &t, &[c(2.0)], 12).unwrap();
        for n in 1..=2 {
            let a = ratio_via_products(&q, &t, &[c(3.0)], &[c(2.0)], n).unwrap().value;
            let b = ratio_average(&t, &rows, &[c(3.0)], n).unwrap().value;
            assert!(rel(a, b) < 1e-9);
        }
        let a = ratio_via_products(&q, &t, &[c(3.0)], &[], 2).unwrap().value;
        assert_eq!(a, product_average(&t, &[c(3.0)], 2).unwrap().value);
        let e = [c(2.0), c(3.0), c(4.0)];
        assert!(matches!(ratio_via_products(&q, &t, &[], &e, 3), Err(Error::ComplexityLimit(_))));
    }

    #[test]
    fn permutation_invariance_and_realness() {
        let (q, t) = setup(WeightSpec::legendre());
        let eps = [c(2.0), c(-3.0)];
        let mu = [c(2.5), c(4.0), c(-1.5)];
        let rows = CauchyRows::build(&q, &t, &eps, 12).unwrap();
        let swapped = rows.select(&[1, 0]);
        let mu_p = [mu[2], mu[0], mu[1]];
        for n in 2..=4 {
            let a = ratio_average(&t, &rows, &mu, n).unwrap().value;
            let b = ratio_average(&t, &swapped, &mu_p, n).unwrap().value;
            assert!(rel(a, b) < 1e-12);
            assert!(a.im.abs() <= 1e-10 * a.norm());
            let a = mixed_average(&t, &rows, &mu, n).unwrap().value;
            let b = mixed_average(&t, &swapped, &mu_p, n).unwrap().value;
            assert!(rel(a, b) < 1e-12);
        }
    }

    #[test]
    fn large_root_asymptotics() {
        let (_, t) = setup(WeightSpec::legendre());
        let big = c(1e8);
        for n in 1..=3 {
            let a = product_average(&t, &[c(2.0), C64::new(0.3, 1.0), big], n).unwrap().value;
            let b = product_average(&t, &[c(2.0), C64::new(0.3, 1.0)], n).unwrap().value;
            assert!(rel(a, b * big.powi(n as i32)) < 1e-5);
        }
    }

    #[test]
    fn formula_names_round_trip() {
        for f in FormulaId::ALL {
            assert_eq!(FormulaId::parse(f.name()), Some(f));
        }
        assert_eq!(FormulaId::parse("Two-Point-Ratio"), Some(FormulaId::TwoPointRatio));
        assert_eq!(FormulaId::parse("nope"), None);
    }
}
