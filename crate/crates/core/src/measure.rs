//! Weight measures as quadrature rules, their three-term recurrences, and
//! evaluation of monic / orthonormal polynomials.
//!
//! Every integral in the crate is a weighted sum over a [`QuadratureMeasure`].
//! Stock weights get a Gauss rule built from their recurrence coefficients:
//! closed form for Jacobi-type weights (Legendre included), and a
//! discretized Stieltjes pass over a fine Gauss–Legendre base rule for the
//! truncated Gaussian. Tabulated weights use composite Gauss panels.

use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::C64;

/// Default truncation radius of the Gaussian weight.
pub const DEFAULT_GAUSSIAN_Q: f64 = 6.0;

/// Default number of quadrature nodes.
pub const DEFAULT_NODES: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightFamily {
    /// e^{-x²} restricted to the support.
    GaussianTruncated,
    /// Uniform weight.
    Legendre,
    /// (hi − x)^α (x − lo)^β with params (α, β), both > −1.
    JacobiLike,
    /// Piecewise-linear weight through `params` on a uniform grid spanning the support.
    Tabulated,
}

impl WeightFamily {
    pub fn name(self) -> &'static str {
        match self {
            WeightFamily::GaussianTruncated => "gaussian-truncated",
            WeightFamily::Legendre => "legendre",
            WeightFamily::JacobiLike => "jacobi-like",
            WeightFamily::Tabulated => "tabulated",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian-truncated" | "gaussian" | "gauss" => Some(WeightFamily::GaussianTruncated),
            "legendre" | "uniform" => Some(WeightFamily::Legendre),
            "jacobi-like" | "jacobi" => Some(WeightFamily::JacobiLike),
            "tabulated" | "table" => Some(WeightFamily::Tabulated),
            _ => None,
        }
    }
}

impl fmt::Display for WeightFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Description of a weight dα on a closed interval.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec {
    pub family: WeightFamily,
    pub params: Vec<f64>,
    pub support: (f64, f64),
}

impl WeightSpec {
    pub fn legendre() -> Self {
        WeightSpec { family: WeightFamily::Legendre, params: vec![], support: (-1.0, 1.0) }
    }

    pub fn gaussian(q: f64) -> Self {
        WeightSpec { family: WeightFamily::GaussianTruncated, params: vec![q], support: (-q, q) }
    }

    pub fn jacobi(alpha: f64, beta: f64, lo: f64, hi: f64) -> Self {
        WeightSpec { family: WeightFamily::JacobiLike, params: vec![alpha, beta], support: (lo, hi) }
    }

    pub fn tabulated(values: Vec<f64>, lo: f64, hi: f64) -> Self {
        WeightSpec { family: WeightFamily::Tabulated, params: values, support: (lo, hi) }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.support;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidWeight(format!("support [{lo}, {hi}] is not a proper interval")));
        }
        if let Some(p) = self.params.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidWeight(format!("non-finite parameter {p}")));
        }
        match self.family {
            WeightFamily::Legendre => {}
            WeightFamily::GaussianTruncated => {
                if self.params.len() > 1 {
                    return Err(Error::InvalidWeight("gaussian-truncated takes at most one parameter (Q)".into()));
                }
                if let Some(&q) = self.params.first() {
                    if q <= 0.0 {
                        return Err(Error::InvalidWeight(format!("truncation Q = {q} must be positive")));
                    }
                }
            }
            WeightFamily::JacobiLike => {
                if self.params.len() != 2 {
                    return Err(Error::InvalidWeight("jacobi-like needs two exponents (alpha, beta)".into()));
                }
                if self.params.iter().any(|&e| e <= -1.0) {
                    return Err(Error::InvalidWeight("jacobi-like exponents must exceed -1".into()));
                }
            }
            WeightFamily::Tabulated => {
                let v = &self.params;
                if v.len() < 2 {
                    return Err(Error::InvalidWeight("tabulated weight needs at least two values".into()));
                }
                if v.iter().any(|&w| w < 0.0) || v[1..v.len() - 1].iter().any(|&w| w <= 0.0) {
                    return Err(Error::InvalidWeight("tabulated weight must be positive inside the support".into()));
                }
                if v.len() == 2 && v[0] == 0.0 && v[1] == 0.0 {
                    return Err(Error::InvalidWeight("tabulated weight vanishes identically".into()));
                }
            }
        }
        Ok(())
    }

    /// Largest |x| over the support.
    pub fn radius(&self) -> f64 {
        self.support.0.abs().max(self.support.1.abs())
    }

    /// Pointwise value of the weight density.
    pub fn density(&self, x: f64) -> f64 {
        let (lo, hi) = self.support;
        if x < lo || x > hi {
            return 0.0;
        }
        match self.family {
            WeightFamily::Legendre => 1.0,
            WeightFamily::GaussianTruncated => (-x * x).exp(),
            WeightFamily::JacobiLike => (hi - x).powf(self.params[0]) * (x - lo).powf(self.params[1]),
            WeightFamily::Tabulated => {
                let v = &self.params;
                let cells = (v.len() - 1) as f64;
                let s = (x - lo) / (hi - lo) * cells;
                let i = (s.floor() as usize).min(v.len() - 2);
                let frac = s - i as f64;
                v[i] * (1.0 - frac) + v[i + 1] * frac
            }
        }
    }
}

/// A positive discrete measure Σ wᵢ δ(t − tᵢ) standing in for dα.
#[derive(Debug, Clone)]
pub struct QuadratureMeasure {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    support: (f64, f64),
    exact_degree: usize,
    spec: Option<WeightSpec>,
    refined: OnceLock<std::result::Result<Box<QuadratureMeasure>, Error>>,
}

/// A moment with a flag telling whether the rule integrates it exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moment {
    pub value: f64,
    pub within_bound: bool,
    pub bound: usize,
}

impl Moment {
    /// Turns an out-of-bound moment into `DegreeBoundExceeded`.
    pub fn checked(self, k: usize) -> Result<f64> {
        if self.within_bound {
            Ok(self.value)
        } else {
            Err(Error::DegreeBoundExceeded { requested: k, bound: self.bound })
        }
    }
}

impl QuadratureMeasure {
    /// Builds a measure from explicit nodes and weights.
    pub fn from_parts(nodes: Vec<f64>, weights: Vec<f64>, support: (f64, f64), exact_degree: usize) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(Error::InvalidWeight("nodes and weights must be non-empty and of equal length".into()));
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidWeight(format!("weight {w} at node {} is not positive", nodes[i])));
        }
        if nodes.windows(2).any(|p| !(p[0] < p[1])) {
            return Err(Error::InvalidWeight("nodes are not strictly increasing".into()));
        }
        if nodes[0] < support.0 || nodes[nodes.len() - 1] > support.1 {
            return Err(Error::InvalidWeight("nodes fall outside the support".into()));
        }
        Ok(QuadratureMeasure { nodes, weights, support, exact_degree, spec: None, refined: OnceLock::new() })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Highest polynomial degree the rule integrates exactly.
    pub fn exact_degree(&self) -> usize {
        self.exact_degree
    }

    pub fn spec(&self) -> Option<&WeightSpec> {
        self.spec.as_ref()
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }

    pub fn integrate_complex<F: Fn(f64) -> C64>(&self, f: F) -> C64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| f(t) * w).sum()
    }

    /// Σᵢ wᵢ tᵢᵏ, flagged when k is beyond the exactness bound.
    pub fn moment(&self, k: usize) -> Moment {
        let value = self.integrate(|t| t.powi(k as i32));
        Moment { value, within_bound: k <= self.exact_degree, bound: self.exact_degree }
    }

    /// The same weight discretized with twice as many nodes, when the
    /// measure was built from a [`WeightSpec`]. Built once and cached.
    pub fn refined(&self) -> Option<Result<&QuadratureMeasure>> {
        let spec = self.spec.as_ref()?;
        let cell = self
            .refined
            .get_or_init(|| build_quadrature(spec, 2 * self.node_count()).map(Box::new));
        Some(cell.as_ref().map(|b| b.as_ref()).map_err(Clone::clone))
    }

    /// Multiplies every weight by `factor(t)`. A factor of constant negative
    /// sign is flipped (monic orthogonal polynomials do not see the sign);
    /// a factor changing sign on the nodes is rejected.
    pub fn with_weight_factor<F: Fn(f64) -> f64>(&self, factor: F, degree_loss: usize) -> Result<QuadratureMeasure> {
        let raw: Vec<f64> = self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * factor(t)).collect();
        let sign = if raw.iter().all(|&w| w > 0.0) {
            1.0
        } else if raw.iter().all(|&w| w < 0.0) {
            -1.0
        } else {
            return Err(Error::InvalidWeight("transformed weight changes sign on the support".into()));
        };
        let weights = raw.into_iter().map(|w| sign * w).collect();
        QuadratureMeasure::from_parts(
            self.nodes.clone(),
            weights,
            self.support,
            self.exact_degree.saturating_sub(degree_loss),
        )
    }

    /// Tilted measure e^{s·t} dα(t).
    pub fn tilted(&self, s: f64) -> Result<QuadratureMeasure> {
        self.with_weight_factor(|t| (s * t).exp(), 0)
    }
}

/// Three-term recurrence of a measure, indexed by polynomial degree.
///
/// `diag[k] = ∫ t p_k² dα` is the (k+1)-th diagonal entry of the Jacobi
/// matrix, `offdiag[k] = c_k / c_{k−1}` couples degrees k−1 and k
/// (`offdiag[0] = 0`), and `c_sq[k] = ∫ π_k² dα`. The monic polynomials obey
/// π_{k+1}(x) = (x − diag[k]) π_k(x) − offdiag[k]² π_{k−1}(x).
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceTable {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
    c_sq: Vec<f64>,
}

impl RecurrenceTable {
    pub fn from_parts(diag: Vec<f64>, offdiag: Vec<f64>, c_sq: Vec<f64>) -> Result<Self> {
        let n = c_sq.len();
        if n == 0 || diag.len() != n || offdiag.len() != n {
            return Err(Error::InvalidWeight("recurrence arrays must share a non-zero length".into()));
        }
        if c_sq.iter().any(|&c| !(c > 0.0)) || offdiag[1..].iter().any(|&b| !(b > 0.0)) {
            return Err(Error::PrecisionLoss("non-positive norming constant in recurrence".into()));
        }
        Ok(RecurrenceTable { diag, offdiag, c_sq })
    }

    /// Highest degree whose polynomial (and norm) the table supports.
    pub fn n_max(&self) -> usize {
        self.c_sq.len() - 1
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn c_sq(&self) -> &[f64] {
        &self.c_sq
    }

    /// Jacobi diagonal entry a_j in one-based numbering (a_1 belongs to degree 0).
    pub fn a(&self, j: usize) -> f64 {
        self.diag[j - 1]
    }

    /// Jacobi off-diagonal entry b_j in one-based numbering; b_0 = 0.
    pub fn b(&self, j: usize) -> f64 {
        self.offdiag[j]
    }

    fn check_degree(&self, n: usize) -> Result<()> {
        if n > self.n_max() {
            Err(Error::DegreeOutOfRange { requested: n, max: self.n_max() })
        } else {
            Ok(())
        }
    }

    /// π_0(x), …, π_n(x).
    pub fn monic_values(&self, n: usize, x: C64) -> Result<Vec<C64>> {
        self.check_degree(n)?;
        let mut out = Vec::with_capacity(n + 1);
        out.push(C64::new(1.0, 0.0));
        if n >= 1 {
            out.push(x - self.diag[0]);
        }
        for k in 1..n {
            let next = (x - self.diag[k]) * out[k] - out[k - 1] * (self.offdiag[k] * self.offdiag[k]);
            out.push(next);
        }
        Ok(out)
    }

    pub fn monic_values_real(&self, n: usize, x: f64) -> Result<Vec<f64>> {
        self.check_degree(n)?;
        let mut out = Vec::with_capacity(n + 1);
        out.push(1.0);
        if n >= 1 {
            out.push(x - self.diag[0]);
        }
        for k in 1..n {
            let next = (x - self.diag[k]) * out[k] - self.offdiag[k] * self.offdiag[k] * out[k - 1];
            out.push(next);
        }
        Ok(out)
    }

    /// Orthonormal p_k = π_k / c_k for k = 0..=n.
    pub fn orthonormal_values(&self, n: usize, x: C64) -> Result<Vec<C64>> {
        let mut v = self.monic_values(n, x)?;
        for (p, c2) in v.iter_mut().zip(&self.c_sq) {
            *p /= c2.sqrt();
        }
        Ok(v)
    }

    /// Truncates the table to degrees 0..=n.
    pub fn truncated(&self, n: usize) -> Result<RecurrenceTable> {
        self.check_degree(n)?;
        Ok(RecurrenceTable {
            diag: self.diag[..=n].to_vec(),
            offdiag: self.offdiag[..=n].to_vec(),
            c_sq: self.c_sq[..=n].to_vec(),
        })
    }
}

/// π_n(x) from the recurrence.
pub fn eval_monic(table: &RecurrenceTable, n: usize, x: C64) -> Result<C64> {
    Ok(table.monic_values(n, x)?[n])
}

/// Discretized Stieltjes procedure: inner products are the quadrature sums
/// of the measure, polynomials are carried as orthonormal node vectors.
pub fn stieltjes_recurrence(measure: &QuadratureMeasure, n_max: usize) -> Result<RecurrenceTable> {
    let needed = 2 * n_max + 1;
    if needed > measure.exact_degree() {
        return Err(Error::DegreeBoundExceeded { requested: needed, bound: measure.exact_degree() });
    }
    discrete_stieltjes(measure.nodes(), measure.weights(), n_max)
}

fn discrete_stieltjes(nodes: &[f64], weights: &[f64], n_max: usize) -> Result<RecurrenceTable> {
    let m = nodes.len();
    if n_max >= m {
        return Err(Error::PrecisionLoss(format!(
            "a {m}-point discrete measure has no orthogonal polynomial of degree {n_max}"
        )));
    }
    let mass: f64 = weights.iter().sum();
    if !(mass > 0.0) {
        return Err(Error::PrecisionLoss("measure has no positive mass".into()));
    }
    let dot = |u: &[f64], v: &[f64]| -> f64 { u.iter().zip(v).zip(weights).map(|((a, b), w)| w * a * b).sum() };

    let mut diag = Vec::with_capacity(n_max + 1);
    let mut offdiag = Vec::with_capacity(n_max + 1);
    let mut c_sq = Vec::with_capacity(n_max + 1);
    offdiag.push(0.0);
    c_sq.push(mass);

    let mut prev = vec![0.0; m];
    let mut cur = vec![1.0 / mass.sqrt(); m];
    for k in 0..=n_max {
        let a_k: f64 = nodes.iter().zip(&cur).zip(weights).map(|((t, p), w)| w * t * p * p).sum();
        diag.push(a_k);
        if k == n_max {
            break;
        }
        let b_k = offdiag[k];
        let mut next: Vec<f64> = (0..m).map(|i| (nodes[i] - a_k) * cur[i] - b_k * prev[i]).collect();
        // one re-orthogonalization sweep against the two previous vectors
        for basis in [&cur, &prev] {
            let s = dot(&next, basis);
            for (x, y) in next.iter_mut().zip(basis.iter()) {
                *x -= s * y;
            }
        }
        let norm_sq = dot(&next, &next);
        if !(norm_sq.is_finite() && norm_sq > f64::EPSILON * f64::EPSILON * (1.0 + a_k * a_k)) {
            return Err(Error::PrecisionLoss(format!("b_{}² = {norm_sq:e} lost positivity", k + 1)));
        }
        let b = norm_sq.sqrt();
        offdiag.push(b);
        c_sq.push(c_sq[k] * norm_sq);
        for x in next.iter_mut() {
            *x /= b;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    RecurrenceTable::from_parts(diag, offdiag, c_sq)
}

/// Builds the quadrature rule for `spec` with `node_count` nodes.
pub fn build_quadrature(spec: &WeightSpec, node_count: usize) -> Result<QuadratureMeasure> {
    spec.validate()?;
    if node_count < 2 {
        return Err(Error::InvalidWeight(format!("node_count = {node_count}, need at least 2")));
    }
    let (lo, hi) = spec.support;
    let mut measure = match spec.family {
        WeightFamily::Legendre => {
            let (diag, off, mass) = jacobi_coefficients(0.0, 0.0, lo, hi, node_count);
            let (x, w) = gauss_rule(&diag, &off, mass)?;
            QuadratureMeasure::from_parts(x, w, spec.support, 2 * node_count - 1)?
        }
        WeightFamily::JacobiLike => {
            let (diag, off, mass) = jacobi_coefficients(spec.params[0], spec.params[1], lo, hi, node_count);
            let (x, w) = gauss_rule(&diag, &off, mass)?;
            QuadratureMeasure::from_parts(x, w, spec.support, 2 * node_count - 1)?
        }
        WeightFamily::GaussianTruncated => {
            let base_n = 2 * node_count + 100;
            let (diag, off, mass) = jacobi_coefficients(0.0, 0.0, lo, hi, base_n);
            let (bx, bw) = gauss_rule(&diag, &off, mass)?;
            let bw: Vec<f64> = bx.iter().zip(&bw).map(|(&x, &w)| w * (-x * x).exp()).collect();
            let table = discrete_stieltjes(&bx, &bw, node_count - 1)?;
            let off: Vec<f64> = table.offdiag()[1..].to_vec();
            let (x, w) = gauss_rule(table.diag(), &off, table.c_sq()[0])?;
            QuadratureMeasure::from_parts(x, w, spec.support, 2 * node_count - 1)?
        }
        WeightFamily::Tabulated => composite_panels(spec, node_count)?,
    };
    measure.spec = Some(spec.clone());
    Ok(measure)
}

fn composite_panels(spec: &WeightSpec, node_count: usize) -> Result<QuadratureMeasure> {
    let (lo, hi) = spec.support;
    let panels = spec.params.len() - 1;
    let per_panel = node_count.div_ceil(panels).max(1);
    let (diag, off, mass) = jacobi_coefficients(0.0, 0.0, -1.0, 1.0, per_panel);
    let (ux, uw) = if per_panel == 1 { (vec![0.0], vec![2.0]) } else { gauss_rule(&diag, &off, mass)? };
    let width = (hi - lo) / panels as f64;
    let mut nodes = Vec::with_capacity(per_panel * panels);
    let mut weights = Vec::with_capacity(per_panel * panels);
    for p in 0..panels {
        let a = lo + width * p as f64;
        for (&u, &w) in ux.iter().zip(&uw) {
            let x = a + 0.5 * width * (u + 1.0);
            let dens = spec.density(x);
            if !(dens > 0.0) {
                return Err(Error::InvalidWeight(format!("weight {dens} at node {x}")));
            }
            nodes.push(x);
            weights.push(0.5 * width * w * dens);
        }
    }
    // weight is linear on each panel: exact for polynomial degree 2p − 2
    QuadratureMeasure::from_parts(nodes, weights, spec.support, (2 * per_panel).saturating_sub(2))
}

/// Recurrence of (hi − x)^α (x − lo)^β on [lo, hi] for degrees 0..n−1:
/// returns (diag, offdiag b_1..b_{n−1}, mass).
fn jacobi_coefficients(alpha: f64, beta: f64, lo: f64, hi: f64, n: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let h = 0.5 * (hi - lo);
    let c = 0.5 * (hi + lo);
    let ab = alpha + beta;
    let mut diag = Vec::with_capacity(n);
    for k in 0..n {
        let u = if k == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            let s = 2.0 * k as f64 + ab;
            (beta * beta - alpha * alpha) / (s * (s + 2.0))
        };
        diag.push(c + h * u);
    }
    let mut off = Vec::with_capacity(n.saturating_sub(1));
    for k in 1..n {
        let kf = k as f64;
        let b_sq = if k == 1 {
            4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
        } else {
            let s = 2.0 * kf + ab;
            4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))
        };
        off.push(h * b_sq.sqrt());
    }
    let mass_u = if alpha == 0.0 && beta == 0.0 {
        2.0
    } else {
        (ab + 1.0).exp2() * libm::tgamma(alpha + 1.0) * libm::tgamma(beta + 1.0) / libm::tgamma(ab + 2.0)
    };
    (diag, off, mass_u * h.powf(ab + 1.0))
}

/// Gauss rule from a recurrence: nodes are eigenvalues of the Jacobi matrix
/// (implicit QL, Newton-polished), weights are Christoffel numbers
/// 1 / Σ_{k<n} p_k(x)².
fn gauss_rule(diag: &[f64], off: &[f64], mass: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    let mut x = diag.to_vec();
    tridiagonal_eigenvalues(&mut x, &off[..n - 1])?;
    x.sort_by(|a, b| a.total_cmp(b));

    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for i in 0..n {
        let gap = match (i.checked_sub(1).map(|j| x[i] - x[j]), x.get(i + 1).map(|v| v - x[i])) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => scale,
        };
        let mut xi = x[i];
        for _ in 0..3 {
            let (p, dp) = monic_with_derivative(diag, off, xi);
            if dp == 0.0 {
                break;
            }
            let step = p / dp;
            if !step.is_finite() || step.abs() > 0.1 * gap {
                break;
            }
            xi -= step;
            if step.abs() <= 4.0 * f64::EPSILON * scale {
                break;
            }
        }
        x[i] = xi;
    }

    let w = x
        .iter()
        .map(|&xi| {
            let mut p_prev = 0.0;
            let mut p = 1.0 / mass.sqrt();
            let mut sum = p * p;
            for k in 0..n - 1 {
                let b_prev = if k == 0 { 0.0 } else { off[k - 1] };
                let next = ((xi - diag[k]) * p - b_prev * p_prev) / off[k];
                p_prev = p;
                p = next;
                sum += p * p;
            }
            1.0 / sum
        })
        .collect();
    Ok((x, w))
}

fn monic_with_derivative(diag: &[f64], off: &[f64], x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (0.0, 1.0);
    let (mut d0, mut d1) = (0.0, 0.0);
    for k in 0..diag.len() {
        let b2 = if k == 0 { 0.0 } else { off[k - 1] * off[k - 1] };
        let p2 = (x - diag[k]) * p1 - b2 * p0;
        let d2 = p1 + (x - diag[k]) * d1 - b2 * d0;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// sub-diagonal `e` (len n−1), overwritten into `d`. Implicit QL with
/// Wilkinson shifts.
fn tridiagonal_eigenvalues(d: &mut [f64], e_in: &[f64]) -> Result<()> {
    let n = d.len();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(e_in);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::PrecisionLoss("tridiagonal eigenvalue iteration did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT_PI: f64 = 1.772_453_850_905_516;

    /// Gram–Schmidt on raw monomials using exact moments of the uniform
    /// weight on [−1, 1]; independent of the recurrence code.
    fn legendre_moment(k: usize) -> f64 {
        if k % 2 == 1 {
            0.0
        } else {
            2.0 / (k as f64 + 1.0)
        }
    }

    fn gram_schmidt_norms(moment: impl Fn(usize) -> f64, n: usize) -> Vec<(Vec<f64>, f64)> {
        // monic polynomials as coefficient vectors, low degree first
        let ip = |p: &[f64], q: &[f64]| -> f64 {
            let mut s = 0.0;
            for (i, a) in p.iter().enumerate() {
                for (j, b) in q.iter().enumerate() {
                    s += a * b * moment(i + j);
                }
            }
            s
        };
        let mut out: Vec<(Vec<f64>, f64)> = Vec::new();
        for k in 0..=n {
            let mut p = vec![0.0; k + 1];
            p[k] = 1.0;
            for (q, nq) in &out {
                let coef = ip(&p, q) / nq;
                for (i, c) in q.iter().enumerate() {
                    p[i] -= coef * c;
                }
            }
            let norm = ip(&p, &p);
            out.push((p, norm));
        }
        out
    }

    #[test]
    fn legendre_mass_and_second_moment() {
        let m = build_quadrature(&WeightSpec::legendre(), 8).unwrap();
        assert!((m.mass() - 2.0).abs() < 1e-14);
        assert!((m.moment(2).value - 2.0 / 3.0).abs() < 1e-14);
        assert!(m.moment(1).value.abs() < 1e-15);
        assert_eq!(m.exact_degree(), 15);
    }

    #[test]
    fn gaussian_mass_matches_reference_rule() {
        let m = build_quadrature(&WeightSpec::gaussian(6.0), 64).unwrap();
        let reference = build_quadrature(&WeightSpec::gaussian(6.0), 160).unwrap();
        assert!((m.mass() - reference.mass()).abs() < 1e-12 * SQRT_PI);
        // truncation beyond |x| = 6 is below 1e-15
        assert!((m.mass() - SQRT_PI).abs() < 1e-12 * SQRT_PI);
        assert!((m.moment(2).value - SQRT_PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn moment_beyond_bound_is_flagged() {
        let m = build_quadrature(&WeightSpec::legendre(), 4).unwrap();
        let mo = m.moment(9);
        assert!(!mo.within_bound);
        assert!(matches!(mo.checked(9), Err(Error::DegreeBoundExceeded { .. })));
        assert!(m.moment(7).checked(7).is_ok());
    }

    #[test]
    fn legendre_recurrence_matches_gram_schmidt() {
        let m = build_quadrature(&WeightSpec::legendre(), 16).unwrap();
        let t = stieltjes_recurrence(&m, 3).unwrap();
        let gs = gram_schmidt_norms(legendre_moment, 3);
        for k in 0..=3 {
            assert!(t.diag()[k].abs() < 1e-14);
            assert!((t.c_sq()[k] - gs[k].1).abs() < 1e-13, "c_{k}²");
        }
        assert!((t.c_sq()[2] - 8.0 / 45.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_recurrence_matches_gram_schmidt() {
        let m = build_quadrature(&WeightSpec::gaussian(6.0), 64).unwrap();
        let t = stieltjes_recurrence(&m, 3).unwrap();
        // moments of e^{-x²} on [−Q, Q] by integration by parts:
        // M_k = (k−1)/2 · M_{k−2} − Q^{k−1} e^{−Q²} for even k
        let q: f64 = 6.0;
        let mut tm = vec![SQRT_PI * (1.0 - libm::erfc(q))];
        for k in 1..8usize {
            tm.push(if k % 2 == 1 { 0.0 } else { 0.5 * (k as f64 - 1.0) * tm[k - 2] - q.powi(k as i32 - 1) * (-q * q).exp() });
        }
        let gs = gram_schmidt_norms(|k| tm[k], 3);
        for k in 0..=3 {
            assert!((t.c_sq()[k] - gs[k].1).abs() < 1e-13 * gs[k].1, "c_{k}² {} {}", t.c_sq()[k], gs[k].1);
        }
        // the untruncated values differ only through the e^{−36} tail
        assert!((t.c_sq()[1] - SQRT_PI / 2.0).abs() < 1e-13);
        assert!((t.c_sq()[3] - 3.0 * SQRT_PI / 4.0).abs() < 1e-11);
    }

    #[test]
    fn monic_values() {
        let leg = stieltjes_recurrence(&build_quadrature(&WeightSpec::legendre(), 16).unwrap(), 4).unwrap();
        let one = C64::new(1.0, 0.0);
        assert_eq!(eval_monic(&leg, 0, C64::new(0.3, 2.0)).unwrap(), one);
        assert!((eval_monic(&leg, 2, one).unwrap() - 2.0 / 3.0).norm() < 1e-14);
        let gau = stieltjes_recurrence(&build_quadrature(&WeightSpec::gaussian(6.0), 32).unwrap(), 4).unwrap();
        assert!((eval_monic(&gau, 2, one).unwrap() - 0.5).norm() < 1e-13);
        assert!(matches!(eval_monic(&leg, 5, one), Err(Error::DegreeOutOfRange { .. })));
    }

    #[test]
    fn monic_leading_coefficient() {
        let t = stieltjes_recurrence(&build_quadrature(&WeightSpec::legendre(), 64).unwrap(), 12).unwrap();
        let x = 1e6;
        for n in 0..=12 {
            let v = eval_monic(&t, n, C64::new(x, 0.0)).unwrap().re;
            assert!((v / x.powi(n as i32) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn orthogonality_and_norms_at_128_nodes() {
        for spec in [WeightSpec::legendre(), WeightSpec::gaussian(6.0)] {
            let m = build_quadrature(&spec, 128).unwrap();
            let t = stieltjes_recurrence(&m, 12).unwrap();
            let vals: Vec<Vec<f64>> = m.nodes().iter().map(|&x| t.monic_values_real(12, x).unwrap()).collect();
            for j in 0..=12 {
                for k in 0..=12 {
                    let s: f64 = vals.iter().zip(m.weights()).map(|(v, w)| w * v[j] * v[k]).sum();
                    let cjck = (t.c_sq()[j] * t.c_sq()[k]).sqrt();
                    if j == k {
                        assert!((s - t.c_sq()[j]).abs() < 1e-10 * t.c_sq()[j]);
                    } else {
                        assert!(s.abs() < 1e-12 * cjck, "({j},{k}) {s}");
                    }
                }
            }
        }
    }

    #[test]
    fn jacobi_like_mass() {
        // ∫_0^1 (1−x) x² dx = 1/12
        let m = build_quadrature(&WeightSpec::jacobi(1.0, 2.0, 0.0, 1.0), 10).unwrap();
        assert!((m.mass() - 1.0 / 12.0).abs() < 1e-15);
        // ∫_0^1 x·(1−x)x² dx = 1/20
        assert!((m.moment(1).value - 1.0 / 20.0).abs() < 1e-15);
    }

    #[test]
    fn tabulated_composite_rule() {
        // piecewise linear hat on [0, 2]: values 0, 1, 0
        let spec = WeightSpec::tabulated(vec![0.0, 1.0, 0.0], 0.0, 2.0);
        let m = build_quadrature(&spec, 8).unwrap();
        assert_eq!(m.node_count(), 8);
        assert_eq!(m.exact_degree(), 6);
        assert!((m.mass() - 1.0).abs() < 1e-14);
        assert!((m.moment(1).value - 1.0).abs() < 1e-14);
        // ∫ x² hat = 7/6
        assert!((m.moment(2).value - 7.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn invalid_weights_rejected() {
        assert!(matches!(
            build_quadrature(&WeightSpec::tabulated(vec![1.0, -1.0, 1.0], 0.0, 1.0), 8),
            Err(Error::InvalidWeight(_))
        ));
        assert!(matches!(
            build_quadrature(&WeightSpec::jacobi(-1.5, 0.0, 0.0, 1.0), 8),
            Err(Error::InvalidWeight(_))
        ));
        assert!(matches!(build_quadrature(&WeightSpec::legendre(), 1), Err(Error::InvalidWeight(_))));
        let bad = WeightSpec { family: WeightFamily::Legendre, params: vec![], support: (1.0, -1.0) };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn stieltjes_guards_degree_bound() {
        let m = build_quadrature(&WeightSpec::legendre(), 4).unwrap();
        assert!(matches!(stieltjes_recurrence(&m, 4), Err(Error::DegreeBoundExceeded { .. })));
        assert!(stieltjes_recurrence(&m, 3).is_ok());
    }

    #[test]
    fn refined_rule_is_cached() {
        let m = build_quadrature(&WeightSpec::legendre(), 8).unwrap();
        let r = m.refined().unwrap().unwrap();
        assert_eq!(r.node_count(), 16);
        let again = m.refined().unwrap().unwrap();
        assert!(std::ptr::eq(r, again));
    }
}
