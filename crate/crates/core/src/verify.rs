//! Verification suites run by the `verify` command: every closed form is
//! compared with an independent evaluation for the configured weight.

use std::f64::consts::PI;

use crate::averages::{
    inverse_average, mixed_average, product_average, ratio_average, ratio_via_products, two_point_product, two_point_ratio,
};
use crate::config::{OutputFormat, RunConfig, Suite};
use crate::darboux::{build_jacobi, monic_roots, transformed_jacobi, verify_entry_formulas, z_ladder, DEFAULT_TILT_STEP};
use crate::error::{Error, Result};
use crate::linalg::{determinant, vandermonde};
use crate::measure::{build_quadrature, eval_monic, stieltjes_recurrence, QuadratureMeasure, RecurrenceTable, WeightFamily, WeightSpec};
use crate::oracle::{andreief_check, brute_force_average, mc_gue_average};
use crate::transforms::{
    christoffel_poly, combined_poly, partial_fractions, transformed_measure, uvarov_cauchy, CauchyRows, SpectralShift,
};
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn render(&self, format: OutputFormat) -> String {
        let mut out = String::new();
        if format == OutputFormat::Csv {
            out.push_str("suite,check,status,detail\n");
        }
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            match format {
                OutputFormat::Csv => out.push_str(&format!("{},{},{},{}\n", c.suite, c.name, status, c.detail.replace(',', ";"))),
                OutputFormat::Text => out.push_str(&format!("{status} {}/{}: {}\n", c.suite, c.name, c.detail)),
            }
        }
        let failed = self.failures().count();
        let summary = format!("{} checks, {} failed", self.checks.len(), failed);
        match format {
            OutputFormat::Csv => out.push_str(&format!("summary,total,{},{summary}\n", if failed == 0 { "PASS" } else { "FAIL" })),
            OutputFormat::Text => out.push_str(&format!("{summary}\n")),
        }
        out
    }
}

struct Collector {
    suite: &'static str,
    checks: Vec<CheckResult>,
}

impl Collector {
    fn new(suite: &'static str) -> Self {
        Collector { suite, checks: Vec::new() }
    }

    fn push(&mut self, name: String, passed: bool, detail: String) {
        self.checks.push(CheckResult { suite: self.suite, name, passed, detail });
    }

    /// Relative agreement of two computed values.
    fn rel(&mut self, name: String, got: Result<C64>, want: Result<C64>, tol: f64) {
        match (got, want) {
            (Ok(g), Ok(w)) => {
                let err = (g - w).norm() / w.norm().max(f64::MIN_POSITIVE);
                self.push(name, err <= tol, format!("rel err {err:.3e} (tol {tol:e})"));
            }
            (Err(e), _) | (_, Err(e)) => self.push(name, false, format!("error: {e}")),
        }
    }

    /// A precomputed error measure against its tolerance.
    fn bound(&mut self, name: String, err: Result<f64>, tol: f64, what: &str) {
        match err {
            Ok(err) => self.push(name, err <= tol, format!("{what} {err:.3e} (tol {tol:e})")),
            Err(e) => self.push(name, false, format!("error: {e}")),
        }
    }
}

/// Shared state of the suites for one weight.
pub struct Context {
    pub spec: WeightSpec,
    pub measure: QuadratureMeasure,
    pub table: RecurrenceTable,
    center: f64,
    half: f64,
}

impl Context {
    pub fn new(spec: &WeightSpec, nodes: usize) -> Result<Self> {
        let measure = build_quadrature(spec, nodes)?;
        let n_max = 16.min(measure.exact_degree().saturating_sub(1) / 2);
        let table = stieltjes_recurrence(&measure, n_max)?;
        let (lo, hi) = spec.support;
        Ok(Context { spec: spec.clone(), measure, table, center: 0.5 * (lo + hi), half: 0.5 * (hi - lo) })
    }

    /// Real point to the right of the support, `s` half-widths past its edge.
    pub fn right(&self, s: f64) -> C64 {
        C64::new(self.center + self.half * (1.0 + s), 0.0)
    }

    /// Real point to the left of the support.
    pub fn left(&self, s: f64) -> C64 {
        C64::new(self.center - self.half * (1.0 + s), 0.0)
    }

    /// Point at relative offset (x, y) from the centre, in half-widths.
    pub fn at(&self, x: f64, y: f64) -> C64 {
        C64::new(self.center + self.half * x, self.half * y)
    }

    /// 20 points on an ellipse around the support, away from the real axis.
    pub fn grid(&self) -> Vec<C64> {
        (0..20)
            .map(|k| {
                let th = 2.0 * PI * (k as f64 + 0.5) / 20.0;
                self.at(1.5 * th.cos(), 0.7 * th.sin())
            })
            .collect()
    }

    pub fn rows(&self, points: &[C64]) -> Result<CauchyRows> {
        CauchyRows::build(&self.measure, &self.table, points, self.table.n_max())
    }
}

fn rel_err(got: C64, want: C64) -> f64 {
    (got - want).norm() / want.norm().max(f64::MIN_POSITIVE)
}

fn list(points: &[C64]) -> String {
    let items: Vec<String> = points.iter().map(|&z| crate::config::format_complex(z)).collect();
    format!("({})", items.join(" "))
}

pub fn transforms_suite(ctx: &Context) -> Vec<CheckResult> {
    let mut col = Collector::new("transforms");
    let t = &ctx.table;
    let mu_all = [ctx.right(1.0), ctx.right(2.5)];
    let eps_all = [ctx.right(1.5), ctx.left(2.0)];
    let grid = ctx.grid();

    for l in 0..=2usize {
        for m in 0..=2usize {
            if l + m == 0 {
                continue;
            }
            let name = format!("determinant polynomials l={l} m={m} vs transformed recurrence");
            let err = (|| -> Result<f64> {
                let shift = SpectralShift::new(mu_all[..l].to_vec(), eps_all[..m].to_vec());
                let tt = stieltjes_recurrence(&transformed_measure(&ctx.measure, &shift)?, 6)?;
                let rows = ctx.rows(&eps_all[..m])?;
                let mut worst = 0.0f64;
                for n in m..=6 {
                    for &x in &grid {
                        let got = combined_poly(t, &rows, &mu_all[..l], n, x)?;
                        worst = worst.max(rel_err(got, eval_monic(&tt, n, x)?));
                    }
                }
                Ok(worst)
            })();
            col.bound(name, err, 1e-8, "max rel err");
        }
    }

    let err = (|| -> Result<f64> {
        let shift = SpectralShift::new(vec![], eps_all.to_vec());
        let tt = stieltjes_recurrence(&transformed_measure(&ctx.measure, &shift)?, 8)?;
        let mut worst = 0.0f64;
        for n in 0..=6 {
            for &x in &grid {
                let got = christoffel_poly(&tt, &eps_all, n, x)?;
                worst = worst.max(rel_err(got, eval_monic(t, n, x)?));
            }
        }
        Ok(worst)
    })();
    col.bound("reciprocity: poles then roots at the same points".into(), err, 1e-8, "max rel err");

    let mu = [ctx.right(1.0), ctx.at(-0.5, 1.0), ctx.left(1.5)];
    let err = (|| -> Result<f64> {
        let mut worst = 0.0f64;
        for n in 0..=5 {
            let mut prod = eval_monic(t, n, mu[0])?;
            for j in 1..mu.len() {
                prod *= christoffel_poly(t, &mu[..j], n, mu[j])?;
            }
            let rows: Vec<Vec<C64>> = mu.iter().map(|&x| Ok(t.monic_values(n + 2, x)?[n..].to_vec())).collect::<Result<_>>()?;
            worst = worst.max(rel_err(prod, determinant(&rows).value / vandermonde(&mu)));
        }
        Ok(worst)
    })();
    col.bound("product of root-transformed polynomials".into(), err, 1e-9, "max rel err");

    let eps = [ctx.right(1.0), ctx.at(0.3, 0.8), ctx.left(2.0)];
    let err = (|| -> Result<f64> {
        let rows = ctx.rows(&eps)?;
        let mut worst = 0.0f64;
        for m in 0..eps.len() {
            for n in m..=5 {
                let mut prod = C64::new(1.0, 0.0);
                for j in 0..=m {
                    let shift = rows.select(&(0..j).collect::<Vec<_>>());
                    prod *= uvarov_cauchy(&shift, eps[j], rows.row(j), n - m + j)?.scaled;
                }
                let det_rows: Vec<Vec<C64>> = (0..=m).map(|i| rows.row(i)[n - m..=n].to_vec()).collect();
                let sign = if (m * (m + 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
                worst = worst.max(rel_err(prod, determinant(&det_rows).value * sign / vandermonde(&eps[..=m])));
            }
        }
        Ok(worst)
    })();
    col.bound("product of pole-transformed Cauchy transforms".into(), err, 1e-9, "max rel err");

    let err = (|| -> Result<f64> {
        let pts = [ctx.right(1.0), ctx.at(0.3, 0.8), ctx.left(2.0), ctx.at(-0.2, -1.1)];
        let beta = partial_fractions(&pts)?;
        let mut worst = 0.0f64;
        for k in 0..10 {
            let x = ctx.at(0.23 * k as f64 - 1.1, 0.4 * (k as f64).sin());
            let sum: C64 = beta.iter().zip(&pts).map(|(b, e)| b / (x - e)).sum();
            let prod: C64 = pts.iter().map(|e| x - e).product();
            worst = worst.max(rel_err(sum, 1.0 / prod));
        }
        Ok(worst)
    })();
    col.bound("partial fractions reconstruction".into(), err, 1e-12, "max rel err");
    col.checks
}

pub fn averages_suite(ctx: &Context, cfg: &RunConfig) -> Vec<CheckResult> {
    let mut col = Collector::new("averages");
    let t = &ctx.table;
    let oc = &cfg.oracle;
    let spec = &ctx.spec;
    let mu = [ctx.right(1.0), ctx.at(-0.4, 0.5), ctx.left(1.5), ctx.right(3.0)];
    let eps_real = [ctx.right(0.5), ctx.left(1.0)];
    let eps_complex = [ctx.at(0.3, 0.8), ctx.at(-0.6, -0.5)];

    for l in 1..=3 {
        for n in 1..=3 {
            col.rel(
                format!("product L={l} N={n} vs oracle"),
                product_average(t, &mu[..l], n).map(|r| r.value),
                brute_force_average(spec, &mu[..l], &[], n, oc),
                1e-8,
            );
        }
    }
    for eps in [&eps_real, &eps_complex] {
        for m in 1..=2 {
            for n in 2..=3 {
                let e = &eps[..m];
                col.rel(
                    format!("inverse M={m} N={n} eps={} vs oracle", list(e)),
                    ctx.rows(e).and_then(|r| inverse_average(t, &r, n)).map(|r| r.value),
                    brute_force_average(spec, &[], e, n, oc),
                    1e-6,
                );
            }
        }
    }
    let ratio_mu = [ctx.right(2.0), ctx.right(3.0)];
    for (k, m, n) in [(1, 1, 1), (1, 1, 2), (2, 1, 2), (2, 2, 2), (2, 2, 3)] {
        let e = &eps_real[..m];
        col.rel(
            format!("ratio K={k} M={m} N={n} vs oracle"),
            ctx.rows(e).and_then(|r| ratio_average(t, &r, &ratio_mu[..k], n)).map(|r| r.value),
            brute_force_average(spec, &ratio_mu[..k], e, n, oc),
            1e-6,
        );
    }
    for k in 1..=2 {
        for n in 1..=3 {
            let (lam, mu2) = (&mu[..k], &mu[2..2 + k]);
            let all: Vec<C64> = lam.iter().chain(mu2).copied().collect();
            col.rel(
                format!("two-point product K={k} N={n} vs product"),
                two_point_product(t, lam, mu2, n).map(|r| r.value),
                product_average(t, &all, n).map(|r| r.value),
                1e-10,
            );
        }
    }
    for k in 1..=2 {
        for n in k..=3 {
            let e = &eps_complex[..k];
            let m = &mu[..k];
            let rows = ctx.rows(e);
            col.rel(
                format!("two-point ratio K={k} N={n} vs ratio"),
                rows.clone().and_then(|r| two_point_ratio(t, &r, m, n)).map(|r| r.value),
                rows.and_then(|r| ratio_average(t, &r, m, n)).map(|r| r.value),
                1e-8,
            );
        }
    }
    for n in 1..=2 {
        let (m, e) = ([ctx.right(2.0)], [ctx.right(1.0)]);
        col.rel(
            format!("ratio via products L=M=1 N={n} vs ratio"),
            ratio_via_products(&ctx.measure, t, &m, &e, n).map(|r| r.value),
            ctx.rows(&e).and_then(|r| ratio_average(t, &r, &m, n)).map(|r| r.value),
            1e-7,
        );
    }
    for n in 2..=4 {
        let rows = ctx.rows(&eps_complex);
        let prod = rows.clone().and_then(|r| {
            Ok(mixed_average(t, &r, &mu[..3], n)?.value * inverse_average(t, &r, n)?.value)
        });
        col.rel(
            format!("mixed x inverse N={n} vs ratio"),
            prod,
            rows.and_then(|r| ratio_average(t, &r, &mu[..3], n)).map(|r| r.value),
            1e-10,
        );
    }
    if spec.family == WeightFamily::GaussianTruncated {
        let cases: [(&str, Vec<C64>, Vec<C64>); 2] = [
            ("product mu=5 N=2", vec![C64::new(5.0, 0.0)], vec![]),
            ("ratio mu=5 eps=4+1i N=2", vec![C64::new(5.0, 0.0)], vec![C64::new(4.0, 1.0)]),
        ];
        for (label, m, e) in cases {
            let name = format!("monte carlo {label} within 3 standard errors");
            let formula = ctx.rows(&e).and_then(|r| ratio_average(t, &r, &m, 2)).map(|r| r.value);
            match (formula, mc_gue_average(&m, &e, 2, oc)) {
                (Ok(f), Ok(mc)) => {
                    let z = (f - mc.estimate).norm() / mc.std_error;
                    col.push(name, mc.contains(f, 3.0), format!("deviation {z:.2} standard errors over {} samples", mc.samples));
                }
                (Err(err), _) | (_, Err(err)) => col.push(name, false, format!("error: {err}")),
            }
        }
    }
    col.checks
}

pub fn darboux_suite(ctx: &Context, cfg: &RunConfig) -> Vec<CheckResult> {
    let mut col = Collector::new("darboux");
    let t = &ctx.table;
    let dims = 12.min(t.n_max());
    let err = (|| -> Result<f64> {
        let mut worst = 0.0f64;
        for dim in 1..=dims {
            let ev = build_jacobi(t, dim)?.eigenvalues();
            let roots = monic_roots(t, dim, ctx.spec.support)?;
            for (a, b) in ev.iter().zip(&roots) {
                worst = worst.max((a - b).abs() / b.abs().max(1.0));
            }
        }
        Ok(worst)
    })();
    col.bound(format!("Jacobi eigenvalues vs zeros of pi_n, n <= {dims}"), err, 1e-8, "max rel err");

    for n in 0..=8 {
        match verify_entry_formulas(&ctx.measure, n, DEFAULT_TILT_STEP) {
            Ok(r) => {
                let b = r.b_discrepancy() / r.b_sq_next_index;
                col.push(format!("b^2 ratio formula n={n}"), b <= 1e-7, format!("rel err {b:.3e} against b_(n+1)^2 (tol 1e-7)"));
                let a = r.a_discrepancy();
                col.push(format!("a tilt formula n={n}"), a <= 1e-6, format!("abs err {a:.3e} against -a_(n+1) (tol 1e-6)"));
            }
            Err(e) => {
                col.push(format!("b^2 ratio formula n={n}"), false, format!("error: {e}"));
                col.push(format!("a tilt formula n={n}"), false, format!("error: {e}"));
            }
        }
    }

    let rule = build_quadrature(&ctx.spec, cfg.oracle.nodes_per_dim);
    for k in 1..=4 {
        let err = (|| -> Result<f64> {
            let rule = rule.clone()?;
            let f: Vec<Vec<f64>> = (0..k).map(|i| rule.nodes().iter().map(|x| x.powi(i as i32)).collect()).collect();
            let (lhs, _) = andreief_check(&f, &f, rule.weights())?;
            let z = z_ladder(t, k)?.z[k];
            Ok((lhs - z).abs() / z)
        })();
        col.bound(format!("partition function Z_{k} vs {k}-fold quadrature"), err, 1e-10, "rel err");
    }

    let err = (|| -> Result<f64> {
        let eps = vec![ctx.right(1.0), ctx.left(1.5)];
        let there = transformed_measure(&ctx.measure, &SpectralShift::new(vec![], eps.clone()))?;
        let back = transformed_jacobi(&there, &SpectralShift::new(eps, vec![]), 8)?;
        let base = build_jacobi(t, 8)?;
        let scale = base.offdiag.iter().fold(1.0f64, |m, b| m.max(b.abs()));
        let d = back.diag.iter().zip(&base.diag).map(|(a, b)| (a - b).abs());
        let o = back.offdiag.iter().zip(&base.offdiag).map(|(a, b)| (a - b).abs());
        Ok(d.chain(o).fold(0.0, f64::max) / scale)
    })();
    col.bound("operator round trip: poles then roots".into(), err, 1e-8, "max rel err");
    col.checks
}

/// Runs the configured suite; setup failures (invalid weight, too few nodes) are errors.
pub fn run(cfg: &RunConfig) -> Result<VerifyReport> {
    let ctx = Context::new(&cfg.weight, cfg.nodes)?;
    if ctx.table.n_max() < 8 {
        return Err(Error::Config(format!("nodes = {} is too few for the verification suites", cfg.nodes)));
    }
    let mut checks = Vec::new();
    if matches!(cfg.suite, Suite::Transforms | Suite::All) {
        checks.extend(transforms_suite(&ctx));
    }
    if matches!(cfg.suite, Suite::Averages | Suite::All) {
        checks.extend(averages_suite(&ctx, cfg));
    }
    if matches!(cfg.suite, Suite::Darboux | Suite::All) {
        checks.extend(darboux_suite(&ctx, cfg));
    }
    Ok(VerifyReport { checks })
}
