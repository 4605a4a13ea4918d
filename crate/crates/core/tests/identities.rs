//! Structural identities checked on random inputs.

use std::sync::OnceLock;

use proptest::prelude::*;
use unitary_averages::averages::{inverse_average, kernel_w_i, mixed_average, product_average, ratio_average};
use unitary_averages::darboux::{build_jacobi, z_ladder};
use unitary_averages::measure::{build_quadrature, eval_monic, stieltjes_recurrence, QuadratureMeasure, RecurrenceTable, WeightSpec, DEFAULT_NODES};
use unitary_averages::transforms::{partial_fractions, CauchyRows};
use unitary_averages::C64;

struct Fixture {
    measure: QuadratureMeasure,
    table: RecurrenceTable,
}

fn fixtures() -> &'static [Fixture; 2] {
    static CELL: OnceLock<[Fixture; 2]> = OnceLock::new();
    CELL.get_or_init(|| {
        [WeightSpec::legendre(), WeightSpec::gaussian(6.0)].map(|spec| {
            let measure = build_quadrature(&spec, DEFAULT_NODES).unwrap();
            let table = stieltjes_recurrence(&measure, 16).unwrap();
            Fixture { measure, table }
        })
    })
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1e-300)
}

/// A point at distance 1.5..3 support radii from the centre, any direction.
fn far_point(radius: f64) -> impl Strategy<Value = C64> {
    (1.5f64..3.0, 0.0f64..std::f64::consts::TAU).prop_map(move |(r, th)| C64::from_polar(r * radius, th))
}

/// Points pairwise separated by at least a tenth of the support radius.
fn separated(points: &[C64], radius: f64) -> bool {
    points.iter().enumerate().all(|(i, a)| points[..i].iter().all(|b| (a - b).norm() > 0.1 * radius))
}

fn radius(f: &Fixture) -> f64 {
    let (lo, hi) = f.measure.support();
    0.5 * (hi - lo)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn product_average_is_symmetric_in_roots(w in 0usize..2, pts in prop::collection::vec(-8.0f64..8.0, 6), n in 1usize..5) {
        let f = &fixtures()[w];
        let mu: Vec<C64> = pts.chunks(2).map(|p| C64::new(p[0], p[1])).collect();
        prop_assume!(separated(&mu, 1.0));
        let a = product_average(&f.table, &mu, n).unwrap().value;
        let swapped = [mu[2], mu[0], mu[1]];
        let b = product_average(&f.table, &swapped, n).unwrap().value;
        prop_assert!(close(a, b, 1e-9), "{a} vs {b}");
        let conj: Vec<C64> = mu.iter().map(|z| z.conj()).collect();
        let c = product_average(&f.table, &conj, n).unwrap().value;
        prop_assert!(close(a.conj(), c, 1e-9), "{a} vs conj {c}");
    }

    #[test]
    fn single_root_average_is_the_monic_polynomial(w in 0usize..2, re in -8.0f64..8.0, im in -8.0f64..8.0, n in 0usize..10) {
        let f = &fixtures()[w];
        let mu = C64::new(re, im);
        let a = product_average(&f.table, &[mu], n).unwrap().value;
        prop_assert!(close(a, eval_monic(&f.table, n, mu).unwrap(), 1e-12));
    }

    #[test]
    fn ratio_factors_through_mixed_and_inverse(
        w in 0usize..2,
        e1 in far_point(1.0), e2 in far_point(1.0),
        m1 in far_point(1.0), m2 in far_point(1.0),
        k in 0usize..3, m in 1usize..3, n in 2usize..5,
    ) {
        let f = &fixtures()[w];
        let r = radius(f);
        let eps = [e1 * r, e2 * r];
        let mu = [m1 * r, m2 * r];
        let all = [eps[0], eps[1], mu[0], mu[1]];
        prop_assume!(separated(&all, r));
        let rows = CauchyRows::build(&f.measure, &f.table, &eps[..m], 16).unwrap();
        let ratio = ratio_average(&f.table, &rows, &mu[..k], n).unwrap().value;
        let mixed = mixed_average(&f.table, &rows, &mu[..k], n).unwrap().value;
        let inverse = inverse_average(&f.table, &rows, n).unwrap().value;
        prop_assert!(close(ratio, mixed * inverse, 1e-8), "{ratio} vs {}", mixed * inverse);
    }

    #[test]
    fn real_inputs_give_real_averages(w in 0usize..2, e in 1.2f64..3.0, mu in 1.2f64..3.0, sign in prop::bool::ANY, n in 1usize..5) {
        let f = &fixtures()[w];
        let r = radius(f);
        let eps = if sign { e * r } else { -e * r };
        prop_assume!((eps - mu * r).abs() > 0.1 * r);
        let rows = CauchyRows::build(&f.measure, &f.table, &[C64::new(eps, 0.0)], 16).unwrap();
        let v = ratio_average(&f.table, &rows, &[C64::new(mu * r, 0.0)], n).unwrap().value;
        prop_assert!(v.im.abs() <= 1e-12 * v.re.abs().max(1.0), "{v}");
    }

    #[test]
    fn christoffel_darboux_kernel(w in 0usize..2, x in far_point(0.5), y in far_point(0.5), deg in 1usize..12) {
        let f = &fixtures()[w];
        let r = radius(f);
        let (x, y) = (x * r, y * r);
        prop_assume!((x - y).norm() > 0.05 * r);
        let wxy = kernel_w_i(&f.table, x, y, deg).unwrap().value;
        let wyx = kernel_w_i(&f.table, y, x, deg).unwrap().value;
        prop_assert!(close(wxy, wyx, 1e-10));
        let c = f.table.c_sq();
        let px = f.table.monic_values(deg, x).unwrap();
        let py = f.table.monic_values(deg, y).unwrap();
        let sum: C64 = (0..deg).map(|i| px[i] * py[i] / c[i]).sum::<C64>() * c[deg - 1];
        prop_assert!(close(wxy, sum, 1e-8), "{wxy} vs {sum}");
    }

    #[test]
    fn partial_fractions_reconstruct_the_product(pts in prop::collection::vec(far_point(1.0), 1..5), t in far_point(4.0)) {
        prop_assume!(separated(&pts, 1.0));
        let beta = partial_fractions(&pts).unwrap();
        let lhs: C64 = pts.iter().map(|&e| C64::new(1.0, 0.0) / (t - e)).product();
        let rhs: C64 = beta.iter().zip(&pts).map(|(&b, &e)| b / (t - e)).sum();
        prop_assert!(close(lhs, rhs, 1e-10), "{lhs} vs {rhs}");
    }
}

#[test]
fn partition_ladder_reproduces_offdiagonal_entries() {
    for f in fixtures() {
        let z = z_ladder(&f.table, 12).unwrap();
        assert!(z.z.iter().all(|&v| v > 0.0));
        for n in 0..=10 {
            let b_sq = (n as f64 + 1.0) / (n as f64 + 2.0) * (z.ln_z(n) + z.ln_z(n + 2) - 2.0 * z.ln_z(n + 1)).exp();
            let want = f.table.offdiag()[n + 1].powi(2);
            assert!((b_sq - want).abs() <= 1e-12 * want, "n={n}: {b_sq} vs {want}");
        }
    }
}

#[test]
fn jacobi_spectrum_lies_in_the_support_and_sums_to_the_trace() {
    for f in fixtures() {
        let (lo, hi) = f.measure.support();
        for dim in 1..=12 {
            let op = build_jacobi(&f.table, dim).unwrap();
            let ev = op.eigenvalues();
            assert!(ev.iter().all(|&x| x > lo && x < hi), "dim {dim}: {ev:?}");
            let trace: f64 = op.diag.iter().sum();
            assert!((ev.iter().sum::<f64>() - trace).abs() < 1e-12 * (1.0 + dim as f64));
        }
    }
}
