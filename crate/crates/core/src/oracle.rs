//! Brute-force evaluators used only to check the closed forms: literal
//! N-fold tensor quadrature of the ensemble average, the permutation
//! expansion behind the Andréief identity, and Monte Carlo over GUE.
//!
//! Nothing here touches orthogonal polynomials or determinant formulas.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measure::{build_quadrature, WeightSpec};
use crate::transforms::{check_distinct, check_pole};
use crate::C64;

pub const DEFAULT_BUDGET: usize = 10_000_000;
pub const DEFAULT_ORACLE_NODES: usize = 32;
pub const DEFAULT_MC_SAMPLES: usize = 100_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_REFINEMENT_TOLERANCE: f64 = 1e-8;

/// Draws per independently seeded stream; fixes the work partition.
const MC_CHUNK: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub nodes_per_dim: usize,
    /// Matrix size used by callers that do not pass N explicitly.
    pub n: usize,
    pub mc_samples: usize,
    pub rng_seed: u64,
    /// Largest tensor grid (points) a single quadrature may visit.
    pub budget: usize,
    pub refinement_tolerance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            nodes_per_dim: DEFAULT_ORACLE_NODES,
            n: 2,
            mc_samples: DEFAULT_MC_SAMPLES,
            rng_seed: DEFAULT_SEED,
            budget: DEFAULT_BUDGET,
            refinement_tolerance: DEFAULT_REFINEMENT_TOLERANCE,
        }
    }
}

fn grid_size(q: usize, n: usize, budget: usize) -> Result<usize> {
    let size = (0..n).try_fold(1usize, |acc, _| acc.checked_mul(q));
    match size {
        Some(s) if s <= budget => Ok(s),
        _ => Err(Error::ComplexityLimit(format!("{q}^{n} grid points exceed the budget of {budget}"))),
    }
}

/// Σ over the grid of ∏wᵢφ(xᵢ)·Δ²(x), and of ∏wᵢ·Δ²(x).
fn tensor_sums(nodes: &[f64], weights: &[f64], phi: &[C64], n: usize) -> (C64, f64) {
    let q = nodes.len();
    if n == 0 {
        return (C64::new(1.0, 0.0), 1.0);
    }
    // one task per first coordinate, reduced in index order
    let parts: Vec<(C64, f64)> = (0..q)
        .into_par_iter()
        .map(|first| {
            let mut idx = vec![0usize; n];
            idx[0] = first;
            let mut num = C64::new(0.0, 0.0);
            let mut den = 0.0;
            loop {
                let mut vdm = 1.0;
                let mut w = 1.0;
                let mut f = C64::new(1.0, 0.0);
                for i in 0..n {
                    let xi = nodes[idx[i]];
                    for &j in &idx[..i] {
                        let d = xi - nodes[j];
                        vdm *= d * d;
                    }
                    w *= weights[idx[i]];
                    f *= phi[idx[i]];
                }
                den += w * vdm;
                num += f * (w * vdm);
                let mut d = 1;
                loop {
                    if d == n {
                        return (num, den);
                    }
                    idx[d] += 1;
                    if idx[d] < q {
                        break;
                    }
                    idx[d] = 0;
                    d += 1;
                }
            }
        })
        .collect();
    parts.into_iter().fold((C64::new(0.0, 0.0), 0.0), |(a, b), (x, y)| (a + x, b + y))
}

fn grid_average(spec: &WeightSpec, q: usize, mu: &[C64], eps: &[C64], n: usize) -> Result<C64> {
    let rule = build_quadrature(spec, q)?;
    let phi: Vec<C64> = rule
        .nodes()
        .iter()
        .map(|&x| {
            let t = C64::new(x, 0.0);
            let num: C64 = mu.iter().map(|&m| m - t).product();
            let den: C64 = eps.iter().map(|&e| e - t).product();
            num / den
        })
        .collect();
    let (num, z) = tensor_sums(rule.nodes(), rule.weights(), &phi, n);
    if !(z > 0.0) {
        return Err(Error::PrecisionLoss(format!("partition function vanishes on a {q}-point grid for N = {n}")));
    }
    Ok(num / z)
}

/// ⟨∏ⱼ D_N[μⱼ] / ∏ⱼ D_N[εⱼ]⟩ by literal N-fold Gauss quadrature,
/// normalized by the partition function on the same grid. With poles
/// present the sum is repeated on a grid with twice the nodes per axis.
pub fn brute_force_average(spec: &WeightSpec, mu: &[C64], eps: &[C64], n: usize, cfg: &OracleConfig) -> Result<C64> {
    let all: Vec<C64> = mu.iter().chain(eps).copied().collect();
    check_distinct(&all)?;
    for &e in eps {
        check_pole(e, spec.support)?;
    }
    let q = cfg.nodes_per_dim;
    grid_size(q, n, cfg.budget)?;
    let value = grid_average(spec, q, mu, eps, n)?;
    if !eps.is_empty() && n > 0 {
        grid_size(2 * q, n, cfg.budget)?;
        let fine = grid_average(spec, 2 * q, mu, eps, n)?;
        let change = (value - fine).norm() / fine.norm().max(f64::MIN_POSITIVE);
        if !(change <= cfg.refinement_tolerance) {
            return Err(Error::RefinementFailure { change, tolerance: cfg.refinement_tolerance });
        }
        return Ok(fine);
    }
    Ok(value)
}

/// All permutations of 0..k with their signs.
fn permutations(k: usize) -> Vec<(Vec<usize>, f64)> {
    fn extend(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                extend(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::with_capacity(k), &mut vec![false; k], &mut out);
    out.into_iter()
        .map(|p| {
            let inversions = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
            let s = if inversions % 2 == 0 { 1.0 } else { -1.0 };
            (p, s)
        })
        .collect()
}

fn permutation_det(perms: &[(Vec<usize>, f64)], entry: impl Fn(usize, usize) -> f64) -> f64 {
    perms.iter().map(|(p, s)| s * p.iter().enumerate().map(|(i, &j)| entry(i, j)).product::<f64>()).sum()
}

/// Both sides of ∫det(fᵢ(xⱼ))det(gᵢ(xⱼ))∏dμ(xⱼ) = k!·det(∫fᵢgⱼ dμ) for a
/// discrete measure, given fᵢ and gᵢ evaluated at its nodes (k×n each).
pub fn andreief_check(f_evals: &[Vec<f64>], g_evals: &[Vec<f64>], weights: &[f64]) -> Result<(f64, f64)> {
    let k = f_evals.len();
    if k > 5 {
        return Err(Error::ComplexityLimit(format!("permutation expansion of order {k} (limit 5)")));
    }
    let n = weights.len();
    if g_evals.len() != k || f_evals.iter().chain(g_evals).any(|r| r.len() != n) {
        return Err(Error::Config("f and g must both be k × (number of weights)".into()));
    }
    grid_size(n, k, DEFAULT_BUDGET)?;
    let perms = permutations(k);
    let mut lhs = 0.0;
    let mut idx = vec![0usize; k];
    if n > 0 || k == 0 {
        loop {
            let w: f64 = idx.iter().map(|&i| weights[i]).product();
            let df = permutation_det(&perms, |i, j| f_evals[i][idx[j]]);
            let dg = permutation_det(&perms, |i, j| g_evals[i][idx[j]]);
            lhs += w * df * dg;
            let mut d = 0;
            loop {
                if d == k {
                    break;
                }
                idx[d] += 1;
                if idx[d] < n {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
            if d == k {
                break;
            }
        }
    }
    let gram: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| (0..n).map(|x| f_evals[i][x] * g_evals[j][x] * weights[x]).sum()).collect())
        .collect();
    let factorial: f64 = (1..=k).map(|i| i as f64).product();
    let rhs = factorial * permutation_det(&perms, |i, j| gram[i][j]);
    Ok((lhs, rhs))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: C64,
    pub std_error: f64,
    pub samples: usize,
}

impl McEstimate {
    pub fn relative_error(&self) -> f64 {
        if self.std_error == 0.0 {
            0.0
        } else {
            self.std_error / self.estimate.norm()
        }
    }

    /// Fails with InsufficientSamples when the relative standard error exceeds `tolerance`.
    pub fn require(&self, tolerance: f64) -> Result<&Self> {
        let relative = self.relative_error();
        if relative > tolerance {
            Err(Error::InsufficientSamples { relative, tolerance })
        } else {
            Ok(self)
        }
    }

    /// |value − estimate| ≤ sigmas·std_error.
    pub fn contains(&self, value: C64, sigmas: f64) -> bool {
        (value - self.estimate).norm() <= sigmas * self.std_error
    }
}

/// Eigenvalues of one GUE draw with density ∝ exp(−tr H²).
fn gue_eigenvalues(rng: &mut ChaCha8Rng, n: usize, diag: &Normal<f64>, off: &Normal<f64>) -> Vec<f64> {
    let mut h = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = C64::new(diag.sample(rng), 0.0);
        for j in i + 1..n {
            let z = C64::new(off.sample(rng), off.sample(rng));
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    SymmetricEigen::new(h).eigenvalues.iter().copied().collect()
}

/// Monte Carlo estimate of ⟨∏D_N[μ]/∏D_N[ε]⟩ over GUE (weight e^{−x²} on
/// the whole line). Reproducible for a fixed seed regardless of thread count.
pub fn mc_gue_average(mu: &[C64], eps: &[C64], n: usize, cfg: &OracleConfig) -> Result<McEstimate> {
    let all: Vec<C64> = mu.iter().chain(eps).copied().collect();
    check_distinct(&all)?;
    if cfg.mc_samples < 2 {
        return Err(Error::Config(format!("mc_samples = {}, need at least 2", cfg.mc_samples)));
    }
    let diag = Normal::new(0.0, 0.5f64.sqrt()).expect("valid normal");
    let off = Normal::new(0.0, 0.5).expect("valid normal");
    let chunks = cfg.mc_samples.div_ceil(MC_CHUNK);
    let values: Vec<C64> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
            rng.set_stream(c as u64);
            let count = MC_CHUNK.min(cfg.mc_samples - c * MC_CHUNK);
            (0..count)
                .map(|_| {
                    let x = gue_eigenvalues(&mut rng, n, &diag, &off);
                    let mut z = C64::new(1.0, 0.0);
                    for &xi in &x {
                        let t = C64::new(xi, 0.0);
                        for &m in mu {
                            z *= m - t;
                        }
                        for &e in eps {
                            z /= e - t;
                        }
                    }
                    z
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let count = values.len() as f64;
    let mean: C64 = values.iter().sum::<C64>() / count;
    let ss: f64 = values.iter().map(|z| (z - mean).norm_sqr()).sum();
    let std_error = (ss / (count - 1.0)).sqrt() / count.sqrt();
    Ok(McEstimate { estimate: mean, std_error, samples: values.len() })
}
