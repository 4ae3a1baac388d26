//! The principal constant `λ_p = inf ‖u‖_{H_p}^p / ‖u‖_p^p`.
//!
//! For general `p` the quotient is minimized by preconditioned descent on the
//! `L^p` unit sphere, which only yields an upper bound. For `p = 2` the
//! infimum is the smallest eigenvalue of `(L + diag(σρ)) u = λ diag(σ) u`,
//! solved densely as an oracle.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::energy::EnergyModel;
use crate::error::{Error, Result};
use crate::function::VertexFunction;
use crate::par::sum_indices;
use crate::scalar::Scalar;
use crate::solver::{metric, ARMIJO_C, BACKTRACK, MAX_BACKTRACKS, STEP_MAX, STEP_MIN};

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaConfig<T> {
    pub restarts: usize,
    /// `ℓ∞` bound on `−Δ_p u + ρ|u|^{p−2}u − R(u)|u|^{p−2}u` at unit `L^p` norm.
    pub tol: T,
    pub max_iterations: usize,
    pub rng_seed: u64,
}

impl<T: Scalar> Default for LambdaConfig<T> {
    fn default() -> Self {
        LambdaConfig {
            restarts: 4,
            tol: T::lit(1e-10).max(T::epsilon() * T::lit(100.0)),
            max_iterations: 50_000,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaEstimate<T> {
    pub lambda: T,
    /// Minimizer, normalized to `‖u‖_p = 1`.
    pub u: VertexFunction<T>,
    /// Always true: descent only certifies `λ_p ≤ lambda`.
    pub upper_bound: bool,
    pub converged: bool,
    pub residual: T,
    pub iterations: usize,
    pub restarts: usize,
}

fn lp_pow<T: Scalar>(model: &EnergyModel<T>, u: &[T]) -> T {
    let g = model.graph();
    let p = model.p();
    sum_indices(u.len(), |x| g.measure(x) * u[x].abs().powf(p))
}

fn normalize<T: Scalar>(model: &EnergyModel<T>, u: &mut [T]) -> Option<()> {
    let d = lp_pow(model, u);
    if !(d > T::zero()) || !d.is_finite() {
        return None;
    }
    let s = d.powf(-T::one() / model.p());
    for v in u.iter_mut() {
        *v = *v * s;
    }
    Some(())
}

/// Residual field `r` with `∇R = p σ r` on the unit sphere.
fn sphere_residual<T: Scalar>(model: &EnergyModel<T>, u: &[T], r: T) -> Vec<T> {
    let pm2 = model.p() - T::lit(2.0);
    model
        .norm_gradient_raw(u)
        .into_iter()
        .zip(u)
        .map(|(gx, ux)| {
            let w = if *ux == T::zero() {
                T::zero()
            } else {
                ux.abs().powf(pm2) * *ux
            };
            gx - r * w
        })
        .collect()
}

struct Run<T> {
    u: Vec<T>,
    lambda: T,
    residual: T,
    iterations: usize,
    converged: bool,
}

fn descend<T: Scalar>(
    model: &EnergyModel<T>,
    metric: &[T],
    mut u: Vec<T>,
    cfg: &LambdaConfig<T>,
) -> Option<Run<T>> {
    let g = model.graph();
    let n = u.len();
    normalize(model, &mut u)?;
    let mut r = model.norm_pow_raw(&u);
    let mut res = sphere_residual(model, &u, r);
    let c = T::lit(ARMIJO_C) * model.p();
    let shrink = T::lit(BACKTRACK);
    let slack = T::epsilon() * T::lit(8.0);
    let mut alpha = T::one();
    let mut iterations = 0;
    let mut converged = false;
    loop {
        let rmax = res.iter().fold(T::zero(), |a, v| a.max(v.abs()));
        if rmax <= cfg.tol {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iterations {
            break;
        }
        iterations += 1;
        let d: Vec<T> = (0..n).map(|x| -g.measure(x) * res[x] / metric[x]).collect();
        let slope = sum_indices(n, |x| g.measure(x) * res[x] * d[x]);
        let mut step = alpha;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let mut v: Vec<T> = u.iter().zip(&d).map(|(a, b)| *a + step * *b).collect();
            if normalize(model, &mut v).is_some() {
                let rv = model.norm_pow_raw(&v);
                if rv <= r + c * step * slope + slack * r.abs() {
                    accepted = Some((v, rv));
                    break;
                }
            }
            step = step * shrink;
        }
        let Some((v, rv)) = accepted else { break };
        let new_res = sphere_residual(model, &v, rv);
        let (mut sms, mut sy) = (T::zero(), T::zero());
        for x in 0..n {
            let s = v[x] - u[x];
            sms = sms + metric[x] * s * s;
            sy = sy + s * g.measure(x) * (new_res[x] - res[x]);
        }
        alpha = if sy > T::zero() && sms > T::zero() {
            sms / sy
        } else {
            step * T::lit(4.0)
        };
        alpha = alpha.max(T::lit(STEP_MIN)).min(T::lit(STEP_MAX));
        u = v;
        r = rv;
        res = new_res;
    }
    let residual = res.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    Some(Run {
        u,
        lambda: r,
        residual,
        iterations,
        converged,
    })
}

/// Seeded multi-start estimate of `λ_p`. Starts are positive, which loses
/// nothing: `|u|` never has a larger quotient than `u`.
pub fn estimate_lambda_p<T: Scalar>(
    model: &EnergyModel<T>,
    cfg: &LambdaConfig<T>,
) -> Result<LambdaEstimate<T>> {
    if cfg.restarts == 0 {
        return Err(Error::Config(
            "lambda estimate needs at least one restart".into(),
        ));
    }
    let n = model.n_vertices();
    let metric = metric(model);
    let runs: Vec<Option<Run<T>>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
            rng.set_stream(k as u64 + 1);
            let start = (0..n).map(|_| T::lit(rng.gen_range(0.05..1.0))).collect();
            descend(model, &metric, start, cfg)
        })
        .collect();
    let mut best: Option<Run<T>> = None;
    for run in runs.into_iter().flatten() {
        if best.as_ref().is_none_or(|b| run.lambda < b.lambda) {
            best = Some(run);
        }
    }
    let best = best.ok_or(Error::ZeroNorm)?;
    Ok(LambdaEstimate {
        lambda: best.lambda,
        u: VertexFunction::new(best.u)?,
        upper_bound: true,
        converged: best.converged,
        residual: best.residual,
        iterations: best.iterations,
        restarts: cfg.restarts,
    })
}

pub const DENSE_LAMBDA_MAX_VERTICES: usize = 2000;

/// Smallest generalized eigenvalue of `(L + diag(σρ), diag(σ))`, computed in
/// double precision. Defined for `p = 2` only.
pub fn dense_lambda_p2<T: Scalar>(model: &EnergyModel<T>) -> Result<f64> {
    if model.p() != T::lit(2.0) {
        return Err(Error::InvalidExponent(model.p().as_f64()));
    }
    let g = model.graph();
    let n = g.n_vertices();
    if n > DENSE_LAMBDA_MAX_VERTICES {
        return Err(Error::GraphTooLarge {
            n,
            limit: DENSE_LAMBDA_MAX_VERTICES,
        });
    }
    let scale: Vec<f64> = (0..n).map(|x| 1.0 / g.measure(x).as_f64().sqrt()).collect();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for x in 0..n {
        let sx = g.measure(x).as_f64();
        a[(x, x)] += sx * model.potential()[x].as_f64();
    }
    for (x, y, w) in g.edges() {
        let w = w.as_f64();
        a[(x, x)] += w;
        a[(y, y)] += w;
        a[(x, y)] -= w;
        a[(y, x)] -= w;
    }
    for x in 0..n {
        for y in 0..n {
            a[(x, y)] *= scale[x] * scale[y];
        }
    }
    let eig = SymmetricEigen::new(a);
    Ok(eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generators::{complete, grid, path, random_connected};
    use crate::nonlinearity::Nonlinearity;
    use crate::WeightedGraph;
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn model(g: WeightedGraph<f64>, p: f64, rho: f64) -> EnergyModel<f64> {
        let n = g.n_vertices();
        EnergyModel::new(
            Arc::new(g),
            p,
            VertexFunction::constant(n, rho).unwrap(),
            Nonlinearity::pure_power(p + 2.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn k2_lambda_is_one() {
        let m = model(complete(2, 1.0, 1.0).unwrap(), 2.0, 1.0);
        let est = estimate_lambda_p(&m, &LambdaConfig::default()).unwrap();
        assert!(est.upper_bound && est.converged);
        assert_relative_eq!(est.lambda, 1.0, epsilon = 1e-8);
        assert_relative_eq!(dense_lambda_p2(&m).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn path_lambda_is_one() {
        let m = model(path(3, 1.0, 1.0).unwrap(), 2.0, 1.0);
        assert_relative_eq!(dense_lambda_p2(&m).unwrap(), 1.0, epsilon = 1e-12);
        let est = estimate_lambda_p(&m, &LambdaConfig::default()).unwrap();
        assert_relative_eq!(est.lambda, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn dense_oracle_two_vertex_closed_form() {
        // one vertex carries the potential: [[1+1, -1], [-1, 1]] has λ = (3 − √5)/2
        let mut m = model(complete(2, 1.0, 1.0).unwrap(), 2.0, 0.0);
        m = m
            .with_potential(VertexFunction::new(vec![1.0, 0.0]).unwrap())
            .unwrap();
        let expected = (3.0 - 5.0_f64.sqrt()) / 2.0;
        assert_relative_eq!(dense_lambda_p2(&m).unwrap(), expected, epsilon = 1e-12);
        let est = estimate_lambda_p(&m, &LambdaConfig::default()).unwrap();
        assert_relative_eq!(est.lambda, expected, max_relative = 1e-8);
    }

    #[test]
    fn estimate_matches_dense_on_random_graph() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random_connected::<f64, _>(60, 40, (0.5, 2.0), (0.5, 3.0), &mut rng).unwrap();
        let m = model(g, 2.0, 0.7);
        let dense = dense_lambda_p2(&m).unwrap();
        let est = estimate_lambda_p(&m, &LambdaConfig::default()).unwrap();
        assert!((est.lambda - dense).abs() <= 1e-6 * dense);
    }

    #[test]
    fn estimate_bounded_below_by_potential() {
        for p in [1.5, 2.5, 3.0] {
            let m = model(grid(3, 3, 1.0, 1.0).unwrap(), p, 1.0);
            let est = estimate_lambda_p(&m, &LambdaConfig::default()).unwrap();
            assert!(est.lambda >= 1.0 - 1e-10, "p={p}: {}", est.lambda);
        }
    }

    #[test]
    fn dense_requires_p2() {
        let m = model(path(3, 1.0, 1.0).unwrap(), 3.0, 1.0);
        assert!(dense_lambda_p2(&m).is_err());
    }
}
