//! Ground states: minimization of `J` over the Nehari manifold.
//!
//! Each seed is descended along the diagonally preconditioned negative
//! gradient with Barzilai–Borwein step proposals and Armijo backtracking;
//! every trial point is re-projected onto the manifold before its energy is
//! compared. Seeds are independent and may run in parallel.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::energy::EnergyModel;
use crate::error::{Error, Result};
use crate::function::VertexFunction;
use crate::nehari::project_parts;
use crate::par::sum_indices;
use crate::scalar::Scalar;

pub(crate) const ARMIJO_C: f64 = 1e-4;
pub(crate) const BACKTRACK: f64 = 0.5;
pub(crate) const MAX_BACKTRACKS: usize = 60;
pub(crate) const STEP_MIN: f64 = 1e-12;
pub(crate) const STEP_MAX: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig<T> {
    /// Pseudorandom nonnegative seeds.
    pub random_seeds: usize,
    /// Cap on δ-spike seeds, one per vertex class, lowest fiber energy first.
    pub max_spike_seeds: usize,
    pub max_iterations: usize,
    /// `ℓ∞` bound on the equation residual.
    pub tol_eq: T,
    /// Bound on `|⟨J′(u),u⟩| / (1 + ‖u‖^p)`.
    pub tol_n: T,
    /// Relative bracket width of every Nehari projection.
    pub projection_tol: T,
    pub rng_seed: u64,
    pub record_trace: bool,
}

impl<T: Scalar> Default for SolveConfig<T> {
    fn default() -> Self {
        let floor = T::epsilon() * T::lit(100.0);
        SolveConfig {
            random_seeds: 4,
            max_spike_seeds: 8,
            max_iterations: 50_000,
            tol_eq: T::lit(1e-8).max(floor),
            tol_n: T::lit(1e-10).max(floor),
            projection_tol: T::lit(1e-14).max(T::epsilon()),
            rng_seed: 0,
            record_trace: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedKind {
    Warm(usize),
    Spike(usize),
    Random(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry<T> {
    pub energy: T,
    pub grad_norm: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<T> {
    pub u: VertexFunction<T>,
    pub energy: T,
    /// `ℓ²` norm of the variation vector `σG`.
    pub grad_norm_dual: T,
    /// `ℓ∞` norm of `G` over the free vertices.
    pub equation_residual: T,
    /// `|⟨J′(u), u⟩|`.
    pub nehari_residual: T,
    pub iterations: usize,
    pub converged: bool,
    pub seed: SeedKind,
    /// Position of the winning seed in the evaluation order.
    pub seed_index: usize,
    pub trace: Vec<TraceEntry<T>>,
}

impl<T: Scalar> SolveResult<T> {
    /// Turns a non-converged result into [`Error::NoConvergence`].
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NoConvergence {
                best_energy: self.energy.as_f64(),
                best_residual: self.equation_residual.as_f64(),
            })
        }
    }
}

/// Fixed diagonal metric `W(x) + σ(x)(ρ(x) + 1)`.
pub(crate) fn metric<T: Scalar>(model: &EnergyModel<T>) -> Vec<T> {
    let g = model.graph();
    (0..g.n_vertices())
        .map(|x| g.weighted_degree(x) + g.measure(x) * (model.potential()[x] + T::one()))
        .collect()
}

pub(crate) fn apply_mask<T: Scalar>(v: &mut [T], mask: Option<&[bool]>) {
    if let Some(m) = mask {
        for (x, free) in v.iter_mut().zip(m) {
            if !free {
                *x = T::zero();
            }
        }
    }
}

pub(crate) fn masked_max_abs<T: Scalar>(v: &[T], mask: Option<&[bool]>) -> T {
    v.iter()
        .enumerate()
        .filter(|(x, _)| mask.is_none_or(|m| m[*x]))
        .fold(T::zero(), |a, (_, v)| a.max(v.abs()))
}

/// Projects `v` onto the Nehari manifold in place and returns `J(v)`.
pub(crate) fn project_in_place<T: Scalar>(
    model: &EnergyModel<T>,
    v: &mut [T],
    tol: T,
) -> Option<T> {
    let up: Vec<T> = v.iter().map(|s| s.max(T::zero())).collect();
    if up.iter().all(|s| *s == T::zero()) {
        return None;
    }
    let np = model.norm_pow_raw(v);
    if !(np > T::zero()) || !np.is_finite() {
        return None;
    }
    let (t0, _, _) = project_parts(model, &up, np, tol).ok()?;
    for s in v.iter_mut() {
        *s = *s * t0;
    }
    let e = model.energy_raw(v);
    e.is_finite().then_some(e)
}

struct SeedOutcome<T> {
    u: Vec<T>,
    energy: T,
    grad: Vec<T>,
    iterations: usize,
    converged: bool,
    trace: Vec<TraceEntry<T>>,
}

fn dual_norm<T: Scalar>(model: &EnergyModel<T>, grad: &[T], mask: Option<&[bool]>) -> T {
    let g = model.graph();
    sum_indices(grad.len(), |x| {
        if mask.is_none_or(|m| m[x]) {
            let v = g.measure(x) * grad[x];
            v * v
        } else {
            T::zero()
        }
    })
    .sqrt()
}

fn relative_nehari<T: Scalar>(model: &EnergyModel<T>, u: &[T]) -> T {
    let np = model.norm_pow_raw(u);
    (np - model.flux_integral_raw(u)).abs() / (T::one() + np)
}

fn descend<T: Scalar>(
    model: &EnergyModel<T>,
    metric: &[T],
    mut u: Vec<T>,
    cfg: &SolveConfig<T>,
    mask: Option<&[bool]>,
) -> Option<SeedOutcome<T>> {
    let g = model.graph();
    let n = g.n_vertices();
    apply_mask(&mut u, mask);
    let mut energy = project_in_place(model, &mut u, cfg.projection_tol)?;
    let mut grad = model.gradient_raw(&u);
    let c = T::lit(ARMIJO_C);
    let shrink = T::lit(BACKTRACK);
    let slack = T::epsilon() * T::lit(8.0);
    let mut alpha = T::one();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    loop {
        let res = masked_max_abs(&grad, mask);
        if cfg.record_trace {
            trace.push(TraceEntry {
                energy,
                grad_norm: dual_norm(model, &grad, mask),
            });
        }
        if res <= cfg.tol_eq && relative_nehari(model, &u) <= cfg.tol_n {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iterations {
            break;
        }
        iterations += 1;
        let mut d: Vec<T> = (0..n)
            .map(|x| -g.measure(x) * grad[x] / metric[x])
            .collect();
        apply_mask(&mut d, mask);
        let slope = sum_indices(n, |x| g.measure(x) * grad[x] * d[x]);
        let mut step = alpha;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let mut v: Vec<T> = u.iter().zip(&d).map(|(a, b)| *a + step * *b).collect();
            if let Some(ev) = project_in_place(model, &mut v, cfg.projection_tol) {
                if ev <= energy + c * step * slope + slack * energy.abs() {
                    accepted = Some((v, ev));
                    break;
                }
            }
            step = step * shrink;
        }
        let Some((v, ev)) = accepted else { break };
        let new_grad = model.gradient_raw(&v);
        let (mut sms, mut sy) = (T::zero(), T::zero());
        for x in 0..n {
            if mask.is_some_and(|m| !m[x]) {
                continue;
            }
            let s = v[x] - u[x];
            sms = sms + metric[x] * s * s;
            sy = sy + s * g.measure(x) * (new_grad[x] - grad[x]);
        }
        alpha = if sy > T::zero() && sms > T::zero() {
            sms / sy
        } else {
            step * T::lit(4.0)
        };
        alpha = alpha.max(T::lit(STEP_MIN)).min(T::lit(STEP_MAX));
        u = v;
        energy = ev;
        grad = new_grad;
    }
    Some(SeedOutcome {
        u,
        energy,
        grad,
        iterations,
        converged,
        trace,
    })
}

/// Representative vertex of every class of locally indistinguishable
/// vertices (degree, measure, potential, sorted incident weights and
/// nonlinearity coefficients), lowest index first.
pub fn vertex_classes<T: Scalar>(model: &EnergyModel<T>) -> Vec<usize> {
    let g = model.graph();
    let mut seen = BTreeMap::new();
    for x in 0..g.n_vertices() {
        let mut key = vec![
            g.degree(x) as u64,
            g.measure(x).as_f64().to_bits(),
            model.potential()[x].as_f64().to_bits(),
        ];
        let mut ws: Vec<u64> = g
            .neighbor_weights(x)
            .iter()
            .map(|w| w.as_f64().to_bits())
            .collect();
        ws.sort_unstable();
        key.extend(ws);
        for t in model.nonlinearity().terms() {
            key.push(t.exponent.as_f64().to_bits());
            key.push(t.coefficient.at(x).as_f64().to_bits());
        }
        seen.entry(key).or_insert(x);
    }
    let mut reps: Vec<usize> = seen.into_values().collect();
    reps.sort_unstable();
    reps
}

/// δ-spike seeds on free vertices, one per class, ordered by fiber energy.
pub fn spike_seeds<T: Scalar>(
    model: &EnergyModel<T>,
    limit: usize,
    mask: Option<&[bool]>,
    tol: T,
) -> Vec<usize> {
    let n = model.n_vertices();
    let mut ranked: Vec<(T, usize)> = vertex_classes(model)
        .into_iter()
        .filter(|x| mask.is_none_or(|m| m[*x]))
        .filter_map(|x| {
            let mut v = vec![T::zero(); n];
            v[x] = T::one();
            project_in_place(model, &mut v, tol).map(|e| (e, x))
        })
        .collect();
    ranked.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
    ranked.into_iter().take(limit).map(|(_, x)| x).collect()
}

fn random_seed<T: Scalar>(n: usize, rng_seed: u64, k: usize, mask: Option<&[bool]>) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(k as u64 + 1);
    let mut v: Vec<T> = (0..n).map(|_| T::lit(rng.gen_range(0.05..1.0))).collect();
    apply_mask(&mut v, mask);
    v
}

pub fn ground_state_solve<T: Scalar>(
    model: &EnergyModel<T>,
    cfg: &SolveConfig<T>,
) -> Result<SolveResult<T>> {
    ground_state_solve_with(model, cfg, &[], None)
}

/// Ground-state solve with caller-supplied warm seeds (tried first) and an
/// optional mask; masked-out vertices are pinned to zero and excluded from
/// the residual.
pub fn ground_state_solve_with<T: Scalar>(
    model: &EnergyModel<T>,
    cfg: &SolveConfig<T>,
    warm: &[VertexFunction<T>],
    mask: Option<&[bool]>,
) -> Result<SolveResult<T>> {
    let n = model.n_vertices();
    if let Some(m) = mask {
        if m.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: m.len(),
            });
        }
        if !m.iter().any(|f| *f) {
            return Err(Error::EmptyVertexSet);
        }
    }
    let mut seeds: Vec<(SeedKind, Vec<T>)> = Vec::new();
    for (k, w) in warm.iter().enumerate() {
        w.check_len(n)?;
        let mut v = w.as_slice().to_vec();
        apply_mask(&mut v, mask);
        if v.iter().all(|s| *s <= T::zero()) {
            return Err(Error::NoPositivePart);
        }
        seeds.push((SeedKind::Warm(k), v));
    }
    for x in spike_seeds(model, cfg.max_spike_seeds, mask, cfg.projection_tol) {
        let mut v = vec![T::zero(); n];
        v[x] = T::one();
        seeds.push((SeedKind::Spike(x), v));
    }
    for k in 0..cfg.random_seeds {
        seeds.push((SeedKind::Random(k), random_seed(n, cfg.rng_seed, k, mask)));
    }
    if seeds.is_empty() {
        return Err(Error::Config("solver needs at least one seed".into()));
    }
    let metric = metric(model);
    let outcomes: Vec<Option<SeedOutcome<T>>> = seeds
        .par_iter()
        .map(|(_, s)| descend(model, &metric, s.clone(), cfg, mask))
        .collect();
    let mut best: Option<(usize, SeedOutcome<T>)> = None;
    for (i, out) in outcomes.into_iter().enumerate() {
        let Some(out) = out else { continue };
        let better = match &best {
            None => true,
            Some((_, b)) => {
                (out.converged && !b.converged)
                    || (out.converged == b.converged && out.energy < b.energy)
            }
        };
        if better {
            best = Some((i, out));
        }
    }
    let (i, out) = best.ok_or(Error::NoPositivePart)?;
    let equation_residual = masked_max_abs(&out.grad, mask);
    let grad_norm_dual = dual_norm(model, &out.grad, mask);
    let nehari_residual = (model.norm_pow_raw(&out.u) - model.flux_integral_raw(&out.u)).abs();
    Ok(SolveResult {
        u: VertexFunction::new(out.u)?,
        energy: out.energy,
        grad_norm_dual,
        equation_residual,
        nehari_residual,
        iterations: out.iterations,
        converged: out.converged,
        seed: seeds[i].0,
        seed_index: i,
        trace: out.trace,
    })
}
