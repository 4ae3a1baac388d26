//! Mountain-pass critical points.
//!
//! A discrete path from `0` to a negative-energy endpoint is deformed by
//! repeatedly lowering its highest interior node. The highest node is first
//! pushed onto the ridge by maximizing `J` along the local chord of the
//! path, then moved downhill within the chord-orthogonal complement; every
//! trial point is maximized along the chord again before Armijo compares it.
//! At a fixed point both the chord derivative and the orthogonal gradient
//! vanish, so the node is a critical point of `J`.

use rayon::prelude::*;

use crate::energy::EnergyModel;
use crate::error::{Error, Result};
use crate::function::VertexFunction;
use crate::par::sum_indices;
use crate::scalar::Scalar;
use crate::solver::{
    metric, vertex_classes, SeedKind, SolveResult, TraceEntry, ARMIJO_C, BACKTRACK, MAX_BACKTRACKS,
    STEP_MAX, STEP_MIN,
};

const ENDPOINT_LEVEL: f64 = -1.0;
const SPIKE_PROBE: f64 = 4.0;
const TENSION: f64 = 0.5;
const COLLAPSE_DIST: f64 = 1e-14;
const MAX_RESPACINGS: usize = 3;
const MAX_DOUBLINGS: usize = 200;

/// Doubles `t` from 1 until `J(t·direction) < −1`.
pub fn find_negative_endpoint<T: Scalar>(
    model: &EnergyModel<T>,
    direction: &VertexFunction<T>,
) -> Result<(T, VertexFunction<T>)> {
    direction.check_len(model.n_vertices())?;
    if direction.positive_part().is_zero() {
        return Err(Error::NoPositivePart);
    }
    let level = T::lit(ENDPOINT_LEVEL);
    let mut t = T::one();
    for _ in 0..MAX_DOUBLINGS {
        let e = direction.scaled(t)?;
        if model.energy(&e)? < level {
            return Ok((t, e));
        }
        t = t + t;
        if !t.is_finite() {
            break;
        }
    }
    Err(Error::Overflow)
}

/// Vertex whose spike has the lowest `J(4δ_x)`, lowest index on ties.
pub fn best_spike<T: Scalar>(model: &EnergyModel<T>) -> Result<usize> {
    let n = model.n_vertices();
    let mut best: Option<(T, usize)> = None;
    for x in vertex_classes(model) {
        let mut v = VertexFunction::zeros(n).into_vec();
        v[x] = T::lit(SPIKE_PROBE);
        let e = model.energy(&VertexFunction::new(v)?)?;
        if best.is_none_or(|(b, _)| e < b) {
            best = Some((e, x));
        }
    }
    best.map(|(_, x)| x).ok_or(Error::EmptyVertexSet)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MountainPassPath<T> {
    pub nodes: Vec<VertexFunction<T>>,
    pub energies: Vec<T>,
    pub max_index: usize,
}

impl<T: Scalar> MountainPassPath<T> {
    fn from_nodes(model: &EnergyModel<T>, nodes: Vec<Vec<T>>) -> Result<Self> {
        let energies: Vec<T> = nodes.par_iter().map(|u| model.energy_raw(u)).collect();
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::Overflow);
        }
        let nodes = nodes
            .into_iter()
            .map(VertexFunction::new)
            .collect::<Result<Vec<_>>>()?;
        let max_index = interior_argmax(&energies);
        Ok(MountainPassPath {
            nodes,
            energies,
            max_index,
        })
    }

    /// Straight segment `i/N · e` for `i = 0..=N`.
    pub fn linear(
        model: &EnergyModel<T>,
        endpoint: &VertexFunction<T>,
        segments: usize,
    ) -> Result<Self> {
        endpoint.check_len(model.n_vertices())?;
        let nodes = (0..=segments)
            .map(|i| {
                let t = T::from_count(i) / T::from_count(segments);
                endpoint.iter().map(|v| t * *v).collect()
            })
            .collect();
        Self::from_nodes(model, nodes)
    }

    pub fn max_energy(&self) -> T {
        self.energies[self.max_index]
    }

    /// Checks the endpoint conditions and recomputes every energy.
    pub fn validate(&self, model: &EnergyModel<T>) -> Result<()> {
        let first = self.nodes.first().ok_or(Error::PathCollapse)?;
        let last = self.nodes.last().ok_or(Error::PathCollapse)?;
        if !first.is_zero() || !(model.energy(last)? < T::zero()) {
            return Err(Error::InvalidGraph(
                "path must run from 0 to a negative-energy endpoint".into(),
            ));
        }
        for (u, e) in self.nodes.iter().zip(&self.energies) {
            if model.energy(u)? != *e {
                return Err(Error::InvalidGraph("stale path energy".into()));
            }
        }
        Ok(())
    }
}

fn interior_argmax<T: Scalar>(energies: &[T]) -> usize {
    let last = energies.len() - 1;
    (1..last).fold(1, |k, i| if energies[i] > energies[k] { i } else { k })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpaConfig<T> {
    /// Path segments `N`; the path has `N + 1` nodes.
    pub segments: usize,
    pub max_iterations: usize,
    pub tol_eq: T,
    /// Endpoint direction; defaults to the best δ-spike.
    pub endpoint: Option<VertexFunction<T>>,
    pub record_trace: bool,
}

impl<T: Scalar> Default for MpaConfig<T> {
    fn default() -> Self {
        MpaConfig {
            segments: 32,
            max_iterations: 50_000,
            tol_eq: T::lit(1e-8).max(T::epsilon() * T::lit(100.0)),
            endpoint: None,
            record_trace: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpaOutcome<T> {
    pub result: SolveResult<T>,
    pub path: MountainPassPath<T>,
    /// Path maximum `(before, after)` every accepted step, where "before" is
    /// measured once the highest node sits on the chord ridge. Armijo admits
    /// an `8ε|J|` rounding allowance, so `after ≤ before` holds to that slack.
    pub max_history: Vec<(T, T)>,
    pub respacings: usize,
}

fn chord_slope<T: Scalar>(model: &EnergyModel<T>, u: &[T], tau: &[T], s: T) -> T {
    let g = model.graph();
    let v: Vec<T> = u.iter().zip(tau).map(|(a, b)| *a + s * *b).collect();
    let gr = model.gradient_raw(&v);
    sum_indices(u.len(), |x| g.measure(x) * gr[x] * tau[x])
}

/// Maximizes `s ↦ J(u + sτ)` near `s = 0` by bracketing a `+ → −` sign change
/// of the derivative and bisecting.
fn line_max<T: Scalar>(model: &EnergyModel<T>, u: &[T], tau: &[T]) -> Option<(Vec<T>, T)> {
    let d0 = chord_slope(model, u, tau, T::zero());
    let s = if d0 == T::zero() {
        T::zero()
    } else {
        let dir = if d0 > T::zero() { T::one() } else { -T::one() };
        let mut near = T::zero();
        let mut h = T::lit(1.0 / 16.0);
        let mut far = None;
        for _ in 0..64 {
            let d = chord_slope(model, u, tau, dir * h);
            if !d.is_finite() {
                return None;
            }
            if (d > T::zero()) != (d0 > T::zero()) || d == T::zero() {
                far = Some(h);
                break;
            }
            near = h;
            h = h + h;
        }
        let mut hi = far?;
        let mut lo = near;
        let two = T::lit(2.0);
        for _ in 0..200 {
            let mid = lo + (hi - lo) / two;
            if mid <= lo || mid >= hi {
                break;
            }
            let d = chord_slope(model, u, tau, dir * mid);
            if d == T::zero() {
                lo = mid;
                hi = mid;
                break;
            }
            if (d > T::zero()) == (d0 > T::zero()) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        dir * (lo + (hi - lo) / two)
    };
    let v: Vec<T> = u.iter().zip(tau).map(|(a, b)| *a + s * *b).collect();
    let e = model.energy_raw(&v);
    e.is_finite().then_some((v, e))
}

fn max_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()))
}

/// Re-spaces the nodes uniformly along the polygonal path.
fn respace<T: Scalar>(nodes: &[Vec<T>]) -> Vec<Vec<T>> {
    let seg: Vec<T> = nodes
        .windows(2)
        .map(|w| {
            w[0].iter()
                .zip(&w[1])
                .fold(T::zero(), |a, (x, y)| a + (*x - *y) * (*x - *y))
                .sqrt()
        })
        .collect();
    let total = seg.iter().fold(T::zero(), |a, b| a + *b);
    let n = nodes.len() - 1;
    let mut out = vec![nodes[0].clone()];
    let mut j = 0;
    let mut acc = T::zero();
    for i in 1..n {
        let target = total * T::from_count(i) / T::from_count(n);
        while j < n - 1 && acc + seg[j] < target {
            acc = acc + seg[j];
            j += 1;
        }
        let f = if seg[j] > T::zero() {
            ((target - acc) / seg[j]).min(T::one()).max(T::zero())
        } else {
            T::zero()
        };
        out.push(
            nodes[j]
                .iter()
                .zip(&nodes[j + 1])
                .map(|(a, b)| *a + f * (*b - *a))
                .collect(),
        );
    }
    out.push(nodes[n].clone());
    out
}

pub fn mpa_solve<T: Scalar>(model: &EnergyModel<T>, cfg: &MpaConfig<T>) -> Result<MpaOutcome<T>> {
    if cfg.segments < 8 {
        return Err(Error::Config(format!(
            "mountain pass needs at least 8 segments (got {})",
            cfg.segments
        )));
    }
    let n = model.n_vertices();
    let g = model.graph();
    let (seed, direction) = match &cfg.endpoint {
        Some(d) => (SeedKind::Warm(0), d.clone()),
        None => {
            let x = best_spike(model)?;
            let mut v = vec![T::zero(); n];
            v[x] = T::one();
            (SeedKind::Spike(x), VertexFunction::new(v)?)
        }
    };
    let (_, endpoint) = find_negative_endpoint(model, &direction)?;
    let init = MountainPassPath::linear(model, &endpoint, cfg.segments)?;
    let mut nodes: Vec<Vec<T>> = init
        .nodes
        .into_iter()
        .map(VertexFunction::into_vec)
        .collect();
    let mut energies = init.energies;
    let metric = metric(model);
    let c = T::lit(ARMIJO_C);
    let shrink = T::lit(BACKTRACK);
    let slack = T::epsilon() * T::lit(8.0);
    let mut alpha = T::one();
    let mut last_k = usize::MAX;
    let mut trace = Vec::new();
    let mut max_history = Vec::new();
    let mut respacings = 0;
    let mut iterations = 0;
    let mut converged = false;
    let mut grad;
    let mut k;
    loop {
        k = interior_argmax(&energies);
        if k != last_k {
            alpha = T::one();
            last_k = k;
        }
        let tau: Vec<T> = nodes[k + 1]
            .iter()
            .zip(&nodes[k - 1])
            .map(|(a, b)| *a - *b)
            .collect();
        if let Some((v, e)) = line_max(model, &nodes[k], &tau) {
            nodes[k] = v;
            energies[k] = e;
        }
        let u = nodes[k].clone();
        let eu = energies[k];
        grad = model.gradient_raw(&u);
        let res = grad.iter().fold(T::zero(), |a, v| a.max(v.abs()));
        if cfg.record_trace {
            let dn = sum_indices(n, |x| (g.measure(x) * grad[x]).powi(2)).sqrt();
            trace.push(TraceEntry {
                energy: eu,
                grad_norm: dn,
            });
        }
        if res <= cfg.tol_eq {
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
        let tmt = sum_indices(n, |x| metric[x] * tau[x] * tau[x]);
        if tmt > T::zero() {
            let proj = sum_indices(n, |x| metric[x] * tau[x] * d[x]) / tmt;
            for x in 0..n {
                d[x] = d[x] - proj * tau[x];
            }
        }
        let slope = sum_indices(n, |x| g.measure(x) * grad[x] * d[x]);
        let mut accepted = None;
        if slope < T::zero() {
            let mut step = alpha;
            for _ in 0..MAX_BACKTRACKS {
                let trial: Vec<T> = u.iter().zip(&d).map(|(a, b)| *a + step * *b).collect();
                if let Some((v, ev)) = line_max(model, &trial, &tau) {
                    if ev <= eu + c * step * slope + slack * eu.abs() {
                        accepted = Some((v, ev, step));
                        break;
                    }
                }
                step = step * shrink;
            }
        }
        if accepted.is_none() {
            // plain preconditioned descent without the chord maximization
            let d: Vec<T> = (0..n)
                .map(|x| -g.measure(x) * grad[x] / metric[x])
                .collect();
            let slope = sum_indices(n, |x| g.measure(x) * grad[x] * d[x]);
            let mut step = alpha;
            for _ in 0..MAX_BACKTRACKS {
                let v: Vec<T> = u.iter().zip(&d).map(|(a, b)| *a + step * *b).collect();
                let ev = model.energy_raw(&v);
                if ev.is_finite() && ev <= eu + c * step * slope + slack * eu.abs() {
                    accepted = Some((v, ev, step));
                    break;
                }
                step = step * shrink;
            }
        }
        let Some((v, ev, step)) = accepted else { break };
        let new_grad = model.gradient_raw(&v);
        let (mut sms, mut sy) = (T::zero(), T::zero());
        for x in 0..n {
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
        nodes[k] = v;
        energies[k] = ev;
        let ceiling = energies[1..cfg.segments]
            .iter()
            .fold(T::neg_infinity(), |a, b| a.max(*b));
        for j in [k - 1, k + 1] {
            if j == 0 || j == cfg.segments {
                continue;
            }
            let cand: Vec<T> = (0..n)
                .map(|x| {
                    let mid = (nodes[j - 1][x] + nodes[j + 1][x]) / T::lit(2.0);
                    nodes[j][x] + T::lit(TENSION) * (mid - nodes[j][x])
                })
                .collect();
            let e = model.energy_raw(&cand);
            if e.is_finite() && e <= ceiling {
                nodes[j] = cand;
                energies[j] = e;
            }
        }
        max_history.push((eu, ceiling));
        let collapsed = nodes
            .windows(2)
            .any(|w| max_dist(&w[0], &w[1]) < T::lit(COLLAPSE_DIST));
        if collapsed {
            respacings += 1;
            if respacings > MAX_RESPACINGS {
                return Err(Error::PathCollapse);
            }
            nodes = respace(&nodes);
            energies = nodes.par_iter().map(|u| model.energy_raw(u)).collect();
            last_k = usize::MAX;
        }
    }
    let u = nodes[k].clone();
    let energy = energies[k];
    let nehari_residual = (model.norm_pow_raw(&u) - model.flux_integral_raw(&u)).abs();
    let equation_residual = grad.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    let grad_norm_dual = sum_indices(n, |x| (g.measure(x) * grad[x]).powi(2)).sqrt();
    let path = MountainPassPath::from_nodes(model, nodes)?;
    Ok(MpaOutcome {
        result: SolveResult {
            u: VertexFunction::new(u)?,
            energy,
            grad_norm_dual,
            equation_residual,
            nehari_residual,
            iterations,
            converged,
            seed,
            seed_index: 0,
            trace,
        },
        path,
        max_history,
        respacings,
    })
}
