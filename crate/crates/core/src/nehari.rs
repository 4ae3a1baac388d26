//! Fibering maps and the Nehari manifold `N = { u ≠ 0 : ⟨J′(u), u⟩ = 0 }`.
//!
//! Along a ray, `d/dt J(tu) = t^{p−1} (‖u‖^p − γ_u(t))` with
//! `γ_u(t) = t^{1−p} ∫ ψ(x, t u⁺) u⁺ dσ` strictly increasing, so every `u`
//! with `u⁺ ≢ 0` has exactly one `t₀ > 0` with `t₀ u ∈ N`, and `t₀` maximizes
//! `t ↦ J(tu)`.

use crate::energy::EnergyModel;
use crate::error::{Error, Result};
use crate::function::VertexFunction;
use crate::graph::WeightedGraph;
use crate::par::sum_indices;
use crate::scalar::Scalar;

/// Bracket growth factor of the root search.
const BRACKET_FACTOR: f64 = 4.0;
const MAX_EXPANSIONS: usize = 400;
const MAX_BISECTIONS: usize = 400;

fn gamma_raw<T: Scalar>(model: &EnergyModel<T>, u_plus: &[T], t: T) -> T {
    let g = model.graph();
    let nl = model.nonlinearity();
    let s = sum_indices(g.n_vertices(), |x| {
        let v = u_plus[x];
        if v > T::zero() {
            g.measure(x) * nl.psi(x, t * v) * v
        } else {
            T::zero()
        }
    });
    s / t.powf(model.p() - T::one())
}

/// `γ_u(t)`.
pub fn gamma<T: Scalar>(model: &EnergyModel<T>, u: &VertexFunction<T>, t: T) -> Result<T> {
    u.check_len(model.n_vertices())?;
    if !(t > T::zero()) {
        return Err(Error::NonPositiveScale(t.as_f64()));
    }
    let up = u.positive_part();
    if up.is_zero() {
        return Err(Error::NoPositivePart);
    }
    Ok(gamma_raw(model, up.as_slice(), t))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NehariProjection<T> {
    pub t0: T,
    /// `J(t₀ u)`.
    pub fiber_energy: T,
    /// Final bisection bracket around `t₀`.
    pub bracket: (T, T),
    /// `|⟨J′(t₀u), t₀u⟩|`.
    pub residual: T,
    /// `(t, ‖u‖^p − γ_u(t))` at every bracket-expansion sample, in visiting order.
    pub expansion: Vec<(T, T)>,
}

impl<T: Scalar> NehariProjection<T> {
    /// Number of sign changes of `‖u‖^p − γ_u` over the expansion samples
    /// sorted by `t`. Exactly one for a valid bracket.
    pub fn sign_changes(&self) -> usize {
        let mut samples = self.expansion.clone();
        samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        samples
            .windows(2)
            .filter(|w| (w[0].1 > T::zero()) != (w[1].1 > T::zero()))
            .count()
    }
}

/// `(t₀, bracket, expansion samples)`.
pub(crate) type ProjectionParts<T> = (T, (T, T), Vec<(T, T)>);

/// Root of `‖u‖^p = γ_u(t)` on `u_plus` with `norm_pow = ‖u‖^p > 0`.
pub(crate) fn project_parts<T: Scalar>(
    model: &EnergyModel<T>,
    u_plus: &[T],
    norm_pow: T,
    tol: T,
) -> Result<ProjectionParts<T>> {
    let f = |t: T| norm_pow - gamma_raw(model, u_plus, t);
    let factor = T::lit(BRACKET_FACTOR);
    let mut expansion = Vec::new();
    let f1 = f(T::one());
    expansion.push((T::one(), f1));
    if f1 == T::zero() {
        return Ok((T::one(), (T::one(), T::one()), expansion));
    }
    let (mut lo, mut hi) = if f1 > T::zero() {
        // γ too small: grow t
        let mut lo = T::one();
        let mut hi = factor;
        let mut k = 0;
        loop {
            let fh = f(hi);
            expansion.push((hi, fh));
            if !(fh > T::zero()) {
                break;
            }
            lo = hi;
            hi = hi * factor;
            k += 1;
            if k > MAX_EXPANSIONS || !hi.is_finite() {
                return Err(Error::Overflow);
            }
        }
        (lo, hi)
    } else {
        let mut hi = T::one();
        let mut lo = hi / factor;
        let mut k = 0;
        loop {
            let fl = f(lo);
            expansion.push((lo, fl));
            if fl > T::zero() {
                break;
            }
            hi = lo;
            lo = lo / factor;
            k += 1;
            if k > MAX_EXPANSIONS || lo == T::zero() {
                return Err(Error::Overflow);
            }
        }
        (lo, hi)
    };
    let two = T::lit(2.0);
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= tol * hi {
            break;
        }
        let mid = lo + (hi - lo) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == T::zero() {
            lo = mid;
            hi = mid;
            break;
        }
        if fm > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + (hi - lo) / two, (lo, hi), expansion))
}

/// Scale `t₀` placing `t₀ u` on the Nehari manifold, found by geometric
/// bracketing and bisection to relative width `tol`.
pub fn nehari_project<T: Scalar>(
    model: &EnergyModel<T>,
    u: &VertexFunction<T>,
    tol: T,
) -> Result<NehariProjection<T>> {
    u.check_len(model.n_vertices())?;
    let up = u.positive_part();
    if up.is_zero() {
        return Err(Error::NoPositivePart);
    }
    let norm_pow = model.norm_pow(u)?;
    if !(norm_pow > T::zero()) {
        return Err(Error::ZeroNorm);
    }
    let (t0, bracket, expansion) = project_parts(model, up.as_slice(), norm_pow, tol)?;
    let v = u.scaled(t0)?;
    let fiber_energy = model.energy(&v)?;
    let residual = model.nehari_functional(&v)?.abs();
    Ok(NehariProjection {
        t0,
        fiber_energy,
        bracket,
        residual,
        expansion,
    })
}

/// Outcome of the sign dichotomy check: a solution is either strictly
/// positive everywhere or identically zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Positivity<T> {
    StrictlyPositive { min: T },
    Trivial,
    DichotomyViolation { vertex: usize, value: T },
}

impl<T> Positivity<T> {
    pub fn holds(&self) -> bool {
        !matches!(self, Positivity::DichotomyViolation { .. })
    }
}

/// `min u > strict_tol` or `|u| ≤ strict_tol` everywhere; anything else is a
/// violation, reported at the smallest vertex value.
pub fn verify_positivity<T: Scalar>(
    g: &WeightedGraph<T>,
    u: &VertexFunction<T>,
    strict_tol: T,
) -> Result<Positivity<T>> {
    u.check_len(g.n_vertices())?;
    if u.max_abs() <= strict_tol {
        return Ok(Positivity::Trivial);
    }
    let (vertex, value) = u
        .iter()
        .copied()
        .enumerate()
        .fold(
            (0, T::infinity()),
            |best, (x, v)| if v < best.1 { (x, v) } else { best },
        );
    if value > strict_tol {
        Ok(Positivity::StrictlyPositive { min: value })
    } else {
        Ok(Positivity::DichotomyViolation { vertex, value })
    }
}

/// Search grid for [`brute_force_ground_state`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForceGrid<T> {
    /// Vertex values range over `[0, max]`.
    pub max: T,
    pub step: T,
    /// Successive ten-fold local refinements around the best point.
    pub refine_levels: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceResult<T> {
    /// Minimizer, already projected onto the Nehari manifold.
    pub u: VertexFunction<T>,
    pub m: T,
    pub evaluated: usize,
}

pub const BRUTE_FORCE_MAX_VERTICES: usize = 4;
const BRUTE_FORCE_MAX_POINTS: usize = 50_000_000;

/// Exhaustive minimization of the fiber maximum `J(t₀u)` over nonnegative
/// grid vectors. The fiber maximum is constant along rays, so the scan covers
/// the outer faces `{max_i u_i = max}` of the cube, which meet every ray
/// through the grid.
pub fn brute_force_ground_state<T: Scalar>(
    model: &EnergyModel<T>,
    grid: BruteForceGrid<T>,
) -> Result<BruteForceResult<T>> {
    let n = model.n_vertices();
    if n > BRUTE_FORCE_MAX_VERTICES {
        return Err(Error::GraphTooLarge {
            n,
            limit: BRUTE_FORCE_MAX_VERTICES,
        });
    }
    if !(grid.step > T::zero()) || !(grid.max >= grid.step) {
        return Err(Error::Config("grid needs 0 < step <= max".into()));
    }
    let ticks = (grid.max / grid.step)
        .round()
        .to_usize()
        .unwrap_or(usize::MAX);
    let per_face = (ticks + 1).checked_pow(n as u32 - 1).unwrap_or(usize::MAX);
    if per_face.saturating_mul(n) > BRUTE_FORCE_MAX_POINTS {
        return Err(Error::Config(format!(
            "grid has more than {BRUTE_FORCE_MAX_POINTS} points"
        )));
    }
    let tol = T::epsilon() * T::lit(16.0);
    let fiber = |vals: &[T]| -> Option<T> {
        let u = VertexFunction::new(vals.to_vec()).ok()?;
        nehari_project(model, &u, tol).ok().map(|p| p.fiber_energy)
    };
    let mut best: Option<(T, Vec<T>)> = None;
    let mut evaluated = 0;
    let consider = |vals: &[T], best: &mut Option<(T, Vec<T>)>| {
        if let Some(e) = fiber(vals) {
            if best.as_ref().is_none_or(|(b, _)| e < *b) {
                *best = Some((e, vals.to_vec()));
            }
        }
    };
    let mut vals = vec![T::zero(); n];
    for face in 0..n {
        for idx in 0..per_face {
            let mut rem = idx;
            for (i, v) in vals.iter_mut().enumerate() {
                if i == face {
                    *v = grid.max;
                } else {
                    *v = T::from_count(rem % (ticks + 1)) * grid.step;
                    rem /= ticks + 1;
                }
            }
            consider(&vals, &mut best);
            evaluated += 1;
        }
    }
    let mut step = grid.step;
    for _ in 0..grid.refine_levels {
        let Some((_, center)) = best.clone() else {
            break;
        };
        step = step / T::lit(10.0);
        let width = 21usize;
        let total = width.pow(n as u32);
        for idx in 0..total {
            let mut rem = idx;
            for (i, v) in vals.iter_mut().enumerate() {
                let k = T::from_count(rem % width) - T::lit(10.0);
                rem /= width;
                *v = (center[i] + k * step).max(T::zero());
            }
            consider(&vals, &mut best);
            evaluated += 1;
        }
    }
    let (_, arg) = best.ok_or(Error::NoPositivePart)?;
    let u = VertexFunction::new(arg)?;
    let proj = nehari_project(model, &u, tol)?;
    Ok(BruteForceResult {
        u: u.scaled(proj.t0)?,
        m: proj.fiber_energy,
        evaluated,
    })
}
