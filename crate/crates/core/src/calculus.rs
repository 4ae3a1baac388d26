//! Discrete gradients, integrals, norms, and the variational p-Laplacian.
//!
//! The gradient of `u` at `x` has one component per neighbor `y`,
//! `sqrt(w_xy / (2σ(x))) (u(y) − u(x))`, in stored neighbor order.
//!
//! `Δ_p u(x) = σ(x)⁻¹ Σ_y ½(|∇u|^{p−2}(x) + |∇u|^{p−2}(y)) w_xy (u(y) − u(x))`
//! is applied matrix-free. An edge with `u(y) = u(x)` contributes exactly zero,
//! so the factor `|∇u|^{p−2}` is never evaluated at a vanishing gradient.

use crate::error::{Error, Result};
use crate::function::VertexFunction;
use crate::graph::{DomainSubset, WeightedGraph};
use crate::par::{map_indices, sum_indices};
use crate::scalar::Scalar;

pub(crate) fn check_p<T: Scalar>(p: T) -> Result<()> {
    if p > T::one() && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p.as_f64()))
    }
}

fn check_fn<T: Scalar>(g: &WeightedGraph<T>, u: &VertexFunction<T>) -> Result<()> {
    u.check_len(g.n_vertices())
}

fn finite_or<T: Scalar>(v: T, x: usize) -> Result<T> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(x))
    }
}

/// `|∇u|(x)` computed with scaling so tiny differences do not underflow.
#[inline]
pub(crate) fn grad_norm_raw<T: Scalar>(g: &WeightedGraph<T>, u: &[T], x: usize) -> T {
    let two_sigma = T::lit(2.0) * g.measure(x);
    let ux = u[x];
    let mut scale = T::zero();
    for (y, w) in g.neighbors(x) {
        let c = ((w / two_sigma).sqrt() * (u[y] - ux)).abs();
        scale = scale.max(c);
    }
    if scale == T::zero() {
        return T::zero();
    }
    let mut acc = T::zero();
    for (y, w) in g.neighbors(x) {
        let c = (w / two_sigma).sqrt() * (u[y] - ux) / scale;
        acc = acc + c * c;
    }
    scale * acc.sqrt()
}

pub(crate) fn grad_norms_raw<T: Scalar>(g: &WeightedGraph<T>, u: &[T]) -> Vec<T> {
    map_indices(g.n_vertices(), |x| grad_norm_raw(g, u, x))
}

/// `|∇u|^{p−2}` per vertex; zero where the gradient vanishes (never used there).
pub(crate) fn flux_factors<T: Scalar>(norms: &[T], p: T) -> Vec<T> {
    let e = p - T::lit(2.0);
    norms
        .iter()
        .map(|&n| {
            if n > T::zero() {
                if e == T::zero() {
                    T::one()
                } else {
                    n.powf(e)
                }
            } else {
                T::zero()
            }
        })
        .collect()
}

pub(crate) fn p_laplacian_raw<T: Scalar>(g: &WeightedGraph<T>, u: &[T], p: T) -> Vec<T> {
    let factors = flux_factors(&grad_norms_raw(g, u), p);
    let half = T::lit(0.5);
    map_indices(g.n_vertices(), |x| {
        let ux = u[x];
        let mut acc = T::zero();
        for (y, w) in g.neighbors(x) {
            let d = u[y] - ux;
            if d != T::zero() {
                acc = acc + half * (factors[x] + factors[y]) * w * d;
            }
        }
        acc / g.measure(x)
    })
}

/// `∫ (|∇u|^p + ρ|u|^p) dσ` without validation.
pub(crate) fn hp_norm_pow_raw<T: Scalar>(g: &WeightedGraph<T>, u: &[T], rho: &[T], p: T) -> T {
    sum_indices(g.n_vertices(), |x| {
        let gn = grad_norm_raw(g, u, x);
        g.measure(x) * (gn.powf(p) + rho[x] * u[x].abs().powf(p))
    })
}

/// Gradient vector at `x` in stored neighbor order.
pub fn gradient_vector<T: Scalar>(
    g: &WeightedGraph<T>,
    u: &VertexFunction<T>,
    x: usize,
) -> Result<Vec<T>> {
    check_fn(g, u)?;
    g.check_vertex(x)?;
    let two_sigma = T::lit(2.0) * g.measure(x);
    Ok(g.neighbors(x)
        .map(|(y, w)| (w / two_sigma).sqrt() * (u[y] - u[x]))
        .collect())
}

/// `|∇u|(x) = ((2σ(x))⁻¹ Σ_y w_xy (u(y) − u(x))²)^{1/2}`.
pub fn grad_norm<T: Scalar>(g: &WeightedGraph<T>, u: &VertexFunction<T>, x: usize) -> Result<T> {
    check_fn(g, u)?;
    g.check_vertex(x)?;
    Ok(grad_norm_raw(g, u.as_slice(), x))
}

/// `|∇u|` at every vertex.
pub fn grad_norms<T: Scalar>(
    g: &WeightedGraph<T>,
    u: &VertexFunction<T>,
) -> Result<VertexFunction<T>> {
    check_fn(g, u)?;
    VertexFunction::new(grad_norms_raw(g, u.as_slice()))
}

/// `Σ σ(x) u(x)` in ascending vertex order.
pub fn integral<T: Scalar>(g: &WeightedGraph<T>, u: &VertexFunction<T>) -> Result<T> {
    check_fn(g, u)?;
    let s = sum_indices(g.n_vertices(), |x| g.measure(x) * u[x]);
    finite_or(s, 0)
}

/// Exponent of an `L^q` norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LqExponent<T> {
    Finite(T),
    Infinity,
}

pub fn lq_norm<T: Scalar>(
    g: &WeightedGraph<T>,
    u: &VertexFunction<T>,
    q: LqExponent<T>,
) -> Result<T> {
    check_fn(g, u)?;
    match q {
        LqExponent::Infinity => Ok(u.max_abs()),
        LqExponent::Finite(q) => {
            if !(q >= T::one()) {
                return Err(Error::InvalidLebesgueExponent(q.as_f64()));
            }
            let s = sum_indices(g.n_vertices(), |x| g.measure(x) * u[x].abs().powf(q));
            finite_or(s.powf(q.recip()), 0)
        }
    }
}

/// `∫ (|∇u|^p + ρ|u|^p) dσ`, the p-th power of the H_p norm.
pub fn hp_norm_pow<T: Scalar>(
    g: &WeightedGraph<T>,
    u: &VertexFunction<T>,
    rho: &VertexFunction<T>,
    p: T,
) -> Result<T> {
    check_p(p)?;
    check_fn(g, u)?;
    check_fn(g, rho)?;
    if let Some(x) = rho.iter().position(|&r| r < T::zero()) {
        return Err(Error::NegativePotential(x));
    }
    finite_or(hp_norm_pow_raw(g, u.as_slice(), rho.as_slice(), p), 0)
}

/// `(∫ (|∇u|^p + ρ|u|^p) dσ)^{1/p}`.
pub fn hp_norm<T: Scalar>(
    g: &WeightedGraph<T>,
    u: &VertexFunction<T>,
    rho: &VertexFunction<T>,
    p: T,
) -> Result<T> {
    Ok(hp_norm_pow(g, u, rho, p)?.powf(p.recip()))
}

/// `W^{1,p}` norm: the H_p norm with `ρ ≡ 1`.
pub fn w1p_norm<T: Scalar>(g: &WeightedGraph<T>, u: &VertexFunction<T>, p: T) -> Result<T> {
    hp_norm(
        g,
        u,
        &VertexFunction::constant(g.n_vertices(), T::one())?,
        p,
    )
}

/// `(∫_{Ω̄} |∇u|^p dσ + ∫_Ω b|u|^p dσ)^{1/p}` for `u` vanishing off `Ω`.
/// Gradients on `∂Ω` use the full host stencil with the zero extension.
pub fn omega_norm<T: Scalar>(
    g: &WeightedGraph<T>,
    domain: &DomainSubset,
    u: &VertexFunction<T>,
    b: &VertexFunction<T>,
    p: T,
) -> Result<T> {
    check_p(p)?;
    check_fn(g, u)?;
    check_fn(g, b)?;
    if let Some(x) = (0..g.n_vertices()).find(|&x| !domain.contains(x) && u[x] != T::zero()) {
        return Err(Error::Config(format!(
            "function is nonzero at vertex {x} outside the domain"
        )));
    }
    let us = u.as_slice();
    let grad_part = domain.closure().into_iter().fold(T::zero(), |acc, x| {
        acc + g.measure(x) * grad_norm_raw(g, us, x).powf(p)
    });
    let mass_part = domain.members().iter().fold(T::zero(), |acc, &x| {
        acc + g.measure(x) * b[x] * us[x].abs().powf(p)
    });
    finite_or((grad_part + mass_part).powf(p.recip()), 0)
}

/// Pointwise variational p-Laplacian.
pub fn p_laplacian<T: Scalar>(
    g: &WeightedGraph<T>,
    u: &VertexFunction<T>,
    p: T,
) -> Result<VertexFunction<T>> {
    check_p(p)?;
    check_fn(g, u)?;
    VertexFunction::new(p_laplacian_raw(g, u.as_slice(), p))
}

/// Both sides of `∫(Δ_p u) v dσ = −∫ |∇u|^{p−2} ∇u·∇v dσ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationByParts<T> {
    /// `∫ (Δ_p u) v dσ`
    pub laplacian_side: T,
    /// `∫ |∇u|^{p−2} ∇u·∇v dσ`
    pub gradient_side: T,
}

impl<T: Scalar> IntegrationByParts<T> {
    /// `|laplacian_side + gradient_side|`.
    pub fn residual(&self) -> T {
        (self.laplacian_side + self.gradient_side).abs()
    }

    /// Residual over `1 + |both sides|`.
    pub fn relative_residual(&self) -> T {
        self.residual() / (T::one() + self.laplacian_side.abs() + self.gradient_side.abs())
    }
}

/// Evaluates both sides of the integration-by-parts identity, with the
/// left side computed through the supplied Laplacian (normally
/// [`p_laplacian`]).
pub fn integration_by_parts_with<T: Scalar>(
    g: &WeightedGraph<T>,
    u: &VertexFunction<T>,
    v: &VertexFunction<T>,
    p: T,
    laplacian: impl Fn(&WeightedGraph<T>, &VertexFunction<T>, T) -> Result<VertexFunction<T>>,
) -> Result<IntegrationByParts<T>> {
    check_p(p)?;
    check_fn(g, u)?;
    check_fn(g, v)?;
    let lap = laplacian(g, u, p)?;
    let laplacian_side = sum_indices(g.n_vertices(), |x| g.measure(x) * lap[x] * v[x]);
    let factors = flux_factors(&grad_norms_raw(g, u.as_slice()), p);
    let gradient_side = sum_indices(g.n_vertices(), |x| {
        let two_sigma = T::lit(2.0) * g.measure(x);
        let mut dot = T::zero();
        for (y, w) in g.neighbors(x) {
            let du = u[y] - u[x];
            if du != T::zero() {
                dot = dot + w / two_sigma * du * (v[y] - v[x]);
            }
        }
        g.measure(x) * factors[x] * dot
    });
    Ok(IntegrationByParts {
        laplacian_side: finite_or(laplacian_side, 0)?,
        gradient_side: finite_or(gradient_side, 0)?,
    })
}

pub fn check_integration_by_parts<T: Scalar>(
    g: &WeightedGraph<T>,
    u: &VertexFunction<T>,
    v: &VertexFunction<T>,
    p: T,
) -> Result<IntegrationByParts<T>> {
    integration_by_parts_with(g, u, v, p, p_laplacian)
}
