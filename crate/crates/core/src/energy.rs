//! The energy functional
//! `J(u) = (1/p) ∫ (|∇u|^p + ρ|u|^p) dσ − ∫ Ψ(x, u⁺) dσ`
//! and its first variation.

use std::sync::Arc;

use crate::calculus::{check_p, hp_norm_pow_raw, p_laplacian_raw};
use crate::error::{Error, Result};
use crate::function::VertexFunction;
use crate::graph::{validate_connectivity, WeightedGraph};
use crate::nonlinearity::Nonlinearity;
use crate::par::{map_indices, sum_indices};
use crate::scalar::{signed_pow, Scalar};

/// Graph, exponent, potential, and nonlinearity of one equation
/// `−Δ_p u + ρ|u|^{p−2}u = ψ(x, u⁺)`.
#[derive(Debug, Clone)]
pub struct EnergyModel<T> {
    graph: Arc<WeightedGraph<T>>,
    p: T,
    rho: VertexFunction<T>,
    nonlinearity: Nonlinearity<T>,
}

impl<T: Scalar> EnergyModel<T> {
    pub fn new(
        graph: Arc<WeightedGraph<T>>,
        p: T,
        rho: VertexFunction<T>,
        nonlinearity: Nonlinearity<T>,
    ) -> Result<Self> {
        check_p(p)?;
        let n = graph.n_vertices();
        rho.check_len(n)?;
        if let Some(x) = rho.iter().position(|&r| r < T::zero()) {
            return Err(Error::NegativePotential(x));
        }
        nonlinearity.check_for(p, n)?;
        let conn = validate_connectivity(&graph);
        if !conn.connected {
            return Err(Error::Disconnected {
                components: conn.n_components,
            });
        }
        Ok(Self {
            graph,
            p,
            rho,
            nonlinearity,
        })
    }

    /// Same graph, exponent, and nonlinearity with another potential.
    pub fn with_potential(&self, rho: VertexFunction<T>) -> Result<Self> {
        rho.check_len(self.graph.n_vertices())?;
        if let Some(x) = rho.iter().position(|&r| r < T::zero()) {
            return Err(Error::NegativePotential(x));
        }
        Ok(Self {
            graph: Arc::clone(&self.graph),
            p: self.p,
            rho,
            nonlinearity: self.nonlinearity.clone(),
        })
    }

    pub fn graph(&self) -> &WeightedGraph<T> {
        &self.graph
    }

    pub fn graph_arc(&self) -> &Arc<WeightedGraph<T>> {
        &self.graph
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn potential(&self) -> &VertexFunction<T> {
        &self.rho
    }

    pub fn nonlinearity(&self) -> &Nonlinearity<T> {
        &self.nonlinearity
    }

    pub fn n_vertices(&self) -> usize {
        self.graph.n_vertices()
    }

    /// `ρ ≡ 0`: the H_p "norm" vanishes on constants.
    pub fn potential_degenerate(&self) -> bool {
        self.rho.is_zero()
    }

    fn check(&self, u: &VertexFunction<T>) -> Result<()> {
        u.check_len(self.n_vertices())
    }

    fn finite(v: T) -> Result<T> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Overflow)
        }
    }

    pub(crate) fn norm_pow_raw(&self, u: &[T]) -> T {
        hp_norm_pow_raw(&self.graph, u, self.rho.as_slice(), self.p)
    }

    /// `∫ Ψ(x, u⁺) dσ`.
    pub(crate) fn primitive_integral_raw(&self, u: &[T]) -> T {
        let g = &*self.graph;
        sum_indices(g.n_vertices(), |x| {
            g.measure(x) * self.nonlinearity.primitive(x, u[x])
        })
    }

    /// `∫ ψ(x, u⁺) u⁺ dσ`.
    pub(crate) fn flux_integral_raw(&self, u: &[T]) -> T {
        let g = &*self.graph;
        sum_indices(g.n_vertices(), |x| {
            let s = u[x].max(T::zero());
            g.measure(x) * self.nonlinearity.psi(x, s) * s
        })
    }

    pub(crate) fn energy_raw(&self, u: &[T]) -> T {
        self.norm_pow_raw(u) / self.p - self.primitive_integral_raw(u)
    }

    /// `G = −Δ_p u + ρ|u|^{p−2}u − ψ(x, u⁺)`, so `⟨J′(u), φ⟩ = Σ σ G φ`.
    pub(crate) fn gradient_raw(&self, u: &[T]) -> Vec<T> {
        let lap = p_laplacian_raw(&self.graph, u, self.p);
        let pm1 = self.p - T::one();
        map_indices(self.n_vertices(), |x| {
            -lap[x] + self.rho[x] * signed_pow(u[x], pm1) - self.nonlinearity.psi(x, u[x])
        })
    }

    /// `σ`-weighted gradient of `(1/p)‖u‖_{H_p}^p`: `−Δ_p u + ρ|u|^{p−2}u`.
    pub(crate) fn norm_gradient_raw(&self, u: &[T]) -> Vec<T> {
        let lap = p_laplacian_raw(&self.graph, u, self.p);
        let pm1 = self.p - T::one();
        map_indices(self.n_vertices(), |x| {
            -lap[x] + self.rho[x] * signed_pow(u[x], pm1)
        })
    }

    /// `‖u‖_{H_p}^p`.
    pub fn norm_pow(&self, u: &VertexFunction<T>) -> Result<T> {
        self.check(u)?;
        Self::finite(self.norm_pow_raw(u.as_slice()))
    }

    pub fn energy(&self, u: &VertexFunction<T>) -> Result<T> {
        self.check(u)?;
        let n = self.norm_pow_raw(u.as_slice());
        let f = self.primitive_integral_raw(u.as_slice());
        if !n.is_finite() || !f.is_finite() {
            return Err(Error::Overflow);
        }
        Self::finite(n / self.p - f)
    }

    /// Pointwise residual field of the equation; the σ-weighted Riesz
    /// representative of `J′(u)`.
    pub fn energy_gradient(&self, u: &VertexFunction<T>) -> Result<VertexFunction<T>> {
        self.check(u)?;
        VertexFunction::new(self.gradient_raw(u.as_slice())).map_err(|_| Error::Overflow)
    }

    /// `ℓ∞` norm of [`energy_gradient`](Self::energy_gradient).
    pub fn equation_residual(&self, u: &VertexFunction<T>) -> Result<T> {
        Ok(self.energy_gradient(u)?.max_abs())
    }

    /// `⟨J′(u), u⟩ = ‖u‖^p − ∫ ψ(x, u⁺) u⁺ dσ`.
    pub fn nehari_functional(&self, u: &VertexFunction<T>) -> Result<T> {
        self.check(u)?;
        let n = self.norm_pow_raw(u.as_slice());
        let f = self.flux_integral_raw(u.as_slice());
        Self::finite(n - f)
    }

    /// `⟨J′(u), φ⟩ = Σ σ(x) G(x) φ(x)`.
    pub fn pairing(&self, grad: &VertexFunction<T>, phi: &VertexFunction<T>) -> Result<T> {
        self.check(grad)?;
        self.check(phi)?;
        let g = &*self.graph;
        Ok(sum_indices(g.n_vertices(), |x| {
            g.measure(x) * grad[x] * phi[x]
        }))
    }

    /// `‖u‖_{H_p}^p / ‖u‖_p^p`.
    pub fn rayleigh_quotient(&self, u: &VertexFunction<T>) -> Result<T> {
        self.check(u)?;
        let g = &*self.graph;
        let den = sum_indices(g.n_vertices(), |x| g.measure(x) * u[x].abs().powf(self.p));
        if den == T::zero() {
            return Err(Error::ZeroFunction);
        }
        Self::finite(self.norm_pow_raw(u.as_slice()) / den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generators::complete;
    use crate::graph::GraphBuilder;
    use approx::assert_relative_eq;

    fn k2_model(p: f64) -> EnergyModel<f64> {
        EnergyModel::new(
            Arc::new(complete(2, 1.0, 1.0).unwrap()),
            p,
            VertexFunction::constant(2, 1.0).unwrap(),
            Nonlinearity::pure_power(4.0).unwrap(),
        )
        .unwrap()
    }

    fn vf(v: &[f64]) -> VertexFunction<f64> {
        VertexFunction::new(v.to_vec()).unwrap()
    }

    #[test]
    fn energy_examples() {
        let m = k2_model(2.0);
        assert_relative_eq!(m.energy(&vf(&[1.0, 1.0])).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(m.energy(&vf(&[0.0, 0.0])).unwrap(), 0.0);
        assert_relative_eq!(m.energy(&vf(&[0.0, 3.0])).unwrap(), -11.25, epsilon = 1e-13);
    }

    #[test]
    fn gradient_examples() {
        let m = k2_model(2.0);
        for t in [0.3, 1.0, 1.7] {
            let g = m.energy_gradient(&vf(&[t, t])).unwrap();
            assert_relative_eq!(g[0], t - t * t * t, epsilon = 1e-14);
            assert_relative_eq!(g[1], t - t * t * t, epsilon = 1e-14);
        }
        assert!(m.energy_gradient(&vf(&[1.0, 1.0])).unwrap().is_zero());
        assert!(m.energy_gradient(&vf(&[0.0, 0.0])).unwrap().is_zero());
    }

    #[test]
    fn residual_examples() {
        let m = k2_model(2.0);
        assert_eq!(m.equation_residual(&vf(&[1.0, 1.0])).unwrap(), 0.0);
        assert_eq!(m.equation_residual(&vf(&[0.0, 0.0])).unwrap(), 0.0);
        assert_relative_eq!(
            m.equation_residual(&vf(&[0.0, 1.0])).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        let u = vf(&[0.2, -0.9]);
        assert_eq!(
            m.equation_residual(&u).unwrap(),
            m.energy_gradient(&u).unwrap().max_abs()
        );
    }

    #[test]
    fn rayleigh_examples() {
        let m = k2_model(2.0);
        assert_relative_eq!(m.rayleigh_quotient(&vf(&[1.0, 1.0])).unwrap(), 1.0);
        assert_relative_eq!(
            m.rayleigh_quotient(&vf(&[1.0, -1.0])).unwrap(),
            3.0,
            epsilon = 1e-14
        );
        assert!(matches!(
            m.rayleigh_quotient(&vf(&[0.0, 0.0])),
            Err(Error::ZeroFunction)
        ));
        let m = m.with_potential(vf(&[2.5, 2.5])).unwrap();
        assert!(m.rayleigh_quotient(&vf(&[0.3, -4.0])).unwrap() >= 2.5);
    }

    #[test]
    fn model_validation() {
        let g = Arc::new(complete::<f64>(2, 1.0, 1.0).unwrap());
        let rho = VertexFunction::constant(2, 1.0).unwrap();
        let nl = Nonlinearity::pure_power(4.0).unwrap();
        assert!(EnergyModel::new(g.clone(), 1.0, rho.clone(), nl.clone()).is_err());
        assert!(EnergyModel::new(g.clone(), 4.0, rho.clone(), nl.clone()).is_err());
        assert!(EnergyModel::new(g.clone(), 2.0, vf(&[1.0, -0.1]), nl.clone()).is_err());
        assert!(EnergyModel::new(g.clone(), 2.0, vf(&[1.0]), nl.clone()).is_err());
        let zero = EnergyModel::new(g, 2.0, vf(&[0.0, 0.0]), nl.clone()).unwrap();
        assert!(zero.potential_degenerate());
        let mut b = GraphBuilder::new(4);
        b.add_edge(0, 1, 1.0).unwrap();
        b.add_edge(2, 3, 1.0).unwrap();
        let split = Arc::new(b.build(vec![1.0; 4]).unwrap());
        assert!(matches!(
            EnergyModel::new(split, 2.0, VertexFunction::constant(4, 1.0).unwrap(), nl),
            Err(Error::Disconnected { components: 2 })
        ));
    }

    #[test]
    fn overflow_is_reported() {
        let m = k2_model(2.0);
        assert!(matches!(m.energy(&vf(&[1e300, 0.0])), Err(Error::Overflow)));
    }
}
