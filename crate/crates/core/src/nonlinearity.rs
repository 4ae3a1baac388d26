//! Registered nonlinearities `ψ(x, s) = Σ_i c_i(x) s^{q_i − 1}` for `s ≥ 0`.
//!
//! Every family is a positive combination of powers with exponents above `p`,
//! so `ψ(x, 0) = 0`, `ψ(x, s)/s^{p−1}` is strictly increasing and vanishes as
//! `s → 0+`, and `α Ψ ≤ s ψ` holds with `α = min_i q_i`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `ψ = c s^{q−1}` with a constant `c`.
    PurePower,
    /// `ψ = c(x) s^{q−1}`.
    WeightedPower,
    /// `ψ = Σ c_i(x) s^{q_i−1}`.
    SumOfPowers,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient<T> {
    Uniform(T),
    PerVertex(Vec<T>),
}

impl<T: Scalar> Coefficient<T> {
    #[inline]
    pub fn at(&self, x: usize) -> T {
        match self {
            Coefficient::Uniform(c) => *c,
            Coefficient::PerVertex(c) => c[x],
        }
    }

    fn values(&self) -> &[T] {
        match self {
            Coefficient::Uniform(c) => std::slice::from_ref(c),
            Coefficient::PerVertex(c) => c,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerTerm<T> {
    /// Exponent `q` of the primitive `c s^q / q`.
    pub exponent: T,
    pub coefficient: Coefficient<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity<T> {
    family: Family,
    terms: Vec<PowerTerm<T>>,
    alpha: T,
}

impl<T: Scalar> Nonlinearity<T> {
    /// `ψ(x, s) = s^{q−1}`.
    pub fn pure_power(q: T) -> Result<Self> {
        Self::new(
            Family::PurePower,
            vec![PowerTerm {
                exponent: q,
                coefficient: Coefficient::Uniform(T::one()),
            }],
        )
    }

    /// `ψ(x, s) = c(x) s^{q−1}`.
    pub fn weighted_power(q: T, c: Vec<T>) -> Result<Self> {
        Self::new(
            Family::WeightedPower,
            vec![PowerTerm {
                exponent: q,
                coefficient: Coefficient::PerVertex(c),
            }],
        )
    }

    pub fn sum_of_powers(terms: Vec<PowerTerm<T>>) -> Result<Self> {
        Self::new(Family::SumOfPowers, terms)
    }

    pub fn new(family: Family, terms: Vec<PowerTerm<T>>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidNonlinearity(m));
        if terms.is_empty() {
            return bad("at least one power term is required".into());
        }
        match family {
            Family::PurePower | Family::WeightedPower if terms.len() != 1 => {
                return bad(format!("{family:?} takes exactly one term"));
            }
            Family::PurePower if !matches!(terms[0].coefficient, Coefficient::Uniform(_)) => {
                return bad("pure power takes a uniform coefficient".into());
            }
            _ => {}
        }
        let mut len = None;
        for t in &terms {
            if !(t.exponent > T::one()) || !t.exponent.is_finite() {
                return bad(format!(
                    "exponent {} must be finite and exceed 1",
                    t.exponent
                ));
            }
            let vals = t.coefficient.values();
            if vals.is_empty() {
                return bad("empty coefficient vector".into());
            }
            if let Some(c) = vals.iter().find(|c| !(**c > T::zero()) || !c.is_finite()) {
                return bad(format!(
                    "coefficients must be positive and finite (got {c})"
                ));
            }
            if let Coefficient::PerVertex(v) = &t.coefficient {
                match len {
                    Some(n) if n != v.len() => {
                        return bad("per-vertex coefficients differ in length".into())
                    }
                    _ => len = Some(v.len()),
                }
            }
        }
        let alpha = terms
            .iter()
            .map(|t| t.exponent)
            .fold(T::infinity(), |a, b| a.min(b));
        let nl = Self {
            family,
            terms,
            alpha,
        };
        nl.check_ambrosetti_rabinowitz()?;
        Ok(nl)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn terms(&self) -> &[PowerTerm<T>] {
        &self.terms
    }

    /// Declared superlinearity constant `α = min_i q_i`.
    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// Length of per-vertex coefficient vectors, if any.
    pub fn vertex_count(&self) -> Option<usize> {
        self.terms.iter().find_map(|t| match &t.coefficient {
            Coefficient::PerVertex(v) => Some(v.len()),
            Coefficient::Uniform(_) => None,
        })
    }

    /// Whether `s ↦ ψ(x, s)` is the single power `s^{q−1}` at every vertex.
    pub fn as_pure_power(&self) -> Option<T> {
        match (self.family, &self.terms[0].coefficient) {
            (Family::PurePower, Coefficient::Uniform(c)) if *c == T::one() => {
                Some(self.terms[0].exponent)
            }
            _ => None,
        }
    }

    /// `ψ(x, s)` for `s ≥ 0`; negative `s` is treated as 0.
    #[inline]
    pub fn psi(&self, x: usize, s: T) -> T {
        if !(s > T::zero()) {
            return T::zero();
        }
        self.terms.iter().fold(T::zero(), |acc, t| {
            acc + t.coefficient.at(x) * s.powf(t.exponent - T::one())
        })
    }

    /// `Ψ(x, s) = ∫_0^s ψ(x, t) dt` for `s ≥ 0`.
    #[inline]
    pub fn primitive(&self, x: usize, s: T) -> T {
        if !(s > T::zero()) {
            return T::zero();
        }
        self.terms.iter().fold(T::zero(), |acc, t| {
            acc + t.coefficient.at(x) * s.powf(t.exponent) / t.exponent
        })
    }

    /// Checks `α Ψ(x, s) ≤ s ψ(x, s)` on a log grid `s ∈ [1e-8, 1e8]` at
    /// every distinct coefficient profile, in double precision.
    pub fn check_ambrosetti_rabinowitz(&self) -> Result<()> {
        let n = self.vertex_count().unwrap_or(1);
        let alpha = self.alpha.as_f64();
        for x in 0..n {
            for k in 0..=160 {
                let s = 10f64.powf(-8.0 + 0.1 * k as f64);
                let (mut prim, mut flux) = (0.0, 0.0);
                for t in &self.terms {
                    let q = t.exponent.as_f64();
                    let c = t.coefficient.at(x).as_f64();
                    prim += c * s.powf(q) / q;
                    flux += c * s.powf(q);
                }
                if !(prim > 0.0) && s.powf(alpha) > f64::MIN_POSITIVE {
                    return Err(Error::InvalidNonlinearity(format!(
                        "primitive not positive at s = {s:e}"
                    )));
                }
                if prim.is_finite() && alpha * prim > flux * (1.0 + 1e-12) {
                    return Err(Error::InvalidNonlinearity(format!(
                        "superlinearity condition fails at vertex {x}, s = {s:e}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Validates exponents against `p` and coefficient lengths against `n`.
    pub fn check_for(&self, p: T, n: usize) -> Result<()> {
        if let Some(t) = self.terms.iter().find(|t| !(t.exponent > p)) {
            return Err(Error::InvalidNonlinearity(format!(
                "exponent {} must exceed p = {}",
                t.exponent, p
            )));
        }
        match self.vertex_count() {
            Some(m) if m != n => Err(Error::LengthMismatch {
                expected: n,
                got: m,
            }),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_power_values() {
        let nl = Nonlinearity::pure_power(4.0).unwrap();
        assert_eq!(nl.psi(0, 2.0), 8.0);
        assert_eq!(nl.primitive(0, 2.0), 4.0);
        assert_eq!(nl.psi(0, 0.0), 0.0);
        assert_eq!(nl.psi(0, -1.0), 0.0);
        assert_eq!(nl.alpha(), 4.0);
        assert_eq!(nl.as_pure_power(), Some(4.0));
    }

    #[test]
    fn sum_of_powers_alpha_is_min_exponent() {
        let nl = Nonlinearity::sum_of_powers(vec![
            PowerTerm {
                exponent: 5.0,
                coefficient: Coefficient::Uniform(0.5),
            },
            PowerTerm {
                exponent: 3.0,
                coefficient: Coefficient::PerVertex(vec![1.0, 2.0]),
            },
        ])
        .unwrap();
        assert_eq!(nl.alpha(), 3.0);
        assert_eq!(nl.vertex_count(), Some(2));
        assert_eq!(nl.psi(1, 1.0), 2.5);
        assert!(nl.as_pure_power().is_none());
        assert!(nl.check_for(2.0, 2).is_ok());
        assert!(nl.check_for(3.0, 2).is_err());
        assert!(nl.check_for(2.0, 3).is_err());
    }

    #[test]
    fn rejects_invalid_terms() {
        assert!(Nonlinearity::<f64>::pure_power(1.0).is_err());
        assert!(Nonlinearity::<f64>::weighted_power(3.0, vec![1.0, 0.0]).is_err());
        assert!(Nonlinearity::<f64>::sum_of_powers(vec![]).is_err());
        assert!(Nonlinearity::<f64>::new(
            Family::PurePower,
            vec![PowerTerm {
                exponent: 3.0,
                coefficient: Coefficient::PerVertex(vec![1.0])
            }]
        )
        .is_err());
    }

    #[test]
    fn ambrosetti_rabinowitz_on_log_grid() {
        for q in [2.5, 3.0, 4.0, 6.0] {
            let nl = Nonlinearity::<f64>::pure_power(q).unwrap();
            for k in 0..=160 {
                let s = 10f64.powf(-8.0 + 0.1 * k as f64);
                assert!(nl.alpha() * nl.primitive(0, s) <= s * nl.psi(0, s) * (1.0 + 1e-12));
            }
        }
    }
}
