//! Real-valued functions on the vertex set.

use std::fmt::Write as _;
use std::ops::Index;

use crate::error::{Error, Result};
use crate::graph::{parse_vertex_values, WeightedGraph};
use crate::scalar::Scalar;

/// Values `u(x)` aligned with graph vertex indices. Entries are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFunction<T> {
    values: Vec<T>,
}

impl<T: Scalar> VertexFunction<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { values })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![T::zero(); n],
        }
    }

    pub fn constant(n: usize, c: T) -> Result<Self> {
        Self::new(vec![c; n])
    }

    /// Indicator of a single vertex.
    pub fn spike(n: usize, x: usize) -> Result<Self> {
        if x >= n {
            return Err(Error::InvalidVertex { index: x, n });
        }
        let mut values = vec![T::zero(); n];
        values[x] = T::one();
        Ok(Self { values })
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> T) -> Result<Self> {
        Self::new((0..n).map(f).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<T> {
        self.values
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.values.iter()
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        if self.values.len() == n {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                expected: n,
                got: self.values.len(),
            })
        }
    }

    /// `max(u, 0)` vertexwise.
    pub fn positive_part(&self) -> Self {
        Self {
            values: self.values.iter().map(|&v| v.max(T::zero())).collect(),
        }
    }

    /// `min(u, 0)` vertexwise.
    pub fn negative_part(&self) -> Self {
        Self {
            values: self.values.iter().map(|&v| v.min(T::zero())).collect(),
        }
    }

    pub fn scaled(&self, c: T) -> Result<Self> {
        Self::new(self.values.iter().map(|&v| c * v).collect())
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: T, other: &Self) -> Result<Self> {
        other.check_len(self.len())?;
        Self::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| a + c * b)
                .collect(),
        )
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> T {
        self.values
            .iter()
            .copied()
            .fold(T::infinity(), |a, b| a.min(b))
    }

    pub fn max_value(&self) -> T {
        self.values
            .iter()
            .copied()
            .fold(T::neg_infinity(), |a, b| a.max(b))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == T::zero())
    }

    /// Exports as `label value` lines in vertex order.
    pub fn to_text(&self, g: &WeightedGraph<T>) -> String {
        let mut out = String::new();
        for (x, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{} {}", g.label(x), v);
        }
        out
    }

    /// Reads `label value` lines; unlisted vertices get `default`.
    pub fn from_text(g: &WeightedGraph<T>, text: &str, default: T) -> Result<Self> {
        let mut values = vec![default; g.n_vertices()];
        for (label, v, line) in parse_vertex_values::<T>(text)? {
            let x = g.index_of(&label).map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            values[x] = v;
        }
        Self::new(values)
    }
}

impl<T> Index<usize> for VertexFunction<T> {
    type Output = T;

    fn index(&self, x: usize) -> &T {
        &self.values[x]
    }
}

impl<T: Scalar> TryFrom<Vec<T>> for VertexFunction<T> {
    type Error = Error;

    fn try_from(values: Vec<T>) -> Result<Self> {
        Self::new(values)
    }
}
