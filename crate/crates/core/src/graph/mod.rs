//! Weighted graphs with a positive vertex measure.
//!
//! Adjacency is stored in compressed rows sorted by neighbor index. Each
//! undirected edge has exactly one weight value, written into both
//! directions, so `w(x, y)` and `w(y, x)` are the same bits.

mod domain;
pub mod generators;
mod io;

use std::collections::{BTreeMap, HashMap};

pub use domain::{
    ball, boundary, hop_distances, set_distances, validate_connectivity, Connectivity, DomainSubset,
};
pub use io::{
    export_edge_list, graph_from_text, load_edge_list, parse_edge_list, parse_vertex_values,
    MeasureSource,
};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph<T> {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    weights: Vec<T>,
    measure: Vec<T>,
    sigma_min: T,
    root: usize,
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl<T: Scalar> WeightedGraph<T> {
    #[inline]
    pub fn n_vertices(&self) -> usize {
        self.measure.len()
    }

    pub fn n_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    #[inline]
    pub fn degree(&self, x: usize) -> usize {
        self.offsets[x + 1] - self.offsets[x]
    }

    /// Neighbor indices of `x` in stored (ascending) order.
    #[inline]
    pub fn neighbor_indices(&self, x: usize) -> &[usize] {
        &self.neighbors[self.offsets[x]..self.offsets[x + 1]]
    }

    /// Weights aligned with [`neighbor_indices`](Self::neighbor_indices).
    #[inline]
    pub fn neighbor_weights(&self, x: usize) -> &[T] {
        &self.weights[self.offsets[x]..self.offsets[x + 1]]
    }

    pub fn neighbors(&self, x: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        self.neighbor_indices(x)
            .iter()
            .copied()
            .zip(self.neighbor_weights(x).iter().copied())
    }

    /// Weight of edge `xy`, if present.
    pub fn weight(&self, x: usize, y: usize) -> Option<T> {
        let nb = self.neighbor_indices(x);
        nb.binary_search(&y)
            .ok()
            .map(|i| self.neighbor_weights(x)[i])
    }

    /// Sum of incident edge weights.
    pub fn weighted_degree(&self, x: usize) -> T {
        self.neighbor_weights(x)
            .iter()
            .fold(T::zero(), |acc, &w| acc + w)
    }

    #[inline]
    pub fn measure(&self, x: usize) -> T {
        self.measure[x]
    }

    pub fn measures(&self) -> &[T] {
        &self.measure
    }

    /// Lower bound of the measure recorded at construction.
    pub fn sigma_min(&self) -> T {
        self.sigma_min
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn with_root(mut self, root: usize) -> Result<Self> {
        self.check_vertex(root)?;
        self.root = root;
        Ok(self)
    }

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn check_vertex(&self, x: usize) -> Result<()> {
        if x < self.n_vertices() {
            Ok(())
        } else {
            Err(Error::InvalidVertex {
                index: x,
                n: self.n_vertices(),
            })
        }
    }

    /// Undirected edges `(x, y, w)` with `x < y`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.n_vertices()).flat_map(move |x| {
            self.neighbors(x)
                .filter(move |&(y, _)| y > x)
                .map(move |(y, w)| (x, y, w))
        })
    }

    /// Sum over stored half-edges of `w_xy - w_yx`. Zero for every valid graph.
    pub fn half_edge_asymmetry(&self) -> T {
        let mut acc = T::zero();
        for x in 0..self.n_vertices() {
            for (y, w) in self.neighbors(x) {
                let back = self.weight(y, x).unwrap_or(T::nan());
                acc = acc + (w - back);
            }
        }
        acc
    }

    /// Subgraph induced on `members` (any order, duplicates ignored). Vertices
    /// are renumbered in ascending original order; the returned vector maps new
    /// indices to old ones. Labels and measures carry over.
    pub fn induced_subgraph(&self, members: &[usize]) -> Result<(Self, Vec<usize>)> {
        let mut keep: Vec<usize> = members.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.is_empty() {
            return Err(Error::EmptyVertexSet);
        }
        for &x in &keep {
            self.check_vertex(x)?;
        }
        let mut new_index = vec![usize::MAX; self.n_vertices()];
        for (i, &x) in keep.iter().enumerate() {
            new_index[x] = i;
        }
        let mut builder =
            GraphBuilder::with_labels(keep.iter().map(|&x| self.labels[x].clone()).collect());
        for (x, y, w) in self.edges() {
            let (a, b) = (new_index[x], new_index[y]);
            if a != usize::MAX && b != usize::MAX {
                builder.add_edge(a, b, w)?;
            }
        }
        let measure = keep.iter().map(|&x| self.measure[x]).collect();
        let root = if new_index[self.root] != usize::MAX {
            new_index[self.root]
        } else {
            0
        };
        let g = builder.build(measure)?.with_root(root)?;
        Ok((g, keep))
    }
}

/// Accumulates undirected edges and produces a validated [`WeightedGraph`].
#[derive(Debug, Clone)]
pub struct GraphBuilder<T> {
    labels: Vec<String>,
    edges: BTreeMap<(usize, usize), T>,
}

impl<T: Scalar> GraphBuilder<T> {
    /// Builder over `n` vertices labelled `"0"`, `"1"`, ...
    pub fn new(n: usize) -> Self {
        Self::with_labels((0..n).map(|i| i.to_string()).collect())
    }

    pub fn with_labels(labels: Vec<String>) -> Self {
        Self {
            labels,
            edges: BTreeMap::new(),
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.labels.len()
    }

    /// Adds edge `xy`. Listing an edge again (in either direction) with the
    /// identical weight is accepted; a different weight is a conflict.
    pub fn add_edge(&mut self, x: usize, y: usize, w: T) -> Result<&mut Self> {
        let n = self.n_vertices();
        for v in [x, y] {
            if v >= n {
                return Err(Error::InvalidVertex { index: v, n });
            }
        }
        if x == y {
            return Err(Error::InvalidGraph(format!(
                "self-loop at vertex `{}`",
                self.labels[x]
            )));
        }
        if !(w > T::zero()) || !w.is_finite() {
            return Err(Error::InvalidGraph(format!(
                "edge `{}`-`{}` has non-positive weight {}",
                self.labels[x], self.labels[y], w
            )));
        }
        let key = (x.min(y), x.max(y));
        match self.edges.get(&key) {
            Some(&old) if old != w => Err(Error::InvalidGraph(format!(
                "conflicting duplicate edge `{}`-`{}`: weights {} and {}",
                self.labels[key.0], self.labels[key.1], old, w
            ))),
            Some(_) => Ok(self),
            None => {
                self.edges.insert(key, w);
                Ok(self)
            }
        }
    }

    pub fn build(self, measure: Vec<T>) -> Result<WeightedGraph<T>> {
        let n = self.n_vertices();
        if n == 0 {
            return Err(Error::EmptyVertexSet);
        }
        if measure.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: measure.len(),
            });
        }
        for (x, &s) in measure.iter().enumerate() {
            if !(s > T::zero()) || !s.is_finite() {
                return Err(Error::InvalidGraph(format!(
                    "measure at vertex `{}` must be positive and finite (got {})",
                    self.labels[x], s
                )));
            }
        }
        let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
        for (&(x, y), &w) in &self.edges {
            rows[x].push((y, w));
            rows[y].push((x, w));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::with_capacity(2 * self.edges.len());
        let mut weights = Vec::with_capacity(2 * self.edges.len());
        offsets.push(0);
        for row in &mut rows {
            row.sort_unstable_by_key(|&(y, _)| y);
            for &(y, w) in row.iter() {
                neighbors.push(y);
                weights.push(w);
            }
            offsets.push(neighbors.len());
        }
        let sigma_min = measure.iter().copied().fold(T::infinity(), |a, b| a.min(b));
        let mut index = HashMap::with_capacity(n);
        for (i, l) in self.labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate vertex label `{l}`")));
            }
        }
        Ok(WeightedGraph {
            offsets,
            neighbors,
            weights,
            measure,
            sigma_min,
            root: 0,
            labels: self.labels,
            index,
        })
    }
}
