//! Small named graph families with uniform weights and measure.

use rand::Rng;

use super::{GraphBuilder, WeightedGraph};
use crate::error::Result;
use crate::scalar::Scalar;

pub fn path<T: Scalar>(n: usize, weight: T, measure: T) -> Result<WeightedGraph<T>> {
    let mut b = GraphBuilder::new(n);
    for x in 1..n {
        b.add_edge(x - 1, x, weight)?;
    }
    b.build(vec![measure; n])
}

pub fn cycle<T: Scalar>(n: usize, weight: T, measure: T) -> Result<WeightedGraph<T>> {
    let mut b = GraphBuilder::new(n);
    for x in 0..n {
        b.add_edge(x, (x + 1) % n, weight)?;
    }
    b.build(vec![measure; n])
}

pub fn complete<T: Scalar>(n: usize, weight: T, measure: T) -> Result<WeightedGraph<T>> {
    let mut b = GraphBuilder::new(n);
    for x in 0..n {
        for y in x + 1..n {
            b.add_edge(x, y, weight)?;
        }
    }
    b.build(vec![measure; n])
}

/// Star with center 0 and `leaves` leaves.
pub fn star<T: Scalar>(leaves: usize, weight: T, measure: T) -> Result<WeightedGraph<T>> {
    let mut b = GraphBuilder::new(leaves + 1);
    for x in 1..=leaves {
        b.add_edge(0, x, weight)?;
    }
    b.build(vec![measure; leaves + 1])
}

/// `rows × cols` lattice; vertex `(i, j)` has index `i * cols + j`.
pub fn grid<T: Scalar>(
    rows: usize,
    cols: usize,
    weight: T,
    measure: T,
) -> Result<WeightedGraph<T>> {
    let mut b = GraphBuilder::new(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let v = i * cols + j;
            if j + 1 < cols {
                b.add_edge(v, v + 1, weight)?;
            }
            if i + 1 < rows {
                b.add_edge(v, v + cols, weight)?;
            }
        }
    }
    b.build(vec![measure; rows * cols])
}

/// Random connected graph: a random recursive tree plus `extra_edges` random
/// chords, weights uniform in `weight_range`, measures uniform in `measure_range`.
pub fn random_connected<T: Scalar, R: Rng>(
    n: usize,
    extra_edges: usize,
    weight_range: (f64, f64),
    measure_range: (f64, f64),
    rng: &mut R,
) -> Result<WeightedGraph<T>> {
    let mut b = GraphBuilder::new(n);
    for x in 1..n {
        let parent = rng.gen_range(0..x);
        b.add_edge(
            parent,
            x,
            T::lit(rng.gen_range(weight_range.0..=weight_range.1)),
        )?;
    }
    if n > 2 {
        for _ in 0..extra_edges {
            let x = rng.gen_range(0..n);
            let y = rng.gen_range(0..n);
            if x != y && !b.edges.contains_key(&(x.min(y), x.max(y))) {
                b.add_edge(x, y, T::lit(rng.gen_range(weight_range.0..=weight_range.1)))?;
            }
        }
    }
    let measure = (0..n)
        .map(|_| T::lit(rng.gen_range(measure_range.0..=measure_range.1)))
        .collect();
    b.build(measure)
}
