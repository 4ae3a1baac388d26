//! Finite vertex subsets: balls, boundaries, closures, and connectivity.

use std::collections::VecDeque;

use super::WeightedGraph;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A vertex set `Ω` together with its exterior boundary
/// `∂Ω = { y ∉ Ω : y ~ x for some x ∈ Ω }`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainSubset {
    members: Vec<usize>,
    boundary: Vec<usize>,
    mask: Vec<bool>,
}

impl DomainSubset {
    /// Sorted member indices.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    /// Sorted boundary indices.
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    /// `Ω ∪ ∂Ω`, sorted.
    pub fn closure(&self) -> Vec<usize> {
        let mut c: Vec<usize> = self
            .members
            .iter()
            .chain(self.boundary.iter())
            .copied()
            .collect();
        c.sort_unstable();
        c
    }

    #[inline]
    pub fn contains(&self, x: usize) -> bool {
        self.mask.get(x).copied().unwrap_or(false)
    }

    /// Membership indicator over all host vertices.
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Whether the subgraph induced on the members is connected.
    pub fn is_connected<T: Scalar>(&self, g: &WeightedGraph<T>) -> bool {
        let Some(&start) = self.members.first() else {
            return false;
        };
        let mut seen = vec![false; g.n_vertices()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut count = 1;
        while let Some(x) = queue.pop_front() {
            for &y in g.neighbor_indices(x) {
                if self.mask[y] && !seen[y] {
                    seen[y] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
        count == self.members.len()
    }
}

/// Builds the domain `members` with its exact boundary.
pub fn boundary<T: Scalar>(g: &WeightedGraph<T>, members: &[usize]) -> Result<DomainSubset> {
    if members.is_empty() {
        return Err(Error::EmptyVertexSet);
    }
    let n = g.n_vertices();
    let mut mask = vec![false; n];
    for &x in members {
        g.check_vertex(x)?;
        mask[x] = true;
    }
    let members: Vec<usize> = (0..n).filter(|&x| mask[x]).collect();
    let mut on_boundary = vec![false; n];
    for &x in &members {
        for &y in g.neighbor_indices(x) {
            if !mask[y] {
                on_boundary[y] = true;
            }
        }
    }
    let boundary = (0..n).filter(|&y| on_boundary[y]).collect();
    Ok(DomainSubset {
        members,
        boundary,
        mask,
    })
}

/// Hop distance from `source`; `None` for unreachable vertices.
pub fn hop_distances<T: Scalar>(g: &WeightedGraph<T>, source: usize) -> Result<Vec<Option<usize>>> {
    set_distances(g, &[source])
}

/// Hop distance to the nearest vertex of `sources`.
pub fn set_distances<T: Scalar>(
    g: &WeightedGraph<T>,
    sources: &[usize],
) -> Result<Vec<Option<usize>>> {
    let mut dist = vec![None; g.n_vertices()];
    let mut queue = VecDeque::new();
    for &s in sources {
        g.check_vertex(s)?;
        if dist[s].is_none() {
            dist[s] = Some(0);
            queue.push_back(s);
        }
    }
    while let Some(x) = queue.pop_front() {
        let d = dist[x].unwrap_or(0);
        for &y in g.neighbor_indices(x) {
            if dist[y].is_none() {
                dist[y] = Some(d + 1);
                queue.push_back(y);
            }
        }
    }
    Ok(dist)
}

/// Closed hop-distance ball `B_R(center)`.
pub fn ball<T: Scalar>(g: &WeightedGraph<T>, center: usize, radius: usize) -> Result<DomainSubset> {
    let dist = hop_distances(g, center)?;
    let members: Vec<usize> = dist
        .iter()
        .enumerate()
        .filter_map(|(x, d)| d.filter(|&d| d <= radius).map(|_| x))
        .collect();
    boundary(g, &members)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connectivity {
    pub connected: bool,
    pub n_components: usize,
    /// Component label per vertex, numbered in order of lowest member.
    pub labels: Vec<usize>,
}

pub fn validate_connectivity<T: Scalar>(g: &WeightedGraph<T>) -> Connectivity {
    let n = g.n_vertices();
    let mut labels = vec![usize::MAX; n];
    let mut count = 0;
    for start in 0..n {
        if labels[start] != usize::MAX {
            continue;
        }
        labels[start] = count;
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for &y in g.neighbor_indices(x) {
                if labels[y] == usize::MAX {
                    labels[y] = count;
                    queue.push_back(y);
                }
            }
        }
        count += 1;
    }
    Connectivity {
        connected: count == 1,
        n_components: count,
        labels,
    }
}
