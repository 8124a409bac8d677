//! Simple directed graphs, self-loops allowed.

use std::collections::BTreeSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{FieldElem, PrimeField};
use crate::io::fnv1a64;
use crate::matrix::DenseMatrix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    out: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph { n, out: vec![Vec::new(); n], edge_count: 0 }
    }

    /// Builds a graph, rejecting out-of-range endpoints and repeated arcs.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = Graph::new(n);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Adds the arc `u -> v`.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        for x in [u, v] {
            if x >= self.n {
                return Err(Error::VertexOutOfRange { vertex: x, n: self.n });
            }
        }
        match self.out[u].binary_search(&v) {
            Ok(_) => Err(Error::DimensionMismatch(format!("duplicate arc {u} -> {v}"))),
            Err(pos) => {
                self.out[u].insert(pos, v);
                self.edge_count += 1;
                Ok(())
            }
        }
    }

    /// Each ordered pair (self-loops included when `loops`) is an arc with
    /// probability `density`.
    pub fn random<R: Rng + ?Sized>(n: usize, density: f64, loops: bool, rng: &mut R) -> Self {
        let mut g = Graph::new(n);
        for u in 0..n {
            for v in 0..n {
                if (u != v || loops) && rng.gen_bool(density) {
                    g.out[u].push(v);
                    g.edge_count += 1;
                }
            }
        }
        g
    }

    /// The directed cycle `0 -> 1 -> ... -> n-1 -> 0`.
    pub fn cycle(n: usize) -> Self {
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle arcs are distinct")
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn out_neighbors(&self, u: usize) -> &[usize] {
        &self.out[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.out[u].binary_search(&v).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out.iter().enumerate().flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v)))
    }

    pub fn edge_set(&self) -> BTreeSet<(usize, usize)> {
        self.edges().collect()
    }

    pub fn reversed(&self) -> Graph {
        let mut r = Graph::new(self.n);
        for (u, v) in self.edges() {
            r.out[v].push(u);
        }
        for list in &mut r.out {
            list.sort_unstable();
        }
        r.edge_count = self.edge_count;
        r
    }

    /// The 0/1 adjacency matrix over `field`.
    pub fn adjacency(&self, field: &PrimeField) -> DenseMatrix {
        let mut a = DenseMatrix::zeros(field, self.n, self.n);
        for (u, v) in self.edges() {
            a.set(u, v, FieldElem::ONE);
        }
        a
    }

    /// FNV-1a over `n` and the sorted arc list.
    pub fn content_hash(&self) -> u64 {
        let mut bytes = Vec::with_capacity(8 + 16 * self.edge_count);
        bytes.extend_from_slice(&(self.n as u64).to_le_bytes());
        for (u, v) in self.edges() {
            bytes.extend_from_slice(&(u as u64).to_le_bytes());
            bytes.extend_from_slice(&(v as u64).to_le_bytes());
        }
        fnv1a64(&bytes)
    }

    pub(crate) fn check_vertex(&self, u: usize) -> Result<()> {
        if u < self.n {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange { vertex: u, n: self.n })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_range() {
        let mut g = Graph::new(3);
        g.add_edge(0, 1).unwrap();
        g.add_edge(1, 1).unwrap();
        assert!(g.add_edge(0, 1).is_err());
        assert!(matches!(g.add_edge(0, 3), Err(Error::VertexOutOfRange { vertex: 3, n: 3 })));
        assert_eq!(g.edge_count(), 2);
        assert!(g.has_edge(1, 1));
    }

    #[test]
    fn adjacency_and_reverse() {
        let f = PrimeField::default();
        let g = Graph::cycle(3);
        let a = g.adjacency(&f);
        assert_eq!(a.get(0, 1), FieldElem::ONE);
        assert_eq!(a.get(1, 0), FieldElem::ZERO);
        assert_eq!(g.reversed().adjacency(&f), a.transpose());
        assert_ne!(g.content_hash(), g.reversed().content_hash());
    }
}
