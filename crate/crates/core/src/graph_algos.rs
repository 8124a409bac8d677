//! Graph-level algorithms over a [`WalkIndex`]: all-pairs all-walks tables,
//! closed-walk profiles, shortest cycles through every vertex and the
//! cycle-membership sets.
//!
//! All counts are residues. A true count divisible by `p` reads as zero, so
//! shortest-cycle answers from one prime can overshoot; the `verify` command
//! re-checks such zeros under a second prime.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::field::{FieldElem, PrimeField};
use crate::graph::Graph;
use crate::matrix::{mat_mul, DenseMatrix};
use crate::walk_oracle::{fallback_power_row, AllLengthsPlan, WalkIndex};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reachability {
    pub source: usize,
    /// Breadth-first distance, `None` when unreachable.
    pub dist: Vec<Option<usize>>,
}

impl Reachability {
    pub fn reachable(&self) -> impl Iterator<Item = usize> + '_ {
        self.dist.iter().enumerate().filter(|(_, d)| d.is_some()).map(|(v, _)| v)
    }
}

pub fn bfs_reachability(g: &Graph, u: usize) -> Result<Reachability> {
    g.check_vertex(u)?;
    let mut dist = vec![None; g.n()];
    dist[u] = Some(0);
    let mut queue = VecDeque::from([u]);
    while let Some(x) = queue.pop_front() {
        let d = dist[x].unwrap() + 1;
        for &w in g.out_neighbors(x) {
            if dist[w].is_none() {
                dist[w] = Some(d);
                queue.push_back(w);
            }
        }
    }
    Ok(Reachability { source: u, dist })
}

/// `A[u][v][k]` stored as one `n x n` matrix per length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApawTable {
    pub by_length: Vec<DenseMatrix>,
}

impl ApawTable {
    pub fn horizon(&self) -> usize {
        self.by_length.len()
    }

    pub fn get(&self, u: usize, v: usize, k: usize) -> FieldElem {
        self.by_length[k - 1].get(u, v)
    }
}

const APAW_ROW_CHUNK: usize = 16;

/// Calls `sink(u, v, counts)` for every ordered pair, row-major, with
/// `counts = w_1..w_mu`. Rows are computed in parallel and emitted in order.
pub fn apaw_stream(idx: &WalkIndex, mut sink: impl FnMut(usize, usize, &[FieldElem])) {
    let n = idx.n();
    let plan = AllLengthsPlan::new(idx);
    let mut start = 0;
    while start < n {
        let end = (start + APAW_ROW_CHUNK).min(n);
        let rows: Vec<Vec<Vec<FieldElem>>> =
            (start..end)
                .into_par_iter()
                .map(|u| {
                    let mut scratch = Vec::new();
                    (0..n)
                        .map(|v| {
                            let mut out = vec![FieldElem::ZERO; idx.mu()];
                            plan.counts_into(u, v, &mut scratch, &mut out);
                            out
                        })
                        .collect()
                })
                .collect();
        for (u, row) in (start..end).zip(rows) {
            for (v, counts) in row.iter().enumerate() {
                sink(u, v, counts);
            }
        }
        start = end;
    }
}

/// The full table up to the index horizon.
pub fn apaw(idx: &WalkIndex) -> ApawTable {
    let n = idx.n();
    let mut by_length = vec![DenseMatrix::zeros(idx.field(), n, n); idx.mu()];
    apaw_stream(idx, |u, v, counts| {
        for (k, &c) in counts.iter().enumerate() {
            by_length[k].set(u, v, c);
        }
    });
    ApawTable { by_length }
}

/// Calls `sink(k, A^k)` for `k = 1..=max_len` using repeated products.
pub fn naive_apaw_stream(g: &Graph, field: &PrimeField, max_len: usize, mut sink: impl FnMut(usize, &DenseMatrix)) {
    if max_len == 0 {
        return;
    }
    let a = g.adjacency(field);
    let mut cur = a.clone();
    sink(1, &cur);
    for k in 2..=max_len {
        cur = mat_mul(&cur, &a).expect("square");
        sink(k, &cur);
    }
}

pub fn naive_apaw(g: &Graph, field: &PrimeField, max_len: usize) -> ApawTable {
    let mut by_length = Vec::with_capacity(max_len);
    naive_apaw_stream(g, field, max_len, |_, m| by_length.push(m.clone()));
    ApawTable { by_length }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CycleProfile {
    pub vertex: usize,
    /// `c^1, c^2, ...`: the index horizon, extended up to the first nonzero
    /// (or `n`) when the horizon shows only zeros.
    #[serde(serialize_with = "ser_elems")]
    pub counts: Vec<FieldElem>,
    pub shortest: Option<usize>,
    /// Whether the answer needed lengths beyond the index horizon.
    pub used_fallback: bool,
}

fn ser_elems<S: serde::Serializer>(xs: &[FieldElem], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(|x| x.value()))
}

pub fn cycle_profile(g: &Graph, idx: &WalkIndex, u: usize) -> Result<CycleProfile> {
    let mut counts = idx.query_all_lengths(u, u)?.counts;
    let mut shortest = counts.iter().position(|c| !c.is_zero()).map(|i| i + 1);
    let mut used_fallback = false;
    let n = g.n();
    if shortest.is_none() && counts.len() < n {
        used_fallback = true;
        let rows = fallback_power_row(idx.field(), g, u, n)?;
        for row in &rows[counts.len()..] {
            counts.push(row[u]);
            if !row[u].is_zero() {
                shortest = Some(counts.len());
                break;
            }
        }
    }
    Ok(CycleProfile { vertex: u, counts, shortest, used_fallback })
}

/// Shortest closed-walk length through every vertex.
pub fn ansc(g: &Graph, idx: &WalkIndex) -> Result<Vec<Option<usize>>> {
    (0..g.n()).into_par_iter().map(|u| cycle_profile(g, idx, u).map(|p| p.shortest)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CycleSets {
    /// `sets[c - 1]` lists, in increasing order, the vertices on a cycle of
    /// length at most `c`.
    pub sets: Vec<Vec<usize>>,
}

impl CycleSets {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn set(&self, c: usize) -> &[usize] {
        &self.sets[c - 1]
    }
}

/// `S_1..S_K` with `K = min(n, max(mu, longest finite shortest cycle))`.
pub fn cycle_sets(g: &Graph, idx: &WalkIndex) -> Result<CycleSets> {
    let shortest = ansc(g, idx)?;
    let k = shortest.iter().flatten().copied().max().unwrap_or(0).max(idx.mu()).min(g.n());
    let sets = (1..=k)
        .map(|c| (0..g.n()).filter(|&u| shortest[u].is_some_and(|s| s <= c)).collect())
        .collect();
    Ok(CycleSets { sets })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiameterReport {
    /// Largest finite distance over ordered pairs.
    pub diameter: usize,
    pub mu_min: usize,
    pub minpoly_deg: usize,
    /// When false, `diameter` only covers reachable pairs.
    pub strongly_connected: bool,
    pub d_le_mu_min: bool,
    pub d_le_minpoly: bool,
}

/// Compares the graph diameter with both block-degree bounds. Only reports.
pub fn diameter_mu_report(g: &Graph, idx: &WalkIndex) -> Result<DiameterReport> {
    let mut diameter = 0;
    let mut strongly_connected = true;
    for u in 0..g.n() {
        let r = bfs_reachability(g, u)?;
        for d in &r.dist {
            match d {
                Some(d) => diameter = diameter.max(*d),
                None => strongly_connected = false,
            }
        }
    }
    let (mu_min, minpoly_deg) = (idx.mu(), idx.minpoly_deg());
    Ok(DiameterReport {
        diameter,
        mu_min,
        minpoly_deg,
        strongly_connected,
        d_le_mu_min: diameter <= mu_min,
        d_le_minpoly: diameter <= minpoly_deg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{bfs_shortest_cycle, dp_walk_counts};
    use crate::walk_oracle::{distance, preprocess, Distance, PreprocessConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn index(g: &Graph) -> WalkIndex {
        preprocess(g, &PreprocessConfig::default()).unwrap().1
    }

    fn anti_parallel_square() -> Graph {
        Graph::from_edges(4, [(0, 1), (1, 0), (1, 2), (2, 1), (2, 3), (3, 2), (3, 0), (0, 3)]).unwrap()
    }

    #[test]
    fn reachability_examples() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(bfs_reachability(&g, 3).unwrap().reachable().collect::<Vec<_>>(), vec![3]);
        assert_eq!(bfs_reachability(&g, 0).unwrap().dist[2], Some(2));
    }

    #[test]
    fn apaw_small() {
        let f = PrimeField::default();
        let g = Graph::new(4);
        let idx = index(&g);
        assert!(apaw(&idx).by_length.iter().all(DenseMatrix::is_zero));
        let g = Graph::cycle(3);
        let t = apaw(&index(&g));
        assert_eq!(t.horizon(), 3);
        for k in 1..=3 {
            for u in 0..3 {
                for v in 0..3 {
                    let want = (v + 3 - u) % 3 == k % 3;
                    assert_eq!(t.get(u, v, k), if want { FieldElem::ONE } else { FieldElem::ZERO });
                }
            }
        }
        let naive = naive_apaw(&g, &f, 6);
        assert_eq!(naive.get(0, 0, 6), FieldElem::ONE);
        assert_eq!(naive.by_length[0], g.adjacency(&f));
    }

    #[test]
    fn apaw_matches_dp_and_naive() {
        let f = PrimeField::default();
        let p = f.modulus();
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for trial in 0..20 {
            let n = rng.gen_range(2..=16);
            let g = Graph::random(n, [0.1, 0.3, 0.7][trial % 3], true, &mut rng);
            let idx = index(&g);
            let t = apaw(&idx);
            assert_eq!(t, naive_apaw(&g, &f, idx.mu()));
            let dp = dp_walk_counts(&g, idx.mu()).unwrap();
            for k in 1..=idx.mu() {
                for u in 0..n {
                    for v in 0..n {
                        assert_eq!(t.get(u, v, k).value(), dp.residue(u, v, k, p));
                    }
                }
            }
        }
    }

    #[test]
    fn profiles_and_sets() {
        let g = Graph::from_edges(3, [(0, 0), (1, 2), (2, 1)]).unwrap();
        let idx = index(&g);
        assert_eq!(cycle_profile(&g, &idx, 0).unwrap().shortest, Some(1));
        let sets = cycle_sets(&g, &idx).unwrap();
        assert_eq!(sets.set(1), &[0]);
        assert_eq!(sets.set(2), &[0, 1, 2]);

        let g = Graph::cycle(3);
        let idx = index(&g);
        let prof = cycle_profile(&g, &idx, 1).unwrap();
        assert_eq!((prof.shortest, prof.counts[2]), (Some(3), FieldElem::ONE));
        assert_eq!(ansc(&g, &idx).unwrap(), vec![Some(3); 3]);
        let sets = cycle_sets(&g, &idx).unwrap();
        assert!(sets.set(1).is_empty() && sets.set(2).is_empty());
        assert_eq!(sets.set(3), &[0, 1, 2]);

        let dag = Graph::from_edges(4, [(0, 1), (1, 2), (0, 3), (3, 2)]).unwrap();
        assert_eq!(ansc(&dag, &index(&dag)).unwrap(), vec![None; 4]);
    }

    #[test]
    fn ansc_matches_bfs_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        for trial in 0..40 {
            let n = rng.gen_range(1..=20);
            let g = Graph::random(n, [0.05, 0.1, 0.3][trial % 3], trial % 2 == 0, &mut rng);
            let idx = index(&g);
            let got = ansc(&g, &idx).unwrap();
            let want: Vec<_> = (0..n).map(|u| bfs_shortest_cycle(&g, u)).collect();
            assert_eq!(got, want);
            let sets = cycle_sets(&g, &idx).unwrap();
            for c in 1..=sets.len() {
                let oracle: Vec<_> = (0..n).filter(|&u| want[u].is_some_and(|s| s <= c)).collect();
                assert_eq!(sets.set(c), &oracle[..]);
                if c > 1 {
                    assert!(sets.set(c - 1).iter().all(|x| sets.set(c).contains(x)));
                }
            }
        }
    }

    #[test]
    fn distance_matches_bfs() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        for trial in 0..50 {
            let n = rng.gen_range(2..=14);
            let g = Graph::random(n, [0.08, 0.2, 0.4][trial % 3], trial % 2 == 1, &mut rng);
            let idx = index(&g);
            for u in 0..n {
                let bfs = bfs_reachability(&g, u).unwrap();
                for v in 0..n {
                    let want = match bfs.dist[v] {
                        None => Distance::Unreachable,
                        Some(d) if d <= idx.mu() => Distance::Dist(d),
                        Some(_) => Distance::BeyondHorizon,
                    };
                    assert_eq!(distance(&idx, &g, u, v).unwrap(), want);
                }
            }
        }
    }

    #[test]
    fn diameter_reports() {
        let g = Graph::cycle(3);
        let r = diameter_mu_report(&g, &index(&g)).unwrap();
        assert_eq!((r.diameter, r.mu_min, r.d_le_mu_min, r.d_le_minpoly), (2, 3, true, true));
        let g = anti_parallel_square();
        let r = diameter_mu_report(&g, &index(&g)).unwrap();
        assert_eq!((r.diameter, r.mu_min, r.minpoly_deg), (2, 1, 3));
        assert!(!r.d_le_mu_min && r.d_le_minpoly && r.strongly_connected);
        // the fallback covers the pair at distance 2
        let idx = index(&g);
        assert_eq!(distance(&idx, &g, 0, 2).unwrap(), Distance::BeyondHorizon);
        assert_eq!(cycle_profile(&g, &idx, 0).unwrap().shortest, Some(2));
    }
}
