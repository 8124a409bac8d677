//! Wall-clock comparison of the indexed all-pairs table against repeated
//! matrix products. Both sides stream their output into a running checksum
//! so neither materializes the full table.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::field::FieldElem;
use crate::graph::Graph;
use crate::graph_algos::{apaw_stream, naive_apaw_stream};
use crate::walk_oracle::{preprocess, PreprocessConfig};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub edges: usize,
    pub mu: usize,
    pub preprocess_secs: f64,
    pub apaw_secs: f64,
    /// Present when the baseline ran.
    pub naive_secs: Option<f64>,
    /// Both sides hash the same values in the same order, so these agree.
    pub apaw_checksum: u64,
    pub naive_checksum: Option<u64>,
}

impl BenchRow {
    /// Indexed total (preprocessing included) over the baseline.
    pub fn speedup(&self) -> Option<f64> {
        self.naive_secs.map(|b| b / (self.preprocess_secs + self.apaw_secs))
    }
}

fn mix(h: u64, u: usize, v: usize, k: usize, c: FieldElem) -> u64 {
    let x = (u as u64) << 42 ^ (v as u64) << 21 ^ k as u64;
    h.wrapping_add((x ^ c.value()).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub fn bench_graph(g: &Graph, config: &PreprocessConfig, baseline: bool) -> Result<BenchRow> {
    let t = Instant::now();
    let (_, idx) = preprocess(g, config)?;
    let preprocess_secs = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let mut apaw_checksum = 0u64;
    apaw_stream(&idx, |u, v, counts| {
        for (i, &c) in counts.iter().enumerate() {
            apaw_checksum = mix(apaw_checksum, u, v, i + 1, c);
        }
    });
    let apaw_secs = t.elapsed().as_secs_f64();

    let (naive_secs, naive_checksum) = if baseline {
        let t = Instant::now();
        let mut h = 0u64;
        naive_apaw_stream(g, idx.field(), idx.mu(), |k, m| {
            for u in 0..m.rows() {
                for (v, &c) in m.row(u).iter().enumerate() {
                    h = mix(h, u, v, k, c);
                }
            }
        });
        (Some(t.elapsed().as_secs_f64()), Some(h))
    } else {
        (None, None)
    };

    Ok(BenchRow {
        n: g.n(),
        edges: g.edge_count(),
        mu: idx.mu(),
        preprocess_secs,
        apaw_secs,
        naive_secs,
        apaw_checksum,
        naive_checksum,
    })
}

/// One random graph per size.
pub fn bench_sizes(sizes: &[usize], density: f64, seed: u64, baseline: bool) -> Result<Vec<BenchRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sizes
        .iter()
        .map(|&n| {
            let g = Graph::random(n, density, true, &mut rng);
            bench_graph(&g, &PreprocessConfig { seed, ..Default::default() }, baseline)
        })
        .collect()
}

pub fn format_table(rows: &[BenchRow]) -> String {
    let mut s = String::from("     n      m    mu  preprocess(s)    apaw(s)   naive(s)  speedup\n");
    for r in rows {
        let naive = r.naive_secs.map_or("-".to_string(), |x| format!("{x:.3}"));
        let speed = r.speedup().map_or("-".to_string(), |x| format!("{x:.2}x"));
        s.push_str(&format!(
            "{:>6} {:>6} {:>5} {:>14.3} {:>10.3} {:>10} {:>8}\n",
            r.n, r.edges, r.mu, r.preprocess_secs, r.apaw_secs, naive, speed
        ));
    }
    s
}
