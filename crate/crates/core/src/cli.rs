//! The `walkforge` command line.
//!
//! Exit codes: 0 success, 1 parse or I/O failure, 2 contract violation (for
//! example a length beyond the horizon without `--fallback`), 3 verification
//! mismatch.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::bench::{bench_graph, bench_sizes, format_table};
use crate::error::{Error, Result};
use crate::field::{FieldElem, PrimeField, DEFAULT_PRIME, NTT_PRIMES};
use crate::frobenius::verify_form;
use crate::graph::Graph;
use crate::graph_algos::{ansc, apaw_stream, bfs_reachability, cycle_profile, cycle_sets};
use crate::io::{is_index_file, read_edge_list, read_index, write_index};
use crate::oracle::{bfs_shortest_cycle, dp_walk_counts, invariant_factors_bruteforce};
use crate::walk_oracle::{distance, fallback_power_row, preprocess, Distance, PreprocessConfig, PrimeChoice, WalkIndex};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONTRACT: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "walkforge", version, about = "Walk counts, distances and shortest cycles in digraphs")]
struct Cli {
    /// Worker threads (falls back to WALKFORGE_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct PrimeArgs {
    /// Prime modulus used when preprocessing.
    #[arg(long, conflicts_with = "random_prime")]
    prime: Option<u64>,
    /// Draw the modulus from the NTT-friendly table.
    #[arg(long)]
    random_prime: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl PrimeArgs {
    fn config(&self) -> PreprocessConfig {
        let prime = match (self.prime, self.random_prime) {
            (_, true) => PrimeChoice::Random,
            (Some(p), false) => PrimeChoice::Fixed(p),
            (None, false) => PrimeChoice::Fixed(DEFAULT_PRIME),
        };
        PreprocessConfig { prime, seed: self.seed }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ApawFormat {
    /// One file per length, `n` rows of `n` residues.
    PerK,
    /// One JSON object per ordered pair.
    Jsonl,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decompose a graph and write its index.
    Preprocess {
        graph: PathBuf,
        #[arg(short = 'o', long)]
        output: PathBuf,
        #[command(flatten)]
        prime: PrimeArgs,
    },
    /// Walk counts for one pair.
    Query {
        index: PathBuf,
        #[arg(short = 'u')]
        u: usize,
        #[arg(short = 'v')]
        v: usize,
        /// Walks of length exactly K.
        #[arg(long, group = "mode")]
        k: Option<usize>,
        /// All lengths up to the horizon.
        #[arg(long, group = "mode")]
        all: bool,
        /// Walks of length at most K.
        #[arg(long, group = "mode")]
        upto: Option<usize>,
        /// Answer lengths beyond the horizon by repeated products.
        #[arg(long)]
        fallback: bool,
    },
    /// Shortest walk length from U to V.
    Distance {
        index: PathBuf,
        #[arg(short = 'u')]
        u: usize,
        #[arg(short = 'v')]
        v: usize,
        /// Resolve lengths beyond the horizon by repeated products.
        #[arg(long)]
        fallback: bool,
    },
    /// Shortest cycle through every vertex.
    Ansc {
        input: PathBuf,
        #[command(flatten)]
        prime: PrimeArgs,
    },
    /// Walk counts for every pair and every length up to the horizon.
    Apaw {
        input: PathBuf,
        /// Output directory; stdout (JSON lines) when absent.
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ApawFormat::PerK)]
        format: ApawFormat,
        #[command(flatten)]
        prime: PrimeArgs,
    },
    /// Vertices on a cycle of length at most c, for each c.
    CycleSets {
        input: PathBuf,
        #[command(flatten)]
        prime: PrimeArgs,
    },
    /// Cross-check every query path against the brute-force references.
    Verify {
        /// Graph to check; random graphs when absent.
        graph: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Largest random graph size.
        #[arg(long, default_value_t = 20)]
        max_n: usize,
        #[command(flatten)]
        prime: PrimeArgs,
    },
    /// Time the indexed all-pairs table against repeated products.
    Bench {
        /// Graph to time; random graphs of `--sizes` when absent.
        graph: Option<PathBuf>,
        /// Also time the repeated-product baseline.
        #[arg(long)]
        baseline: bool,
        #[arg(long, value_delimiter = ',', default_values_t = [128usize, 256, 512])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 0.3)]
        density: f64,
        /// Print a text table instead of JSON.
        #[arg(long)]
        table: bool,
        #[command(flatten)]
        prime: PrimeArgs,
    },
}

/// Parses `args` (including the program name) and runs the command, writing
/// results to `out` and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_IO,
            };
            let _ = if code == EXIT_OK { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let threads = cli
        .threads
        .or_else(|| std::env::var("WALKFORGE_THREADS").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker pool: {e}");
            return EXIT_IO;
        }
    };
    match pool.install(|| dispatch(cli.command, out)) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Io(_) | Error::IndexFormat(_) => EXIT_IO,
        _ => EXIT_CONTRACT,
    }
}

fn emit(out: &mut (dyn Write + Send), v: &Value) -> Result<()> {
    writeln!(out, "{v}")?;
    Ok(())
}

fn meta(idx: &WalkIndex) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("p".into(), json!(idx.field().modulus()));
    m.insert("exactness".into(), json!("mod_p"));
    m.insert("n".into(), json!(idx.n()));
    m.insert("mu".into(), json!(idx.mu()));
    m
}

fn with_meta(idx: &WalkIndex, extra: Value) -> Value {
    let mut m = meta(idx);
    if let Value::Object(e) = extra {
        m.extend(e);
    }
    Value::Object(m)
}

fn values(xs: &[FieldElem]) -> Vec<u64> {
    xs.iter().map(|x| x.value()).collect()
}

/// An index file is used as is; an edge list is preprocessed first.
fn load_input(path: &Path, prime: &PrimeArgs) -> Result<(Graph, WalkIndex)> {
    if is_index_file(path)? {
        let idx = read_index(path)?;
        Ok((idx.graph()?, idx))
    } else {
        let g = read_edge_list(path)?;
        let (_, idx) = preprocess(&g, &prime.config())?;
        Ok((g, idx))
    }
}

fn dispatch(cmd: Command, out: &mut (dyn Write + Send)) -> Result<i32> {
    match cmd {
        Command::Preprocess { graph, output, prime } => {
            let g = read_edge_list(&graph)?;
            let (form, idx) = preprocess(&g, &prime.config())?;
            write_index(&output, &idx)?;
            emit(
                out,
                &with_meta(
                    &idx,
                    json!({
                        "index": output.display().to_string(),
                        "block_degrees": form.block_degrees(),
                        "minpoly_deg": idx.minpoly_deg(),
                        "stored_columns": idx.stored_columns(),
                        "graph_hash": format!("{:016x}", g.content_hash()),
                    }),
                ),
            )?;
        }
        Command::Query { index, u, v, k, all, upto, fallback } => {
            let idx = read_index(&index)?;
            let res = if let Some(k) = k {
                let count = if k > idx.mu() && k >= 1 && fallback {
                    idx.check_pair(u, v)?;
                    fallback_power_row(idx.field(), &idx.graph()?, u, k)?[k - 1][v]
                } else {
                    idx.query_walk_count(u, v, k)?
                };
                json!({ "u": u, "v": v, "k": k, "count": count.value() })
            } else if let Some(k) = upto {
                let count = if k > idx.mu() && fallback {
                    idx.check_pair(u, v)?;
                    let f = *idx.field();
                    let rows = fallback_power_row(&f, &idx.graph()?, u, k)?;
                    rows.iter().fold(FieldElem::ZERO, |acc, r| f.add(acc, r[v]))
                } else {
                    idx.query_prefix_count(u, v, k)?
                };
                json!({ "u": u, "v": v, "upto": k, "count": count.value() })
            } else {
                let _ = all;
                let w = idx.query_all_lengths(u, v)?;
                json!({ "u": u, "v": v, "counts": values(&w.counts) })
            };
            emit(out, &with_meta(&idx, res))?;
        }
        Command::Distance { index, u, v, fallback } => {
            let idx = read_index(&index)?;
            let g = idx.graph()?;
            let mut d = distance(&idx, &g, u, v)?;
            if d == Distance::BeyondHorizon && fallback {
                let rows = fallback_power_row(idx.field(), &g, u, g.n())?;
                if let Some(k) = rows.iter().position(|r| !r[v].is_zero()) {
                    d = Distance::Dist(k + 1);
                }
            }
            let (status, dist) = match d {
                Distance::Dist(k) => ("reachable", json!(k)),
                Distance::Unreachable => ("unreachable", Value::Null),
                Distance::BeyondHorizon => ("beyond_horizon", Value::Null),
            };
            emit(out, &with_meta(&idx, json!({ "u": u, "v": v, "dist": dist, "status": status })))?;
        }
        Command::Ansc { input, prime } => {
            let (g, idx) = load_input(&input, &prime)?;
            let shortest = ansc(&g, &idx)?;
            emit(out, &with_meta(&idx, json!({ "shortest": shortest })))?;
        }
        Command::CycleSets { input, prime } => {
            let (g, idx) = load_input(&input, &prime)?;
            let sets = cycle_sets(&g, &idx)?;
            emit(out, &with_meta(&idx, json!({ "k": sets.len(), "sets": sets.sets })))?;
        }
        Command::Apaw { input, output, format, prime } => {
            let (_, idx) = load_input(&input, &prime)?;
            run_apaw(&idx, output.as_deref(), format, out)?;
        }
        Command::Verify { graph, trials, max_n, prime } => return run_verify(graph.as_deref(), trials, max_n, &prime, out),
        Command::Bench { graph, baseline, sizes, density, table, prime } => {
            let rows = match graph {
                Some(path) => vec![bench_graph(&read_edge_list(&path)?, &prime.config(), baseline)?],
                None => bench_sizes(&sizes, density, prime.seed, baseline)?,
            };
            if table {
                write!(out, "{}", format_table(&rows))?;
            } else {
                emit(out, &json!({ "exactness": "mod_p", "rows": rows }))?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn run_apaw(idx: &WalkIndex, dir: Option<&Path>, format: ApawFormat, out: &mut (dyn Write + Send)) -> Result<()> {
    let n = idx.n();
    let mut failure: Option<std::io::Error> = None;
    let mut note = |r: std::io::Result<()>| {
        if let Err(e) = r {
            failure.get_or_insert(e);
        }
    };
    match (dir, format) {
        (None, _) => {
            emit(out, &Value::Object(meta(idx)))?;
            apaw_stream(idx, |u, v, c| note(writeln!(out, "{}", json!({ "u": u, "v": v, "counts": values(c) }))));
        }
        (Some(dir), ApawFormat::Jsonl) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("meta.json"), Value::Object(meta(idx)).to_string())?;
            let mut w = BufWriter::new(fs::File::create(dir.join("apaw.jsonl"))?);
            apaw_stream(idx, |u, v, c| note(writeln!(w, "{}", json!({ "u": u, "v": v, "counts": values(c) }))));
            note(w.flush());
            emit(out, &with_meta(idx, json!({ "output": dir.join("apaw.jsonl").display().to_string() })))?;
        }
        (Some(dir), ApawFormat::PerK) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("meta.json"), Value::Object(meta(idx)).to_string())?;
            let mut files = (1..=idx.mu())
                .map(|k| Ok(BufWriter::new(fs::File::create(dir.join(format!("k{k}.txt")))?)))
                .collect::<Result<Vec<_>>>()?;
            apaw_stream(idx, |_, v, c| {
                for (f, x) in files.iter_mut().zip(c) {
                    let sep = if v + 1 == n { "\n" } else { " " };
                    note(write!(f, "{}{}", x.value(), sep));
                }
            });
            for f in &mut files {
                note(f.flush());
            }
            emit(out, &with_meta(idx, json!({ "output": dir.display().to_string(), "files": idx.mu() })))?;
        }
    }
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

/// A second modulus different from `p`.
fn second_prime(p: u64) -> u64 {
    *NTT_PRIMES.iter().rev().find(|&&q| q != p).expect("table has several primes")
}

fn check_graph(g: &Graph, prime: &PrimeArgs) -> Result<Option<String>> {
    let (form, idx) = preprocess(g, &prime.config())?;
    let f = *idx.field();
    let p = f.modulus();
    let n = g.n();
    let a = g.adjacency(&f);
    if !verify_form(&a, &form) {
        return Ok(Some("decomposition does not reproduce the adjacency matrix".into()));
    }
    if n <= 32 {
        let degs: Vec<usize> = invariant_factors_bruteforce(&a)?.iter().map(|x| x.len() - 1).collect();
        if degs != form.block_degrees() {
            return Ok(Some(format!("block degrees {:?}, invariant factors {:?}", form.block_degrees(), degs)));
        }
    }
    let dp = dp_walk_counts(g, idx.mu().min(crate::oracle::DP_MAX_K))?;
    for u in 0..n {
        for v in 0..n {
            let all = idx.query_all_lengths(u, v)?.counts;
            let mut prefix = 0u64;
            for k in 1..=dp.k {
                let want = dp.residue(u, v, k, p);
                prefix = (prefix + want) % p;
                let single = idx.query_walk_count(u, v, k)?.value();
                let pre = idx.query_prefix_count(u, v, k)?.value();
                if single != want || all[k - 1].value() != want || pre != prefix {
                    return Ok(Some(format!(
                        "pair ({u}, {v}) length {k}: oracle {want}, single {single}, all {}, prefix {pre} vs {prefix}",
                        all[k - 1].value()
                    )));
                }
            }
        }
        let bfs = bfs_reachability(g, u)?;
        for v in 0..n {
            let want = match bfs.dist[v] {
                None => Distance::Unreachable,
                Some(d) if d <= idx.mu() => Distance::Dist(d),
                Some(_) => Distance::BeyondHorizon,
            };
            let got = distance(&idx, g, u, v)?;
            if got != want && !confirmed_false_zero(g, prime, u, v, &want)? {
                return Ok(Some(format!("distance ({u}, {v}): got {got:?}, breadth-first search {want:?}")));
            }
        }
        let got = cycle_profile(g, &idx, u)?.shortest;
        let want = bfs_shortest_cycle(g, u);
        if got != want {
            // a count divisible by p reads as zero; retry under another prime
            let alt = PrimeArgs { prime: Some(second_prime(p)), random_prime: false, seed: prime.seed };
            let (_, idx2) = preprocess(g, &alt.config())?;
            if cycle_profile(g, &idx2, u)?.shortest != want {
                return Ok(Some(format!("shortest cycle through {u}: got {got:?}, oracle {want:?}")));
            }
        }
    }
    Ok(None)
}

fn confirmed_false_zero(g: &Graph, prime: &PrimeArgs, u: usize, v: usize, want: &Distance) -> Result<bool> {
    let p = match prime.config().prime {
        PrimeChoice::Fixed(p) => p,
        PrimeChoice::Random => DEFAULT_PRIME,
    };
    let alt = PrimeArgs { prime: Some(second_prime(p)), random_prime: false, seed: prime.seed };
    let (_, idx) = preprocess(g, &alt.config())?;
    Ok(&distance(&idx, g, u, v)? == want)
}

fn run_verify(graph: Option<&Path>, trials: usize, max_n: usize, prime: &PrimeArgs, out: &mut (dyn Write + Send)) -> Result<i32> {
    let graphs: Vec<Graph> = match graph {
        Some(path) => vec![read_edge_list(path)?],
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(prime.seed);
            (0..trials)
                .map(|_| {
                    let n = rng.gen_range(1..=max_n.max(1));
                    let density = [0.05, 0.1, 0.2, 0.4][rng.gen_range(0..4)];
                    Graph::random(n, density, rng.gen_bool(0.5), &mut rng)
                })
                .collect()
        }
    };
    let p = match prime.config().prime {
        PrimeChoice::Fixed(p) => PrimeField::new(p)?.modulus(),
        PrimeChoice::Random => 0,
    };
    for (i, g) in graphs.iter().enumerate() {
        if let Some(msg) = check_graph(g, prime)? {
            emit(
                out,
                &json!({
                    "status": "mismatch",
                    "trial": i,
                    "detail": msg,
                    "n": g.n(),
                    "edges": g.edges().map(|(a, b)| [a, b]).collect::<Vec<_>>(),
                }),
            )?;
            return Ok(EXIT_MISMATCH);
        }
    }
    let mut summary = json!({ "status": "ok", "graphs": graphs.len(), "exactness": "mod_p" });
    if p != 0 {
        summary["p"] = json!(p);
    }
    emit(out, &summary)?;
    Ok(EXIT_OK)
}
