//! Minimum-weight perfect matching decoding and Monte Carlo benchmarking.

mod blossom;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::time::{Duration, Instant};

use thiserror::Error;

pub use blossom::max_weight_matching;

use crate::analysis::{dem_to_graph, AnalysisError, MatchingGraph};
use crate::circuit_ir::{Circuit, Instruction};
use crate::noise_sim::{apply_si1000, extract_dem, sample_frames_with, DetectorErrorModel, NoiseError, NoiseParams, Parallelism};

/// Fixed-point scale of log-likelihood weights.
const SCALE: f64 = 1e4;
const INF: i64 = i64::MAX / 4;
const NO_EDGE: u32 = u32::MAX;
/// Shots sampled per chunk while benchmarking.
const CHUNK: usize = 1 << 16;

/// CSV header of benchmark and sweep output.
pub const CSV_HEADER: &str = "case,basis,p,shots,errors,ler_per_round,ci_low,ci_high";

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("detector {id} out of range ({num_detectors} detectors)")]
    OutOfRange { id: u32, num_detectors: usize },
    #[error("fired detector {0} cannot be matched")]
    Unmatchable(u32),
    #[error("passes must be 1 or 2, got {0}")]
    Passes(u8),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

/// Fired detectors of one shot, ascending and without repeats.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Syndrome(Vec<u32>);

impl Syndrome {
    /// Repeated ids cancel in pairs.
    pub fn new(mut fired: Vec<u32>, num_detectors: usize) -> Result<Syndrome, DecodeError> {
        if let Some(&id) = fired.iter().find(|&&d| d as usize >= num_detectors) {
            return Err(DecodeError::OutOfRange { id, num_detectors });
        }
        fired.sort_unstable();
        let mut out: Vec<u32> = Vec::with_capacity(fired.len());
        for d in fired {
            if out.last() == Some(&d) {
                out.pop();
            } else {
                out.push(d);
            }
        }
        Ok(Syndrome(out))
    }

    pub fn fired(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Passes {
    One,
    Two,
}

impl TryFrom<u8> for Passes {
    type Error = DecodeError;

    fn try_from(n: u8) -> Result<Passes, DecodeError> {
        match n {
            1 => Ok(Passes::One),
            2 => Ok(Passes::Two),
            _ => Err(DecodeError::Passes(n)),
        }
    }
}

/// A perfect matching of fired detectors. A `None` partner is the boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    pub pairs: Vec<(u32, Option<u32>)>,
    /// Total fixed-point weight.
    pub weight: i64,
    /// Observable flips predicted by the matched paths.
    pub prediction: u64,
}

fn fixed_weight(q: f64) -> i64 {
    if q <= 0.0 {
        return INF;
    }
    let w = ((1.0 - q) / q).ln();
    ((w * SCALE).round() as i64).max(1)
}

/// Local pairs (partner `None` for the boundary), total weight, prediction.
type Solution = (Vec<(usize, Option<usize>)>, i64, u64);

/// Matches `k` nodes given pair and boundary costs. Returns pairs as local
/// indices, or the index of a node that has no partner.
fn solve(
    k: usize,
    pair: impl Fn(usize, usize) -> Option<(i64, u64)>,
    bnd: impl Fn(usize) -> Option<(i64, u64)>,
) -> Result<Solution, usize> {
    let b: Vec<Option<(i64, u64)>> = (0..k).map(&bnd).collect();
    let mut edges: Vec<(usize, usize, i64)> = Vec::new();
    let mut costs: HashMap<(usize, usize), (i64, u64)> = HashMap::new();
    let mut degree = vec![0usize; k];
    for i in 0..k {
        if let Some((w, _)) = b[i] {
            edges.push((i, k + i, w));
            degree[i] += 1;
        }
        for j in i + 1..k {
            let Some((w, par)) = pair(i, j) else { continue };
            // Sending both to the boundary is never worse.
            if let (Some(bi), Some(bj)) = (b[i], b[j]) {
                if w >= bi.0 + bj.0 {
                    continue;
                }
            }
            edges.push((i, j, w));
            costs.insert((i, j), (w, par));
            degree[i] += 1;
            degree[j] += 1;
        }
    }
    if let Some(i) = degree.iter().position(|&d| d == 0) {
        return Err(i);
    }
    let mut pairs: Vec<(usize, Option<usize>)> = Vec::new();
    match k {
        0 => {}
        1 => pairs.push((0, None)),
        _ => {
            for i in 0..k {
                for j in i + 1..k {
                    edges.push((k + i, k + j, 0));
                }
            }
            let big = edges.iter().map(|e| e.2).max().unwrap_or(0) + 1;
            let flipped: Vec<(usize, usize, i64)> = edges.iter().map(|&(i, j, w)| (i, j, big - w)).collect();
            let mate = max_weight_matching(2 * k, &flipped, true);
            for (i, &mi) in mate.iter().enumerate().take(k) {
                match mi {
                    Some(m) if m == k + i => pairs.push((i, None)),
                    Some(m) if m < k => {
                        if i < m {
                            pairs.push((i, Some(m)));
                        }
                    }
                    _ => return Err(i),
                }
            }
        }
    }
    let (mut weight, mut prediction) = (0, 0);
    for &(i, j) in &pairs {
        let (w, par) = match j {
            None => b[i].ok_or(i)?,
            Some(j) => costs[&(i, j)],
        };
        weight += w;
        prediction ^= par;
    }
    Ok((pairs, weight, prediction))
}

/// Minimum-weight pairing cost by exhaustive search over subsets. Exponential
/// in `k`; meant as an oracle for small syndromes.
fn brute_force(k: usize, pair: impl Fn(usize, usize) -> Option<i64>, bnd: impl Fn(usize) -> Option<i64>) -> Option<i64> {
    let full = (1usize << k) - 1;
    let mut best = vec![INF; full + 1];
    best[0] = 0;
    for mask in 1..=full {
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        let mut m = bnd(i).map_or(INF, |w| w.saturating_add(best[rest]));
        for j in (i + 1..k).filter(|j| rest >> j & 1 == 1) {
            if let Some(w) = pair(i, j) {
                m = m.min(w.saturating_add(best[rest & !(1 << j)]));
            }
        }
        best[mask] = m.min(INF);
    }
    (best[full] < INF).then_some(best[full])
}

/// All-pairs shortest paths on a matching graph, plus the correlation table
/// used by the second pass. Shared read-only between workers.
pub struct Decoder {
    graph: MatchingGraph,
    weights: Vec<i64>,
    n: usize,
    dist: Vec<i64>,
    parity: Vec<u64>,
    via: Vec<u32>,
    /// Per edge: partner edges of the same source mechanisms, with the
    /// conditional probability of the partner given this edge.
    correlations: Vec<Vec<(usize, f64)>>,
}

impl Decoder {
    /// Decoder for a graph without correlation data.
    pub fn from_graph(graph: MatchingGraph) -> Decoder {
        let weights: Vec<i64> = graph.edges.iter().map(|e| fixed_weight(e.probability.min(0.5))).collect();
        let n = graph.num_nodes();
        let mut dist = vec![INF; n * n];
        let mut parity = vec![0u64; n * n];
        let mut via = vec![NO_EDGE; n * n];
        let rows = dist.chunks_mut(n).zip(parity.chunks_mut(n)).zip(via.chunks_mut(n)).enumerate();
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            let rows: Vec<_> = rows.collect();
            rows.into_par_iter().for_each(|(s, ((d, p), v))| dijkstra(&graph, &weights, s, d, p, v));
        }
        #[cfg(not(feature = "parallel"))]
        for (s, ((d, p), v)) in rows {
            dijkstra(&graph, &weights, s, d, p, v);
        }
        let correlations = vec![Vec::new(); graph.edges.len()];
        Decoder { graph, weights, n, dist, parity, via, correlations }
    }

    /// Decoder for a detector error model, with correlations between the
    /// components of decomposed mechanisms.
    pub fn new(dem: &DetectorErrorModel) -> Result<Decoder, DecodeError> {
        let mut dec = Decoder::from_graph(dem_to_graph(dem)?);
        let index: HashMap<(usize, Option<usize>, u64), usize> =
            dec.graph.edges.iter().enumerate().map(|(k, e)| ((e.u, e.v, e.observables), k)).collect();
        for m in &dem.mechanisms {
            let parts: Vec<usize> = m
                .components
                .iter()
                .filter(|c| !c.detectors.is_empty())
                .map(|c| {
                    let u = c.detectors[0] as usize;
                    let v = c.detectors.get(1).map(|&d| d as usize);
                    index[&(u, v, c.observables)]
                })
                .collect();
            for &a in &parts {
                for &b in parts.iter().filter(|&&b| b != a) {
                    let q = (m.probability / dec.graph.edges[a].probability).clamp(1e-12, 0.5 - 1e-12);
                    dec.correlations[a].push((b, q));
                }
            }
        }
        Ok(dec)
    }

    pub fn graph(&self) -> &MatchingGraph {
        &self.graph
    }

    /// Fixed-point weight of an edge.
    pub fn edge_weight(&self, k: usize) -> i64 {
        self.weights[k]
    }

    fn cost(&self, a: usize, b: usize) -> Option<(i64, u64)> {
        let d = self.dist[a * self.n + b];
        (d < INF).then(|| (d, self.parity[a * self.n + b]))
    }

    /// First-pass minimum-weight perfect matching.
    pub fn decode(&self, syndrome: &Syndrome) -> Result<Matching, DecodeError> {
        let f = syndrome.fired();
        let bnd = self.graph.boundary();
        let (pairs, weight, prediction) = solve(f.len(), |i, j| self.cost(f[i] as usize, f[j] as usize), |i| self.cost(f[i] as usize, bnd))
            .map_err(|i| DecodeError::Unmatchable(f[i]))?;
        let pairs = pairs.into_iter().map(|(i, j)| (f[i], j.map(|j| f[j]))).collect();
        Ok(Matching { pairs, weight, prediction })
    }

    /// Edges on the stored shortest path between two nodes.
    fn path(&self, s: usize, t: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut v = t;
        while v != s {
            let k = self.via[s * self.n + v];
            if k == NO_EDGE {
                break;
            }
            let e = &self.graph.edges[k as usize];
            out.push(k as usize);
            v = if e.u == v { e.v.unwrap_or(self.graph.boundary()) } else { e.u };
        }
        out
    }

    /// Edges whose weight drops given the first-pass matching, with their new
    /// fixed-point weights.
    pub fn reweighted(&self, first: &Matching) -> BTreeMap<usize, i64> {
        let bnd = self.graph.boundary();
        let mut out: BTreeMap<usize, i64> = BTreeMap::new();
        for &(a, b) in &first.pairs {
            for e in self.path(a as usize, b.map_or(bnd, |b| b as usize)) {
                for &(partner, q) in &self.correlations[e] {
                    let w = fixed_weight(q);
                    if w < self.weights[partner] {
                        let slot = out.entry(partner).or_insert(w);
                        *slot = (*slot).min(w);
                    }
                }
            }
        }
        out
    }

    /// Reruns the matching with correlated edges reweighted. Falls back to the
    /// first pass when nothing changes.
    pub fn second_pass(&self, syndrome: &Syndrome, first: &Matching) -> Result<Matching, DecodeError> {
        let changed = self.reweighted(first);
        if changed.is_empty() {
            return Ok(first.clone());
        }
        // Lowered weights only shorten paths, and any new shortest path
        // alternates between old shortest paths and lowered edges, so a small
        // graph over the touched nodes is exact.
        let bnd = self.graph.boundary();
        let f = syndrome.fired();
        let mut nodes: Vec<usize> = f.iter().map(|&d| d as usize).collect();
        nodes.push(bnd);
        for &k in changed.keys() {
            let e = &self.graph.edges[k];
            nodes.extend([e.u, e.v.unwrap_or(bnd)]);
        }
        nodes[f.len() + 1..].sort_unstable();
        let mut seen = std::collections::HashSet::new();
        nodes.retain(|v| seen.insert(*v));
        let local: HashMap<usize, usize> = nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let m = nodes.len();
        let mut d = vec![INF; m * m];
        let mut p = vec![0u64; m * m];
        for i in 0..m {
            for j in 0..m {
                if let Some((w, par)) = self.cost(nodes[i], nodes[j]) {
                    d[i * m + j] = w;
                    p[i * m + j] = par;
                }
            }
        }
        for (&k, &w) in &changed {
            let e = &self.graph.edges[k];
            let (a, b) = (local[&e.u], local[&e.v.unwrap_or(bnd)]);
            for (x, y) in [(a, b), (b, a)] {
                if w < d[x * m + y] {
                    d[x * m + y] = w;
                    p[x * m + y] = e.observables;
                }
            }
        }
        for k in 0..m {
            for i in 0..m {
                let dik = d[i * m + k];
                if dik >= INF {
                    continue;
                }
                for j in 0..m {
                    let w = dik + d[k * m + j];
                    if w < d[i * m + j] {
                        d[i * m + j] = w;
                        p[i * m + j] = p[i * m + k] ^ p[k * m + j];
                    }
                }
            }
        }
        let b = local[&bnd];
        let get = |i: usize, j: usize| (d[i * m + j] < INF).then(|| (d[i * m + j], p[i * m + j]));
        let (pairs, weight, prediction) = solve(f.len(), get, |i| get(i, b)).map_err(|i| DecodeError::Unmatchable(f[i]))?;
        let pairs = pairs.into_iter().map(|(i, j)| (f[i], j.map(|j| f[j]))).collect();
        Ok(Matching { pairs, weight, prediction })
    }

    /// Predicted observable flips after one or two passes.
    pub fn predict(&self, syndrome: &Syndrome, passes: Passes) -> Result<u64, DecodeError> {
        let first = self.decode(syndrome)?;
        Ok(match passes {
            Passes::One => first.prediction,
            Passes::Two => self.second_pass(syndrome, &first)?.prediction,
        })
    }

    /// Minimum pairing weight found by exhaustive search.
    pub fn brute_force_weight(&self, syndrome: &Syndrome) -> Option<i64> {
        let f = syndrome.fired();
        let bnd = self.graph.boundary();
        brute_force(f.len(), |i, j| self.cost(f[i] as usize, f[j] as usize).map(|c| c.0), |i| self.cost(f[i] as usize, bnd).map(|c| c.0))
    }
}

fn dijkstra(graph: &MatchingGraph, weights: &[i64], s: usize, dist: &mut [i64], parity: &mut [u64], via: &mut [u32]) {
    let mut heap = BinaryHeap::new();
    dist[s] = 0;
    heap.push(Reverse((0i64, s)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for (u, k) in graph.neighbors(v) {
            let nd = d + weights[k];
            if nd < dist[u] {
                dist[u] = nd;
                parity[u] = parity[v] ^ graph.edges[k].observables;
                via[u] = k as u32;
                heap.push(Reverse((nd, u)));
            }
        }
    }
}

/// First-pass prediction for one syndrome. Builds a fresh decoder; reuse a
/// [`Decoder`] for many shots.
pub fn mwpm_decode(graph: &MatchingGraph, syndrome: &Syndrome) -> Result<u64, DecodeError> {
    Ok(Decoder::from_graph(graph.clone()).decode(syndrome)?.prediction)
}

/// Second-pass prediction for one syndrome given its first-pass matching.
pub fn correlated_second_pass(dem: &DetectorErrorModel, syndrome: &Syndrome, first: &Matching) -> Result<u64, DecodeError> {
    Ok(Decoder::new(dem)?.second_pass(syndrome, first)?.prediction)
}

/// Wilson score interval for `errors` out of `shots` at normal quantile `z`.
pub fn wilson_interval(errors: usize, shots: usize, z: f64) -> (f64, f64) {
    if shots == 0 {
        return (0.0, 1.0);
    }
    let n = shots as f64;
    let phat = errors as f64 / n;
    let z2 = z * z;
    let centre = (phat + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Per-round rate from a per-shot rate: `1 - (1 - p)^(1/rounds)`.
pub fn per_round(p_shot: f64, rounds: usize) -> f64 {
    1.0 - (1.0 - p_shot).powf(1.0 / rounds.max(1) as f64)
}

/// Number of measurement blocks, which is the number of rounds of an
/// emitted memory experiment.
pub fn count_rounds(circuit: &Circuit) -> usize {
    let mut blocks = 0;
    let mut open = false;
    for i in &circuit.instructions {
        match i {
            Instruction::Measure { .. } => {
                if !open {
                    blocks += 1;
                    open = true;
                }
            }
            Instruction::Detector { .. } | Instruction::Observable { .. } | Instruction::Noise { .. } => {}
            _ => open = false,
        }
    }
    blocks
}

#[derive(Clone, Debug)]
pub struct BenchmarkResult {
    pub shots: usize,
    pub errors: usize,
    pub rounds: usize,
    pub ler_per_shot: f64,
    pub ler_per_round: f64,
    /// 95% Wilson interval, per round.
    pub ci_low: f64,
    pub ci_high: f64,
    pub elapsed: Duration,
}

impl BenchmarkResult {
    pub fn from_counts(shots: usize, errors: usize, rounds: usize, elapsed: Duration) -> BenchmarkResult {
        let p = if shots == 0 { 0.0 } else { errors as f64 / shots as f64 };
        let (lo, hi) = wilson_interval(errors, shots, 1.96);
        BenchmarkResult {
            shots,
            errors,
            rounds,
            ler_per_shot: p,
            ler_per_round: per_round(p, rounds),
            ci_low: per_round(lo, rounds),
            ci_high: per_round(hi, rounds),
            elapsed,
        }
    }

    /// Same counts, ignoring wall time.
    pub fn same_outcome(&self, other: &BenchmarkResult) -> bool {
        (self.shots, self.errors, self.rounds) == (other.shots, other.errors, other.rounds)
    }

    /// One line matching [`CSV_HEADER`].
    pub fn csv_row(&self, case: &str, basis: &str, p: f64) -> String {
        format!("{case},{basis},{p},{},{},{:.6e},{:.6e},{:.6e}", self.shots, self.errors, self.ler_per_round, self.ci_low, self.ci_high)
    }
}

/// Samples SI1000 noise on a noiseless memory circuit and decodes every shot.
pub fn benchmark(circuit: &Circuit, params: NoiseParams, shots: usize, seed: u64, passes: Passes) -> Result<BenchmarkResult, DecodeError> {
    benchmark_with(circuit, params, shots, seed, passes, Parallelism::default())
}

pub fn benchmark_with(
    circuit: &Circuit,
    params: NoiseParams,
    shots: usize,
    seed: u64,
    passes: Passes,
    mode: Parallelism,
) -> Result<BenchmarkResult, DecodeError> {
    let start = Instant::now();
    let rounds = count_rounds(circuit);
    let noisy = apply_si1000(circuit, params);
    let decoder = Decoder::new(&extract_dem(&noisy))?;
    let nd = noisy.num_detectors();
    let mut errors = 0;
    for (c, first) in (0..shots).step_by(CHUNK).enumerate() {
        let n = CHUNK.min(shots - first);
        let chunk_seed = seed ^ (c as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let samples = sample_frames_with(&noisy, n, chunk_seed, mode)?;
        let wrong = |s: usize| -> Result<usize, DecodeError> {
            let syn = Syndrome::new(samples.fired(s), nd)?;
            Ok(usize::from(decoder.predict(&syn, passes)? != samples.observables(s)))
        };
        errors += match mode {
            Parallelism::Sequential => (0..n).map(wrong).sum::<Result<usize, _>>()?,
            #[cfg(feature = "parallel")]
            Parallelism::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(wrong).try_reduce(|| 0, |a, b| Ok(a + b))?
            }
        };
    }
    Ok(BenchmarkResult::from_counts(shots, errors, rounds, start.elapsed()))
}
