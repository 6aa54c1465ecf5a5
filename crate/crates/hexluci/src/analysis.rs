//! Matching graphs and graphlike circuit distance.

use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use crate::circuit_ir::Circuit;
use crate::layout::{DefectMap, HexLattice};
use crate::noise_sim::{apply_si1000, extract_dem, DetectorErrorModel, NoiseParams};
use crate::pauli::Basis;
use crate::schedule::{build_board, emit_circuit, EmitError, ScheduleError};
use crate::subsystem::{build_midcycle_code, SubsystemError};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("mechanism {index} ({symptom}) has no graphlike decomposition")]
    Hyperedge { index: usize, symptom: String },
    #[error(transparent)]
    Code(#[from] SubsystemError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Emit(#[from] EmitError),
}

/// One edge of a matching graph. `v == None` is the boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: Option<usize>,
    pub probability: f64,
    pub observables: u64,
    /// Indices of the mechanisms that contribute to this edge.
    pub sources: Vec<usize>,
}

impl Edge {
    /// Log-likelihood weight `ln((1 - q) / q)`.
    pub fn weight(&self) -> f64 {
        ((1.0 - self.probability) / self.probability).ln()
    }
}

#[derive(Clone, Debug)]
pub struct MatchingGraph {
    pub num_detectors: usize,
    pub num_observables: usize,
    pub edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
}

impl MatchingGraph {
    /// Node id of the virtual boundary.
    pub fn boundary(&self) -> usize {
        self.num_detectors
    }

    pub fn num_nodes(&self) -> usize {
        self.num_detectors + 1
    }

    /// Edge indices incident to `node`, boundary included.
    pub fn incident(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    fn far(&self, e: &Edge, from: usize) -> usize {
        let v = e.v.unwrap_or(self.boundary());
        if e.u == from {
            v
        } else {
            e.u
        }
    }

    /// Neighbors of `node` with the connecting edge index.
    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency[node].iter().map(move |&k| (self.far(&self.edges[k], node), k))
    }

    pub fn num_boundary_edges(&self) -> usize {
        self.edges.iter().filter(|e| e.v.is_none()).count()
    }

    /// Whether every node with an edge can reach the boundary.
    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.num_nodes()];
        let mut queue = VecDeque::from([self.boundary()]);
        seen[self.boundary()] = true;
        while let Some(n) = queue.pop_front() {
            for (m, _) in self.neighbors(n) {
                if !seen[m] {
                    seen[m] = true;
                    queue.push_back(m);
                }
            }
        }
        (0..self.num_detectors).all(|d| seen[d] || self.adjacency[d].is_empty())
    }
}

/// Builds the matching graph of a detector error model.
///
/// Each graphlike component becomes an edge. Components with the same
/// endpoints and observable mask merge as independent flips; components with
/// different masks stay separate edges.
pub fn dem_to_graph(dem: &DetectorErrorModel) -> Result<MatchingGraph, AnalysisError> {
    let mut merged: BTreeMap<(usize, Option<usize>, u64), Edge> = BTreeMap::new();
    for (index, m) in dem.mechanisms.iter().enumerate() {
        if m.components.iter().any(|c| !c.is_graphlike()) {
            return Err(AnalysisError::Hyperedge { index, symptom: m.symptom.to_string() });
        }
        for c in m.components.iter().filter(|c| !c.detectors.is_empty()) {
            let (u, v) = match c.detectors[..] {
                [a] => (a as usize, None),
                [a, b] => (a as usize, Some(b as usize)),
                _ => unreachable!("graphlike components flip one or two detectors"),
            };
            let e = merged.entry((u, v, c.observables)).or_insert_with(|| Edge {
                u,
                v,
                probability: 0.0,
                observables: c.observables,
                sources: Vec::new(),
            });
            let (p, q) = (e.probability, m.probability);
            e.probability = p * (1.0 - q) + q * (1.0 - p);
            e.sources.push(index);
        }
    }
    let edges: Vec<Edge> = merged.into_values().collect();
    let mut adjacency = vec![Vec::new(); dem.num_detectors + 1];
    for (k, e) in edges.iter().enumerate() {
        adjacency[e.u].push(k);
        adjacency[e.v.unwrap_or(dem.num_detectors)].push(k);
    }
    Ok(MatchingGraph { num_detectors: dem.num_detectors, num_observables: dem.num_observables, edges, adjacency })
}

/// Fewest edges in a closed walk that flips observable 0.
///
/// Walks through the boundary count, so boundary-to-boundary chains are
/// included. `None` means no such walk exists.
pub fn graphlike_distance(graph: &MatchingGraph) -> Option<usize> {
    let n = graph.num_nodes();
    let from = |s: usize| -> Option<usize> {
        // Breadth-first search over (node, observable parity).
        let mut dist = vec![usize::MAX; 2 * n];
        dist[2 * s] = 0;
        let mut queue = VecDeque::from([2 * s]);
        while let Some(state) = queue.pop_front() {
            let (node, par) = (state / 2, state % 2);
            if node == s && par == 1 {
                return Some(dist[state]);
            }
            for (m, k) in graph.neighbors(node) {
                let next = 2 * m + (par ^ (graph.edges[k].observables & 1) as usize);
                if dist[next] == usize::MAX {
                    dist[next] = dist[state] + 1;
                    queue.push_back(next);
                }
            }
        }
        None
    };
    // Any odd closed walk passes through an endpoint of an odd edge.
    let mut starts: Vec<usize> =
        graph.edges.iter().filter(|e| e.observables & 1 == 1).flat_map(|e| [e.u, e.v.unwrap_or(graph.boundary())]).collect();
    starts.sort_unstable();
    starts.dedup();
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        starts.par_iter().filter_map(|&s| from(s)).min()
    }
    #[cfg(not(feature = "parallel"))]
    {
        starts.iter().filter_map(|&s| from(s)).min()
    }
}

/// Exhaustive distance of a small error model: the fewest mechanisms whose
/// symptoms cancel while flipping observable 0, searched up to `max_weight`.
pub fn brute_force_distance(dem: &DetectorErrorModel, max_weight: usize) -> Option<usize> {
    let sym: Vec<(Vec<u32>, u64)> = dem.mechanisms.iter().map(|m| (m.symptom.detectors.clone(), m.symptom.observables)).collect();
    fn xor(a: &[u32], b: &[u32]) -> Vec<u32> {
        let mut out: Vec<u32> = a.iter().chain(b).copied().collect();
        out.sort_unstable();
        let mut res = Vec::with_capacity(out.len());
        for x in out {
            if res.last() == Some(&x) {
                res.pop();
            } else {
                res.push(x);
            }
        }
        res
    }
    fn search(sym: &[(Vec<u32>, u64)], start: usize, left: usize, det: &[u32], obs: u64) -> bool {
        if left == 0 {
            return det.is_empty() && obs & 1 == 1;
        }
        (start..sym.len()).any(|k| search(sym, k + 1, left - 1, &xor(det, &sym[k].0), obs ^ sym[k].1))
    }
    (1..=max_weight).find(|&w| search(&sym, 0, w, &[], 0))
}

/// Graphlike distance of a noiseless circuit under SI1000 noise at `p = 1e-3`.
pub fn circuit_distance(circuit: &Circuit) -> Result<Option<usize>, AnalysisError> {
    let noisy = apply_si1000(circuit, NoiseParams::new(1e-3).expect("valid strength"));
    let graph = dem_to_graph(&extract_dem(&noisy))?;
    Ok(graphlike_distance(&graph))
}

/// Distances of the X and Z memory experiments on a defective lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DistancePair {
    pub x: Option<usize>,
    pub z: Option<usize>,
}

impl DistancePair {
    pub fn get(&self, basis: Basis) -> Option<usize> {
        match basis {
            Basis::X => self.x,
            Basis::Z => self.z,
        }
    }
}

pub fn distance_pair(lattice: &HexLattice, defects: &DefectMap, cycles: usize) -> Result<DistancePair, AnalysisError> {
    let code = build_midcycle_code(lattice, defects)?;
    let board = build_board(&code)?;
    let x = circuit_distance(&emit_circuit(&board, cycles, Basis::X)?)?;
    let z = circuit_distance(&emit_circuit(&board, cycles, Basis::Z)?)?;
    Ok(DistancePair { x, z })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise_sim::{Mechanism, Symptom};

    fn mech(p: f64, dets: &[u32], obs: u64) -> Mechanism {
        let s = Symptom { detectors: dets.to_vec(), observables: obs };
        Mechanism { probability: p, symptom: s.clone(), components: vec![s] }
    }

    fn chain(n: u32) -> DetectorErrorModel {
        // Repetition-code line: boundary - D0 - D1 - ... - boundary.
        let mut m = vec![mech(0.1, &[0], 1)];
        m.extend((1..n).map(|k| mech(0.1, &[k - 1, k], 0)));
        m.push(mech(0.1, &[n - 1], 0));
        DetectorErrorModel { num_detectors: n as usize, num_observables: 1, mechanisms: m }
    }

    #[test]
    fn edges_and_boundary() {
        let g = dem_to_graph(&chain(3)).unwrap();
        assert_eq!(g.edges.len(), 4);
        assert_eq!(g.num_boundary_edges(), 2);
        assert!(g.is_connected());
        let b = g.edges.iter().find(|e| e.v.is_none() && e.u == 0).unwrap();
        assert_eq!(b.observables, 1);
        assert!((b.weight() - (0.9f64 / 0.1).ln()).abs() < 1e-12);
    }

    #[test]
    fn parallel_edges_merge() {
        let mut dem = chain(2);
        dem.mechanisms.push(mech(0.2, &[0, 1], 0));
        let g = dem_to_graph(&dem).unwrap();
        let e = g.edges.iter().find(|e| e.v == Some(1)).unwrap();
        assert!((e.probability - 0.26).abs() < 1e-12);
        assert_eq!(e.sources.len(), 2);
    }

    #[test]
    fn chain_distance_is_its_length() {
        for n in 1..6 {
            let dem = chain(n);
            let g = dem_to_graph(&dem).unwrap();
            assert_eq!(graphlike_distance(&g), Some(n as usize + 1));
            assert_eq!(brute_force_distance(&dem, n as usize + 2), Some(n as usize + 1));
        }
    }

    #[test]
    fn hyperedge_is_rejected() {
        let mut dem = chain(3);
        dem.mechanisms.push(mech(0.1, &[0, 1, 2], 0));
        assert!(matches!(dem_to_graph(&dem), Err(AnalysisError::Hyperedge { .. })));
    }

    #[test]
    fn no_logical_path() {
        let dem = DetectorErrorModel { num_detectors: 2, num_observables: 1, mechanisms: vec![mech(0.1, &[0, 1], 0)] };
        assert_eq!(graphlike_distance(&dem_to_graph(&dem).unwrap()), None);
    }
}
