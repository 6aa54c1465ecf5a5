//! Detector error model extraction.
//!
//! Every noise channel is split into independent single-Pauli mechanisms.
//! Their symptoms are found by pushing 64 elementary faults at a time through
//! the frame simulator with noise switched off.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write};

use thiserror::Error;

use super::frame::{step, Frame};
use super::{Op, Program};
use crate::circuit_ir::{Circuit, NoiseChannel};
use crate::pauli::Pauli;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DemError {
    #[error("{count} mechanisms could not be split into graphlike pieces, e.g. {example}")]
    Undecomposable { count: usize, example: String },
}

/// Detectors and observables flipped together.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symptom {
    pub detectors: Vec<u32>,
    pub observables: u64,
}

impl Symptom {
    pub fn is_empty(&self) -> bool {
        self.detectors.is_empty() && self.observables == 0
    }

    pub fn is_graphlike(&self) -> bool {
        self.detectors.len() <= 2
    }

    pub fn xor(&self, other: &Symptom) -> Symptom {
        let mut d: Vec<u32> = Vec::with_capacity(self.detectors.len() + other.detectors.len());
        let (a, b) = (&self.detectors, &other.detectors);
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i] < b[j]) {
                d.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j] < a[i] {
                d.push(b[j]);
                j += 1;
            } else {
                i += 1;
                j += 1;
            }
        }
        Symptom { detectors: d, observables: self.observables ^ other.observables }
    }
}

impl fmt::Display for Symptom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for d in &self.detectors {
            if !first {
                f.write_char(' ')?;
            }
            write!(f, "D{d}")?;
            first = false;
        }
        for k in 0..64 {
            if self.observables >> k & 1 == 1 {
                if !first {
                    f.write_char(' ')?;
                }
                write!(f, "L{k}")?;
                first = false;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mechanism {
    pub probability: f64,
    pub symptom: Symptom,
    /// Graphlike pieces whose combined symptom is `symptom`.
    pub components: Vec<Symptom>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectorErrorModel {
    pub num_detectors: usize,
    pub num_observables: usize,
    pub mechanisms: Vec<Mechanism>,
}

impl DetectorErrorModel {
    /// Text form, one `error(p) D1 D2 ^ D3 L0` line per mechanism.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for m in &self.mechanisms {
            let parts: Vec<String> = m.components.iter().map(|c| c.to_string()).collect();
            writeln!(s, "error({}) {}", m.probability, parts.join(" ^ ")).unwrap();
        }
        s
    }

    /// Probability that each detector fires.
    pub fn detector_marginals(&self) -> Vec<f64> {
        let mut keep = vec![1.0f64; self.num_detectors];
        for m in &self.mechanisms {
            for &d in &m.symptom.detectors {
                keep[d as usize] *= 1.0 - 2.0 * m.probability;
            }
        }
        keep.into_iter().map(|k| (1.0 - k) / 2.0).collect()
    }

    /// Mechanisms that are not graphlike even after splitting.
    pub fn hyperedges(&self) -> impl Iterator<Item = &Mechanism> {
        self.mechanisms.iter().filter(|m| m.components.iter().any(|c| !c.is_graphlike()))
    }

    /// Fails when some mechanism has no graphlike decomposition.
    pub fn require_graphlike(&self) -> Result<(), DemError> {
        let bad: Vec<&Mechanism> = self.hyperedges().collect();
        match bad.first() {
            None => Ok(()),
            Some(m) => Err(DemError::Undecomposable { count: bad.len(), example: m.symptom.to_string() }),
        }
    }
}

/// Independent probability of each of `k` equally likely Paulis in a
/// depolarizing channel of total strength `p` over `k + 1` outcomes.
fn independent_rate(p: f64, k: usize) -> f64 {
    let base = (1.0 - p * (k as f64 + 1.0) / k as f64).max(0.0);
    let exponent = 1.0 / ((k + 1) as f64 / 2.0);
    (1.0 - base.powf(exponent)) / 2.0
}

/// One X or Z flip at a noise op.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Elementary {
    op: usize,
    qubit: usize,
    z: bool,
}

/// Measurement flips of up to 64 faults, one bit per fault.
fn flip_words(prog: &Program, faults: &[Elementary]) -> Vec<u64> {
    let mut at: HashMap<usize, Vec<(usize, usize, bool)>> = HashMap::new();
    for (lane, f) in faults.iter().enumerate() {
        at.entry(f.op).or_default().push((lane, f.qubit, f.z));
    }
    let mut frame = Frame::new(prog.num_qubits, prog.num_measurements);
    for (k, op) in prog.ops.iter().enumerate() {
        step(op, &mut frame, None);
        // Noise ops are no-ops here; the fault appears right where the channel sits.
        if let Some(list) = at.get(&k) {
            for &(lane, q, z) in list {
                if z {
                    frame.z[q] ^= 1 << lane;
                } else {
                    frame.x[q] ^= 1 << lane;
                }
            }
        }
    }
    frame.meas
}

fn propagate(prog: &Program, faults: &[Elementary]) -> Vec<Symptom> {
    let meas = flip_words(prog, faults);
    let mut out = vec![Symptom::default(); faults.len()];
    for (d, recs) in prog.detectors.iter().enumerate() {
        let mut w = recs.iter().fold(0u64, |a, &m| a ^ meas[m]);
        while w != 0 {
            out[w.trailing_zeros() as usize].detectors.push(d as u32);
            w &= w - 1;
        }
    }
    for (k, recs) in prog.observables.iter().enumerate() {
        let mut w = recs.iter().fold(0u64, |a, &m| a ^ meas[m]);
        while w != 0 {
            out[w.trailing_zeros() as usize].observables |= 1 << k;
            w &= w - 1;
        }
    }
    out
}

fn elementary_faults(raws: &[Raw]) -> Vec<Elementary> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for r in raws {
        for &(q, p) in &r.paulis {
            let (x, z) = parts_of(p);
            for (flag, is_z) in [(x, false), (z, true)] {
                let e = Elementary { op: r.op, qubit: q, z: is_z };
                if flag && seen.insert(e) {
                    out.push(e);
                }
            }
        }
    }
    out
}

/// For every measurement record of a noisy circuit, the set of elementary
/// faults that flip it, packed 64 faults per word.
pub(crate) fn record_fault_table(circuit: &Circuit) -> Vec<Vec<u64>> {
    let prog = Program::compile(circuit);
    let faults = elementary_faults(&raw_mechanisms(&prog));
    let mut table = vec![Vec::with_capacity(faults.len().div_ceil(64)); prog.num_measurements];
    for chunk in faults.chunks(64) {
        for (row, w) in table.iter_mut().zip(flip_words(&prog, chunk)) {
            row.push(w);
        }
    }
    table
}

/// A single-Pauli mechanism before merging.
struct Raw {
    p: f64,
    /// (qubit, pauli) pieces acting at the same op.
    paulis: Vec<(usize, Pauli)>,
    op: usize,
}

fn raw_mechanisms(prog: &Program) -> Vec<Raw> {
    let mut out = Vec::new();
    const P: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    for (k, op) in prog.ops.iter().enumerate() {
        let Op::Noise(channel, p, targets) = op else {
            continue;
        };
        if *p <= 0.0 {
            continue;
        }
        match channel {
            NoiseChannel::XError => out.extend(targets.iter().map(|&q| Raw { p: *p, paulis: vec![(q, Pauli::X)], op: k })),
            NoiseChannel::ZError => out.extend(targets.iter().map(|&q| Raw { p: *p, paulis: vec![(q, Pauli::Z)], op: k })),
            NoiseChannel::Depolarize1 => {
                let q1 = independent_rate(*p, 3);
                for &q in targets {
                    for pauli in &P[1..] {
                        out.push(Raw { p: q1, paulis: vec![(q, *pauli)], op: k });
                    }
                }
            }
            NoiseChannel::Depolarize2 => {
                let q2 = independent_rate(*p, 15);
                for pair in targets.chunks(2) {
                    for idx in 1..16 {
                        let paulis = [(pair[0], P[idx / 4]), (pair[1], P[idx % 4])].into_iter().filter(|(_, p)| *p != Pauli::I).collect();
                        out.push(Raw { p: q2, paulis, op: k });
                    }
                }
            }
        }
    }
    out
}

fn parts_of(p: Pauli) -> (bool, bool) {
    match p {
        Pauli::I => (false, false),
        Pauli::X => (true, false),
        Pauli::Y => (true, true),
        Pauli::Z => (false, true),
    }
}

/// Splits `s` into two known graphlike symptoms when possible. With `lenient`
/// only one half has to be known; the other half becomes a new edge.
fn split_known(s: &Symptom, known: &HashMap<Vec<u32>, u64>, lenient: bool) -> Option<Vec<Symptom>> {
    let d = &s.detectors;
    if d.len() > 4 {
        return None;
    }
    let n = d.len();
    for mask in 1..(1u32 << n) - 1 {
        // Count each unordered split once.
        if mask & 1 == 0 {
            continue;
        }
        let a: Vec<u32> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| d[i]).collect();
        let b: Vec<u32> = (0..n).filter(|i| mask >> i & 1 == 0).map(|i| d[i]).collect();
        if a.len() > 2 || b.len() > 2 {
            continue;
        }
        match (known.get(&a), known.get(&b)) {
            (Some(&oa), Some(&ob)) if oa ^ ob == s.observables => {
                return Some(vec![Symptom { detectors: a, observables: oa }, Symptom { detectors: b, observables: ob }]);
            }
            (Some(&oa), _) | (_, Some(&oa)) if lenient => {
                let (ka, kb) = if known.contains_key(&a) { (a, b) } else { (b, a) };
                return Some(vec![Symptom { detectors: ka, observables: oa }, Symptom { detectors: kb, observables: oa ^ s.observables }]);
            }
            _ => {}
        }
    }
    None
}

/// Extracts the detector error model of a noisy circuit.
pub fn extract_dem(circuit: &Circuit) -> DetectorErrorModel {
    let prog = Program::compile(circuit);
    let raws = raw_mechanisms(&prog);

    let elementary = elementary_faults(&raws);
    let index: HashMap<Elementary, usize> = elementary.iter().enumerate().map(|(k, &e)| (e, k)).collect();
    let mut symptoms = Vec::with_capacity(elementary.len());
    for chunk in elementary.chunks(64) {
        symptoms.extend(propagate(&prog, chunk));
    }
    let sym = |e: Elementary| &symptoms[index[&e]];

    // Symptom of each raw mechanism, with its X part and Z part.
    struct Split {
        p: f64,
        full: Symptom,
        x: Symptom,
        z: Symptom,
        pieces: Vec<Symptom>,
    }
    let splits: Vec<Split> = raws
        .iter()
        .map(|r| {
            let (mut x, mut z) = (Symptom::default(), Symptom::default());
            let mut pieces = Vec::new();
            for &(q, p) in &r.paulis {
                let (px, pz) = parts_of(p);
                if px {
                    let s = sym(Elementary { op: r.op, qubit: q, z: false });
                    x = x.xor(s);
                    pieces.push(s.clone());
                }
                if pz {
                    let s = sym(Elementary { op: r.op, qubit: q, z: true });
                    z = z.xor(s);
                    pieces.push(s.clone());
                }
            }
            Split { p: r.p, full: x.xor(&z), x, z, pieces }
        })
        .collect();

    let mut known: HashMap<Vec<u32>, u64> = HashMap::new();
    for s in &splits {
        if s.full.is_graphlike() && !s.full.is_empty() {
            known.entry(s.full.detectors.clone()).or_insert(s.full.observables);
        }
    }

    let decompose = |s: &Split| -> Vec<Symptom> {
        if s.full.is_graphlike() {
            return vec![s.full.clone()];
        }
        let nonempty = |v: Vec<Symptom>| -> Vec<Symptom> { v.into_iter().filter(|c| !c.is_empty()).collect() };
        let xz = nonempty(vec![s.x.clone(), s.z.clone()]);
        if xz.iter().all(Symptom::is_graphlike) {
            return xz;
        }
        // Cancel pieces that appear twice, then try the single-qubit pieces.
        let mut counts: BTreeMap<Symptom, usize> = BTreeMap::new();
        for p in s.pieces.iter().filter(|p| !p.is_empty()) {
            *counts.entry(p.clone()).or_default() += 1;
        }
        let pieces: Vec<Symptom> = counts.into_iter().filter(|(_, c)| c % 2 == 1).map(|(p, _)| p).collect();
        if pieces.iter().all(Symptom::is_graphlike) {
            return pieces;
        }
        let mut out = Vec::new();
        for part in &xz {
            if part.is_graphlike() {
                out.push(part.clone());
            } else if let Some(v) = split_known(part, &known, false).or_else(|| split_known(part, &known, true)) {
                out.extend(v);
            } else {
                // Last resort: consecutive pairs, observable on the first.
                for (k, pair) in part.detectors.chunks(2).enumerate() {
                    let observables = if k == 0 { part.observables } else { 0 };
                    out.push(Symptom { detectors: pair.to_vec(), observables });
                }
            }
        }
        out
    };

    let mut merged: BTreeMap<Symptom, Mechanism> = BTreeMap::new();
    for s in &splits {
        if s.full.is_empty() {
            continue;
        }
        match merged.get_mut(&s.full) {
            Some(m) => m.probability = m.probability * (1.0 - s.p) + s.p * (1.0 - m.probability),
            None => {
                let components = decompose(s);
                merged.insert(s.full.clone(), Mechanism { probability: s.p, symptom: s.full.clone(), components });
            }
        }
    }
    DetectorErrorModel {
        num_detectors: prog.detectors.len(),
        num_observables: prog.observables.len(),
        mechanisms: merged.into_values().collect(),
    }
}
