//! Instantaneous-stabilizer-group tracking and detector inference.
//!
//! Every basis element carries the set of measurement records whose parity
//! equals its eigenvalue, so a measurement that lies in the group yields a
//! detector directly. A separate flag marks dependence on the logical
//! observable being preserved.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::circuit_ir::{Circuit, Instruction, MeasRef};
use crate::gf2::{BitRow, Echelon};
use crate::layout::Half;
use crate::noise_sim::{apply_si1000, record_fault_table, NoiseParams};
use crate::pauli::{Basis, PauliString};
use crate::subsystem::SubsystemCode;

/// Record ids at or above this value are hidden reset outcomes.
const HIDDEN: usize = 1 << 40;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisElement {
    pub pauli: PauliString,
    pub origin_check: Option<usize>,
    /// Absolute measurement indices, ascending.
    pub recs: Vec<usize>,
    /// Eigenvalue also depends on the tracked logical.
    pub logical: bool,
}

impl BasisElement {
    /// The two most recent records, oldest first.
    pub fn last_meas(&self) -> &[usize] {
        let k = self.recs.len().saturating_sub(2);
        &self.recs[k..]
    }

    fn staleness_key(&self) -> (usize, std::cmp::Reverse<usize>) {
        (self.recs.last().copied().unwrap_or(0), std::cmp::Reverse(self.recs.len()))
    }
}

/// Symmetric difference of sorted lists.
fn xor_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn combine(a: &BasisElement, b: &BasisElement) -> BasisElement {
    BasisElement { pauli: a.pauli.mul(&b.pauli), origin_check: None, recs: xor_sorted(&a.recs, &b.recs), logical: a.logical ^ b.logical }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Random,
    /// Outcome equals the parity of `recs`, xor `flipped`, xor the logical when `logical`.
    Deterministic {
        recs: Vec<usize>,
        logical: bool,
        flipped: bool,
    },
}

#[derive(Clone, Debug)]
pub struct StabilizerBasis {
    pub elements: Vec<BasisElement>,
    pub measurement_count: usize,
    num_qubits: usize,
    hidden: usize,
}

impl StabilizerBasis {
    pub fn new(num_qubits: usize) -> StabilizerBasis {
        StabilizerBasis { elements: Vec::new(), measurement_count: 0, num_qubits, hidden: HIDDEN }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn apply_cx(&mut self, c: usize, t: usize) {
        for e in &mut self.elements {
            e.pauli.apply_cx(c, t);
        }
    }

    pub fn apply_h(&mut self, q: usize) {
        for e in &mut self.elements {
            e.pauli.apply_h(q);
        }
    }

    pub fn apply_s(&mut self, q: usize) {
        for e in &mut self.elements {
            e.pauli.apply_s(q);
        }
    }

    fn bits(&self, p: &PauliString) -> BitRow {
        let n = self.num_qubits;
        let mut r = BitRow::zeros(2 * n);
        for q in p.support() {
            if p.bit_x(q) {
                r.flip(q);
            }
            if p.bit_z(q) {
                r.flip(n + q);
            }
        }
        r
    }

    /// Indices of basis elements whose product is `g` up to sign.
    pub fn decompose(&self, g: &PauliString) -> Option<Vec<usize>> {
        let mut e = Echelon::new(2 * self.num_qubits, self.elements.len().max(1));
        for el in &self.elements {
            e.insert(&self.bits(&el.pauli));
        }
        e.express(&self.bits(g))
    }

    fn product(&self, idx: &[usize]) -> BasisElement {
        let mut acc = BasisElement { pauli: PauliString::identity(self.num_qubits), origin_check: None, recs: Vec::new(), logical: false };
        for &i in idx {
            acc = combine(&acc, &self.elements[i]);
        }
        acc
    }

    /// Replaces elements anticommuting with `g` by products of consecutive pairs.
    fn pair_anticommuting(&mut self, g: &PauliString) {
        let (anti, keep): (Vec<BasisElement>, Vec<BasisElement>) =
            std::mem::take(&mut self.elements).into_iter().partition(|e| !e.pauli.commutes(g));
        self.elements = keep;
        for w in anti.windows(2) {
            self.elements.push(combine(&w[0], &w[1]));
        }
    }

    /// Inserts `g` with the given records; returns the outcome prediction made
    /// before insertion.
    fn insert_measured(&mut self, g: &PauliString, recs: Vec<usize>, origin: Option<usize>) -> Outcome {
        let fresh = BasisElement { pauli: g.clone(), origin_check: origin, recs, logical: false };
        if self.elements.iter().any(|e| !e.pauli.commutes(g)) {
            self.pair_anticommuting(g);
            self.elements.push(fresh);
            self.normalize_logical();
            return Outcome::Random;
        }
        match self.decompose(g) {
            None => {
                self.elements.push(fresh);
                Outcome::Random
            }
            Some(idx) => {
                let prod = self.product(&idx);
                let flipped = prod.pauli.sign() != g.sign();
                // Replace the element carrying the stalest information.
                let victim = *idx
                    .iter()
                    .min_by(|&&a, &&b| {
                        let (ea, eb) = (&self.elements[a], &self.elements[b]);
                        eb.logical.cmp(&ea.logical).then(ea.staleness_key().cmp(&eb.staleness_key())).then(a.cmp(&b))
                    })
                    .expect("non-empty decomposition of a non-identity operator");
                self.elements[victim] = fresh;
                Outcome::Deterministic { recs: prod.recs, logical: prod.logical, flipped }
            }
        }
    }

    /// Measures `g` as record `measurement_count`.
    pub fn process_measurement(&mut self, g: &PauliString, origin: Option<usize>) -> (usize, Outcome) {
        assert!(!g.is_identity(), "cannot measure the identity");
        let m = self.measurement_count;
        self.measurement_count += 1;
        let mut g = g.clone();
        g.make_positive();
        let out = self.insert_measured(&g, vec![m], origin);
        (m, out)
    }

    /// Measures a single qubit.
    pub fn measure(&mut self, q: usize, basis: Basis) -> (usize, Outcome) {
        self.process_measurement(&PauliString::single(self.num_qubits, q, basis), None)
    }

    /// Resets `q` into the +1 eigenstate of `basis`.
    pub fn process_reset(&mut self, q: usize, basis: Basis) {
        let g = PauliString::single(self.num_qubits, q, basis);
        let fix = PauliString::single(self.num_qubits, q, basis.other());
        let known = if self.elements.iter().all(|e| e.pauli.commutes(&g)) { self.decompose(&g) } else { None };
        if let Some(idx) = known {
            // The outcome is already fixed by earlier records: apply the
            // correction to the eigenvalue expressions directly.
            let prod = self.product(&idx);
            let flipped = prod.pauli.sign() != g.sign();
            for e in self.elements.iter_mut().filter(|e| !e.pauli.commutes(&fix)) {
                e.recs = xor_sorted(&e.recs, &prod.recs);
                e.logical ^= prod.logical;
                if flipped {
                    e.pauli.negate();
                }
            }
            self.normalize_logical();
            return;
        }
        let h = self.hidden;
        self.hidden += 1;
        self.insert_measured(&g, vec![h], None);
        // Conditional correction flips everything anticommuting with it.
        for e in &mut self.elements {
            if !e.pauli.commutes(&fix) {
                e.recs = xor_sorted(&e.recs, &[h]);
            }
        }
        let holders: Vec<usize> = (0..self.elements.len()).filter(|&i| self.elements[i].recs.contains(&h)).collect();
        if let Some((&first, rest)) = holders.split_first() {
            let pivot = self.elements[first].clone();
            for &i in rest {
                self.elements[i] = combine(&self.elements[i], &pivot);
            }
            self.elements.remove(first);
        }
        self.normalize_logical();
    }

    /// Marks the elements whose eigenvalue flips under `conjugate` as
    /// logical-dependent. When `logical` is in the group it becomes the
    /// single flagged element.
    pub fn mark_logical(&mut self, conjugate: &PauliString, logical: Option<&PauliString>) {
        if let Some(l) = logical.filter(|l| self.elements.iter().all(|e| e.pauli.commutes(l))) {
            if let Some(idx) = self.decompose(l) {
                let prod = self.product(&idx);
                let victim = *idx.iter().find(|&&i| !self.elements[i].pauli.commutes(conjugate)).unwrap_or(&idx[0]);
                self.elements[victim] = BasisElement { pauli: prod.pauli, origin_check: None, recs: prod.recs, logical: false };
            }
        }
        for e in &mut self.elements {
            e.logical = !e.pauli.commutes(conjugate);
        }
        self.normalize_logical();
    }

    /// Keeps at most one element with the logical flag set, preferring the
    /// one with the fewest records as pivot.
    fn normalize_logical(&mut self) {
        let flagged: Vec<usize> = (0..self.elements.len()).filter(|&i| self.elements[i].logical).collect();
        let Some(&first) = flagged.iter().min_by_key(|&&i| (self.elements[i].recs.len(), i)) else {
            return;
        };
        let pivot = self.elements[first].clone();
        for &i in flagged.iter().filter(|&&i| i != first) {
            self.elements[i] = combine(&self.elements[i], &pivot);
        }
    }

    /// Pairwise commutation and independence, for tests.
    pub fn is_consistent(&self) -> bool {
        let all_commute = self.elements.iter().enumerate().all(|(i, a)| self.elements[i + 1..].iter().all(|b| a.pauli.commutes(&b.pauli)));
        let mut e = Echelon::new(2 * self.num_qubits, self.elements.len().max(1));
        let independent = self.elements.iter().all(|el| e.insert(&self.bits(&el.pauli)));
        all_commute && independent
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IsgError {
    #[error("gate at instruction {0} is not supported by the tracker")]
    Unsupported(usize),
    #[error("measurement {0} is deterministic with a fixed outcome of 1")]
    NegativeDetector(usize),
    #[error("circuit qubit {0} has no matching lattice qubit")]
    UnknownQubit(usize),
    #[error("no logical operator could be found for the code")]
    NoLogical,
    #[error("the observable could not be inferred")]
    NoObservable,
}

/// Result of running the tracker over a circuit.
#[derive(Clone, Debug, Default)]
pub struct Inference {
    /// Absolute records of each detector, the last one being the triggering measurement.
    pub detectors: Vec<Vec<usize>>,
    pub observable: Option<Vec<usize>>,
    pub random: Vec<usize>,
    pub deterministic_outcomes: BTreeMap<usize, bool>,
}

/// Where and how the logical observable is attached during tracking.
#[derive(Clone, Debug)]
pub struct LogicalMark {
    /// Instruction index after which the marking happens.
    pub position: usize,
    /// Operator whose anticommutation defines logical dependence.
    pub conjugate: PauliString,
    /// The preserved logical itself, used as the flagged element when present.
    pub logical: Option<PauliString>,
}

/// Runs the tracker, attaching the logical as described by `mark`.
pub fn track(circuit: &Circuit, mark: Option<&LogicalMark>) -> Result<Inference, IsgError> {
    let n = circuit.num_qubits();
    let mut basis = StabilizerBasis::new(n);
    let mut out = Inference::default();
    for (k, ins) in circuit.instructions.iter().enumerate() {
        match ins {
            Instruction::Reset { basis: b, targets } => {
                for &q in targets {
                    basis.process_reset(q, *b);
                }
            }
            Instruction::Cx { targets } => {
                for p in targets.chunks(2) {
                    basis.apply_cx(p[0], p[1]);
                }
            }
            Instruction::H { targets } => targets.iter().for_each(|&q| basis.apply_h(q)),
            Instruction::S { targets } => targets.iter().for_each(|&q| basis.apply_s(q)),
            Instruction::Measure { basis: b, targets } => {
                for &q in targets {
                    let (m, o) = basis.measure(q, *b);
                    match o {
                        Outcome::Random => out.random.push(m),
                        Outcome::Deterministic { recs, logical, flipped } => {
                            out.deterministic_outcomes.insert(m, flipped);
                            let mut rec = recs;
                            rec.push(m);
                            if logical {
                                match &out.observable {
                                    None => {
                                        out.observable = Some(rec);
                                        continue;
                                    }
                                    Some(obs) => rec = xor_sorted(&rec, obs),
                                }
                            }
                            if flipped {
                                return Err(IsgError::NegativeDetector(m));
                            }
                            out.detectors.push(rec);
                        }
                    }
                }
            }
            Instruction::Tick | Instruction::QubitCoord { .. } | Instruction::Detector { .. } | Instruction::Observable { .. } => {}
            Instruction::Noise { .. } => {}
        }
        if let Some(m) = mark.filter(|m| m.position == k) {
            basis.mark_logical(&m.conjugate, m.logical.as_ref());
        }
    }
    Ok(out)
}

/// Writes inferred detectors and the observable into a copy of `circuit`.
///
/// Detectors go right after the measurement block holding their last record,
/// with coordinates `(x, y, t)` of that measurement's qubit and block number.
pub fn annotate(circuit: &Circuit, inf: &Inference) -> Circuit {
    let coords = circuit.qubit_coords();
    let mut by_last: BTreeMap<usize, Vec<&Vec<usize>>> = BTreeMap::new();
    for d in &inf.detectors {
        by_last.entry(*d.iter().max().unwrap()).or_default().push(d);
    }
    let mut meas_qubit = Vec::new();
    let mut out = Circuit::new();
    let mut count = 0usize;
    let mut block = 0i64;
    let ins = &circuit.without_annotations().instructions;
    for (k, i) in ins.iter().enumerate() {
        out.push(i.clone());
        if let Instruction::Measure { targets, .. } = i {
            meas_qubit.extend(targets.iter().copied());
            count += targets.len();
            let next_is_measure = matches!(ins.get(k + 1), Some(Instruction::Measure { .. }));
            if next_is_measure {
                continue;
            }
            for (&last, dets) in by_last.range(..count) {
                for d in dets {
                    let q = meas_qubit[last];
                    let c = coords.get(&q).copied().unwrap_or_else(|| crate::layout::Coord::new(q as i64, 0));
                    let refs = d.iter().rev().map(|&r| MeasRef((count - r) as u32)).collect();
                    out.push(Instruction::Detector { args: vec![c.x, c.y, Half::from_int(block)], refs });
                }
            }
            by_last = by_last.split_off(&count);
            block += 1;
        }
    }
    if let Some(obs) = &inf.observable {
        let refs = obs.iter().rev().map(|&r| MeasRef((count - r) as u32)).collect();
        out.push(Instruction::Observable { index: 0, refs });
    }
    out
}

/// Memory basis of a circuit, read off its final measurement block.
pub fn memory_basis(circuit: &Circuit) -> Basis {
    let mut counts = [0usize; 2];
    let mut last_block: Vec<&Instruction> = Vec::new();
    for i in circuit.instructions.iter().rev() {
        match i {
            Instruction::Measure { .. } => last_block.push(i),
            Instruction::Detector { .. } | Instruction::Observable { .. } => {}
            _ if !last_block.is_empty() => break,
            _ => {}
        }
    }
    for i in last_block {
        if let Instruction::Measure { basis, targets } = i {
            counts[(*basis == Basis::Z) as usize] += targets.len();
        }
    }
    if counts[0] >= counts[1] {
        Basis::X
    } else {
        Basis::Z
    }
}

/// Index of the instruction after which the circuit sits at mid-cycle for the
/// first time: the second CX layer, which closes the initial expansion.
pub fn midcycle_point(circuit: &Circuit) -> Option<usize> {
    circuit.instructions.iter().enumerate().filter(|(_, i)| matches!(i, Instruction::Cx { .. })).nth(1).map(|(k, _)| k)
}

/// Re-derives every detector and the memory observable of `circuit`.
pub fn infer_all(circuit: &Circuit, code: &SubsystemCode) -> Result<Circuit, IsgError> {
    let bare = circuit.without_annotations();
    let memory = memory_basis(&bare);
    let mark = LogicalMark {
        position: midcycle_point(&bare).ok_or(IsgError::NoObservable)?,
        conjugate: circuit_logical(&bare, code, memory.other())?,
        logical: Some(circuit_logical(&bare, code, memory)?),
    };
    let mut inf = track(&bare, Some(&mark))?;
    if inf.observable.is_none() {
        return Err(IsgError::NoObservable);
    }
    localize(&bare, &mut inf);
    Ok(annotate(&bare, &inf))
}

/// Detectors paired with the set of fault locations flipping each one.
struct Signed {
    rows: Vec<Vec<usize>>,
    sigs: Vec<Vec<u64>>,
}

fn sig_weight(s: &[u64]) -> u32 {
    s.iter().map(|x| x.count_ones()).sum()
}

fn sig_cost(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum()
}

fn sig_xor(a: &mut [u64], b: &[u64]) {
    a.iter_mut().zip(b).for_each(|(x, y)| *x ^= y);
}

impl Signed {
    fn total(&self) -> u64 {
        self.sigs.iter().map(|s| sig_weight(s) as u64).sum()
    }

    /// Faults are numbered in circuit order. Gives every detector its own
    /// earliest fault, so none reaches further back than it has to.
    fn separate_leads(&mut self) {
        let lead = |s: &[u64]| s.iter().position(|&w| w != 0).map(|k| k * 64 + s[k].trailing_zeros() as usize);
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        order.sort_by_key(|&i| (self.rows[i].last().copied(), sig_weight(&self.sigs[i])));
        let mut by_lead: HashMap<usize, usize> = HashMap::new();
        let mut rows: Vec<Vec<usize>> = Vec::with_capacity(order.len());
        let mut sigs: Vec<Vec<u64>> = Vec::with_capacity(order.len());
        for i in order {
            let mut r = std::mem::take(&mut self.rows[i]);
            let mut sg = std::mem::take(&mut self.sigs[i]);
            while let Some(&j) = lead(&sg).and_then(|l| by_lead.get(&l)) {
                r = xor_sorted(&r, &rows[j]);
                sig_xor(&mut sg, &sigs[j]);
            }
            if let Some(l) = lead(&sg) {
                by_lead.insert(l, rows.len());
            }
            rows.push(r);
            sigs.push(sg);
        }
        self.rows = rows;
        self.sigs = sigs;
    }

    /// Minimum-weight basis among the rows and their lighter pairwise sums,
    /// picked greedily. Returns whether the total weight dropped.
    fn reselect(&mut self, num_records: usize) -> bool {
        let n = self.rows.len();
        let mut pool: Vec<(u32, Vec<usize>, Vec<u64>)> =
            self.rows.iter().zip(&self.sigs).map(|(r, s)| (sig_weight(s), r.clone(), s.clone())).collect();
        for i in 0..n {
            let wi = sig_weight(&self.sigs[i]);
            for j in i + 1..n {
                let c = sig_cost(&self.sigs[i], &self.sigs[j]);
                if c < wi.max(sig_weight(&self.sigs[j])) {
                    let mut sg = self.sigs[i].clone();
                    sig_xor(&mut sg, &self.sigs[j]);
                    pool.push((c, xor_sorted(&self.rows[i], &self.rows[j]), sg));
                }
            }
        }
        pool.sort_by(|a, b| (a.0, a.1.len(), a.1.last()).cmp(&(b.0, b.1.len(), b.1.last())));
        let mut ech: Vec<(usize, BitRow)> = Vec::new();
        let mut picked = Signed { rows: Vec::with_capacity(n), sigs: Vec::with_capacity(n) };
        for (_, r, sg) in pool {
            if picked.rows.len() == n {
                break;
            }
            let mut v = BitRow::from_ones(num_records, r.iter().copied());
            for (p, row) in &ech {
                if v.get(*p) {
                    v.xor_assign(row);
                }
            }
            if let Some(p) = v.first_one() {
                for (_, row) in ech.iter_mut() {
                    if row.get(p) {
                        row.xor_assign(&v);
                    }
                }
                ech.push((p, v));
                picked.rows.push(r);
                picked.sigs.push(sg);
            }
        }
        if picked.total() < self.total() {
            *self = picked;
            true
        } else {
            false
        }
    }
}

impl Signed {
    /// Local moves aimed at faults that still flip three or more detectors.
    fn repair(&mut self) {
        let bits = self.sigs.first().map_or(0, |s| s.len() * 64);
        let has = |s: &[u64], f: usize| s[f / 64] >> (f % 64) & 1 == 1;
        let mut count = vec![0i32; bits];
        for s in &self.sigs {
            for (k, &w) in s.iter().enumerate() {
                let mut w = w;
                while w != 0 {
                    count[k * 64 + w.trailing_zeros() as usize] += 1;
                    w &= w - 1;
                }
            }
        }
        let pen = |c: i32| (c - 2).max(0);
        for _ in 0..64 {
            let mut improved = false;
            for f in 0..bits {
                if count[f] <= 2 {
                    continue;
                }
                let dets: Vec<usize> = (0..self.sigs.len()).filter(|&i| has(&self.sigs[i], f)).collect();
                let mut best: Option<(i32, usize, usize)> = None;
                for &i in &dets {
                    for &j in dets.iter().filter(|&&j| j != i) {
                        let mut delta = 0;
                        for (k, (&a, &b)) in self.sigs[i].iter().zip(&self.sigs[j]).enumerate() {
                            let mut w = b;
                            while w != 0 {
                                let g = k * 64 + w.trailing_zeros() as usize;
                                let c = count[g];
                                delta += if a >> (g % 64) & 1 == 1 { pen(c - 1) - pen(c) } else { pen(c + 1) - pen(c) };
                                w &= w - 1;
                            }
                        }
                        if delta < 0 && best.is_none_or(|(d, _, _)| delta < d) {
                            best = Some((delta, i, j));
                        }
                    }
                }
                if let Some((_, i, j)) = best {
                    let sj = self.sigs[j].clone();
                    for (k, (&a, &b)) in self.sigs[i].iter().zip(&sj).enumerate() {
                        let mut w = b;
                        while w != 0 {
                            let g = k * 64 + w.trailing_zeros() as usize;
                            count[g] += if a >> (g % 64) & 1 == 1 { -1 } else { 1 };
                            w &= w - 1;
                        }
                    }
                    sig_xor(&mut self.sigs[i], &sj);
                    self.rows[i] = xor_sorted(&self.rows[i], &self.rows[j]);
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
    }
}

/// Rewrites the detectors so that few circuit faults flip each one.
///
/// The cost of a detector is the number of SI1000 fault locations that flip
/// it. Low cost spread evenly means each fault lands on few detectors, which
/// keeps the error model graphlike. Only the basis changes, never the span.
pub fn localize(circuit: &Circuit, inf: &mut Inference) {
    let noisy = apply_si1000(circuit, NoiseParams::new(1e-3).expect("valid strength"));
    let table = record_fault_table(&noisy);
    let words = table.first().map_or(0, Vec::len);
    let sig = |v: &[usize]| {
        let mut s = vec![0u64; words];
        for &r in v {
            sig_xor(&mut s, &table[r]);
        }
        s
    };
    let rows = std::mem::take(&mut inf.detectors);
    let sigs = rows.iter().map(|r| sig(r)).collect();
    let mut set = Signed { rows, sigs };
    let nrec = circuit.num_measurements();
    loop {
        let before = set.total();
        set.separate_leads();
        while set.reselect(nrec) {}
        if set.total() >= before {
            break;
        }
    }
    set.repair();
    if let Some(mut o) = inf.observable.take() {
        // Shorten the observable by whichever detector helps most.
        let mut s = sig(&o);
        while let Some((c, j)) = set.sigs.iter().enumerate().map(|(j, t)| (sig_cost(&s, t), j)).min() {
            if c >= sig_weight(&s) {
                break;
            }
            o = xor_sorted(&o, &set.rows[j]);
            sig_xor(&mut s, &set.sigs[j]);
        }
        inf.observable = Some(o);
    }
    inf.detectors = set.rows;
}

/// A bare logical of `code` of the given basis, in circuit qubit indices.
pub fn circuit_logical(circuit: &Circuit, code: &SubsystemCode, basis: Basis) -> Result<PauliString, IsgError> {
    let (xl, zl) = code.bare_logicals().ok_or(IsgError::NoLogical)?;
    let l = if basis == Basis::X { xl } else { zl };
    let coords = circuit.qubit_coords();
    let mut to_circuit = BTreeMap::new();
    for (&cq, &c) in &coords {
        let lq = code.lattice.index_of(c).ok_or(IsgError::UnknownQubit(cq))?;
        to_circuit.insert(lq, cq);
    }
    let n = circuit.num_qubits();
    let mut out = PauliString::identity(n);
    for q in l.support() {
        let cq = *to_circuit.get(&q).ok_or(IsgError::UnknownQubit(q))?;
        out.set(cq, l.get(q));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repeated_measurement_gives_detector() {
        let mut b = StabilizerBasis::new(1);
        b.process_reset(0, Basis::Z);
        let (m0, o0) = b.measure(0, Basis::Z);
        assert_eq!(o0, Outcome::Deterministic { recs: vec![], logical: false, flipped: false });
        let (_, o1) = b.measure(0, Basis::Z);
        assert_eq!(o1, Outcome::Deterministic { recs: vec![m0], logical: false, flipped: false });
    }

    #[test]
    fn anticommuting_measurement_replaces() {
        let mut b = StabilizerBasis::new(1);
        b.process_reset(0, Basis::Z);
        let (_, o) = b.measure(0, Basis::X);
        assert_eq!(o, Outcome::Random);
        assert_eq!(b.elements.len(), 1);
        assert_eq!(b.elements[0].pauli, PauliString::single(1, 0, Basis::X));
    }

    #[test]
    fn reset_of_entangled_qubit() {
        let mut b = StabilizerBasis::new(2);
        b.process_reset(0, Basis::X);
        b.process_reset(1, Basis::Z);
        b.apply_cx(0, 1);
        assert_eq!(b.elements.len(), 2);
        b.process_reset(0, Basis::Z);
        // Qubit 1 is left maximally mixed.
        assert_eq!(b.elements.len(), 1);
        assert_eq!(b.elements[0].pauli, PauliString::single(2, 0, Basis::Z));
        assert!(b.is_consistent());
    }
}
