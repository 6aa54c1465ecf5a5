//! Four-round measurement schedule and circuit emission.
//!
//! Round types: 0 even-diagonal X gauges, 1 odd X, 2 even Z, 3 odd Z.
//! Stabilizers are measured in both rounds of their diagonal.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::circuit_ir::{Circuit, Instruction};
use crate::pauli::{Basis, PauliString};
use crate::subsystem::{CheckKind, SubsystemCode};

pub type CxLayer = Vec<(usize, usize)>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("round {round}: qubit {qubit} is used twice in one CX layer")]
    LayerCollision { round: u8, qubit: usize },
    #[error("round {round}: checks {a} and {b} contract onto the same qubit")]
    SiteCollision { round: u8, a: usize, b: usize },
    #[error("round {round}: checks {a} and {b} do not commute")]
    Anticommuting { round: u8, a: usize, b: usize },
    #[error("round {round}: check {check} does not contract onto its site")]
    Contraction { round: u8, check: usize },
    #[error("at least one round is required")]
    NoCycles,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Round {
    pub round_type: u8,
    /// Every check measured this round, extras included, in check order.
    pub measured: Vec<usize>,
    /// Checks of the skipped basis added by augmentation.
    pub extras: Vec<usize>,
    /// Contraction layers: vertical couplers first, then horizontal.
    pub contraction: [CxLayer; 2],
}

impl Round {
    pub fn gauge_basis(&self) -> Basis {
        gauge_basis(self.round_type)
    }

    pub fn diagonal(&self) -> u8 {
        self.round_type % 2
    }

    /// The four CX layers run before this round's measurement when it follows `prev`.
    pub fn cx_layers(&self, prev: &Round) -> [CxLayer; 4] {
        [prev.contraction[1].clone(), prev.contraction[0].clone(), self.contraction[0].clone(), self.contraction[1].clone()]
    }
}

pub fn gauge_basis(round_type: u8) -> Basis {
    if round_type < 2 {
        Basis::X
    } else {
        Basis::Z
    }
}

#[derive(Clone, Debug)]
pub struct LuciBoard {
    pub code: SubsystemCode,
    /// Indexed by round type.
    pub rounds: Vec<Round>,
}

impl LuciBoard {
    pub fn round(&self, round_type: u8) -> &Round {
        &self.rounds[round_type as usize % 4]
    }
}

fn base_measured(code: &SubsystemCode, t: u8) -> Vec<usize> {
    code.checks
        .iter()
        .enumerate()
        .filter(|(_, c)| c.diagonal == t % 2)
        .filter(|(_, c)| c.kind == CheckKind::Stabilizer || c.basis == gauge_basis(t))
        .map(|(i, _)| i)
        .collect()
}

/// Builds the four rounds without augmentation.
pub fn build_luci_rounds(code: &SubsystemCode) -> Result<LuciBoard, ScheduleError> {
    let extras = vec![Vec::new(); 4];
    board_with(code, extras)
}

fn board_with(code: &SubsystemCode, extras: Vec<Vec<usize>>) -> Result<LuciBoard, ScheduleError> {
    let mut rounds = Vec::with_capacity(4);
    for (t, ext) in (0u8..4).zip(extras) {
        let mut measured = base_measured(code, t);
        measured.extend(ext.iter().copied());
        measured.sort_unstable();
        let contraction = contraction_layers(code, t, &measured)?;
        rounds.push(Round { round_type: t, measured, extras: ext, contraction });
    }
    let board = LuciBoard { code: code.clone(), rounds };
    for r in &board.rounds {
        verify_round(&board.code, r)?;
    }
    Ok(board)
}

fn contraction_layers(code: &SubsystemCode, t: u8, measured: &[usize]) -> Result<[CxLayer; 2], ScheduleError> {
    let lat = &code.lattice;
    let mut vert = BTreeSet::new();
    let mut horiz = BTreeSet::new();
    for &ci in measured {
        let c = &code.checks[ci];
        for e in &c.edges {
            let ((xa, ya), (xb, yb)) = (lat.xy(e.a()), lat.xy(e.b()));
            if xa == xb {
                // Lower end controls: X collapses down, Z collapses up.
                let (lo, hi) = if ya < yb { (e.a(), e.b()) } else { (e.b(), e.a()) };
                vert.insert((lo, hi));
            } else {
                let (left, right) = if xa < xb { (e.a(), e.b()) } else { (e.b(), e.a()) };
                horiz.insert(if c.basis == Basis::X { (right, left) } else { (left, right) });
            }
        }
    }
    let layers = [vert.into_iter().collect::<CxLayer>(), horiz.into_iter().collect::<CxLayer>()];
    for layer in &layers {
        let mut seen = BTreeSet::new();
        for &(a, b) in layer {
            for q in [a, b] {
                if !seen.insert(q) {
                    return Err(ScheduleError::LayerCollision { round: t, qubit: q });
                }
            }
        }
    }
    Ok(layers)
}

/// Image of `p` under the contraction of `round`.
pub fn contract(p: &PauliString, round: &Round) -> PauliString {
    let mut out = p.clone();
    for layer in &round.contraction {
        for &(c, t) in layer {
            out.apply_cx(c, t);
        }
    }
    out
}

fn verify_round(code: &SubsystemCode, r: &Round) -> Result<(), ScheduleError> {
    let t = r.round_type;
    let mut sites: BTreeMap<usize, usize> = BTreeMap::new();
    for (k, &a) in r.measured.iter().enumerate() {
        let ca = &code.checks[a];
        if let Some(&b) = sites.get(&ca.site) {
            return Err(ScheduleError::SiteCollision { round: t, a: b, b: a });
        }
        sites.insert(ca.site, a);
        for &b in &r.measured[k + 1..] {
            if !ca.pauli.commutes(&code.checks[b].pauli) {
                return Err(ScheduleError::Anticommuting { round: t, a, b });
            }
        }
        let img = contract(&ca.pauli, r);
        if img != PauliString::single(img.num_qubits(), ca.site, ca.basis) {
            return Err(ScheduleError::Contraction { round: t, check: a });
        }
    }
    Ok(())
}

/// Gauges of `basis` measured in round `t` given the extras of every round.
fn measured_of_basis(code: &SubsystemCode, t: u8, basis: Basis, extras: &[Vec<usize>]) -> Vec<usize> {
    let t = t % 4;
    if gauge_basis(t) == basis {
        base_measured(code, t).into_iter().filter(|&c| code.checks[c].basis == basis).collect()
    } else {
        extras[t as usize].clone()
    }
}

/// Candidate extras for round `t`: skipped-basis gauges of the round's
/// diagonal that commute with the round's gauges and have a free site.
fn candidates(code: &SubsystemCode, t: u8) -> Vec<usize> {
    let base = base_measured(code, t);
    let sites: BTreeSet<usize> = base.iter().map(|&c| code.checks[c].site).collect();
    code.gauges()
        .filter(|&g| {
            let c = &code.checks[g];
            c.basis != gauge_basis(t)
                && c.diagonal == t % 2
                && !sites.contains(&c.site)
                && base.iter().all(|&b| c.pauli.commutes(&code.checks[b].pauli))
        })
        .collect()
}

/// An extra measured in round `t` must commute with the part of every
/// opposite super-stabilizer that was measured in the neighbouring rounds, so
/// that the super-stabilizer value survives across the round.
fn extras_consistent(code: &SubsystemCode, extras: &[Vec<usize>]) -> bool {
    let n = code.num_qubits();
    (0u8..4).all(|t| {
        let b = gauge_basis(t);
        extras[t as usize].iter().all(|&e| {
            let ep = &code.checks[e].pauli;
            code.super_stabilizers.iter().filter(|(_, s)| s.basis == b).all(|(&id, _)| {
                [t + 3, t + 1].iter().all(|&nb| {
                    let mut prod = PauliString::identity(n);
                    for g in measured_of_basis(code, nb, b, extras) {
                        if code.checks[g].super_group == Some(id) {
                            prod.mul_assign(&code.checks[g].pauli);
                        }
                    }
                    ep.commutes(&prod)
                })
            })
        })
    })
}

const EXHAUSTIVE_LIMIT: usize = 20;

fn score(code: &SubsystemCode, extras: &[Vec<usize>]) -> (usize, usize) {
    let count = extras.iter().map(Vec::len).sum();
    let weight = extras.iter().flatten().map(|&e| code.checks[e].weight()).sum();
    (count, weight)
}

/// Picks the extras for a coupled pair of rounds.
fn choose_pair(code: &SubsystemCode, extras: &mut [Vec<usize>], a: u8, b: u8) {
    let ca = candidates(code, a);
    let cb = candidates(code, b);
    let all: Vec<(u8, usize)> = ca.iter().map(|&c| (a, c)).chain(cb.iter().map(|&c| (b, c))).collect();
    let assign = |extras: &mut [Vec<usize>], mask: u64| {
        extras[a as usize].clear();
        extras[b as usize].clear();
        for (k, &(t, c)) in all.iter().enumerate() {
            if mask >> k & 1 == 1 {
                extras[t as usize].push(c);
            }
        }
    };
    if all.len() <= EXHAUSTIVE_LIMIT {
        let mut best: Option<((usize, usize), u64)> = None;
        for mask in 0..(1u64 << all.len()) {
            assign(extras, mask);
            if !extras_consistent(code, extras) {
                continue;
            }
            let s = score(code, extras);
            if best.is_none_or(|(bs, _)| s > bs) {
                best = Some((s, mask));
            }
        }
        assign(extras, best.map_or(0, |(_, m)| m));
    } else {
        let mut mask = 0u64;
        for k in 0..all.len() {
            assign(extras, mask | 1 << k);
            if extras_consistent(code, extras) {
                mask |= 1 << k;
            }
        }
        assign(extras, mask);
    }
}

/// Adds measurements of skipped-basis gauges where they do not disturb any
/// super-stabilizer, giving extra detectors around the defect.
pub fn augment_extra_gauge_measurements(board: &LuciBoard) -> Result<LuciBoard, ScheduleError> {
    let code = &board.code;
    let mut extras = vec![Vec::new(); 4];
    // Rounds 3 and 0 constrain each other, as do 1 and 2.
    choose_pair(code, &mut extras, 3, 0);
    choose_pair(code, &mut extras, 1, 2);
    for e in &mut extras {
        e.sort_unstable();
    }
    board_with(code, extras)
}

/// Full board for a code: rounds plus augmentation.
pub fn build_board(code: &SubsystemCode) -> Result<LuciBoard, ScheduleError> {
    augment_extra_gauge_measurements(&build_luci_rounds(code)?)
}

/// Round type of round `r` out of `cycles`, arranged so the last round is
/// the X-gauge round for X memory and the Z-gauge round for Z memory.
pub fn round_type(r: usize, cycles: usize, basis: Basis) -> u8 {
    let last: i64 = if basis == Basis::X { 0 } else { 2 };
    (last - (cycles as i64 - 1 - r as i64)).rem_euclid(4) as u8
}

/// Lattice-to-circuit qubit numbering: live qubits in coordinate order.
pub fn circuit_indices(code: &SubsystemCode) -> BTreeMap<usize, usize> {
    (0..code.num_qubits()).filter(|q| !code.defects.broken_qubits.contains(q)).enumerate().map(|(k, q)| (q, k)).collect()
}

/// Emits a memory experiment of `cycles` rounds, without detectors.
pub fn emit_bare_circuit(board: &LuciBoard, cycles: usize, basis: Basis) -> Result<Circuit, ScheduleError> {
    if cycles == 0 {
        return Err(ScheduleError::NoCycles);
    }
    let code = &board.code;
    let idx = circuit_indices(code);
    let map = |v: &[usize]| -> Vec<usize> { v.iter().map(|q| idx[q]).collect() };
    let cx = |l: &CxLayer| -> Instruction { Instruction::Cx { targets: l.iter().flat_map(|&(a, b)| [idx[&a], idx[&b]]).collect() } };
    // Sites of one basis measured in a round, split by basis.
    let sites = |r: &Round| -> (Vec<usize>, Vec<usize>) {
        let (mut z, mut x) = (Vec::new(), Vec::new());
        for &c in &r.measured {
            let ch = &code.checks[c];
            if ch.basis == Basis::Z {
                z.push(ch.site)
            } else {
                x.push(ch.site)
            }
        }
        z.sort_unstable();
        x.sort_unstable();
        (z, x)
    };
    // Qubits whose check of the other basis is measured stay in that basis;
    // everything else is prepared or read out in the memory basis.
    let boundary_layer = |r: &Round| -> (Vec<usize>, Vec<usize>) {
        let (z, x) = sites(r);
        let other: BTreeSet<usize> = if basis == Basis::X { z } else { x }.into_iter().collect();
        let rest: Vec<usize> = idx.keys().copied().filter(|q| !other.contains(q)).collect();
        let other: Vec<usize> = other.into_iter().collect();
        if basis == Basis::X {
            (other, rest)
        } else {
            (rest, other)
        }
    };
    let push_pair = |c: &mut Circuit, measure: bool, (z, x): (Vec<usize>, Vec<usize>)| {
        for (b, t) in [(Basis::Z, z), (Basis::X, x)] {
            if !t.is_empty() {
                let targets = map(&t);
                c.push(if measure { Instruction::Measure { basis: b, targets } } else { Instruction::Reset { basis: b, targets } });
            }
        }
        c.push(Instruction::Tick);
    };

    let mut c = Circuit::new();
    for (&q, &k) in &idx {
        c.push(Instruction::QubitCoord { qubit: k, coord: code.lattice.coord(q) });
    }
    let types: Vec<u8> = (0..cycles).map(|r| round_type(r, cycles, basis)).collect();
    let mut prev = board.round((types[0] + 3) % 4);
    push_pair(&mut c, false, boundary_layer(prev));
    for (r, &t) in types.iter().enumerate() {
        let round = board.round(t);
        for layer in round.cx_layers(prev) {
            c.push(cx(&layer));
            c.push(Instruction::Tick);
        }
        if r + 1 == cycles {
            let (z, x) = boundary_layer(round);
            for (b, t) in [(Basis::Z, z), (Basis::X, x)] {
                if !t.is_empty() {
                    c.push(Instruction::Measure { basis: b, targets: map(&t) });
                }
            }
        } else {
            push_pair(&mut c, true, sites(round));
            push_pair(&mut c, false, sites(round));
        }
        prev = round;
    }
    Ok(c)
}

/// Emits a memory experiment with inferred detectors and observable.
pub fn emit_circuit(board: &LuciBoard, cycles: usize, basis: Basis) -> Result<Circuit, EmitError> {
    let bare = emit_bare_circuit(board, cycles, basis)?;
    Ok(crate::isg::infer_all(&bare, &board.code)?)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EmitError {
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Inference(#[from] crate::isg::IsgError),
}

/// Re-targets a circuit to the other memory basis by swapping the preparation
/// and final readout bases of every qubit that is not pinned by a check.
///
/// The first reset block and the final measurement block are rewritten; the
/// pinned qubits are the sites measured in the other basis by the round that
/// the new preparation and readout must match.
pub fn with_memory_basis(
    circuit: &Circuit,
    prep_pinned: &BTreeMap<usize, Basis>,
    read_pinned: &BTreeMap<usize, Basis>,
    basis: Basis,
) -> Circuit {
    let bare = circuit.without_annotations();
    let n = bare.num_qubits();
    let first_reset = bare.instructions.iter().position(|i| matches!(i, Instruction::Reset { .. }));
    let last_meas = bare.instructions.iter().rposition(|i| matches!(i, Instruction::Measure { .. }));
    let block = |pinned: &BTreeMap<usize, Basis>, measure: bool| -> Vec<Instruction> {
        let (mut z, mut x) = (Vec::new(), Vec::new());
        for q in 0..n {
            match pinned.get(&q).copied().unwrap_or(basis) {
                Basis::Z => z.push(q),
                Basis::X => x.push(q),
            }
        }
        [(Basis::Z, z), (Basis::X, x)]
            .into_iter()
            .filter(|(_, t)| !t.is_empty())
            .map(|(b, targets)| if measure { Instruction::Measure { basis: b, targets } } else { Instruction::Reset { basis: b, targets } })
            .collect()
    };
    let mut out = Circuit::new();
    let ins = &bare.instructions;
    let mut k = 0;
    while k < ins.len() {
        if Some(k) == first_reset {
            out.instructions.extend(block(prep_pinned, false));
            while matches!(ins.get(k), Some(Instruction::Reset { .. })) {
                k += 1;
            }
            continue;
        }
        if let Some(lm) = last_meas {
            let start = (0..=lm).rev().take_while(|&j| matches!(ins[j], Instruction::Measure { .. })).last().unwrap();
            if k == start {
                out.instructions.extend(block(read_pinned, true));
                k = lm + 1;
                continue;
            }
        }
        out.push(ins[k].clone());
        k += 1;
    }
    out
}

/// Measurement bases of every qubit in the `k`-th measurement block of `circuit`.
pub fn block_bases(circuit: &Circuit, k: usize) -> BTreeMap<usize, Basis> {
    let mut blocks: Vec<BTreeMap<usize, Basis>> = Vec::new();
    let mut open = false;
    for i in &circuit.instructions {
        match i {
            Instruction::Measure { basis, targets } => {
                if !open {
                    blocks.push(BTreeMap::new());
                    open = true;
                }
                let b = blocks.last_mut().unwrap();
                for &q in targets {
                    b.insert(q, *basis);
                }
            }
            Instruction::Detector { .. } | Instruction::Observable { .. } => {}
            _ => open = false,
        }
    }
    blocks.into_iter().nth(k).unwrap_or_default()
}
