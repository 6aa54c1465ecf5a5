//! Circuit noise, simulation and detector error models.

mod dem;
mod frame;
mod tableau;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::circuit_ir::{Circuit, Instruction, NoiseChannel};
use crate::pauli::Basis;

pub(crate) use dem::record_fault_table;
pub use dem::{extract_dem, DemError, DetectorErrorModel, Mechanism, Symptom};
pub use frame::{sample_frames, sample_frames_with, simulate_faults, Fault, Parallelism, Samples};
pub use tableau::{reference_sample, Tableau};

#[derive(Debug, Error, PartialEq)]
pub enum NoiseError {
    #[error("noise strength {0} outside [0, 0.5]")]
    Strength(f64),
    #[error("circuit declares no detectors")]
    NoDetectors,
    #[error("shot count must be positive")]
    NoShots,
}

/// Strength of the SI1000 model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseParams {
    p: f64,
}

impl NoiseParams {
    pub fn new(p: f64) -> Result<NoiseParams, NoiseError> {
        if (0.0..=0.5).contains(&p) {
            Ok(NoiseParams { p })
        } else {
            Err(NoiseError::Strength(p))
        }
    }

    pub fn p(self) -> f64 {
        self.p
    }
}

fn flip_channel(basis: Basis) -> NoiseChannel {
    match basis {
        Basis::Z => NoiseChannel::XError,
        Basis::X => NoiseChannel::ZError,
    }
}

/// Inserts SI1000 noise. Layers are the stretches between `TICK`s.
///
/// CX pairs get two-qubit depolarizing `p`, single-qubit gates `p/10`.
/// Resets flip with `2p` afterwards, measurements with `5p` beforehand.
/// Qubits idle in a measure/reset layer depolarize with `2p`, in any other
/// layer with `p/10`.
pub fn apply_si1000(circuit: &Circuit, params: NoiseParams) -> Circuit {
    let p = params.p;
    if p == 0.0 {
        return circuit.clone();
    }
    let all: BTreeSet<usize> = {
        let declared: BTreeSet<usize> = circuit.qubit_coords().into_keys().collect();
        if declared.is_empty() {
            (0..circuit.num_qubits()).collect()
        } else {
            declared
        }
    };
    let mut out = Circuit::new();
    let mut layer: Vec<Instruction> = Vec::new();
    let flush = |layer: &mut Vec<Instruction>, out: &mut Circuit| {
        let mut touched = BTreeSet::new();
        let mut slow = false;
        let mut any = false;
        for ins in layer.iter() {
            match ins {
                Instruction::Reset { basis, targets } => {
                    out.push(ins.clone());
                    out.push(Instruction::Noise { channel: flip_channel(*basis), p: 2.0 * p, targets: targets.clone() });
                    slow = true;
                }
                Instruction::Measure { basis, targets } => {
                    out.push(Instruction::Noise { channel: flip_channel(*basis), p: 5.0 * p, targets: targets.clone() });
                    out.push(ins.clone());
                    slow = true;
                }
                Instruction::Cx { targets } => {
                    out.push(ins.clone());
                    if !targets.is_empty() {
                        out.push(Instruction::Noise { channel: NoiseChannel::Depolarize2, p, targets: targets.clone() });
                    }
                }
                Instruction::H { targets } | Instruction::S { targets } => {
                    out.push(ins.clone());
                    if !targets.is_empty() {
                        out.push(Instruction::Noise { channel: NoiseChannel::Depolarize1, p: p / 10.0, targets: targets.clone() });
                    }
                }
                _ => out.push(ins.clone()),
            }
            if matches!(
                ins,
                Instruction::Reset { .. }
                    | Instruction::Measure { .. }
                    | Instruction::Cx { .. }
                    | Instruction::H { .. }
                    | Instruction::S { .. }
            ) {
                any = true;
                touched.extend(ins.targets().iter().copied());
            }
        }
        if any {
            let idle: Vec<usize> = all.iter().copied().filter(|q| !touched.contains(q)).collect();
            if !idle.is_empty() {
                let rate = if slow { 2.0 * p } else { p / 10.0 };
                // Keep the idle noise ahead of trailing annotations so that
                // detectors still close the layer.
                let at = out
                    .instructions
                    .iter()
                    .rposition(|i| !matches!(i, Instruction::Detector { .. } | Instruction::Observable { .. }))
                    .map_or(0, |k| k + 1);
                out.instructions.insert(at, Instruction::Noise { channel: NoiseChannel::Depolarize1, p: rate, targets: idle });
            }
        }
        layer.clear();
    };
    for ins in &circuit.instructions {
        if matches!(ins, Instruction::Tick) {
            flush(&mut layer, &mut out);
            out.push(Instruction::Tick);
        } else {
            layer.push(ins.clone());
        }
    }
    flush(&mut layer, &mut out);
    out
}

/// Flat, index-resolved form of a circuit used by the simulators.
#[derive(Clone, Debug)]
pub(crate) struct Program {
    pub num_qubits: usize,
    pub ops: Vec<Op>,
    pub num_measurements: usize,
    pub detectors: Vec<Vec<usize>>,
    pub observables: Vec<Vec<usize>>,
    /// Instruction index each op came from.
    pub source: Vec<usize>,
}

#[derive(Clone, Debug)]
pub(crate) enum Op {
    Cx(Vec<(usize, usize)>),
    H(Vec<usize>),
    S(Vec<usize>),
    Reset(Basis, Vec<usize>),
    Measure(Basis, Vec<usize>),
    Noise(NoiseChannel, f64, Vec<usize>),
}

impl Program {
    pub fn compile(circuit: &Circuit) -> Program {
        let (source, ops) = circuit
            .instructions
            .iter()
            .enumerate()
            .filter_map(|(k, i)| {
                let op = match i {
                    Instruction::Cx { targets } => Some(Op::Cx(targets.chunks(2).map(|p| (p[0], p[1])).collect())),
                    Instruction::H { targets } => Some(Op::H(targets.clone())),
                    Instruction::S { targets } => Some(Op::S(targets.clone())),
                    Instruction::Reset { basis, targets } => Some(Op::Reset(*basis, targets.clone())),
                    Instruction::Measure { basis, targets } => Some(Op::Measure(*basis, targets.clone())),
                    Instruction::Noise { channel, p, targets } => Some(Op::Noise(*channel, *p, targets.clone())),
                    _ => None,
                };
                op.map(|o| (k, o))
            })
            .unzip();
        Program {
            num_qubits: circuit.num_qubits(),
            ops,
            num_measurements: circuit.num_measurements(),
            detectors: circuit.detector_records(),
            observables: circuit.observable_records(),
            source,
        }
    }
}
