//! Bit-parallel Pauli-frame sampling: 64 shots per machine word.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tableau::reference_sample;
use super::{NoiseError, Op, Program};
use crate::circuit_ir::{Circuit, NoiseChannel};
use crate::pauli::{Basis, Pauli};

const LANES: usize = 64;

/// Detector and observable bits for a batch of shots, shot-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Samples {
    pub shots: usize,
    pub num_detectors: usize,
    pub num_observables: usize,
    det_words: usize,
    detectors: Vec<u64>,
    observables: Vec<u64>,
}

impl Samples {
    fn empty(shots: usize, num_detectors: usize, num_observables: usize) -> Samples {
        let det_words = num_detectors.div_ceil(64);
        Samples { shots, num_detectors, num_observables, det_words, detectors: vec![0; shots * det_words], observables: vec![0; shots] }
    }

    pub fn detector(&self, shot: usize, d: usize) -> bool {
        self.detectors[shot * self.det_words + d / 64] >> (d % 64) & 1 == 1
    }

    /// Fired detectors of one shot, ascending.
    pub fn fired(&self, shot: usize) -> Vec<u32> {
        let row = &self.detectors[shot * self.det_words..(shot + 1) * self.det_words];
        let mut out = Vec::new();
        for (k, &w) in row.iter().enumerate() {
            let mut m = w;
            while m != 0 {
                out.push((k * 64) as u32 + m.trailing_zeros());
                m &= m - 1;
            }
        }
        out
    }

    /// Observable flips of one shot as a bit mask.
    pub fn observables(&self, shot: usize) -> u64 {
        self.observables[shot]
    }

    /// Raw `b8` bytes: per shot, detectors then observables, little-endian
    /// within each byte, padded to a whole byte.
    pub fn to_b8(&self) -> Vec<u8> {
        let bits = self.num_detectors + self.num_observables;
        let per = bits.div_ceil(8);
        let mut out = vec![0u8; per * self.shots];
        for s in 0..self.shots {
            for b in 0..bits {
                if self.bit(s, b) {
                    out[s * per + b / 8] |= 1 << (b % 8);
                }
            }
        }
        out
    }

    /// One `0`/`1` line per shot, detectors then observables.
    pub fn to_01(&self) -> String {
        let bits = self.num_detectors + self.num_observables;
        let mut out = String::with_capacity(self.shots * (bits + 1));
        for s in 0..self.shots {
            for b in 0..bits {
                out.push(if self.bit(s, b) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    fn bit(&self, shot: usize, b: usize) -> bool {
        if b < self.num_detectors {
            self.detector(shot, b)
        } else {
            self.observables[shot] >> (b - self.num_detectors) & 1 == 1
        }
    }

    fn append(&mut self, other: Samples) {
        self.shots += other.shots;
        self.detectors.extend(other.detectors);
        self.observables.extend(other.observables);
    }
}

/// How shot batches are distributed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    /// Batches spread over the current rayon pool.
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Parallelism {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        return Parallelism::Parallel;
        #[cfg(not(feature = "parallel"))]
        return Parallelism::Sequential;
    }
}

/// Frame state of 64 shots.
pub(crate) struct Frame {
    pub x: Vec<u64>,
    pub z: Vec<u64>,
    pub meas: Vec<u64>,
}

impl Frame {
    pub fn new(n: usize, num_measurements: usize) -> Frame {
        Frame { x: vec![0; n], z: vec![0; n], meas: Vec::with_capacity(num_measurements) }
    }

    #[inline]
    fn apply(&mut self, q: usize, p: Pauli, mask: u64) {
        match p {
            Pauli::I => {}
            Pauli::X => self.x[q] ^= mask,
            Pauli::Y => {
                self.x[q] ^= mask;
                self.z[q] ^= mask;
            }
            Pauli::Z => self.z[q] ^= mask,
        }
    }
}

const PAULIS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

/// Index of the next event in a run of Bernoulli(p) trials.
#[inline]
fn skip(rng: &mut ChaCha8Rng, p: f64, log1mp: f64) -> usize {
    if p >= 1.0 {
        return 0;
    }
    let u: f64 = 1.0 - rng.random::<f64>();
    (u.ln() / log1mp) as usize
}

/// Applies the gates of `op`; measurement flips are appended to `frame.meas`.
/// `rng` drives gauge randomization and noise; without it noise is skipped.
pub(crate) fn step(op: &Op, frame: &mut Frame, rng: Option<&mut ChaCha8Rng>) {
    match op {
        Op::Cx(pairs) => {
            for &(c, t) in pairs {
                frame.x[t] ^= frame.x[c];
                frame.z[c] ^= frame.z[t];
            }
        }
        Op::H(qs) => {
            for &q in qs {
                std::mem::swap(&mut frame.x[q], &mut frame.z[q]);
            }
        }
        Op::S(qs) => {
            for &q in qs {
                frame.z[q] ^= frame.x[q];
            }
        }
        Op::Reset(basis, qs) => {
            let mut rng = rng;
            for &q in qs {
                let r = rng.as_mut().map_or(0, |g| g.next_u64());
                match basis {
                    Basis::Z => {
                        frame.x[q] = 0;
                        frame.z[q] = r;
                    }
                    Basis::X => {
                        frame.z[q] = 0;
                        frame.x[q] = r;
                    }
                }
            }
        }
        Op::Measure(basis, qs) => {
            let mut rng = rng;
            for &q in qs {
                let r = rng.as_mut().map_or(0, |g| g.next_u64());
                match basis {
                    Basis::Z => {
                        frame.meas.push(frame.x[q]);
                        frame.z[q] ^= r;
                    }
                    Basis::X => {
                        frame.meas.push(frame.z[q]);
                        frame.x[q] ^= r;
                    }
                }
            }
        }
        Op::Noise(channel, p, targets) => {
            let Some(rng) = rng else {
                return;
            };
            if *p <= 0.0 {
                return;
            }
            let log1mp = (1.0 - p).ln();
            let units = match channel {
                NoiseChannel::Depolarize2 => targets.len() / 2,
                _ => targets.len(),
            };
            let slots = units * LANES;
            let mut pos = skip(rng, *p, log1mp);
            while pos < slots {
                let (unit, lane) = (pos / LANES, pos % LANES);
                let mask = 1u64 << lane;
                match channel {
                    NoiseChannel::XError => frame.x[targets[unit]] ^= mask,
                    NoiseChannel::ZError => frame.z[targets[unit]] ^= mask,
                    NoiseChannel::Depolarize1 => {
                        let k = rng.random_range(1..4);
                        frame.apply(targets[unit], PAULIS[k], mask);
                    }
                    NoiseChannel::Depolarize2 => {
                        let k = rng.random_range(1..16);
                        frame.apply(targets[2 * unit], PAULIS[k / 4], mask);
                        frame.apply(targets[2 * unit + 1], PAULIS[k % 4], mask);
                    }
                }
                pos += 1 + skip(rng, *p, log1mp);
            }
        }
    }
}

fn batch_rng(seed: u64, batch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch as u64);
    rng
}

struct Prepared {
    prog: Program,
    det_ref: Vec<bool>,
    obs_ref: u64,
}

fn prepare(circuit: &Circuit) -> Prepared {
    let prog = Program::compile(circuit);
    let reference = reference_sample(&circuit.without_annotations());
    let parity = |recs: &[usize]| recs.iter().fold(false, |a, &m| a ^ reference[m]);
    let det_ref = prog.detectors.iter().map(|d| parity(d)).collect();
    let obs_ref = prog.observables.iter().enumerate().fold(0u64, |a, (k, o)| a | (parity(o) as u64) << k);
    Prepared { prog, det_ref, obs_ref }
}

fn run_batch(prep: &Prepared, seed: u64, batch: usize, lanes: usize) -> Samples {
    let prog = &prep.prog;
    let mut rng = batch_rng(seed, batch);
    let mut frame = Frame::new(prog.num_qubits, prog.num_measurements);
    for z in frame.z.iter_mut() {
        *z = rng.next_u64();
    }
    for op in &prog.ops {
        step(op, &mut frame, Some(&mut rng));
    }
    let mut out = Samples::empty(lanes, prog.detectors.len(), prog.observables.len());
    let lane_mask = if lanes == LANES { u64::MAX } else { (1u64 << lanes) - 1 };
    for (d, recs) in prog.detectors.iter().enumerate() {
        let mut w = recs.iter().fold(0u64, |a, &m| a ^ frame.meas[m]);
        if prep.det_ref[d] {
            w = !w;
        }
        w &= lane_mask;
        while w != 0 {
            let lane = w.trailing_zeros() as usize;
            out.detectors[lane * out.det_words + d / 64] |= 1 << (d % 64);
            w &= w - 1;
        }
    }
    for (k, recs) in prog.observables.iter().enumerate() {
        let mut w = recs.iter().fold(0u64, |a, &m| a ^ frame.meas[m]);
        if prep.obs_ref >> k & 1 == 1 {
            w = !w;
        }
        for lane in 0..lanes {
            out.observables[lane] |= (w >> lane & 1) << k;
        }
    }
    out
}

/// Samples detector and observable bits with the default parallelism.
pub fn sample_frames(circuit: &Circuit, shots: usize, seed: u64) -> Result<Samples, NoiseError> {
    sample_frames_with(circuit, shots, seed, Parallelism::default())
}

/// Samples `shots` shots; the result depends only on `(circuit, shots, seed)`.
pub fn sample_frames_with(circuit: &Circuit, shots: usize, seed: u64, mode: Parallelism) -> Result<Samples, NoiseError> {
    if shots == 0 {
        return Err(NoiseError::NoShots);
    }
    if circuit.num_detectors() == 0 {
        return Err(NoiseError::NoDetectors);
    }
    let prep = prepare(circuit);
    let batches = shots.div_ceil(LANES);
    let lanes = |b: usize| if b + 1 == batches { shots - b * LANES } else { LANES };
    let parts: Vec<Samples> = match mode {
        Parallelism::Sequential => (0..batches).map(|b| run_batch(&prep, seed, b, lanes(b))).collect(),
        #[cfg(feature = "parallel")]
        Parallelism::Parallel => {
            use rayon::prelude::*;
            (0..batches).into_par_iter().map(|b| run_batch(&prep, seed, b, lanes(b))).collect()
        }
    };
    let mut out = Samples::empty(0, prep.prog.detectors.len(), prep.prog.observables.len());
    for p in parts {
        out.append(p);
    }
    Ok(out)
}

/// A single Pauli error placed at an instruction of the circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fault {
    /// Index into `circuit.instructions`; the error acts just before it.
    pub instruction: usize,
    pub qubit: usize,
    pub pauli: Pauli,
}

/// Detector and observable flips caused by a fixed set of faults, with noise
/// channels switched off. Returns `(detector bits, observable mask)`.
pub fn simulate_faults(circuit: &Circuit, faults: &[Fault]) -> (Vec<bool>, u64) {
    let prog = Program::compile(circuit);
    let mut frame = Frame::new(prog.num_qubits, prog.num_measurements);
    let mut pending: Vec<&Fault> = faults.iter().collect();
    pending.sort_by_key(|f| f.instruction);
    let mut next = 0;
    for (op, &src) in prog.ops.iter().zip(&prog.source) {
        while next < pending.len() && pending[next].instruction <= src {
            frame.apply(pending[next].qubit, pending[next].pauli, 1);
            next += 1;
        }
        step(op, &mut frame, None);
    }
    let dets = prog.detectors.iter().map(|d| d.iter().fold(0u64, |a, &m| a ^ frame.meas[m]) & 1 == 1).collect();
    let obs = prog.observables.iter().enumerate().fold(0u64, |a, (j, o)| a | (o.iter().fold(0u64, |b, &m| b ^ frame.meas[m]) & 1) << j);
    (dets, obs)
}
