//! Circuit representation, the compact `;`-separated dialect and stim-style text output.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::layout::{Coord, Half};
use crate::pauli::Basis;

/// Lookback into the measurement record: `MeasRef(k)` is `rec[-k]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MeasRef(pub u32);

impl fmt::Display for MeasRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rec[-{}]", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NoiseChannel {
    XError,
    ZError,
    Depolarize1,
    Depolarize2,
}

impl NoiseChannel {
    pub fn name(self) -> &'static str {
        match self {
            NoiseChannel::XError => "X_ERROR",
            NoiseChannel::ZError => "Z_ERROR",
            NoiseChannel::Depolarize1 => "DEPOLARIZE1",
            NoiseChannel::Depolarize2 => "DEPOLARIZE2",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instruction {
    QubitCoord {
        qubit: usize,
        coord: Coord,
    },
    Reset {
        basis: Basis,
        targets: Vec<usize>,
    },
    Measure {
        basis: Basis,
        targets: Vec<usize>,
    },
    /// Targets pair up as (control, target).
    Cx {
        targets: Vec<usize>,
    },
    H {
        targets: Vec<usize>,
    },
    S {
        targets: Vec<usize>,
    },
    Tick,
    Detector {
        args: Vec<Half>,
        refs: Vec<MeasRef>,
    },
    Observable {
        index: u32,
        refs: Vec<MeasRef>,
    },
    Noise {
        channel: NoiseChannel,
        p: f64,
        targets: Vec<usize>,
    },
}

impl Instruction {
    pub fn targets(&self) -> &[usize] {
        match self {
            Instruction::Reset { targets, .. }
            | Instruction::Measure { targets, .. }
            | Instruction::Cx { targets }
            | Instruction::H { targets }
            | Instruction::S { targets }
            | Instruction::Noise { targets, .. } => targets,
            _ => &[],
        }
    }

    pub fn num_measurements(&self) -> usize {
        match self {
            Instruction::Measure { targets, .. } => targets.len(),
            _ => 0,
        }
    }

    pub fn is_annotation(&self) -> bool {
        matches!(self, Instruction::Detector { .. } | Instruction::Observable { .. } | Instruction::QubitCoord { .. })
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Circuit {
    pub instructions: Vec<Instruction>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("token {token} at byte {offset}: {msg}")]
    Parse { token: usize, offset: usize, msg: String },
    #[error("token {token}: {msg}")]
    Resolution { token: usize, msg: String },
}

/// A structural problem found by [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub instruction: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "instruction {}: {}", self.instruction, self.message)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Compact,
    StimText,
}

impl Circuit {
    pub fn new() -> Circuit {
        Circuit::default()
    }

    pub fn push(&mut self, ins: Instruction) {
        self.instructions.push(ins);
    }

    pub fn qubit_coords(&self) -> BTreeMap<usize, Coord> {
        self.instructions
            .iter()
            .filter_map(|i| match i {
                Instruction::QubitCoord { qubit, coord } => Some((*qubit, *coord)),
                _ => None,
            })
            .collect()
    }

    /// One more than the largest qubit index used anywhere.
    pub fn num_qubits(&self) -> usize {
        self.instructions
            .iter()
            .flat_map(|i| match i {
                Instruction::QubitCoord { qubit, .. } => std::slice::from_ref(qubit),
                other => other.targets(),
            })
            .map(|&q| q + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn num_measurements(&self) -> usize {
        self.instructions.iter().map(Instruction::num_measurements).sum()
    }

    pub fn num_detectors(&self) -> usize {
        self.instructions.iter().filter(|i| matches!(i, Instruction::Detector { .. })).count()
    }

    pub fn num_observables(&self) -> usize {
        self.instructions
            .iter()
            .filter_map(|i| match i {
                Instruction::Observable { index, .. } => Some(*index as usize + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn num_ticks(&self) -> usize {
        self.instructions.iter().filter(|i| matches!(i, Instruction::Tick)).count()
    }

    /// Copy without detectors, observables or noise.
    pub fn without_annotations(&self) -> Circuit {
        Circuit {
            instructions: self
                .instructions
                .iter()
                .filter(|i| !matches!(i, Instruction::Detector { .. } | Instruction::Observable { .. } | Instruction::Noise { .. }))
                .cloned()
                .collect(),
        }
    }

    /// Detectors as absolute measurement indices, in declaration order.
    pub fn detector_records(&self) -> Vec<Vec<usize>> {
        self.resolved(|i| matches!(i, Instruction::Detector { .. }))
    }

    /// Observable includes as absolute measurement indices, indexed by observable.
    pub fn observable_records(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_observables()];
        let mut count = 0usize;
        for ins in &self.instructions {
            count += ins.num_measurements();
            if let Instruction::Observable { index, refs } = ins {
                for r in refs {
                    let abs = count - r.0 as usize;
                    let v: &mut Vec<usize> = &mut out[*index as usize];
                    if let Some(pos) = v.iter().position(|&m| m == abs) {
                        v.remove(pos);
                    } else {
                        v.push(abs);
                    }
                }
            }
        }
        for v in &mut out {
            v.sort_unstable();
        }
        out
    }

    fn resolved(&self, pick: impl Fn(&Instruction) -> bool) -> Vec<Vec<usize>> {
        let mut count = 0usize;
        let mut out = Vec::new();
        for ins in &self.instructions {
            count += ins.num_measurements();
            if pick(ins) {
                let refs = match ins {
                    Instruction::Detector { refs, .. } | Instruction::Observable { refs, .. } => refs,
                    _ => unreachable!(),
                };
                let mut v: Vec<usize> = refs.iter().map(|r| count - r.0 as usize).collect();
                v.sort_unstable();
                out.push(v);
            }
        }
        out
    }
}

fn parse_targets(body: &str, offset: usize, token: usize) -> Result<Vec<usize>, CircuitError> {
    if body.is_empty() {
        return Ok(Vec::new());
    }
    body.split('_')
        .map(|t| {
            if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) || (t.len() > 1 && t.starts_with('0')) {
                return Err(CircuitError::Parse { token, offset, msg: format!("bad qubit target {t:?}") });
            }
            t.parse::<usize>().map_err(|e| CircuitError::Parse { token, offset, msg: e.to_string() })
        })
        .collect()
}

fn parse_args(inner: &str, offset: usize, token: usize) -> Result<Vec<Half>, CircuitError> {
    inner.split(',').map(|a| a.parse::<Half>().map_err(|e| CircuitError::Parse { token, offset, msg: e.to_string() })).collect()
}

fn parse_refs(body: &str, offset: usize, token: usize) -> Result<Vec<MeasRef>, CircuitError> {
    if body.is_empty() {
        return Ok(Vec::new());
    }
    body.split('_')
        .map(|r| {
            let k = r
                .strip_prefix("rec[-")
                .and_then(|s| s.strip_suffix(']'))
                .filter(|s| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) && !s.starts_with('0'))
                .ok_or_else(|| CircuitError::Parse { token, offset, msg: format!("bad record reference {r:?}") })?;
            k.parse::<u32>().map(MeasRef).map_err(|e| CircuitError::Parse { token, offset, msg: e.to_string() })
        })
        .collect()
}

/// Splits `NAME(args)rest` into its parts.
fn split_call(tok: &str) -> Option<(&str, &str, &str)> {
    let open = tok.find('(')?;
    let close = tok[open..].find(')')? + open;
    Some((&tok[..open], &tok[open + 1..close], &tok[close + 1..]))
}

fn parse_token(tok: &str, offset: usize, token: usize) -> Result<Instruction, CircuitError> {
    let err = |msg: String| CircuitError::Parse { token, offset, msg };
    if tok == "TICK" {
        return Ok(Instruction::Tick);
    }
    if let Some((name, inner, rest)) = split_call(tok) {
        return match name {
            "Q" => {
                let args = parse_args(inner, offset, token)?;
                let [x, y] = args[..] else {
                    return Err(err("qubit declaration needs two coordinates".into()));
                };
                let qubit = parse_targets(rest, offset, token)?;
                let [qubit] = qubit[..] else {
                    return Err(err("qubit declaration needs one index".into()));
                };
                Ok(Instruction::QubitCoord { qubit, coord: Coord { x, y } })
            }
            "DT" => Ok(Instruction::Detector { args: parse_args(inner, offset, token)?, refs: parse_refs(rest, offset, token)? }),
            "OI" => {
                let index = inner.parse::<u32>().map_err(|e| err(format!("bad observable index: {e}")))?;
                if index.to_string() != inner {
                    return Err(err(format!("bad observable index {inner:?}")));
                }
                Ok(Instruction::Observable { index, refs: parse_refs(rest, offset, token)? })
            }
            other => Err(err(format!("unknown annotation {other:?}"))),
        };
    }
    let (name, body) = match tok.split_once('_') {
        Some((n, b)) => (n, b),
        None => (tok, ""),
    };
    if tok.ends_with('_') {
        return Err(err("trailing separator".into()));
    }
    let targets = parse_targets(body, offset, token)?;
    match name {
        "R" => Ok(Instruction::Reset { basis: Basis::Z, targets }),
        "RX" => Ok(Instruction::Reset { basis: Basis::X, targets }),
        "M" => Ok(Instruction::Measure { basis: Basis::Z, targets }),
        "MX" => Ok(Instruction::Measure { basis: Basis::X, targets }),
        "H" => Ok(Instruction::H { targets }),
        "S" => Ok(Instruction::S { targets }),
        "CX" => {
            if targets.len() % 2 == 1 {
                return Err(err("CX needs an even number of targets".into()));
            }
            Ok(Instruction::Cx { targets })
        }
        other => Err(err(format!("unknown gate {other:?}"))),
    }
}

/// Parses the compact dialect (`Q(x,y)n;R_0_1;CX_0_1;TICK;DT(x,y,t)rec[-1];OI(0)rec[-2]`).
pub fn parse_compact(text: &str) -> Result<Circuit, CircuitError> {
    let mut c = Circuit::new();
    if text.is_empty() {
        return Ok(c);
    }
    let mut offset = 0usize;
    let mut measured = 0usize;
    for (k, tok) in text.split(';').enumerate() {
        let ins = parse_token(tok, offset, k)?;
        measured += ins.num_measurements();
        if let Instruction::Detector { refs, .. } | Instruction::Observable { refs, .. } = &ins {
            if let Some(bad) = refs.iter().find(|r| r.0 as usize > measured) {
                return Err(CircuitError::Resolution { token: k, msg: format!("{bad} reaches past the {measured} measurements so far") });
            }
        }
        c.push(ins);
        offset += tok.len() + 1;
    }
    Ok(c)
}

fn join<T: fmt::Display>(items: &[T], sep: &str) -> String {
    let mut s = String::new();
    for (k, it) in items.iter().enumerate() {
        if k > 0 {
            s.push_str(sep);
        }
        write!(s, "{it}").unwrap();
    }
    s
}

fn gate_name(ins: &Instruction) -> &'static str {
    match ins {
        Instruction::Reset { basis: Basis::Z, .. } => "R",
        Instruction::Reset { basis: Basis::X, .. } => "RX",
        Instruction::Measure { basis: Basis::Z, .. } => "M",
        Instruction::Measure { basis: Basis::X, .. } => "MX",
        Instruction::Cx { .. } => "CX",
        Instruction::H { .. } => "H",
        Instruction::S { .. } => "S",
        _ => unreachable!("not a gate"),
    }
}

fn compact_token(ins: &Instruction) -> Option<String> {
    Some(match ins {
        Instruction::QubitCoord { qubit, coord } => format!("Q({},{}){qubit}", coord.x, coord.y),
        Instruction::Tick => "TICK".to_string(),
        Instruction::Detector { args, refs } => format!("DT({}){}", join(args, ","), join(refs, "_")),
        Instruction::Observable { index, refs } => format!("OI({index}){}", join(refs, "_")),
        Instruction::Noise { .. } => return None,
        g => {
            let t = g.targets();
            if t.is_empty() {
                gate_name(g).to_string()
            } else {
                format!("{}_{}", gate_name(g), join(t, "_"))
            }
        }
    })
}

fn stim_line(ins: &Instruction) -> String {
    match ins {
        Instruction::QubitCoord { qubit, coord } => format!("QUBIT_COORDS({}, {}) {qubit}", coord.x, coord.y),
        Instruction::Tick => "TICK".to_string(),
        Instruction::Detector { args, refs } => {
            let mut s = format!("DETECTOR({})", join(args, ", "));
            for r in refs {
                write!(s, " {r}").unwrap();
            }
            s
        }
        Instruction::Observable { index, refs } => {
            let mut s = format!("OBSERVABLE_INCLUDE({index})");
            for r in refs {
                write!(s, " {r}").unwrap();
            }
            s
        }
        Instruction::Noise { channel, p, targets } => format!("{}({p}) {}", channel.name(), join(targets, " ")),
        g => {
            let t = g.targets();
            if t.is_empty() {
                gate_name(g).to_string()
            } else {
                format!("{} {}", gate_name(g), join(t, " "))
            }
        }
    }
}

pub fn serialize(circuit: &Circuit, format: Format) -> String {
    match format {
        Format::Compact => {
            let toks: Vec<String> = circuit.instructions.iter().filter_map(compact_token).collect();
            toks.join(";")
        }
        Format::StimText => {
            let mut s = String::new();
            for ins in &circuit.instructions {
                s.push_str(&stim_line(ins));
                s.push('\n');
            }
            s
        }
    }
}

pub fn validate(circuit: &Circuit) -> Vec<Diagnostic> {
    let declared: std::collections::BTreeSet<usize> = circuit.qubit_coords().into_keys().collect();
    let check_declared = !declared.is_empty();
    let mut out = Vec::new();
    let mut measured = 0usize;
    for (k, ins) in circuit.instructions.iter().enumerate() {
        let diag = |m: String| Diagnostic { instruction: k, message: m };
        if check_declared {
            for t in ins.targets() {
                if !declared.contains(t) {
                    out.push(diag(format!("target {t} is not declared")));
                }
            }
        }
        match ins {
            Instruction::Cx { targets } => {
                if targets.len() % 2 == 1 {
                    out.push(diag(format!("CX has an odd number of targets ({})", targets.len())));
                }
                for pair in targets.chunks(2) {
                    if pair.len() == 2 && pair[0] == pair[1] {
                        out.push(diag(format!("CX pair acts twice on qubit {}", pair[0])));
                    }
                }
            }
            Instruction::Noise { channel: NoiseChannel::Depolarize2, targets, .. } if targets.len() % 2 == 1 => {
                out.push(diag("DEPOLARIZE2 has an odd number of targets".into()));
            }
            Instruction::Noise { p, .. } if !(0.0..=1.0).contains(p) => {
                out.push(diag(format!("noise probability {p} outside [0, 1]")));
            }
            Instruction::Detector { refs, .. } | Instruction::Observable { refs, .. } => {
                if matches!(ins, Instruction::Detector { .. }) && measured == 0 {
                    out.push(diag("detector declared before any measurement".into()));
                }
                for r in refs {
                    if r.0 == 0 || r.0 as usize > measured {
                        out.push(diag(format!("{r} does not resolve ({measured} measurements so far)")));
                    }
                }
            }
            _ => {}
        }
        measured += ins.num_measurements();
    }
    out
}
