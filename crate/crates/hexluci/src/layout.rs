//! Hex-grid patch geometry and fabrication-defect maps.
//!
//! Coordinates follow the frame of the shipped fixtures: data qubits of a
//! distance-d patch sit on a diamond, every qubit has two vertical couplers
//! and one horizontal coupler (data to the measure qubit on its right).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::pauli::Basis;

/// Exact rational with denominator 2, stored as its doubled value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Half(pub i64);

impl Half {
    pub fn from_int(v: i64) -> Half {
        Half(2 * v)
    }

    pub fn doubled(self) -> i64 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl fmt::Display for Half {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            let sign = if self.0 < 0 { "-" } else { "" };
            write!(f, "{sign}{}.5", self.0.abs() / 2)
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid coordinate value {0:?}")]
pub struct HalfParseError(pub String);

impl FromStr for Half {
    type Err = HalfParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || HalfParseError(s.to_string());
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit() || b == b'.') {
            return Err(err());
        }
        let doubled = match body.split_once('.') {
            None => body.parse::<i64>().map_err(|_| err())? * 2,
            Some((int, "5")) if !int.is_empty() => int.parse::<i64>().map_err(|_| err())? * 2 + 1,
            _ => return Err(err()),
        };
        Ok(Half(if neg { -doubled } else { doubled }))
    }
}

/// Planar qubit coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coord {
    pub x: Half,
    pub y: Half,
}

impl Coord {
    pub fn new(x: i64, y: i64) -> Coord {
        Coord { x: Half::from_int(x), y: Half::from_int(y) }
    }

    /// Integer components, if both are integral.
    pub fn int(self) -> Option<(i64, i64)> {
        (self.x.is_integer() && self.y.is_integer()).then_some((self.x.0 / 2, self.y.0 / 2))
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Data,
    Measure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QubitSpec {
    pub index: usize,
    pub coord: Coord,
    pub role: Role,
}

/// Unordered qubit pair, stored with the smaller index first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coupler(usize, usize);

impl Coupler {
    pub fn new(a: usize, b: usize) -> Coupler {
        if a <= b {
            Coupler(a, b)
        } else {
            Coupler(b, a)
        }
    }

    pub fn a(self) -> usize {
        self.0
    }

    pub fn b(self) -> usize {
        self.1
    }

    pub fn touches(self, q: usize) -> bool {
        self.0 == q || self.1 == q
    }

    pub fn other(self, q: usize) -> usize {
        if self.0 == q {
            self.1
        } else {
            self.0
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlaquetteShape {
    /// Unit square (possibly truncated by the patch boundary).
    Square,
    /// Weight-one boundary check replacing a square on the right-hand edges.
    BoundarySingle,
}

/// A mid-cycle check of the unbroken patch.
///
/// `support` includes measure qubits: at mid-cycle every qubit carries code
/// information. `edges` is the U-shaped coupler set used to contract the check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plaquette {
    pub basis: Basis,
    pub support: Vec<usize>,
    pub owner: usize,
    /// Lower-left corner of the unit square, integer fixture frame.
    pub corner: (i64, i64),
    pub shape: PlaquetteShape,
    pub edges: Vec<Coupler>,
}

impl Plaquette {
    /// 0 for even diagonals, 1 for odd ones.
    pub fn diagonal(&self) -> u8 {
        self.corner.1.rem_euclid(2) as u8
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LayoutError {
    #[error("distance must be at least 2, got {0}")]
    DistanceTooSmall(usize),
    #[error("no qubit at {0}")]
    UnknownQubit(Coord),
    #[error("no coupler between {0} and {1}")]
    UnknownCoupler(Coord, Coord),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
}

#[derive(Clone, Debug)]
pub struct HexLattice {
    pub distance: usize,
    pub qubits: Vec<QubitSpec>,
    pub couplers: BTreeSet<Coupler>,
    pub plaquettes: Vec<Plaquette>,
    by_coord: HashMap<Coord, usize>,
}

/// Fixture-frame position of data qubit `(i, j)` and measure qubit `(i, j)` of
/// the rotated code; measure `(i, j)` sits at plaquette centre `(i+1/2, j+1/2)`.
fn data_xy(d: i64, i: i64, j: i64) -> (i64, i64) {
    (i - j + d, i + j + 1)
}

fn measure_xy(d: i64, i: i64, j: i64) -> (i64, i64) {
    (i - j + d, i + j + 2)
}

pub fn build_hex_lattice(d: usize) -> Result<HexLattice, LayoutError> {
    if d < 2 {
        return Err(LayoutError::DistanceTooSmall(d));
    }
    let di = d as i64;
    let mut points: Vec<((i64, i64), Role)> = Vec::new();
    for i in 0..di {
        for j in 0..di {
            points.push((data_xy(di, i, j), Role::Data));
        }
    }
    for i in 0..di {
        for j in -1..di - 1 {
            if i == di - 1 && j == -1 {
                continue;
            }
            points.push((measure_xy(di, i, j), Role::Measure));
        }
    }
    points.sort();
    let qubits: Vec<QubitSpec> =
        points.iter().enumerate().map(|(index, &((x, y), role))| QubitSpec { index, coord: Coord::new(x, y), role }).collect();
    let by_coord: HashMap<Coord, usize> = qubits.iter().map(|q| (q.coord, q.index)).collect();
    let at = |x: i64, y: i64| by_coord.get(&Coord::new(x, y)).copied();

    let mut couplers = BTreeSet::new();
    for q in &qubits {
        let (x, y) = q.coord.int().expect("lattice coordinates are integral");
        if let Some(up) = at(x, y + 1) {
            couplers.insert(Coupler::new(q.index, up));
        }
        if q.role == Role::Data {
            if let Some(right) = at(x + 1, y) {
                couplers.insert(Coupler::new(q.index, right));
            }
        }
    }

    let mut plaquettes = Vec::new();
    for q in qubits.iter().filter(|q| q.role == Role::Measure) {
        let (x, y) = q.coord.int().unwrap();
        let (i, j) = ((x - di + y - 2) / 2, (y - 2 - x + di) / 2);
        let lower_right_edge = j == -1;
        let upper_right_edge = i == di - 1;
        // X check: square above the measure qubit; contracts along its bottom edge.
        let x_corner = (x - 1, y);
        if upper_right_edge {
            plaquettes.push(single(q.index, Basis::Z, x_corner));
        } else {
            plaquettes.push(square(&at, &couplers, Basis::X, q.index, x_corner));
        }
        // Z check: square below the measure qubit; contracts along its top edge.
        let z_corner = (x - 1, y - 1);
        if lower_right_edge {
            plaquettes.push(single(q.index, Basis::X, z_corner));
        } else {
            plaquettes.push(square(&at, &couplers, Basis::Z, q.index, z_corner));
        }
    }

    Ok(HexLattice { distance: d, qubits, couplers, plaquettes, by_coord })
}

fn single(owner: usize, basis: Basis, corner: (i64, i64)) -> Plaquette {
    Plaquette { basis, support: vec![owner], owner, corner, shape: PlaquetteShape::BoundarySingle, edges: Vec::new() }
}

fn square(
    at: &dyn Fn(i64, i64) -> Option<usize>,
    couplers: &BTreeSet<Coupler>,
    basis: Basis,
    owner: usize,
    (a, b): (i64, i64),
) -> Plaquette {
    let mut support: Vec<usize> = [(a, b), (a + 1, b), (a, b + 1), (a + 1, b + 1)].iter().filter_map(|&(x, y)| at(x, y)).collect();
    support.sort_unstable();
    let row = if basis == Basis::X { b } else { b + 1 };
    let pairs = [((a, b), (a, b + 1)), ((a + 1, b), (a + 1, b + 1)), ((a, row), (a + 1, row))];
    let edges = pairs
        .iter()
        .filter_map(|&(p, q)| {
            let c = Coupler::new(at(p.0, p.1)?, at(q.0, q.1)?);
            couplers.contains(&c).then_some(c)
        })
        .collect();
    Plaquette { basis, support, owner, corner: (a, b), shape: PlaquetteShape::Square, edges }
}

impl HexLattice {
    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn index_of(&self, c: Coord) -> Option<usize> {
        self.by_coord.get(&c).copied()
    }

    pub fn coord(&self, q: usize) -> Coord {
        self.qubits[q].coord
    }

    pub fn xy(&self, q: usize) -> (i64, i64) {
        self.qubits[q].coord.int().expect("lattice coordinates are integral")
    }

    pub fn degree(&self, q: usize) -> usize {
        self.couplers.iter().filter(|c| c.touches(q)).count()
    }

    pub fn degree_histogram(&self) -> BTreeMap<usize, usize> {
        let mut deg = vec![0usize; self.qubits.len()];
        for c in &self.couplers {
            deg[c.a()] += 1;
            deg[c.b()] += 1;
        }
        let mut hist = BTreeMap::new();
        for k in deg {
            *hist.entry(k).or_insert(0) += 1;
        }
        hist
    }

    /// Qubits lying in a truncated or weight-one plaquette.
    pub fn boundary_qubits(&self) -> BTreeSet<usize> {
        self.plaquettes
            .iter()
            .filter(|p| p.shape == PlaquetteShape::BoundarySingle || p.support.len() < 4)
            .flat_map(|p| p.support.iter().copied())
            .collect()
    }
}

/// Broken qubits and couplers of a device.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DefectMap {
    pub broken_qubits: BTreeSet<usize>,
    pub broken_couplers: BTreeSet<Coupler>,
}

impl DefectMap {
    pub fn is_empty(&self) -> bool {
        self.broken_qubits.is_empty() && self.broken_couplers.is_empty()
    }

    pub fn qubit(lattice: &HexLattice, x: i64, y: i64) -> Result<DefectMap, LayoutError> {
        let mut m = DefectMap::default();
        m.add_qubit(lattice, Coord::new(x, y))?;
        Ok(m)
    }

    pub fn coupler(lattice: &HexLattice, a: (i64, i64), b: (i64, i64)) -> Result<DefectMap, LayoutError> {
        let mut m = DefectMap::default();
        m.add_coupler(lattice, Coord::new(a.0, a.1), Coord::new(b.0, b.1))?;
        Ok(m)
    }

    pub fn add_qubit(&mut self, lattice: &HexLattice, c: Coord) -> Result<(), LayoutError> {
        let q = lattice.index_of(c).ok_or(LayoutError::UnknownQubit(c))?;
        self.broken_qubits.insert(q);
        Ok(())
    }

    pub fn add_coupler(&mut self, lattice: &HexLattice, a: Coord, b: Coord) -> Result<(), LayoutError> {
        let qa = lattice.index_of(a).ok_or(LayoutError::UnknownQubit(a))?;
        let qb = lattice.index_of(b).ok_or(LayoutError::UnknownQubit(b))?;
        let c = Coupler::new(qa, qb);
        if !lattice.couplers.contains(&c) {
            return Err(LayoutError::UnknownCoupler(a, b));
        }
        self.broken_couplers.insert(c);
        Ok(())
    }

    /// Parses `qubit x y` / `coupler x1 y1 x2 y2` lines; `#` starts a comment.
    pub fn parse(lattice: &HexLattice, text: &str) -> Result<DefectMap, LayoutError> {
        let mut m = DefectMap::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |msg: &str| LayoutError::Syntax { line: n + 1, msg: msg.to_string() };
            let words: Vec<&str> = line.split_whitespace().collect();
            let nums: Result<Vec<Half>, _> = words[1..].iter().map(|w| w.parse::<Half>()).collect();
            let nums = nums.map_err(|e| syntax(&e.to_string()))?;
            match (words[0], nums.as_slice()) {
                ("qubit", [x, y]) => m.add_qubit(lattice, Coord { x: *x, y: *y })?,
                ("coupler", [x1, y1, x2, y2]) => m.add_coupler(lattice, Coord { x: *x1, y: *y1 }, Coord { x: *x2, y: *y2 })?,
                ("qubit", _) => return Err(syntax("expected `qubit x y`")),
                ("coupler", _) => return Err(syntax("expected `coupler x1 y1 x2 y2`")),
                (other, _) => return Err(syntax(&format!("unknown defect kind {other:?}"))),
            }
        }
        Ok(m)
    }

    pub fn to_text(&self, lattice: &HexLattice) -> String {
        let mut s = String::new();
        for &q in &self.broken_qubits {
            let c = lattice.coord(q);
            s.push_str(&format!("qubit {} {}\n", c.x, c.y));
        }
        for c in &self.broken_couplers {
            let (a, b) = (lattice.coord(c.a()), lattice.coord(c.b()));
            s.push_str(&format!("coupler {} {} {} {}\n", a.x, a.y, b.x, b.y));
        }
        s
    }
}

/// One broken element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Defect {
    Qubit(usize),
    Coupler(Coupler),
}

/// Defect classes of the four demonstrated configurations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DefectLabel {
    /// Broken qubit.
    A,
    /// Broken horizontal coupler.
    B,
    /// Broken vertical coupler with the data qubit below.
    C,
    /// Broken vertical coupler with the data qubit above.
    D,
    Unsupported,
}

impl fmt::Display for DefectLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DefectLabel::A => "A",
            DefectLabel::B => "B",
            DefectLabel::C => "C",
            DefectLabel::D => "D",
            DefectLabel::Unsupported => "unsupported",
        })
    }
}

/// Qubits of every plaquette the defect touches.
pub fn defect_footprint(lattice: &HexLattice, defect: Defect) -> BTreeSet<usize> {
    lattice
        .plaquettes
        .iter()
        .filter(|p| match defect {
            Defect::Qubit(q) => p.support.contains(&q),
            Defect::Coupler(c) => p.edges.contains(&c),
        })
        .flat_map(|p| p.support.iter().copied())
        .collect()
}

pub fn classify_defects(lattice: &HexLattice, defects: &DefectMap) -> Vec<(Defect, DefectLabel)> {
    let all: Vec<Defect> = defects
        .broken_qubits
        .iter()
        .map(|&q| Defect::Qubit(q))
        .chain(defects.broken_couplers.iter().map(|&c| Defect::Coupler(c)))
        .collect();
    let prints: Vec<BTreeSet<usize>> = all.iter().map(|&d| defect_footprint(lattice, d)).collect();
    let boundary = lattice.boundary_qubits();
    all.iter()
        .enumerate()
        .map(|(k, &defect)| {
            let isolated = prints.iter().enumerate().all(|(j, other)| j == k || other.is_disjoint(&prints[k]));
            let interior = prints[k].is_disjoint(&boundary);
            let label = if !isolated || !interior {
                DefectLabel::Unsupported
            } else {
                match defect {
                    Defect::Qubit(_) => DefectLabel::A,
                    Defect::Coupler(c) => {
                        let (pa, pb) = (lattice.xy(c.a()), lattice.xy(c.b()));
                        if pa.1 == pb.1 {
                            DefectLabel::B
                        } else {
                            let lower = if pa.1 < pb.1 { c.a() } else { c.b() };
                            if lattice.qubits[lower].role == Role::Data {
                                DefectLabel::C
                            } else {
                                DefectLabel::D
                            }
                        }
                    }
                }
            };
            (defect, label)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_round_trip() {
        for s in ["0", "4", "4.5", "18", "-1.5"] {
            assert_eq!(s.parse::<Half>().unwrap().to_string(), s);
        }
        assert!("4.25".parse::<Half>().is_err());
        assert!(".5".parse::<Half>().is_err());
    }

    #[test]
    fn d5_counts() {
        let l = build_hex_lattice(5).unwrap();
        assert_eq!(l.qubits.iter().filter(|q| q.role == Role::Data).count(), 25);
        assert_eq!(l.num_qubits(), 49);
        assert_eq!(l.couplers.len(), 64);
        assert_eq!(l.plaquettes.len(), 48);
        assert_eq!(l.coord(0), Coord::new(1, 5));
        assert_eq!(l.coord(48), Coord::new(9, 6));
    }
}
