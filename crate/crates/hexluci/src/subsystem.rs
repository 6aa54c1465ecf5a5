//! Mid-cycle subsystem code of a patch with broken qubits and couplers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::gf2::{nullspace, BitRow};
use crate::layout::{classify_defects, Coupler, DefectLabel, DefectMap, HexLattice, Plaquette};
pub use crate::pauli::{Basis, Pauli, PauliString};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CheckKind {
    Stabilizer,
    Gauge,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckOperator {
    pub pauli: PauliString,
    pub basis: Basis,
    pub kind: CheckKind,
    pub super_group: Option<usize>,
    /// Index of the lattice plaquette this check was cut from.
    pub plaquette: usize,
    /// Qubit that holds the check after contraction.
    pub site: usize,
    pub diagonal: u8,
    /// Couplers used by the contracting circuit.
    pub edges: Vec<Coupler>,
}

impl CheckOperator {
    pub fn support(&self) -> Vec<usize> {
        self.pauli.support()
    }

    pub fn weight(&self) -> usize {
        self.pauli.weight()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperStabilizer {
    pub basis: Basis,
    pub pauli: PauliString,
    pub members: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct SubsystemCode {
    pub checks: Vec<CheckOperator>,
    pub super_stabilizers: BTreeMap<usize, SuperStabilizer>,
    pub lattice: HexLattice,
    pub defects: DefectMap,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SubsystemError {
    #[error("defect {defect} is not an isolated bulk defect")]
    Unsupported { defect: String },
}

/// Collapses a connected piece of a plaquette's U onto one qubit.
fn contraction_site(lattice: &HexLattice, plaq: &Plaquette, component: &BTreeSet<usize>) -> usize {
    if component.contains(&plaq.owner) {
        return plaq.owner;
    }
    // Without the owner the piece is a single column: X collapses down, Z up.
    let pick_low = plaq.basis == Basis::X;
    *component
        .iter()
        .min_by_key(|&&q| {
            let y = lattice.xy(q).1;
            if pick_low {
                y
            } else {
                -y
            }
        })
        .expect("component is non-empty")
}

fn components(nodes: &BTreeSet<usize>, edges: &[Coupler]) -> Vec<BTreeSet<usize>> {
    let mut left: BTreeSet<usize> = nodes.clone();
    let mut out = Vec::new();
    while let Some(&start) = left.iter().next() {
        let mut comp = BTreeSet::from([start]);
        let mut stack = vec![start];
        left.remove(&start);
        while let Some(q) = stack.pop() {
            for e in edges.iter().filter(|e| e.touches(q)) {
                let o = e.other(q);
                if left.remove(&o) {
                    comp.insert(o);
                    stack.push(o);
                }
            }
        }
        out.push(comp);
    }
    out
}

pub fn build_midcycle_code(lattice: &HexLattice, defects: &DefectMap) -> Result<SubsystemCode, SubsystemError> {
    for (defect, label) in classify_defects(lattice, defects) {
        if label == DefectLabel::Unsupported {
            return Err(SubsystemError::Unsupported { defect: describe(lattice, defect) });
        }
    }
    Ok(build_unchecked(lattice, defects))
}

fn describe(lattice: &HexLattice, defect: crate::layout::Defect) -> String {
    match defect {
        crate::layout::Defect::Qubit(q) => format!("qubit {}", lattice.coord(q)),
        crate::layout::Defect::Coupler(c) => format!("coupler {}-{}", lattice.coord(c.a()), lattice.coord(c.b())),
    }
}

/// Same construction without the isolation check; used for experiments with
/// defect clusters.
pub fn build_unchecked(lattice: &HexLattice, defects: &DefectMap) -> SubsystemCode {
    let n = lattice.num_qubits();
    let alive = |q: usize| !defects.broken_qubits.contains(&q);
    let mut checks = Vec::new();
    for (pi, plaq) in lattice.plaquettes.iter().enumerate() {
        let surv: BTreeSet<usize> = plaq.support.iter().copied().filter(|&q| alive(q)).collect();
        let edges: Vec<Coupler> =
            plaq.edges.iter().copied().filter(|c| !defects.broken_couplers.contains(c) && alive(c.a()) && alive(c.b())).collect();
        let intact = surv.len() == plaq.support.len() && edges.len() == plaq.edges.len();
        for comp in components(&surv, &edges) {
            let comp_edges: Vec<Coupler> = edges.iter().copied().filter(|e| comp.contains(&e.a()) && comp.contains(&e.b())).collect();
            checks.push(CheckOperator {
                pauli: PauliString::from_support(n, comp.iter().copied(), plaq.basis),
                basis: plaq.basis,
                kind: if intact { CheckKind::Stabilizer } else { CheckKind::Gauge },
                super_group: None,
                plaquette: pi,
                site: contraction_site(lattice, plaq, &comp),
                diagonal: plaq.diagonal(),
                edges: comp_edges,
            });
        }
    }

    // Intact plaquettes that fail to commute with a cut piece become gauges too.
    loop {
        let gauges: Vec<usize> = (0..checks.len()).filter(|&i| checks[i].kind == CheckKind::Gauge).collect();
        let promote: Vec<usize> = (0..checks.len())
            .filter(|&i| checks[i].kind == CheckKind::Stabilizer)
            .filter(|&i| gauges.iter().any(|&g| !checks[i].pauli.commutes(&checks[g].pauli)))
            .collect();
        if promote.is_empty() {
            break;
        }
        for i in promote {
            checks[i].kind = CheckKind::Gauge;
        }
    }

    let super_stabilizers = group_supers(n, &mut checks);
    SubsystemCode { checks, super_stabilizers, lattice: lattice.clone(), defects: defects.clone() }
}

/// Gauges linked by overlap, so that far-apart defects are handled separately.
fn gauge_regions(checks: &[CheckOperator]) -> Vec<Vec<usize>> {
    let gauges: Vec<usize> = (0..checks.len()).filter(|&i| checks[i].kind == CheckKind::Gauge).collect();
    let mut parent: Vec<usize> = (0..gauges.len()).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut i = i;
        while p[i] != r {
            let nx = p[i];
            p[i] = r;
            i = nx;
        }
        r
    }
    for a in 0..gauges.len() {
        for b in a + 1..gauges.len() {
            let (pa, pb) = (&checks[gauges[a]].pauli, &checks[gauges[b]].pauli);
            let overlap = pa
                .x_bits()
                .iter()
                .zip(pa.z_bits())
                .zip(pb.x_bits().iter().zip(pb.z_bits()))
                .any(|((ax, az), (bx, bz))| (ax | az) & (bx | bz) != 0);
            if overlap {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
    }
    let mut regions: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, &g) in gauges.iter().enumerate() {
        let r = find(&mut parent, k);
        regions.entry(r).or_default().push(g);
    }
    regions.into_values().collect()
}

fn group_supers(n: usize, checks: &mut [CheckOperator]) -> BTreeMap<usize, SuperStabilizer> {
    let mut supers = BTreeMap::new();
    for region in gauge_regions(checks) {
        for basis in [Basis::X, Basis::Z] {
            let mine: Vec<usize> = region.iter().copied().filter(|&i| checks[i].basis == basis).collect();
            let theirs: Vec<usize> = region.iter().copied().filter(|&i| checks[i].basis != basis).collect();
            if mine.is_empty() {
                continue;
            }
            let rows: Vec<BitRow> = theirs
                .iter()
                .map(|&t| BitRow::from_ones(mine.len(), (0..mine.len()).filter(|&k| !checks[mine[k]].pauli.commutes(&checks[t].pauli))))
                .collect();
            for v in nullspace(&rows, mine.len()) {
                let id = supers.len();
                let members: Vec<usize> = v.ones().into_iter().map(|k| mine[k]).filter(|&c| checks[c].super_group.is_none()).collect();
                if members.is_empty() {
                    continue;
                }
                let mut pauli = PauliString::identity(n);
                for &m in &members {
                    pauli.mul_assign(&checks[m].pauli);
                    checks[m].super_group = Some(id);
                }
                supers.insert(id, SuperStabilizer { basis, pauli, members });
            }
        }
    }
    supers
}

impl SubsystemCode {
    pub fn num_qubits(&self) -> usize {
        self.lattice.num_qubits()
    }

    pub fn gauges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.checks.len()).filter(|&i| self.checks[i].kind == CheckKind::Gauge)
    }

    pub fn stabilizers(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.checks.len()).filter(|&i| self.checks[i].kind == CheckKind::Stabilizer)
    }

    /// Sorted gauge weights of one basis.
    pub fn gauge_weights(&self, basis: Basis) -> Vec<usize> {
        let mut w: Vec<usize> = self.gauges().filter(|&g| self.checks[g].basis == basis).map(|g| self.checks[g].weight()).collect();
        w.sort_unstable();
        w
    }

    /// Extent of a super-stabilizer in plaquette steps along the two lattice
    /// axes: horizontal is the (1,1) direction of the fixture frame, vertical (1,-1).
    pub fn super_extent(&self, group: usize) -> (i64, i64) {
        let corners: Vec<(i64, i64)> =
            self.super_stabilizers[&group].members.iter().map(|&m| self.lattice.plaquettes[self.checks[m].plaquette].corner).collect();
        let h: Vec<i64> = corners.iter().map(|(a, b)| a + b).collect();
        let v: Vec<i64> = corners.iter().map(|(a, b)| a - b).collect();
        let span = |s: &[i64]| (s.iter().max().unwrap() - s.iter().min().unwrap()) / 2;
        (span(&h), span(&v))
    }

    /// Bare logical operators `(X_L, Z_L)`: each commutes with every check and
    /// anticommutes with the other.
    pub fn bare_logicals(&self) -> Option<(PauliString, PauliString)> {
        let n = self.num_qubits();
        let alive: Vec<usize> = (0..n).filter(|q| !self.defects.broken_qubits.contains(q)).collect();
        let pick = |basis: Basis| -> Option<PauliString> {
            let opp: Vec<BitRow> = self
                .checks
                .iter()
                .filter(|c| c.basis != basis)
                .map(|c| BitRow::from_ones(alive.len(), (0..alive.len()).filter(|&k| c.pauli.get(alive[k]) != Pauli::I)))
                .collect();
            let mut same = crate::gf2::Echelon::new(alive.len(), self.checks.len() + 1);
            for c in self.checks.iter().filter(|c| c.basis == basis) {
                same.insert(&BitRow::from_ones(alive.len(), (0..alive.len()).filter(|&k| c.pauli.get(alive[k]) != Pauli::I)));
            }
            let v = nullspace(&opp, alive.len()).into_iter().find(|v| !same.contains(v))?;
            let v = shorten(&v, &same_basis_rows(self, basis, &alive));
            Some(PauliString::from_support(n, v.ones().into_iter().map(|k| alive[k]), basis))
        };
        let xl = pick(Basis::X)?;
        let zl0 = pick(Basis::Z)?;
        if xl.commutes(&zl0) {
            return None;
        }
        Some((xl, zl0))
    }

    /// One-line-per-check text dump: `<kind> <basis> <group> : q1,q2,...`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let kind = match c.kind {
                CheckKind::Stabilizer => "stabilizer",
                CheckKind::Gauge => "gauge",
            };
            let group = c.super_group.map_or("-".to_string(), |g| g.to_string());
            let qs: Vec<String> = c.support().iter().map(|q| q.to_string()).collect();
            s.push_str(&format!("{kind} {} {group} : {}\n", c.basis, qs.join(",")));
        }
        s
    }
}

fn same_basis_rows(code: &SubsystemCode, basis: Basis, alive: &[usize]) -> Vec<BitRow> {
    let mut rows: Vec<BitRow> = Vec::new();
    for c in code.checks.iter().filter(|c| c.basis == basis && c.kind == CheckKind::Stabilizer) {
        rows.push(BitRow::from_ones(alive.len(), (0..alive.len()).filter(|&k| c.pauli.get(alive[k]) != Pauli::I)));
    }
    for s in code.super_stabilizers.values().filter(|s| s.basis == basis) {
        rows.push(BitRow::from_ones(alive.len(), (0..alive.len()).filter(|&k| s.pauli.get(alive[k]) != Pauli::I)));
    }
    rows
}

/// Greedy weight reduction of a logical representative by stabilizers.
fn shorten(v: &BitRow, stabs: &[BitRow]) -> BitRow {
    let mut best = v.clone();
    loop {
        let mut improved = false;
        for s in stabs {
            let mut t = best.clone();
            t.xor_assign(s);
            if t.count_ones() < best.count_ones() {
                best = t;
                improved = true;
            }
        }
        if !improved {
            return best;
        }
    }
}

/// Structural problems of a code; empty when every invariant holds.
pub fn verify_code(code: &SubsystemCode) -> Vec<String> {
    let mut out = Vec::new();
    let stabs: Vec<usize> = code.stabilizers().collect();
    for &s in &stabs {
        for (k, c) in code.checks.iter().enumerate() {
            if !code.checks[s].pauli.commutes(&c.pauli) {
                out.push(format!("stabilizer {s} anticommutes with check {k}"));
            }
        }
    }
    for (k, c) in code.checks.iter().enumerate() {
        if c.pauli.css_basis() != Some(c.basis) {
            out.push(format!("check {k} is not a pure {} operator", c.basis));
        }
        if c.kind == CheckKind::Gauge && c.super_group.is_none() {
            out.push(format!("gauge {k} belongs to no super-stabilizer"));
        }
    }
    for (id, s) in &code.super_stabilizers {
        let mut prod = PauliString::identity(code.num_qubits());
        for &m in &s.members {
            prod.mul_assign(&code.checks[m].pauli);
            if code.checks[m].super_group != Some(*id) {
                out.push(format!("gauge {m} listed in super {id} but tagged otherwise"));
            }
        }
        if prod != s.pauli {
            out.push(format!("super {id} differs from the product of its gauges"));
        }
        for (k, c) in code.checks.iter().enumerate() {
            if !s.pauli.commutes(&c.pauli) {
                out.push(format!("super {id} anticommutes with check {k}"));
            }
        }
    }
    out
}

impl fmt::Display for SubsystemCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}
