//! The four reference circuits shipped with the crate (X-basis memory, distance 5).

use crate::circuit_ir::{parse_compact, Circuit};
use crate::layout::{DefectMap, HexLattice, LayoutError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Case {
    A,
    B,
    C,
    D,
}

impl Case {
    pub const ALL: [Case; 4] = [Case::A, Case::B, Case::C, Case::D];

    pub fn name(self) -> &'static str {
        match self {
            Case::A => "caseA",
            Case::B => "caseB",
            Case::C => "caseC",
            Case::D => "caseD",
        }
    }

    pub fn from_name(s: &str) -> Option<Case> {
        Case::ALL.into_iter().find(|c| c.name().eq_ignore_ascii_case(s) || c.letter().eq_ignore_ascii_case(s))
    }

    pub fn letter(self) -> &'static str {
        &self.name()[4..]
    }

    pub fn text(self) -> &'static str {
        match self {
            Case::A => include_str!("../fixtures/caseA.txt"),
            Case::B => include_str!("../fixtures/caseB.txt"),
            Case::C => include_str!("../fixtures/caseC.txt"),
            Case::D => include_str!("../fixtures/caseD.txt"),
        }
    }

    pub fn circuit(self) -> Circuit {
        parse_compact(self.text()).expect("shipped fixture parses")
    }

    /// Defect map of this case on the distance-5 patch.
    pub fn defects(self, lattice: &HexLattice) -> Result<DefectMap, LayoutError> {
        match self {
            Case::A => DefectMap::qubit(lattice, 5, 5),
            Case::B => DefectMap::coupler(lattice, (5, 5), (6, 5)),
            Case::C => DefectMap::coupler(lattice, (5, 5), (5, 6)),
            Case::D => DefectMap::coupler(lattice, (5, 4), (5, 5)),
        }
    }
}
