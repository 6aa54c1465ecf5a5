use std::collections::BTreeSet;

use hexluci::fixtures::Case;
use hexluci::layout::{build_hex_lattice, classify_defects, Coord, DefectLabel, DefectMap, Role};

#[test]
fn d5_matches_the_fixture_qubits() {
    let lat = build_hex_lattice(5).unwrap();
    assert_eq!(lat.num_qubits(), 49);
    assert_eq!(lat.qubits.iter().filter(|q| q.role == Role::Data).count(), 25);
    let ours: BTreeSet<Coord> = lat.qubits.iter().map(|q| q.coord).collect();
    let fixture: BTreeSet<Coord> = Case::B.circuit().qubit_coords().into_values().collect();
    assert_eq!(ours, fixture);
}

#[test]
fn degrees_stay_at_three_and_couplers_are_bipartite() {
    for d in 2..=9 {
        let lat = build_hex_lattice(d).unwrap();
        assert!(lat.degree_histogram().keys().all(|&k| k <= 3), "d={d}");
        for c in &lat.couplers {
            assert_ne!(lat.qubits[c.a()].role, lat.qubits[c.b()].role);
        }
        assert_eq!(lat.qubits.iter().filter(|q| q.role == Role::Data).count(), d * d);
        assert_eq!(lat.num_qubits(), 2 * d * d - 1);
    }
    assert!(build_hex_lattice(1).is_err());
}

#[test]
fn case_labels() {
    let lat = build_hex_lattice(5).unwrap();
    let labels: Vec<DefectLabel> = Case::ALL.iter().map(|c| classify_defects(&lat, &c.defects(&lat).unwrap())[0].1).collect();
    assert_eq!(labels, vec![DefectLabel::A, DefectLabel::B, DefectLabel::C, DefectLabel::D]);
    assert!(classify_defects(&lat, &DefectMap::default()).is_empty());
    // The Case A fixture leaves out the broken qubit.
    assert!(!Case::A.circuit().qubit_coords().values().any(|&c| c == Coord::new(5, 5)));
}

#[test]
fn touching_defects_are_unsupported() {
    let lat = build_hex_lattice(5).unwrap();
    let mut dm = Case::C.defects(&lat).unwrap();
    let other = Case::B.defects(&lat).unwrap();
    dm.broken_couplers.extend(other.broken_couplers);
    assert!(classify_defects(&lat, &dm).iter().all(|(_, l)| *l == DefectLabel::Unsupported));
}

#[test]
fn defect_text_round_trips() {
    let lat = build_hex_lattice(5).unwrap();
    for c in Case::ALL {
        let dm = c.defects(&lat).unwrap();
        assert_eq!(DefectMap::parse(&lat, &dm.to_text(&lat)).unwrap(), dm);
    }
}
