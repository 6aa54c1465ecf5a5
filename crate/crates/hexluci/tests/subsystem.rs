use hexluci::fixtures::Case;
use hexluci::layout::{build_hex_lattice, DefectMap};
use hexluci::pauli::{Basis, PauliString};
use hexluci::subsystem::{build_midcycle_code, verify_code, CheckKind};

#[test]
fn unbroken_code_has_only_stabilizers() {
    let lat = build_hex_lattice(5).unwrap();
    let code = build_midcycle_code(&lat, &DefectMap::default()).unwrap();
    assert_eq!(code.gauges().count(), 0);
    assert_eq!(code.stabilizers().count(), lat.plaquettes.len());
    assert!(verify_code(&code).is_empty());
}

#[test]
fn broken_qubit_gauges() {
    let lat = build_hex_lattice(5).unwrap();
    let code = build_midcycle_code(&lat, &Case::A.defects(&lat).unwrap()).unwrap();
    for basis in [Basis::X, Basis::Z] {
        assert_eq!(code.gauge_weights(basis), vec![1, 2, 3, 4]);
        let s = code.super_stabilizers.values().find(|s| s.basis == basis).unwrap();
        assert_eq!(s.pauli.weight(), 8);
    }
    assert!(verify_code(&code).is_empty());
}

#[test]
fn super_stabilizer_extents() {
    let lat = build_hex_lattice(5).unwrap();
    for case in Case::ALL {
        let code = build_midcycle_code(&lat, &case.defects(&lat).unwrap()).unwrap();
        assert!(verify_code(&code).is_empty(), "{}", case.name());
        for (&id, s) in &code.super_stabilizers {
            let (h, v) = code.super_extent(id);
            let want = match case {
                Case::A | Case::B => (1, 1),
                Case::C => (1, 0),
                Case::D => (0, 1),
            };
            assert_eq!((h.min(1), v.min(1)), want, "{} {:?}", case.name(), s.basis);
        }
    }
}

#[test]
fn products_of_members_equal_the_super_stabilizer() {
    let lat = build_hex_lattice(5).unwrap();
    for case in Case::ALL {
        let code = build_midcycle_code(&lat, &case.defects(&lat).unwrap()).unwrap();
        for s in code.super_stabilizers.values() {
            let mut prod = PauliString::identity(code.num_qubits());
            for &m in &s.members {
                assert_eq!(code.checks[m].kind, CheckKind::Gauge);
                prod.mul_assign(&code.checks[m].pauli);
            }
            assert_eq!(prod, s.pauli);
        }
    }
}

#[test]
fn verifier_flags_an_anticommuting_stabilizer() {
    let lat = build_hex_lattice(3).unwrap();
    let mut code = build_midcycle_code(&lat, &DefectMap::default()).unwrap();
    let s = code.stabilizers().next().unwrap();
    let (basis, q) = (code.checks[s].basis, code.checks[s].support()[0]);
    // Put an extra Pauli of the same basis on q into a neighbour of the other
    // basis, so that it stops commuting with s.
    let victim = code.stabilizers().find(|&k| code.checks[k].basis != basis && code.checks[k].support().contains(&q)).unwrap();
    let n = code.num_qubits();
    code.checks[victim].pauli.mul_assign(&PauliString::single(n, q, basis));
    assert!(!verify_code(&code).is_empty());
}
