use hexluci::analysis::{brute_force_distance, circuit_distance, dem_to_graph, distance_pair, graphlike_distance};
use hexluci::fixtures::Case;
use hexluci::layout::{build_hex_lattice, DefectMap};
use hexluci::noise_sim::{apply_si1000, extract_dem, NoiseParams};
use hexluci::pauli::Basis;
use hexluci::schedule::{build_board, emit_circuit};
use hexluci::subsystem::build_midcycle_code;

#[test]
fn case_b_graph_is_connected() {
    let dem = extract_dem(&apply_si1000(&Case::B.circuit(), NoiseParams::new(1e-3).unwrap()));
    let g = dem_to_graph(&dem).unwrap();
    assert!(g.is_connected());
    assert!(g.num_boundary_edges() > 0);
    assert_eq!(g.num_nodes(), dem.num_detectors + 1);
}

#[test]
fn fixture_distances() {
    let want = [(Case::A, 4), (Case::B, 4), (Case::C, 4), (Case::D, 5)];
    for (case, d) in want {
        assert_eq!(circuit_distance(&case.circuit()).unwrap(), Some(d), "{}", case.name());
    }
}

#[test]
fn distance_table() {
    let lat = build_hex_lattice(5).unwrap();
    let u = distance_pair(&lat, &DefectMap::default(), 5).unwrap();
    assert_eq!((u.x, u.z), (Some(5), Some(5)));
    // Memory-basis pairs: X-memory detects Z-type logicals and vice versa.
    let want = [(Case::A, (4, 4)), (Case::B, (4, 4)), (Case::C, (4, 5)), (Case::D, (5, 4))];
    for (case, (x, z)) in want {
        let p = distance_pair(&lat, &case.defects(&lat).unwrap(), 5).unwrap();
        assert_eq!((p.x, p.z), (Some(x), Some(z)), "{}", case.name());
    }
}

/// Small patches where exhaustive search is feasible.
#[test]
fn search_agrees_with_enumeration_on_toy_patches() {
    for (d, cycles) in [(2, 1), (2, 2), (3, 1)] {
        let lat = build_hex_lattice(d).unwrap();
        let board = build_board(&build_midcycle_code(&lat, &DefectMap::default()).unwrap()).unwrap();
        for basis in [Basis::X, Basis::Z] {
            let c = emit_circuit(&board, cycles, basis).unwrap();
            let dem = extract_dem(&apply_si1000(&c, NoiseParams::new(1e-3).unwrap()));
            let g = graphlike_distance(&dem_to_graph(&dem).unwrap()).unwrap();
            assert_eq!(g, d, "d={d} cycles={cycles} {basis:?}");
            if dem.mechanisms.len() <= 200 {
                assert_eq!(brute_force_distance(&dem, g + 1), Some(g), "d={d} cycles={cycles} {basis:?}");
            }
        }
    }
}
