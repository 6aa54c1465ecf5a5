use hexluci::circuit_ir::parse_compact;
use hexluci::fixtures::Case;
use hexluci::gf2::{BitRow, Echelon};
use hexluci::isg::{infer_all, StabilizerBasis};
use hexluci::layout::build_hex_lattice;
use hexluci::pauli::{Basis, PauliString};
use hexluci::subsystem::build_midcycle_code;

fn span(n: usize, sets: &[Vec<usize>]) -> Echelon {
    let mut e = Echelon::new(n, sets.len() + 1);
    for s in sets {
        e.insert(&BitRow::from_ones(n, s.iter().copied()));
    }
    e
}

#[test]
fn reinferred_fixtures_span_the_same_detectors() {
    let lat = build_hex_lattice(5).unwrap();
    for case in Case::ALL {
        let code = build_midcycle_code(&lat, &case.defects(&lat).unwrap()).unwrap();
        let fixture = case.circuit();
        let ours = infer_all(&fixture.without_annotations(), &code).unwrap();
        let n = fixture.num_measurements();
        let (a, b) = (ours.detector_records(), fixture.detector_records());
        assert_eq!(a.len(), b.len(), "{}", case.name());
        let (ea, eb) = (span(n, &a), span(n, &b));
        assert!(b.iter().all(|d| ea.contains(&BitRow::from_ones(n, d.iter().copied()))), "{}", case.name());
        assert!(a.iter().all(|d| eb.contains(&BitRow::from_ones(n, d.iter().copied()))), "{}", case.name());
        // Observables agree up to detectors.
        let mut diff = BitRow::from_ones(n, ours.observable_records()[0].iter().copied());
        diff.xor_assign(&BitRow::from_ones(n, fixture.observable_records()[0].iter().copied()));
        assert!(eb.contains(&diff), "{}", case.name());
    }
}

#[test]
fn reset_then_measure_is_one_detector() {
    let c = parse_compact("RX_0;MX_0").unwrap();
    let inf = hexluci::isg::track(&c, None).unwrap();
    assert_eq!(inf.detectors, vec![vec![0]]);
}

#[test]
fn repeated_measurement_pairs_last_two() {
    let c = parse_compact("RX_0;M_0;H_0;H_0;M_0;M_0").unwrap();
    let inf = hexluci::isg::track(&c, None).unwrap();
    assert_eq!(inf.random, vec![0]);
    assert_eq!(inf.detectors, vec![vec![0, 1], vec![1, 2]]);
}

#[test]
fn measuring_anticommuting_single_replaces() {
    let mut b = StabilizerBasis::new(1);
    b.process_reset(0, Basis::Z);
    b.measure(0, Basis::X);
    assert_eq!(b.elements.len(), 1);
    assert_eq!(b.elements[0].pauli, PauliString::single(1, 0, Basis::X));
}

#[test]
fn reset_on_bell_pair_leaves_one_qubit_fixed() {
    let mut b = StabilizerBasis::new(2);
    b.process_reset(0, Basis::X);
    b.process_reset(1, Basis::Z);
    b.apply_cx(0, 1);
    b.process_reset(0, Basis::Z);
    let ps: Vec<String> = b.elements.iter().map(|e| e.pauli.to_string()).collect();
    assert_eq!(ps, vec!["+Z0"]);
}

/// Tracker against a dense tableau on random small circuits: every
/// measurement must agree on being random, and every deterministic outcome
/// must equal the tracked parity of earlier records.
///
/// A reset swaps the qubit into a fresh ancilla that is never measured, so
/// the discarded state stays entangled rather than collapsing.
#[test]
fn tracker_agrees_with_tableau() {
    use hexluci::isg::Outcome;
    use hexluci::noise_sim::Tableau;
    use rand::{Rng, SeedableRng};

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let mut deterministic = 0;
    for _ in 0..500 {
        let n = rng.random_range(1..=6);
        let mut isg = StabilizerBasis::new(n);
        let mut tab = Tableau::new(n + 48);
        let mut fresh = n..n + 48;
        let mut reset = |tab: &mut Tableau, q: usize, basis: Basis| {
            let a = fresh.next().unwrap();
            tab.cx(q, a);
            tab.cx(a, q);
            if basis == Basis::X {
                tab.h(q);
            }
        };
        let mut rec: Vec<bool> = Vec::new();
        for q in 0..n {
            isg.process_reset(q, Basis::Z);
        }
        for _ in 0..rng.random_range(5..40) {
            let q = rng.random_range(0..n);
            let basis = if rng.random_bool(0.5) { Basis::Z } else { Basis::X };
            match rng.random_range(0..6) {
                0 if n > 1 => {
                    let t = (q + rng.random_range(1..n)) % n;
                    isg.apply_cx(q, t);
                    tab.cx(q, t);
                }
                1 => {
                    isg.apply_h(q);
                    tab.h(q);
                }
                2 => {
                    isg.apply_s(q);
                    tab.s(q);
                }
                3 => {
                    isg.process_reset(q, basis);
                    reset(&mut tab, q, basis);
                }
                _ => {
                    let (_, outcome) = isg.measure(q, basis);
                    let coin = rng.random_bool(0.5);
                    let (bit, random) = tab.measure(q, basis, &mut || coin);
                    match outcome {
                        Outcome::Random => assert!(random),
                        Outcome::Deterministic { recs, logical, flipped } => {
                            assert!(!random && !logical);
                            let parity = recs.iter().fold(flipped, |a, &m| a ^ rec[m]);
                            assert_eq!(parity, bit);
                            deterministic += 1;
                        }
                    }
                    rec.push(bit);
                }
            }
        }
        assert!(isg.is_consistent());
    }
    assert!(deterministic > 500);
}
