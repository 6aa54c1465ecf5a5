use hexluci::analysis::dem_to_graph;
use hexluci::decode::{benchmark, mwpm_decode, per_round, wilson_interval, BenchmarkResult, Decoder, Passes, Syndrome};
use hexluci::fixtures::Case;
use hexluci::layout::{build_hex_lattice, DefectMap};
use hexluci::noise_sim::{DetectorErrorModel, Mechanism, NoiseParams, Symptom};
use hexluci::pauli::Basis;
use hexluci::schedule::{build_board, emit_circuit};
use hexluci::subsystem::build_midcycle_code;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mech(p: f64, dets: &[u32], obs: u64) -> Mechanism {
    let s = Symptom { detectors: dets.to_vec(), observables: obs };
    Mechanism { probability: p, symptom: s.clone(), components: vec![s] }
}

fn random_dem(rng: &mut ChaCha8Rng, detectors: u32, edges: usize) -> DetectorErrorModel {
    let mechanisms = (0..edges)
        .map(|_| {
            let a = rng.random_range(0..detectors);
            let p = rng.random_range(0.001..0.3);
            let obs = rng.random_range(0..2);
            if rng.random_bool(0.25) {
                mech(p, &[a], obs)
            } else {
                let b = (a + rng.random_range(1..detectors)) % detectors;
                mech(p, &[a.min(b), a.max(b)], obs)
            }
        })
        .collect();
    DetectorErrorModel { num_detectors: detectors as usize, num_observables: 1, mechanisms }
}

fn random_syndrome(rng: &mut ChaCha8Rng, detectors: u32, max: usize) -> Syndrome {
    let k = rng.random_range(0..=max.min(detectors as usize));
    let mut all: Vec<u32> = (0..detectors).collect();
    for i in 0..k {
        let j = rng.random_range(i..all.len());
        all.swap(i, j);
    }
    Syndrome::new(all[..k].to_vec(), detectors as usize).unwrap()
}

#[test]
fn blossom_matches_exhaustive_pairing() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for round in 0..200 {
        let (detectors, edges) = if round % 2 == 0 { (8, 12) } else { (12, 30) };
        let dem = random_dem(&mut rng, detectors, edges);
        let dec = Decoder::new(&dem).unwrap();
        let syn = random_syndrome(&mut rng, detectors, 12);
        match dec.decode(&syn) {
            Ok(m) => {
                assert_eq!(Some(m.weight), dec.brute_force_weight(&syn), "{syn:?}");
                checked += 1;
            }
            Err(_) => assert_eq!(dec.brute_force_weight(&syn), None),
        }
    }
    assert!(checked > 100);
}

#[test]
fn prediction_follows_the_matched_path() {
    // D0 - D1 - D2 line with a logical edge on the left boundary.
    let dem = DetectorErrorModel {
        num_detectors: 3,
        num_observables: 1,
        mechanisms: vec![mech(0.1, &[0], 1), mech(0.1, &[0, 1], 0), mech(0.1, &[1, 2], 0), mech(0.1, &[2], 0)],
    };
    let g = dem_to_graph(&dem).unwrap();
    let syn = |v: Vec<u32>| Syndrome::new(v, 3).unwrap();
    assert_eq!(mwpm_decode(&g, &syn(vec![0])).unwrap(), 1);
    assert_eq!(mwpm_decode(&g, &syn(vec![2])).unwrap(), 0);
    assert_eq!(mwpm_decode(&g, &syn(vec![0, 1])).unwrap(), 0);
    assert_eq!(mwpm_decode(&g, &syn(vec![0, 2])).unwrap(), 1);
}

fn memory(d: usize, defects: &DefectMap, cycles: usize, basis: Basis) -> hexluci::circuit_ir::Circuit {
    let lat = build_hex_lattice(d).unwrap();
    let board = build_board(&build_midcycle_code(&lat, defects).unwrap()).unwrap();
    emit_circuit(&board, cycles, basis).unwrap()
}

#[test]
fn noiseless_benchmark_has_no_errors() {
    let c = memory(3, &DefectMap::default(), 4, Basis::Z);
    let r = benchmark(&c, NoiseParams::new(0.0).unwrap(), 1000, 3, Passes::Two).unwrap();
    assert_eq!((r.shots, r.errors, r.rounds), (1000, 0, 4));
    assert_eq!(r.ler_per_round, 0.0);
}

#[test]
fn benchmark_is_deterministic() {
    let c = memory(3, &DefectMap::default(), 4, Basis::X);
    let p = NoiseParams::new(5e-3).unwrap();
    let a = benchmark(&c, p, 3000, 9, Passes::Two).unwrap();
    let b = benchmark(&c, p, 3000, 9, Passes::Two).unwrap();
    assert!(a.same_outcome(&b));
    assert!(a.errors > 0);
}

#[test]
fn logical_rate_falls_with_noise() {
    let c = memory(3, &DefectMap::default(), 6, Basis::Z);
    let runs: Vec<BenchmarkResult> =
        [1e-3, 5e-4, 2.5e-4].iter().map(|&p| benchmark(&c, NoiseParams::new(p).unwrap(), 40_000, 5, Passes::One).unwrap()).collect();
    for w in runs.windows(2) {
        assert!(w[1].ci_high < w[0].ci_low, "{:?}", runs);
    }
}

#[test]
fn second_pass_does_not_hurt_case_a() {
    let lat = build_hex_lattice(5).unwrap();
    let c = memory(5, &Case::A.defects(&lat).unwrap(), 10, Basis::X);
    let p = NoiseParams::new(2e-3).unwrap();
    let one = benchmark(&c, p, 100_000, 21, Passes::One).unwrap();
    let two = benchmark(&c, p, 100_000, 21, Passes::Two).unwrap();
    let sigma = (one.errors as f64).sqrt().max(1.0);
    assert!((two.errors as f64) <= one.errors as f64 + 3.0 * sigma, "{} vs {}", two.errors, one.errors);
}

proptest! {
    #[test]
    fn interval_brackets_the_estimate(shots in 1usize..1_000_000, frac in 0.0f64..=1.0) {
        let errors = (shots as f64 * frac) as usize;
        let (lo, hi) = wilson_interval(errors, shots, 1.96);
        let p = errors as f64 / shots as f64;
        prop_assert!(0.0 <= lo && lo <= p + 1e-12 && p <= hi + 1e-12 && hi <= 1.0);
    }

    #[test]
    fn per_round_rate_compounds_back(p in 0.0f64..0.5, rounds in 1usize..100) {
        let r = per_round(p, rounds);
        prop_assert!((1.0 - (1.0 - r).powi(rounds as i32) - p).abs() < 1e-9);
    }

    #[test]
    fn repeated_detectors_cancel(ids in proptest::collection::vec(0u32..40, 0..30)) {
        let syn = Syndrome::new(ids.clone(), 40).unwrap();
        let odd: Vec<u32> = (0..40).filter(|d| ids.iter().filter(|&&x| x == *d).count() % 2 == 1).collect();
        prop_assert_eq!(syn.fired(), &odd[..]);
    }
}
