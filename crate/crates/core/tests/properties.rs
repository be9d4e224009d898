use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use syk_magic::fock::{embed_sector_vector, enumerate_sector, PureState};
use syk_magic::hamiltonian::{decode_sidecar, encode_sidecar, sample, ModelKind};
use syk_magic::majorana::{dense_oracle, expectation, MajoranaString};
use syk_magic::sampler::{initial_record, metropolis_step, SamplerMode, Target};
use syk_magic::spectrum::{exact_spectrum, filtered_sre, sre};
use syk_magic::{rng, Complex64};

fn sector_state(n: usize, particles: usize, seed: u64) -> PureState {
    let basis = enumerate_sector(n, particles).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<Complex64> =
        (0..basis.len()).map(|_| Complex64::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    embed_sector_vector(&v.iter().map(|z| z / norm).collect::<Vec<_>>(), &basis).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectrum_invariants(n in 2usize..=6, fill in 0usize..=6, seed in any::<u64>()) {
        let psi = sector_state(n, fill.min(n), seed);
        let spec = exact_spectrum(&psi, false).unwrap();
        prop_assert!((spec.purity() - 1.0).abs() < 1e-10);
        prop_assert!(spec.unit_peak() >= 2);
        let mut last = f64::INFINITY;
        for alpha in [1.0, 1.5, 2.0, 3.0, 4.0] {
            let m = sre(&spec, alpha).unwrap();
            prop_assert!(m >= -1e-10 && m < n as f64 * std::f64::consts::LN_2 + 1e-10);
            prop_assert!(m <= last + 1e-10);
            last = m;
            if alpha >= 2.0 {
                prop_assert!(filtered_sre(&spec, alpha).unwrap() >= m - 1e-10);
            }
        }
    }

    #[test]
    fn fast_expectation_matches_oracle(n in 1usize..=4, raw in any::<u64>(), seed in any::<u64>()) {
        let bits = raw & ((1u64 << (2 * n)) - 1);
        let m = MajoranaString::new(n, bits).unwrap();
        let psi = sector_state(n, n / 2, seed);
        let op = dense_oracle(m).unwrap();
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        let want = (v.adjoint() * op * &v)[(0, 0)];
        prop_assert!((expectation(m, &psi).unwrap() - want.re).abs() < 1e-12);
        prop_assert!(want.im.abs() < 1e-12);
    }

    #[test]
    fn sidecar_round_trip(n in (1usize..=3).prop_map(|k| 2 * k), quartic in any::<bool>(), seed in any::<u64>()) {
        let kind = if quartic && n >= 4 { ModelKind::Syk4 } else { ModelKind::Syk2 };
        let model = sample(kind, n, 1.0, seed).unwrap().with_mu(0.25);
        let bytes = encode_sidecar(&model);
        prop_assert_eq!(decode_sidecar(&bytes).unwrap(), model);
    }

    #[test]
    fn sidecar_rejects_truncation(cut in 0usize..200, seed in any::<u64>()) {
        let model = sample(ModelKind::Syk2, 4, 1.0, seed).unwrap();
        let bytes = encode_sidecar(&model);
        let cut = cut.min(bytes.len() - 1);
        prop_assert!(decode_sidecar(&bytes[..cut]).is_err());
    }

    #[test]
    fn filtered_chains_avoid_trivial_strings(n in 2usize..=5, seed in any::<u64>()) {
        let psi = sector_state(n, n / 2, seed);
        let target = Target::new(&psi, SamplerMode::Filtered).unwrap();
        let mut cur = initial_record(&target).unwrap();
        let mut r = rng::stream(seed);
        for _ in 0..500 {
            cur = metropolis_step(&cur, &target, &mut r).unwrap().0;
            prop_assert!(!cur.string.is_identity() && !cur.string.is_parity());
            prop_assert!(cur.string.is_even() && cur.sigma > 0.0);
        }
    }
}
