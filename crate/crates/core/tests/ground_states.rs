use syk_magic::experiments::half_filling_ground_state;
use syk_magic::hamiltonian::{sample, ModelKind};
use syk_magic::rng::derive_seed;
use syk_magic::sampler::{run_chain, ChainConfig};
use syk_magic::spectrum::{compare_fits, exact_spectrum, filtered_sre, histogram, skewness, sre, FitFamily};
use syk_magic::fock::PureState;

fn gs(kind: ModelKind, n: usize, r: u64) -> PureState {
    let model = sample(kind, n, 1.0, derive_seed(2024, &[kind.order() as u64, n as u64, r])).unwrap();
    half_filling_ground_state(&model).unwrap().state
}

#[test]
fn filtered_exceeds_plain_on_ground_states() {
    for kind in [ModelKind::Syk4, ModelKind::Syk2] {
        for n in [6, 8] {
            let spec = exact_spectrum(&gs(kind, n, 0), false).unwrap();
            for alpha in [2.0, 3.0, 4.0] {
                assert!(filtered_sre(&spec, alpha).unwrap() >= sre(&spec, alpha).unwrap(), "{kind} N={n} α={alpha}");
            }
        }
    }
}

#[test]
fn syk_connected_histogram_is_symmetric() {
    let spec = exact_spectrum(&gs(ModelKind::Syk4, 8, 1), false).unwrap();
    let c = spec.connected();
    let n = c.len() as f64;
    // standard error of the sample skewness for a symmetric law
    let se = (6.0 * (n - 2.0) / ((n + 1.0) * (n + 3.0))).sqrt();
    assert!(skewness(&c).abs() < 3.0 * se, "skewness {} vs {}", skewness(&c), se);
    let h = histogram(&spec, None).unwrap();
    assert!((h.integral() - 1.0).abs() < 1e-12);
    let strings = 4f64.powi(8);
    assert!((h.mass - c.len() as f64 / strings).abs() < 1e-15);
}

// At eight sites the SYK ground-state fits are too close to call; ten separates them.
#[test]
fn model_selection_on_ground_states() {
    let preferred = |kind, n, r| compare_fits(&exact_spectrum(&gs(kind, n, r), n > 8).unwrap()).unwrap().preferred();
    let laplace_wins = (0..4).filter(|&r| preferred(ModelKind::Syk2, 8, r) == FitFamily::Laplace).count();
    let gauss_wins = (0..4).filter(|&r| preferred(ModelKind::Syk4, 10, r) == FitFamily::Gaussian).count();
    assert!(laplace_wins >= 3, "SYK2 Laplace preferred in {laplace_wins}/4");
    assert!(gauss_wins >= 3, "SYK Gaussian preferred in {gauss_wins}/4");
}

#[test]
fn sampled_filtered_sre_matches_exact_at_six_sites() {
    let psi = gs(ModelKind::Syk4, 6, 3);
    let exact = filtered_sre(&exact_spectrum(&psi, false).unwrap(), 2.0).unwrap();
    let cfg = ChainConfig { samples: 100_000, seed: 5, ..Default::default() };
    let r = &run_chain(&psi, &cfg).unwrap().sre[0];
    assert!((r.m_filtered - exact).abs() < 3.0 * r.stderr_filtered.unwrap(), "{} vs {exact}", r.m_filtered);
}

#[test]
fn estimates_stable_under_longer_burn_in_and_thinning() {
    let psi = gs(ModelKind::Syk2, 6, 2);
    let base = ChainConfig { samples: 80_000, seed: 8, ..Default::default() };
    let a = &run_chain(&psi, &base).unwrap().sre[0];
    let doubled = ChainConfig { burn_in: 2 * base.burn_in, thinning: 2, seed: 9, ..base };
    let b = &run_chain(&psi, &doubled).unwrap().sre[0];
    let se = a.stderr_filtered.unwrap().hypot(b.stderr_filtered.unwrap());
    assert!((a.m_filtered - b.m_filtered).abs() < 3.0 * se);
}

#[test]
fn chain_results_ignore_thread_count() {
    let psi = gs(ModelKind::Syk4, 6, 4);
    let cfg = ChainConfig { samples: 20_000, seed: 1, ..Default::default() };
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| run_chain(&psi, &cfg)).unwrap();
    let b = many.install(|| run_chain(&psi, &cfg)).unwrap();
    assert_eq!(a, b);
}
