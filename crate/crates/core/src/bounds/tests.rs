use super::*;
use crate::attacks::{attack_covariance, kappa_f_range, optimal_attack_point, red_line};
use crate::gaussian::{g_entropy, tmsv_covariance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn channels() -> Vec<ChannelModel> {
    vec![
        ChannelModel::amplifier(1.5).unwrap(),
        ChannelModel::loss(0.2).unwrap(),
        ChannelModel::contra_amplifier(1.5).unwrap(),
    ]
}

/// Brute-force minimum over an `n³` grid in the physical angles.
fn grid_oracle(src: &SourceSpec, ks: f64, kf: f64, ch: &ChannelModel, n: usize) -> f64 {
    let (zlo, zhi) = feasible_zeta(src, ks, kf).unwrap();
    let mut best = f64::INFINITY;
    for z in linspace(zlo, zhi, n) {
        for d in linspace(0.0, FRAC_PI_2, n) {
            for x in linspace(-PI, PI, n) {
                let p = AttackParameters::new(src, ks, kf, z, d, x).unwrap();
                best = best.min(gain_at(src, &p, ch).unwrap());
            }
        }
    }
    best
}

#[test]
fn identity_channel_gain_is_thermal_entropy() {
    for n in [0.01, 0.1, 1.0, 7.5] {
        let src = SourceSpec::new(n).unwrap();
        let e = entropy_gain(&tmsv_covariance(&src), &ChannelModel::identity()).unwrap();
        assert!((e.e - g_entropy(n).unwrap()).abs() < 1e-10, "{n}: {e:?}");
    }
}

#[test]
fn transparent_loss_gain_is_reference_entropy() {
    let src = SourceSpec::new(0.3).unwrap();
    let p = AttackParameters::new(&src, 0.7, 0.5, 1.0, 0.4, 0.9).unwrap();
    let cov = attack_covariance(&src, &p);
    let e = entropy_gain(&cov, &ChannelModel::loss(1.0).unwrap()).unwrap();
    let w = crate::gaussian::state_entropy(&cov.select_modes(&[1]).unwrap()).unwrap();
    let sw = crate::gaussian::state_entropy(&cov).unwrap();
    assert!((e.e - (w - sw)).abs() < 1e-10);
}

#[test]
fn lossy_gain_at_full_transmission() {
    let src = SourceSpec::new(0.1).unwrap();
    let ch = ChannelModel::loss(0.2).unwrap();
    let opt = optimal_attack_point(&src, 1.0, 1.0, &ch).unwrap();
    let e = entropy_gain(&opt.lambda_sw, &ch).unwrap();
    assert!((e.e - g_entropy(0.2 * 0.1).unwrap()).abs() < 1e-10, "{e:?}");
    let sum: f64 = e.nu.iter().map(|&v| nu_entropy(v)).sum::<f64>() - e.mu.iter().map(|&v| nu_entropy(v)).sum::<f64>();
    assert!((sum - e.e).abs() < 1e-12);
}

#[test]
fn fast_gain_matches_generic_path() {
    let src = SourceSpec::new(0.4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for ch in channels() {
        for _ in 0..50 {
            let ks = rng.random_range(0.0..1.5);
            let kf = rng.random_range(0.0..=1.0) * kappa_f_range(ks, &src).1;
            let (zlo, zhi) = feasible_zeta(&src, ks, kf).unwrap();
            let p = AttackParameters::new(
                &src,
                ks,
                kf,
                rng.random_range(zlo..=zhi),
                rng.random_range(0.0..=FRAC_PI_2),
                rng.random_range(-PI..=PI),
            )
            .unwrap();
            let fast = gain_at(&src, &p, &ch).unwrap();
            let slow = entropy_gain(&attack_covariance(&src, &p), &ch).unwrap().e;
            assert!((fast - slow).abs() < 1e-9, "{fast} vs {slow}");
        }
    }
}

#[test]
fn unattacked_point_collapses_search() {
    let src = SourceSpec::new(0.1).unwrap();
    for ch in channels() {
        let r = min_entropy_gain(&src, 1.0, 1.0, &ch).unwrap();
        let e = entropy_gain(&tmsv_covariance(&src), &ch).unwrap().e;
        assert!((r.e_star - e).abs() < 1e-10, "{} vs {e}", r.e_star);
    }
}

#[test]
fn optimizer_matches_brute_force_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for ch in channels() {
        let src = SourceSpec::new(rng.random_range(0.05..1.0)).unwrap();
        let ks = rng.random_range(0.1..1.0);
        let kf = rng.random_range(0.2..=1.0) * kappa_f_range(ks, &src).1;
        let opt = min_entropy_gain(&src, ks, kf, &ch).unwrap().e_star;
        let oracle = grid_oracle(&src, ks, kf, &ch, 65);
        assert!(opt <= oracle + 1e-12, "{opt} > {oracle}");
        assert!(oracle - opt < 1e-5, "{opt} vs {oracle}");
    }
}

#[test]
fn below_red_line_beam_splitter_is_optimal() {
    let src = SourceSpec::new(0.1).unwrap();
    for ch in channels() {
        for &ks in &[0.2, 0.6, 1.0] {
            let kf = 0.9 * red_line(ks, &src).min(kappa_f_range(ks, &src).1);
            let r = min_entropy_gain(&src, ks, kf, &ch).unwrap();
            let opt = optimal_attack_point(&src, ks, kf, &ch).unwrap();
            let closed = entropy_gain(&opt.lambda_sw, &ch).unwrap().e;
            assert!((r.e_star - closed).abs() < 1e-6, "{ch:?} {ks}: {} vs {closed}", r.e_star);
            assert!((r.argmin.zeta() - FRAC_PI_2).abs() < 1e-3 && (r.argmin.delta() - FRAC_PI_2).abs() < 1e-3, "{r:?}");
        }
    }
}

#[test]
fn minimum_never_exceeds_random_draws() {
    let src = SourceSpec::new(0.2).unwrap();
    let ch = ChannelModel::loss(0.5).unwrap();
    let (ks, kf) = (1.3, 0.6);
    let r = min_entropy_gain(&src, ks, kf, &ch).unwrap();
    let (zlo, zhi) = feasible_zeta(&src, ks, kf).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let p = AttackParameters::new(
            &src,
            ks,
            kf,
            rng.random_range(zlo..=zhi),
            rng.random_range(0.0..=FRAC_PI_2),
            rng.random_range(-PI..=PI),
        )
        .unwrap();
        assert!(r.e_star <= gain_at(&src, &p, &ch).unwrap() + 1e-12);
    }
    assert!((gain_at(&src, &r.argmin, &ch).unwrap() - r.e_star).abs() < 1e-9);
}

#[test]
fn chi_e_closed_forms() {
    let src = SourceSpec::new(0.1).unwrap();
    let id = ChannelModel::identity();
    let zero = chi_e(&src, &EncodingSpec::new(0.0, 1).unwrap(), 1.0, 1.0, &id).unwrap();
    assert!(zero.abs() < 1e-10);
    let enc = EncodingSpec::new(2.5, 1).unwrap();
    let chi = chi_e(&src, &enc, 1.0, 1.0, &id).unwrap();
    let want = g_entropy(2.6).unwrap() - g_entropy(0.1).unwrap();
    assert!((chi - want).abs() < 1e-10);
}

#[test]
fn infeasible_pair_is_domain_error() {
    let src = SourceSpec::new(0.1).unwrap();
    let r = min_entropy_gain(&src, 0.5, 0.6, &ChannelModel::identity());
    assert!(matches!(r, Err(Error::Domain(_))));
    let r = min_entropy_gain(&src, 0.5, 0.4, &ChannelModel::amplifier(2.0).unwrap().with_env_photons(0.1).unwrap());
    assert!(r.is_err());
}

#[test]
fn theorem2_matches_two_mode_bound() {
    let enc = EncodingSpec::new(0.0, 1).unwrap();
    for (ch, n, ks, kf) in [
        (ChannelModel::amplifier(1.5).unwrap(), 0.1, 0.5, 0.45),
        (ChannelModel::loss(0.2).unwrap(), 0.5, 0.8, 0.6),
    ] {
        let src = SourceSpec::new(n).unwrap();
        let a = chi_e(&src, &enc, ks, kf, &ch).unwrap();
        let b = chi_e_prime(&src, &enc, ks, kf, &ch).unwrap();
        assert!((a - b.chi).abs() < 1e-5, "{a} vs {b:?}");
        assert!(b.argmax.b1.powi(2) <= 1e-4 * kf * src.c_s().powi(2), "{b:?}");
        let sum = b.argmax.a1.powi(2) + b.argmax.b1.powi(2) + b.argmax.a2.powi(2);
        assert!((sum - kf * src.c_s().powi(2)).abs() < 1e-12);
    }
}

#[test]
fn theorem2_zero_correlation() {
    let src = SourceSpec::new(0.1).unwrap();
    let enc = EncodingSpec::new(1.0, 1).unwrap();
    let ch = ChannelModel::amplifier(1.5).unwrap();
    let a = chi_e(&src, &enc, 0.7, 0.0, &ch).unwrap();
    let b = chi_e_prime(&src, &enc, 0.7, 0.0, &ch).unwrap();
    assert!((a - b.chi).abs() < 1e-8, "{a} vs {}", b.chi);
}

#[test]
fn theorem2_state_matches_generic_complement() {
    let src = SourceSpec::new(0.3).unwrap();
    let p = Theorem2Parameters::new(&src, 0.6, 0.4, 0.3, 0.7, 1.9, 2.2).unwrap();
    let cov = theorem2_covariance(&src, 0.6, &p);
    for ch in channels() {
        let fast = crate::channels::complementary_output_matrix(cov.matrix(), &ch);
        let slow = complementary_output_cov(&cov, &ch).unwrap();
        assert!((fast - slow.matrix()).amax() < 1e-12);
    }
}

#[test]
fn single_point_convexity_scan_is_empty() {
    let src = SourceSpec::new(0.1).unwrap();
    let grid = ScanGrid { kappa_s: vec![0.5], kappa_f: vec![0.3] };
    let r = convexity_scan(&src, &ChannelModel::identity(), &grid, &SearchOptions::default(), 1e-9).unwrap();
    assert_eq!(r.triples_checked, 0);
    assert!(r.violations.is_empty());
    let bad = ScanGrid { kappa_s: vec![0.1, 0.2, 0.5], kappa_f: vec![0.1] };
    assert!(matches!(convexity_scan(&src, &ChannelModel::identity(), &bad, &SearchOptions::default(), 1e-9), Err(Error::Argument(_))));
}

#[test]
fn small_convexity_and_monotonicity_scan() {
    let src = SourceSpec::new(0.1).unwrap();
    let opts = SearchOptions { grid: 17, ..SearchOptions::default() };
    let grid = ScanGrid::uniform((0.0, 1.0), (0.0, 1.0), 7, 7);
    for ch in channels() {
        let r = convexity_scan(&src, &ch, &grid, &opts, 1e-9).unwrap();
        assert!(r.triples_checked > 20);
        assert!(r.violations.is_empty(), "{ch:?}: {:?}", r.violations);
        assert!(monotonicity_scan(&src, &ch, &grid, &opts, 1e-8).unwrap().is_empty());
    }
}

#[test]
fn first_order_expansion_selects_beam_splitter() {
    let src = SourceSpec::new(0.1).unwrap();
    for ch in channels() {
        let r = first_order_check(&src, 0.5, &ch, 17, 1e-5).unwrap();
        assert!((r.argmin.0 - FRAC_PI_2).abs() < 1e-12 && (r.argmin.1 - FRAC_PI_2).abs() < 1e-12, "{ch:?}: {r:?}");
        assert!(r.zeroth_order_spread <= 1e-8, "{r:?}");
    }
    assert!(matches!(
        first_order_check(&src, 0.5, &ChannelModel::identity(), 5, 1e-300),
        Err(Error::Numerical(_))
    ));
}

#[test]
fn indefinite_three_mode_state_is_rejected() {
    let src = SourceSpec::new(0.5).unwrap();
    let p = Theorem2Parameters::new(&src, 0.8, 0.6, 0.0, 0.6232, 0.0, PI).unwrap();
    let cov = theorem2_covariance(&src, 0.8, &p);
    assert!(!crate::gaussian::is_physical(&cov).physical);
}

#[test]
fn high_gain_matches_closed_form_spectra() {
    // closed forms: C ∝ Z gives ν± = (sqrt((a+b)² - 4c²) ± |b - a|)/2, C ∝ I gives ν± = (sqrt((a-b)² + 4c²) ± (a+b))/2 in magnitude
    let ent = |v: f64| nu_entropy(v);
    for &(n, g, k) in &[(1e-3, 1e6, 0.1), (1e-2, 1e6, 0.01), (0.1, 1e6, 0.5), (1e-4, 1e6, 1e-3)] {
        let src = SourceSpec::new(n).unwrap();
        let ch = ChannelModel::amplifier(g).unwrap();
        let opt = optimal_attack_point(&src, k, k, &ch).unwrap();
        let generic = entropy_gain(&opt.lambda_sw, &ch).unwrap().e;
        let (a, b, c) = (1.0 + 2.0 * k * n, 2.0 * n + 1.0, k.sqrt() * 2.0 * src.c_s());
        let r = ((a + b).powi(2) - 4.0 * c * c).sqrt();
        let mu = [(r + (b - a).abs()) / 2.0, (r - (b - a).abs()) / 2.0];
        let (a2, c2) = (1.0 + 2.0 * (g - 1.0) * (1.0 + k * n), (k * (g - 1.0)).sqrt() * 2.0 * src.c_s());
        let s = ((a2 - b).powi(2) + 4.0 * c2 * c2).sqrt();
        let nu = [(s + a2 + b) / 2.0, (s - a2 - b).abs() / 2.0];
        let closed = ent(nu[0]) + ent(nu[1]) - ent(mu[0]) - ent(mu[1]);
        let fast = gain_at(&src, &AttackParameters::beam_splitter(&src, k, k).unwrap(), &ch).unwrap();
        assert!((generic - closed).abs() < 1e-8 && (fast - closed).abs() < 1e-8, "{n} {k}: {generic} {fast} {closed}");
    }
}

#[test]
fn red_line_argmin_is_the_beam_splitter() {
    let src = SourceSpec::new(0.1).unwrap();
    let ch = ChannelModel::amplifier(1.5).unwrap();
    let ks = 0.05 + 1.45 * 11.0 / 14.0;
    let kf = red_line(ks, &src);
    assert!(AttackParameters::beam_splitter(&src, ks, kf).is_ok());
    let r = min_entropy_gain(&src, ks, kf, &ch).unwrap();
    assert_eq!((r.argmin.zeta(), r.argmin.delta()), (FRAC_PI_2, FRAC_PI_2));
    let closed = entropy_gain(&optimal_attack_point(&src, ks, kf, &ch).unwrap().lambda_sw, &ch).unwrap().e;
    assert!((r.e_star - closed).abs() < 1e-9);
}

#[test]
fn three_mode_bound_exceeds_two_mode_for_bright_lossy_source() {
    let src = SourceSpec::new(0.5).unwrap();
    let enc = EncodingSpec::new(0.0, 1).unwrap();
    let ch = ChannelModel::loss(0.2).unwrap();
    let two = chi_e(&src, &enc, 0.9, 0.4, &ch).unwrap();
    let three = chi_e_prime(&src, &enc, 0.9, 0.4, &ch).unwrap();
    let gap = three.chi - two;
    assert!(gap > 1e-4 && gap < 1e-3, "{gap}");
    assert!(three.argmax.b1 > 0.1);
    // the two-mode minimum here is not the beam splitter either
    let bs = entropy_gain(&optimal_attack_point(&src, 0.9, 0.4, &ch).unwrap().lambda_sw, &ch).unwrap().e;
    assert!(bs - min_entropy_gain(&src, 0.9, 0.4, &ch).unwrap().e_star > 1e-4);
}
