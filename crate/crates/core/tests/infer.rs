use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use sectkit::ecc::DirectionGrid;
use sectkit::infer::chi2::{chi2_quantile, chi2_sf};
use sectkit::infer::{
    chi2_test, chi2_two_sample, covariance_diagnostics, covariance_group, covariance_pooled,
    distinguishing_direction, kl_decompose, mean_field, nhst_k_star, permutation_k_star,
    permutation_test, randomization_nhst, randomization_nhst_from_distances, select_l,
    within_group_loss, xi_statistics, Decision, EctGroup, Relabeling, SectGroup, TestSettings,
};
use sectkit::rng::stream;
use sectkit::sect::{Field, LevelGrid};
use sectkit::Error;
use statrs::distribution::{ChiSquared, ContinuousCDF};

const T: f64 = 3.0;

fn group<R: Rng>(rng: &mut R, n: usize, gamma: usize, delta: usize, shift: f64) -> SectGroup {
    let grid = DirectionGrid::uniform_circle(gamma).unwrap();
    let levels = LevelGrid::new(T, delta).unwrap();
    let fields = (0..n)
        .map(|_| {
            let mut walk = 0.0;
            let values = (0..gamma * delta)
                .map(|k| {
                    if k % delta == 0 {
                        walk = 0.0;
                    }
                    walk += rng.sample::<f64, _>(StandardNormal);
                    walk + shift
                })
                .collect();
            Field::new(grid.clone(), levels, values).unwrap()
        })
        .collect();
    SectGroup::new(fields).unwrap()
}

fn ect_group(rows: &[Vec<i64>]) -> EctGroup {
    let grid = DirectionGrid::uniform_circle(1).unwrap();
    let levels = LevelGrid::new(T, rows[0].len()).unwrap();
    EctGroup::new(
        rows.iter()
            .map(|r| Field::new(grid.clone(), levels, r.clone()).unwrap())
            .collect(),
    )
    .unwrap()
}

#[test]
fn chi2_quantiles_match_statrs() {
    for k in [1usize, 2, 3, 5, 10, 30, 100] {
        let dist = ChiSquared::new(k as f64).unwrap();
        for p in [0.01, 0.05, 0.5, 0.9, 0.95, 0.99, 0.999] {
            // statrs' own inverse is a coarse bisection in the far tails, so
            // compare through its CDF instead.
            let q = chi2_quantile(p, k);
            assert!((dist.cdf(q) - p).abs() < 1e-10, "k={k} p={p}: cdf({q}) = {}", dist.cdf(q));
            assert!((chi2_sf(q, k) - dist.sf(q)).abs() < 1e-10);
        }
    }
}

#[test]
fn chi2_test_by_hand() {
    let xi = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 2.0]);
    let r = chi2_test(&xi, 0.05).unwrap();
    assert!((r.statistic - 4.0).abs() < 1e-12);
    assert!((r.p_value - (-2.0f64).exp()).abs() < 1e-12);
    assert!((r.threshold - 5.991464547107979).abs() < 1e-9);
    assert_eq!(r.decision, Decision::Accept);
    assert_eq!(r.l_hat, Some(2));
}

#[test]
fn select_l_examples() {
    assert_eq!(select_l(&[0.9, 0.05, 0.03, 0.02], 0.95).unwrap(), 3);
    assert_eq!(select_l(&[1.0], 0.95).unwrap(), 1);
    assert_eq!(select_l(&[0.9, -0.06, 0.04], 0.95).unwrap(), 2);
    assert!(matches!(select_l(&[0.0, 0.0], 0.95), Err(Error::NumericalRank(_))));
    assert!(select_l(&[], 0.95).is_err());
}

#[test]
fn kl_of_identity_and_rank_one() {
    let kl = kl_decompose(&DMatrix::identity(10, 10), T).unwrap();
    assert!(kl.eigenvalues().iter().all(|l| (l - T / 10.0).abs() < 1e-12));

    let v = DMatrix::from_fn(10, 1, |i, _| (i as f64 + 1.0).sin());
    let kl = kl_decompose(&(&v * v.transpose()), T).unwrap();
    let lam = kl.eigenvalues();
    assert!((lam[0] - T / 10.0 * v.norm_squared()).abs() < 1e-10);
    assert!(lam[1..].iter().all(|l| l.abs() < 1e-12));
    assert_eq!(select_l(lam, 0.95).unwrap(), 1);

    let phi = kl.eigenfunctions().column(0);
    let cos = (phi.dot(&v.column(0)) / (phi.norm() * v.norm())).abs();
    assert!((cos - 1.0).abs() < 1e-12);

    let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
    assert!(kl_decompose(&asym, T).is_err());
}

#[test]
fn pooled_covariance_by_hand() {
    let mut rng = stream(1, &[0]);
    let (g1, g2) = (group(&mut rng, 5, 2, 4, 0.0), group(&mut rng, 7, 2, 4, 1.0));
    let c = covariance_pooled(&g1, &g2, 1).unwrap();
    let mut want = DMatrix::<f64>::zeros(4, 4);
    for g in [&g1, &g2] {
        let rows: Vec<&[f64]> = g.fields().iter().map(|f| f.row(1)).collect();
        let mean: Vec<f64> = (0..4).map(|q| rows.iter().map(|r| r[q]).sum::<f64>() / rows.len() as f64).collect();
        for r in &rows {
            for i in 0..4 {
                for j in 0..4 {
                    want[(i, j)] += (r[i] - mean[i]) * (r[j] - mean[j]);
                }
            }
        }
    }
    want /= 10.0;
    assert!((c - want).norm() < 1e-12);

    let c1 = covariance_group(&g1, 0).unwrap();
    assert_eq!(c1.shape(), (4, 4));
    assert!(covariance_group(&g1, 2).is_err());
}

#[test]
fn full_rank_statistic_is_a_quadratic_form() {
    // With every KL component kept, S₀ = (2n)⁻¹ dᵀ C⁻¹ d for d = Σ_i (x_i − y_i).
    let mut rng = stream(2, &[0]);
    let (g1, g2) = (group(&mut rng, 30, 1, 6, 0.0), group(&mut rng, 30, 1, 6, 0.2));
    let c = covariance_pooled(&g1, &g2, 0).unwrap();
    let kl = kl_decompose(&c, T).unwrap();
    let xi = xi_statistics(&g1, &g2, 0, &kl, 6).unwrap();
    let n = xi.ncols() as f64;
    let s0: f64 = xi.row_iter().map(|r| r.sum().powi(2) / n).sum();

    let mut d = DMatrix::<f64>::zeros(6, 1);
    for (a, b) in g1.fields().iter().zip(g2.fields()) {
        for q in 0..6 {
            d[q] += a.row(0)[q] - b.row(0)[q];
        }
    }
    let quad = (d.transpose() * c.try_inverse().unwrap() * &d)[0] / (2.0 * n);
    assert!((s0 - quad).abs() < 1e-9 * quad.max(1.0), "{s0} vs {quad}");
}

#[test]
fn distinguishing_direction_and_ties() {
    let grid = DirectionGrid::uniform_circle(3).unwrap();
    let levels = LevelGrid::new(T, 2).unwrap();
    let f = |v: Vec<f64>| Field::new(grid.clone(), levels, v).unwrap();
    let a = f(vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let b = f(vec![0.1, 0.0, 0.0, -0.5, 0.2, 0.0]);
    assert_eq!(distinguishing_direction(&a, &b).unwrap(), 1);
    let c = f(vec![0.5, 0.0, 0.0, -0.5, 0.0, 0.5]);
    assert_eq!(distinguishing_direction(&a, &c).unwrap(), 0);
}

#[test]
fn identical_groups() {
    let mut rng = stream(3, &[0]);
    let g = group(&mut rng, 10, 2, 5, 0.0);
    let r = chi2_two_sample(&g, &g, &TestSettings::default()).unwrap();
    assert_eq!(r.statistic, 0.0);
    assert_eq!(r.decision, Decision::Accept);
    assert_eq!(r.r_f, Some(0.0));
    let (p, rf, ri) = covariance_diagnostics(&g, &g).unwrap();
    assert_eq!((p, rf, ri), (0, Some(0.0), Some(0.0)));
    let m = mean_field(&g).unwrap();
    assert_eq!(m.values().len(), 10);
}

#[test]
fn k_star_values() {
    assert_eq!(permutation_k_star(0.05, 500).unwrap(), 474);
    assert_eq!(permutation_k_star(0.05, 1000).unwrap(), 949);
    assert_eq!(permutation_k_star(0.05, 99).unwrap(), 94);
    assert_eq!(permutation_k_star(0.1, 7).unwrap(), 6);
    assert!(permutation_k_star(0.5, 2).is_err());
    assert_eq!(nhst_k_star(0.05, 500), 24);
    assert_eq!(nhst_k_star(0.05, 1000), 49);
    assert_eq!(nhst_k_star(0.05, 30), 1);
    assert_eq!(nhst_k_star(0.05, 20), 1);
}

#[test]
fn permutation_test_is_seeded() {
    let mut rng = stream(4, &[0]);
    let (g1, g2) = (group(&mut rng, 12, 2, 5, 0.0), group(&mut rng, 12, 2, 5, 0.0));
    let s = |seed| TestSettings {
        permutations: 99,
        seed,
        ..TestSettings::default()
    };
    let a = permutation_test(&g1, &g2, &s(7)).unwrap();
    let b = permutation_test(&g1, &g2, &s(7)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.k_star, Some(94));
    let k = (a.p_value * 100.0).round();
    assert!((a.p_value * 100.0 - k).abs() < 1e-9 && (1.0..=100.0).contains(&k));
    let c = permutation_test(&g1, &g2, &s(8)).unwrap();
    assert_eq!(a.statistic, c.statistic);
    assert_ne!(a.threshold, c.threshold);

    let swap = TestSettings {
        relabeling: Relabeling::PairSwap,
        ..s(7)
    };
    let d = permutation_test(&g1, &g2, &swap).unwrap();
    assert!(d.p_value > 0.0 && d.p_value <= 1.0);
}

#[test]
fn shifted_groups_are_rejected() {
    let mut rng = stream(5, &[0]);
    let (g1, g2) = (group(&mut rng, 40, 2, 8, 0.0), group(&mut rng, 40, 2, 8, 3.0));
    let settings = TestSettings {
        permutations: 99,
        ..TestSettings::default()
    };
    assert_eq!(chi2_two_sample(&g1, &g2, &settings).unwrap().decision, Decision::Reject);
    let p = permutation_test(&g1, &g2, &settings).unwrap();
    assert_eq!(p.decision, Decision::Reject);
    assert!((p.p_value - 0.01).abs() < 1e-12);
}

#[test]
fn within_group_loss_by_hand() {
    // Points 0, 1 on one side and 10, 11 on the other, distances |x − y|.
    let x: [f64; 4] = [0.0, 1.0, 10.0, 11.0];
    let dist = DMatrix::from_fn(4, 4, |i, j| (x[i] - x[j]).abs());
    // Ordered-pair sums over 2m(m − 1).
    assert!((within_group_loss(&dist, &[0, 1], &[2, 3]) - 1.0).abs() < 1e-12);
    assert!((within_group_loss(&dist, &[0, 2], &[1, 3]) - 10.0).abs() < 1e-12);
    let loss = within_group_loss(&dist, &[0, 1, 2], &[1, 3]);
    assert!((loss - (40.0 / 12.0 + 5.0)).abs() < 1e-12);
}

#[test]
fn nhst_separates_clusters() {
    let near: Vec<Vec<i64>> = (0..6).map(|i| vec![i % 2, 0, 1]).collect();
    let far: Vec<Vec<i64>> = (0..6).map(|i| vec![5 + i % 2, 4, 7]).collect();
    let settings = TestSettings {
        permutations: 199,
        seed: 11,
        ..TestSettings::default()
    };
    let r = randomization_nhst(&ect_group(&near), &ect_group(&far), &settings).unwrap();
    assert_eq!(r.decision, Decision::Reject);
    assert_eq!(r.k_star, Some(9));
    assert!(r.p_value < 0.05);

    let mixed: Vec<Vec<i64>> = (0..6).map(|i| vec![i % 2, 0, 1]).collect();
    let r = randomization_nhst(&ect_group(&near), &ect_group(&mixed), &settings).unwrap();
    assert_eq!(r.decision, Decision::Accept);

    let dist = DMatrix::<f64>::zeros(3, 3);
    assert!(randomization_nhst_from_distances(&dist, 2, &settings).is_err());
}

#[test]
fn grid_mismatch_is_reported() {
    let mut rng = stream(6, &[0]);
    let (g1, g2) = (group(&mut rng, 5, 2, 4, 0.0), group(&mut rng, 5, 3, 4, 0.0));
    assert!(matches!(
        chi2_two_sample(&g1, &g2, &TestSettings::default()),
        Err(Error::GridMismatch(_))
    ));
    let bad = TestSettings {
        alpha: 1.5,
        ..TestSettings::default()
    };
    assert!(matches!(chi2_two_sample(&g1, &g1, &bad), Err(Error::InvalidArgument(_))));
}
