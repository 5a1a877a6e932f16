//! Theorem-level behaviour on the standard three-interval and two-arc systems.

use nikishin::detkit::{phase_check_uc, sign_check_rl, SignVerdict};
use nikishin::index::MultiIndex;
use nikishin::measure::{principal_branch, CircleArc, CircleMeasure, Interval, RealMeasure, WeightSpec};
use nikishin::mop::{
    laurent_poly_uc, normality_rl, perturbation_det_check, scan, ScanMode, Verdict, LABEL_AT_CIRCLE, LABEL_MIXED,
    RESIDUAL_TOL,
};
use nikishin::system::{flip_r2_uc, BuildOptions, CircleSystem, NikishinSystem, RealSystem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn real_system(bounds: &[(f64, f64)]) -> NikishinSystem {
    let sigmas = bounds
        .iter()
        .map(|&(a, b)| RealMeasure::new(Interval::new(a, b).unwrap(), WeightSpec::uniform(), 200).unwrap())
        .collect();
    NikishinSystem::Real(RealSystem::build(sigmas, BuildOptions::default()).unwrap())
}

fn two_arcs() -> NikishinSystem {
    let sigmas = [(0.3, 1.3), (2.0, 3.0)]
        .iter()
        .map(|&(a, b)| {
            CircleMeasure::new(CircleArc::new(a, b).unwrap(), WeightSpec::uniform(), 200, principal_branch()).unwrap()
        })
        .collect();
    NikishinSystem::Circle(CircleSystem::build(sigmas, None).unwrap())
}

#[test]
fn sign_is_constant_on_every_condition_index_up_to_nine() {
    let sys = real_system(&[(0.0, 1.0), (2.0, 3.0), (4.0, 5.0)]);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut checked = 0;
    for n in MultiIndex::all_up_to(3, 9).into_iter().filter(|n| n.satisfies_nikishin_condition()) {
        let trials = if n.total() <= 6 { 40 } else { 8 };
        let report = sign_check_rl(&sys, &n, trials, &mut rng).unwrap();
        assert!(report.theorem_applies);
        assert_eq!(report.verdict, SignVerdict::ConstantSign, "{n}: {report:?}");
        checked += 1;
    }
    assert_eq!(checked, MultiIndex::all_up_to(3, 9).iter().filter(|n| n.satisfies_nikishin_condition()).count());
    assert!(checked > 50);
}

#[test]
fn sign_constancy_implies_normality_where_doubles_resolve_it() {
    let sys = real_system(&[(0.0, 1.0), (2.0, 3.0), (4.0, 5.0)]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in MultiIndex::all_up_to(3, 4).into_iter().filter(|n| n.satisfies_nikishin_condition()) {
        let report = sign_check_rl(&sys, &n, 20, &mut rng).unwrap();
        if report.verdict == SignVerdict::ConstantSign {
            let v = normality_rl(&sys, &n).unwrap();
            assert_eq!(v.verdict, Verdict::Normal, "{n}: {v:?}");
            assert!(v.residual.unwrap() <= RESIDUAL_TOL);
        }
    }
}

#[test]
fn two_interval_grid_is_normal_at_moderate_size() {
    let sys = real_system(&[(0.0, 1.0), (2.0, 3.0)]);
    for row in scan(&sys, &MultiIndex::all_up_to(2, 6), ScanMode::FullGrid) {
        let v = row.outcome.unwrap();
        assert_eq!(v.verdict, Verdict::Normal, "{}", row.index);
        assert!(v.residual.unwrap() <= RESIDUAL_TOL);
    }
}

#[test]
fn circle_theorem_scan_is_normal() {
    let sys = two_arcs();
    let rows = scan(&sys, &MultiIndex::all_up_to(2, 8), ScanMode::Theorem);
    // odd pairs with n₁ ≥ n₂: six; even pairs: eight
    let covered = rows.iter().filter(|r| r.labels.contains(&LABEL_AT_CIRCLE)).count();
    assert_eq!(covered, 14);
    for row in rows {
        let v = row.outcome.unwrap();
        assert_eq!(v.verdict, Verdict::Normal, "{}", row.index);
        assert!(v.residual.unwrap() <= RESIDUAL_TOL);
    }
}

#[test]
fn laurent_conditions_hold_on_both_halves_of_the_range() {
    let sys = two_arcs();
    for n in MultiIndex::all_up_to(2, 6).into_iter().filter(|n| n.same_parity()) {
        let phi = laurent_poly_uc(&sys, &n).unwrap();
        assert!(phi.residual <= RESIDUAL_TOL, "{n}");
        assert_eq!(phi.coeffs.len(), n.total() + 1);
        assert_eq!(phi.coeffs[n.total()], num_complex::Complex64::new(1.0, 0.0));
    }
}

#[test]
fn flipped_system_mirrors_verdicts() {
    let sys = two_arcs();
    let flipped = NikishinSystem::Circle(flip_r2_uc(sys.as_circle().unwrap()).unwrap());
    let indices: Vec<MultiIndex> = MultiIndex::all_up_to(2, 8)
        .into_iter()
        .filter(|n| n.same_parity() && n.parts()[0] <= n.parts()[1])
        .collect();
    let mirrored: Vec<MultiIndex> = indices.iter().map(|n| n.reversed()).collect();
    let direct = scan(&sys, &indices, ScanMode::FullGrid);
    let other = scan(&flipped, &mirrored, ScanMode::FullGrid);
    for row in &direct {
        let twin = other.iter().find(|r| r.index == row.index.reversed()).unwrap();
        assert_eq!(row.verdict(), twin.verdict(), "{}", row.index);
    }
}

#[test]
fn mixed_parity_exploration_reports_everything() {
    let sys = two_arcs();
    let all = MultiIndex::all_up_to(2, 8);
    let rows = scan(&sys, &all, ScanMode::ExploreMixedParity);
    assert_eq!(rows.len(), all.len());
    assert!(rows.iter().all(|r| r.outcome.is_ok()));
    assert!(rows.iter().filter(|r| !r.index.same_parity()).all(|r| r.labels == [LABEL_MIXED]));
}

#[test]
fn odd_pair_phase_is_a_power_of_i() {
    let sys = two_arcs();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let report = phase_check_uc(&sys, &"3|1".parse().unwrap(), 100, &mut rng).unwrap();
    assert!(report.confirmed(), "{report:?}");
    assert!(report.l_mod4.is_some());
}

#[test]
fn perturbation_lemma_on_random_instances() {
    let sys = real_system(&[(0.0, 1.0), (2.0, 3.0)]);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..50 {
        let s = rng.random_range(0..=2usize);
        let n2 = rng.random_range(s.max(1)..=8 - s.min(1));
        let n1 = rng.random_range(0..=(n2 - s).min(8 - n2));
        let k: Vec<f64> = (0..=s).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = MultiIndex::new(vec![n1, n2]).unwrap();
        let c = perturbation_det_check(&sys, &n, &k).unwrap();
        assert!(c.relative_difference <= 1e-10, "{n} {k:?} {c:?}");
    }
}
