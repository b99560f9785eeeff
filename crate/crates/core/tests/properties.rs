mod common;

use clustermem_core::protocol::{
    channel_permutation, protocol_ordering, run_protocol, store_and_retrieve, ProtocolConfig, Stage,
};
use clustermem_core::{
    build_linear4_cluster, commutator_coefficient, nullifiers, symplectic_form, CouplingStrength,
    GaussianState, GraphSpec, ModeExpansion, ModeKind, QuadratureCombination, QuadratureOrdering,
    SqueezingProfile, SymplecticTransform, VACUUM_VARIANCE,
};
use common::{random_combination, random_state, random_symplectic};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ordering(n: usize) -> QuadratureOrdering {
    QuadratureOrdering::channels(ModeKind::Light, n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn random_products_stay_symplectic(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_symplectic(&mut rng, &ordering(n), 20);
        prop_assert!(s.residual() <= 1e-10);
    }

    #[test]
    fn uncertainty_is_preserved(seed in any::<u64>(), n in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let o = ordering(n);
        let state = random_state(&mut rng, &o);
        let out = state.apply(&random_symplectic(&mut rng, &o, 10)).unwrap();
        prop_assert!(out.uncertainty_margin() >= -1e-9);
    }

    #[test]
    fn commutators_are_invariant(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_symplectic(&mut rng, &ordering(n), 15);
        let u = random_combination(&mut rng, 2 * n);
        let v = random_combination(&mut rng, 2 * n);
        let su = QuadratureCombination::new(s.transpose_apply(u.coefficients()).unwrap(), "Su").unwrap();
        let sv = QuadratureCombination::new(s.transpose_apply(v.coefficients()).unwrap(), "Sv").unwrap();
        let before = commutator_coefficient(&u, &v).unwrap();
        let after = commutator_coefficient(&su, &sv).unwrap();
        prop_assert!((before - after).abs() <= 1e-10);
        prop_assert_eq!(commutator_coefficient(&v, &u).unwrap(), -before);
    }

    #[test]
    fn displacement_never_changes_variances(seed in any::<u64>(), n in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let o = ordering(n);
        let state = random_state(&mut rng, &o);
        let u = random_combination(&mut rng, o.dim());
        let d = DVector::from_fn(o.dim(), |i, _| (i as f64 - 1.5) * 37.0);
        prop_assert_eq!(state.variance(&u).unwrap(), state.displaced(&d).unwrap().variance(&u).unwrap());
    }

    #[test]
    fn oracle_matches_covariance_route(seed in any::<u64>(), n in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let o = ordering(n);
        let chain: Vec<SymplecticTransform> = (0..4).map(|_| random_symplectic(&mut rng, &o, 5)).collect();
        let mut state = GaussianState::vacuum(o.clone());
        for s in &chain {
            state = state.apply(s).unwrap();
        }
        let oracle = ModeExpansion::new(&chain, vec![VACUUM_VARIANCE; o.dim()]).unwrap();
        let u = random_combination(&mut rng, o.dim());
        let a = state.variance(&u).unwrap();
        let b = oracle.variance(&u).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0), "{} vs {}", a, b);
    }

    #[test]
    fn graph_nullifiers_commute(n in 1usize..8, mask in any::<u64>()) {
        let mut edges = Vec::new();
        let mut bit = 0;
        for a in 1..=n {
            for b in a + 1..=n {
                if mask >> (bit % 64) & 1 == 1 {
                    edges.push((a, b));
                }
                bit += 1;
            }
        }
        let g = GraphSpec::new(n, edges).unwrap();
        let set = nullifiers(&g).unwrap();
        for u in set.combinations() {
            for v in set.combinations() {
                prop_assert!(commutator_coefficient(u, v).unwrap().abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn graph_cluster_nullifier_variance(n in 1usize..7, mask in any::<u64>(), r in 0.0f64..3.0) {
        let edges: Vec<(usize, usize)> = (1..n).filter(|a| mask >> a & 1 == 1).map(|a| (a, a + 1))
            .chain((1..n.saturating_sub(1)).filter(|a| mask >> (a + 8) & 1 == 1).map(|a| (a, a + 2)))
            .collect();
        let g = GraphSpec::new(n, edges).unwrap();
        let s = clustermem_core::build_graph_cluster(&g, &SqueezingProfile::uniform(r, n).unwrap()).unwrap();
        for v in nullifiers(&g).unwrap().variances(&s).unwrap() {
            prop_assert!((v - 0.25 * (-2.0 * r).exp()).abs() <= 1e-12);
        }
    }

    #[test]
    fn protocol_closed_forms_hold(kappa in 0.0f64..5.0, r in 0.0f64..3.0) {
        let run = run_protocol(&ProtocolConfig::uniform(kappa, r).unwrap()).unwrap();
        for rep in &run.reports {
            prop_assert!(rep.max_deviation <= 1e-12);
            prop_assert!(rep.oracle_deviation() <= 1e-12);
        }
    }

    #[test]
    fn channel_relabelling_is_equivariant(seed in any::<u64>(), kappa in 0.0f64..4.0, perm_idx in 0usize..24) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let o = protocol_ordering();
        let lights = QuadratureOrdering::channels(ModeKind::Light, 4).unwrap();
        let prep = random_symplectic(&mut rng, &lights, 12).embed(lights.modes(), &o).unwrap();
        let input = GaussianState::vacuum(o.clone()).apply(&prep).unwrap();
        let perm = nth_permutation(perm_idx);
        let p = channel_permutation(&perm, &o).unwrap();
        let k = CouplingStrength::new(kappa).unwrap();
        let (_, direct) = store_and_retrieve(&input, k).unwrap();
        let (_, relabelled) = store_and_retrieve(&input.apply(&p).unwrap(), k).unwrap();
        let expected = direct.apply(&p).unwrap();
        prop_assert!((relabelled.cov() - expected.cov()).amax() <= 1e-12);
        prop_assert!((relabelled.mean() - expected.mean()).amax() <= 1e-12);
    }
}

fn nth_permutation(mut idx: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..4).collect();
    let mut out = Vec::new();
    for f in [6, 2, 1, 1] {
        out.push(pool.remove(idx / f));
        idx %= f;
    }
    out
}

#[test]
fn symplectic_form_is_antisymmetric_involution() {
    for n in 1..=12 {
        let j = symplectic_form(n);
        assert_eq!(j.transpose(), -&j);
        assert_eq!(&j * &j, -nalgebra::DMatrix::<f64>::identity(2 * n, 2 * n));
    }
}

#[test]
fn nullifier_variances_decrease_with_squeezing() {
    let set = nullifiers(&GraphSpec::linear(4).unwrap()).unwrap();
    let mut prev = vec![f64::INFINITY; 4];
    for i in 0..=40 {
        let r = i as f64 * 0.1;
        let s = build_linear4_cluster(&SqueezingProfile::uniform(r, 4).unwrap()).unwrap();
        let v = set.variances(&s).unwrap();
        for (a, b) in v.iter().zip(&prev) {
            assert!(a < b);
        }
        prev = v;
    }
}

#[test]
fn stage_snapshots_cover_all_stages() {
    let mut cfg = ProtocolConfig::uniform(1.5, 1.0).unwrap();
    cfg.track_stage_snapshots = true;
    let run = run_protocol(&cfg).unwrap();
    let stages: Vec<Stage> = run.snapshots.iter().map(|(s, _)| *s).collect();
    assert_eq!(stages, Stage::ALL);
    assert_eq!(run.snapshots[2].1, run.final_state);
}
