mod common;

use gramcone::cone::ConvexCone;
use gramcone::instances::{make, sweep_spec, InstanceKind, InstanceSpec};
use gramcone::numlin::{dot, DenseMatrix, TolerancePolicy};
use gramcone::theorem::{
    check_hypothesis, cond1_pinv_nonneg, cond2_dualcone_inclusion, cond3_d_acute, cond4_cstar_acute,
    cond5_projected_monotone, cond6_monotone, equivalence_report, lemma_checks, GramAnalysis, GramInstance,
    ReportOptions, Verdict, Witness,
};
use gramcone::{Instance, Instance32, Matrix};
use proptest::prelude::*;

fn inst(rows: &[[f64; 2]], cone: ConvexCone<f64>) -> Instance {
    GramInstance::new(Matrix::from_rows(rows).unwrap(), cone, None, TolerancePolicy::default()).unwrap()
}

fn counterexample() -> Instance {
    make(&InstanceSpec::level(InstanceKind::Counterexample2x2, 2).unwrap()).unwrap()
}

fn all_options() -> ReportOptions {
    ReportOptions {
        strict_cond5: true,
        lemmas: true,
    }
}

#[test]
fn equivalence_over_1000_seeds() {
    let (mut all_true, mut all_false) = (0, 0);
    for seed in 0..1000 {
        let spec = sweep_spec(seed, 6, 6).unwrap();
        let i: Instance = make(&spec).unwrap();
        let rep = equivalence_report(&i, ReportOptions::default()).unwrap();
        assert!(rep.hypothesis.holds);
        assert!(rep.cond3_routes_agree, "seed {seed}");
        if !rep.marginal && !rep.incomplete {
            assert!(rep.agree, "seed {seed} {spec:?}: {:?}", rep.verdicts());
        }
        match rep.unanimous() {
            Some(true) => all_true += 1,
            Some(false) => all_false += 1,
            None => {}
        }
    }
    assert!(all_true >= 100, "{all_true} all-true instances");
    assert!(all_false >= 100, "{all_false} all-false instances");
}

#[test]
fn equivalence_in_single_precision() {
    for seed in 0..300 {
        let i: Instance32 = make(&sweep_spec(seed, 6, 6).unwrap()).unwrap();
        let rep = equivalence_report(&i, ReportOptions::default()).unwrap();
        if !rep.marginal && !rep.incomplete {
            assert!(rep.agree, "seed {seed}: {:?}", rep.verdicts());
        }
    }
}

#[test]
fn truncations_are_all_true() {
    for kind in [InstanceKind::Paper41, InstanceKind::Paper42, InstanceKind::Paper43] {
        for level in [2, 3, 4, 10, 25] {
            let i: Instance = make(&InstanceSpec::level(kind, level).unwrap()).unwrap();
            let rep = equivalence_report(&i, all_options()).unwrap();
            assert_eq!(rep.unanimous(), Some(true), "{kind:?} N={level}: {:?}", rep.verdicts());
            let l = rep.lemmas.unwrap();
            assert_eq!(l.image_in_dual, Verdict::Holds);
            assert_eq!(l.gram_positivity, Verdict::Holds);
        }
    }
}

#[test]
fn counterexample_is_all_false_with_valid_witnesses() {
    let i = counterexample();
    let an = GramAnalysis::new(&i).unwrap();
    let expected = Matrix::from_rows(&[[2.0, -1.0], [-1.0, 1.0]]).unwrap();
    assert!(common::max_abs_diff(&an.gram_dagger, &expected) < 1e-14);

    let rep = equivalence_report(&i, all_options()).unwrap();
    assert_eq!(rep.unanimous(), Some(false));
    assert!(rep.conditions.iter().all(|c| c.witness.is_some()));

    let Some(Witness::NotInCone { point, separator, .. }) = &rep.conditions[5].witness else {
        panic!("cond6 witness missing");
    };
    // K* is the orthant.
    let gx = an.gram.matvec(point);
    assert!(gx.iter().all(|&v| v >= -1e-10), "T*Tx = {gx:?} not in K*");
    let s = separator.as_ref().unwrap();
    assert!(dot(s, point) < 0.0);
    assert!(s.iter().all(|&v| v >= -1e-10));

    let l = rep.lemmas.unwrap();
    assert_eq!(l.image_in_dual, Verdict::Holds);
}

#[test]
fn hypothesis_examples() {
    let id = inst(
        &[[2.0, 1.0], [0.5, 3.0]],
        ConvexCone::generated(Matrix::from_rows(&[[1.0], [1.0]]).unwrap()).unwrap(),
    );
    let an = GramAnalysis::new(&id).unwrap();
    let h = check_hypothesis(&an).unwrap();
    assert!(h.holds && h.one_to_one);

    let d = inst(&[[1.0, 0.0], [0.0, 0.0]], ConvexCone::orthant(2));
    assert!(check_hypothesis(&GramAnalysis::new(&d).unwrap()).unwrap().holds);

    let diag = inst(
        &[[1.0, 0.0], [0.0, 0.0]],
        ConvexCone::generated(Matrix::from_rows(&[[1.0], [1.0]]).unwrap()).unwrap(),
    );
    let h = check_hypothesis(&GramAnalysis::new(&diag).unwrap()).unwrap();
    assert!(!h.holds);
    assert!(equivalence_report(&diag, ReportOptions::default()).is_err());
}

#[test]
fn individual_condition_examples() {
    let identity = inst(&[[1.0, 0.0], [0.0, 1.0]], ConvexCone::orthant(2));
    let diag12 = inst(&[[1.0, 0.0], [0.0, 2.0]], ConvexCone::orthant(2));
    let ce = counterexample();
    for (i, want) in [(&identity, Verdict::Holds), (&ce, Verdict::Fails)] {
        let an = GramAnalysis::new(i).unwrap();
        assert_eq!(cond1_pinv_nonneg(&an).unwrap().verdict, want);
        assert_eq!(cond2_dualcone_inclusion(&an).unwrap().verdict, want);
        assert_eq!(cond3_d_acute(&an).unwrap().0.verdict, want);
        assert_eq!(cond4_cstar_acute(&an).unwrap().verdict, want);
        assert_eq!(cond5_projected_monotone(&an).unwrap().verdict, want);
        assert_eq!(cond6_monotone(&an).unwrap().verdict, want);
        let c4 = cond4_cstar_acute(&an).unwrap();
        assert_eq!(lemma_checks(&an, &c4).unwrap().image_in_dual, Verdict::Holds);
    }
    let an = GramAnalysis::new(&diag12).unwrap();
    assert_eq!(cond4_cstar_acute(&an).unwrap().verdict, Verdict::Holds);
}

#[test]
fn example42_with_orthant_on_trailing_coordinates() {
    let i: Instance = make(&InstanceSpec::level(InstanceKind::Paper42, 4).unwrap()).unwrap();
    let an = GramAnalysis::new(&i).unwrap();
    assert_eq!(cond2_dualcone_inclusion(&an).unwrap().verdict, Verdict::Holds);
    // The kernel direction e₁ is not in K, so the strict variant fails.
    let rep = equivalence_report(&i, all_options()).unwrap();
    assert_eq!(rep.strict_cond5.unwrap().verdict, Verdict::Fails);
}

#[test]
fn random_simplicial_full_rank_passes_lemmas() {
    let mut seen = 0;
    for seed in 0..60 {
        let spec = InstanceSpec::dims(InstanceKind::RandomSimplicialCone, seed, 4, 4, 4).unwrap();
        let i: Instance = make(&spec).unwrap();
        let rep = equivalence_report(&i, all_options()).unwrap();
        let l = rep.lemmas.unwrap();
        assert_eq!(l.image_in_dual, Verdict::Holds, "seed {seed}");
        if let Some(m) = l.gram_positivity_matches_cond4 {
            assert!(m, "seed {seed}");
            seen += 1;
        }
    }
    assert!(seen > 50);
}

#[test]
fn instances_are_bit_identical_across_calls() {
    for seed in 0..50 {
        let spec = sweep_spec(seed, 6, 6).unwrap();
        let a: Instance = make(&spec).unwrap();
        let b: Instance = make(&spec).unwrap();
        assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn verdicts_are_scale_invariant(seed in 0u64..100_000, log_alpha in -3.0f64..3.0) {
        let i: Instance = make(&sweep_spec(seed, 5, 5).unwrap()).unwrap();
        let a = equivalence_report(&i, ReportOptions::default()).unwrap();
        let b = equivalence_report(&i.scaled(10f64.powf(log_alpha)).unwrap(), ReportOptions::default()).unwrap();
        prop_assume!(!a.marginal && !b.marginal);
        prop_assert_eq!(a.verdicts(), b.verdicts());
    }

    #[test]
    fn cond6_witnesses_are_valid(seed in 0u64..100_000) {
        let i: Instance = make(&sweep_spec(seed, 6, 6).unwrap()).unwrap();
        let an = GramAnalysis::new(&i).unwrap();
        let c6 = cond6_monotone(&an).unwrap();
        if let Some(Witness::NotInCone { point, separator, .. }) = &c6.witness {
            let p = i.policy;
            let kstar = i.cone.dual().unwrap();
            let gx = an.gram.matvec(point);
            let unit = gramcone::numlin::normalized(&gx).unwrap();
            prop_assert!(kstar.contains(&unit, &p).unwrap().inside);
            let cert = i.cone.contains(point, &p).unwrap();
            prop_assert!(!cert.inside);
            let s = separator.as_ref().unwrap();
            prop_assert!(dot(s, point) < 0.0);
            for g in an.k_generators.columns() {
                prop_assert!(dot(s, &g) >= -p.membership_tol);
            }
        }
    }
}

#[test]
fn explicit_dual_generators_are_used() {
    let t = Matrix::from_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap();
    let i = GramInstance::new(
        t,
        ConvexCone::orthant(2),
        Some(DenseMatrix::identity(2)),
        TolerancePolicy::default(),
    )
    .unwrap();
    assert_eq!(
        equivalence_report(&i, ReportOptions::default()).unwrap().unanimous(),
        Some(false)
    );
}
