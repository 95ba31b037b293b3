use sentinel_oracles::checks;

fn assert_passed(outcome: checks::Outcome) {
    println!("{} ({:.2?})", outcome.detail, outcome.elapsed);
    assert!(outcome.passed, "{}", outcome.detail);
}

#[test]
fn mnb_matches_exact_rational_evaluation() {
    assert_passed(checks::mnb_oracle_equivalence(&[(1, 1), (1, 4)]));
}

#[test]
fn tfidf_matches_direct_formula() {
    assert_passed(checks::tfidf_formula_check(100, 17));
}

#[test]
fn hinge_sgd_converges_on_separable_points() {
    for seed in [1, 2, 3, 42] {
        assert_passed(checks::svm_convergence(seed));
    }
}

#[test]
fn evaluation_identities_hold() {
    assert_passed(checks::evaluation_identities(1000, 5));
}

#[test]
fn model_files_round_trip() {
    assert_passed(checks::model_round_trip(1500, 3));
}
