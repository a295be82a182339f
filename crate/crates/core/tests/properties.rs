mod props;

macro_rules! property_tests {
    ($($name:ident),* $(,)?) => {
        $(
            #[test]
            fn $name() {
                if let Err(e) = props::$name() {
                    panic!("{e}");
                }
            }
        )*
    };
}

property_tests!(
    distance_symmetry,
    distance_phase_invariance,
    trace_distance_range,
    eigenphase_round_trip,
    pair_at_distance_checks,
    schur_weyl_completeness,
    character_bound,
    staircase_matches_bialternant,
    symmetric_dimension_sandwich,
    staircase_continuity,
    sine_ratio_bound,
    membership_perfect_completeness,
    exact_tail_dominance,
    plan_monotone_in_set_size,
    sample_distribution,
    sample_distribution_large,
    variance_identity,
    variance_identity_fixed,
    analyze_phase_invariance,
    analyze_conjugation_invariance,
    soundness_dominance,
    staircase_ratio_cap,
    unitary_oracle_equivalence,
    qubit_ratio_is_bialternant,
    type_projector_completeness,
    isotypic_orthogonality,
    isotypic_commutation,
    closed_forms_match_oracle,
    report_reproducibility,
    parallel_serial_equivalence,
    report_recomputable,
);

// The exact planner's smallest n is not monotone in ε: the threshold
// 1 − ε²/2 crosses lattice points k/n as ε moves. Run with --ignored.
#[test]
#[ignore = "known counterexamples, see plan_membership"]
fn plan_monotone_in_epsilon() {
    if let Err(e) = props::plan_monotone_in_epsilon() {
        panic!("{e}");
    }
}
