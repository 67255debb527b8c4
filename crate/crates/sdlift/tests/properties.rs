mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sdlift::behaviors::{guessing_certificate, verify_decomposition, Behavior, PdDecomposition};
use sdlift::games::chsh_xor_game;
use sdlift::lp::{self, LpProblem, LpResult, PivotRule, Relation, Sense, SolveOptions};
use sdlift::polytopes::*;
use sdlift::quantum::uniform_on_winning;
use sdlift::scalar::{rat, OrderedField, Rational, Surd};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn blcs_properties(seed in any::<u64>()) {
        let s = common::random_blcs(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(common::check_blcs_properties(&s), Ok(()));
    }

    #[test]
    fn lemma1_systems_are_unrealizable(seed in any::<u64>()) {
        let s = common::random_lemma1_system(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(common::check_lemma1_system(&s), Ok(()));
    }

    #[test]
    fn arkhipov_criterion(seed in any::<u64>()) {
        let s = common::random_arrangement(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(s.is_arrangement());
        prop_assert_eq!(common::check_arrangement(&s), Ok(()));
    }
}

fn small_lp() -> impl Strategy<Value = LpProblem<Rational>> {
    let coeff = -4i64..=4;
    let row = (proptest::collection::vec(coeff.clone(), 3), 0usize..3, -6i64..=6);
    (proptest::collection::vec(row, 1..=5), proptest::collection::vec(coeff, 3), 0usize..3).prop_map(
        |(rows, obj, sense)| {
            let sense = [Sense::Maximize, Sense::Minimize, Sense::Feasibility][sense];
            let mut p = LpProblem::new(sense);
            let vars: Vec<usize> = (0..3).map(|i| p.add_var(format!("x{i}"))).collect();
            for (a, rel, b) in rows {
                let rel = [Relation::Le, Relation::Eq, Relation::Ge][rel];
                let coeffs = vars.iter().zip(&a).filter(|(_, &c)| c != 0).map(|(&v, &c)| (v, rat(c, 1))).collect();
                p.add_constraint(coeffs, rel, rat(b, 1));
            }
            // Keep the feasible region bounded often enough to exercise optima.
            p.add_constraint(vars.iter().map(|&v| (v, rat(1, 1))).collect(), Relation::Le, rat(10, 1));
            if sense != Sense::Feasibility {
                p.objective = vars.iter().zip(&obj).map(|(&v, &c)| (v, rat(c, 1))).collect();
            }
            p
        },
    )
}

fn to_f64(p: &LpProblem<Rational>) -> LpProblem<f64> {
    let f = |r: &Rational| r.to_f64();
    let mut q = LpProblem::new(p.sense);
    for i in 0..p.num_vars() {
        q.add_var(format!("x{i}"));
    }
    for c in &p.constraints {
        q.add_constraint(c.coeffs.iter().map(|(j, v)| (*j, f(v))).collect(), c.relation, f(&c.rhs));
    }
    q.objective = p.objective.iter().map(|(j, v)| (*j, f(v))).collect();
    q
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// Both pivot rules return verified certificates with the same status
    /// and optimum; float arithmetic agrees within tolerance.
    #[test]
    fn pivot_rules_and_arithmetics_agree(p in small_lp()) {
        let exact = lp::lp_solve(&p).unwrap();
        let bland = lp::lp_solve_with(&p, &SolveOptions { rule: PivotRule::Bland, ..Default::default() }).unwrap();
        prop_assert_eq!(exact.status(), bland.status());
        prop_assert_eq!(exact.value(), bland.value());
        let q = to_f64(&p);
        let float = lp::lp_solve_with(&q, &SolveOptions { tol: 1e-9, ..Default::default() }).unwrap();
        prop_assert_eq!(exact.status(), float.status());
        if let (Some(a), Some(b)) = (exact.value(), float.value()) {
            prop_assert!((a.to_f64() - b).abs() < 1e-9);
        }
    }
}

fn local_vertices() -> Vec<Behavior> {
    let sc = chsh_xor_game().scenario;
    deterministic_strategies(&sc, VERTEX_CAP).unwrap().iter().map(|s| deterministic_behavior(&sc, s)).collect()
}

fn weights(raw: &[u8]) -> Vec<Surd> {
    let total: i64 = raw.iter().map(|&w| w as i64 + 1).sum();
    raw.iter().map(|&w| Surd::from_ratio(w as i64 + 1, total)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// A mixture of the PR box with local vertices: the no-signaling
    /// adversary does at least as well as the declared mixture, and
    /// membership answers come with checkable witnesses.
    #[test]
    fn guessing_dominates_certificates(raw in proptest::collection::vec(0u8..8, 17), x in 0usize..4) {
        let x_star = [x / 2, x % 2];
        let mut parts = local_vertices();
        parts.push(uniform_on_winning(&chsh_xor_game()));
        let w = weights(&raw);
        let b = Behavior::mixture(&w, &parts).unwrap();
        let sc = b.scenario().clone();
        let d = PdDecomposition {
            target: x_star.to_vec(),
            weights: w,
            outcomes: parts.iter().map(|p| p.deterministic_outcome(&x_star).unwrap_or(vec![0, 0])).collect(),
            parts,
        };
        let cert = guessing_certificate(&b, &x_star, &d).unwrap();
        let ns = ns_guessing_lp(&b, &x_star, None).unwrap();
        prop_assert!(ns.value >= cert);
        prop_assert!(lp::verify(&ns.problem, &ns.result, &Surd::default()).is_ok());

        match pd_membership(&b, &x_star).unwrap() {
            PdMembership::Member(d) => prop_assert!(verify_decomposition(&b, &d).unwrap().ok()),
            PdMembership::NonMember(f) => {
                prop_assert!(f.value_at_behavior.is_positive());
                prop_assert!(!f.support_restricted);
                for s in deterministic_strategies(&sc, VERTEX_CAP).unwrap() {
                    prop_assert!(!f.evaluate(&deterministic_behavior(&sc, &s)).is_positive());
                }
            }
        }
        let lf = local_fraction_lp(&b).unwrap();
        prop_assert!(lf.value >= &Surd::from_ratio(1, 1) - &d.weights[16]);
    }
}

#[test]
fn infeasible_results_carry_farkas_rays() {
    let mut p = LpProblem::new(Sense::Feasibility);
    let x = p.add_var("x");
    p.add_constraint(vec![(x, rat(1, 1))], Relation::Ge, rat(2, 1));
    p.add_constraint(vec![(x, rat(1, 1))], Relation::Le, rat(1, 1));
    assert!(matches!(lp::lp_solve(&p).unwrap(), LpResult::Infeasible { .. }));
}
