use sdlift::behaviors::{verify_decomposition, Behavior};
use sdlift::lp;
use sdlift::polytopes::*;
use sdlift::quantum::{sdlmsq_behavior, sdlmsq_decomposition, tsirelson_behavior};
use sdlift::scalar::{OrderedField, Surd};

fn one() -> Surd {
    Surd::from_ratio(1, 1)
}

fn assert_member_round_trips(b: &Behavior, target: &[usize]) {
    let PdMembership::Member(d) = pd_membership(b, target).unwrap() else { panic!("expected member") };
    assert!(verify_decomposition(b, &d).unwrap().ok());
    assert_eq!(d.target, target);
}

#[test]
fn sdlmsq_on_two_rows_and_one_column_is_partially_deterministic() {
    let b = sdlmsq_behavior().restrict_inputs(&[vec![0, 1], vec![0]]).unwrap();
    assert_member_round_trips(&b, &[0, 0]);
    assert_member_round_trips(&b, &[1, 0]);
}

// About 1300 columns with heavy fill; several minutes in release.
#[test]
#[ignore]
fn sdlmsq_on_two_rows_and_two_columns_is_partially_deterministic() {
    let b = sdlmsq_behavior().restrict_inputs(&[vec![0, 1], vec![0, 1]]).unwrap();
    assert_member_round_trips(&b, &[0, 0]);
}

#[test]
fn sdlmsq_guessing_against_no_signaling_is_one() {
    let b = sdlmsq_behavior();
    for (m, n) in [(1, 1), (3, 2), (4, 4)] {
        let d = sdlmsq_decomposition(m, n).unwrap();
        let g = ns_guessing_lp(&b, &[m - 1, n - 1], Some(&d)).unwrap();
        assert_eq!(g.value, one());
        assert_eq!(g.method, GuessingMethod::WitnessWithTrivialDual);
        assert!(lp::verify(&g.problem, &g.result, &Surd::default()).is_ok());
    }
    assert!(ns_guessing_lp(&b, &[0, 0], None).is_err());
}

#[test]
fn tsirelson_guessing_is_strictly_below_one() {
    let t = tsirelson_behavior().unwrap();
    let g = ns_guessing_lp(&t, &[0, 0], None).unwrap();
    assert!(g.value < one() && g.value > Surd::default());
    assert_eq!(g.method, GuessingMethod::Simplex);
    let sdlift::lp::LpResult::Optimal { dual, .. } = &g.result else { panic!() };
    assert!(dual.iter().any(|y| !y.is_zero()));
}

#[test]
fn pr_box_guessing_is_one_half() {
    // Oracle: a PR box is extremal in the no-signaling polytope, so Eve's
    // extension is trivial and she can only guess one uniform bit pair's
    // marginal: both outputs are uniform and perfectly correlated.
    let sc = binary_scenario(2);
    let table = (0..4)
        .map(|xi| {
            let x = sc.input_tuple(xi);
            (0..4)
                .map(|ai| {
                    let a = sc.outcome_tuple(&x, ai);
                    Surd::from_ratio(((a[0] ^ a[1]) == (x[0] & x[1])) as i64, 2)
                })
                .collect()
        })
        .collect();
    let pr = Behavior::new(sc, table).unwrap();
    assert_eq!(ns_guessing_lp(&pr, &[0, 0], None).unwrap().value, Surd::from_ratio(1, 2));
}

#[test]
fn local_fraction_agrees_with_support_check() {
    use sdlift::behaviors::{local_fraction_support_check, LocalFraction};
    use sdlift::games::{chsh_xor_game, mermin_ghz_game};
    use sdlift::quantum::uniform_on_winning;

    let chsh = chsh_xor_game();
    let pr = uniform_on_winning(&chsh);
    assert_eq!(local_fraction_support_check(&chsh, &pr).unwrap(), LocalFraction::Zero);
    assert_eq!(local_fraction_lp(&pr).unwrap().value, Surd::default());

    let mermin = mermin_ghz_game();
    let ghz = ghz_xy_behavior();
    assert_eq!(local_fraction_support_check(&mermin, &ghz).unwrap(), LocalFraction::Zero);
    assert_eq!(local_fraction_lp(&ghz).unwrap().value, Surd::default());

    let t = tsirelson_behavior().unwrap();
    assert_eq!(local_fraction_support_check(&chsh, &t).unwrap(), LocalFraction::Inconclusive);
    let lf = local_fraction_lp(&t).unwrap().value;
    assert!(lf > Surd::default() && lf < one());
}

/// X/Y measurements on a GHZ state: only the full three-body correlators on
/// even-weight inputs are nonzero, equal to +1 at XXX and -1 otherwise.
fn ghz_xy_behavior() -> Behavior {
    let sc = sdlift::games::mermin_ghz_game().scenario;
    let table = (0..8)
        .map(|xi| {
            let x = sc.input_tuple(xi);
            let w: usize = x.iter().sum();
            (0..8)
                .map(|ai| {
                    let minus: usize = sc.outcome_tuple(&x, ai).iter().sum();
                    match w {
                        0 => Surd::from_ratio(minus.is_multiple_of(2) as i64, 4),
                        2 => Surd::from_ratio((minus % 2 == 1) as i64, 4),
                        _ => Surd::from_ratio(1, 8),
                    }
                })
                .collect()
        })
        .collect();
    Behavior::new(sc, table).unwrap()
}

#[test]
fn float_intersection_bounds_verify_within_tolerance() {
    let r = theorem3_verify_with::<f64>(&1e-9).unwrap();
    assert!(r.ok(), "{}", r.summary());
    assert!((r.entries[0].optimum - 0.75).abs() < 1e-9);
}
