use std::cmp::Ordering;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use distcheck::chase::{run_chase_with, step_budget, ChaseOptions};
use distcheck::classifier::{classify_kind, in_fragment, type_tags, Fragment, Tag};
use distcheck::exec::Executor;
use distcheck::implication::{decide_implication, decide_implication_with, ImplicationOptions, Verdict};
use distcheck::parser::{parse_constraints, parse_instance, render_constraints, render_instance};
use distcheck::pc::{encode_pc, encode_strong_pc, pc_on_instance};
use distcheck::verify::brute_force_refute;
use distcheck::verify::random::{random_constraint, random_constraint_set, random_instance, random_query, Shape};
use distcheck::{model_check, normalize_set, satisfies, violated_by, Constraint, Domain, Sym, Value};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn values(n: i64) -> Vec<Value> {
    (0..n).map(Value::int).collect()
}

fn rich_shape() -> Shape {
    Shape {
        relations: vec![(Sym::new("R"), 1), (Sym::new("S"), 2), (Sym::new("T"), 0)],
        comparisons: true,
        constants: vec![Value::int(-1), Value::int(0), Value::ratio(1, 2).unwrap()],
        data_full: false,
        ..Shape::small()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn value_order_is_numeric(a in -1000i64..1000, b in 1i64..50, c in -1000i64..1000, d in 1i64..50) {
        let (x, y) = (Value::ratio(a, b).unwrap(), Value::ratio(c, d).unwrap());
        let exact = (i128::from(a) * i128::from(d)).cmp(&(i128::from(c) * i128::from(b)));
        prop_assert_eq!(x.cmp(&y), exact);
        prop_assert_eq!(x == y, exact == Ordering::Equal);
    }

    #[test]
    fn constraint_sets_round_trip(seed in any::<u64>()) {
        let set = random_constraint_set(&mut rng(seed), &rich_shape());
        let text = render_constraints(&set);
        let back = parse_constraints(&text).unwrap();
        prop_assert_eq!(back.constraints(), set.constraints(), "{}", text);
    }

    #[test]
    fn instances_round_trip(seed in any::<u64>()) {
        let d = random_instance(&mut rng(seed), &rich_shape().schema(), &values(3), 3, 0.3);
        prop_assert_eq!(parse_instance(&render_instance(&d)).unwrap(), d);
    }

    #[test]
    fn chase_terminates_in_budget_and_succeeds_into_a_model(seed in any::<u64>()) {
        let mut r = rng(seed);
        let shape = Shape { comparisons: true, constants: values(2), ..Shape::small() };
        let sigma = random_constraint_set(&mut r, &shape);
        let d = random_instance(&mut r, &shape.schema(), &values(3), 2, 0.3);
        let budget = step_budget(&d, &sigma).unwrap();
        let trace = run_chase_with(&d, &sigma, &ChaseOptions::default()).unwrap();
        prop_assert!(trace.steps.len() as u64 <= budget);
        prop_assert_eq!(trace.replay(), trace.final_instance().clone());
        if trace.succeeded() {
            let result = trace.final_instance();
            prop_assert!(model_check(result, &sigma).unwrap().is_empty());
            prop_assert!(d.global().is_subset(result.global()));
        }
    }

    #[test]
    fn refutations_are_sound_and_agree_with_the_oracle(seed in any::<u64>()) {
        let mut r = rng(seed);
        let shape = Shape::small();
        let sigma = random_constraint_set(&mut r, &shape);
        let tau = random_constraint(&mut r, &shape);
        let verdict = decide_implication(&sigma, &tau, Domain::Rat).unwrap();
        if let Verdict::Refuted { countermodel, witness, .. } = &verdict {
            prop_assert!(model_check(countermodel, &sigma).unwrap().is_empty());
            prop_assert!(violated_by(countermodel, &tau, witness));
        }
        if let Some(cm) = brute_force_refute(&sigma, &tau, &values(2), 2).unwrap() {
            prop_assert!(!verdict.holds(), "oracle countermodel:\n{}", render_instance(&cm));
        }
    }

    #[test]
    fn single_database_mode_matches_enumeration(seed in any::<u64>()) {
        let mut r = rng(seed);
        let shape = Shape::small();
        let sigma = random_constraint_set(&mut r, &shape);
        let tau = random_constraint(&mut r, &shape);
        let fast = decide_implication(&sigma, &tau, Domain::Rat).unwrap();
        let opts = ImplicationOptions { force_enumeration: true, ..ImplicationOptions::new(Domain::Rat) };
        prop_assert_eq!(fast.holds(), decide_implication_with(&sigma, &tau, &opts).unwrap().holds());
    }

    #[test]
    fn verdicts_do_not_depend_on_job_count(seed in any::<u64>()) {
        let mut r = rng(seed);
        let shape = Shape { comparisons: true, ..Shape::small() };
        let sigma = random_constraint_set(&mut r, &shape);
        let tau = random_constraint(&mut r, &shape);
        let run = |jobs| {
            let opts = ImplicationOptions { jobs: Some(jobs), ..ImplicationOptions::new(Domain::Int) };
            decide_implication_with(&sigma, &tau, &opts).unwrap()
        };
        prop_assert_eq!(run(1), run(4));
    }

    #[test]
    fn positive_tags_and_fragments_are_monotone_in_the_bound(seed in any::<u64>(), b in 0usize..4) {
        let shape = Shape { max_body: 4, node_vars: 3, ..Shape::small() };
        let c = random_constraint(&mut rng(seed), &shape);
        let sigma = distcheck::ConstraintSet::with_schema(shape.schema(), vec![c]).unwrap();
        for part in normalize_set(&sigma).unwrap() {
            let kind = classify_kind(&part.rule).unwrap().kind;
            let (lo, hi) = (type_tags(&part.rule, b).unwrap(), type_tags(&part.rule, b + 1).unwrap());
            for t in [Tag::G1, Tag::G2, Tag::C1, Tag::C2, Tag::E1, Tag::E2] {
                prop_assert!(!lo.has(t) || hi.has(t));
            }
            for f in Fragment::ALL {
                prop_assert!(!in_fragment(f, kind, &lo) || in_fragment(f, kind, &hi));
            }
        }
    }

    #[test]
    fn pc_encodings_characterise_parallel_correctness(seed in any::<u64>()) {
        let mut r = rng(seed);
        let relations = [(Sym::new("R"), 2), (Sym::new("S"), 1)];
        let q = random_query(&mut r, &relations, 3, 3);
        let (pc, strong): (Constraint, Constraint) = (encode_pc(&q).into(), encode_strong_pc(&q).into());
        let schema = relations.iter().cloned().collect();
        for _ in 0..8 {
            let d = random_instance(&mut r, &schema, &values(3), 3, 0.4);
            let correct = pc_on_instance(&q, &d).is_correct();
            prop_assert_eq!(satisfies(&d, &pc), correct);
            prop_assert!(!satisfies(&d, &strong) || correct);
        }
    }

    #[test]
    fn executor_preserves_order(items in proptest::collection::vec(any::<i32>(), 0..200)) {
        let expected: Vec<i64> = items.iter().map(|&x| i64::from(x) * 3).collect();
        for exec in [Executor::sequential(), Executor::new(Some(3))] {
            prop_assert_eq!(&exec.map(&items, |&x| i64::from(x) * 3), &expected);
        }
    }
}
