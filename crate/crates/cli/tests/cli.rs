use std::path::PathBuf;
use std::process::{Command, Output};

use distcheck::parser::{parse_constraint, parse_constraints, parse_instance, ParseOptions};
use distcheck::{model_check, violated_by};

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_distcheck")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn range_implication_holds_in_every_domain() {
    for d in ["nat", "int", "rat"] {
        let o = run(&["implies", "--domain", d, &fixture("range_sigma.dc"), &fixture("range_tau.dc")]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert_eq!(stdout(&o), "HOLDS\n");
    }
}

#[test]
fn refutation_prints_a_checkable_countermodel() {
    let o = run(&["implies", &fixture("range_sigma_weak.dc"), &fixture("range_tau.dc")]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(out.starts_with("REFUTED\n"));
    let d = parse_instance(&out[out.find("global").unwrap()..]).unwrap();
    let sigma = parse_constraints(&std::fs::read_to_string(fixture("range_sigma_weak.dc")).unwrap()).unwrap();
    let tau =
        parse_constraint(&std::fs::read_to_string(fixture("range_tau.dc")).unwrap(), &ParseOptions::default()).unwrap();
    assert!(model_check(&d, &sigma).unwrap().is_empty());
    // Some valuation of the body must lack a head extension.
    let body: Vec<_> = tau.body().to_vec();
    let vals = distcheck::find_valuations(&body, tau.comparisons(), &d);
    assert!(vals.iter().any(|v| violated_by(&d, &tau, v)));
}

#[test]
fn non_data_full_sigma_is_a_fragment_error() {
    let o = run(&["implies", &fixture("salary_pc.dc"), &fixture("salary_strong_pc.dc")]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("`y2`"), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
}

#[test]
fn two_rule_pair_has_bounded_context() {
    let o = run(&["classify", &fixture("bounded_context.dc")]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    for line in ["# data-full: yes", "# bounded-context: yes", "# verdict: PI2/NP"] {
        assert!(out.lines().any(|l| l == line), "missing {line:?} in\n{out}");
    }
    let kv = stdout(&run(&["classify", "--format", "kv", &fixture("bounded_context.dc")]));
    assert!(kv.lines().all(|l| l.contains('=')), "{kv}");
    assert!(kv.contains("verdict=PI2/NP\n"));
}

#[test]
fn parse_errors_carry_spans() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.dc");
    std::fs::write(&bad, "R(x) -> S(x).\nR(x) -> S(x\n").unwrap();
    let o = run(&["classify", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.contains("bad.dc:3:1") || err.contains("bad.dc:2:"), "{err}");
    assert!(err.contains('^'));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&run(&["implies"])), 2);
    assert_eq!(code(&run(&["implies", "--domain", "real", "a", "b"])), 2);
    assert_eq!(code(&run(&["implies", "/nonexistent/a.dc", "/nonexistent/b.dc"])), 2);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn certain_answers_of_the_salary_example() {
    let o = run(&["certain", &fixture("salary.cq"), &fixture("salary.dinst"), &fixture("salary.dc")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().last(), Some("global { H(2,300) }"));
    parse_instance(&out).unwrap();
}

#[test]
fn certain_answers_reject_global_heads() {
    let dir = tempfile::tempdir().unwrap();
    let sigma = dir.path().join("g.dc");
    std::fs::write(&sigma, "Emp(x,y)@k -> Sal(y,y).\n").unwrap();
    let o = run(&["certain", &fixture("salary.cq"), &fixture("salary.dinst"), sigma.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
}

#[test]
fn parallel_correctness_verdicts() {
    let o = run(&["pc", "--strong", &fixture("dept.cq"), &fixture("hash_emp.dc")]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "STRONGLY PARALLEL-CORRECT\n"));
    let o = run(&["pc", &fixture("salary.cq"), &fixture("hash_emp.dc")]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("NOT PARALLEL-CORRECT\n"));
}

#[test]
fn chase_output_reparses_and_traces_as_comments() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("m.dinst");
    std::fs::write(&inst, "global { Msg(1,7) Msg(2,7) Range(0,5) }\nlocal 1 { Msg(1,7) }\n").unwrap();
    let o = run(&["chase", "--trace", "--stats", &fixture("range_sigma.dc"), inst.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    let steps: Vec<&str> = out.lines().filter(|l| l.starts_with("# #")).collect();
    assert!(!steps.is_empty());
    assert!(out.contains(&format!("# steps: {}\n", steps.len())));
    let d = parse_instance(&out).unwrap();
    let sigma = parse_constraints(&std::fs::read_to_string(fixture("range_sigma.dc")).unwrap()).unwrap();
    assert!(model_check(&d, &sigma).unwrap().is_empty());
}

#[test]
fn step_budget_can_be_overridden() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("m.dinst");
    std::fs::write(&inst, "global { Msg(1,7) Msg(2,7) Range(0,5) }\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_distcheck"))
        .args(["chase", &fixture("range_sigma.dc"), inst.to_str().unwrap()])
        .env("DISTCHECK_STEP_BUDGET", "1")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("budget of 1"), "{}", stderr(&o));
}

#[test]
fn schemes_emit_parseable_constraints() {
    let cases: [&[&str]; 5] = [
        &["scheme", "nonskip", "--schema", "R/2,S/1"],
        &["scheme", "hash", "--relation", "Emp", "--arity", "2", "--keys", "2"],
        &["scheme", "range", "--relation", "Msg", "--arity", "2", "--key", "1"],
        &[
            "scheme",
            "copart",
            "--link",
            "Lineitem/2",
            "--link",
            "Orders/2:2=1",
            "--link",
            "Customer/2:2=1",
            "--root-keys",
            "1",
        ],
        &["scheme", "hypercube", "TRIANGLE", "--map", "1=2", "--map", "1=1,2=2", "--map", "2=1"],
    ];
    let triangle = fixture("triangle.cq");
    for args in cases {
        let args: Vec<&str> = args.iter().map(|a| if *a == "TRIANGLE" { triangle.as_str() } else { a }).collect();
        let o = run(&args);
        assert_eq!(code(&o), 0, "{args:?}: {}", stderr(&o));
        let set = parse_constraints(&stdout(&o)).unwrap();
        assert!(!set.is_empty());
    }
    let o = run(&["scheme", "hash", "--relation", "Emp", "--arity", "2", "--keys", "3"]);
    assert_eq!(code(&o), 2);
    let o = run(&["scheme", "hypercube", &triangle, "--dims", "3", "--map", "1=2", "--map", "1=1", "--map", "3=1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn copartition_scheme_implies_the_meet() {
    let dir = tempfile::tempdir().unwrap();
    let sigma = dir.path().join("c.dc");
    let o = run(&[
        "scheme",
        "copart",
        "--link",
        "Lineitem/2",
        "--link",
        "Orders/2:2=1",
        "--link",
        "Customer/2:2=1",
        "--root-keys",
        "1",
    ]);
    std::fs::write(&sigma, stdout(&o)).unwrap();
    let o = run(&["implies", sigma.to_str().unwrap(), &fixture("copartition_meet.dc")]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "HOLDS\n"));
}

#[test]
fn hardgen_pairs_reparse_and_decide() {
    let dir = tempfile::tempdir().unwrap();
    for (machine, word, expect) in [("accept.atm", "a", 0), ("loop.atm", "a", 1), ("accept.atm", "", 0)] {
        let (s, t) = (dir.path().join("s.dc"), dir.path().join("t.dc"));
        let o = run(&[
            "hardgen",
            &fixture(machine),
            word,
            "--sigma-out",
            s.to_str().unwrap(),
            "--tau-out",
            t.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let o = run(&["implies", s.to_str().unwrap(), t.to_str().unwrap()]);
        assert_eq!(code(&o), expect, "{machine} on {word:?}");
    }
    let o = run(&["hardgen", &fixture("accept.atm"), "b"]);
    assert_eq!(code(&o), 2);
    let o = run(&["hardgen", &fixture("accept.atm"), "a"]);
    let out = stdout(&o);
    let (sigma, tau) = out.split_once("# tau\n").unwrap();
    parse_constraints(sigma).unwrap();
    parse_constraint(tau, &ParseOptions::default()).unwrap();
}

#[test]
fn eval_reports_missing_answers() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("e.dinst");
    std::fs::write(&inst, "global { Emp(1,10) Emp(2,10) }\nlocal 1 { Emp(1,10) }\nlocal 2 { Emp(2,10) }\n").unwrap();
    let o = run(&["eval", &fixture("dept.cq"), inst.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("# missing: { Pair(1,2) Pair(2,1) }"), "{}", stdout(&o));
}

#[test]
fn output_is_identical_across_job_counts() {
    let cases: Vec<Vec<String>> = vec![
        vec!["implies".into(), "--stats".into(), fixture("range_sigma.dc"), fixture("range_tau.dc")],
        vec!["implies".into(), "--stats".into(), fixture("range_sigma_weak.dc"), fixture("range_tau.dc")],
        vec!["implies".into(), "--format".into(), "kv".into(), fixture("range_sigma_weak.dc"), fixture("range_tau.dc")],
        vec!["pc".into(), "--stats".into(), fixture("salary.cq"), fixture("hash_emp.dc")],
        vec!["certain".into(), "--stats".into(), fixture("salary.cq"), fixture("salary.dinst"), fixture("salary.dc")],
    ];
    for args in cases {
        let outs = ["1", "8"].map(|j| {
            let mut a: Vec<&str> = args.iter().map(String::as_str).collect();
            a.extend(["--jobs", j]);
            run(&a)
        });
        assert_eq!(outs[0].stdout, outs[1].stdout, "{args:?}");
        assert_eq!(outs[0].status, outs[1].status);
    }
}
