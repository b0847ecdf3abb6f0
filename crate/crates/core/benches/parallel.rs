use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use distcheck::exec::Executor;
use distcheck::implication::{decide_implication_with, ImplicationOptions};
use distcheck::parser::{parse_constraint, parse_constraints, ParseOptions};
use distcheck::verify::random::{random_constraint_set, random_instance, Shape};
use distcheck::{model_check, Domain, Value};

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn enumeration(c: &mut Criterion) {
    let sigma = parse_constraints(&fixture("range_sigma.dc")).unwrap();
    let tau = parse_constraint(&fixture("range_tau.dc"), &ParseOptions::default()).unwrap();
    let mut group = c.benchmark_group("canonical_enumeration");
    for (name, jobs) in [("sequential", Some(1)), ("parallel", None)] {
        let opts = ImplicationOptions { jobs, force_enumeration: true, ..ImplicationOptions::new(Domain::Rat) };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| decide_implication_with(&sigma, &tau, &opts).unwrap())
        });
    }
    group.finish();
}

fn model_checking(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let shape = Shape::small();
    let sigma = random_constraint_set(&mut rng, &shape);
    let values: Vec<Value> = (0..4).map(Value::int).collect();
    let instances: Vec<_> = (0..512).map(|_| random_instance(&mut rng, &shape.schema(), &values, 3, 0.4)).collect();
    let mut group = c.benchmark_group("model_check_batch");
    for (name, exec) in [("sequential", Executor::sequential()), ("parallel", Executor::new(None))] {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| exec.map(&instances, |d| model_check(d, &sigma).unwrap().is_empty()))
        });
    }
    group.finish();
}

criterion_group!(benches, enumeration, model_checking);
criterion_main!(benches);
